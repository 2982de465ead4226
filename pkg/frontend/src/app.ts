// Wires the service client, the replica, telemetry, and the DOM together.
// Single event loop: commands go out one at a time (client_seq ordered),
// state comes back only through the delta stream, rendering is a pure
// function of the replica.

import { ServiceClient } from "./client.js";
import type { CommandOutcome, EventStreamHandle } from "./client.js";
import { applyDelta, findCell, wheelTicks } from "./state.js";
import { TelemetryQueue } from "./telemetry.js";
import type { Command, Delta } from "./types.js";
import { render } from "./view.js";
import type { Handlers, Mode, ViewModel } from "./view.js";

export interface AppOptions {
  mode?: Mode;
  flushDelayMs?: number;
  now?: () => number;
  onTelemetryError?: (err: unknown) => void;
}

export class App {
  readonly vm: ViewModel;
  readonly telemetry: TelemetryQueue;
  private clientSeq = 0;
  private stream: EventStreamHandle | null = null;
  private chain: Promise<unknown> = Promise.resolve();
  private readonly handlers: Handlers;

  constructor(
    private readonly root: HTMLElement,
    readonly client: ServiceClient,
    opts: AppOptions = {},
  ) {
    this.vm = {
      snap: null,
      mode: opts.mode ?? "branch",
      selectedCell: null,
      scrollY: 0,
      connected: false,
      toasts: [],
      editing: {},
    };
    this.telemetry = new TelemetryQueue(
      (events) => this.client.postTelemetry(events),
      {
        flushDelayMs: opts.flushDelayMs,
        now: opts.now,
        onError: opts.onTelemetryError,
      },
    );
    this.handlers = {
      onBranch: (windowId) => void this.branchWindow(windowId),
      onRun: (cellId) => void this.runFrom(cellId),
      onSelect: (cellId) => this.selectCell(cellId),
      onCommitEdit: (cellId, source) => void this.commitEdit(cellId, source),
      onDelete: (cellId) => void this.deleteCell(cellId),
      onMove: (cellId, dir) => void this.moveCell(cellId, dir),
      onExtract: (windowId, cellId) => void this.extractCell(windowId, cellId),
      onWheel: (deltaY, deltaMode) => this.onWheel(deltaY, deltaMode),
    };
  }

  async start(): Promise<void> {
    const snap = await this.client.snapshot();
    this.vm.snap = snap;
    this.vm.connected = true;
    this.stream = this.client.openEvents(
      snap.server_seq,
      (delta) => this.onDelta(delta),
      () => {
        this.vm.connected = false;
        this.render();
      },
    );
    this.render();
  }

  async stop(): Promise<void> {
    this.stream?.close();
    this.stream = null;
    await this.telemetry.drain();
  }

  // -- replica ---------------------------------------------------------

  private onDelta(delta: Delta): void {
    const snap = this.vm.snap;
    if (!snap || delta.server_seq <= snap.server_seq) return;
    applyDelta(snap, delta);
    // the server's document is now authoritative; drop local drafts
    if (delta.change === "notebook_changed") this.vm.editing = {};
    this.render();
  }

  private render(): void {
    render(this.root, this.vm, this.handlers);
  }

  private toast(message: string): void {
    this.vm.toasts.push(message);
    this.render();
  }

  // -- commands --------------------------------------------------------

  // One command in flight at a time; rejections surface as toasts and do
  // not break the chain for later commands.
  private send(cmd: Command): Promise<CommandOutcome> {
    const seq = ++this.clientSeq;
    const out = this.chain.then(() =>
      this.client.command({ ...cmd, client_seq: seq }),
    );
    this.chain = out.then(
      (res) => {
        if (!res.ok) this.toast(`${res.error}: ${res.message}`);
      },
      (err: unknown) => {
        this.vm.connected = false;
        this.toast(`command failed: ${String(err)}`);
      },
    );
    return out;
  }

  // -- gestures --------------------------------------------------------

  branchWindow(windowId: string): Promise<CommandOutcome> {
    this.telemetry.emit("branch_created", { window_id: windowId });
    return this.send({ op: "branch", window_id: windowId });
  }

  runFrom(cellId: string): Promise<CommandOutcome> {
    this.telemetry.emit("run_pressed", { cell_id: cellId });
    return this.send({ op: "run_from", cell_id: cellId });
  }

  commitEdit(cellId: string, source: string): Promise<CommandOutcome | null> {
    const nb = this.vm.snap?.notebook;
    const found = nb ? findCell(nb, cellId) : null;
    if (found && found.cell.source === source) {
      delete this.vm.editing[cellId];
      return Promise.resolve(null); // no-op commit, e.g. stray blur
    }
    this.vm.editing[cellId] = source;
    this.telemetry.emit("cell_edited", { cell_id: cellId });
    return this.send({ op: "edit_cell", cell_id: cellId, source });
  }

  deleteCell(cellId: string): Promise<CommandOutcome> {
    this.telemetry.emit("cell_deleted", { cell_id: cellId });
    return this.send({ op: "delete_cells", cell_ids: [cellId] });
  }

  moveCell(cellId: string, dir: -1 | 1): Promise<CommandOutcome | null> {
    const nb = this.vm.snap?.notebook;
    const found = nb ? findCell(nb, cellId) : null;
    if (!found) return Promise.resolve(null);
    const target = found.index + dir;
    // target index is relative to the window with the cell removed
    if (target < 0 || target >= found.window.cells.length) {
      return Promise.resolve(null);
    }
    this.telemetry.emit("cell_relocated", { cell_id: cellId });
    return this.send({
      op: "relocate",
      cell_id: cellId,
      target_window_id: found.window.id,
      target_index: target,
    });
  }

  extractCell(windowId: string, cellId: string): Promise<CommandOutcome> {
    return this.send({ op: "extract", window_id: windowId, cell_ids: [cellId] });
  }

  moveWindow(windowId: string, x: number, y: number): Promise<CommandOutcome> {
    return this.send({ op: "move_window", window_id: windowId, x, y });
  }

  selectCell(cellId: string): void {
    if (this.vm.selectedCell !== cellId) {
      this.vm.selectedCell = cellId;
      this.render();
    }
  }

  onWheel(deltaY: number, deltaMode = 0): void {
    const ticks = wheelTicks(deltaY, deltaMode);
    if (ticks === 0) return;
    this.telemetry.emit("scroll", { ticks });
    this.vm.scrollY = Math.max(0, this.vm.scrollY + deltaY);
    this.render();
  }

  // -- test support ------------------------------------------------------

  waitUntil(
    pred: () => boolean,
    timeoutMs = 10000,
    intervalMs = 20,
  ): Promise<void> {
    return new Promise((resolve, reject) => {
      const t0 = Date.now();
      const tick = () => {
        if (pred()) return resolve();
        if (Date.now() - t0 > timeoutMs) {
          return reject(new Error("waitUntil: condition not met in time"));
        }
        setTimeout(tick, intervalMs);
      };
      tick();
    });
  }
}
