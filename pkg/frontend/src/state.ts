// Client replica: a snapshot advanced by ordered deltas. No output is ever
// computed locally; the engine's results only pass through.

import type {
  CellDoc,
  Delta,
  NotebookDoc,
  OutputEntry,
  Snapshot,
  WindowDoc,
} from "./types.js";

export function emptyStatuses(
  nb: NotebookDoc,
): Record<string, Record<string, string>> {
  const statuses: Record<string, Record<string, string>> = {};
  for (const stage of nb.stages) {
    for (const win of stage.alternatives) {
      for (const cell of win.cells) statuses[cell.id] = {};
    }
  }
  return statuses;
}

// The one reducer. Mutates and returns the snapshot; applying every delta
// after a snapshot's server_seq reproduces a fresh snapshot exactly.
export function applyDelta(state: Snapshot, delta: Delta): Snapshot {
  state.server_seq = delta.server_seq;
  switch (delta.change) {
    case "notebook_changed": {
      state.notebook = delta.notebook;
      if (delta.reset_exec) {
        state.exec = { statuses: emptyStatuses(delta.notebook), outputs: {} };
      }
      break;
    }
    case "status_changed": {
      const cell = (state.exec.statuses[delta.cell_id] ??= {});
      cell[delta.combination_label] = delta.status;
      break;
    }
    case "output_added": {
      const entries = (state.exec.outputs[delta.window_id] ??= []);
      const i = entries.findIndex(
        (e) => e.combination === delta.entry.combination,
      );
      if (i >= 0) entries[i] = delta.entry;
      else entries.push(delta.entry);
      break;
    }
    case "layout_changed": {
      const wid = delta.window_id;
      if (delta.pose !== undefined) {
        state.layout.overrides[wid] = delta.pose;
      } else if (delta.rect == null) {
        delete state.layout.desktop[wid];
        delete state.layout.overrides[wid];
      } else {
        state.layout.desktop[wid] = delta.rect;
      }
      break;
    }
  }
  return state;
}

// -- notebook lookups -------------------------------------------------

export function findWindow(
  nb: NotebookDoc,
  windowId: string,
): { stageIndex: number; window: WindowDoc } | null {
  for (let si = 0; si < nb.stages.length; si++) {
    for (const win of nb.stages[si].alternatives) {
      if (win.id === windowId) return { stageIndex: si, window: win };
    }
  }
  return null;
}

export function findCell(
  nb: NotebookDoc,
  cellId: string,
): { window: WindowDoc; index: number; cell: CellDoc } | null {
  for (const stage of nb.stages) {
    for (const win of stage.alternatives) {
      const i = win.cells.findIndex((c) => c.id === cellId);
      if (i >= 0) return { window: win, index: i, cell: win.cells[i] };
    }
  }
  return null;
}

export function entriesFor(state: Snapshot, windowId: string): OutputEntry[] {
  return state.exec.outputs[windowId] ?? [];
}

// -- combination labels -------------------------------------------------

// Stage indices that currently hold more than one alternative.
export function branchGroups(nb: NotebookDoc): number[] {
  const groups: number[] = [];
  nb.stages.forEach((s, i) => {
    if (s.alternatives.length > 1) groups.push(i);
  });
  return groups;
}

export interface ComboPart {
  stage: number;
  alt: number;
}

export function parseCombination(label: string): ComboPart[] {
  if (label === "") return [];
  return label.split(";").map((part) => {
    const m = /^s(\d+)=(\d+)$/.exec(part);
    if (!m) throw new Error(`bad combination label part '${part}'`);
    return { stage: Number(m[1]), alt: Number(m[2]) };
  });
}

// Human name for one label component: groups are lettered A, B, ... in
// stage order; alternatives are numbered from 1.
export function humanComboPart(part: ComboPart, nb: NotebookDoc): string {
  const rank = branchGroups(nb).indexOf(part.stage);
  const name =
    rank >= 0 && rank < 26
      ? `branch ${String.fromCharCode(65 + rank)}`
      : `s${part.stage}`;
  return `${name}: alt ${part.alt + 1}`;
}

export function humanCombination(label: string, nb: NotebookDoc): string {
  return parseCombination(label)
    .map((p) => humanComboPart(p, nb))
    .join(" × ");
}

const PALETTE = [
  "#4269d0",
  "#efb118",
  "#ff725c",
  "#6cc5b0",
  "#3ca951",
  "#ff8ab7",
  "#a463f2",
  "#97bbf5",
];

// One stable hue per branch group, keyed by the group's rank in stage order.
export function groupColor(stageIndex: number, nb: NotebookDoc): string {
  const rank = branchGroups(nb).indexOf(stageIndex);
  return PALETTE[(rank >= 0 ? rank : stageIndex) % PALETTE.length];
}

// -- cell status summary ------------------------------------------------

const STATUS_PRIORITY = ["error", "stale", "running", "queued", "skipped", "ok"];

// Collapse a cell's per-combination statuses to one class for styling.
export function summarizeStatuses(byCombo: Record<string, string>): string {
  const present = new Set(Object.values(byCombo));
  for (const status of STATUS_PRIORITY) {
    if (present.has(status)) return status;
  }
  return "idle";
}

// -- wheel events ---------------------------------------------------------

// Signed scroll ticks for one wheel event. Pixel mode counts ~100px per
// notch, line mode ~3 lines, page mode one tick per page; any nonzero
// delta is at least one tick so every gesture is observable.
export function wheelTicks(deltaY: number, deltaMode = 0): number {
  if (deltaY === 0) return 0;
  const unit = deltaMode === 1 ? 3 : deltaMode === 2 ? 1 : 100;
  const magnitude = Math.max(1, Math.round(Math.abs(deltaY) / unit));
  return deltaY > 0 ? magnitude : -magnitude;
}
