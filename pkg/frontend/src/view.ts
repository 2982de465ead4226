// DOM rendering. render() rebuilds the tree as a pure function of the view
// model, so reloading the page and replaying snapshot+deltas reproduces
// identical content.

import {
  branchGroups,
  entriesFor,
  groupColor,
  humanComboPart,
  parseCombination,
  summarizeStatuses,
} from "./state.js";
import type { Snapshot, WindowDoc } from "./types.js";

export type Mode = "branch" | "linear";

export interface ViewModel {
  snap: Snapshot | null;
  mode: Mode;
  selectedCell: string | null;
  scrollY: number;
  connected: boolean;
  toasts: string[];
  // uncommitted editor drafts, cell id -> text
  editing: Record<string, string>;
}

export interface Handlers {
  onBranch(windowId: string): void;
  onRun(cellId: string): void;
  onSelect(cellId: string): void;
  onCommitEdit(cellId: string, source: string): void;
  onDelete(cellId: string): void;
  onMove(cellId: string, dir: -1 | 1): void;
  onExtract(windowId: string, cellId: string): void;
  onWheel(deltaY: number, deltaMode: number): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function render(root: HTMLElement, vm: ViewModel, h: Handlers): void {
  const doc = root.ownerDocument;
  const app = el(doc, "div", "bb-app");

  if (!vm.connected) {
    app.appendChild(
      el(doc, "div", "bb-banner", "connection lost — showing last known state"),
    );
  }

  if (vm.snap === null) {
    app.appendChild(el(doc, "p", "bb-loading", "connecting…"));
    root.replaceChildren(app);
    return;
  }
  const snap = vm.snap;

  const header = el(doc, "header", "bb-header");
  header.appendChild(el(doc, "h1", "bb-title", snap.notebook.title || snap.notebook_id));
  header.appendChild(
    el(doc, "span", "bb-mode", vm.mode === "branch" ? "branch mode" : "linear mode"),
  );
  app.appendChild(header);

  const desktop = el(doc, "div", "bb-desktop");
  desktop.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    h.onWheel(ev.deltaY, ev.deltaMode ?? 0);
  });
  const canvas = el(doc, "div", "bb-canvas");
  canvas.style.transform = `translateY(${-vm.scrollY}px)`;

  for (const stage of snap.notebook.stages) {
    for (const win of stage.alternatives) {
      canvas.appendChild(renderWindow(doc, snap, win, stage.alternatives.length, vm, h));
    }
  }
  desktop.appendChild(canvas);
  app.appendChild(desktop);

  if (vm.toasts.length > 0) {
    const toasts = el(doc, "div", "bb-toasts");
    for (const t of vm.toasts) toasts.appendChild(el(doc, "div", "bb-toast", t));
    app.appendChild(toasts);
  }

  root.replaceChildren(app);
}

function renderWindow(
  doc: Document,
  snap: Snapshot,
  win: WindowDoc,
  stageSize: number,
  vm: ViewModel,
  h: Handlers,
): HTMLElement {
  const section = el(doc, "section", "bb-window");
  section.dataset.window = win.id;
  if (stageSize > 1) section.classList.add("bb-alternative");

  const rect = snap.layout.desktop[win.id];
  const pose = snap.layout.overrides[win.id];
  if (rect) {
    section.style.left = `${pose ? pose.x : rect.x}px`;
    section.style.top = `${pose ? pose.y : rect.y}px`;
    section.style.width = `${rect.width}px`;
    section.style.height = `${rect.height}px`;
    section.dataset.column = String(rect.column);
  }

  const head = el(doc, "h3", "bb-window-title");
  head.appendChild(el(doc, "span", "bb-window-label", win.label));
  if (vm.mode === "branch") {
    const btn = el(doc, "button", "bb-branch", "Branch");
    btn.dataset.window = win.id;
    btn.addEventListener("click", () => h.onBranch(win.id));
    head.appendChild(btn);
  }
  section.appendChild(head);

  for (const cell of win.cells) {
    const byCombo = snap.exec.statuses[cell.id] ?? {};
    const summary = summarizeStatuses(byCombo);
    const cellDiv = el(doc, "div", `bb-cell bb-cell-${summary}`);
    cellDiv.dataset.cell = cell.id;
    if (vm.selectedCell === cell.id) cellDiv.classList.add("bb-selected");
    cellDiv.addEventListener("click", () => h.onSelect(cell.id));

    const editor = el(doc, "textarea", "bb-source") as HTMLTextAreaElement;
    editor.value = vm.editing[cell.id] ?? cell.source;
    editor.addEventListener("change", () => h.onCommitEdit(cell.id, editor.value));
    cellDiv.appendChild(editor);

    const bar = el(doc, "div", "bb-cell-bar");
    const run = el(doc, "button", "bb-run", "Run");
    run.dataset.cell = cell.id;
    run.addEventListener("click", (ev) => {
      ev.stopPropagation();
      h.onRun(cell.id);
    });
    bar.appendChild(run);
    const extract = el(doc, "button", "bb-extract", "Extract");
    extract.addEventListener("click", (ev) => {
      ev.stopPropagation();
      h.onExtract(win.id, cell.id);
    });
    bar.appendChild(extract);
    const up = el(doc, "button", "bb-move-up", "↑");
    up.addEventListener("click", (ev) => {
      ev.stopPropagation();
      h.onMove(cell.id, -1);
    });
    bar.appendChild(up);
    const down = el(doc, "button", "bb-move-down", "↓");
    down.addEventListener("click", (ev) => {
      ev.stopPropagation();
      h.onMove(cell.id, 1);
    });
    bar.appendChild(down);
    const del = el(doc, "button", "bb-delete", "Delete");
    del.dataset.cell = cell.id;
    del.addEventListener("click", (ev) => {
      ev.stopPropagation();
      h.onDelete(cell.id);
    });
    bar.appendChild(del);

    const statuses = el(doc, "span", "bb-statuses");
    for (const [combo, status] of Object.entries(byCombo).sort()) {
      const chip = el(doc, "span", `bb-status bb-status-${status}`, status);
      chip.dataset.combination = combo;
      chip.title = combo === "" ? win.label : combo;
      statuses.appendChild(chip);
    }
    bar.appendChild(statuses);
    cellDiv.appendChild(bar);
    section.appendChild(cellDiv);
  }

  const entries = entriesFor(snap, win.id);
  if (entries.length > 0) {
    section.appendChild(renderResults(doc, snap, win, entries));
  }
  return section;
}

function renderResults(
  doc: Document,
  snap: Snapshot,
  win: WindowDoc,
  entries: ReturnType<typeof entriesFor>,
): HTMLElement {
  const table = el(doc, "table", "bb-results");
  const body = doc.createElement("tbody");
  const merged = branchGroups(snap.notebook).length > 0;
  for (const entry of entries) {
    const row = el(doc, "tr", "bb-entry");
    row.dataset.combination = entry.combination;

    const comboCell = el(doc, "td", "bb-combo");
    if (entry.combination === "") {
      if (merged) comboCell.appendChild(el(doc, "span", "bb-chip", win.label));
    } else {
      for (const part of parseCombination(entry.combination)) {
        const chip = el(
          doc,
          "span",
          "bb-chip",
          humanComboPart(part, snap.notebook),
        );
        chip.style.backgroundColor = groupColor(part.stage, snap.notebook);
        comboCell.appendChild(chip);
      }
    }
    row.appendChild(comboCell);

    const values = el(doc, "td", "bb-values");
    if (entry.inherited) {
      values.appendChild(el(doc, "span", "bb-no-output", "no output"));
    } else {
      for (const item of entry.items) {
        values.appendChild(el(doc, "div", "bb-item", item));
      }
      if (entry.error) {
        values.appendChild(
          el(
            doc,
            "div",
            "bb-error",
            `${entry.error.kind}: ${entry.error.message} (line ${entry.error.line}, col ${entry.error.col})`,
          ),
        );
      } else if (entry.items.length === 0) {
        values.appendChild(el(doc, "span", "bb-no-output", "no output"));
      }
    }
    row.appendChild(values);
    body.appendChild(row);
  }
  table.appendChild(body);
  return table;
}
