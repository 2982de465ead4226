"""Staged notebook graph and structural editing operations.

A notebook is an ordered list of stages; each stage holds one or more
alternative windows; each window holds ordered cells. A stage with two or
more alternatives is a branch group. Merging is implicit: the next stage
consumes every upstream combination.

All operations are value-semantic: they return a new notebook and never
mutate the input observably.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

SCHEMA_VERSION = 1


class NotebookError(Exception):
    """Base for structural editing errors."""


class UnknownWindow(NotebookError):
    pass


class UnknownCell(NotebookError):
    pass


class UnknownStage(NotebookError):
    pass


class EmptySelection(NotebookError):
    pass


class IndexOutOfRange(NotebookError):
    pass


@dataclass
class Cell:
    id: str
    source: str


@dataclass
class Window:
    id: str
    label: str
    cells: list[Cell] = field(default_factory=list)


@dataclass
class Stage:
    id: str
    alternatives: list[Window] = field(default_factory=list)

    @property
    def is_group(self) -> bool:
        return len(self.alternatives) >= 2

    @property
    def group_size(self) -> int:
        return len(self.alternatives)


@dataclass
class Notebook:
    id: str
    version: int
    title: str
    stages: list[Stage] = field(default_factory=list)
    # unknown top-level file keys, preserved across save/load round-trips
    extras: dict = field(default_factory=dict)


def clone(nb: Notebook) -> Notebook:
    return Notebook(
        id=nb.id,
        version=nb.version,
        title=nb.title,
        extras=dict(nb.extras),
        stages=[
            Stage(
                id=s.id,
                alternatives=[
                    Window(
                        id=w.id,
                        label=w.label,
                        cells=[Cell(id=c.id, source=c.source) for c in w.cells],
                    )
                    for w in s.alternatives
                ],
            )
            for s in nb.stages
        ],
    )


def all_ids(nb: Notebook) -> set[str]:
    ids: set[str] = set()
    for s in nb.stages:
        ids.add(s.id)
        for w in s.alternatives:
            ids.add(w.id)
            for c in w.cells:
                ids.add(c.id)
    return ids


def _fresh_id(prefix: str, used: set[str]) -> str:
    n = 1
    while f"{prefix}{n}" in used:
        n += 1
    used.add(f"{prefix}{n}")
    return f"{prefix}{n}"


def _fresh_label(base: str, nb: Notebook) -> str:
    taken = {w.label for s in nb.stages for w in s.alternatives}
    candidate = f"{base} (copy)"
    n = 2
    while candidate in taken:
        candidate = f"{base} (copy {n})"
        n += 1
    return candidate


def find_window(nb: Notebook, window_id: str) -> tuple[int, int, Window]:
    """Returns (stage_index, alternative_index, window)."""
    for si, s in enumerate(nb.stages):
        for ai, w in enumerate(s.alternatives):
            if w.id == window_id:
                return si, ai, w
    raise UnknownWindow(f"unknown window '{window_id}'")


def find_cell(nb: Notebook, cell_id: str) -> tuple[int, int, int, Cell]:
    """Returns (stage_index, alternative_index, cell_index, cell)."""
    for si, s in enumerate(nb.stages):
        for ai, w in enumerate(s.alternatives):
            for ci, c in enumerate(w.cells):
                if c.id == cell_id:
                    return si, ai, ci, c
    raise UnknownCell(f"unknown cell '{cell_id}'")


def group_stages(nb: Notebook, before: Optional[int] = None) -> list[tuple[int, int]]:
    """(stage_index, group_size) for every branch group, optionally < before."""
    end = len(nb.stages) if before is None else before
    return [
        (i, s.group_size) for i, s in enumerate(nb.stages[:end]) if s.is_group
    ]


def validate(nb: Notebook) -> list[str]:
    """Structural invariant check; returns a list of problems (empty = ok)."""
    problems: list[str] = []
    if nb.version != SCHEMA_VERSION:
        problems.append(f"unsupported version {nb.version}")
    seen: set[str] = set()
    for si, s in enumerate(nb.stages):
        if not s.alternatives:
            problems.append(f"stage {si} ('{s.id}') has no alternatives")
        for ident in [s.id] + [w.id for w in s.alternatives] + [
            c.id for w in s.alternatives for c in w.cells
        ]:
            if not ident:
                problems.append(f"empty identifier in stage {si}")
            elif ident in seen:
                problems.append(f"duplicate identifier '{ident}'")
            seen.add(ident)
    return problems


def new_linear(window_sources: list[list[str]], title: str = "untitled") -> Notebook:
    """One single-alternative stage per inner list of cell sources."""
    nb = Notebook(id="nb", version=SCHEMA_VERSION, title=title, stages=[])
    used: set[str] = set()
    cell_n = 0
    for i, sources in enumerate(window_sources):
        stage_id = _fresh_id("s", used)
        window_id = _fresh_id("w", used)
        cells = []
        for src in sources:
            cell_n += 1
            cid = f"c{cell_n}"
            used.add(cid)
            cells.append(Cell(id=cid, source=src))
        nb.stages.append(
            Stage(
                id=stage_id,
                alternatives=[Window(id=window_id, label=f"Window {i + 1}", cells=cells)],
            )
        )
    return nb


def branch(nb: Notebook, window_id: str) -> tuple[Notebook, str]:
    """Append a deep copy of the window as a new alternative of its stage.

    The copy gets fresh window and cell ids and a "(copy)" label suffix;
    downstream stages are not copied.
    """
    out = clone(nb)
    si, _, src = find_window(out, window_id)
    used = all_ids(out)
    new_wid = _fresh_id("w", used)
    new_cells = [
        Cell(id=_fresh_id("c", used), source=c.source) for c in src.cells
    ]
    copy = Window(id=new_wid, label=_fresh_label(src.label, out), cells=new_cells)
    out.stages[si].alternatives.append(copy)
    return out, new_wid


def extract(
    nb: Notebook, source_window_id: str, cell_ids: Iterable[str]
) -> tuple[Notebook, str]:
    """Pull cells out into a new single-alternative stage after the source stage.

    The moved cells keep their ids; only the new stage and window get fresh
    ids. The source window stays even if emptied.
    """
    wanted = list(cell_ids)
    if not wanted:
        raise EmptySelection("extract needs at least one cell")
    out = clone(nb)
    si, ai, src = find_window(out, source_window_id)
    by_id = {c.id: c for c in src.cells}
    for cid in wanted:
        if cid not in by_id:
            raise UnknownCell(f"cell '{cid}' not in window '{source_window_id}'")
    chosen = set(wanted)
    moved = [c for c in src.cells if c.id in chosen]  # source order
    src.cells = [c for c in src.cells if c.id not in chosen]
    used = all_ids(out)
    new_sid = _fresh_id("s", used)
    new_wid = _fresh_id("w", used)
    window = Window(id=new_wid, label=f"{src.label} (extract)", cells=moved)
    out.stages.insert(si + 1, Stage(id=new_sid, alternatives=[window]))
    return out, new_wid


def relocate(
    nb: Notebook, cell_id: str, target_window_id: str, target_index: int
) -> Notebook:
    """Move a cell to target_index in the target window."""
    out = clone(nb)
    si, ai, ci, cell = find_cell(out, cell_id)
    _, _, target = find_window(out, target_window_id)
    source = out.stages[si].alternatives[ai]
    source.cells.pop(ci)  # bounds below are post-removal for same-window moves
    if target_index < 0 or target_index > len(target.cells):
        raise IndexOutOfRange(
            f"index {target_index} out of range for window '{target_window_id}' "
            f"with {len(target.cells)} cells"
        )
    target.cells.insert(target_index, cell)
    return out


def delete_cells(nb: Notebook, cell_ids: Iterable[str]) -> Notebook:
    out = clone(nb)
    for cid in cell_ids:
        si, ai, ci, _ = find_cell(out, cid)
        out.stages[si].alternatives[ai].cells.pop(ci)
    return out


def delete_window(nb: Notebook, window_id: str) -> Notebook:
    """Remove a window; a stage left with no alternatives is removed too."""
    out = clone(nb)
    si, ai, _ = find_window(out, window_id)
    out.stages[si].alternatives.pop(ai)
    if not out.stages[si].alternatives:
        out.stages.pop(si)
    return out


def edit_cell(nb: Notebook, cell_id: str, new_source: str) -> Notebook:
    out = clone(nb)
    _, _, _, cell = find_cell(out, cell_id)
    cell.source = new_source
    return out
