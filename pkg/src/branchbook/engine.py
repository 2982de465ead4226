"""Branch-aware notebook execution.

Executes stages in order. A branch group forks the interpreter environment
once per alternative; downstream stages run once per combination of upstream
choices. Each cell therefore evaluates once per distinct upstream
combination, never once per full downstream combination.

ExecState is owned by the caller and mutated in place by execute_all,
run_from, and invalidate. Environments checkpointed here are never mutated
afterwards (cell evaluation forks internally), so snapshots are plain
references.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .minilang import Environment, EvalError, run_source
from .model import Notebook, UnknownCell, find_cell

# cell execution statuses
IDLE = "idle"
STALE = "stale"
QUEUED = "queued"
RUNNING = "running"
OK = "ok"
ERROR = "error"
SKIPPED = "skipped"

EventHook = Optional[Callable[[str, dict], None]]


@dataclass(frozen=True)
class Combination:
    """A choice of one alternative per branch group in a stage prefix.

    choices holds (stage_index, alternative_index) pairs in ascending stage
    order; empty means a branch-free prefix.
    """

    choices: tuple[tuple[int, int], ...] = ()

    @property
    def label(self) -> str:
        return ";".join(f"s{si}={ai}" for si, ai in self.choices)

    def extend(self, stage_index: int, alt_index: int) -> "Combination":
        return Combination(self.choices + ((stage_index, alt_index),))

    def restrict(self, before: int) -> "Combination":
        return Combination(tuple(p for p in self.choices if p[0] < before))

    def choice_dict(self) -> dict[int, int]:
        return dict(self.choices)

    def matches(self, pattern: dict[int, int]) -> bool:
        d = self.choice_dict()
        return all(d.get(k) == v for k, v in pattern.items())


def parse_label(label: str) -> dict[int, int]:
    if not label:
        return {}
    out: dict[int, int] = {}
    for part in label.split(";"):
        stage, alt = part.split("=")
        out[int(stage[1:])] = int(alt)
    return out


@dataclass
class OutputEntry:
    """One window's result under one upstream combination.

    inherited marks entries whose error happened upstream (this window never
    ran); a False error entry failed in this window itself.
    """

    combination: Combination
    items: list[str] = field(default_factory=list)
    error: Optional[EvalError] = None
    inherited: bool = False


@dataclass
class ExecState:
    outputs: dict[str, list[OutputEntry]] = field(default_factory=dict)
    status: dict[tuple[str, str], str] = field(default_factory=dict)
    checkpoints: dict[tuple[str, int, int, int], Environment] = field(
        default_factory=dict
    )
    # per-(cell, lineage) rendered outputs; entries are rebuilt from these
    cell_outputs: dict[tuple[str, str], list[str]] = field(default_factory=dict)
    # evaluations per cell since the last execute_all (instrumentation)
    eval_counts: dict[str, int] = field(default_factory=dict)

    def clear(self) -> None:
        self.outputs.clear()
        self.status.clear()
        self.checkpoints.clear()
        self.cell_outputs.clear()
        self.eval_counts.clear()


def upstream_combinations(nb: Notebook, stage_index: int) -> list[Combination]:
    """Cartesian product over branch groups before stage_index.

    Lexicographic: the earliest group varies slowest, alternative indices
    ascending. A branch-free prefix yields [empty combination].
    """
    groups = [
        (i, s.group_size)
        for i, s in enumerate(nb.stages[:stage_index])
        if s.is_group
    ]
    if not groups:
        return [Combination()]
    axes = [range(size) for _, size in groups]
    out = []
    for picks in itertools.product(*axes):
        out.append(
            Combination(tuple((gi, p) for (gi, _), p in zip(groups, picks)))
        )
    return out


def full_combinations(nb: Notebook) -> list[Combination]:
    return upstream_combinations(nb, len(nb.stages))


Seed = Union[Environment, EvalError]


def _emit(on_event: EventHook, kind: str, payload: dict) -> None:
    if on_event is not None:
        on_event(kind, payload)


def _set_status(
    state: ExecState,
    cell_id: str,
    label: str,
    status: str,
    on_event: EventHook,
) -> None:
    state.status[(cell_id, label)] = status
    _emit(
        on_event,
        "status_changed",
        {"cell_id": cell_id, "combination_label": label, "status": status},
    )


def _upsert_entry(
    state: ExecState, window_id: str, entry: OutputEntry, on_event: EventHook
) -> None:
    entries = state.outputs.setdefault(window_id, [])
    for i, existing in enumerate(entries):
        if existing.combination.label == entry.combination.label:
            entries[i] = entry
            break
    else:
        entries.append(entry)
    _emit(on_event, "output_added", {"window_id": window_id, "entry": entry})


def _collect_items(state: ExecState, window, ext_label: str) -> list[str]:
    items: list[str] = []
    for cell in window.cells:
        items.extend(state.cell_outputs.get((cell.id, ext_label), []))
    return items


def _run_window(
    nb: Notebook,
    state: ExecState,
    stage_index: int,
    upstream: Combination,
    alt_index: int,
    ext: Combination,
    env: Environment,
    start_cell: int,
    on_event: EventHook,
) -> Seed:
    """Execute cells start_cell.. of one window under one lineage.

    Returns the resulting environment, or the EvalError that halted the
    window. The window's OutputEntry is rebuilt either way.
    """
    window = nb.stages[stage_index].alternatives[alt_index]
    cells = window.cells
    ck = (upstream.label, stage_index, alt_index)
    for i in range(start_cell, len(cells) + 1):
        state.checkpoints.pop(ck + (i,), None)

    for i in range(start_cell, len(cells)):
        _set_status(state, cells[i].id, ext.label, QUEUED, on_event)

    cur = env
    for i in range(start_cell, len(cells)):
        cell = cells[i]
        state.checkpoints[ck + (i,)] = cur
        _set_status(state, cell.id, ext.label, RUNNING, on_event)
        new_env, outs, err = run_source(cell.source, cur)
        state.eval_counts[cell.id] = state.eval_counts.get(cell.id, 0) + 1
        state.cell_outputs[(cell.id, ext.label)] = outs
        if err is not None:
            _set_status(state, cell.id, ext.label, ERROR, on_event)
            for later in cells[i + 1 :]:
                state.cell_outputs.pop((later.id, ext.label), None)
                _set_status(state, later.id, ext.label, SKIPPED, on_event)
            entry = OutputEntry(
                combination=upstream,
                items=_collect_items(state, window, ext.label),
                error=err,
            )
            _upsert_entry(state, window.id, entry, on_event)
            return err
        _set_status(state, cell.id, ext.label, OK, on_event)
        cur = new_env
    state.checkpoints[ck + (len(cells),)] = cur
    entry = OutputEntry(
        combination=upstream, items=_collect_items(state, window, ext.label)
    )
    _upsert_entry(state, window.id, entry, on_event)
    return cur


def _skip_window(
    nb: Notebook,
    state: ExecState,
    stage_index: int,
    upstream: Combination,
    alt_index: int,
    ext: Combination,
    err: EvalError,
    on_event: EventHook,
) -> None:
    """An upstream error reached this window: no outputs, all cells skipped."""
    window = nb.stages[stage_index].alternatives[alt_index]
    ck = (upstream.label, stage_index, alt_index)
    for i in range(len(window.cells) + 1):
        state.checkpoints.pop(ck + (i,), None)
    for cell in window.cells:
        state.cell_outputs.pop((cell.id, ext.label), None)
        _set_status(state, cell.id, ext.label, SKIPPED, on_event)
    entry = OutputEntry(combination=upstream, error=err, inherited=True)
    _upsert_entry(state, window.id, entry, on_event)


def _run_stages(
    nb: Notebook,
    state: ExecState,
    start: int,
    seeds: dict[Combination, Seed],
    on_event: EventHook,
) -> None:
    """Run stages start.. for every lineage present in seeds.

    Lineages absent from seeds are left untouched (partial re-runs pass only
    the affected ones).
    """
    for t in range(start, len(nb.stages)):
        stage = nb.stages[t]
        next_seeds: dict[Combination, Seed] = {}
        for upstream in upstream_combinations(nb, t):
            if upstream not in seeds:
                continue
            src = seeds.pop(upstream)
            for a in range(len(stage.alternatives)):
                ext = upstream.extend(t, a) if stage.is_group else upstream
                if isinstance(src, EvalError):
                    _skip_window(nb, state, t, upstream, a, ext, src, on_event)
                    next_seeds[ext] = src
                else:
                    env_in = src.fork() if stage.is_group else src
                    next_seeds[ext] = _run_window(
                        nb, state, t, upstream, a, ext, env_in, 0, on_event
                    )
        seeds = next_seeds


def execute_all(
    nb: Notebook, state: Optional[ExecState] = None, on_event: EventHook = None
) -> ExecState:
    """Run the whole notebook across all branch combinations.

    Rebuilds the given state (or a fresh one) from scratch; language errors
    are recorded as data, never raised.
    """
    if state is None:
        state = ExecState()
    state.clear()
    for s in nb.stages:
        for w in s.alternatives:
            for c in w.cells:
                state.eval_counts[c.id] = 0
    _run_stages(nb, state, 0, {Combination(): Environment()}, on_event)
    return state


def _lineage_dirty_before(
    nb: Notebook,
    state: ExecState,
    upstream: Combination,
    stage_index: int,
    alt_index: int,
    cell_index: int,
) -> bool:
    """Any stale status on this lineage's path strictly before the boundary?"""
    choice = upstream.choice_dict()
    for t in range(stage_index + 1):
        stage = nb.stages[t]
        if t == stage_index:
            alts = [alt_index]
        elif stage.is_group:
            alts = [choice[t]]
        else:
            alts = [0]
        for a in alts:
            window = stage.alternatives[a]
            ext = (
                upstream.restrict(t).extend(t, a)
                if stage.is_group
                else upstream.restrict(t)
            )
            limit = cell_index if t == stage_index else len(window.cells)
            for cell in window.cells[:limit]:
                if state.status.get((cell.id, ext.label)) == STALE:
                    return True
    return False


def _entry_for(
    state: ExecState, window_id: str, upstream: Combination
) -> Optional[OutputEntry]:
    for entry in state.outputs.get(window_id, ()):
        if entry.combination.label == upstream.label:
            return entry
    return None


def _reset_dead_lineage(
    nb: Notebook,
    state: ExecState,
    stage_index: int,
    alt_index: int,
    cell_index: int,
    upstream: Combination,
    on_event: EventHook,
) -> None:
    """Re-stamp `skipped` on a lineage that still dies before this cell."""
    stage = nb.stages[stage_index]
    window = stage.alternatives[alt_index]
    ext = (
        upstream.extend(stage_index, alt_index) if stage.is_group else upstream
    )
    for cell in window.cells[cell_index:]:
        _set_status(state, cell.id, ext.label, SKIPPED, on_event)
    pattern = ext.choice_dict()
    for t in range(stage_index + 1, len(nb.stages)):
        later = nb.stages[t]
        for d in upstream_combinations(nb, t):
            if not d.matches(pattern):
                continue
            for b, w2 in enumerate(later.alternatives):
                ext2 = d.extend(t, b) if later.is_group else d
                for cell in w2.cells:
                    _set_status(state, cell.id, ext2.label, SKIPPED, on_event)
    return None


def run_from(
    nb: Notebook,
    state: ExecState,
    cell_id: str,
    on_event: EventHook = None,
) -> ExecState:
    """Re-execute a cell and everything after it, per reachable lineage.

    Restores the checkpoint taken immediately before the cell for every
    upstream combination, re-runs the window suffix, then propagates through
    all downstream stages on the affected lineages only. Falls back to
    execute_all when the needed checkpoints are missing (no prior run, or
    upstream edits invalidated them).
    """
    si, ai, ci, _ = find_cell(nb, cell_id)
    stage = nb.stages[si]
    window = stage.alternatives[ai]
    combos = upstream_combinations(nb, si)

    resumable: list[tuple[Combination, Environment]] = []
    dead: list[Combination] = []
    for c in combos:
        env = state.checkpoints.get((c.label, si, ai, ci))
        if env is not None:
            resumable.append((c, env))
            continue
        entry = _entry_for(state, window.id, c)
        died_early = entry is not None and entry.error is not None
        if died_early and not _lineage_dirty_before(nb, state, c, si, ai, ci):
            dead.append(c)  # error persists somewhere before this cell
            continue
        return execute_all(nb, state, on_event)

    for c in dead:
        _reset_dead_lineage(nb, state, si, ai, ci, c, on_event)

    seeds: dict[Combination, Seed] = {}
    for c, env in resumable:
        ext = c.extend(si, ai) if stage.is_group else c
        seeds[ext] = _run_window(nb, state, si, c, ai, ext, env, ci, on_event)
    _run_stages(nb, state, si + 1, seeds, on_event)
    return state


def invalidate(
    state: ExecState, nb: Notebook, cell_id: str, on_event: EventHook = None
) -> ExecState:
    """Mark the edit's lineage suffix stale and drop dependent checkpoints.

    The boundary before the edited cell is kept so run_from(edited cell) can
    resume without a full re-run; everything the cell's output fed into is
    dropped. Outputs are retained (stale statuses flag them).
    """
    si, ai, ci, _ = find_cell(nb, cell_id)
    stage = nb.stages[si]
    window = stage.alternatives[ai]
    pattern = {si: ai} if stage.is_group else {}

    for c in upstream_combinations(nb, si):
        ext = c.extend(si, ai) if stage.is_group else c
        for cell in window.cells[ci:]:
            if (cell.id, ext.label) in state.status:
                _set_status(state, cell.id, ext.label, STALE, on_event)
        for i in range(ci + 1, len(window.cells) + 1):
            state.checkpoints.pop((c.label, si, ai, i), None)

    for t in range(si + 1, len(nb.stages)):
        later = nb.stages[t]
        for d in upstream_combinations(nb, t):
            if not d.matches(pattern):
                continue
            for b, w2 in enumerate(later.alternatives):
                ext2 = d.extend(t, b) if later.is_group else d
                for cell in w2.cells:
                    if (cell.id, ext2.label) in state.status:
                        _set_status(state, cell.id, ext2.label, STALE, on_event)
                for i in range(len(w2.cells) + 1):
                    state.checkpoints.pop((d.label, t, b, i), None)
    return state
