"""Notebook file format, flatten transform, and results export.

The file format is UTF-8 JSON with a fixed key order so saves are
byte-deterministic. flatten() expands a branched notebook into one linear
notebook per full combination; running those independently and comparing
against the branched run is the engine's correctness oracle.
"""
from __future__ import annotations

import csv
import io
import json
from typing import Any, Optional, Union

from . import engine, model
from .engine import Combination, ExecState, OutputEntry
from .model import Cell, Notebook, Stage, Window

SUPPORTED_VERSIONS = (1,)

KNOWN_TOP_KEYS = ("version", "title", "stages")

RESULT_FIELDS = (
    "stage_index",
    "window_id",
    "window_label",
    "combination_label",
    "output_index",
    "kind",
    "text",
)


class PersistError(Exception):
    pass


class SchemaError(PersistError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class VersionError(PersistError):
    def __init__(self, got: Any):
        names = ", ".join(str(v) for v in SUPPORTED_VERSIONS)
        super().__init__(f"unsupported version {got!r}; supported: {names}")
        self.got = got


def _need(obj: dict, key: str, kind: type, path: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{path}/{key}", "missing key")
    value = obj[key]
    # bool is an int subclass; a bool version must not pass as int
    if not isinstance(value, kind) or (kind is int and type(value) is bool):
        raise SchemaError(f"{path}/{key}", f"expected {kind.__name__}")
    return value


def _reject_unknown(obj: dict, allowed: tuple, path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise SchemaError(f"{path}/{key}", "unexpected key")


def load(data: Union[bytes, str], notebook_id: str = "nb") -> Notebook:
    """Parse a notebook document; schema problems raise with a key path."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("/", "document must be an object")
    version = _need(doc, "version", int, "")
    if version not in SUPPORTED_VERSIONS:
        raise VersionError(version)
    title = _need(doc, "title", str, "")
    stages_raw = _need(doc, "stages", list, "")
    stages = []
    for si, s in enumerate(stages_raw):
        spath = f"/stages/{si}"
        if not isinstance(s, dict):
            raise SchemaError(spath, "expected object")
        _reject_unknown(s, ("id", "alternatives"), spath)
        sid = _need(s, "id", str, spath)
        alts_raw = _need(s, "alternatives", list, spath)
        if not alts_raw:
            raise SchemaError(f"{spath}/alternatives", "stage needs >= 1 window")
        alts = []
        for ai, w in enumerate(alts_raw):
            wpath = f"{spath}/alternatives/{ai}"
            if not isinstance(w, dict):
                raise SchemaError(wpath, "expected object")
            _reject_unknown(w, ("id", "label", "cells"), wpath)
            wid = _need(w, "id", str, wpath)
            label = _need(w, "label", str, wpath)
            cells_raw = _need(w, "cells", list, wpath)
            cells = []
            for ci, c in enumerate(cells_raw):
                cpath = f"{wpath}/cells/{ci}"
                if not isinstance(c, dict):
                    raise SchemaError(cpath, "expected object")
                _reject_unknown(c, ("id", "source"), cpath)
                cells.append(
                    Cell(
                        id=_need(c, "id", str, cpath),
                        source=_need(c, "source", str, cpath),
                    )
                )
            alts.append(Window(id=wid, label=label, cells=cells))
        stages.append(Stage(id=sid, alternatives=alts))
    extras = {k: doc[k] for k in doc if k not in KNOWN_TOP_KEYS}
    nb = Notebook(
        id=notebook_id, version=version, title=title, stages=stages, extras=extras
    )
    problems = model.validate(nb)
    if problems:
        raise SchemaError("/stages", problems[0])
    return nb


def to_doc(nb: Notebook) -> dict[str, Any]:
    """The notebook as a JSON-ready dict in canonical key order."""
    doc: dict[str, Any] = {
        "version": nb.version,
        "title": nb.title,
        "stages": [
            {
                "id": s.id,
                "alternatives": [
                    {
                        "id": w.id,
                        "label": w.label,
                        "cells": [{"id": c.id, "source": c.source} for c in w.cells],
                    }
                    for w in s.alternatives
                ],
            }
            for s in nb.stages
        ],
    }
    for key in sorted(nb.extras):
        doc[key] = nb.extras[key]
    return doc


def save(nb: Notebook) -> bytes:
    """Serialize with fixed key order; identical notebooks give identical bytes."""
    return (json.dumps(to_doc(nb), ensure_ascii=False, indent=2) + "\n").encode(
        "utf-8"
    )


def flatten(nb: Notebook) -> list[tuple[Combination, Notebook]]:
    """One linear notebook per full combination, in lexicographic order.

    Branch groups are replaced by the chosen alternative; ids are kept so
    outputs stay comparable window-by-window with the branched run.
    """
    out = []
    for combo in engine.full_combinations(nb):
        choice = combo.choice_dict()
        stages = []
        for si, stage in enumerate(nb.stages):
            win = stage.alternatives[choice.get(si, 0)]
            stages.append(
                Stage(
                    id=stage.id,
                    alternatives=[
                        Window(
                            id=win.id,
                            label=win.label,
                            cells=[Cell(id=c.id, source=c.source) for c in win.cells],
                        )
                    ],
                )
            )
        flat_id = f"{nb.id}:{combo.label}" if combo.label else nb.id
        out.append(
            (
                combo,
                Notebook(
                    id=flat_id, version=nb.version, title=nb.title, stages=stages
                ),
            )
        )
    return out


def _entry_rows(
    si: int, window: Window, entry: OutputEntry
) -> list[dict[str, Any]]:
    base = {
        "stage_index": si,
        "window_id": window.id,
        "window_label": window.label,
        "combination_label": entry.combination.label,
    }
    if entry.inherited:
        return [dict(base, output_index=0, kind="skipped", text="")]
    rows = [
        dict(base, output_index=i, kind="ok", text=item)
        for i, item in enumerate(entry.items)
    ]
    if entry.error is not None:
        rows.append(
            dict(
                base,
                output_index=len(entry.items),
                kind="error",
                text=str(entry.error),
            )
        )
    return rows


def results_rows(nb: Notebook, state: ExecState) -> list[dict[str, Any]]:
    rows: list[dict[str, Any]] = []
    for si, stage in enumerate(nb.stages):
        for window in stage.alternatives:
            for entry in state.outputs.get(window.id, []):
                rows.extend(_entry_rows(si, window, entry))
    rows.sort(
        key=lambda r: (r["stage_index"], r["combination_label"], r["output_index"])
    )
    return rows


def export_results(nb: Notebook, state: ExecState, format: str = "csv") -> bytes:
    """ResultsTable as RFC-4180 CSV or a JSON row array."""
    rows = results_rows(nb, state)
    if format == "json":
        return (json.dumps(rows, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)  # \r\n line endings per RFC 4180
        writer.writerow(RESULT_FIELDS)
        for r in rows:
            writer.writerow([r[f] for f in RESULT_FIELDS])
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown format '{format}'")


def compare_flattened(nb: Notebook) -> Optional[str]:
    """Run branched and flattened executions; describe the first divergence.

    Returns None when every window's outputs and error agree byte-for-byte
    under every full combination.
    """
    branched = engine.execute_all(nb)
    for combo, linear in flatten(nb):
        linear_state = engine.execute_all(linear)
        for si, stage in enumerate(linear.stages):
            window = stage.alternatives[0]
            got = _single_entry(linear_state, window.id)
            upstream = combo.restrict(si)
            want = _find_entry(branched, window.id, upstream.label)
            if want is None:
                return (
                    f"combination '{combo.label}': window '{window.id}' has no "
                    f"branched entry for upstream '{upstream.label}'"
                )
            diff = _entry_diff(want, got)
            if diff is not None:
                return (
                    f"combination '{combo.label}', window '{window.id}': {diff}"
                )
    return None


def _single_entry(state: ExecState, window_id: str) -> Optional[OutputEntry]:
    entries = state.outputs.get(window_id, [])
    return entries[0] if entries else None


def _find_entry(
    state: ExecState, window_id: str, label: str
) -> Optional[OutputEntry]:
    for entry in state.outputs.get(window_id, []):
        if entry.combination.label == label:
            return entry
    return None


def _entry_diff(a: OutputEntry, b: Optional[OutputEntry]) -> Optional[str]:
    if b is None:
        return "missing in flattened run"
    if a.items != b.items:
        return f"items differ: branched {a.items!r} vs flattened {b.items!r}"
    a_err = None if a.error is None else a.error.to_json()
    b_err = None if b.error is None else b.error.to_json()
    if a_err != b_err:
        return f"errors differ: branched {a_err!r} vs flattened {b_err!r}"
    return None
