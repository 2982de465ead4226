"""Per-notebook server state: one serialized command queue, ordered deltas.

Every mutation happens under the session lock and appends StateDelta
records with strictly increasing server_seq. Subscribers replay history
from any seq and then follow live pushes, so snapshot + deltas always
reconstructs the current state.
"""
from __future__ import annotations

import queue
import threading
from typing import Any, Optional

from .. import engine, layout, model, persist, telemetry
from ..minilang import EvalError
from ..model import Notebook, NotebookError
from .schemas import (
    BranchCmd,
    DeleteCellsCmd,
    DeleteWindowCmd,
    EditCellCmd,
    ExecuteAllCmd,
    ExtractCmd,
    MoveWindowCmd,
    RelocateCmd,
    RunFromCmd,
)


class CommandRejected(Exception):
    def __init__(self, error: str, message: str):
        super().__init__(message)
        self.error = error
        self.message = message


class DuplicateCommand(Exception):
    def __init__(self, server_seq: int, client_seq: int):
        super().__init__(f"client_seq {client_seq} already applied")
        self.server_seq = server_seq
        self.client_seq = client_seq


def entry_json(entry: engine.OutputEntry) -> dict:
    return {
        "combination": entry.combination.label,
        "items": list(entry.items),
        "error": None if entry.error is None else entry.error.to_json(),
        "inherited": entry.inherited,
    }


def _rect_json(rect: layout.DesktopRect) -> dict:
    return {
        "x": rect.x,
        "y": rect.y,
        "width": rect.width,
        "height": rect.height,
        "column": rect.column,
    }


class NotebookSession:
    def __init__(self, nb: Notebook, px_cfg: Optional[layout.PixelConfig] = None):
        self.nb = nb
        self.px_cfg = px_cfg or layout.PixelConfig()
        self.state = engine.ExecState()
        self.lock = threading.Lock()
        self.server_seq = 0
        self.deltas: list[dict] = []
        self.applied: dict[int, int] = {}  # client_seq -> ack server_seq
        self.overrides: dict[str, dict] = {}  # window_id -> free pose
        self.telemetry: list[telemetry.Event] = []
        self.subscribers: list[queue.Queue] = []
        self.rects = layout.desktop_layout(nb, self.px_cfg)

    # -- delta plumbing ------------------------------------------------

    def _emit(self, change: str, payload: dict) -> int:
        self.server_seq += 1
        delta = {"server_seq": self.server_seq, "change": change, **payload}
        self.deltas.append(delta)
        for q in self.subscribers:
            q.put(delta)
        return self.server_seq

    def _engine_event(self, kind: str, payload: dict) -> None:
        if kind == "status_changed":
            self._emit("status_changed", payload)
        elif kind == "output_added":
            self._emit(
                "output_added",
                {
                    "window_id": payload["window_id"],
                    "entry": entry_json(payload["entry"]),
                },
            )

    def _emit_notebook(self, reset_exec: bool) -> None:
        self._emit(
            "notebook_changed",
            {"notebook": persist.to_doc(self.nb), "reset_exec": reset_exec},
        )

    def _refresh_layout(self) -> None:
        new_rects = layout.desktop_layout(self.nb, self.px_cfg)
        for wid, rect in new_rects.items():
            if self.rects.get(wid) != rect:
                self._emit(
                    "layout_changed", {"window_id": wid, "rect": _rect_json(rect)}
                )
        for wid in self.rects:
            if wid not in new_rects:
                self._emit("layout_changed", {"window_id": wid, "rect": None})
                self.overrides.pop(wid, None)
        self.rects = new_rects

    # -- commands ------------------------------------------------------

    def apply(self, cmd) -> dict:
        """Apply one command; returns the ack. Raises on rejection."""
        with self.lock:
            if cmd.client_seq in self.applied:
                raise DuplicateCommand(self.applied[cmd.client_seq], cmd.client_seq)
            try:
                result = self._dispatch(cmd)
            except NotebookError as exc:
                raise CommandRejected(type(exc).__name__, str(exc)) from None
            ack = {"server_seq": self.server_seq, "client_seq": cmd.client_seq}
            if result:
                ack["result"] = result
            self.applied[cmd.client_seq] = self.server_seq
            return ack

    def _structural(self, nb2: Notebook) -> None:
        # ids and lineage labels shift under structural edits, so cached
        # execution state is unusable; clients see reset_exec and clear too
        self.nb = nb2
        self.state = engine.ExecState()
        self._emit_notebook(reset_exec=True)
        self._refresh_layout()

    def _dispatch(self, cmd) -> Optional[dict]:
        if isinstance(cmd, EditCellCmd):
            self.nb = model.edit_cell(self.nb, cmd.cell_id, cmd.source)
            self._emit_notebook(reset_exec=False)
            engine.invalidate(self.state, self.nb, cmd.cell_id, self._engine_event)
            return None
        if isinstance(cmd, BranchCmd):
            nb2, new_id = model.branch(self.nb, cmd.window_id)
            self._structural(nb2)
            return {"new_window_id": new_id}
        if isinstance(cmd, ExtractCmd):
            nb2, new_id = model.extract(self.nb, cmd.window_id, cmd.cell_ids)
            self._structural(nb2)
            return {"new_window_id": new_id}
        if isinstance(cmd, RelocateCmd):
            self._structural(
                model.relocate(
                    self.nb, cmd.cell_id, cmd.target_window_id, cmd.target_index
                )
            )
            return None
        if isinstance(cmd, DeleteCellsCmd):
            self._structural(model.delete_cells(self.nb, cmd.cell_ids))
            return None
        if isinstance(cmd, DeleteWindowCmd):
            self._structural(model.delete_window(self.nb, cmd.window_id))
            return None
        if isinstance(cmd, RunFromCmd):
            model.find_cell(self.nb, cmd.cell_id)  # reject before running
            engine.run_from(self.nb, self.state, cmd.cell_id, self._engine_event)
            return None
        if isinstance(cmd, ExecuteAllCmd):
            engine.execute_all(self.nb, self.state, self._engine_event)
            return None
        if isinstance(cmd, MoveWindowCmd):
            model.find_window(self.nb, cmd.window_id)
            pose = {"x": cmd.x, "y": cmd.y}
            self.overrides[cmd.window_id] = pose
            self._emit("layout_changed", {"window_id": cmd.window_id, "pose": pose})
            return None
        raise CommandRejected("UnknownOp", f"unsupported command {cmd!r}")

    # -- reads ---------------------------------------------------------

    def snapshot(self) -> dict:
        with self.lock:
            statuses: dict[str, dict[str, str]] = {}
            for s in self.nb.stages:
                for w in s.alternatives:
                    for c in w.cells:
                        statuses[c.id] = {}
            for (cell_id, label), status in sorted(self.state.status.items()):
                statuses.setdefault(cell_id, {})[label] = status
            outputs = {
                wid: [entry_json(e) for e in entries]
                for wid, entries in sorted(self.state.outputs.items())
            }
            return {
                "server_seq": self.server_seq,
                "notebook_id": self.nb.id,
                "notebook": persist.to_doc(self.nb),
                "exec": {"statuses": statuses, "outputs": outputs},
                "layout": {
                    "desktop": {
                        wid: _rect_json(r) for wid, r in sorted(self.rects.items())
                    },
                    "overrides": {
                        wid: dict(p) for wid, p in sorted(self.overrides.items())
                    },
                },
            }

    def results(self, format: str) -> bytes:
        with self.lock:
            return persist.export_results(self.nb, self.state, format)

    def ingest_telemetry(self, events: list[dict]) -> int:
        with self.lock:
            log = self.telemetry
            for i, obj in enumerate(events):
                if not isinstance(obj, dict):
                    raise telemetry.TelemetryError(f"event {i} must be an object")
                event = telemetry.Event(
                    t_ms=obj.get("t_ms"),
                    kind=obj.get("kind"),
                    payload=obj.get("payload", {}),
                )
                log = telemetry.append(log, event)
            self.telemetry = log
            return len(self.telemetry)

    # -- event stream --------------------------------------------------

    def subscribe(self, after: int) -> tuple[list[dict], queue.Queue]:
        """History past `after` plus a live queue, atomically."""
        with self.lock:
            backlog = [d for d in self.deltas if d["server_seq"] > after]
            q: queue.Queue = queue.Queue()
            self.subscribers.append(q)
            return backlog, q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self.lock:
            if q in self.subscribers:
                self.subscribers.remove(q)
