"""Append-only interaction log and the metrics computed from it.

Logs are JSONL: one event object per line, timestamps in milliseconds from
session start, non-decreasing. Metrics aggregate one task window (between a
task_start/task_end pair).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

KINDS = (
    "run_pressed",
    "scroll",
    "head_rotation",
    "walk",
    "branch_created",
    "cell_deleted",
    "cell_relocated",
    "cell_edited",
    "task_start",
    "task_end",
)


class TelemetryError(Exception):
    pass


class OutOfOrderTimestamp(TelemetryError):
    pass


class TaskNestingError(TelemetryError):
    pass


class MalformedLine(TelemetryError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnknownTask(TelemetryError):
    pass


@dataclass
class Event:
    t_ms: int
    kind: str
    payload: dict = field(default_factory=dict)


@dataclass
class MetricsReport:
    completion_time_ms: int
    run_count: int
    scroll_ticks: int
    rotation_deg: float
    walk_m: float
    text_edit_count: int

    def to_json(self) -> dict:
        return {
            "completion_time_ms": self.completion_time_ms,
            "run_count": self.run_count,
            "scroll_ticks": self.scroll_ticks,
            "rotation_deg": self.rotation_deg,
            "walk_m": self.walk_m,
            "text_edit_count": self.text_edit_count,
        }


def _check_event(event: Event) -> str:
    if type(event.t_ms) is not int or event.t_ms < 0:
        return "t_ms must be a non-negative integer"
    if event.kind not in KINDS:
        return f"unknown kind '{event.kind}'"
    if not isinstance(event.payload, dict):
        return "payload must be an object"
    if event.kind == "scroll" and type(event.payload.get("ticks")) is not int:
        return "scroll payload needs integer 'ticks'"
    if event.kind == "head_rotation":
        if not _is_num(event.payload.get("delta_deg")):
            return "head_rotation payload needs numeric 'delta_deg'"
    if event.kind == "walk":
        if not _is_num(event.payload.get("delta_m")):
            return "walk payload needs numeric 'delta_m'"
    return ""


def _is_num(v) -> bool:
    return type(v) is int or type(v) is float


def append(log: list[Event], event: Event) -> list[Event]:
    """Validated append; returns a new list, the input is untouched."""
    problem = _check_event(event)
    if problem:
        raise TelemetryError(problem)
    if log and event.t_ms < log[-1].t_ms:
        raise OutOfOrderTimestamp(
            f"t_ms {event.t_ms} is before last event at {log[-1].t_ms}"
        )
    open_task = sum(1 for e in log if e.kind == "task_start") > sum(
        1 for e in log if e.kind == "task_end"
    )
    if event.kind == "task_start" and open_task:
        raise TaskNestingError("task_start while a task is already open")
    if event.kind == "task_end" and not open_task:
        raise TaskNestingError("task_end without an open task")
    return log + [event]


def dump_log(events: list[Event]) -> bytes:
    lines = [
        json.dumps(
            {"t_ms": e.t_ms, "kind": e.kind, "payload": e.payload},
            ensure_ascii=False,
        )
        for e in events
    ]
    return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")


def load_log(data: Union[bytes, str]) -> list[Event]:
    """Parse JSONL; bad lines raise MalformedLine with the 1-based line number."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    events: list[Event] = []
    for i, line in enumerate(data.split("\n"), start=1):
        if not line.strip():
            continue  # tolerate the trailing newline / blank lines
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(i, f"not valid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise MalformedLine(i, "event must be an object")
        event = Event(
            t_ms=obj.get("t_ms"),
            kind=obj.get("kind"),
            payload=obj.get("payload", {}),
        )
        problem = _check_event(event)
        if problem:
            raise MalformedLine(i, problem)
        if events and event.t_ms < events[-1].t_ms:
            raise MalformedLine(i, "timestamps must be non-decreasing")
        events.append(event)
    return events


def task_windows(events: list[Event]) -> list[tuple[int, int]]:
    """(start_t, end_t) per completed task_start/task_end pair, in order."""
    windows = []
    start = None
    for e in events:
        if e.kind == "task_start" and start is None:
            start = e.t_ms
        elif e.kind == "task_end" and start is not None:
            windows.append((start, e.t_ms))
            start = None
    return windows


def compute_metrics(events: list[Event], task_index: int) -> MetricsReport:
    """Aggregate the 0-based task_index-th task window.

    Only events with start_t <= t < end_t count; completion time is the
    window length.
    """
    windows = task_windows(events)
    if task_index < 0 or task_index >= len(windows):
        raise UnknownTask(
            f"task {task_index} not found ({len(windows)} complete tasks)"
        )
    start_t, end_t = windows[task_index]
    run_count = 0
    scroll_ticks = 0
    rotation_deg = 0.0
    walk_m = 0.0
    text_edit_count = 0
    for e in events:
        if not (start_t <= e.t_ms < end_t):
            continue
        if e.kind == "run_pressed":
            run_count += 1
        elif e.kind == "scroll":
            scroll_ticks += abs(e.payload["ticks"])
        elif e.kind == "head_rotation":
            rotation_deg += abs(e.payload["delta_deg"])
        elif e.kind == "walk":
            walk_m += abs(e.payload["delta_m"])
        elif e.kind == "cell_edited":
            text_edit_count += 1
    return MetricsReport(
        completion_time_ms=end_t - start_t,
        run_count=run_count,
        scroll_ticks=scroll_ticks,
        rotation_deg=rotation_deg,
        walk_m=walk_m,
        text_edit_count=text_edit_count,
    )
