"""Interaction log validation and task metrics."""
from pathlib import Path

import pytest

from branchbook.telemetry import (
    Event,
    MalformedLine,
    OutOfOrderTimestamp,
    TaskNestingError,
    TelemetryError,
    UnknownTask,
    append,
    compute_metrics,
    dump_log,
    load_log,
    task_windows,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def build(events):
    log = []
    for e in events:
        log = append(log, e)
    return log


def test_append_is_pure_and_validating():
    log = []
    log2 = append(log, Event(0, "task_start"))
    assert log == [] and len(log2) == 1
    with pytest.raises(TelemetryError):
        append(log2, Event(1, "warp_drive"))
    with pytest.raises(OutOfOrderTimestamp):
        append(append(log2, Event(5, "run_pressed")), Event(4, "run_pressed"))
    # equal timestamps are allowed
    log3 = append(append(log2, Event(5, "run_pressed")), Event(5, "run_pressed"))
    assert len(log3) == 3


def test_payload_validation():
    with pytest.raises(TelemetryError):
        append([], Event(0, "scroll", {}))
    with pytest.raises(TelemetryError):
        append([], Event(0, "scroll", {"ticks": 1.5}))
    with pytest.raises(TelemetryError):
        append([], Event(0, "head_rotation", {"delta_deg": "x"}))
    with pytest.raises(TelemetryError):
        append([], Event(0, "walk", {}))
    with pytest.raises(TelemetryError):
        append([], Event(-1, "run_pressed"))
    assert append([], Event(0, "scroll", {"ticks": -3}))


def test_task_nesting_rules():
    log = build([Event(0, "task_start")])
    with pytest.raises(TaskNestingError):
        append(log, Event(1, "task_start"))
    with pytest.raises(TaskNestingError):
        append([], Event(0, "task_end"))
    log = append(log, Event(10, "task_end"))
    log = append(log, Event(20, "task_start"))  # a second task may open
    assert task_windows(log) == [(0, 10)]


def test_dump_load_round_trip():
    log = build(
        [
            Event(0, "task_start"),
            Event(3, "scroll", {"ticks": 2}),
            Event(9, "walk", {"delta_m": 1.25}),
            Event(12, "task_end"),
        ]
    )
    data = dump_log(log)
    assert data.decode("utf-8").count("\n") == 4
    assert load_log(data) == log
    assert dump_log([]) == b""
    assert load_log(b"") == []


def test_load_log_error_line_numbers():
    with pytest.raises(MalformedLine) as exc:
        load_log(b'{"t_ms": 0, "kind": "run_pressed", "payload": {}}\nnot json\n')
    assert exc.value.line_no == 2
    with pytest.raises(MalformedLine) as exc:
        load_log(
            b'{"t_ms": 5, "kind": "run_pressed", "payload": {}}\n'
            b'{"t_ms": 1, "kind": "run_pressed", "payload": {}}\n'
        )
    assert exc.value.line_no == 2
    with pytest.raises(MalformedLine):
        load_log(b'{"t_ms": 0, "kind": "nope", "payload": {}}\n')
    with pytest.raises(MalformedLine):
        load_log(b"[1]\n")


def test_golden_log_metrics_are_exact():
    events = load_log((FIXTURES / "golden_task.log.jsonl").read_bytes())
    report = compute_metrics(events, 0)
    assert report.completion_time_ms == 100
    assert report.run_count == 2
    assert report.scroll_ticks == 5
    assert report.to_json() == {
        "completion_time_ms": 100,
        "run_count": 2,
        "scroll_ticks": 5,
        "rotation_deg": 0.0,
        "walk_m": 0.0,
        "text_edit_count": 0,
    }


def test_metrics_window_half_open():
    log = build(
        [
            Event(0, "run_pressed"),       # before the task: not counted
            Event(10, "task_start"),
            Event(10, "run_pressed"),      # at start: counted
            Event(20, "scroll", {"ticks": -2}),
            Event(25, "cell_edited", {"cell_id": "c1"}),
            Event(30, "task_end"),
            Event(30, "run_pressed"),      # at end: excluded
        ]
    )
    report = compute_metrics(log, 0)
    assert report.completion_time_ms == 20
    assert report.run_count == 1
    assert report.scroll_ticks == 2  # magnitudes, sign dropped
    assert report.text_edit_count == 1


def test_metrics_sum_magnitudes():
    log = build(
        [
            Event(0, "task_start"),
            Event(1, "head_rotation", {"delta_deg": -90.0}),
            Event(2, "head_rotation", {"delta_deg": 45.5}),
            Event(3, "walk", {"delta_m": -0.5}),
            Event(4, "walk", {"delta_m": 2}),
            Event(5, "task_end"),
        ]
    )
    report = compute_metrics(log, 0)
    assert report.rotation_deg == pytest.approx(135.5)
    assert report.walk_m == pytest.approx(2.5)


def test_multiple_tasks_and_unknown_index():
    log = build(
        [
            Event(0, "task_start"),
            Event(1, "run_pressed"),
            Event(10, "task_end"),
            Event(20, "task_start"),
            Event(21, "run_pressed"),
            Event(22, "run_pressed"),
            Event(35, "task_end"),
        ]
    )
    assert task_windows(log) == [(0, 10), (20, 35)]
    assert compute_metrics(log, 0).run_count == 1
    assert compute_metrics(log, 1).run_count == 2
    assert compute_metrics(log, 1).completion_time_ms == 15
    with pytest.raises(UnknownTask):
        compute_metrics(log, 2)
    with pytest.raises(UnknownTask):
        compute_metrics(log, -1)


def test_direction_fixture_pair():
    linear = load_log((FIXTURES / "linear_session.log.jsonl").read_bytes())
    branch = load_log((FIXTURES / "branch_session.log.jsonl").read_bytes())
    runs_linear = compute_metrics(linear, 0).run_count
    runs_branch = compute_metrics(branch, 0).run_count
    assert runs_linear == 12 and runs_branch == 4
    assert runs_linear > runs_branch
