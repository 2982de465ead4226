"""Regenerates everything under fixtures/. Run from the repo root:

    python3 scripts/gen_fixtures.py
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from branchbook import engine, model, persist  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"


def knn_branch() -> model.Notebook:
    """Ten stages; a 3-way k group and a 2-way p group give 6 combinations."""
    nb = model.new_linear(
        [
            ["data = rand(7, 24)", "n = len(data)", "show(n)"],
            ["lo = min(data)", "hi = max(data)", "span = hi - lo", "show(span)"],
            ["folds = 4", "per_fold = n / folds", "show(per_fold)"],
            ["k = 3", "show(k)"],
            ["weight = 1.0 / k", "show(weight)"],
            ["cv = mean(data) * weight", "show(cv)"],
            ["p = 1"],
            ["score = cv + span / (k + p)", "show(score)"],
            ["summary = [k, p, score]", "show(summary)"],
            ["good = score < 1.0 or p == 2", "show(good)"],
        ],
        title="knn parameter sweep",
    )
    labels = [
        "Load data",
        "Inspect range",
        "Fold setup",
        "Choose k",
        "Distance weight",
        "Cross-validate",
        "Choose p",
        "Score",
        "Summary",
        "Verdict",
    ]
    for stage, label in zip(nb.stages, labels):
        stage.alternatives[0].label = label

    k_window = nb.stages[3].alternatives[0].id
    nb, k2 = model.branch(nb, k_window)
    nb, k3 = model.branch(nb, k_window)
    nb = model.edit_cell(nb, nb.stages[3].alternatives[1].cells[0].id, "k = 5")
    nb = model.edit_cell(nb, nb.stages[3].alternatives[2].cells[0].id, "k = 9")

    p_window = nb.stages[6].alternatives[0].id
    nb, p2 = model.branch(nb, p_window)
    nb = model.edit_cell(nb, nb.stages[6].alternatives[1].cells[0].id, "p = 2")
    return nb


def two_by_two() -> model.Notebook:
    """The four-results shape: two 2-way groups."""
    nb = model.new_linear(
        [
            ["base = 10"],
            ["a = 1"],
            ["mid = base + a", "show(mid)"],
            ["b = 100"],
            ["total = mid * b", "show(total)"],
        ],
        title="two by two",
    )
    for stage, label in zip(
        nb.stages, ["Base", "Choose a", "Combine", "Choose b", "Total"]
    ):
        stage.alternatives[0].label = label
    nb, _ = model.branch(nb, nb.stages[1].alternatives[0].id)
    nb = model.edit_cell(nb, nb.stages[1].alternatives[1].cells[0].id, "a = 2")
    nb, _ = model.branch(nb, nb.stages[3].alternatives[0].id)
    nb = model.edit_cell(nb, nb.stages[3].alternatives[1].cells[0].id, "b = 200")
    return nb


def error_task() -> model.Notebook:
    """Linear ten windows; window 4 errors, everything after is skipped.

    Deleting the failing cell (index out of range) makes the whole notebook
    run clean again.
    """
    nb = model.new_linear(
        [
            ["x = 1", "show(x)"],
            ["y = x * 2", "show(y)"],
            ["z = y + 1", "show(z)"],
            ["noise = rand(3, 5)", "bug = noise[9]"],
            ["m = mean(noise)", "show(m)"],
            ["lo = min(noise)"],
            ["hi = max(noise)"],
            ["spread = hi - lo", "show(spread)"],
            ["report = [m, spread]", "show(report)"],
            ["show(len(report))"],
        ],
        title="error hunt",
    )
    return nb


def ten_windows() -> model.Notebook:
    """Ten windows total: 5 linear + a 3-way group + a 2-way group + finale.

    The stages after both groups see all 6 combinations.
    """
    nb = model.new_linear(
        [
            ["n = 40", "show(n)"],
            ["xs = rand(11, n)", "show(len(xs))"],
            ["base = mean(xs)", "scaled = base * 100"],
            ["factor = 2", "show(factor)"],
            ["offset = 10"],
            ["score = scaled * factor + offset", "show(score)"],
            ["show(score - offset)"],
        ],
        title="ten windows",
    )
    f_window = nb.stages[3].alternatives[0].id
    nb, _ = model.branch(nb, f_window)
    nb, _ = model.branch(nb, f_window)
    nb = model.edit_cell(nb, nb.stages[3].alternatives[1].cells[0].id, "factor = 5")
    nb = model.edit_cell(nb, nb.stages[3].alternatives[2].cells[0].id, "factor = 9")
    o_window = nb.stages[4].alternatives[0].id
    nb, _ = model.branch(nb, o_window)
    nb = model.edit_cell(nb, nb.stages[4].alternatives[1].cells[0].id, "offset = 50")
    return nb


def telemetry_logs() -> None:
    golden = [
        {"t_ms": 0, "kind": "task_start", "payload": {}},
        {"t_ms": 10, "kind": "run_pressed", "payload": {}},
        {"t_ms": 20, "kind": "run_pressed", "payload": {}},
        {"t_ms": 30, "kind": "scroll", "payload": {"ticks": 3}},
        {"t_ms": 40, "kind": "scroll", "payload": {"ticks": -2}},
        {"t_ms": 100, "kind": "task_end", "payload": {}},
    ]
    _write_log("golden_task.log.jsonl", golden)

    linear = [{"t_ms": 0, "kind": "task_start", "payload": {}}]
    t = 100
    for i in range(12):
        linear.append({"t_ms": t, "kind": "cell_edited", "payload": {"cell_id": "c4"}})
        t += 150
        linear.append({"t_ms": t, "kind": "run_pressed", "payload": {}})
        t += 250
        linear.append({"t_ms": t, "kind": "scroll", "payload": {"ticks": 6}})
        t += 100
    linear.append({"t_ms": 6100, "kind": "task_end", "payload": {}})
    _write_log("linear_session.log.jsonl", linear)

    branch = [
        {"t_ms": 0, "kind": "task_start", "payload": {}},
        {"t_ms": 120, "kind": "branch_created", "payload": {"window_id": "w4"}},
        {"t_ms": 300, "kind": "cell_edited", "payload": {"cell_id": "c11"}},
        {"t_ms": 450, "kind": "branch_created", "payload": {"window_id": "w4"}},
        {"t_ms": 600, "kind": "cell_edited", "payload": {"cell_id": "c12"}},
        {"t_ms": 800, "kind": "run_pressed", "payload": {}},
        {"t_ms": 1200, "kind": "scroll", "payload": {"ticks": 4}},
        {"t_ms": 1500, "kind": "branch_created", "payload": {"window_id": "w7"}},
        {"t_ms": 1700, "kind": "cell_edited", "payload": {"cell_id": "c13"}},
        {"t_ms": 1900, "kind": "run_pressed", "payload": {}},
        {"t_ms": 2300, "kind": "scroll", "payload": {"ticks": -3}},
        {"t_ms": 2600, "kind": "run_pressed", "payload": {}},
        {"t_ms": 2900, "kind": "run_pressed", "payload": {}},
        {"t_ms": 3100, "kind": "task_end", "payload": {}},
    ]
    _write_log("branch_session.log.jsonl", branch)


def _write_log(name: str, events: list[dict]) -> None:
    lines = [json.dumps(e, ensure_ascii=False) for e in events]
    (FIX / name).write_text("\n".join(lines) + "\n", encoding="utf-8")


def main() -> None:
    FIX.mkdir(exist_ok=True)
    (FIX / "goldens").mkdir(exist_ok=True)

    notebooks = {
        "knn_branch": knn_branch(),
        "two_by_two": two_by_two(),
        "error_task": error_task(),
        "ten_windows": ten_windows(),
    }
    for name, nb in notebooks.items():
        (FIX / f"{name}.nbk.json").write_bytes(persist.save(nb))
        print(f"wrote fixtures/{name}.nbk.json")

    telemetry_logs()
    print("wrote telemetry logs")

    nb = notebooks["knn_branch"]
    state = engine.execute_all(nb)
    golden = persist.export_results(nb, state, "json")
    (FIX / "goldens" / "knn_branch.results.json").write_bytes(golden)

    rows = json.loads(golden)
    for row in rows:
        if row["kind"] == "ok":
            row["text"] = row["text"] + "?corrupted"
            break
    corrupted = (json.dumps(rows, ensure_ascii=False, indent=2) + "\n").encode()
    (FIX / "goldens" / "knn_branch.results.corrupted.json").write_bytes(corrupted)

    nb2 = notebooks["two_by_two"]
    state2 = engine.execute_all(nb2)
    (FIX / "goldens" / "two_by_two.results.csv").write_bytes(
        persist.export_results(nb2, state2, "csv")
    )
    print("wrote goldens")


if __name__ == "__main__":
    main()
