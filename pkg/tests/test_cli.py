"""Command-line driver: exit codes, output formats, determinism."""
import json
import subprocess
import sys
from pathlib import Path

import pytest

from branchbook import persist
from branchbook.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_csv_two_by_two(capsys):
    code, out, err = run_cli(capsys, "run", FIXTURES / "two_by_two.nbk.json")
    assert code == 0 and err == ""
    lines = out.split("\r\n")
    assert lines[0].startswith("stage_index,")
    # the final window shows one product per combination, in label order
    last_stage = str(max(int(ln.split(",")[0]) for ln in lines[1:] if ln))
    finals = [
        ln.split(",")[-1] for ln in lines if ln and ln.split(",")[0] == last_stage
    ]
    assert finals == ["1100", "2200", "1200", "2400"]


def test_run_json_out_file_and_determinism(tmp_path, capsys):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    code, _, _ = run_cli(
        capsys, "run", FIXTURES / "two_by_two.nbk.json", "--format", "json", "--out", out1
    )
    assert code == 0
    code, _, _ = run_cli(
        capsys, "run", FIXTURES / "two_by_two.nbk.json", "--format", "json", "--out", out2
    )
    assert code == 0
    assert out1.read_bytes() == out2.read_bytes()
    rows = json.loads(out1.read_text())
    assert all(set(r) == set(persist.RESULT_FIELDS) for r in rows)


def test_run_exits_zero_when_cells_error(capsys):
    code, out, _ = run_cli(capsys, "run", FIXTURES / "error_task.nbk.json")
    assert code == 0
    assert "IndexOutOfRange" in out
    assert "skipped" in out


def test_run_missing_file(capsys):
    code, _, err = run_cli(capsys, "run", "no_such_file.nbk.json")
    assert code == 2 and "error" in err


def test_flatten_writes_one_file_per_combination(tmp_path, capsys):
    code, out, _ = run_cli(
        capsys, "flatten", FIXTURES / "knn_branch.nbk.json", "--outdir", tmp_path
    )
    assert code == 0
    names = sorted(p.name for p in tmp_path.glob("*.nbk.json"))
    assert len(names) == 6  # 3-way group x 2-way group
    assert set(out.split()) == set(names)
    for p in tmp_path.glob("*.nbk.json"):
        nb = persist.load(p.read_bytes())
        assert all(len(s.alternatives) == 1 for s in nb.stages)


def test_flatten_linear_notebook_name(tmp_path, capsys):
    src = tmp_path / "plain.nbk.json"
    doc = {
        "version": 1,
        "title": "p",
        "stages": [
            {
                "id": "s1",
                "alternatives": [
                    {"id": "w1", "label": "W", "cells": [{"id": "c1", "source": "show(1)"}]}
                ],
            }
        ],
    }
    src.write_text(json.dumps(doc))
    code, out, _ = run_cli(capsys, "flatten", src, "--outdir", tmp_path / "flat")
    assert code == 0
    assert out.split() == ["linear.nbk.json"]


@pytest.mark.parametrize(
    "name",
    ["knn_branch", "two_by_two", "error_task", "ten_windows"],
)
def test_oracle_passes_on_fixtures(capsys, name):
    code, out, _ = run_cli(capsys, "oracle", FIXTURES / f"{name}.nbk.json")
    assert code == 0
    assert out.strip() == "ok: branched and flattened executions agree"


def test_oracle_golden_match_and_mismatch(capsys):
    code, out, _ = run_cli(
        capsys,
        "oracle",
        FIXTURES / "knn_branch.nbk.json",
        "--golden",
        FIXTURES / "goldens" / "knn_branch.results.json",
    )
    assert code == 0
    code, out, _ = run_cli(
        capsys,
        "oracle",
        FIXTURES / "knn_branch.nbk.json",
        "--golden",
        FIXTURES / "goldens" / "knn_branch.results.corrupted.json",
    )
    assert code == 1
    assert out.startswith("DIVERGENCE:")


def test_layout_semicircle_overflow_exit_2(capsys):
    code, out, err = run_cli(
        capsys, "layout", FIXTURES / "ten_windows.nbk.json", "--mode", "semicircle"
    )
    assert code == 2 and out == ""
    assert "required span 3.50 rad exceeds max span 3.14 rad" in err


def test_layout_semicircle_allow_overflow(capsys):
    code, out, _ = run_cli(
        capsys,
        "layout",
        FIXTURES / "ten_windows.nbk.json",
        "--mode",
        "semicircle",
        "--allow-overflow",
    )
    assert code == 0
    lines = out.strip().split("\r\n")
    assert lines[0] == "window_id,label,x,y,z,yaw"
    assert len(lines) == 11
    first = lines[1].split(",")
    assert float(first[-1]) == pytest.approx(-1.575)  # (0 - 4.5) * 0.35


def test_layout_semicircle_fits_small_notebook(capsys):
    code, out, _ = run_cli(
        capsys, "layout", FIXTURES / "two_by_two.nbk.json", "--mode", "semicircle"
    )
    assert code == 0
    rows = out.strip().split("\r\n")[1:]
    yaws = [float(r.split(",")[-1]) for r in rows]
    assert yaws == sorted(yaws)
    assert sum(yaws) == pytest.approx(0.0, abs=1e-9)


def test_layout_desktop_mode(capsys):
    code, out, _ = run_cli(
        capsys, "layout", FIXTURES / "knn_branch.nbk.json", "--mode", "desktop"
    )
    assert code == 0
    lines = out.strip().split("\r\n")
    assert lines[0] == "window_id,label,x,y,width,height,column"
    cols = [int(ln.split(",")[-1]) for ln in lines[1:]]
    assert {0, 1, -1} <= set(cols)


def test_metrics_golden(capsys):
    code, out, _ = run_cli(capsys, "metrics", FIXTURES / "golden_task.log.jsonl")
    assert code == 0
    assert json.loads(out) == {
        "completion_time_ms": 100,
        "run_count": 2,
        "scroll_ticks": 5,
        "rotation_deg": 0.0,
        "walk_m": 0.0,
        "text_edit_count": 0,
    }


def test_metrics_unknown_task_and_bad_log(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "metrics", FIXTURES / "golden_task.log.jsonl", "--task", "5"
    )
    assert code == 2 and "task 5" in err
    bad = tmp_path / "bad.jsonl"
    bad.write_text("this is not json\n")
    code, _, err = run_cli(capsys, "metrics", bad)
    assert code == 2 and "line 1" in err


def test_validate_good_and_bad(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "validate", FIXTURES / "knn_branch.nbk.json")
    assert code == 0 and out.strip() == "ok"
    bad = tmp_path / "bad.nbk.json"
    bad.write_text('{"version": 2, "title": "x", "stages": []}')
    code, _, err = run_cli(capsys, "validate", bad)
    assert code == 2 and "unsupported version" in err
    bad.write_text("{broken")
    code, _, err = run_cli(capsys, "validate", bad)
    assert code == 2


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_module_entry_point_subprocess():
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "branchbook.cli",
            "oracle",
            str(FIXTURES / "knn_branch.nbk.json"),
        ],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0, proc.stderr
    assert "ok:" in proc.stdout
