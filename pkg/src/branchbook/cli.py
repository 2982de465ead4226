"""Headless driver: batch execution, oracle checks, layout export, metrics.

Exit codes: 0 success, 1 oracle divergence, 2 input/schema error,
3 internal error. Cell errors are data, not failures; `run` exits 0 even
when cells error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import engine, layout, model, persist, telemetry

EXIT_OK = 0
EXIT_DIVERGENCE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def _load_notebook(path: str) -> model.Notebook:
    data = Path(path).read_bytes()
    return persist.load(data, notebook_id=Path(path).stem.replace(".nbk", ""))


def _cmd_run(args) -> int:
    nb = _load_notebook(args.file)
    state = engine.execute_all(nb)
    payload = persist.export_results(nb, state, args.format)
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
    return EXIT_OK


def _cmd_flatten(args) -> int:
    nb = _load_notebook(args.file)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for combo, linear in persist.flatten(nb):
        name = f"{combo.label}.nbk.json" if combo.label else "linear.nbk.json"
        (outdir / name).write_bytes(persist.save(linear))
        print(name)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    nb = _load_notebook(args.file)
    divergence = persist.compare_flattened(nb)
    if divergence is not None:
        print(f"DIVERGENCE: {divergence}")
        return EXIT_DIVERGENCE
    if args.golden:
        state = engine.execute_all(nb)
        got = persist.export_results(nb, state, "json")
        want = Path(args.golden).read_bytes()
        if got != want:
            print(
                f"DIVERGENCE: results differ from golden {args.golden} "
                f"({len(got)} vs {len(want)} bytes)"
            )
            return EXIT_DIVERGENCE
    print("ok: branched and flattened executions agree")
    return EXIT_OK


def _fmt(v: float) -> str:
    return repr(round(v, 9))


def _cmd_layout(args) -> int:
    nb = _load_notebook(args.file)
    windows = [(w.id, w.label) for s in nb.stages for w in s.alternatives]
    buf = io.StringIO()
    writer = csv.writer(buf)
    if args.mode == "semicircle":
        cfg = layout.LayoutConfig(
            radius=args.radius,
            window_width=args.width,
            window_height=args.height,
            gap=args.gap,
            allow_overflow=args.allow_overflow,
        )
        try:
            poses = layout.semicircle(cfg, len(windows))
        except layout.OverflowSpan as exc:
            print(
                f"error: OverflowSpan: required span {exc.required_span:.2f} rad "
                f"exceeds max span {exc.max_span:.2f} rad",
                file=sys.stderr,
            )
            return EXIT_INPUT
        writer.writerow(["window_id", "label", "x", "y", "z", "yaw"])
        for (wid, label), p in zip(windows, poses):
            writer.writerow([wid, label, _fmt(p.x), _fmt(p.y), _fmt(p.z), _fmt(p.yaw)])
    else:
        rects = layout.desktop_layout(nb)
        writer.writerow(
            ["window_id", "label", "x", "y", "width", "height", "column"]
        )
        for wid, label in windows:
            r = rects[wid]
            writer.writerow([wid, label, r.x, r.y, r.width, r.height, r.column])
    sys.stdout.buffer.write(buf.getvalue().encode("utf-8"))
    return EXIT_OK


def _cmd_metrics(args) -> int:
    events = telemetry.load_log(Path(args.log).read_bytes())
    report = telemetry.compute_metrics(events, args.task)
    print(json.dumps(report.to_json(), ensure_ascii=False, indent=2))
    return EXIT_OK


def _cmd_validate(args) -> int:
    nb = _load_notebook(args.file)
    problems = model.validate(nb)
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return EXIT_INPUT
    print("ok")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import NotebookSession, create_app

    nb = _load_notebook(args.file)
    app = create_app({nb.id: NotebookSession(nb)})
    print(f"serving notebook '{nb.id}' on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="branchbook",
        description="Branch & merge notebook engine.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a notebook and export results")
    p.add_argument("file")
    p.add_argument("--out", help="write results here instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("flatten", help="write one linear notebook per combination")
    p.add_argument("file")
    p.add_argument("--outdir", required=True)
    p.set_defaults(fn=_cmd_flatten)

    p = sub.add_parser(
        "oracle", help="compare branched execution against flattened runs"
    )
    p.add_argument("file")
    p.add_argument("--golden", help="also compare results against this JSON export")
    p.set_defaults(fn=_cmd_oracle)

    p = sub.add_parser("layout", help="emit window placement as CSV")
    p.add_argument("file")
    p.add_argument("--mode", choices=["semicircle", "desktop"], required=True)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--width", type=float, default=0.35)
    p.add_argument("--height", type=float, default=0.30)
    p.add_argument("--gap", type=float, default=0.0)
    p.add_argument("--allow-overflow", action="store_true")
    p.set_defaults(fn=_cmd_layout)

    p = sub.add_parser("metrics", help="metrics report for one task window")
    p.add_argument("log")
    p.add_argument("--task", type=int, default=0)
    p.set_defaults(fn=_cmd_metrics)

    p = sub.add_parser("validate", help="schema and invariant check")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("serve", help="start the HTTP service for one notebook")
    p.add_argument("file")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (persist.PersistError, telemetry.TelemetryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # infrastructure failure, not user input
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
