"""Command line: ``incplan run | summarize | curves | trace | calibrate``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path as FsPath
from typing import Optional, Sequence

from .experiments import (
    ExperimentConfig,
    calibrate,
    read_rows,
    read_timings,
    run_experiment,
    success_curve,
    summarize,
)
from .harness import PLANNER_NAMES
from .traces import emit_traces
from .world import named_world


def _split(values: Optional[list[str]]) -> list[str]:
    out = []
    for v in values or []:
        out.extend(x.strip() for x in v.split(",") if x.strip())
    return out


def _budget_label(s: str) -> str:
    """Accept ``100ms``/``1000it`` or a bare number (taken as milliseconds)."""
    if s.endswith(("ms", "it")):
        return s
    return f"{float(s):g}ms"


def cmd_run(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        cfg = None
    worlds = _split(args.world) + [f"file:{p}" for p in args.world_file or []]
    budgets = [f"{float(b):g}ms" for b in _split(args.budget_ms)] + [f"{int(b)}it" for b in _split(args.budget_iters)]
    planners = _split(args.planner)
    if cfg is None:
        cfg = ExperimentConfig(
            worlds=worlds or ["random:0"],
            planners=planners or ["eitstar"],
            budgets=budgets or ["1000it"],
            sensor_range=args.sensor_range,
            trials=args.trials if args.trials is not None else 10,
            seed=args.seed if args.seed is not None else 0,
            out=args.out or "results",
        )
    else:
        overrides = {k: v for k, v in dict(worlds=worlds, planners=planners, budgets=budgets).items() if v}
        for key in ("sensor_range", "trials", "seed", "out"):
            if getattr(args, key) is not None:
                overrides[key] = getattr(args, key)
        if overrides:
            cfg = ExperimentConfig(**{**cfg.__dict__, **overrides})
    total = len(cfg.cells()) * cfg.trials

    def progress(row):
        if not args.quiet:
            mark = "ok" if row["success"] else "FAIL"
            print(f"{row['world']}\t{row['planner']}\t{row['budget']}\t#{row['trial']}\t{mark}\t"
                  f"length={row['length']}\tqueries={row['queries']}", flush=True)

    try:
        path = run_experiment(cfg, resume=args.resume, workers=args.workers, progress=progress)
    except OSError as exc:  # unwritable or not a directory
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{total} trials in {path}", file=sys.stderr)
    return 0


def cmd_summarize(args) -> int:
    rows = read_rows(args.inp)
    if not rows:
        print(f"error: no results in {args.inp}", file=sys.stderr)
        return 2
    table = summarize(rows, read_timings(args.inp))
    text = table.to_tsv()
    if args.out:
        FsPath(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_curves(args) -> int:
    rows = read_rows(args.inp)
    worlds = [args.world] if args.world else sorted({r["world"] for r in rows})
    budgets = [_budget_label(args.budget)] if args.budget else sorted({r["budget"] for r in rows})
    print("world\tbudget\tplanner\tquery\tsuccess")
    for w in worlds:
        for b in budgets:
            for p, series in success_curve(rows, w, b).items():
                for i, frac in series:
                    print(f"{w}\t{b}\t{p}\t{i}\t{frac:.6g}")
    return 0


def cmd_trace(args) -> int:
    rows = [r for r in read_rows(args.inp) if r["world"] == args.world]
    if args.planner:
        rows = [r for r in rows if r["planner"] == args.planner]
    if args.budget:
        rows = [r for r in rows if r["budget"] == _budget_label(args.budget)]
    if not rows:
        print(f"error: no trials for world {args.world!r}", file=sys.stderr)
        return 2
    out = emit_traces(rows, named_world(args.world), args.out, show_sensing=args.sensing)
    print(out)
    return 0


def cmd_calibrate(args) -> int:
    planners = _split(args.planner) or list(PLANNER_NAMES)
    ms = [float(b) for b in _split(args.budget_ms)] or [10.0, 50.0, 100.0]
    table = calibrate(args.world, planners, [m / 1000 for m in ms], args.probe)
    print("planner\t" + "\t".join(f"{m:g}ms" for m in ms))
    for p, row in table.items():
        print(p + "\t" + "\t".join(str(row[m / 1000]) for m in ms))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="incplan", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment matrix")
    r.add_argument("--config", help="INI file with an [experiment] section")
    r.add_argument("--world", action="append", help="empty, wall_gap, double_enclosure or random:<seed>; repeatable")
    r.add_argument("--world-file", action="append", help="world JSON file; repeatable")
    r.add_argument("--planner", action="append", help=f"one of {', '.join(PLANNER_NAMES)}; repeatable")
    r.add_argument("--budget-ms", action="append", help="wall-clock budget per query in ms; repeatable")
    r.add_argument("--budget-iters", action="append", help="iteration budget per query; repeatable")
    r.add_argument("--sensor-range", type=float, help="defaults to the world's own range")
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="output directory")
    r.add_argument("--resume", action="store_true", help="keep existing results and run only missing trials")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("summarize", help="per-cell medians and random-world ranks as TSV")
    s.add_argument("--in", dest="inp", required=True, help="results directory or results.jsonl")
    s.add_argument("--out", help="TSV file (stdout when omitted)")
    s.set_defaults(func=cmd_summarize)

    c = sub.add_parser("curves", help="carried-forward success rate per query index")
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--world")
    c.add_argument("--budget", help="budget label such as 100ms or 1000it")
    c.set_defaults(func=cmd_curves)

    t = sub.add_parser("trace", help="SVG of executed paths")
    t.add_argument("--in", dest="inp", required=True)
    t.add_argument("--world", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--planner")
    t.add_argument("--budget")
    t.add_argument("--sensing", action="store_true", help="also draw the sensing discs")
    t.set_defaults(func=cmd_trace)

    k = sub.add_parser("calibrate", help="iterations per wall-clock budget on this machine")
    k.add_argument("--world", default="double_enclosure")
    k.add_argument("--planner", action="append")
    k.add_argument("--budget-ms", action="append")
    k.add_argument("--probe", type=int, default=1000, help="iterations per probe run")
    k.set_defaults(func=cmd_calibrate)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
