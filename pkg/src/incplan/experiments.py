"""Experiment driver, results files, summaries and success curves.

An experiment is the cartesian product worlds x planners x budgets ("cells"),
each run for a number of trials. Results go to ``<out>/results.jsonl``, one
JSON object per trial written in (cell, trial) order. Everything in that file
is a deterministic function of the configuration when budgets are counted in
iterations; wall-clock measurements live in ``<out>/timings.jsonl`` next to a
``host.json`` fingerprint.

Config files are INI with one ``[experiment]`` section::

    [experiment]
    worlds = wall_gap, random:0, random:1
    planners = eitstar, rrt_connect_smoothed
    budgets = 1000it, 100ms
    sensor_range = 0.1      ; omit for the per-world default
    trials = 10
    seed = 0
    max_queries = 1000
    out = runs/demo
"""

from __future__ import annotations

import configparser
import functools
import json
import math
import os
import platform
import statistics
import traceback
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Iterable, Optional, Union

import numpy as np

from .harness import PLANNER_NAMES, MAX_QUERIES, PlannerConfig, TrialConfig, TrialRecord, run_trial
from .planning import Budget
from .world import default_sensor_range, named_world

RESULTS_FILE = "results.jsonl"
TIMINGS_FILE = "timings.jsonl"
HOST_FILE = "host.json"


@dataclass
class ExperimentConfig:
    worlds: list[str]
    planners: list[str]
    budgets: list[str]  # labels such as "100ms" or "1000it"
    sensor_range: Optional[float] = None
    trials: int = 10
    seed: int = 0
    out: str = "results"
    max_queries: int = MAX_QUERIES

    def __post_init__(self):
        if not self.worlds:
            raise ValueError("no worlds given")
        if not self.planners:
            raise ValueError("no planners given")
        if not self.budgets:
            raise ValueError("no budgets given")
        for p in self.planners:
            PlannerConfig(p)
        for b in self.budgets:
            Budget.from_label(b)
        if self.trials < 1:
            raise ValueError("trials must be positive")

    def cells(self) -> list[tuple[str, str, str]]:
        return [(w, p, b) for w in self.worlds for p in self.planners for b in self.budgets]

    def range_for(self, world: str) -> float:
        return self.sensor_range if self.sensor_range is not None else default_sensor_range(world)

    @classmethod
    def from_file(cls, path: Union[str, FsPath]) -> "ExperimentConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
        sec = cp["experiment"]
        split = lambda s: [x.strip() for x in s.split(",") if x.strip()]
        sr = sec.get("sensor_range")
        return cls(
            worlds=split(sec["worlds"]),
            planners=split(sec["planners"]),
            budgets=split(sec["budgets"]),
            sensor_range=float(sr) if sr else None,
            trials=sec.getint("trials", 10),
            seed=sec.getint("seed", 0),
            out=sec.get("out", "results"),
            max_queries=sec.getint("max_queries", MAX_QUERIES),
        )


def trial_seed(base: int, cell_index: int, trial: int) -> int:
    return int(np.random.SeedSequence([base, cell_index, trial]).generate_state(1)[0])


def _num(x: float):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def _unnum(x):
    return math.inf if x == "inf" else x


def trial_row(world: str, planner: str, budget: str, trial: int, seed: int, r_s: float,
              rec: Optional[TrialRecord], error: Optional[str] = None) -> dict:
    """The deterministic part of a trial's outcome, as stored in the results file."""
    row = {"world": world, "planner": planner, "budget": budget, "trial": trial, "seed": seed,
           "sensor_range": r_s}
    if rec is None:
        row.update(success=False, length="inf", queries="inf", travelled=0.0, failure=error,
                   per_query=[], path=[])
        return row
    row.update(
        success=rec.success,
        length=_num(rec.length),
        queries=_num(float(rec.n_queries)) if not rec.success else rec.n_queries,
        travelled=rec.travelled,
        failure=rec.failure,
        per_query=[
            {
                "status": q.result.status,
                "start": list(q.start),
                "s": q.s,
                "subpath_length": q.subpath_length,
                "cost": _num(q.result.cost),
                "iterations": q.result.iterations,
            }
            for q in rec.queries
        ],
        path=[list(p) for p in rec.path.waypoints] if rec.path is not None else [],
    )
    return row


def timing_row(world: str, planner: str, budget: str, trial: int, rec: Optional[TrialRecord]) -> dict:
    if rec is None:
        return {"world": world, "planner": planner, "budget": budget, "trial": trial,
                "time": "inf", "query_times": []}
    return {"world": world, "planner": planner, "budget": budget, "trial": trial,
            "time": _num(rec.solution_time), "query_times": [q.planning_time for q in rec.queries]}


def row_key(row: dict) -> tuple:
    return (row["world"], row["planner"], row["budget"], row["trial"])


def host_fingerprint() -> dict:
    cpu = platform.processor() or ""
    mhz = None
    try:
        with open("/proc/cpuinfo", encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("model name"):
                    cpu = line.split(":", 1)[1].strip()
                elif line.startswith("cpu MHz") and mhz is None:
                    mhz = float(line.split(":", 1)[1])
    except OSError:
        pass
    return {
        "cpu": cpu,
        "cpu_mhz": mhz,
        "cpu_count": os.cpu_count(),
        "machine": platform.machine(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def read_rows(path: Union[str, FsPath]) -> list[dict]:
    p = FsPath(path)
    if p.is_dir():
        p = p / RESULTS_FILE
    if not p.exists():
        return []
    rows = []
    with open(p, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def read_timings(out: Union[str, FsPath]) -> dict:
    p = FsPath(out)
    if p.is_file():
        p = p.parent
    return {row_key(r): r for r in read_rows(p / TIMINGS_FILE)}


@functools.lru_cache(maxsize=256)
def _world(spec: str):
    return named_world(spec)


def _run_one(args) -> tuple[dict, dict]:
    world_spec, planner, budget, trial, seed, r_s, max_queries = args
    try:
        world = _world(world_spec)
        cfg = TrialConfig(world, PlannerConfig(planner), r_s, Budget.from_label(budget), seed, max_queries)
        rec = run_trial(cfg)
        return (trial_row(world_spec, planner, budget, trial, seed, r_s, rec),
                timing_row(world_spec, planner, budget, trial, rec))
    except Exception as exc:  # recorded, not raised: one bad trial must not sink the batch
        note = f"{type(exc).__name__}: {exc}"
        traceback.print_exc()
        return (trial_row(world_spec, planner, budget, trial, seed, r_s, None, note),
                timing_row(world_spec, planner, budget, trial, None))


def run_experiment(cfg: ExperimentConfig, resume: bool = False, workers: int = 1,
                   progress=None) -> FsPath:
    """Run every missing trial and return the results file path."""
    out = FsPath(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    results = out / RESULTS_FILE
    timings = out / TIMINGS_FILE
    if not os.access(out, os.W_OK):
        raise PermissionError(f"cannot write to {out}")
    if resume:
        done = {row_key(r) for r in read_rows(results)}
    else:
        done = set()
        results.write_text("", encoding="utf-8")
        timings.write_text("", encoding="utf-8")
    (out / HOST_FILE).write_text(json.dumps(host_fingerprint(), indent=2) + "\n", encoding="utf-8")
    jobs = []
    for ci, (w, p, b) in enumerate(cfg.cells()):
        for t in range(cfg.trials):
            if (w, p, b, t) in done:
                continue
            jobs.append((w, p, b, t, trial_seed(cfg.seed, ci, t), cfg.range_for(w), cfg.max_queries))
    if workers > 1:
        import multiprocessing

        with multiprocessing.Pool(workers) as pool:
            _write_all(pool.imap(_run_one, jobs), results, timings, progress)
    else:
        _write_all(map(_run_one, jobs), results, timings, progress)
    return results


def _write_all(outcomes: Iterable, results: FsPath, timings: FsPath, progress) -> None:
    with open(results, "a", encoding="utf-8") as rf, open(timings, "a", encoding="utf-8") as tf:
        for row, trow in outcomes:
            rf.write(_dumps(row) + "\n")
            tf.write(_dumps(trow) + "\n")
            rf.flush()
            tf.flush()
            if progress is not None:
                progress(row)


# -- summaries ------------------------------------------------------------------


def median_inf(values: Iterable[float]) -> float:
    """Median where failures are +inf; more than half failures gives inf."""
    vals = sorted(_unnum(v) for v in values)
    if not vals:
        return math.nan
    n = len(vals)
    if n % 2:
        return float(vals[n // 2])
    a, b = vals[n // 2 - 1], vals[n // 2]
    if math.isinf(b):
        return math.inf
    return (a + b) / 2


def min_ranks(values: dict) -> dict:
    """Rank 1 for the smallest value; ties all get the lowest rank they span.

    A nan value (e.g. a time that was never measured) gets a nan rank.
    """
    ordered = sorted(v for v in values.values() if not math.isnan(v))
    return {k: math.nan if math.isnan(v) else 1 + ordered.index(v) for k, v in values.items()}


def _median_rank(ranks: list) -> float:
    if any(math.isnan(r) for r in ranks):
        return math.nan
    return float(statistics.median(ranks))


@dataclass
class CellSummary:
    world: str
    planner: str
    budget: str
    trials: int
    success_rate: float
    median_length: float
    median_time: float
    median_queries: float


@dataclass
class CollectionSummary:
    planner: str
    budget: str
    worlds: int
    total_success_rate: float
    median_success_rate: float
    median_ranks: tuple[float, float, float]  # length, time, queries


@dataclass
class SummaryTable:
    cells: list[CellSummary] = field(default_factory=list)
    random: list[CollectionSummary] = field(default_factory=list)

    def cell(self, world: str, planner: str, budget: str) -> CellSummary:
        for c in self.cells:
            if (c.world, c.planner, c.budget) == (world, planner, budget):
                return c
        raise KeyError((world, planner, budget))

    def to_tsv(self) -> str:
        f = lambda x: "inf" if math.isinf(x) else ("nan" if math.isnan(x) else f"{x:.6g}")
        lines = ["world\tplanner\tbudget\ttrials\tsuccess_rate\tmedian_length\tmedian_time\tmedian_queries"]
        for c in self.cells:
            lines.append("\t".join([c.world, c.planner, c.budget, str(c.trials), f(c.success_rate),
                                    f(c.median_length), f(c.median_time), f(c.median_queries)]))
        if self.random:
            lines.append("")
            lines.append("collection\tplanner\tbudget\tworlds\ttotal_success_rate\tmedian_success_rate"
                         "\trank_length\trank_time\trank_queries")
            for r in self.random:
                lines.append("\t".join(["random", r.planner, r.budget, str(r.worlds), f(r.total_success_rate),
                                        f(r.median_success_rate)] + [f(x) for x in r.median_ranks]))
        return "\n".join(lines) + "\n"


def summarize(rows: list[dict], timings: Optional[dict] = None) -> SummaryTable:
    """Per-cell medians with failures as inf, plus rank aggregates over random worlds.

    ``timings`` maps row keys to timing rows; without it median times are nan.
    """
    if not rows:
        raise ValueError("no results to summarize")
    timings = timings or {}
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["world"], r["planner"], r["budget"]), []).append(r)
    table = SummaryTable()
    for (w, p, b), rs in groups.items():
        times = []
        for r in rs:
            t = timings.get(row_key(r))
            times.append(_unnum(t["time"]) if t is not None else (math.nan if r["success"] else math.inf))
        have_times = all(not math.isnan(t) for t in times)
        table.cells.append(CellSummary(
            world=w, planner=p, budget=b, trials=len(rs),
            success_rate=sum(bool(r["success"]) for r in rs) / len(rs),
            median_length=median_inf(r["length"] for r in rs),
            median_time=median_inf(times) if have_times else math.nan,
            median_queries=median_inf(r["queries"] for r in rs),
        ))
    table.random = _collection(table.cells, rows)
    return table


def _collection(cells: list[CellSummary], rows: list[dict]) -> list[CollectionSummary]:
    rand = [c for c in cells if c.world.startswith("random:")]
    out = []
    for b in sorted({c.budget for c in rand}):
        by_world: dict[str, dict[str, CellSummary]] = {}
        for c in rand:
            if c.budget == b:
                by_world.setdefault(c.world, {})[c.planner] = c
        planners = sorted({p for d in by_world.values() for p in d})
        ranks = {p: ([], [], []) for p in planners}
        for d in by_world.values():
            for j, attr in enumerate(("median_length", "median_time", "median_queries")):
                rk = min_ranks({p: getattr(c, attr) for p, c in d.items()})
                for p, v in rk.items():
                    ranks[p][j].append(v)
        for p in planners:
            rs = [r for r in rows if r["budget"] == b and r["planner"] == p and r["world"].startswith("random:")]
            rates = [d[p].success_rate for d in by_world.values() if p in d]
            out.append(CollectionSummary(
                planner=p, budget=b, worlds=len(rates),
                total_success_rate=sum(bool(r["success"]) for r in rs) / len(rs),
                median_success_rate=statistics.median(rates),
                median_ranks=tuple(_median_rank(x) for x in ranks[p]),
            ))
    return out


def success_curve(rows: list[dict], world: str, budget: str,
                  planner: Optional[str] = None) -> dict[str, list[tuple[int, float]]]:
    """Carried-forward per-query success fraction for each planner in the cell.

    A failed trial counts as failed from its last posed query onwards; a
    successful one counts as succeeded at every index, including indices past
    its last query.
    """
    cell = [r for r in rows if r["world"] == world and r["budget"] == budget
            and (planner is None or r["planner"] == planner)]
    out = {}
    for p in sorted({r["planner"] for r in cell}):
        rs = [r for r in cell if r["planner"] == p]
        last = max(max(len(r["per_query"]) for r in rs), 1)
        series = []
        for i in range(1, last + 1):
            alive = sum(1 for r in rs if r["success"] or i < len(r["per_query"]))
            series.append((i, alive / len(rs)))
        out[p] = series
    return out


# -- calibration ------------------------------------------------------------------


def calibrate(world: str = "double_enclosure", planners: Iterable[str] = PLANNER_NAMES,
              seconds: Iterable[float] = (0.01, 0.05, 0.1), probe_iterations: int = 1000,
              repeats: int = 3) -> dict[str, dict[float, int]]:
    """Iterations each planner completes per wall-clock budget on this host.

    Each planner is run on the fully sensed start-goal query of ``world`` for
    at most ``probe_iterations`` iterations and the rate is iterations over
    wall time. The default world has no straight-line solution, so planners
    that stop early still run long enough to measure.
    """
    from .planning import PlanQuery
    from .world import IncrementalView

    w = named_world(world)
    view = IncrementalView(w)
    out = {}
    for name in planners:
        rates = []
        for k in range(repeats):
            planner = PlannerConfig(name).make()
            res = planner.plan(PlanQuery(w.start, w.goal, view, Budget.iterations(probe_iterations), seed=k))
            if res.iterations >= 10 and res.time_total > 0:
                rates.append(res.iterations / res.time_total)
        rate = statistics.median(rates) if rates else math.nan
        out[name] = {s: (int(rate * s) if not math.isnan(rate) else 0) for s in seconds}
    return out
