"""The independent incremental planning loop and per-trial records.

The robot senses, plans to the goal over what it currently knows (unknown
space counts as free), follows the plan until it is about to leave the sensed
region, senses again, and repeats until it stands on the goal.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .eitstar import EITStar
from .geometry import Path, Point2, dist
from .planning import Budget, PlanQuery, PlanResult
from .rrt import RRTConnect, RRTStar
from .rrtx import RRTX
from .world import RESOLUTION, GlobalWorld, IncrementalView, SensedRegion, exit_parameter, sense

PLANNER_NAMES = ("rrt_connect", "rrt_connect_smoothed", "rrt_star", "rrtx", "rrtx_initial", "eitstar")
MAX_QUERIES = 1000
CONTINUITY_TOL = 1e-9


@dataclass(frozen=True)
class PlannerConfig:
    name: str
    params: tuple = ()  # (key, value) pairs passed to the planner constructor

    def __post_init__(self):
        if self.name not in PLANNER_NAMES:
            raise ValueError(f"unknown planner {self.name!r}; choose from {', '.join(PLANNER_NAMES)}")

    def make(self):
        kw = dict(self.params)
        if self.name == "rrt_connect":
            return RRTConnect(**kw)
        if self.name == "rrt_connect_smoothed":
            return RRTConnect(smooth=True, **kw)
        if self.name == "rrt_star":
            return RRTStar(**kw)
        if self.name == "rrtx":
            return RRTX(**kw)
        if self.name == "rrtx_initial":
            return RRTX(initial_only=True, **kw)
        return EITStar(**kw)

    @property
    def persistent(self) -> bool:
        """Whether one planner instance serves the whole trial."""
        return self.name in ("rrtx", "rrtx_initial")


def make_planner(name: str):
    return PlannerConfig(name).make()


@dataclass(frozen=True)
class TrialConfig:
    world: GlobalWorld
    planner: PlannerConfig
    r_s: float
    budget: Budget
    seed: int = 0
    max_queries: int = MAX_QUERIES

    def __post_init__(self):
        if not self.r_s > RESOLUTION:
            raise ValueError("sensor range must exceed the collision-checking resolution")
        if self.max_queries < 1:
            raise ValueError("max_queries must be at least 1")


@dataclass
class QueryRecord:
    index: int
    start: Point2
    result: PlanResult
    s: Optional[float] = None
    subpath: Optional[Path] = None
    region_size: int = 0  # sensing discs known when the query was posed

    @property
    def subpath_length(self) -> Optional[float]:
        return None if self.subpath is None else self.subpath.length

    @property
    def planning_time(self) -> float:
        return self.result.time_total


@dataclass
class TrialRecord:
    config: TrialConfig
    queries: list[QueryRecord] = field(default_factory=list)
    success: bool = False
    path: Optional[Path] = None  # the executed path, also kept for failed trials
    failure: Optional[str] = None

    @property
    def length(self) -> float:
        return self.path.length if self.success else math.inf

    @property
    def solution_time(self) -> float:
        if not self.success:
            return math.inf
        return sum(q.planning_time for q in self.queries)

    @property
    def n_queries(self) -> float:
        return len(self.queries) if self.success else math.inf

    @property
    def travelled(self) -> float:
        return 0.0 if self.path is None else self.path.length


def query_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def run_trial(cfg: TrialConfig) -> TrialRecord:
    world = cfg.world
    goal = world.goal
    x = world.start
    region = sense(SensedRegion(cfg.r_s), x)
    rec = TrialRecord(cfg)
    executed = Path([x])
    planner = cfg.planner.make() if cfg.planner.persistent else None
    stalls = 0
    for i in range(cfg.max_queries):
        view = IncrementalView(world, region)
        if planner is not None and i > 0:
            planner.notify_changes(view)  # bookkeeping, outside the planning budget
        p = planner if planner is not None else cfg.planner.make()
        q = PlanQuery(x, goal, view, cfg.budget, seed=query_seed(cfg.seed, i))
        result = p.plan(q)
        qr = QueryRecord(i, x, result, region_size=len(region))
        rec.queries.append(qr)
        if not result.solved:
            rec.failure = f"query {i} failed"
            break
        sigma = result.path
        s = exit_parameter(sigma, region)
        followed = sigma.subpath(s)
        qr.s = s
        qr.subpath = followed
        executed = executed.concat(followed)
        x_next = followed.end
        if s >= 1.0 and x_next == goal:
            rec.success = True
            break
        stalls = stalls + 1 if followed.length < RESOLUTION else 0
        if stalls >= 2:
            rec.failure = "no progress on two consecutive queries"
            break
        x = x_next
        region = sense(region, x)
    else:
        rec.failure = f"gave up after {cfg.max_queries} queries"
    rec.path = executed
    return rec


def replay_global_path(rec: TrialRecord, world: GlobalWorld, resolution: float = RESOLUTION) -> bool:
    """Check the executed path against the true world.

    The followed pieces must chain together within ``CONTINUITY_TOL`` and every
    piece must be collision-free against all obstacles. The collision check is
    dense (states every ``resolution``) and independent of the planners' exact
    segment tests.
    """
    if not rec.success:
        return False
    pieces = [q.subpath for q in rec.queries]
    if any(p is None for p in pieces) or not pieces:
        return False
    if dist(pieces[0].start, world.start) > CONTINUITY_TOL:
        return False
    for a, b in zip(pieces, pieces[1:]):
        if dist(a.end, b.start) > CONTINUITY_TOL:
            return False
    if dist(pieces[-1].end, world.goal) > CONTINUITY_TOL:
        return False
    return all(dense_path_clear(p, world, resolution) for p in pieces)


def dense_path_clear(p: Path, world: GlobalWorld, resolution: float = RESOLUTION) -> bool:
    rects = np.array([tuple(r) for r in world.obstacles], dtype=float).reshape(-1, 4)
    b = world.bounds
    for a, c in p.segments():
        n = max(2, int(math.ceil(dist(a, c) / resolution)) + 1)
        t = np.linspace(0.0, 1.0, n)
        xs = a[0] + t * (c[0] - a[0])
        ys = a[1] + t * (c[1] - a[1])
        if ((xs < b.xmin) | (xs > b.xmax) | (ys < b.ymin) | (ys > b.ymax)).any():
            return False
        if len(rects):
            inside = ((xs[:, None] >= rects[:, 0]) & (xs[:, None] <= rects[:, 2])
                      & (ys[:, None] >= rects[:, 1]) & (ys[:, None] <= rects[:, 3]))
            if inside.any():
                return False
    return True


def timed_trial(cfg: TrialConfig) -> tuple[TrialRecord, float]:
    t0 = time.perf_counter()
    rec = run_trial(cfg)
    return rec, time.perf_counter() - t0
