"""Shared planner contract: queries, budgets, results, sampling and steering."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import Path, Point2
from .world import IncrementalView

MAX_EDGE = 0.3
GOAL_BIAS = 0.05
DIMENSION = 2

# Iteration budgets standing in for the wall-clock budgets of the benchmark.
# One iteration is one sample (or one shortcut attempt) for every planner, and
# a 0.1 s budget is taken to buy 1000 of them. See ``calibrate`` for what the
# host actually achieves per second.
EQUIVALENT_ITERATIONS = {0.01: 100, 0.05: 500, 0.1: 1000}


@dataclass(frozen=True)
class Budget:
    mode: str  # "time" or "iterations"
    wall_limit: Optional[float] = None
    iteration_limit: Optional[int] = None

    def __post_init__(self):
        if self.mode == "time":
            if self.wall_limit is None or self.iteration_limit is not None or not self.wall_limit > 0:
                raise ValueError("time budgets need exactly a positive wall_limit")
        elif self.mode == "iterations":
            if self.iteration_limit is None or self.wall_limit is not None or self.iteration_limit < 1:
                raise ValueError("iteration budgets need exactly a positive iteration_limit")
        else:
            raise ValueError(f"unknown budget mode {self.mode!r}")

    @classmethod
    def seconds(cls, s: float) -> "Budget":
        return cls("time", wall_limit=float(s))

    @classmethod
    def iterations(cls, n: int) -> "Budget":
        return cls("iterations", iteration_limit=int(n))

    @classmethod
    def equivalent(cls, seconds: float) -> "Budget":
        """Deterministic stand-in for a wall-clock budget of ``seconds``."""
        try:
            return cls.iterations(EQUIVALENT_ITERATIONS[seconds])
        except KeyError:
            return cls.iterations(max(1, round(seconds * 10_000)))

    @property
    def label(self) -> str:
        if self.mode == "time":
            return f"{self.wall_limit * 1000:g}ms"
        return f"{self.iteration_limit}it"

    @classmethod
    def from_label(cls, label: str) -> "Budget":
        if label.endswith("ms"):
            return cls.seconds(float(label[:-2]) / 1000)
        if label.endswith("it"):
            return cls.iterations(int(label[:-2]))
        raise ValueError(f"bad budget label {label!r}")

    def clock(self) -> "BudgetClock":
        return BudgetClock(self)


class BudgetClock:
    """Tracks spent iterations and wall time against one budget."""

    __slots__ = ("budget", "t0", "iterations", "_deadline", "_limit")

    def __init__(self, budget: Budget):
        self.budget = budget
        self.iterations = 0
        self.t0 = time.perf_counter()
        self._deadline = self.t0 + budget.wall_limit if budget.mode == "time" else math.inf
        self._limit = budget.iteration_limit if budget.mode == "iterations" else None

    def tick(self, n: int = 1) -> None:
        self.iterations += n

    def exhausted(self) -> bool:
        if self._limit is not None:
            return self.iterations >= self._limit
        return time.perf_counter() >= self._deadline

    def remaining_iterations(self) -> Optional[int]:
        if self._limit is None:
            return None
        return max(0, self._limit - self.iterations)

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0


@dataclass
class PlanQuery:
    start: Point2
    goal: Point2
    view: IncrementalView
    budget: Budget
    seed: int = 0

    def validate(self) -> None:
        if not self.view.is_state_valid(self.start):
            raise ValueError(f"start {self.start} is not a valid state")
        if not self.view.is_state_valid(self.goal):
            raise ValueError(f"goal {self.goal} is not a valid state")


@dataclass
class PlanResult:
    status: str  # "solved" or "failed"
    path: Optional[Path] = None
    cost: float = math.inf
    time_to_initial: float = math.inf
    time_total: float = 0.0
    iterations: int = 0
    early_exit: bool = False
    iterations_to_initial: Optional[int] = None
    cost_trace: list = field(default_factory=list)  # (iteration, best cost) on every improvement

    @property
    def solved(self) -> bool:
        return self.status == "solved"


class AnytimeRecorder:
    """Bookkeeping for the best solution found so far within one query."""

    def __init__(self, clock: BudgetClock):
        self.clock = clock
        self.best_cost = math.inf
        self.best_path: Optional[Path] = None
        self.time_to_initial = math.inf
        self.iterations_to_initial: Optional[int] = None
        self.trace: list[tuple[int, float]] = []

    def offer(self, path: Path) -> bool:
        cost = path.length
        if cost >= self.best_cost:
            return False
        if self.best_path is None:
            self.time_to_initial = self.clock.elapsed()
            self.iterations_to_initial = self.clock.iterations
        self.best_cost = cost
        self.best_path = path
        self.trace.append((self.clock.iterations, cost))
        return True

    def result(self, early_exit: bool = False) -> PlanResult:
        solved = self.best_path is not None
        return PlanResult(
            status="solved" if solved else "failed",
            path=self.best_path,
            cost=self.best_cost,
            time_to_initial=self.time_to_initial,
            time_total=self.clock.elapsed(),
            iterations=self.clock.iterations,
            early_exit=early_exit and solved,
            iterations_to_initial=self.iterations_to_initial,
            cost_trace=list(self.trace),
        )


def make_rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def uniform_state(rng: np.random.Generator, view: IncrementalView) -> Point2:
    b = view.bounds
    x, y = rng.random(2)
    return (b.xmin + x * (b.xmax - b.xmin), b.ymin + y * (b.ymax - b.ymin))


def sample_state(rng: np.random.Generator, view: IncrementalView, goal: Point2,
                 goal_bias: float) -> Point2:
    """The goal with probability ``goal_bias``, otherwise uniform over the bounds.

    Validity is left to the caller.
    """
    if not 0.0 <= goal_bias <= 1.0:
        raise ValueError("goal_bias must lie in [0, 1]")
    if goal_bias > 0.0 and rng.random() < goal_bias:
        return goal
    return uniform_state(rng, view)


def steer(src: Point2, dst: Point2, max_edge: float = MAX_EDGE) -> Point2:
    if not max_edge > 0:
        raise ValueError("max_edge must be positive")
    dx = dst[0] - src[0]
    dy = dst[1] - src[1]
    d = math.sqrt(dx * dx + dy * dy)
    if d <= max_edge:
        return dst
    f = max_edge / d
    return (src[0] + f * dx, src[1] + f * dy)


def rgg_k(n: int, factor: float, dimension: int = DIMENSION) -> int:
    """k-nearest connection count ``ceil(factor * e * (1 + 1/d) * log n)``, at least 1."""
    if n <= 1:
        return 1
    return max(1, math.ceil(factor * math.e * (1.0 + 1.0 / dimension) * math.log(n)))
