"""Ground-truth worlds, the sensed region and the per-query incremental view.

A state collides in the incremental view iff it lies inside a global obstacle
*and* inside the union of sensing discs gathered so far; everything unsensed is
assumed free. Motion checks are exact (segment against rectangle-disc pieces),
which is never more permissive than sampling the segment at any resolution.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Optional, Sequence, Union

import numpy as np

from .geometry import (
    AxisRect,
    Ball,
    Path,
    Point2,
    clip_segment_to_rect,
    clip_segments_to_rects,
    dist,
    point_in_ball,
    point_in_rect,
    segment_ball_interval,
    subsegment_intersects_ball,
)

BOUNDS = AxisRect(-1.0, -1.0, 1.0, 1.0)
RESOLUTION = 0.002
ORACLE_EPS = 1e-6

RANDOM_START: Point2 = (-0.1, -0.1)
RANDOM_GOAL: Point2 = (0.4, 0.4)
N_RANDOM_RECTS = 20
RECT_SIDE_RANGE = (0.1, 0.2)
MAX_WORLD_REDRAWS = 1000

SENSOR_RANGES = {"random": 0.1, "wall_gap": 0.075, "double_enclosure": 0.05, "empty": 0.1}


@dataclass(frozen=True)
class GlobalWorld:
    obstacles: tuple[AxisRect, ...]
    start: Point2
    goal: Point2
    bounds: AxisRect = BOUNDS
    name: str = "world"

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(AxisRect(*map(float, r)) for r in self.obstacles))
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "goal", (float(self.goal[0]), float(self.goal[1])))
        for label, p in (("start", self.start), ("goal", self.goal)):
            if not point_in_rect(p, self.bounds):
                raise ValueError(f"{label} {p} outside bounds")
            if any(point_in_rect(p, r) for r in self.obstacles):
                raise ValueError(f"{label} {p} inside an obstacle")

    def collides(self, p: Point2) -> bool:
        return any(point_in_rect(p, r) for r in self.obstacles)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "bounds": list(self.bounds),
            "obstacles": [list(r) for r in self.obstacles],
            "start": list(self.start),
            "goal": list(self.goal),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GlobalWorld":
        return cls(
            obstacles=tuple(AxisRect(*r) for r in d["obstacles"]),
            start=tuple(d["start"]),
            goal=tuple(d["goal"]),
            bounds=AxisRect(*d.get("bounds", BOUNDS)),
            name=d.get("name", "world"),
        )


def save_world(world: GlobalWorld, path: Union[str, FsPath]) -> None:
    """Write a world as JSON: ``name``, ``bounds`` and each obstacle as
    ``[xmin, ymin, xmax, ymax]``, plus ``start`` and ``goal`` as ``[x, y]``."""
    FsPath(path).write_text(json.dumps(world.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_world(path: Union[str, FsPath]) -> GlobalWorld:
    return GlobalWorld.from_dict(json.loads(FsPath(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class SensedRegion:
    """Union of sensing discs, all of radius ``r_s``. Only ever grows."""

    r_s: float
    balls: tuple[Ball, ...] = ()

    def __post_init__(self):
        if not self.r_s > 0:
            raise ValueError("sensor range must be positive")

    def contains(self, p: Point2) -> bool:
        return any(point_in_ball(p, b) for b in self.balls)

    def __len__(self) -> int:
        return len(self.balls)


def sense(region: SensedRegion, x: Point2) -> SensedRegion:
    return SensedRegion(region.r_s, region.balls + (Ball(float(x[0]), float(x[1]), region.r_s),))


def _exit_location(p: Path, region: SensedRegion) -> Optional[tuple[int, float]]:
    """Segment/local parameter of the first departure from the region, or None."""
    if not region.contains(p.start):
        raise ValueError("path must start inside the sensed region")
    balls = region.balls
    for i, (a, b) in enumerate(p.segments()):
        spans = []
        for ball in balls:
            iv = segment_ball_interval(a, b, ball)
            if iv is not None:
                spans.append(iv)
        spans.sort()
        covered = 0.0
        for lo, hi in spans:
            if lo > covered + 1e-12:
                break
            if hi > covered:
                covered = hi
        if covered < 1.0:
            return i, covered
    return None


def exit_parameter(p: Path, region: SensedRegion) -> float:
    """Largest s such that ``p([0, s])`` stays inside the sensed region.

    Computed exactly from segment-disc intersections rather than by stepping
    along the path; 1.0 when the whole path is covered.
    """
    loc = _exit_location(p, region)
    if loc is None:
        return 1.0
    return p.parameter_of(*loc)


class IncrementalView:
    """Validity oracle for one query.

    ``region=None`` gives the fully sensed view (the true world).
    """

    def __init__(self, world: GlobalWorld, region: Optional[SensedRegion] = None,
                 resolution: float = RESOLUTION):
        if not resolution > 0:
            raise ValueError("resolution must be positive")
        self.world = world
        self.region = region
        self.resolution = resolution
        self.bounds = world.bounds
        # pieces: (rect, balls touching it) or (rect, None) when the whole rect is known
        pieces: list[tuple[AxisRect, Optional[tuple[Ball, ...]]]] = []
        for r in world.obstacles:
            if region is None:
                pieces.append((r, None))
                continue
            touching = tuple(b for b in region.balls if _rect_touches_ball(r, b))
            if touching:
                pieces.append((r, touching))
        self.pieces = pieces
        self._piece_rects = np.array([p[0] for p in pieces], dtype=float).reshape(-1, 4)
        pair_piece, pair_ball = [], []
        for k, (_, balls) in enumerate(pieces):
            for b in balls if balls is not None else (Ball(0.0, 0.0, math.inf),):
                pair_piece.append(k)
                pair_ball.append(b)
        self._pair_piece = np.array(pair_piece, dtype=int)
        self._pair_ball = np.array(pair_ball, dtype=float).reshape(-1, 3)

    @property
    def fully_sensed(self) -> bool:
        return self.region is None

    def in_bounds(self, p: Point2) -> bool:
        return point_in_rect(p, self.bounds)

    def is_state_valid(self, p: Point2) -> bool:
        if not point_in_rect(p, self.bounds):
            return False
        for r, balls in self.pieces:
            if r.xmin <= p[0] <= r.xmax and r.ymin <= p[1] <= r.ymax:
                if balls is None:
                    return False
                for b in balls:
                    dx = p[0] - b.cx
                    dy = p[1] - b.cy
                    if dx * dx + dy * dy <= b.radius * b.radius:
                        return False
        return True

    def is_motion_valid(self, a: Point2, b: Point2) -> bool:
        bd = self.bounds
        if not (bd.xmin <= a[0] <= bd.xmax and bd.ymin <= a[1] <= bd.ymax
                and bd.xmin <= b[0] <= bd.xmax and bd.ymin <= b[1] <= bd.ymax):
            return False
        lox, hix = (a[0], b[0]) if a[0] <= b[0] else (b[0], a[0])
        loy, hiy = (a[1], b[1]) if a[1] <= b[1] else (b[1], a[1])
        for r, balls in self.pieces:
            if r.xmin > hix or r.xmax < lox or r.ymin > hiy or r.ymax < loy:
                continue
            iv = clip_segment_to_rect(a, b, r)
            if iv is None:
                continue
            if balls is None:
                return False
            for ball in balls:
                if subsegment_intersects_ball(a, b, iv[0], iv[1], ball):
                    return False
        return True

    def states_valid(self, pts: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`is_state_valid` over an (n, 2) array."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        bd = self.bounds
        ok = (pts[:, 0] >= bd.xmin) & (pts[:, 0] <= bd.xmax) & (pts[:, 1] >= bd.ymin) & (pts[:, 1] <= bd.ymax)
        if not len(self.pieces) or not len(pts):
            return ok
        R = self._piece_rects
        in_rect = ((pts[:, 0:1] >= R[None, :, 0]) & (pts[:, 0:1] <= R[None, :, 2])
                   & (pts[:, 1:2] >= R[None, :, 1]) & (pts[:, 1:2] <= R[None, :, 3]))
        cand = np.nonzero(in_rect.any(axis=1))[0]
        hit = np.zeros(len(pts), dtype=bool)
        if len(cand):
            B = self._pair_ball
            c = pts[cand]
            dx = c[:, 0:1] - B[None, :, 0]
            dy = c[:, 1:2] - B[None, :, 1]
            in_ball = dx * dx + dy * dy <= B[None, :, 2] ** 2
            hit[cand] = (in_rect[cand][:, self._pair_piece] & in_ball).any(axis=1)
        return ok & ~hit

    def motions_valid(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`is_motion_valid` over (n, 2) endpoint arrays."""
        a = np.asarray(a, dtype=float).reshape(-1, 2)
        b = np.asarray(b, dtype=float).reshape(-1, 2)
        ok = np.ones(len(a), dtype=bool)
        bd = self.bounds
        for q in (a, b):
            ok &= (q[:, 0] >= bd.xmin) & (q[:, 0] <= bd.xmax) & (q[:, 1] >= bd.ymin) & (q[:, 1] <= bd.ymax)
        if not len(self.pieces) or not len(a):
            return ok
        t0, t1 = clip_segments_to_rects(a, b, self._piece_rects)
        hit_rect = t0 <= t1
        d = b - a
        dd = (d * d).sum(axis=1)
        blocked = np.zeros(len(a), dtype=bool)
        for q, k in enumerate(self._pair_piece):
            rows = np.nonzero(hit_rect[:, k] & ~blocked)[0]
            if not len(rows):
                continue
            cx, cy, rad = self._pair_ball[q]
            if math.isinf(rad):
                blocked[rows] = True
                continue
            dr = d[rows]
            with np.errstate(divide="ignore", invalid="ignore"):
                t = ((cx - a[rows, 0]) * dr[:, 0] + (cy - a[rows, 1]) * dr[:, 1]) / dd[rows]
            t = np.where(dd[rows] == 0.0, t0[rows, k], t)
            t = np.clip(t, t0[rows, k], t1[rows, k])
            px = a[rows, 0] + t * dr[:, 0] - cx
            py = a[rows, 1] + t * dr[:, 1] - cy
            blocked[rows[px * px + py * py <= rad * rad]] = True
        return ok & ~blocked


def _rect_touches_ball(r: AxisRect, b: Ball) -> bool:
    nx = min(max(b.cx, r.xmin), r.xmax)
    ny = min(max(b.cy, r.ymin), r.ymax)
    return (nx - b.cx) ** 2 + (ny - b.cy) ** 2 <= b.radius * b.radius


def is_state_valid(v: IncrementalView, p: Point2) -> bool:
    return v.is_state_valid(p)


def is_motion_valid(v: IncrementalView, a: Point2, b: Point2) -> bool:
    return v.is_motion_valid(a, b)


# ----------------------------------------------------------------------------
# world generators


def make_empty_world(start: Point2 = RANDOM_START, goal: Point2 = RANDOM_GOAL) -> GlobalWorld:
    return GlobalWorld(obstacles=(), start=start, goal=goal, name="empty")


def make_wall_gap() -> GlobalWorld:
    # gap 0.05 wide (narrower than the 0.075 sensor range), walls 0.1 thick
    walls = (
        AxisRect(-0.05, -1.0, 0.05, -0.025),
        AxisRect(-0.05, 0.025, 0.05, 1.0),
    )
    return GlobalWorld(obstacles=walls, start=(-0.4, 0.0), goal=(0.4, 0.0), name="wall_gap")


def make_double_enclosure() -> GlobalWorld:
    # 0.3 x 0.3 cavities, walls 0.05 thick; each opens away from the other endpoint
    t, half = 0.05, 0.15
    walls = []
    for cx, open_dir in ((-0.5, -1.0), (0.5, 1.0)):
        closed_x = cx - open_dir * half  # x of the closed (facing) side
        open_x = cx + open_dir * half
        if open_dir < 0:
            walls.append(AxisRect(closed_x, -half - t, closed_x + t, half + t))
            walls.append(AxisRect(open_x, half, closed_x + t, half + t))
            walls.append(AxisRect(open_x, -half - t, closed_x + t, -half))
        else:
            walls.append(AxisRect(closed_x - t, -half - t, closed_x, half + t))
            walls.append(AxisRect(closed_x - t, half, open_x, half + t))
            walls.append(AxisRect(closed_x - t, -half - t, open_x, -half))
    return GlobalWorld(obstacles=tuple(walls), start=(-0.5, 0.0), goal=(0.5, 0.0),
                       name="double_enclosure")


def generate_random_rectangles(seed: int) -> GlobalWorld:
    """Twenty random axis-aligned rectangles with sides in [0.1, 0.2].

    Centres are uniform over the bounds. A rectangle covering the start or goal
    is redrawn; the whole world is redrawn until a feasible path exists.
    """
    rng = np.random.default_rng(seed)
    lo, hi = RECT_SIDE_RANGE
    bd = BOUNDS
    for _ in range(MAX_WORLD_REDRAWS):
        rects = []
        while len(rects) < N_RANDOM_RECTS:
            w, h = rng.uniform(lo, hi, size=2)
            cx = rng.uniform(bd.xmin, bd.xmax)
            cy = rng.uniform(bd.ymin, bd.ymax)
            r = AxisRect(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)
            if point_in_rect(RANDOM_START, r) or point_in_rect(RANDOM_GOAL, r):
                continue
            rects.append(r)
        world = GlobalWorld(obstacles=tuple(rects), start=RANDOM_START, goal=RANDOM_GOAL,
                            name=f"random:{seed}")
        if world_is_feasible(world):
            return world
    raise RuntimeError(f"no feasible random world after {MAX_WORLD_REDRAWS} redraws (seed {seed})")


def named_world(spec: str) -> GlobalWorld:
    """Resolve ``empty``, ``wall_gap``, ``double_enclosure``, ``random:<seed>`` or ``file:<path>``."""
    if spec == "empty":
        return make_empty_world()
    if spec == "wall_gap":
        return make_wall_gap()
    if spec == "double_enclosure":
        return make_double_enclosure()
    if spec.startswith("random:"):
        return generate_random_rectangles(int(spec.split(":", 1)[1]))
    if spec.startswith("file:"):
        return load_world(spec.split(":", 1)[1])
    raise ValueError(f"unknown world {spec!r}")


def default_sensor_range(spec: str) -> float:
    kind = spec.split(":", 1)[0]
    return SENSOR_RANGES.get(kind, SENSOR_RANGES["random"])


# ----------------------------------------------------------------------------
# visibility-graph oracle


def oracle_shortest_path(w: GlobalWorld, a: Point2, b: Point2, fully_sensed: bool = True,
                         r: Optional[SensedRegion] = None) -> Optional[Path]:
    """Shortest path over the visibility graph of slightly inflated obstacle corners.

    Returns None when ``b`` is unreachable. Exact for the fully sensed view.
    """
    view = IncrementalView(w, None if fully_sensed else (r or SensedRegion(1.0)))
    e = ORACLE_EPS
    nodes = [tuple(a), tuple(b)]
    for rect in w.obstacles:
        nodes += [
            (rect.xmin - e, rect.ymin - e),
            (rect.xmax + e, rect.ymin - e),
            (rect.xmax + e, rect.ymax + e),
            (rect.xmin - e, rect.ymax + e),
        ]
    pts = np.array(nodes, dtype=float)
    keep = view.states_valid(pts)
    keep[0] = keep[1] = True
    idx = np.nonzero(keep)[0]
    pts = pts[idx]
    n = len(pts)
    iu, ju = np.triu_indices(n, k=1)
    ok = view.motions_valid(pts[iu], pts[ju])
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i, j in zip(iu[ok], ju[ok]):
        d = dist(tuple(pts[i]), tuple(pts[j]))
        adj[i].append((j, d))
        adj[j].append((i, d))
    best = [math.inf] * n
    prev = [-1] * n
    best[0] = 0.0
    heap = [(0.0, 0)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > best[u]:
            continue
        if u == 1:
            break
        for v, c in adj[u]:
            nd = d + c
            if nd < best[v]:
                best[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if math.isinf(best[1]):
        return None
    chain = [1]
    while chain[-1] != 0:
        chain.append(prev[chain[-1]])
    return Path([tuple(pts[k]) for k in reversed(chain)])


def world_is_feasible(w: GlobalWorld) -> bool:
    return oracle_shortest_path(w, w.start, w.goal, fully_sensed=True) is not None
