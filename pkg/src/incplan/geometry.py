"""Exact 2D primitives: points, axis-aligned rectangles, discs and polyline paths.

Obstacles and discs are closed sets, so boundary contact counts as contact.
Points are plain ``(x, y)`` float tuples; the hot loops of the planners touch
them millions of times and tuples are the cheapest thing Python offers.
"""

from __future__ import annotations

import bisect
import math
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple

import numpy as np

Point2 = Tuple[float, float]


class AxisRect(NamedTuple):
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @classmethod
    def from_corners(cls, lo: Point2, hi: Point2) -> "AxisRect":
        if lo[0] > hi[0] or lo[1] > hi[1]:
            raise ValueError(f"rectangle corners out of order: {lo} {hi}")
        return cls(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    @property
    def min(self) -> Point2:
        return (self.xmin, self.ymin)

    @property
    def max(self) -> Point2:
        return (self.xmax, self.ymax)

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def corners(self) -> list[Point2]:
        return [
            (self.xmin, self.ymin),
            (self.xmax, self.ymin),
            (self.xmax, self.ymax),
            (self.xmin, self.ymax),
        ]


class Ball(NamedTuple):
    cx: float
    cy: float
    radius: float

    @property
    def center(self) -> Point2:
        return (self.cx, self.cy)


def dist(a: Point2, b: Point2) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)


def point_in_rect(p: Point2, r: AxisRect) -> bool:
    return r.xmin <= p[0] <= r.xmax and r.ymin <= p[1] <= r.ymax


def point_in_ball(p: Point2, b: Ball) -> bool:
    dx = p[0] - b.cx
    dy = p[1] - b.cy
    return dx * dx + dy * dy <= b.radius * b.radius


def clip_segment_to_rect(a: Point2, b: Point2, r: AxisRect) -> Optional[Tuple[float, float]]:
    """Parameter interval ``[t0, t1]`` of segment ``a + t (b - a)`` inside ``r``, or None.

    Liang-Barsky slab clipping on the closed rectangle.
    """
    t0, t1 = 0.0, 1.0
    for p, d, lo, hi in ((a[0], b[0] - a[0], r.xmin, r.xmax), (a[1], b[1] - a[1], r.ymin, r.ymax)):
        if d == 0.0:
            if p < lo or p > hi:
                return None
            continue
        ta = (lo - p) / d
        tb = (hi - p) / d
        if ta > tb:
            ta, tb = tb, ta
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
        if t0 > t1:
            return None
    return t0, t1


def segment_intersects_rect(a: Point2, b: Point2, r: AxisRect) -> bool:
    return clip_segment_to_rect(a, b, r) is not None


def subsegment_intersects_ball(
    a: Point2, b: Point2, t0: float, t1: float, ball: Ball
) -> bool:
    """Does the piece ``t in [t0, t1]`` of segment ab touch the closed disc?"""
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    dd = dx * dx + dy * dy
    if dd == 0.0:
        t = t0
    else:
        t = ((ball.cx - a[0]) * dx + (ball.cy - a[1]) * dy) / dd
        if t < t0:
            t = t0
        elif t > t1:
            t = t1
    px = a[0] + t * dx - ball.cx
    py = a[1] + t * dy - ball.cy
    return px * px + py * py <= ball.radius * ball.radius


def segment_ball_interval(a: Point2, b: Point2, ball: Ball) -> Optional[Tuple[float, float]]:
    """Parameter interval of segment ab lying inside the closed disc, or None."""
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    fx = a[0] - ball.cx
    fy = a[1] - ball.cy
    qa = dx * dx + dy * dy
    qc = fx * fx + fy * fy - ball.radius * ball.radius
    if qa == 0.0:
        return (0.0, 1.0) if qc <= 0.0 else None
    qb = 2.0 * (fx * dx + fy * dy)
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        return None
    sq = math.sqrt(disc)
    lo = (-qb - sq) / (2.0 * qa)
    hi = (-qb + sq) / (2.0 * qa)
    if hi < 0.0 or lo > 1.0:
        return None
    return max(lo, 0.0), min(hi, 1.0)


def segments_intersect_rects(a: np.ndarray, b: np.ndarray, rects: np.ndarray) -> np.ndarray:
    """Vectorised slab test: ``out[i, j]`` is True iff segment i touches rect j.

    ``a`` and ``b`` are (n, 2) endpoint arrays, ``rects`` is (m, 4) as
    (xmin, ymin, xmax, ymax). Mirrors :func:`clip_segment_to_rect`.
    """
    t0, t1 = clip_segments_to_rects(a, b, rects)
    return t0 <= t1


def clip_segments_to_rects(
    a: np.ndarray, b: np.ndarray, rects: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    rects = np.asarray(rects, dtype=float).reshape(-1, 4)
    n, m = a.shape[0], rects.shape[0]
    t0 = np.zeros((n, m))
    t1 = np.ones((n, m))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for axis in (0, 1):
            p = a[:, axis:axis + 1]
            d = (b[:, axis] - a[:, axis])[:, None]
            lo = rects[None, :, axis]
            hi = rects[None, :, axis + 2]
            flat = d == 0.0
            ta = (lo - p) / d
            tb = (hi - p) / d
            enter = np.minimum(ta, tb)
            leave = np.maximum(ta, tb)
            outside = flat & ((p < lo) | (p > hi))
            enter = np.where(flat, 0.0, enter)
            leave = np.where(flat, 1.0, leave)
            t0 = np.maximum(t0, enter)
            t1 = np.minimum(t1, leave)
            t1 = np.where(outside, -1.0, t1)
    return t0, t1


class Path:
    """Polyline parameterised by normalised arc length over [0, 1]."""

    __slots__ = ("waypoints", "cumulative")

    def __init__(self, waypoints: Iterable[Sequence[float]]):
        pts = [(float(p[0]), float(p[1])) for p in waypoints]
        if not pts:
            raise ValueError("a path needs at least one waypoint")
        self.waypoints: list[Point2] = pts
        cum = [0.0]
        for p, q in zip(pts, pts[1:]):
            cum.append(cum[-1] + dist(p, q))
        self.cumulative: list[float] = cum

    def __len__(self) -> int:
        return len(self.waypoints)

    def __repr__(self) -> str:
        return f"Path({len(self.waypoints)} waypoints, length={self.length:.6g})"

    @property
    def length(self) -> float:
        return self.cumulative[-1]

    @property
    def start(self) -> Point2:
        return self.waypoints[0]

    @property
    def end(self) -> Point2:
        return self.waypoints[-1]

    def segments(self):
        return zip(self.waypoints, self.waypoints[1:])

    def locate(self, s: float) -> Tuple[int, float]:
        """Segment index and local parameter for normalised arc length ``s``."""
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"path parameter {s} outside [0, 1]")
        total = self.length
        if len(self.waypoints) == 1 or total == 0.0:
            return 0, 0.0
        if s == 1.0:
            return len(self.waypoints) - 2, 1.0
        target = s * total
        i = bisect.bisect_right(self.cumulative, target) - 1
        i = min(max(i, 0), len(self.waypoints) - 2)
        seg = self.cumulative[i + 1] - self.cumulative[i]
        while seg == 0.0 and i < len(self.waypoints) - 2:
            i += 1
            seg = self.cumulative[i + 1] - self.cumulative[i]
        local = 0.0 if seg == 0.0 else (target - self.cumulative[i]) / seg
        return i, min(max(local, 0.0), 1.0)

    def point_at(self, i: int, t: float) -> Point2:
        if len(self.waypoints) == 1:
            return self.waypoints[0]
        if t == 1.0:
            return self.waypoints[i + 1]
        a, b = self.waypoints[i], self.waypoints[i + 1]
        return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))

    def interpolate(self, s: float) -> Point2:
        i, t = self.locate(s)
        return self.point_at(i, t)

    def parameter_of(self, i: int, t: float) -> float:
        """Inverse of :meth:`locate`."""
        total = self.length
        if total == 0.0 or len(self.waypoints) == 1:
            return 1.0
        seg = self.cumulative[i + 1] - self.cumulative[i]
        return min((self.cumulative[i] + t * seg) / total, 1.0)

    def truncate(self, i: int, t: float) -> "Path":
        """Prefix of the path ending at local parameter ``t`` of segment ``i``."""
        if len(self.waypoints) == 1:
            return Path(self.waypoints)
        pts = self.waypoints[: i + 1]
        end = self.point_at(i, t)
        if t > 0.0:
            pts = pts + [end]
        return Path(pts)

    def subpath(self, s: float) -> "Path":
        """The traversed prefix ``p([0, s])``."""
        i, t = self.locate(s)
        return self.truncate(i, t)

    def concat(self, other: "Path") -> "Path":
        tail = other.waypoints
        if tail and self.waypoints[-1] == tail[0]:
            tail = tail[1:]
        return Path(self.waypoints + tail)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.waypoints, dtype=float)


def path_length(p: Path) -> float:
    return p.length


def interpolate(p: Path, s: float) -> Point2:
    return p.interpolate(s)
