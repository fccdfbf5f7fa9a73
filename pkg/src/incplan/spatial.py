"""Incremental nearest-neighbour index over planner vertices.

Points land in a brute-force buffer; once the buffer outgrows a fraction of
the indexed set, everything is rebuilt into a static k-d tree
(``scipy.spatial.cKDTree``). Queries merge tree and buffer candidates and order
them by squared distance, then vertex id, so results match a linear scan
exactly.
"""

from __future__ import annotations

import math
from typing import Hashable

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Point2

_MIN_TREE = 256


class PointIndex:
    def __init__(self):
        self._pts = np.empty((64, 2))
        self._ids = np.empty(64, dtype=np.int64)
        self._n = 0
        self._tree = None
        self._tree_n = 0  # points [0, _tree_n) are in the tree
        self._known: set = set()

    def __len__(self) -> int:
        return self._n

    def insert(self, p: Point2, vid: int) -> None:
        if vid in self._known:
            raise KeyError(f"duplicate vertex id {vid}")
        self._known.add(vid)
        if self._n == len(self._ids):
            self._pts = np.concatenate([self._pts, np.empty_like(self._pts)])
            self._ids = np.concatenate([self._ids, np.empty_like(self._ids)])
        self._pts[self._n] = p
        self._ids[self._n] = vid
        self._n += 1
        buffered = self._n - self._tree_n
        if self._n >= _MIN_TREE and buffered > max(_MIN_TREE // 2, self._tree_n // 4):
            self._tree = cKDTree(self._pts[: self._n].copy())
            self._tree_n = self._n

    def _finish(self, rows: np.ndarray, d2: np.ndarray, limit: int | None):
        ids = self._ids[rows]
        order = np.lexsort((ids, d2))
        if limit is not None:
            order = order[:limit]
        pts = self._pts[rows[order]]
        return [((float(x), float(y)), int(i)) for (x, y), i in zip(pts, ids[order])]

    def _d2(self, rows: np.ndarray, q: Point2) -> np.ndarray:
        dx = self._pts[rows, 0] - q[0]
        dy = self._pts[rows, 1] - q[1]
        return dx * dx + dy * dy

    def k_nearest(self, q: Point2, k: int) -> list[tuple[Point2, int]]:
        """``min(k, len)`` entries by nondecreasing distance, ties by id."""
        if k < 1:
            raise ValueError("k must be at least 1")
        n = self._n
        if n == 0:
            return []
        buf = np.arange(self._tree_n, n)
        if self._tree is None:
            rows = buf
        else:
            kk = min(k, self._tree_n)
            dd, ii = self._tree.query(q, k=kk)
            ii = np.atleast_1d(ii)
            dd = np.atleast_1d(dd)
            rows = np.concatenate([ii, buf])
            d2 = self._d2(rows, q)
            if len(rows) > k:
                cut = np.partition(d2, k - 1)[k - 1]
            else:
                cut = d2.max()
            # the tree may hide equal-distance points beyond its k-th answer
            if kk == k and dd[-1] * dd[-1] <= cut * (1 + 1e-9) + 1e-300:
                extra = self._tree.query_ball_point(q, math.sqrt(cut) * (1 + 1e-9) + 1e-300)
                rows = np.unique(np.concatenate([np.asarray(extra, dtype=np.int64), buf, ii]))
        d2 = self._d2(rows, q)
        return self._finish(rows, d2, k)

    def nearest(self, q: Point2) -> tuple[Point2, int] | None:
        res = self.k_nearest(q, 1)
        return res[0] if res else None

    def within_radius(self, q: Point2, r: float) -> list[tuple[Point2, int]]:
        """Entries with squared distance at most ``r * r``, nearest first."""
        if r < 0:
            raise ValueError("radius must be nonnegative")
        n = self._n
        buf = np.arange(self._tree_n, n)
        if self._tree is None:
            rows = buf
        else:
            got = self._tree.query_ball_point(q, r * (1 + 1e-9) + 1e-300)
            rows = np.concatenate([np.asarray(got, dtype=np.int64), buf])
        d2 = self._d2(rows, q)
        keep = d2 <= r * r
        return self._finish(rows[keep], d2[keep], None)

    def points(self) -> np.ndarray:
        return self._pts[: self._n]

    def ids(self) -> np.ndarray:
        return self._ids[: self._n]


def k_nearest(idx: PointIndex, q: Point2, k: int):
    return idx.k_nearest(q, k)


def within_radius(idx: PointIndex, q: Point2, r: float):
    return idx.within_radius(q, r)


def insert(idx: PointIndex, p: Point2, vid: Hashable) -> None:
    idx.insert(p, vid)
