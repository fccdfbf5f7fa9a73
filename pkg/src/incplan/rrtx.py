"""RRT^X: a goal-rooted tree that survives between queries and repairs itself.

Follows Otte & Frazzoli's RRT^X with epsilon = 0 and no informed sampling.
Deviations from the published algorithm:

* neighbourhoods are the k nearest vertices (RRT* k formula, factor 1.0)
  capped at the maximum edge length, and are symmetric, so there is no
  separate original/running neighbour bookkeeping and no culling;
* the inconsistency queue is drained completely after every insertion and
  repair, so ``g == lmc`` holds at every vertex whenever control returns;
* the robot is re-anchored each query by inserting its state as a vertex
  (kept even before it finds a parent) instead of re-rooting anything.
"""

from __future__ import annotations

import heapq
import math
import time
from typing import Optional

import numpy as np

from .geometry import Path, Point2, clip_segments_to_rects, dist
from .planning import (
    GOAL_BIAS,
    MAX_EDGE,
    AnytimeRecorder,
    PlanQuery,
    PlanResult,
    make_rng,
    rgg_k,
    sample_state,
    steer,
)
from .spatial import PointIndex
from .world import IncrementalView

INF = math.inf


class RrtxState:
    def __init__(self, goal: Point2, max_edge: float = MAX_EDGE, rewire_factor: float = 1.0,
                 goal_bias: float = GOAL_BIAS, epsilon: float = 0.0):
        self.max_edge = max_edge
        self.rewire_factor = rewire_factor
        self.goal_bias = goal_bias
        self.epsilon = epsilon
        self.goal = goal
        self.pts: list[Point2] = []
        self.g: list[float] = []
        self.lmc: list[float] = []
        self.parent: list[int] = []
        self.children: list[set[int]] = []
        self.nbrs: list[dict[int, float]] = []  # neighbour -> edge length
        self.alive: list[bool] = []
        self.index = PointIndex()
        self._heap: list = []
        self._queued: dict[int, int] = {}
        self._stamp = 0
        self.orphans: set[int] = set()
        self.robot: Optional[int] = None
        self.robot_pt: Optional[Point2] = None
        self.sensed_count = 0
        self.last_invalidated: list[tuple[int, int]] = []
        self.detection_times: list[float] = []
        root = self._new_vertex(goal)
        self.g[root] = self.lmc[root] = 0.0

    # -- bookkeeping -----------------------------------------------------

    def __len__(self) -> int:
        return len(self.pts)

    def _new_vertex(self, p: Point2) -> int:
        v = len(self.pts)
        self.pts.append(p)
        self.g.append(INF)
        self.lmc.append(INF)
        self.parent.append(-1)
        self.children.append(set())
        self.nbrs.append({})
        self.alive.append(True)
        self.index.insert(p, v)
        return v

    def edges(self) -> set[tuple[int, int]]:
        return {(u, w) for u in range(len(self.pts)) for w in self.nbrs[u] if u < w}

    def _key(self, v: int) -> tuple[float, int]:
        h = 0.0 if self.robot_pt is None else dist(self.pts[v], self.robot_pt)
        return (min(self.g[v], self.lmc[v]) + h, v)

    def _verrify_queue(self, v: int) -> None:
        self._stamp += 1
        self._queued[v] = self._stamp
        heapq.heappush(self._heap, (self._key(v), self._stamp, v))

    def _dequeue(self, v: int) -> None:
        self._queued.pop(v, None)

    def _pop(self) -> Optional[int]:
        while self._heap:
            _, stamp, v = heapq.heappop(self._heap)
            if self._queued.get(v) == stamp:
                del self._queued[v]
                return v
        return None

    def _rekey(self) -> None:
        self._heap = [(self._key(v), s, v) for v, s in self._queued.items()]
        heapq.heapify(self._heap)

    def _make_parent(self, p: int, v: int) -> None:
        old = self.parent[v]
        if old >= 0:
            self.children[old].discard(v)
        self.parent[v] = p
        self.children[p].add(v)

    # -- the RRT^X procedures ----------------------------------------------

    def _update_lmc(self, v: int) -> None:
        if v == 0:
            return
        best, bp = INF, -1
        lmc = self.lmc
        for u, d in self.nbrs[v].items():
            if self.parent[u] == v or u in self.orphans:
                continue
            c = d + lmc[u]
            if c < best or (c == best and u < bp):
                best, bp = c, u
        if bp >= 0:
            self._make_parent(bp, v)
            self.lmc[v] = best

    def _rewire_neighbours(self, v: int) -> None:
        if not self.g[v] - self.lmc[v] > self.epsilon:
            return
        lv, eps = self.lmc[v], self.epsilon
        pv = self.parent[v]
        for u, d in self.nbrs[v].items():
            if u == pv or u == 0:
                continue
            c = d + lv
            if self.lmc[u] > c:
                self.lmc[u] = c
                self._make_parent(v, u)
                if self.g[u] - self.lmc[u] > eps:
                    self._verrify_queue(u)

    def reduce_inconsistency(self) -> None:
        """Drain the queue; afterwards ``g == lmc`` everywhere."""
        while True:
            v = self._pop()
            if v is None:
                return
            if self.g[v] - self.lmc[v] > self.epsilon:
                self._update_lmc(v)
                self._rewire_neighbours(v)
            self.g[v] = self.lmc[v]

    def propagate_descendants(self) -> None:
        if not self.orphans:
            return
        cut = set(self.orphans)
        stack = list(self.orphans)
        while stack:
            v = stack.pop()
            for c in self.children[v]:
                if c not in cut:
                    cut.add(c)
                    stack.append(c)
        for v in sorted(cut):
            for u in sorted(self.nbrs[v].keys() | {self.parent[v]}):
                if u >= 0 and u not in cut:
                    self.g[u] = INF
                    self._verrify_queue(u)
        for v in sorted(cut):
            self._dequeue(v)
            if self.parent[v] >= 0:
                self.children[self.parent[v]].discard(v)
            self.parent[v] = -1
            self.children[v] = set()
            self.g[v] = self.lmc[v] = INF
        self.orphans.clear()

    # -- graph growth --------------------------------------------------------

    def _near(self, p: Point2) -> list[tuple[int, float]]:
        k = rgg_k(len(self.pts) + 1, self.rewire_factor)
        out = []
        for pt, u in self.index.k_nearest(p, k):
            if not self.alive[u] or pt == p:
                continue
            d = dist(pt, p)
            if d <= self.max_edge:
                out.append((u, d))
        return out

    def _nearest_alive(self, p: Point2, skip: Optional[int] = None) -> Optional[int]:
        k = 4
        while True:
            found = self.index.k_nearest(p, k)
            for _, u in found:
                if self.alive[u] and u != skip:
                    return u
            if len(found) < k:
                return None
            k *= 4

    def _link(self, p: Point2, view: IncrementalView, keep_orphan: bool) -> Optional[int]:
        """Insert ``p`` with all collision-free neighbour edges; parent by lowest lmc."""
        cands = [(u, d) for u, d in self._near(p) if view.is_motion_valid(p, self.pts[u])]
        best, bp = INF, -1
        for u, d in cands:
            c = d + self.lmc[u]
            if c < best:
                best, bp = c, u
        if bp < 0 and not keep_orphan:
            return None
        v = self._new_vertex(p)
        for u, d in cands:
            self.nbrs[v][u] = d
            self.nbrs[u][v] = d
        if bp >= 0:
            self._make_parent(bp, v)
            self.lmc[v] = best
            self._verrify_queue(v)
        return v

    def anchor_robot(self, x: Point2, view: IncrementalView) -> int:
        if self.robot is not None and self.robot_pt == x:
            return self.robot
        self.robot_pt = x
        near = self.index.nearest(x)
        if near is not None and near[0] == x and self.alive[near[1]]:
            self.robot = near[1]
        else:
            self.robot = self._link(x, view, keep_orphan=True)
        self._rekey()
        return self.robot

    def robot_path(self) -> Optional[Path]:
        v = self.robot
        if v is None or math.isinf(self.lmc[v]):
            return None
        pts = []
        seen = 0
        while v >= 0:
            pts.append(self.pts[v])
            v = self.parent[v]
            seen += 1
            if seen > len(self.pts):
                raise RuntimeError("cycle in RRT^X tree")
        return Path(pts)

    # -- obstacle changes ------------------------------------------------------

    def _edges_near(self, pieces) -> tuple[list[tuple[int, int]], list[int]]:
        """Edges and vertices that could touch one of the (rect, disc) pieces.

        A conservative vectorised screen (slab test on a slightly grown
        rectangle, then segment-to-centre distance against a slightly grown
        disc); survivors get the exact check from the caller.
        """
        if not pieces:
            return [], []
        cset: set[int] = set()
        for r, b in pieces:
            for _, u in self.index.within_radius(b.center, b.radius + self.max_edge):
                cset.add(u)
        verts = sorted(u for u in cset if self.alive[u])
        pairs = sorted({(u, w) if u < w else (w, u) for u in verts for w in self.nbrs[u]})
        if not pairs:
            return [], verts
        P = np.asarray(self.pts)
        idx = np.asarray(pairs)
        A, B = P[idx[:, 0]], P[idx[:, 1]]
        D = B - A
        dd = np.maximum((D * D).sum(axis=1), 1e-300)
        hit = np.zeros(len(pairs), dtype=bool)
        pad = 1e-9
        for r, b in pieces:
            grown = np.array([[r.xmin - pad, r.ymin - pad, r.xmax + pad, r.ymax + pad]])
            t0, t1 = clip_segments_to_rects(A, B, grown)
            near = (t0[:, 0] <= t1[:, 0])
            t = np.clip(((b.cx - A[:, 0]) * D[:, 0] + (b.cy - A[:, 1]) * D[:, 1]) / dd, 0.0, 1.0)
            px = A[:, 0] + t * D[:, 0] - b.cx
            py = A[:, 1] + t * D[:, 1] - b.cy
            near &= px * px + py * py <= (b.radius + pad) ** 2
            hit |= near
        return [pairs[i] for i in np.nonzero(hit)[0]], verts

    def notify_changes(self, view: IncrementalView) -> int:
        """Sever every neighbour edge the new view invalidates; orphan cut-off vertices.

        Every edge in the graph was valid before this call, and the view only
        gains obstacle pieces (obstacle rectangles cut by newly added discs),
        so only edges that can reach a new piece are examined. That finds
        exactly the edges a full sweep would. Runs outside any
        planning budget; its wall time is logged in ``detection_times``.
        """
        t0 = time.perf_counter()
        region = view.region
        if region is None:
            edges = sorted(self.edges())
            verts = range(len(self.pts))
        else:
            fresh = region.balls[self.sensed_count:]
            self.sensed_count = len(region.balls)
            pieces = [(r, b) for b in fresh for r in view.world.obstacles if _rect_touches(r, b)]
            edges, verts = self._edges_near(pieces)
        bad: set[tuple[int, int]] = set()
        for u in verts:
            if self.alive[u] and not view.is_state_valid(self.pts[u]):
                self.alive[u] = False
        for u, w in edges:
            if not view.is_motion_valid(self.pts[u], self.pts[w]):
                bad.add((u, w))
        for u, w in sorted(bad):
            del self.nbrs[u][w]
            del self.nbrs[w][u]
            if self.parent[u] == w:
                self.orphans.add(u)
                self._dequeue(u)
            if self.parent[w] == u:
                self.orphans.add(w)
                self._dequeue(w)
        self.last_invalidated = sorted(bad)
        self.detection_times.append(time.perf_counter() - t0)
        return len(bad)


def _rect_touches(r, b) -> bool:
    """Does the closed rectangle meet the closed disc?"""
    nx = min(max(b.cx, r.xmin), r.xmax)
    ny = min(max(b.cy, r.ymin), r.ymax)
    return (nx - b.cx) ** 2 + (ny - b.cy) ** 2 <= b.radius * b.radius


def rrtx_notify_changes(state: RrtxState, view: IncrementalView) -> int:
    return state.notify_changes(view)


class RRTX:
    """Planner front-end; owns one :class:`RrtxState` for a whole trial."""

    def __init__(self, initial_only: bool = False, max_edge: float = MAX_EDGE,
                 rewire_factor: float = 1.0, goal_bias: float = GOAL_BIAS):
        self.initial_only = initial_only
        self.max_edge = max_edge
        self.rewire_factor = rewire_factor
        self.goal_bias = goal_bias
        self.state: Optional[RrtxState] = None

    @property
    def name(self) -> str:
        return "rrtx_initial" if self.initial_only else "rrtx"

    def notify_changes(self, view: IncrementalView) -> int:
        if self.state is None:
            return 0
        return self.state.notify_changes(view)

    def plan(self, q: PlanQuery) -> PlanResult:
        q.validate()
        if self.state is None or self.state.goal != q.goal:
            self.state = RrtxState(q.goal, self.max_edge, self.rewire_factor, self.goal_bias)
        return rrtx_plan(self.state, q, "initial_only" if self.initial_only else "full")


def rrtx_plan(state: RrtxState, q: PlanQuery, mode: str = "full") -> PlanResult:
    if mode not in ("full", "initial_only"):
        raise ValueError(f"unknown RRT^X mode {mode!r}")
    clock = q.budget.clock()
    rng = make_rng(q.seed)
    rec = AnytimeRecorder(clock)
    view = q.view
    robot = state.anchor_robot(q.start, view)
    state.propagate_descendants()
    state.reduce_inconsistency()
    path = state.robot_path()
    if path is not None:
        rec.offer(path)
        if mode == "initial_only":
            return rec.result()
    while not clock.exhausted():
        clock.tick()
        x = sample_state(rng, view, state.robot_pt, state.goal_bias)
        skip = robot if x == state.robot_pt else None
        u = state._nearest_alive(x, skip=skip)
        if u is None:
            continue
        new = steer(state.pts[u], x, state.max_edge)
        if new == state.pts[u] or not view.is_state_valid(new):
            continue
        v = state._link(new, view, keep_orphan=False)
        if v is None:
            continue
        state.reduce_inconsistency()
        if state.lmc[robot] < rec.best_cost:
            path = state.robot_path()
            rec.offer(path)
            if mode == "initial_only":
                break
    return rec.result()
