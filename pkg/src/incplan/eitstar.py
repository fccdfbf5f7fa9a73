"""An EIT*-style asymmetric, batch-informed, almost-surely asymptotically optimal planner.

Each batch of samples defines an implicit k-nearest graph (plus the direct
start-goal edge). A lazy reverse search from the goal computes admissible
cost-to-go and effort-to-go labels while checking edges only at their
midpoint; the forward search from the start then expands edges in
cost order, validating each one fully. When the forward search finds that an
edge the reverse search relied on is blocked, the reverse labels are repaired
with the effort terms inflated by the repair factor.

This is not a line-by-line port of the published EIT*; it keeps its
structure (asymmetric lazy reverse / validating forward search, informed
batches, k-nearest pruning) and its guarantees.
"""

from __future__ import annotations

import heapq
import math
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .geometry import AxisRect, Path, Point2, dist
from .planning import AnytimeRecorder, BudgetClock, PlanQuery, PlanResult, make_rng, rgg_k
from .world import IncrementalView

INF = math.inf
_KEY = 1 << 32


class InformedSet:
    """States whose summed distance to start and goal is at most ``cost``."""

    def __init__(self, start: Point2, goal: Point2, cost: float = INF):
        self.start = start
        self.goal = goal
        self.cost = cost
        self.d_min = dist(start, goal)
        if cost < self.d_min:
            raise ValueError("informed cost below the start-goal distance")

    def contains(self, p: Point2) -> bool:
        return dist(p, self.start) + dist(p, self.goal) <= self.cost

    def area(self) -> float:
        if math.isinf(self.cost):
            return INF
        a = self.cost / 2
        b = math.sqrt(max(self.cost ** 2 - self.d_min ** 2, 0.0)) / 2
        return math.pi * a * b

    def _ellipse_draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        a = self.cost / 2
        b = math.sqrt(max(self.cost ** 2 - self.d_min ** 2, 0.0)) / 2
        r = np.sqrt(rng.random(n))
        th = rng.random(n) * 2 * math.pi
        u = r * np.cos(th) * a
        v = r * np.sin(th) * b
        dx = self.goal[0] - self.start[0]
        dy = self.goal[1] - self.start[1]
        if self.d_min > 0:
            cx, sx = dx / self.d_min, dy / self.d_min
        else:
            cx, sx = 1.0, 0.0
        mx = (self.start[0] + self.goal[0]) / 2
        my = (self.start[1] + self.goal[1]) / 2
        return np.column_stack([mx + cx * u - sx * v, my + sx * u + cx * v])

    def draw(self, rng: np.random.Generator, n: int, bounds: AxisRect) -> np.ndarray:
        """``n`` candidate draws, each uniform over the set intersected with the bounds.

        Rejected draws are dropped, so fewer than ``n`` rows may come back.
        """
        box_area = (bounds.xmax - bounds.xmin) * (bounds.ymax - bounds.ymin)
        if math.isinf(self.cost) or self.area() >= box_area:
            u = rng.random((n, 2))
            pts = np.column_stack([bounds.xmin + u[:, 0] * (bounds.xmax - bounds.xmin),
                                   bounds.ymin + u[:, 1] * (bounds.ymax - bounds.ymin)])
            if math.isinf(self.cost):
                return pts
            keep = _focal_sum(pts, self.start, self.goal) <= self.cost
            return pts[keep]
        pts = self._ellipse_draw(rng, n)
        keep = ((pts[:, 0] >= bounds.xmin) & (pts[:, 0] <= bounds.xmax)
                & (pts[:, 1] >= bounds.ymin) & (pts[:, 1] <= bounds.ymax))
        return pts[keep]


def _focal_sum(pts: np.ndarray, a: Point2, b: Point2) -> np.ndarray:
    return (np.sqrt((pts[:, 0] - a[0]) ** 2 + (pts[:, 1] - a[1]) ** 2)
            + np.sqrt((pts[:, 0] - b[0]) ** 2 + (pts[:, 1] - b[1]) ** 2))


def sample_informed(rng: np.random.Generator, s: InformedSet, bounds: AxisRect,
                    max_tries: int = 100_000) -> Point2:
    """One uniform sample from ``s`` intersected with ``bounds``."""
    for _ in range(max_tries):
        pts = s.draw(rng, 1, bounds)
        if len(pts):
            return (float(pts[0, 0]), float(pts[0, 1]))
    raise RuntimeError("informed set does not meet the bounds")


class BatchGraph:
    """Samples, the implicit k-nearest graph over them and the reverse-search labels."""

    def __init__(self, start: Point2, goal: Point2, view: IncrementalView,
                 radius_factor: float = 1.001):
        self.view = view
        self.radius_factor = radius_factor
        self.pts = np.array([start, goal], dtype=float)
        self.pruned = np.zeros(2, dtype=bool)
        # edge verdicts keyed by lo_id * _KEY + hi_id over global sample ids
        self.valid: set[int] = set()
        self.invalid: set[int] = set()
        self.k = 1
        self.live = np.array([0, 1])
        self.pairs = np.zeros((0, 2), dtype=np.int64)  # local endpoint indices
        self.lengths = np.zeros(0)
        self.active = np.zeros(0, dtype=bool)
        self.h = np.full(2, INF)
        self.effort = np.full(2, INF)
        self.pred = np.full(2, -9999)
        self.repairs = 0

    # -- samples and pruning ---------------------------------------------

    start_local = 0
    goal_local = 1

    def add_samples(self, pts: np.ndarray) -> None:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        self.pts = np.vstack([self.pts, pts])
        self.pruned = np.concatenate([self.pruned, np.zeros(len(pts), dtype=bool)])

    def prune(self, best_cost: float) -> int:
        """Mark samples outside the informed set of ``best_cost``; returns how many."""
        if math.isinf(best_cost):
            return 0
        out = _focal_sum(self.pts, tuple(self.pts[0]), tuple(self.pts[1])) > best_cost
        out[:2] = False
        fresh = out & ~self.pruned
        self.pruned |= fresh
        return int(fresh.sum())

    def unpruned(self) -> np.ndarray:
        return np.nonzero(~self.pruned)[0]

    # -- graph construction ----------------------------------------------

    def rebuild(self) -> None:
        """Recompute the k-nearest relation over unpruned samples and sparse-check it."""
        live = self.unpruned()
        self.live = live
        n = len(live)
        P = self.pts[live]
        self.k = rgg_k(n, self.radius_factor)
        kq = min(self.k + 1, n)
        _, idx = cKDTree(P).query(P, k=kq)
        idx = np.asarray(idx).reshape(n, kq)
        src = np.repeat(np.arange(n), kq)
        dst = idx.ravel()
        m = src != dst
        a, b = np.minimum(src[m], dst[m]), np.maximum(src[m], dst[m])
        # start and goal are global ids 0 and 1 and never pruned, so locally 0 and 1 too
        codes = np.unique(np.concatenate([a * n + b, [1]]))
        pairs = np.column_stack([codes // n, codes % n])
        gp = live[pairs]
        keys = gp[:, 0] * _KEY + gp[:, 1]
        known_bad = np.isin(keys, np.fromiter(self.invalid, dtype=np.int64, count=len(self.invalid)))
        known_ok = np.isin(keys, np.fromiter(self.valid, dtype=np.int64, count=len(self.valid)))
        mids = (P[pairs[:, 0]] + P[pairs[:, 1]]) / 2
        sparse_ok = np.ones(len(pairs), dtype=bool)
        unchecked = ~known_ok & ~known_bad
        if unchecked.any():
            sparse_ok[unchecked] = self.view.states_valid(mids[unchecked])
        self.invalid.update(keys[unchecked & ~sparse_ok].tolist())
        keep = ~known_bad & sparse_ok
        self.pairs = pairs[keep]
        self.keys = keys[keep].tolist()
        d = P[self.pairs[:, 0]] - P[self.pairs[:, 1]]
        self.lengths = np.sqrt((d * d).sum(axis=1))
        self.checked = known_ok[keep]
        self.active = np.ones(len(self.pairs), dtype=bool)
        # both directions of every edge, grouped by tail vertex (CSR layout)
        m2 = len(self.pairs)
        tails = np.concatenate([self.pairs[:, 0], self.pairs[:, 1]])
        heads = np.concatenate([self.pairs[:, 1], self.pairs[:, 0]])
        eids = np.concatenate([np.arange(m2), np.arange(m2)])
        order = np.argsort(tails, kind="stable")
        self.indptr = np.concatenate([[0], np.cumsum(np.bincount(tails, minlength=n))])
        self.heads = heads[order]
        self.slot_edge = eids[order]
        self._weights = self.lengths[self.slot_edge].copy()
        slot_pos = np.empty(2 * m2, dtype=np.int64)
        slot_pos[order] = np.arange(2 * m2)
        self.edge_slots = slot_pos.reshape(2, m2).T  # the two CSR slots of each edge
        self._ip = self.indptr.tolist()
        self._hl = self.heads.tolist()
        self._el = self.slot_edge.tolist()
        self.P = P

    def remove_edge(self, e: int) -> None:
        self.active[e] = False
        self._weights[self.edge_slots[e]] = INF
        self.invalid.add(self.keys[e])

    def mark_valid(self, e: int) -> None:
        self.checked[e] = True
        self.valid.add(self.keys[e])

    def neighbours(self, u: int):
        lo, hi = self._ip[u], self._ip[u + 1]
        return zip(self._hl[lo:hi], self._el[lo:hi])

    # -- reverse search ----------------------------------------------------

    def reverse_heuristic_update(self, inflation: float = 1.0) -> None:
        """Cost-to-go and effort-to-go from the goal over the optimistic graph.

        Edge costs are Euclidean; edges that failed a check are left out.
        Effort counts full-resolution checks still owed on the way to the goal;
        ``inflation`` scales that count (repairs pass the repair factor).
        """
        n = len(self.live)
        on = self.active
        graph = csr_matrix((self._weights, self.heads, self.indptr), shape=(n, n))
        h, pred = dijkstra(graph, directed=True, indices=self.goal_local, return_predecessors=True)
        self.h = h
        self.pred = pred
        n_idx = np.arange(n)
        reached = (pred >= 0)
        owed = np.zeros(n)
        pv = pred[reached]
        d = self.P[n_idx[reached]] - self.P[pv]
        owed[reached] = np.sqrt((d * d).sum(axis=1)) / self.view.resolution
        for e in np.nonzero(self.checked & on)[0]:
            u, v = self.pairs[e]
            if pred[u] == v:
                owed[u] = 0.0
            elif pred[v] == u:
                owed[v] = 0.0
        effort = [INF] * n
        effort[self.goal_local] = 0.0
        pl = pred.tolist()
        ow = (owed * inflation).tolist()
        for v in np.argsort(h, kind="stable").tolist():
            p = pl[v]
            if p < 0:
                continue
            effort[v] = effort[p] + ow[v]
        effort = np.array(effort)
        self.effort = effort

    def uses_edge(self, u: int, w: int) -> bool:
        return self.pred[u] == w or self.pred[w] == u


def prune(g: BatchGraph, best_cost: float) -> int:
    return g.prune(best_cost)


def reverse_heuristic_update(g: BatchGraph, inflation: float = 1.0) -> None:
    g.reverse_heuristic_update(inflation)


class EITStar:
    name = "eitstar"

    def __init__(self, batch_size: int = 100, radius_factor: float = 1.001,
                 repair_factor: float = 1.2, max_draw_factor: int = 50):
        self.batch_size = batch_size
        self.radius_factor = radius_factor
        self.repair_factor = repair_factor
        self.max_draw_factor = max_draw_factor
        self.graph: Optional[BatchGraph] = None

    def _draw_batch(self, rng, informed: InformedSet, view: IncrementalView, m: int) -> np.ndarray:
        got = []
        have = 0
        draws = 0
        limit = self.max_draw_factor * m
        while have < m and draws < limit:
            want = max(m - have, 8)
            cand = informed.draw(rng, want, view.bounds)
            draws += want
            if len(cand):
                cand = cand[view.states_valid(cand)]
                got.append(cand)
                have += len(cand)
        if not got:
            return np.zeros((0, 2))
        return np.vstack(got)[:m]

    def plan(self, q: PlanQuery) -> PlanResult:
        q.validate()
        clock = q.budget.clock()
        rng = make_rng(q.seed)
        rec = AnytimeRecorder(clock)
        view = q.view
        start, goal = q.start, q.goal
        if start == goal:
            rec.offer(Path([start]))
            return rec.result(early_exit=True)
        graph = BatchGraph(start, goal, view, self.radius_factor)
        self.graph = graph
        direct = dist(start, goal)
        early = False
        first = True
        while True:
            if first:
                first = False
            else:
                remaining = clock.remaining_iterations()
                if clock.exhausted() or remaining == 0:
                    break
                m = self.batch_size if remaining is None else min(self.batch_size, remaining)
                informed = InformedSet(start, goal, max(rec.best_cost, direct))
                batch = self._draw_batch(rng, informed, view, m)
                clock.tick(m)
                graph.add_samples(batch)
                graph.prune(rec.best_cost)
            graph.rebuild()
            graph.reverse_heuristic_update()
            if clock.budget.mode == "time" and clock.exhausted():
                break
            if not math.isinf(graph.h[graph.start_local]):
                self._forward_search(graph, rec, clock)
            if rec.best_path is not None and rec.best_cost <= direct * (1 + 1e-12):
                early = True
                break
            if clock.budget.mode == "time" and clock.exhausted():
                break
        return rec.result(early_exit=early)

    def _forward_search(self, graph: BatchGraph, rec: AnytimeRecorder, clock: BudgetClock) -> None:
        view = graph.view
        P = graph.P
        pts = [tuple(p) for p in P.tolist()]
        s, goal = graph.start_local, graph.goal_local
        g = {s: 0.0}
        parent = {s: -1}
        heap: list = []
        lengths = graph.lengths
        res = view.resolution
        timed = clock.budget.mode == "time"
        solved = rec.best_path is not None
        best = rec.best_cost

        def edge_effort(e: int) -> float:
            return 0.0 if graph.checked[e] else lengths[e] / res

        def key(u: int, w: int, e: int):
            f = g[u] + lengths[e] + graph.h[w]
            if solved:
                return (f, edge_effort(e) + graph.effort[w])
            return (edge_effort(e) + graph.effort[w], f)

        def expand(u: int) -> None:
            for w, e in graph.neighbours(u):
                if w == parent.get(u) or not graph.active[e] or math.isinf(graph.h[w]):
                    continue
                heapq.heappush(heap, (key(u, w, e), u, w, e))

        expand(s)
        while heap:
            if timed and clock.exhausted():
                return
            k, u, w, e = heapq.heappop(heap)
            if not graph.active[e] or math.isinf(graph.h[w]):
                continue
            now = key(u, w, e)
            if now > k:
                heapq.heappush(heap, (now, u, w, e))
                continue
            f = now[0] if solved else now[1]
            if solved and f >= best:
                return
            gw = g[u] + lengths[e]
            if gw >= g.get(w, INF):
                continue
            if not graph.checked[e]:
                if view.is_motion_valid(pts[u], pts[w]):
                    graph.mark_valid(e)
                else:
                    graph.remove_edge(e)
                    if graph.uses_edge(u, w):
                        graph.repairs += 1
                        graph.reverse_heuristic_update(self.repair_factor)
                    continue
            g[w] = gw
            parent[w] = u
            if w == goal:
                chain = [w]
                while chain[-1] != s:
                    chain.append(parent[chain[-1]])
                path = Path([pts[v] for v in reversed(chain)])
                rec.offer(path)
                best = min(best, gw)
                if not solved:
                    solved = True
                    heap = [(key(a, b, c), a, b, c) for _, a, b, c in heap
                            if a in g and graph.active[c]]
                    heapq.heapify(heap)
                continue
            expand(w)
