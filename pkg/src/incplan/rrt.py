"""RRT-Connect (with optional random shortcutting) and RRT*."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .geometry import Path, Point2, dist
from .planning import (
    GOAL_BIAS,
    MAX_EDGE,
    AnytimeRecorder,
    Budget,
    BudgetClock,
    PlanQuery,
    PlanResult,
    make_rng,
    rgg_k,
    sample_state,
    steer,
    uniform_state,
)
from .spatial import PointIndex
from .world import IncrementalView


class Tree:
    """Rooted tree with cost-to-come and a nearest-neighbour index."""

    def __init__(self, root: Point2):
        self.pts: list[Point2] = []
        self.parent: list[int] = []
        self.cost: list[float] = []
        self.children: list[list[int]] = []
        self.index = PointIndex()
        self.add(root, -1)

    def __len__(self) -> int:
        return len(self.pts)

    def add(self, p: Point2, parent: int) -> int:
        vid = len(self.pts)
        self.pts.append(p)
        self.parent.append(parent)
        self.cost.append(0.0 if parent < 0 else self.cost[parent] + dist(self.pts[parent], p))
        self.children.append([])
        if parent >= 0:
            self.children[parent].append(vid)
        self.index.insert(p, vid)
        return vid

    def nearest(self, p: Point2) -> tuple[Point2, int]:
        return self.index.nearest(p)

    def branch(self, vid: int) -> list[Point2]:
        """Root-to-vertex point list."""
        out = []
        while vid >= 0:
            out.append(self.pts[vid])
            vid = self.parent[vid]
        out.reverse()
        return out

    def reparent(self, vid: int, new_parent: int) -> None:
        old = self.parent[vid]
        if old >= 0:
            self.children[old].remove(vid)
        self.parent[vid] = new_parent
        self.children[new_parent].append(vid)
        self.cost[vid] = self.cost[new_parent] + dist(self.pts[new_parent], self.pts[vid])
        stack = list(self.children[vid])
        while stack:
            c = stack.pop()
            self.cost[c] = self.cost[self.parent[c]] + dist(self.pts[self.parent[c]], self.pts[c])
            stack.extend(self.children[c])


def _dedupe(points: list[Point2]) -> list[Point2]:
    out = [points[0]]
    for p in points[1:]:
        if p != out[-1]:
            out.append(p)
    return out


class RRTConnect:
    """Bidirectional RRT that returns as soon as the two trees meet."""

    def __init__(self, max_edge: float = MAX_EDGE, smooth: bool = False):
        self.max_edge = max_edge
        self.smooth = smooth

    @property
    def name(self) -> str:
        return "rrt_connect_smoothed" if self.smooth else "rrt_connect"

    def _extend(self, tree: Tree, target: Point2, view: IncrementalView) -> Optional[int]:
        near_pt, near_id = tree.nearest(target)
        new = steer(near_pt, target, self.max_edge)
        if new == near_pt:
            return None
        if not view.is_state_valid(new) or not view.is_motion_valid(near_pt, new):
            return None
        return tree.add(new, near_id)

    def _connect(self, tree: Tree, target: Point2, view: IncrementalView) -> Optional[int]:
        near_pt, near_id = tree.nearest(target)
        while True:
            if near_pt == target:
                return near_id
            new = steer(near_pt, target, self.max_edge)
            if not view.is_state_valid(new) or not view.is_motion_valid(near_pt, new):
                return None
            near_id = tree.add(new, near_id)
            near_pt = new

    def plan(self, q: PlanQuery) -> PlanResult:
        q.validate()
        clock = q.budget.clock()
        rng = make_rng(q.seed)
        rec = AnytimeRecorder(clock)
        view = q.view
        if q.start == q.goal:
            rec.offer(Path([q.start]))
            return rec.result()
        trees = [Tree(q.start), Tree(q.goal)]
        grow = 0  # index of the tree extended this iteration; tree 0 is rooted at the start
        while not clock.exhausted():
            clock.tick()
            x = uniform_state(rng, view)
            a, b = trees[grow], trees[1 - grow]
            new = self._extend(a, x, view)
            if new is not None:
                met = self._connect(b, a.pts[new], view)
                if met is not None:
                    ends = [a.branch(new), b.branch(met)]
                    fwd, bwd = (ends[0], ends[1]) if grow == 0 else (ends[1], ends[0])
                    rec.offer(Path(_dedupe(fwd + bwd[::-1])))
                    break
            grow = 1 - grow
        if self.smooth and rec.best_path is not None:
            smoothed = shortcut_smooth(rec.best_path, view, rng, clock=clock)
            rec.offer(smoothed)
        return rec.result()


def shortcut_smooth(p: Path, view: IncrementalView, rng: np.random.Generator,
                    budget: Optional[Budget] = None, clock: Optional[BudgetClock] = None) -> Path:
    """Random shortcutting until the budget runs out.

    Each attempt joins two uniformly drawn points of the path with a straight
    segment and keeps it if it is collision-free and strictly shorter.
    """
    if clock is None:
        if budget is None:
            raise ValueError("shortcut_smooth needs a budget or a running clock")
        clock = budget.clock()
    wps = list(p.waypoints)
    if len(wps) < 3:
        return Path(wps)
    cur = p
    while not clock.exhausted():
        clock.tick()
        s1, s2 = rng.random(2)
        if s1 > s2:
            s1, s2 = s2, s1
        i1, t1 = cur.locate(s1)
        i2, t2 = cur.locate(s2)
        if i1 == i2:
            continue
        a = cur.point_at(i1, t1)
        b = cur.point_at(i2, t2)
        old = cur.cumulative[i2] + t2 * (cur.cumulative[i2 + 1] - cur.cumulative[i2]) \
            - cur.cumulative[i1] - t1 * (cur.cumulative[i1 + 1] - cur.cumulative[i1])
        if dist(a, b) >= old - 1e-12:
            continue
        if not view.is_motion_valid(a, b):
            continue
        wps = cur.waypoints
        cur = Path(_dedupe(wps[: i1 + 1] + [a, b] + wps[i2 + 1:]))
    return cur


class RRTStar:
    """Goal-biased RRT* with k-nearest rewiring; spends its whole budget."""

    name = "rrt_star"

    def __init__(self, rewire_factor: float = 1.001, max_edge: float = MAX_EDGE,
                 goal_bias: float = GOAL_BIAS):
        self.rewire_factor = rewire_factor
        self.max_edge = max_edge
        self.goal_bias = goal_bias
        self.tree: Optional[Tree] = None

    def _neighbours(self, tree: Tree, p: Point2) -> list[tuple[Point2, int, float]]:
        k = rgg_k(len(tree) + 1, self.rewire_factor)
        out = []
        for pt, vid in tree.index.k_nearest(p, k):
            d = dist(pt, p)
            if d <= self.max_edge:
                out.append((pt, vid, d))
        return out

    def plan(self, q: PlanQuery) -> PlanResult:
        q.validate()
        clock = q.budget.clock()
        rng = make_rng(q.seed)
        rec = AnytimeRecorder(clock)
        view = q.view
        goal = q.goal
        tree = Tree(q.start)
        self.tree = tree
        goal_id = 0 if q.start == goal else None
        if goal_id is not None:
            rec.offer(Path([q.start]))
        while not clock.exhausted():
            clock.tick()
            x = sample_state(rng, view, goal, self.goal_bias)
            near_pt, near_id = tree.nearest(x)
            new = steer(near_pt, x, self.max_edge)
            if new == near_pt and not (new == goal and goal_id is not None):
                continue
            if not view.is_state_valid(new):
                continue
            nbrs = self._neighbours(tree, new)
            if new == goal and goal_id is not None:
                # goal already in the tree: try to give it a better parent
                for pt, vid, d in sorted(nbrs, key=lambda t: tree.cost[t[1]] + t[2]):
                    if vid == goal_id:
                        continue
                    if tree.cost[vid] + d < tree.cost[goal_id] - 1e-12 and \
                            not self._is_descendant(tree, vid, goal_id) and view.is_motion_valid(pt, new):
                        tree.reparent(goal_id, vid)
                        break
            else:
                if not view.is_motion_valid(near_pt, new):
                    continue
                parent = near_id
                best = tree.cost[near_id] + dist(near_pt, new)
                for pt, vid, d in sorted(nbrs, key=lambda t: tree.cost[t[1]] + t[2]):
                    c = tree.cost[vid] + d
                    if c >= best:
                        break
                    if view.is_motion_valid(pt, new):
                        parent, best = vid, c
                        break
                vid_new = tree.add(new, parent)
                if new == goal:
                    goal_id = vid_new
                for pt, vid, d in nbrs:
                    if vid == parent:
                        continue
                    if tree.cost[vid_new] + d < tree.cost[vid] - 1e-12 and view.is_motion_valid(new, pt):
                        tree.reparent(vid, vid_new)
            if goal_id is not None and tree.cost[goal_id] < rec.best_cost:
                rec.offer(Path(_dedupe(tree.branch(goal_id))))
        return rec.result()

    @staticmethod
    def _is_descendant(tree: Tree, vid: int, ancestor: int) -> bool:
        while vid >= 0:
            if vid == ancestor:
                return True
            vid = tree.parent[vid]
        return False
