"""
Informed sampling and pruning
=============================

Once a solution of cost c is known, only states whose distances to start and
goal sum to at most c can help. The batch planner samples that ellipse
directly and prunes everything outside it.
"""

import numpy as np

from incplan.eitstar import BatchGraph, InformedSet, prune
from incplan.planning import make_rng
from incplan.world import BOUNDS, IncrementalView, make_empty_world

start, goal = (-0.5, -0.5), (0.5, 0.5)
rng = make_rng(0)
for cost in (np.inf, 2.5, 1.6, np.hypot(1, 1) * 1.001):
    s = InformedSet(start, goal, cost)
    pts = s.draw(rng, 5000, BOUNDS)
    sums = np.hypot(*(pts - start).T) + np.hypot(*(pts - goal).T)
    print(f"cost {cost:7.4f}: area {min(s.area(), 4.0):.4f}, max focal sum of samples {sums.max():.4f}")

# pruning a batch of uniform samples against a solution cost
g = BatchGraph(start, goal, IncrementalView(make_empty_world()))
g.add_samples(rng.random((1000, 2)) * 2 - 1)
print("pruned", prune(g, 1.6), "of", len(g.pts) - 2, "samples for cost 1.6")
