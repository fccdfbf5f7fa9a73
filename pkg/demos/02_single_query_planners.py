"""
One planning query, four planners
=================================

Each planner gets the same fully sensed query and the same iteration budget.
RRT-Connect stops at its first solution; RRT* and the informed batch planner
keep improving until the budget runs out.
"""

from incplan.harness import PLANNER_NAMES, PlannerConfig
from incplan.planning import Budget, PlanQuery
from incplan.world import IncrementalView, generate_random_rectangles, oracle_shortest_path

w = generate_random_rectangles(8)  # the straight line is blocked here
view = IncrementalView(w)
best = oracle_shortest_path(w, w.start, w.goal).length
print(f"{w.name}: visibility-graph optimum {best:.4f}")

# budgets are counted in iterations so the numbers below are reproducible
budget = Budget.iterations(1000)
for name in PLANNER_NAMES:
    res = PlannerConfig(name).make().plan(PlanQuery(w.start, w.goal, view, budget, seed=0))
    ratio = res.cost / best if res.solved else float("inf")
    print(f"{name:22s} solved={res.solved!s:5s} cost={res.cost:.4f} ({ratio:.3f}x) "
          f"iterations={res.iterations} first solution at {res.iterations_to_initial}")
