"""
RRT^X keeps its graph between queries
=====================================

After each new look the planner is told which edges became invalid; it
deletes them and lets cost-to-goal changes cascade through the graph before
planning again from the robot's new position.
"""

from incplan.geometry import AxisRect
from incplan.planning import Budget, PlanQuery
from incplan.rrtx import RRTX
from incplan.world import GlobalWorld, IncrementalView, SensedRegion, sense

walls = GlobalWorld((AxisRect(-0.25, -0.3, -0.2, 0.3), AxisRect(0.2, -0.1, 0.25, 0.5)),
                    start=(-0.6, 0.0), goal=(0.6, 0.0), name="two_walls")
stops = [(-0.6, 0.0), (-0.35, 0.0), (-0.3, 0.35), (0.0, 0.35), (0.15, 0.0)]

planner = RRTX()
region = SensedRegion(0.15)
for i, x in enumerate(stops):
    region = sense(region, x)
    view = IncrementalView(walls, region)
    removed = planner.notify_changes(view) if i else 0
    res = planner.plan(PlanQuery(x, walls.goal, view, Budget.iterations(400), seed=i))
    st = planner.state
    consistent = all(st.g[v] == st.lmc[v] for v in range(len(st)))
    print(f"query {i}: removed {removed:3d} edges, graph has {len(st)} vertices, "
          f"cost to goal {res.cost:.4f}, consistent={consistent}")
