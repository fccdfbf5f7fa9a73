"""
The incremental loop on the benchmark worlds
============================================

sense, plan, follow the plan to the edge of the sensed region, repeat. The
executed path is replayed against the true world afterwards.
"""

from incplan.harness import PlannerConfig, TrialConfig, replay_global_path, run_trial
from incplan.planning import Budget
from incplan.world import default_sensor_range, named_world, oracle_shortest_path

for world_name in ("wall_gap", "double_enclosure"):
    w = named_world(world_name)
    best = oracle_shortest_path(w, w.start, w.goal).length
    print(f"{world_name}: full-knowledge optimum {best:.4f}, sensor range {default_sensor_range(world_name)}")
    for planner in ("eitstar", "rrt_connect", "rrt_connect_smoothed"):
        cfg = TrialConfig(w, PlannerConfig(planner), default_sensor_range(world_name), Budget.iterations(500), seed=1)
        rec = run_trial(cfg)
        print(f"  {planner:22s} success={rec.success!s:5s} length={rec.length:.4f} "
              f"queries={rec.n_queries} replay ok={replay_global_path(rec, w)}")
