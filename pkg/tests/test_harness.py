import dataclasses
import math

import pytest

from incplan.experiments import trial_row
from incplan.geometry import AxisRect, Path, dist
from incplan.harness import (
    PLANNER_NAMES,
    PlannerConfig,
    QueryRecord,
    TrialConfig,
    TrialRecord,
    query_seed,
    replay_global_path,
    run_trial,
)
from incplan.planning import Budget
from incplan.world import (
    GlobalWorld,
    generate_random_rectangles,
    make_double_enclosure,
    make_empty_world,
    make_wall_gap,
    oracle_shortest_path,
)

SEALED = GlobalWorld((AxisRect(0.2, 0.2, 0.6, 0.3), AxisRect(0.2, 0.5, 0.6, 0.6),
                      AxisRect(0.2, 0.2, 0.3, 0.6), AxisRect(0.5, 0.2, 0.6, 0.6)),
                     (-0.5, 0.0), (0.4, 0.4))


def trial(world, planner, its=300, seed=0, r_s=0.1, **kw):
    return run_trial(TrialConfig(world, PlannerConfig(planner), r_s, Budget.iterations(its), seed, **kw))


def test_config_validation():
    with pytest.raises(ValueError):
        TrialConfig(make_empty_world(), PlannerConfig("eitstar"), 0.001, Budget.iterations(10))
    with pytest.raises(ValueError):
        TrialConfig(make_empty_world(), PlannerConfig("eitstar"), 0.1, Budget.iterations(10), max_queries=0)
    with pytest.raises(ValueError):
        PlannerConfig("bogus")
    assert PlannerConfig("rrtx").persistent and not PlannerConfig("rrt_star").persistent
    assert query_seed(0, 1) != query_seed(0, 2) and query_seed(3, 4) == query_seed(3, 4)


def test_empty_world_is_straight_and_takes_range_sized_steps():
    w = make_empty_world()
    rec = trial(w, "eitstar", r_s=0.1)
    d = dist(w.start, w.goal)
    assert rec.success and replay_global_path(rec, w)
    assert rec.length == pytest.approx(d, rel=1e-9)
    assert rec.n_queries == math.ceil(d / 0.1)
    for q in rec.queries[:-1]:
        assert q.subpath_length == pytest.approx(0.1, abs=1e-6)
    one = trial(w, "eitstar", r_s=1.0)
    assert one.success and one.n_queries == 1


@pytest.mark.parametrize("planner", PLANNER_NAMES)
@pytest.mark.parametrize("world", [make_wall_gap(), generate_random_rectangles(3)], ids=["wall_gap", "random3"])
def test_soundness_and_accounting(planner, world):
    r_s = 0.075 if world.name == "wall_gap" else 0.1
    rec = trial(world, planner, its=300, seed=1, r_s=r_s)
    assert rec.success, rec.failure
    assert replay_global_path(rec, world)
    assert rec.path.length == pytest.approx(sum(q.subpath_length for q in rec.queries), abs=1e-9)
    assert rec.n_queries == len(rec.queries)
    sizes = [q.region_size for q in rec.queries]
    assert sizes == list(range(1, len(sizes) + 1))  # one new ball per advance
    for q in rec.queries:
        assert q.subpath.start == q.start


def test_double_enclosure_forces_backtracking():
    w = make_double_enclosure()
    rec = trial(w, "eitstar", its=300, r_s=0.05)
    assert rec.success and replay_global_path(rec, w)
    assert rec.n_queries > 1
    assert rec.length > oracle_shortest_path(w, w.start, w.goal).length


@pytest.mark.parametrize("planner", ["rrt_connect", "rrtx"])
def test_iteration_mode_is_deterministic(planner):
    w = generate_random_rectangles(7)
    a = trial(w, planner, its=200, seed=5)
    b = trial(w, planner, its=200, seed=5)
    ra = trial_row("random:7", planner, "200it", 0, 5, 0.1, a)
    rb = trial_row("random:7", planner, "200it", 0, 5, 0.1, b)
    assert ra == rb


def test_failure_makes_metrics_infinite():
    rec = trial(SEALED, "eitstar", its=200)
    assert not rec.success and rec.failure
    assert math.isinf(rec.length) and math.isinf(rec.n_queries) and math.isinf(rec.solution_time)
    assert not replay_global_path(rec, SEALED)
    failed = [q for q in rec.queries if not q.result.solved]
    assert len(failed) <= 1
    if failed:
        assert failed[0] is rec.queries[-1]
        assert failed[0].s is None and failed[0].subpath is None


def test_query_limit_is_a_failure():
    rec = trial(make_double_enclosure(), "rrt_connect", its=200, r_s=0.05, max_queries=2)
    assert not rec.success and len(rec.queries) == 2
    assert "2 queries" in rec.failure


def corrupted(rec, index, piece):
    queries = list(rec.queries)
    queries[index] = dataclasses.replace(queries[index], subpath=piece)
    return dataclasses.replace(rec, queries=queries)


def test_replay_rejects_teleport_and_collision():
    w = make_wall_gap()
    rec = trial(w, "rrt_connect_smoothed", its=300, r_s=0.075)
    assert rec.success and replay_global_path(rec, w) and len(rec.queries) >= 3
    p = rec.queries[1].subpath
    jumped = Path([(p.start[0], p.start[1] + 1e-6)] + list(p.waypoints[1:]))
    assert not replay_global_path(corrupted(rec, 1, jumped), w)
    # same endpoints, but a detour through the upper wall
    detour = Path([p.start, (0.0, 0.5), p.end])
    assert not replay_global_path(corrupted(rec, 1, detour), w)
    # a detour that clears the wall is accepted
    clear = Path([p.start, (p.start[0], p.start[1] - 0.01), p.end])
    if p.start[0] < -0.06 and p.end[0] < -0.06:
        assert replay_global_path(corrupted(rec, 1, clear), w)


def test_replay_on_hand_built_record():
    w = make_wall_gap()
    cfg = TrialConfig(w, PlannerConfig("eitstar"), 0.1, Budget.iterations(10))
    pieces = [Path([w.start, (-0.1, 0.0)]), Path([(-0.1, 0.0), (0.1, 0.0)]), Path([(0.1, 0.0), w.goal])]
    rec = TrialRecord(cfg, [QueryRecord(i, p.start, None, 1.0, p) for i, p in enumerate(pieces)], True)
    assert replay_global_path(rec, w)
    pieces[1] = Path([(-0.1, 0.0), (0.0, 0.03), (0.1, 0.0)])  # clips the upper wall corner
    rec = TrialRecord(cfg, [QueryRecord(i, p.start, None, 1.0, p) for i, p in enumerate(pieces)], True)
    assert not replay_global_path(rec, w)
