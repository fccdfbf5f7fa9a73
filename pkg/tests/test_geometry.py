import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from incplan.geometry import (
    AxisRect,
    Ball,
    Path,
    clip_segment_to_rect,
    clip_segments_to_rects,
    dist,
    point_in_ball,
    point_in_rect,
    segment_ball_interval,
    segment_intersects_rect,
    subsegment_intersects_ball,
)

coord = st.floats(-1.0, 1.0, allow_nan=False)
point = st.tuples(coord, coord)


@st.composite
def rects(draw):
    x0, x1 = sorted((draw(coord), draw(coord)))
    y0, y1 = sorted((draw(coord), draw(coord)))
    return AxisRect(x0, y0, x1 + 1e-3, y1 + 1e-3)


def dense_hits_rect(a, b, r, n=4001):
    t = np.linspace(0, 1, n)
    xs = a[0] + t * (b[0] - a[0])
    ys = a[1] + t * (b[1] - a[1])
    return bool(((xs >= r.xmin) & (xs <= r.xmax) & (ys >= r.ymin) & (ys <= r.ymax)).any())


def test_rect_basics():
    r = AxisRect.from_corners((0.0, -0.1), (0.2, 0.3))
    assert r == AxisRect(0.0, -0.1, 0.2, 0.3)
    with pytest.raises(ValueError):
        AxisRect.from_corners((0.2, -0.1), (0.0, 0.3))
    assert r.width == pytest.approx(0.2) and r.height == pytest.approx(0.4)
    assert point_in_rect((0.0, 0.3), r)  # closed
    assert not point_in_rect((0.2000001, 0.0), r)
    assert len(r.corners()) == 4


def test_segment_rect_examples():
    wall = AxisRect(-0.05, 0.025, 0.05, 1.0)
    assert not segment_intersects_rect((-0.4, 0.0), (0.4, 0.0), wall)
    assert segment_intersects_rect((-0.4, 0.1), (0.4, 0.1), wall)
    # grazing a corner counts as contact
    assert segment_intersects_rect((-0.1, 0.025), (0.0, 0.025), wall)
    t0, t1 = clip_segment_to_rect((-1.0, 0.5), (1.0, 0.5), wall)
    assert t0 == pytest.approx(0.475) and t1 == pytest.approx(0.525)


@settings(max_examples=300, deadline=None)
@given(point, point, rects())
def test_slab_test_matches_dense_sampling(a, b, r):
    exact = segment_intersects_rect(a, b, r)
    dense = dense_hits_rect(a, b, r)
    # dense sampling can only miss contacts, never invent them
    if dense:
        assert exact
    if exact and not dense:
        t0, t1 = clip_segment_to_rect(a, b, r)
        assert (t1 - t0) * dist(a, b) < 2.0 / 4000 * 3


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(point, point), min_size=1, max_size=6), st.lists(rects(), min_size=1, max_size=4))
def test_vectorised_clip_matches_scalar(segs, rs):
    a = np.array([s[0] for s in segs])
    b = np.array([s[1] for s in segs])
    t0, t1 = clip_segments_to_rects(a, b, np.array([tuple(r) for r in rs]))
    for i, (p, q) in enumerate(segs):
        for j, r in enumerate(rs):
            c = clip_segment_to_rect(p, q, r)
            assert (c is not None) == bool(t0[i, j] <= t1[i, j])
            if c is not None:
                assert t0[i, j] == pytest.approx(c[0], abs=1e-12)
                assert t1[i, j] == pytest.approx(c[1], abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(point, point, point, st.floats(0.01, 0.5))
def test_ball_interval_against_sampling(a, b, c, radius):
    ball = Ball(c[0], c[1], radius)
    iv = segment_ball_interval(a, b, ball)
    for t in np.linspace(0, 1, 201):
        p = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        d = dist(p, c)
        if iv is None:
            assert d > radius - 1e-9
        elif iv[0] + 1e-9 < t < iv[1] - 1e-9:
            assert d <= radius + 1e-9
        elif t < iv[0] - 1e-9 or t > iv[1] + 1e-9:
            assert d >= radius - 1e-9


def test_subsegment_ball():
    ball = Ball(0.0, 0.0, 0.1)
    assert subsegment_intersects_ball((-1, 0), (1, 0), 0.0, 1.0, ball)
    assert not subsegment_intersects_ball((-1, 0), (1, 0), 0.0, 0.4, ball)
    assert subsegment_intersects_ball((-1, 0), (1, 0), 0.0, 0.45, ball)  # reaches x = -0.1
    assert point_in_ball((0.1, 0.0), ball)


def test_path_parameterisation():
    p = Path([(0, 0), (1, 0), (1, 1)])
    assert p.length == 2.0
    assert p.interpolate(0.25) == (0.5, 0.0)
    assert p.interpolate(0.75) == (1.0, 0.5)
    assert p.interpolate(1.0) == (1.0, 1.0)
    sub = p.subpath(0.75)
    assert sub.waypoints == [(0.0, 0.0), (1.0, 0.0), (1.0, 0.5)]
    assert sub.length == pytest.approx(1.5)
    with pytest.raises(ValueError):
        p.locate(1.5)
    with pytest.raises(ValueError):
        Path([])


@settings(max_examples=200, deadline=None)
@given(st.lists(point, min_size=2, max_size=8), st.floats(0, 1))
def test_locate_and_parameter_of_round_trip(pts, s):
    p = Path(pts)
    if p.length == 0:
        return
    i, t = p.locate(s)
    assert p.parameter_of(i, t) == pytest.approx(s, abs=1e-9)
    sub = p.subpath(s)
    assert sub.length == pytest.approx(s * p.length, abs=1e-9)
    assert dist(sub.end, p.interpolate(s)) < 1e-12


def test_concat_drops_shared_point():
    a = Path([(0, 0), (1, 0)])
    b = Path([(1, 0), (1, 2)])
    c = a.concat(b)
    assert c.waypoints == [(0.0, 0.0), (1.0, 0.0), (1.0, 2.0)]
    assert c.length == pytest.approx(3.0)
    assert math.isclose(dist((0, 0), (3, 4)), 5.0)
