import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from spatial_rlvr.errors import AmbiguousDirectionError, DegenerateGeometryError, EmptyShapeError
from spatial_rlvr.geometry import (
    Direction,
    center_distance,
    default_alpha,
    longest_dimension,
    min_box_distance,
    relative_direction,
    room_area_alpha_shape,
    sampled_min_distance,
)
from spatial_rlvr.scene import BoundingBox, ObjectInstance


def box(center, ext=(1, 1, 1)):
    return BoundingBox(tuple(map(float, center)), tuple(map(float, ext)))


def obj(center, ext=(1, 1, 1), iid="a", points=None):
    return ObjectInstance("thing", iid, box(center, ext), 0, points)


coord = st.floats(-20, 20, allow_nan=False)
extent = st.floats(0.05, 5, allow_nan=False)
boxes = st.builds(lambda c, e: BoundingBox(c, e), st.tuples(coord, coord, coord),
                  st.tuples(extent, extent, extent))


def test_center_distance_examples():
    assert center_distance(box((1, 2, 3)), box((1, 2, 3))) == 0.0
    assert center_distance(box((0, 0, 0)), box((3, 4, 0))) == 5.0


def test_min_box_distance_examples():
    assert min_box_distance(box((0, 0, 0)), box((0.5, 0, 0))) == 0.0
    assert min_box_distance(box((0, 0, 0)), box((3, 0, 0))) == 2.0


@settings(max_examples=300)
@given(boxes, boxes)
def test_box_distance_properties(a, b):
    d = min_box_distance(a, b)
    assert d == min_box_distance(b, a)
    assert 0 <= d <= center_distance(a, b) + 1e-12
    assert center_distance(a, b) == center_distance(b, a)
    assert d == pytest.approx(oracles.box_distance_minkowski(a.center, a.extents, b.center, b.extents),
                              abs=1e-12)
    overlap = all(abs(ca - cb) <= (ea + eb) / 2 for ca, cb, ea, eb in
                  zip(a.center, b.center, a.extents, b.extents))
    assert (d == 0) == overlap


def test_sampled_self_distance_is_zero():
    a = obj((1, 2, 3), (0.5, 0.7, 0.2))
    assert sampled_min_distance(a, a, 64, seed=3) == 0.0


def test_sampled_distance_bracket_and_determinism():
    a, b = obj((0, 0, 0), iid="a"), obj((3, 0, 0), iid="b")
    d = sampled_min_distance(a, b, 512, seed=1)
    assert 2.0 <= d <= 3.0
    assert d == sampled_min_distance(a, b, 512, seed=1)


def test_sampled_distance_converges_toward_box_distance():
    a, b = obj((0, 0, 0), iid="a"), obj((3, 1, 0), iid="b")
    exact = min_box_distance(a.bbox, b.bbox)
    means = [np.mean([sampled_min_distance(a, b, n, seed=s) for s in range(20)]) - exact
             for n in (4, 32, 256, 2048)]
    assert all(x > y for x, y in zip(means, means[1:]))
    assert means[-1] < 0.1


def test_sampled_distance_prefers_surface_points():
    a = obj((0, 0, 0), (2, 2, 2), "a", points=((0.9, 0, 0),))
    b = obj((3, 0, 0), (2, 2, 2), "b", points=((2.1, 0, 0),))
    assert sampled_min_distance(a, b, 16) == pytest.approx(1.2)


def test_sampled_distance_needs_samples():
    with pytest.raises(ValueError):
        sampled_min_distance(obj((0, 0, 0)), obj((1, 0, 0), iid="b"), 0)


def test_longest_dimension():
    assert longest_dimension(obj((0, 0, 0), (0.5, 1.2, 0.8))) == pytest.approx(120.0)
    assert longest_dimension(obj((0, 0, 0), (1, 1, 1))) == 100.0
    seg = ((-1.0, 0.0, 0.0), (0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    assert longest_dimension(obj((0, 0, 0), (3, 3, 3), points=seg)) == 200.0


@settings(max_examples=50)
@given(st.tuples(extent, extent, extent), st.tuples(coord, coord, coord), st.floats(0.1, 10))
def test_longest_dimension_translation_and_scale(ext, shift, k):
    base = longest_dimension(obj((0, 0, 0), ext))
    assert longest_dimension(obj(shift, ext)) == base
    assert longest_dimension(obj(shift, tuple(e * k for e in ext))) == pytest.approx(base * k)


UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def test_unit_square_area():
    assert room_area_alpha_shape(UNIT_SQUARE, 10) == pytest.approx(1.0, abs=1e-12)


def test_alpha_shape_errors():
    with pytest.raises(DegenerateGeometryError):
        room_area_alpha_shape([(0, 0), (1, 1), (2, 2), (3, 3)], 10)
    with pytest.raises(DegenerateGeometryError):
        room_area_alpha_shape([(0, 0), (1, 1)], 10)
    with pytest.raises(EmptyShapeError, match="empty shape"):
        room_area_alpha_shape(UNIT_SQUARE, 0.1)


def test_l_shape_area_within_five_percent():
    step = 0.2
    pts = [(i * step, j * step) for i in range(31) for j in range(31)
           if not (i * step > 3.0 and j * step > 3.0)]
    # 6 x 6 square minus the 3 x 3 notch
    area = room_area_alpha_shape(pts, default_alpha(pts))
    assert area == pytest.approx(27.0, rel=0.05)


def test_alpha_shape_monotone_and_bounded_by_hull():
    rng = np.random.default_rng(4)
    pts = rng.uniform(0, 5, size=(80, 2))
    hull = oracles.shoelace(oracles.convex_hull(pts.tolist()))
    areas = []
    for alpha in (0.4, 0.6, 1.0, 2.0, 5.0, 100.0, math.inf):
        areas.append(room_area_alpha_shape(pts, alpha))
    assert all(a <= b + 1e-12 for a, b in zip(areas, areas[1:]))
    assert areas[-1] == pytest.approx(hull, abs=1e-9)
    assert all(a <= hull + 1e-9 for a in areas)


def test_default_alpha():
    pts = [(i * 0.5, j * 0.5) for i in range(5) for j in range(5)]
    assert default_alpha(pts) == pytest.approx(1.0)


def test_relative_direction_examples():
    assert relative_direction((0, 0), (0, 1), (1, 0)) is Direction.RIGHT
    assert relative_direction((0, 0), (0, 1), (-1, 0)) is Direction.LEFT
    # right-handed 3D frames: facing +z with y up, +x is on the left
    assert relative_direction((0, 5, 0), (0, -2, 1), (1, 9, 0)) is Direction.LEFT
    # facing +y with z up, +x is on the right
    assert relative_direction((0, 0, 5), (0, 1, -2), (1, 0, 9), up_axis="z") is Direction.RIGHT


@settings(max_examples=200)
@given(st.tuples(coord, coord, coord), st.tuples(coord, coord, coord), st.tuples(coord, coord, coord),
       st.sampled_from(["y", "z"]))
def test_relative_direction_3d_matches_physical_oracle(s, f, q, up):
    try:
        ans = relative_direction(s, f, q, up_axis=up)
    except AmbiguousDirectionError:
        return
    k = 1 if up == "y" else 2
    a = [f[i] - s[i] for i in range(3) if i != k]
    b = [q[i] - s[i] for i in range(3) if i != k]
    if abs(a[0] * b[1] - a[1] * b[0]) < 1e-6 * max(1e-9, math.hypot(*a) * math.hypot(*b)):
        return
    assert ans.value == oracles.direction_physical(s, f, q, up)


def test_relative_direction_collinear_is_ambiguous():
    with pytest.raises(AmbiguousDirectionError, match="ambiguous direction"):
        relative_direction((0, 0), (0, 1), (0, 5))
    with pytest.raises(AmbiguousDirectionError):
        relative_direction((1, 1), (1, 1), (0, 5))


pt2 = st.tuples(st.floats(-10, 10), st.floats(-10, 10))


@settings(max_examples=300)
@given(pt2, pt2, pt2, st.floats(0, 2 * math.pi), pt2)
def test_relative_direction_invariances(s, f, q, theta, shift):
    try:
        ans = relative_direction(s, f, q)
    except AmbiguousDirectionError:
        return
    # skip near-collinear triples where rotation rounding could flip the sign
    u = (f[0] - s[0], f[1] - s[1])
    v = (q[0] - s[0], q[1] - s[1])
    if abs(u[0] * v[1] - u[1] * v[0]) < 1e-6 * max(1e-9, math.hypot(*u) * math.hypot(*v)):
        return
    assert ans.value == oracles.direction_by_angle(s, f, q)

    c, sn = math.cos(theta), math.sin(theta)

    def rt(p):
        return (c * p[0] - sn * p[1] + shift[0], sn * p[0] + c * p[1] + shift[1])

    assert relative_direction(rt(s), rt(f), rt(q)) is ans
    # mirroring the query across the facing line flips the answer
    mirror_q = (q[0] - 2 * (u[0] * v[1] - u[1] * v[0]) / (u[0] ** 2 + u[1] ** 2) * -u[1],
                q[1] - 2 * (u[0] * v[1] - u[1] * v[0]) / (u[0] ** 2 + u[1] ** 2) * u[0])
    assert relative_direction(s, f, mirror_q) is not ans
