import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elastica_coarea.curve_core import Curve, circle
from elastica_coarea.curve_systems import (
    CurveSystem, classify_contact, interior_area, interior_mask, interior_membership,
    system_energy, trace_distance, winding_grid, winding_index, winding_numbers,
)
from elastica_coarea.errors import PointOnTrace, ValidationError


def ray_parity(point, poly):
    """Independent even-odd oracle: count crossings of the ray towards +x."""
    x, y = point
    inside = False
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if xc > x:
                inside = not inside
    return inside


def random_star_polygon(rng, n):
    ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = rng.uniform(0.3, 1.5, n)
    return np.column_stack([r * np.cos(ang), r * np.sin(ang)]) + rng.uniform(-1, 1, 2)


# -- winding -----------------------------------------------------------------------

def test_origin_in_unit_circle():
    assert winding_index((0, 0), CurveSystem([circle()])) == 1


def test_outside_point():
    assert winding_index((3, 0), CurveSystem([circle()])) == 0


def test_multiplicity_two():
    s = CurveSystem([circle()], [2])
    assert winding_index((0, 0), s) == 2
    assert interior_membership((0, 0), s) is False


def test_interior_membership_simple():
    assert interior_membership((0, 0), CurveSystem([circle()])) is True


def test_annulus_membership_matches_ray_casting():
    outer, inner = circle(2.0, 256), circle(1.0, 256, ccw=False)
    s = CurveSystem([outer, inner])
    p = (1.5, 0.1)
    assert winding_index(p, s) == 1
    assert interior_membership(p, s) == (ray_parity(p, outer.points) != ray_parity(p, inner.points))
    assert interior_membership((0.0, 0.0), s) is False


def test_point_on_trace_raises():
    with pytest.raises(PointOnTrace):
        winding_index((1.0, 0.0), CurveSystem([circle(1.0, 64)]))


def test_parity_oracle_1000_points_100_polygons():
    rng = np.random.default_rng(7)
    mismatches = 0
    for _ in range(100):
        poly = random_star_polygon(rng, int(rng.integers(3, 16)))
        pts = rng.uniform(-3, 3, (10, 2))
        sys_ = CurveSystem([Curve(poly)])
        w = winding_numbers(pts, sys_)
        for p, wi in zip(pts, w):
            mismatches += (int(round(abs(wi))) % 2 == 1) != ray_parity(p, poly)
    assert mismatches == 0


def test_winding_grid_matches_pointwise():
    s = CurveSystem([circle(1.0, 128), circle(0.5, 64, center=(0.2, 0.1))])
    xs = np.linspace(-1.5, 1.5, 37)
    ys = np.linspace(-1.4, 1.6, 41)
    grid = winding_grid(s, xs, ys)
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    far = trace_distance(pts, s) > 1e-3
    direct = np.rint(winding_numbers(pts, s)).astype(int)
    assert np.array_equal(grid.ravel()[far], direct[far])


@given(st.integers(0, 5))
def test_even_multiplicity_change_preserves_parity(k):
    base = CurveSystem([circle()])
    bumped = CurveSystem([circle()], [1 + 2 * k])
    for p in [(0.0, 0.0), (0.5, 0.3), (2.0, 0.0)]:
        assert interior_membership(p, base) == interior_membership(p, bumped)


# -- area --------------------------------------------------------------------------

def test_unit_disk_area():
    a = interior_area(CurveSystem([circle(1.0, 1024)]), (-2, -2, 2, 2), 512)
    assert abs(a - math.pi) / math.pi < 0.02


def test_empty_system_area():
    assert interior_area(CurveSystem.empty(), (-1, -1, 1, 1), 64) == 0.0


def test_tangent_circles_area():
    s = CurveSystem([circle(1.0, 512, center=(-1, 0)), circle(1.0, 512, center=(1, 0))])
    a = interior_area(s, (-2.5, -2.5, 2.5, 2.5), 512)
    assert abs(a - 2 * math.pi) / (2 * math.pi) < 0.02


def test_area_converges_with_resolution():
    s = CurveSystem([circle(1.0, 2048)])
    errs = [abs(interior_area(s, (-2, -2, 2, 2), r) - math.pi) for r in (128, 256, 512)]
    assert errs[1] <= errs[0] and errs[2] <= errs[1]


# -- contacts -----------------------------------------------------------------------

def test_concentric_circles_disjoint():
    r = classify_contact(CurveSystem([circle(1.0)]), CurveSystem([circle(2.0)]))
    assert r.classification == "disjoint"


def test_external_tangency_is_tangential():
    a = CurveSystem([circle(1.0, 2048, center=(-1, 0))])
    b = CurveSystem([circle(1.0, 2048, center=(1, 0))])
    r = classify_contact(a, b, dist_tol=1e-3, angle_tol=0.1)
    assert r.classification == "tangential_contact"
    assert len(r.witnesses) == 1
    spacing = 2 * math.pi / 2048
    assert np.hypot(*r.witnesses[0].point) <= 2 * spacing


def test_overlapping_circles_cross():
    a = CurveSystem([circle(1.0, 512, center=(-0.5, 0))])
    b = CurveSystem([circle(1.0, 512, center=(0.5, 0))])
    r = classify_contact(a, b)
    assert r.classification == "crossing"
    assert all(w.angle > 0.15 for w in r.crossings)
    assert len(r.crossings) == 2


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_classification_symmetric(dx, dy):
    a = CurveSystem([circle(1.0, 256)])
    b = CurveSystem([circle(0.7, 256, center=(dx, dy))])
    assert classify_contact(a, b).classification == classify_contact(b, a).classification


def test_doubled_path_energy_counts_twice():
    path = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    L, K, E = system_energy(CurveSystem([], doubled=[path]))
    assert L == pytest.approx(4.0) and K == 0.0 and E == pytest.approx(4.0)


def test_invalid_multiplicity():
    with pytest.raises(ValidationError):
        CurveSystem([circle()], [0])
