import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastica_coarea.curve_core import ElasticaParams
from elastica_coarea.curve_systems import interior_mask
from elastica_coarea.errors import OpenContour, ValidationError
from elastica_coarea.grid_function import (
    GridFunction, coarea_energy, divergence_energy, extract_level_set,
)
from elastica_coarea.reports import EnergyReport
from elastica_coarea.smoothing import _smoothstep


def cone(res=512):
    return GridFunction.sample(lambda x, y: np.maximum(0.0, 1.0 - np.hypot(x, y)), (-2, -2, 2, 2), res)


def gaussian(res=256, sigma=0.4):
    # cut to exactly zero well before the border so every level closes
    def f(x, y):
        g = np.exp(-(x * x + y * y) / (2 * sigma * sigma)) - math.exp(-1.6 ** 2 / (2 * sigma * sigma))
        return np.maximum(g, 0.0)
    return GridFunction.sample(f, (-2, -2, 2, 2), res)


# -- GridFunction --------------------------------------------------------------------

def test_grid_too_small():
    with pytest.raises(ValidationError):
        GridFunction(np.zeros((7, 9)))


def test_grid_non_finite():
    v = np.zeros((8, 8))
    v[3, 3] = np.nan
    with pytest.raises(ValidationError):
        GridFunction(v)


def test_grid_convention_columns_are_x():
    u = GridFunction.sample(lambda x, y: x, (0, 0, 7, 7), 8)
    assert u.values[0, 3] == pytest.approx(3.0)
    assert u.interpolate([[2.5, 4.0]])[0] == pytest.approx(2.5)


# -- extraction ----------------------------------------------------------------------

def test_cone_level_is_circle_radius_half():
    ext = extract_level_set(cone(), 0.5)
    assert len(ext.system.curves) == 1
    assert abs(ext.system.curves[0].length - math.pi) / math.pi < 0.01
    assert ext.open_fragments == 0


def test_level_above_max_is_empty():
    ext = extract_level_set(cone(128), 1.5)
    assert ext.system.is_empty and ext.open_fragments == 0


def test_level_below_border_raises_open_contour():
    with pytest.raises(OpenContour) as err:
        extract_level_set(cone(128), -0.5)
    assert err.value.t == pytest.approx(-0.5)


def test_extracted_contours_are_counterclockwise_around_superlevel():
    u = gaussian(128)
    for t in (0.1, 0.5, 0.9):
        ext = extract_level_set(u, t)
        assert ext.orientation_failures == 0
        assert all(c.signed_area > 0 for c in ext.system.curves)


def test_two_bumps_give_two_contours():
    u = GridFunction.sample(
        lambda x, y: np.maximum(0, 1 - np.hypot(x - 0.9, y)) + np.maximum(0, 1 - np.hypot(x + 0.9, y)),
        (-2.5, -2.5, 2.5, 2.5), 256)
    assert len(extract_level_set(u, 0.5).system.curves) == 2


def test_level_monotonicity():
    u = gaussian(256)
    X, Y = u.mesh()
    box = u.bbox
    area = (box[2] - box[0]) * (box[3] - box[1])
    cell = u.spacing ** 2
    ts = np.linspace(0.05, 0.95, 7)
    masks = [interior_mask(extract_level_set(u, t).system, u.xs, u.ys) for t in ts]
    for lower, upper in zip(masks, masks[1:]):
        assert (upper & ~lower).sum() * cell <= 0.005 * area


# -- coarea / divergence -------------------------------------------------------------

def test_zero_function_total_zero(params):
    u = GridFunction(np.zeros((32, 32)))
    r = coarea_energy(u, params)
    assert r.total == 0.0
    assert all(row.length == 0.0 for row in r.rows)


def test_constant_divergence_zero(params):
    assert divergence_energy(GridFunction(np.full((32, 32), 3.0)), params, grad_floor=1e-9) == 0.0


def test_n_levels_minimum(params):
    with pytest.raises(ValidationError):
        coarea_energy(cone(64), params, n_levels=8)


def test_cone_per_level_closed_form_and_divergence_flag(params):
    r = coarea_energy(cone(512), params, n_levels=16, check_doubling=True)
    for row in r.rows[:12]:
        rad = 1 - row.t
        expected = 2 * math.pi * rad * (1 + rad ** -2)
        assert abs(row.energy - expected) / expected < 0.02
    energies = [row.energy for row in r.rows]
    assert all(b > a for a, b in zip(energies[6:], energies[7:]))
    assert r.flags["non_convergent"] is True


def test_open_contour_propagates(params):
    u = GridFunction.sample(lambda x, y: x, (0, 0, 1, 1), 32)
    with pytest.raises(OpenContour):
        coarea_energy(u, params)


def test_smoothed_disk_coarea_matches_circle(smooth_disk, params):
    r = coarea_energy(smooth_disk, params, 64, workers=4)
    assert abs(r.total - 4 * math.pi) / (4 * math.pi) < 0.03


def test_coarea_matches_divergence_on_disk(smooth_disk_small, params):
    c = coarea_energy(smooth_disk_small, params, 64, workers=4).total
    d = divergence_energy(smooth_disk_small, params)
    assert abs(c - d) / d <= 0.05


def test_coarea_matches_divergence_on_gaussian(params):
    u = gaussian(256)
    c = coarea_energy(u, params, 64, workers=4).total
    d = divergence_energy(u, params)
    assert abs(c - d) / d <= 0.05


def test_ramp_has_no_curvature_term():
    """Straight level lines: on the ramp the energy is alpha * int |grad u|."""
    def window(s):
        return _smoothstep((s + 1.8) / 0.3) * _smoothstep((1.8 - s) / 0.3)

    u = GridFunction.sample(lambda x, y: (x + 1.5) / 3 * window(x) * window(y), (-2, -2, 2, 2), 512)
    inner = np.abs(u.xs) < 1.4
    rows = np.abs(u.ys) < 1.4
    ramp = GridFunction(u.values[np.ix_(rows, inner)], u.spacing, (u.xs[inner][0], u.ys[rows][0]))
    full = divergence_energy(ramp, ElasticaParams(alpha=1.0, beta=1.0))
    length_only = divergence_energy(ramp, ElasticaParams(alpha=1.0, beta=0.0))
    assert abs(full - length_only) / length_only < 0.05
    area = (ramp.bbox[2] - ramp.bbox[0]) * (ramp.bbox[3] - ramp.bbox[1])
    assert abs(length_only - area / 3) / (area / 3) < 0.05


_GAUSS = gaussian(128)
_GAUSS_TOTAL = coarea_energy(_GAUSS, ElasticaParams(), 32).total


@settings(max_examples=10)
@given(st.floats(0.2, 5.0))
def test_contrast_covariance(lam):
    u, base = _GAUSS, _GAUSS_TOTAL
    P = ElasticaParams()
    scaled = coarea_energy(u.like(lam * u.values), P, 32).total
    assert abs(scaled - lam * base) / (lam * base) < 0.01


def test_shift_invariance():
    u = gaussian(128)
    P = ElasticaParams()
    base = coarea_energy(u, P, 32).total
    shifted = coarea_energy(u.like(u.values + 7.25), P, 32).total
    assert abs(shifted - base) / base < 0.01


def test_thread_determinism(params):
    u = gaussian(128)
    totals = {coarea_energy(u, params, 32, workers=w).total for w in (1, 2, 4, 8)}
    assert len(totals) == 1


def test_report_csv_round_trip(params):
    r = coarea_energy(gaussian(64), params, 16)
    text = r.to_csv()
    assert text.splitlines()[0] == "level,t,length,curvature_term,energy"
    assert text.splitlines()[-1].startswith("TOTAL,,,,")
    back = EnergyReport.from_csv(text)
    assert len(back.rows) == 16
    assert back.rows[3].energy == r.rows[3].energy
    assert back.total == pytest.approx(r.total, rel=1e-8)
