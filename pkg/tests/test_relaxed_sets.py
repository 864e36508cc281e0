import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elastica_coarea.curve_core import ElasticaParams, circle, elastica_energy, ellipse
from elastica_coarea.curve_systems import CurveSystem, system_energy
from elastica_coarea.errors import BridgeCrossing, ValidationError
from elastica_coarea.gallery import DropShape, drop_arc, mirrored_arcs, mirrored_arcs_closed_form
from elastica_coarea.grid_function import GridFunction, coarea_energy
from elastica_coarea.nesting import LevelFamily, family_energy_G, self_covering_family
from elastica_coarea.relaxed_sets import (
    CuspedSet, Omega, canonical_omega, clip_energy, coarea_lower_bound, relaxed_energy_cusped,
)

SHAPE = DropShape(length=1.0, width=0.3, bend=None)


def drop_pair(gap, shape=SHAPE, paired=True):
    A, B = (-gap / 2, 0.0), (gap / 2, 0.0)
    arcs = [drop_arc(A, shape, 0.01, +1), drop_arc(B, shape, 0.01, -1)]
    return CuspedSet(arcs, [(A, B)] if paired else [])


# -- relaxed energy of cusped sets ---------------------------------------------------

@given(st.floats(0.2, 3.0), st.floats(0.1, 4.0))
def test_bridge_adds_exactly_two_alpha_L(gap, alpha):
    params = ElasticaParams(p=2.0, alpha=alpha, beta=1.0)
    rep = relaxed_energy_cusped(drop_pair(gap), params)
    arcs = sum(r.energy for r in rep.rows[:2])
    assert abs(rep.total - arcs - 2 * alpha * gap) <= 1e-9


def test_bridge_term_independent_of_arcs():
    a = relaxed_energy_cusped(drop_pair(1.0)).total
    b = relaxed_energy_cusped(drop_pair(1.7)).total
    assert abs((b - a) - 2 * 0.7) <= 1e-9


def test_unpaired_cusps_are_infinite():
    rep = relaxed_energy_cusped(drop_pair(1.0, paired=False))
    assert math.isinf(rep.total) and rep.flags["unpaired_cusps"]


def test_paired_drops_emit_minimizing_system():
    rep = relaxed_energy_cusped(drop_pair(1.0))
    system = rep.extra
    assert isinstance(system, CurveSystem)
    # the loop adds junction curvature at the cusps, where open arcs have none
    assert system_energy(system)[2] == pytest.approx(rep.total, rel=1e-3)


def test_degenerate_pair_contributes_zero():
    rep = relaxed_energy_cusped(drop_pair(0.0))
    arcs = sum(r.energy for r in rep.rows[:2])
    assert rep.total == pytest.approx(arcs, abs=1e-12)
    assert rep.rows[2].length == 0.0


def test_mirrored_arcs_closed_form():
    rep = relaxed_energy_cusped(mirrored_arcs())
    want = mirrored_arcs_closed_form()
    assert want == pytest.approx(2 * (2 * math.pi / 3) * 2 + 2, rel=1e-12)
    assert abs(rep.total - want) < 1e-2


@pytest.mark.parametrize("n", [20, 21])  # the wall straddles the bridge / has a vertex on it
def test_bridge_crossing_raises(n):
    pair = drop_pair(1.0)
    wall = np.column_stack([np.full(n, 0.1), np.linspace(-0.5, 0.5, n)])
    with pytest.raises(BridgeCrossing):
        relaxed_energy_cusped(CuspedSet(list(pair.arcs) + [wall], pair.cusp_pairs))


def test_arc_needs_three_points():
    with pytest.raises(ValidationError):
        CuspedSet([[[0, 0], [1, 0]]])


# -- lower bound ---------------------------------------------------------------------

def test_lower_bound_empty():
    assert coarea_lower_bound(GridFunction(np.zeros((16, 16))), []) == 0.0


def test_lower_bound_rejects_out_of_range_levels(smooth_disk_small):
    with pytest.raises(ValidationError):
        coarea_lower_bound(smooth_disk_small, [(2.0, 1.0)])


def test_lower_bound_tight_for_smooth_disk(smooth_disk_small, params):
    fam = self_covering_family(smooth_disk_small, 32)
    levels = [(t, system_energy(s, params)[2]) for t, s in zip(fam.midpoints, fam.systems)]
    bound = coarea_lower_bound(smooth_disk_small, levels)
    G = family_energy_G(fam, params).total
    assert abs(bound - G) / G < 0.02
    assert bound <= G * 1.01


def test_lower_bound_below_member_with_extra_curve(smooth_disk_small, params):
    fam = self_covering_family(smooth_disk_small, 32)
    levels = [(t, system_energy(s, params)[2]) for t, s in zip(fam.midpoints, fam.systems)]
    fatter = LevelFamily(fam.thresholds,
                         [CurveSystem(list(s.curves) + [circle(0.05, 64)], list(s.multiplicities) + [2])
                          for s in fam.systems], fam.range)
    assert coarea_lower_bound(smooth_disk_small, levels) <= family_energy_G(fatter, params).total * 1.01


# -- clipping ------------------------------------------------------------------------

def test_clip_half_plane_halves_circle():
    c = circle(1.0, 1024)
    half = clip_energy(c, Omega.rectangle(0.0, -2.0, 2.0, 2.0)).total
    assert abs(half - 0.5 * elastica_energy(c)) / (0.5 * elastica_energy(c)) < 0.01


def test_clip_whole_domain_is_full_energy():
    e = ellipse(2.0, 1.0, 512)
    rep = clip_energy(e, canonical_omega(CurveSystem([e])))
    assert rep.total == pytest.approx(elastica_energy(e), rel=1e-9)


def test_clip_empty_intersection():
    assert clip_energy(circle(), Omega.rectangle(5, 5, 6, 6)).total == 0.0


@pytest.mark.parametrize("cut", [-0.7, 0.0, 0.33])
def test_clip_partition_additivity(cut):
    e = ellipse(2.0, 1.0, 1024)
    left = clip_energy(e, Omega.rectangle(-3, -2, cut, 2)).total
    right = clip_energy(e, Omega.rectangle(cut, -2, 3, 2)).total
    full = elastica_energy(e)
    assert abs(left + right - full) / full < 0.01


@given(st.floats(0.2, 1.0), st.floats(0.0, 1.0))
def test_clip_monotone_under_inclusion(small, extra):
    c = ellipse(2.0, 1.0, 512)
    inner = clip_energy(c, Omega.rectangle(-small, -small, 3 * small, small)).total
    outer = clip_energy(c, Omega.rectangle(-small - extra, -small - extra, 3 * small + extra, small + extra)).total
    assert inner <= outer * 1.01 + 1e-12


def test_clip_family_weights_slabs():
    fam = LevelFamily([0.0, 0.5], [CurveSystem([circle(1.0, 512)])] * 2, (0.0, 2.0))
    rep = clip_energy(fam, Omega.rectangle(0.0, -2.0, 2.0, 2.0))
    assert rep.total == pytest.approx(2.0 * 0.5 * elastica_energy(circle(1.0, 512)), rel=0.01)


def test_canonical_omega_contains_traces():
    s = CurveSystem([circle(1.0, 64, center=(3, 1)), ellipse(2.0, 1.0, 64)])
    om = canonical_omega(s)
    assert om.contains(s.trace_vertices()).all()


def test_omega_is_open():
    om = Omega.rectangle(0, 0, 1, 1)
    assert om.contains([[0.5, 0.5]])[0]
    assert not om.contains([[0.0, 0.5]])[0] and not om.contains([[1.0, 1.0]])[0]


def test_drop_cusp_outside_omega():
    arc = drop_arc((0.0, 0.0), SHAPE, 0.01, +1)
    whole = relaxed_energy_cusped(CuspedSet([arc]))
    assert math.isinf(whole.total)
    from elastica_coarea.curve_core import Curve
    inside = clip_energy(CurveSystem([Curve(arc[:-1])]), Omega.rectangle(-1.3, -0.5, -0.2, 0.5))
    assert math.isfinite(inside.total) and inside.total > 0
