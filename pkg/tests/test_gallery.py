import json
import math

import numpy as np
import pytest

from elastica_coarea.curve_core import ElasticaParams, polyline_curvature
from elastica_coarea.errors import ValidationError
from elastica_coarea.gallery import (
    FIXTURE_NAMES, DropShape, SavareFamily, build_figure_examples, drop_arc, evaluate_fixture,
    export_fixtures, savare_dyadic_means, savare_energy_bound, savare_expected_count,
    savare_level_counts, savare_U, savare_weak_convergence, staircase_table,
)
from elastica_coarea.io import from_document, read_pgm, to_document


@pytest.fixture(scope="module")
def fixtures():
    return build_figure_examples()


# -- Savaré --------------------------------------------------------------------------

def test_U_profile():
    assert savare_U([0.0, 0.5, 1.0, 2.0, 2.5]).tolist() == [0.0, 0.5, 0.0, 1.0, 1.5]


@pytest.mark.parametrize("n", range(1, 7))
def test_U_n_at_one_is_half(n):
    fam = SavareFamily.build(n)
    assert fam.xs[-1] == 1.0 and fam.U_n[-1] == 0.5


def test_negative_n_rejected():
    with pytest.raises(ValidationError):
        SavareFamily.build(-1)


def test_counts_n0():
    _, counts = savare_level_counts(0, [0.25, 0.75])
    assert counts.tolist() == [3, 1]


@pytest.mark.parametrize("n", range(7))
def test_counts_follow_slab_pattern(n):
    t, counts = savare_level_counts(n)
    assert set(np.unique(counts)) <= {1, 3}
    assert np.array_equal(counts, savare_expected_count(n, t))


def test_mean_count_n3():
    t, counts = savare_level_counts(3)
    assert abs(counts.mean() - 2.0) < 1e-6
    assert t.max() < 0.5


def test_weak_convergence():
    rep = savare_weak_convergence(range(1, 7))
    for row in rep["rows"]:
        if row["phi"] == "one":
            assert row["int_fn_phi"] == pytest.approx(1.0, abs=1e-12)
            assert row["gap"] == pytest.approx(0.0, abs=1e-12)
    assert all(abs(r - 0.5) <= 0.1 for r in rep["halving"]["t"])
    assert all(abs(v - 0.5) <= 1e-6 for v in rep["l2_defect"].values())


def test_weak_convergence_rejects_n0():
    with pytest.raises(ValidationError):
        savare_weak_convergence([0])


@pytest.mark.parametrize("n", range(7))
def test_energy_bound(n):
    rep = savare_energy_bound(n)
    assert rep["energy"] == pytest.approx(1.0, abs=1e-12)
    assert rep["below_bound"] and rep["bound"] == 1.5


@pytest.mark.parametrize("p", [1.2, 1.5, 3.0])
def test_energy_bound_independent_of_p(p):
    assert savare_energy_bound(2, params=ElasticaParams(p=p))["energy"] == pytest.approx(1.0, abs=1e-12)


def test_dyadic_means_tend_to_two():
    devs = [savare_dyadic_means(n, 2)["max_deviation"] for n in range(0, 5)]
    assert devs[-1] < 1e-9
    assert devs[0] > 0.5


# -- geometry ------------------------------------------------------------------------

def test_drop_arc_has_cusp():
    arc = drop_arc((0.0, 0.0), DropShape(1.0, 0.3, None), 0.01, +1)
    assert np.allclose(arc[0], 0.0) and np.allclose(arc[-1], 0.0)
    t0 = arc[1] - arc[0]
    t1 = arc[-2] - arc[-1]
    # both branches leave the cusp in the same direction
    cos = np.dot(t0, t1) / np.linalg.norm(t0) / np.linalg.norm(t1)
    assert cos > 0.98


def test_bent_horn_curvature_resolved():
    arc = drop_arc((0.0, 0.0), DropShape(), 0.01, +1)
    assert np.abs(polyline_curvature(arc)).max() < 40


# -- fixtures ------------------------------------------------------------------------

def test_fixture_names(fixtures):
    assert set(fixtures) == set(FIXTURE_NAMES)
    with pytest.raises(KeyError):
        build_figure_examples(["nope"])


def test_fixtures_deterministic(fixtures):
    again = build_figure_examples(["fig5_nesting"])["fig5_nesting"]
    a = to_document(fixtures["fig5_nesting"].objects["gamma2"])
    assert to_document(again.objects["gamma2"]) == a


def test_fixture_b_verdicts(fixtures):
    out = evaluate_fixture(fixtures["fig5_nesting"])
    assert out["verdicts"]["gamma1_gamma2"]["failed"] == ["condition_iii"]
    assert out["verdicts"]["gamma3_gamma2"]["failed"] == []
    assert out["verdicts"]["gamma4_gamma2"]["failed"] == ["condition_ii"]


def test_fixture_c_gap(fixtures):
    fx = fixtures["fig9_two_level"]
    out = evaluate_fixture(fx)
    assert out["best"] == "bridged"
    assert "unbridged" in out["rejected"]
    assert out["gap"] >= fx.expected["gap_at_least"]


def test_fixture_d_whole_plane_vs_omega(fixtures):
    for name in ("fig10_drop_in_omega", "fig11_double_drop"):
        out = evaluate_fixture(fixtures[name])
        assert math.isinf(out["whole_plane"])
        assert math.isfinite(out["in_omega"]) and out["in_omega"] > 0
    assert evaluate_fixture(fixtures["fig11_double_drop"])["whole_plane_flags"]["corners"]


def test_fig6_bridge_term(fixtures):
    out = evaluate_fixture(fixtures["fig6_drop_pair"])
    assert out["paired"] - out["arcs_only"] == pytest.approx(2.0, abs=1e-12)
    assert math.isinf(out["without_pair"])


def test_fixture_a_staircase(fixtures):
    table = staircase_table(fixtures["fig1_staircase"])
    F = [row["F"] for row in table]
    L1 = [row["L1"] for row in table]
    # energies bounded (and settling towards the relaxed value), L1 distance halving
    assert max(F) < 3 * min(F)
    assert F[0] > F[1] > F[2]
    for a, b in zip(L1, L1[1:]):
        assert 0.5 * 0.7 <= b / a <= 0.5 * 1.3


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixture_json_round_trip(fixtures, name):
    for key, obj in fixtures[name].objects.items():
        doc = to_document(obj)
        text = json.dumps(doc)
        back = from_document(json.loads(text))
        assert json.dumps(to_document(back)) == text, key


def test_export_writes_manifest_and_pgm(tmp_path, fixtures):
    manifest = export_fixtures({"fig9_two_level": fixtures["fig9_two_level"]}, tmp_path)
    assert (tmp_path / "manifest.json").exists()
    assert (tmp_path / "figEF.json").exists() and (tmp_path / "figEF.pgm").exists()
    u = fixtures["fig9_two_level"].objects["u"]
    img = read_pgm(tmp_path / "figEF.pgm")
    assert np.array_equal(np.rint(img.values * u.vmax), u.values)
    assert img.spacing == u.spacing and img.origin == u.origin
    assert manifest["fixtures"]["fig9_two_level"]["files"]["u"] == "figEF.json"
