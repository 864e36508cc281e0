import json
import math

import numpy as np
import pytest

from elastica_coarea import cli
from elastica_coarea.curve_core import circle
from elastica_coarea.grid_function import GridFunction
from elastica_coarea.io import write_json, write_pgm
from elastica_coarea.reports import EnergyReport


def run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture()
def bump_pgm(tmp_path):
    u = GridFunction.sample(lambda x, y: np.maximum(0.0, 1.0 - 2 * np.hypot(x, y)) ** 2,
                            (-1, -1, 1, 1), 128)
    p = tmp_path / "bump.pgm"
    write_pgm(p, u)
    return p


def test_energy_curve_unit_circle(capsys):
    code, out, _ = run(capsys, "energy-curve", "circle.json", "--p", "2")
    assert code == 0
    assert out.strip().startswith("12.566")
    assert abs(float(out) - 4 * math.pi) < 1e-2


def test_energy_curve_csv_output(capsys, tmp_path):
    dest = tmp_path / "e.csv"
    code, _, _ = run(capsys, "energy-curve", "circle.json", "-o", str(dest))
    assert code == 0
    rep = EnergyReport.from_csv(dest.read_text())
    assert rep.total == pytest.approx(4 * math.pi, rel=1e-2)


def test_fixture_dir_env(capsys, tmp_path, monkeypatch):
    write_json(tmp_path / "big.json", circle(2.0, 1024))
    monkeypatch.setenv("ELASTICA_FIXTURES", str(tmp_path))
    code, out, _ = run(capsys, "energy-curve", "big.json")
    assert code == 0 and float(out) == pytest.approx(2 * math.pi * 2 * 1.25, rel=1e-3)


def test_energy_image(capsys, bump_pgm):
    code, out, _ = run(capsys, "energy-image", str(bump_pgm), "--n-levels", "32")
    assert code == 0
    lines = dict(line.split() for line in out.splitlines())
    assert set(lines) == {"coarea", "divergence"}
    assert float(lines["coarea"]) > 0 and float(lines["divergence"]) > 0


def test_check_family_fig5(capsys):
    code, out, _ = run(capsys, "check-family", "fig5_gamma1_gamma2.json", "figEF.pgm")
    assert code == 0
    doc = json.loads(out)
    assert doc["condition_iii"]["pass"] is False
    assert doc["is_member"] is False
    assert doc["condition_iii"]["witnesses"]


def test_compare_fig9(capsys):
    code, out, _ = run(capsys, "compare", "fig5_gamma1_gamma2.json", "fig5_gamma3_gamma2.json", "figEF.pgm")
    assert code == 0
    assert out.startswith("best fig5_gamma3_gamma2.json")


def test_savare(capsys, tmp_path):
    dest = tmp_path / "s.json"
    code, out, _ = run(capsys, "savare", "--n", "3", "-o", str(dest))
    assert code == 0
    assert "< 1.5: True" in out and "slab pattern ok" in out
    doc = json.loads(dest.read_text())
    assert doc["below_bound"] and doc["l2_defect"] == pytest.approx(0.5, abs=1e-6)
    assert abs(doc["weak_gaps"]["t_n4"] / doc["weak_gaps"]["t_n3"] - 0.5) < 0.1


def test_offset(capsys):
    code, out, _ = run(capsys, "offset", "circle.json", "--delta", "0.5")
    assert code == 0
    vals = dict(line.split() for line in out.splitlines())
    assert float(vals["measured"]) == pytest.approx(float(vals["predicted"]), rel=1e-3)


def test_offset_singular_exit_3(capsys):
    code, _, err = run(capsys, "offset", "circle.json", "--delta", "-1")
    assert code == 3
    assert err.startswith("error: offset:")


def test_smooth(capsys, tmp_path):
    dest = tmp_path / "study.csv"
    code, out, _ = run(capsys, "smooth", "circle.json", "--collar", "0.4", "0.3", "--resolution", "256",
                       "--n-levels", "32", "-o", str(dest))
    assert code == 0
    assert dest.read_text().splitlines()[0] == "collar,F_coarea,target,abs_error"
    assert len(out.splitlines()) == 2


def test_relaxed_cusped(capsys):
    code, out, _ = run(capsys, "relaxed-cusped", "fig6_drop_pair_drops.json")
    assert code == 0 and float(out.splitlines()[0]) == pytest.approx(44.0036, abs=1e-3)


def test_relaxed_cusped_unpaired_flag(capsys):
    code, out, _ = run(capsys, "relaxed-cusped", "fig10_drop_in_omega_drop.json")
    assert code == 0
    assert out.splitlines()[0] == "inf" and "flag unpaired_cusps" in out


def test_clip(capsys):
    code, out, _ = run(capsys, "clip", "fig10_drop_in_omega_candidate.json", "fig10_drop_in_omega_omega.json")
    assert code == 0 and math.isfinite(float(out))


def test_gallery_single(capsys):
    code, out, _ = run(capsys, "gallery", "fig6_drop_pair")
    assert code == 0 and out.startswith("fig6_drop_pair: ")


def test_missing_file_exit_2(capsys):
    code, _, err = run(capsys, "energy-curve", "does-not-exist.json")
    assert code == 2 and "energy-curve" in err


def test_bad_arguments_exit_2(capsys):
    assert run(capsys, "energy-curve")[0] == 2
    assert run(capsys, "no-such-command")[0] == 2
    assert run(capsys, "savare", "--n", "-1")[0] == 2
    assert run(capsys, "gallery", "nope")[0] == 2


def test_wrong_document_type_exit_2(capsys):
    code, _, err = run(capsys, "check-family", "circle.json", "figEF.pgm")
    assert code == 2 and "not a level family" in err


def test_open_contour_exit_3(capsys, tmp_path):
    p = tmp_path / "ramp.pgm"
    write_pgm(p, GridFunction.sample(lambda x, y: x, (0, 0, 1, 1), 32))
    code, _, err = run(capsys, "energy-image", str(p))
    assert code == 3 and "energy-image" in err


def test_deterministic_output(capsys, tmp_path, bump_pgm):
    outs = []
    for threads in ("1", "1", "4"):
        dest = tmp_path / f"r{len(outs)}.csv"
        code, out, _ = run(capsys, "energy-image", str(bump_pgm), "--n-levels", "32",
                           "--threads", threads, "-o", str(dest))
        assert code == 0
        outs.append((out, dest.read_bytes()))
    assert outs[0] == outs[1] == outs[2]


def test_help_per_subcommand(capsys):
    assert run(capsys, "savare", "--help")[0] == 0
