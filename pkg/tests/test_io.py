import json

import numpy as np
import pytest

from elastica_coarea.curve_core import Curve, circle, resample_arclength
from elastica_coarea.curve_systems import CurveSystem
from elastica_coarea.errors import ValidationError
from elastica_coarea.grid_function import GridFunction
from elastica_coarea.io import (
    from_document, load, read_json, read_pgm, to_document, write_json, write_pgm,
)
from elastica_coarea.nesting import LevelFamily
from elastica_coarea.relaxed_sets import CuspedSet, Omega


def round_trip(obj):
    return from_document(json.loads(json.dumps(to_document(obj))))


def test_curve_round_trip_keeps_length():
    c = resample_arclength(circle(1.0, 4096), 64)
    back = round_trip(c)
    assert np.array_equal(back.points, c.points) and back.length == c.length


def test_system_round_trip_with_doubled_path():
    s = CurveSystem([circle(), circle(0.5)], [1, 3], doubled=[[[0, 0], [1, 1], [2, 0]]])
    back = round_trip(s)
    assert back.multiplicities == (1, 3)
    assert np.array_equal(back.doubled[0], s.doubled[0])


def test_family_and_cusped_and_omega_round_trip():
    fam = LevelFamily([0.0, 0.5], [CurveSystem([circle()]), CurveSystem([circle(0.5)])], (0.0, 1.0))
    assert round_trip(fam).thresholds == fam.thresholds
    cs = CuspedSet([[[0, 0], [1, 1], [2, 0]]])
    assert np.array_equal(round_trip(cs).arcs[0], cs.arcs[0])
    om = Omega.rectangle(0, 0, 1, 2)
    assert np.array_equal(round_trip(om).polygon, om.polygon)


def test_untyped_documents_are_recognised():
    assert isinstance(from_document({"points": [[0, 0], [1, 0], [0, 1]]}), Curve)
    assert isinstance(from_document({"spacing": 0.5, "values": np.zeros((8, 8)).tolist()}), GridFunction)


@pytest.mark.parametrize("doc", [
    {"format": 2, "type": "curve", "points": [[0, 0], [1, 0], [0, 1]]},
    {"type": "curve"},
    {"type": "curve", "points": [[0, 0], [1, 0], [0, 1]], "closed": False},
    {"type": "wat"},
    {"nothing": 1},
    {"type": "grid", "spacing": 1.0, "values": [["a"]]},
])
def test_schema_errors(doc):
    with pytest.raises(ValidationError):
        from_document(doc)


def test_read_json_invalid(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ValidationError):
        read_json(p)


def test_write_and_load_json(tmp_path):
    p = tmp_path / "c.json"
    write_json(p, circle(2.0, 32))
    assert read_json(p)["format"] == 1
    assert isinstance(load(p), Curve)


# -- PGM -----------------------------------------------------------------------------

@pytest.mark.parametrize("binary", [True, False])
@pytest.mark.parametrize("maxval", [2, 255, 65535])
def test_pgm_round_trip(tmp_path, binary, maxval):
    rng = np.random.default_rng(maxval)
    levels = rng.integers(0, maxval + 1, (9, 12))
    levels[0, 0], levels[-1, -1] = 0, maxval
    u = GridFunction(levels / maxval, 0.25, (-1.0, 2.0))
    p = tmp_path / "u.pgm"
    write_pgm(p, u, maxval=maxval, binary=binary)
    back = read_pgm(p)
    assert np.array_equal(back.values, u.values)
    assert back.spacing == 0.25 and back.origin == (-1.0, 2.0)
    assert p.read_bytes()[:2] == (b"P5" if binary else b"P2")


def test_pgm_first_row_is_top(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_text("P2\n8 8\n1\n" + "1 " * 8 + "\n" + "0 " * 56 + "\n")
    u = read_pgm(p)
    assert u.values[-1].tolist() == [1.0] * 8 and u.values[0].sum() == 0
    assert u.spacing == pytest.approx(1 / 7)


def test_pgm_comments_anywhere(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_text("P2\n# hello\n8 # width\n8\n# more\n4\n" + "2 " * 64 + "\n")
    assert np.all(read_pgm(p, spacing=0.1).values == 0.5)


def test_pgm_spacing_override(tmp_path):
    u = GridFunction(np.eye(8), 0.5)
    p = tmp_path / "e.pgm"
    write_pgm(p, u)
    assert read_pgm(p, spacing=2.0, origin=(1, 1)).spacing == 2.0


@pytest.mark.parametrize("content", [
    b"P3\n8 8\n255\n",
    b"P2\n8 8\n70000\n" + b"0 " * 64,
    b"P2\n8 8\n3\n" + b"1 " * 10,
    b"P5\n8 8\n255\n" + bytes(10),
    b"P2\n8 8\n3\n" + b"9 " * 64,
    b"P2\n8",
])
def test_pgm_malformed(tmp_path, content):
    p = tmp_path / "bad.pgm"
    p.write_bytes(content)
    with pytest.raises(ValidationError):
        read_pgm(p)


def test_write_pgm_rejects_maxval(tmp_path):
    with pytest.raises(ValidationError):
        write_pgm(tmp_path / "x.pgm", GridFunction(np.zeros((8, 8))), maxval=70000)
