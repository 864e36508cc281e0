"""File formats: JSON documents, PGM images and CSV reports.

Every JSON document written here carries ``"format": 1`` and a ``"type"``
tag; readers accept documents without them (hand-written inputs) but reject
other format versions.  Floats are written with ``repr`` precision, so JSON
round trips are bit-exact.

PGM images (``P2`` ASCII or ``P5`` binary, ``maxval <= 65535``) are read
into ``[0, 1]``.  Grid geometry is not part of the PGM format; it is stored
in a header comment ``# elastica spacing=<h> origin=<x>,<y>`` which the
reader honours when present (default: unit square, origin at 0).
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path

import numpy as np

from .curve_core import Curve
from .curve_systems import CurveSystem
from .errors import ValidationError
from .grid_function import GridFunction
from .nesting import LevelFamily
from .relaxed_sets import CuspedSet, Omega

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

__all__ = [
    "FORMAT_VERSION",
    "curve_to_json", "curve_from_json",
    "system_to_json", "system_from_json",
    "grid_to_json", "grid_from_json",
    "family_to_json", "family_from_json",
    "cusped_to_json", "cusped_from_json",
    "omega_to_json", "omega_from_json",
    "to_document", "from_document",
    "read_json", "write_json", "load",
    "read_pgm", "write_pgm",
]


def _points(arr) -> list:
    return [[float(x), float(y)] for x, y in np.asarray(arr, dtype=float)]


def _check(doc, kind: str, required) -> dict:
    if not isinstance(doc, dict):
        raise ValidationError(f"{kind} JSON: expected an object, got {type(doc).__name__}")
    version = doc.get("format", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ValidationError(f"{kind} JSON: unsupported format {version!r} (expected {FORMAT_VERSION})")
    tag = doc.get("type", kind)
    if tag != kind:
        raise ValidationError(f"{kind} JSON: document has type {tag!r}")
    missing = [k for k in required if k not in doc]
    if missing:
        raise ValidationError(f"{kind} JSON: missing field(s) {', '.join(missing)}")
    return doc


def _array(value, kind: str, what: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{kind} JSON: {what} must be numeric ({exc})") from None
    return arr


# -- curves and systems -------------------------------------------------------


def curve_to_json(curve: Curve) -> dict:
    out = {"format": FORMAT_VERSION, "type": "curve", "points": _points(curve.points), "closed": True}
    if curve.length != curve.perimeter:
        out["length"] = float(curve.length)  # represented length, kept through resampling
    return out


def curve_from_json(doc) -> Curve:
    doc = _check(doc, "curve", ("points",))
    if doc.get("closed", True) is not True:
        raise ValidationError('curve JSON: only closed curves are supported ("closed": false given)')
    length = doc.get("length")
    return Curve(_array(doc["points"], "curve", "points"), None if length is None else float(length))


def system_to_json(system: CurveSystem) -> dict:
    out = {"format": FORMAT_VERSION, "type": "system",
           "curves": [curve_to_json(c) for c in system.curves],
           "multiplicities": list(system.multiplicities)}
    if system.doubled:
        out["doubled"] = [_points(p) for p in system.doubled]
    return out


def system_from_json(doc) -> CurveSystem:
    doc = _check(doc, "system", ("curves",))
    curves = [curve_from_json(c) for c in doc["curves"]]
    mult = doc.get("multiplicities") or ()
    doubled = [_array(p, "system", "doubled paths") for p in doc.get("doubled", [])]
    return CurveSystem(curves, mult, doubled)


# -- grids ------------------------------------------------------------------------


def grid_to_json(u: GridFunction) -> dict:
    return {"format": FORMAT_VERSION, "type": "grid", "spacing": float(u.spacing),
            "origin": [float(u.origin[0]), float(u.origin[1])],
            "values": [[float(v) for v in row] for row in u.values]}


def grid_from_json(doc) -> GridFunction:
    doc = _check(doc, "grid", ("spacing", "values"))
    origin = doc.get("origin", [0.0, 0.0])
    return GridFunction(_array(doc["values"], "grid", "values"), float(doc["spacing"]),
                        (float(origin[0]), float(origin[1])))


# -- level families -------------------------------------------------------------


def family_to_json(phi: LevelFamily) -> dict:
    return {"format": FORMAT_VERSION, "type": "family", "range": [phi.range[0], phi.range[1]],
            "slabs": [{"t": t, "system": system_to_json(s)}
                      for t, s in zip(phi.thresholds, phi.systems)]}


def family_from_json(doc) -> LevelFamily:
    doc = _check(doc, "family", ("range", "slabs"))
    slabs = doc["slabs"]
    return LevelFamily([float(s["t"]) for s in slabs],
                       [system_from_json(s["system"]) for s in slabs],
                       tuple(float(v) for v in doc["range"]))


# -- cusped sets and domains ------------------------------------------------------


def cusped_to_json(cset: CuspedSet) -> dict:
    return {"format": FORMAT_VERSION, "type": "cusped", "arcs": [_points(a) for a in cset.arcs],
            "cusp_pairs": [[list(a), list(b)] for a, b in cset.cusp_pairs]}


def cusped_from_json(doc) -> CuspedSet:
    doc = _check(doc, "cusped", ("arcs",))
    arcs = [_array(a, "cusped", "arcs") for a in doc["arcs"]]
    return CuspedSet(arcs, doc.get("cusp_pairs", []))


def omega_to_json(omega: Omega) -> dict:
    return {"format": FORMAT_VERSION, "type": "omega", "polygon": _points(omega.polygon)}


def omega_from_json(doc) -> Omega:
    doc = _check(doc, "omega", ("polygon",))
    return Omega(_array(doc["polygon"], "omega", "polygon"))


# -- dispatch ---------------------------------------------------------------------

_WRITERS = [(Curve, curve_to_json), (CurveSystem, system_to_json), (GridFunction, grid_to_json),
            (LevelFamily, family_to_json), (CuspedSet, cusped_to_json), (Omega, omega_to_json)]
_READERS = {"curve": curve_from_json, "system": system_from_json, "grid": grid_from_json,
            "family": family_from_json, "cusped": cusped_from_json, "omega": omega_from_json}


def to_document(obj) -> dict:
    for cls, writer in _WRITERS:
        if isinstance(obj, cls):
            return writer(obj)
    if hasattr(obj, "to_json"):
        return {"format": FORMAT_VERSION, **obj.to_json()}
    raise TypeError(f"to_document: no JSON format for {type(obj).__name__}")


def _guess_type(doc: dict) -> str:
    if "type" in doc:
        return doc["type"]
    for key, kind in (("slabs", "family"), ("curves", "system"), ("arcs", "cusped"),
                      ("polygon", "omega"), ("values", "grid"), ("points", "curve")):
        if key in doc:
            return kind
    raise ValidationError("JSON document: cannot tell what it describes (no 'type' field)")


def from_document(doc):
    if not isinstance(doc, dict):
        raise ValidationError("JSON document: expected an object at the top level")
    kind = _guess_type(doc)
    if kind not in _READERS:
        raise ValidationError(f"JSON document: unknown type {kind!r}")
    return _READERS[kind](doc)


def write_json(path, obj_or_doc) -> None:
    doc = obj_or_doc if isinstance(obj_or_doc, dict) else to_document(obj_or_doc)
    Path(path).write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n")


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"read_json: {path} is not valid JSON ({exc})") from None


def load(path):
    """Read a JSON document or PGM image and build the matching object."""
    if str(path).lower().endswith(".pgm"):
        return read_pgm(path)
    return from_document(read_json(path))


# -- PGM --------------------------------------------------------------------------

_GEOMETRY = re.compile(r"elastica\s+spacing=(\S+)\s+origin=(\S+),(\S+)")


def _tokens(data: bytes, count: int):
    """First ``count`` header tokens, the comments seen, and the offset after the last token."""
    tokens, comments, i = [], [], 0
    while len(tokens) < count:
        if i >= len(data):
            raise ValidationError("read_pgm: truncated header")
        c = data[i:i + 1]
        if c == b"#":
            j = data.find(b"\n", i)
            j = len(data) if j < 0 else j
            comments.append(data[i + 1:j].decode("ascii", "replace").strip())
            i = j + 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            tokens.append(data[i:j].decode("ascii", "replace"))
            i = j
    return tokens, comments, i


def read_pgm(path, spacing: float | None = None, origin=None) -> GridFunction:
    """Read a PGM (P2/P5) image into a :class:`GridFunction` with values in ``[0, 1]``.

    The first image row is the *top* of the picture and maps to the largest
    ``y``.  ``spacing`` / ``origin`` override the header comment.
    """
    data = Path(path).read_bytes()
    tokens, comments, offset = _tokens(data, 4)
    magic, width, height, maxval = tokens
    if magic not in ("P2", "P5"):
        raise ValidationError(f"read_pgm: {path} is not a PGM file (magic {magic!r})")
    try:
        width, height, maxval = int(width), int(height), int(maxval)
    except ValueError:
        raise ValidationError(f"read_pgm: {path} has a malformed header") from None
    if not (0 < maxval <= 65535) or width <= 0 or height <= 0:
        raise ValidationError(f"read_pgm: {path} has invalid size or maxval {maxval}")
    n = width * height
    if magic == "P2":
        body = re.sub(rb"#[^\n]*", b"", data[offset:]).split()
        if len(body) < n:
            raise ValidationError(f"read_pgm: {path} holds {len(body)} samples, expected {n}")
        raw = np.array([int(v) for v in body[:n]], dtype=np.int64)
    else:
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        start = offset + 1  # one whitespace byte after maxval
        raw = np.frombuffer(data, dtype=dtype, count=n, offset=start) if len(data) - start >= n * dtype.itemsize else None
        if raw is None:
            raise ValidationError(f"read_pgm: {path} is truncated")
    if raw.max(initial=0) > maxval:
        raise ValidationError(f"read_pgm: {path} has samples above maxval {maxval}")
    values = (raw.reshape(height, width)[::-1] / maxval).astype(float)
    h, o = 1.0 / (max(width, height) - 1), (0.0, 0.0)
    for c in comments:
        m = _GEOMETRY.search(c)
        if m:
            h, o = float(m.group(1)), (float(m.group(2)), float(m.group(3)))
    if spacing is not None:
        h = float(spacing)
    if origin is not None:
        o = (float(origin[0]), float(origin[1]))
    return GridFunction(values, h, o)


def write_pgm(path, u: GridFunction, maxval: int = 65535, binary: bool = True,
              value_range=None) -> None:
    """Write ``u`` as a PGM image, mapping ``value_range`` (default ``[min u, max u]``) to ``[0, maxval]``.

    Values are rounded to the nearest level; choose ``maxval`` so that the
    values of a piecewise-constant ``u`` land on exact levels.
    """
    if not (0 < maxval <= 65535):
        raise ValidationError(f"write_pgm: maxval must be in 1..65535, got {maxval}")
    lo, hi = value_range if value_range is not None else (u.vmin, u.vmax)
    span = hi - lo if hi > lo else 1.0
    q = np.rint(np.clip((u.values - lo) / span, 0.0, 1.0) * maxval).astype(np.int64)[::-1]
    height, width = q.shape
    header = (f"{'P5' if binary else 'P2'}\n"
              f"# elastica spacing={u.spacing!r} origin={u.origin[0]!r},{u.origin[1]!r}\n"
              f"{width} {height}\n{maxval}\n").encode("ascii")
    if binary:
        body = q.astype(">u2" if maxval > 255 else "u1").tobytes()
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in q).encode("ascii") + b"\n"
    Path(path).write_bytes(header + body)
