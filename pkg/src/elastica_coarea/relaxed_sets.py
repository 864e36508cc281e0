"""Relaxed energies of cusped sets, the coarea lower bound, and energies localized to a domain.

Cusped sets
-----------
A set whose boundary is smooth except at cusps has finite relaxed energy
when its cusps can be paired: the boundary arcs are completed by straight
"ghost bridges" joining paired cusps, each traversed twice.  The energy is

.. math::  \\alpha \\,\\mathrm{length(arcs)} + \\beta \\int_{arcs} |k|^p
           + 2 \\alpha \\sum_{pairs} |b - a|.

An unpaired cusp makes the energy infinite.

Localized energies
------------------
:func:`clip_energy` counts only the parts of level lines inside an open
polygonal domain ``Omega``.  Curvature values come from the uncut curve; a
segment cut by ``dOmega`` contributes its inside fraction to the dual weights
of both of its vertices.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .curve_core import Curve, ElasticaParams, curvature_samples, polyline_curvature, polyline_energy
from .curve_systems import CurveSystem, winding_numbers
from .errors import BridgeCrossing, ValidationError
from .grid_function import GridFunction, LevelSetExtraction
from .reports import EnergyReport, LevelRow

logger = logging.getLogger(__name__)

__all__ = [
    "CuspedSet",
    "ClippedArc",
    "Omega",
    "relaxed_energy_cusped",
    "coarea_lower_bound",
    "clip_energy",
    "canonical_omega",
]


def _unit(v):
    n = np.hypot(v[0], v[1])
    return v / n if n > 0 else v


def _angle_between_lines(u, v) -> float:
    """Unoriented angle in ``[0, pi/2]`` between the lines spanned by ``u`` and ``v``."""
    c = abs(float(np.dot(_unit(u), _unit(v))))
    return float(np.arccos(min(c, 1.0)))


@dataclass(frozen=True, eq=False)
class CuspedSet:
    """Boundary arcs of a set with cusps, and the cusp pairs to be bridged.

    Parameters
    ----------
    arcs : sequence of (n, 2) array_like
        Open polylines, each oriented with the set on its left.  An arc may
        start and end at the same cusp (a drop).
    cusp_pairs : sequence of ((x, y), (x, y))
        Cusps joined by a ghost bridge; each point must be an arc endpoint.
    bbox : (xmin, ymin, xmax, ymax), optional
    angle_tol : float
        Tolerance (radians) for the cusp and bridge tangency conditions.

    Notes
    -----
    The arc ends meeting at a point form a *cusp* when their outgoing
    tangents are parallel (both branches leave in the same direction).
    Unpaired cusps are recorded in :attr:`unpaired_cusps`; points where two
    ends meet along non-parallel tangent lines are recorded in
    :attr:`corners` (no continuous unoriented tangent there).
    """

    arcs: tuple
    cusp_pairs: tuple = ()
    bbox: tuple | None = None
    angle_tol: float = 0.15
    unpaired_cusps: tuple = field(default=(), init=False)
    corners: tuple = field(default=(), init=False)

    def __post_init__(self):
        arcs = []
        for a in self.arcs:
            arr = np.array(a, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 3:
                raise ValidationError("CuspedSet: every arc needs at least 3 points")
            if not np.all(np.isfinite(arr)):
                raise ValidationError("CuspedSet: arc coordinates must be finite")
            keep = np.ones(len(arr), dtype=bool)
            keep[1:] = np.any(arr[1:] != arr[:-1], axis=1)
            arr = arr[keep]
            if len(arr) < 3:
                raise ValidationError("CuspedSet: arc collapses to fewer than 3 distinct points")
            arr.setflags(write=False)
            arcs.append(arr)
        pairs = []
        for pair in self.cusp_pairs:
            pa = np.array(pair, dtype=float)
            if pa.shape != (2, 2):
                raise ValidationError("CuspedSet: a cusp pair is two 2-D points")
            pairs.append((tuple(pa[0]), tuple(pa[1])))
        object.__setattr__(self, "arcs", tuple(arcs))
        object.__setattr__(self, "cusp_pairs", tuple(pairs))
        if not arcs:
            raise ValidationError("CuspedSet: at least one arc is required")
        self._validate()

    # -- geometry of the arc ends ------------------------------------------------
    @property
    def scale(self) -> float:
        pts = np.vstack(self.arcs)
        return max(float(np.ptp(pts, axis=0).max()), 1e-12)

    @property
    def snap_tol(self) -> float:
        return 1e-9 * self.scale

    def ends(self) -> list:
        """``(point, outgoing unit tangent, arc index, 0 for start / 1 for end)`` of every arc end."""
        out = []
        for i, a in enumerate(self.arcs):
            out.append((a[0], _unit(a[1] - a[0]), i, 0))
            out.append((a[-1], _unit(a[-2] - a[-1]), i, 1))
        return out

    def ends_at(self, point) -> list:
        q = np.asarray(point, dtype=float)
        return [e for e in self.ends() if np.hypot(*(e[0] - q)) <= self.snap_tol]

    def _validate(self):
        paired = set()
        for a, b in self.cusp_pairs:
            for q in (a, b):
                if not self.ends_at(q):
                    raise ValidationError(f"CuspedSet: cusp {q} is not an arc endpoint")
            direction = np.subtract(b, a)
            degenerate = np.hypot(*direction) <= self.snap_tol
            for q in (a, b):
                ends = self.ends_at(q)
                if len(ends) == 2 and np.dot(ends[0][1], ends[1][1]) < 0:
                    raise ValidationError(f"CuspedSet: the arcs meeting at {q} do not form a cusp")
                for e in ends:
                    if len(ends) == 2 and _angle_between_lines(ends[0][1], ends[1][1]) > self.angle_tol:
                        raise ValidationError(
                            f"CuspedSet: end tangents at cusp {q} are not parallel within {self.angle_tol:g} rad")
                    if not degenerate and _angle_between_lines(e[1], direction) > self.angle_tol:
                        raise ValidationError(
                            f"CuspedSet: the bridge at {q} is not tangent to arc {e[2]}")
                paired.add(self._key(q))
        # unpaired cusps: two arc ends leaving a common point in the same direction
        unpaired, corners, seen = [], [], set()
        for p, _, _, _ in self.ends():
            key = self._key(p)
            if key in seen:
                continue
            seen.add(key)
            ends = self.ends_at(p)
            if len(ends) < 2:
                continue
            point = tuple(float(v) for v in p)
            ref = ends[0][1]
            if any(_angle_between_lines(ref, e[1]) > self.angle_tol for e in ends[1:]):
                corners.append(point)
                continue
            # ends leaving in opposite directions join smoothly; a surplus on one side is a cusp
            forward = sum(1 for e in ends if np.dot(ref, e[1]) > 0)
            if key not in paired and forward != len(ends) - forward:
                unpaired.append(point)
        object.__setattr__(self, "unpaired_cusps", tuple(unpaired))
        object.__setattr__(self, "corners", tuple(corners))

    def _key(self, q):
        r = self.snap_tol * 10
        return (round(q[0] / r), round(q[1] / r)) if r > 0 else tuple(q)

    def with_pairs(self, cusp_pairs) -> "CuspedSet":
        return CuspedSet(self.arcs, cusp_pairs, self.bbox, self.angle_tol)


def _proper_crossings(a0, a1, b0, b1) -> np.ndarray:
    """Boolean matrix: does segment ``a`` properly cross segment ``b`` (not merely touch)?"""
    def orient(p, q, r):
        return ((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
                - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))
    A0, A1 = a0[:, None, :], a1[:, None, :]
    B0, B1 = b0[None, :, :], b1[None, :, :]
    d1, d2 = orient(A0, A1, B0), orient(A0, A1, B1)
    d3, d4 = orient(B0, B1, A0), orient(B0, B1, A1)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def _check_bridges(cset: CuspedSet):
    segs = [(a[:-1], a[1:]) for a in cset.arcs]
    a0 = np.vstack([s[0] for s in segs])
    a1 = np.vstack([s[1] for s in segs])
    verts = np.vstack(cset.arcs)
    for pa, pb in cset.cusp_pairs:
        pa, pb = np.asarray(pa), np.asarray(pb)
        if np.hypot(*(pb - pa)) <= cset.snap_tol:
            continue
        hit = _proper_crossings(pa[None], pb[None], a0, a1)[0]
        if hit.any():
            k = int(np.flatnonzero(hit)[0])
            raise BridgeCrossing(
                f"relaxed_energy_cusped: bridge {tuple(pa)}-{tuple(pb)} crosses an arc near "
                f"{tuple(0.5 * (a0[k] + a1[k]))}")
        # an arc vertex lying on the open bridge is a (non-proper) crossing too
        d = pb - pa
        rel = verts - pa
        s = rel @ d / (d @ d)
        off = np.abs(rel[:, 0] * d[1] - rel[:, 1] * d[0]) / np.hypot(*d)
        reach = cset.snap_tol / np.hypot(*d)
        on = (off <= cset.snap_tol) & (s > reach) & (s < 1.0 - reach)
        if on.any():
            raise BridgeCrossing(
                f"relaxed_energy_cusped: bridge {tuple(pa)}-{tuple(pb)} touches an arc at "
                f"{tuple(verts[int(np.flatnonzero(on)[0])])}")


def _bridge_points(a, b, spacing):
    n = max(2, int(math.ceil(np.hypot(*(b - a)) / spacing)) + 1)
    s = np.linspace(0.0, 1.0, n)[:, None]
    return a + s * (b - a)


def _chain(cset: CuspedSet, spacing: float):
    """Walk arcs and bridges into closed C^1 loops; None if they do not close up.

    From the end of an arc at a paired cusp the walk crosses the bridge and
    continues with the unused arc leaving the partner cusp in the direction of
    travel.  Every arc is used once and every bridge twice (once each way).
    """
    partner = {}
    for a, b in cset.cusp_pairs:
        partner.setdefault(cset._key(a), []).append(np.asarray(b))
        partner.setdefault(cset._key(b), []).append(np.asarray(a))
    used = [False] * len(cset.arcs)
    loops = []
    for start in range(len(cset.arcs)):
        if used[start]:
            continue
        pieces, i = [], start
        while True:
            used[i] = True
            arc = cset.arcs[i]
            pieces.append(arc[:-1])
            end, heading = arc[-1], _unit(arc[-1] - arc[-2])
            nxt = None
            # continue directly with an arc starting here (smooth junction) ...
            for p, tangent, j, which in cset.ends_at(end):
                if which == 0 and np.dot(tangent, heading) > 0 and (not used[j] or j == start):
                    nxt = (j, None)
                    break
            # ... or cross a bridge and continue from the partner cusp
            if nxt is None:
                for q in partner.get(cset._key(end), []):
                    d = q - end
                    if np.hypot(*d) > cset.snap_tol and np.dot(d, heading) <= 0:
                        continue
                    for p, tangent, j, which in cset.ends_at(q):
                        if which == 0 and (not used[j] or j == start):
                            nxt = (j, q)
                            break
                    if nxt is not None:
                        break
            if nxt is None:
                return None
            j, q = nxt
            if q is not None and np.hypot(*(q - end)) > cset.snap_tol:
                pieces.append(_bridge_points(end, q, spacing)[:-1])
            if j == start:
                break
            i = j
        loops.append(np.vstack(pieces))
    return loops


def relaxed_energy_cusped(cset: CuspedSet, params: ElasticaParams = ElasticaParams()) -> EnergyReport:
    """Relaxed energy of a cusped set: arcs plus doubled ghost bridges.

    Rows: one per arc (``level`` = arc index), then one per bridge (``level``
    continues the numbering, zero curvature, length counted twice).  ``extra``
    holds the minimizing :class:`CurveSystem` -- closed loops chaining arcs and
    bridges -- when the arcs and bridges close up, else ``None`` with
    ``flags["open"]``.  Unpaired cusps and corners make the total infinite
    (flags ``unpaired_cusps`` / ``corners``).

    Raises
    ------
    BridgeCrossing
        If a bridge segment crosses an arc.
    """
    _check_bridges(cset)
    rows, total = [], 0.0
    for i, arc in enumerate(cset.arcs):
        L, K = polyline_energy(arc, params, closed=False)
        E = params.alpha * L + params.beta * K
        rows.append(LevelRow(i, 0.0, L, K, E))
        total += E
    for j, (a, b) in enumerate(cset.cusp_pairs):
        L = 2.0 * float(np.hypot(b[0] - a[0], b[1] - a[1]))
        rows.append(LevelRow(len(cset.arcs) + j, 0.0, L, 0.0, params.alpha * L))
        total += params.alpha * L
    report = EnergyReport(rows=rows, meta={"arcs": len(cset.arcs), "bridges": len(cset.cusp_pairs),
                                           "p": params.p, "alpha": params.alpha, "beta": params.beta})
    if cset.unpaired_cusps or cset.corners:
        for name in ("unpaired_cusps", "corners"):
            found = getattr(cset, name)
            if found:
                report.flags[name] = True
                report.meta[name] = [list(c) for c in found]
        report.total = math.inf
        logger.info("relaxed_energy_cusped: %d unpaired cusp(s), %d corner(s); energy is infinite",
                    len(cset.unpaired_cusps), len(cset.corners))
        return report
    report.total = total
    spacing = float(np.median(np.concatenate([np.hypot(*np.diff(a, axis=0).T) for a in cset.arcs])))
    loops = _chain(cset, spacing)
    if loops is None:
        report.flags["open"] = True
    else:
        report.extra = CurveSystem([Curve(loop) for loop in loops])
    return report


# ---------------------------------------------------------------------------
# lower bound


def coarea_lower_bound(u: GridFunction, per_level_relaxed) -> float:
    """Slab-weighted sum ``int W_bar({u > t}) dt`` of per-level relaxed energies.

    Parameters
    ----------
    u : GridFunction
        Fixes the value range ``[min u, max u]``.
    per_level_relaxed : sequence of (t, value)
        Relaxed energies of ``{u > t}`` at representative levels.  Each value
        stands for the slab between the midpoints to its neighbouring levels;
        the first and last slabs extend to ``min u`` and ``max u``.
    """
    items = sorted((float(t), float(v)) for t, v in per_level_relaxed)
    if not items:
        return 0.0
    lo, hi = u.vmin, u.vmax
    ts = np.array([t for t, _ in items])
    vals = np.array([v for _, v in items])
    if np.any(ts < lo) or np.any(ts > hi):
        raise ValidationError("coarea_lower_bound: levels must lie within [min u, max u]")
    if np.any(vals < 0):
        raise ValidationError("coarea_lower_bound: relaxed energies are nonnegative")
    edges = np.concatenate([[lo], 0.5 * (ts[1:] + ts[:-1]), [hi]])
    widths = np.diff(edges)
    total = 0.0
    for w, v in zip(widths, vals):
        if w > 0:
            total += w * v
    return float(total)


# ---------------------------------------------------------------------------
# clipping


@dataclass(frozen=True, eq=False)
class Omega:
    """Open simple polygonal domain."""

    polygon: np.ndarray

    def __post_init__(self):
        poly = np.array(self.polygon, dtype=float)
        if poly.ndim != 2 or poly.shape[1] != 2 or len(poly) < 3:
            raise ValidationError("Omega: a polygon needs at least 3 vertices")
        if np.all(poly[0] == poly[-1]):
            poly = poly[:-1]
        poly.setflags(write=False)
        object.__setattr__(self, "polygon", poly)
        object.__setattr__(self, "_system", CurveSystem([Curve(poly)]))

    @classmethod
    def rectangle(cls, xmin, ymin, xmax, ymax) -> "Omega":
        return cls([[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]])

    def contains(self, points) -> np.ndarray:
        """Membership in the open polygon; points on the boundary are outside."""
        q = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.abs(np.rint(winding_numbers(q, self._system))) % 2 == 1
        if inside.any():
            a, b = self.edges
            d = b - a
            rel = q[inside][:, None, :] - a[None, :, :]
            s = np.clip((rel * d).sum(-1) / np.maximum((d * d).sum(-1), 1e-300), 0.0, 1.0)
            gap = np.hypot(*(rel - s[..., None] * d).transpose(2, 0, 1)).min(axis=1)
            idx = np.flatnonzero(inside)
            inside[idx[gap <= self.boundary_tol]] = False
        return inside

    @property
    def boundary_tol(self) -> float:
        return 1e-9 * float(np.ptp(self.polygon, axis=0).max())

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        return self.polygon, np.roll(self.polygon, -1, axis=0)


def canonical_omega(system_or_family, margin: float = 0.1) -> Omega:
    """Bounding box of all traces enlarged by ``margin`` times its diameter.

    A heuristic choice of a domain compactly containing every level line.
    """
    box = system_or_family.bbox()
    if box is None:
        raise ValidationError("canonical_omega: nothing to enclose")
    xmin, ymin, xmax, ymax = box
    pad = margin * max(math.hypot(xmax - xmin, ymax - ymin), 1e-12)
    return Omega.rectangle(xmin - pad, ymin - pad, xmax + pad, ymax + pad)


@dataclass(frozen=True)
class ClippedArc:
    """Part of a level line inside ``Omega``.

    ``endpoints_on_boundary`` holds the clip points on ``dOmega`` (empty for a
    closed curve lying entirely inside).
    """

    points: np.ndarray
    endpoints_on_boundary: tuple = ()


def _segment_params(p0, p1, omega: Omega) -> np.ndarray:
    """Parameters in (0, 1) where segments ``p0 -> p1`` meet ``dOmega`` (NaN-padded, sorted per row)."""
    e0, e1 = omega.edges
    d = (p1 - p0)[:, None, :]
    r = (e1 - e0)[None, :, :]
    w = e0[None, :, :] - p0[:, None, :]
    den = d[..., 0] * r[..., 1] - d[..., 1] * r[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (w[..., 0] * r[..., 1] - w[..., 1] * r[..., 0]) / den
        v = (w[..., 0] * d[..., 1] - w[..., 1] * d[..., 0]) / den
    ok = (den != 0) & (s > 0) & (s < 1) & (v >= 0) & (v <= 1)
    return np.sort(np.where(ok, s, np.nan), axis=1)


def _clip_polyline(pts: np.ndarray, closed: bool, omega: Omega):
    """Split every segment at ``dOmega`` and classify the pieces.

    Returns the per-vertex inside length (each inside piece is charged to
    the nearer endpoint of its segment, or to the other endpoint when the
    nearer one is not in ``Omega``), the total inside length, and the inside
    pieces as ``(points, clip points)``.
    """
    path = np.vstack([pts, pts[:1]]) if closed else pts
    p0, p1 = path[:-1], path[1:]
    nseg = len(p0)
    cuts = _segment_params(p0, p1, omega)
    seg_id, lo, hi = [], [], []
    for k in range(nseg):
        s = cuts[k][~np.isnan(cuts[k])]
        b = np.concatenate([[0.0], s, [1.0]])
        seg_id.append(np.full(len(b) - 1, k))
        lo.append(b[:-1])
        hi.append(b[1:])
    seg_id, lo, hi = np.concatenate(seg_id), np.concatenate(lo), np.concatenate(hi)
    d = p1 - p0
    mids = p0[seg_id] + (0.5 * (lo + hi))[:, None] * d[seg_id]
    inside = omega.contains(mids)
    vertex_in = omega.contains(pts)
    seg_len = np.hypot(*d.T)
    nv = len(pts)
    weight = np.zeros(nv)
    first_v = seg_id
    second_v = (seg_id + 1) % nv if closed else seg_id + 1
    for part_lo, part_hi, near, far in ((lo, np.minimum(hi, 0.5), first_v, second_v),
                                        (np.maximum(lo, 0.5), hi, second_v, first_v)):
        amount = np.clip(part_hi - part_lo, 0.0, None) * seg_len[seg_id] * inside
        target = np.where(vertex_in[near] | ~vertex_in[far], near, far)
        np.add.at(weight, target, amount)
    total = float(np.sum((hi - lo) * seg_len[seg_id] * inside))

    pieces, current = [], None
    for q in range(len(seg_id)):
        k = seg_id[q]
        pa = p0[k] + lo[q] * d[k]
        if inside[q]:
            if current is None:
                # a piece starting after an outside stretch starts on dOmega
                current = [[pa], tuple(pa) if q > 0 else None, None]
            current[0].append(p0[k] + hi[q] * d[k])
        elif current is not None:
            current[2] = tuple(pa)
            pieces.append(current)
            current = None
    if current is not None:
        pieces.append(current)
    if closed and len(pieces) >= 2 and pieces[0][1] is None and pieces[-1][2] is None:
        last, first = pieces.pop(), pieces.pop(0)
        pieces.append([last[0] + first[0][1:], last[1], first[2]])
    out = []
    for pts_list, start, end in pieces:
        ends = tuple(e for e in (start, end) if e is not None)
        out.append((np.array(pts_list), ends))
    return weight, total, out


def _clip_one(pts, closed, omega, params, scale, curvature):
    weight, total, pieces = _clip_polyline(pts, closed, omega)
    L = total * scale
    K = float(np.sum(np.abs(curvature) ** params.p * weight)) * scale if params.beta > 0 else 0.0
    arcs = [ClippedArc(p, b) for p, b in pieces if len(p) >= 2]
    return L, K, arcs


def _clip_system(system: CurveSystem, omega: Omega, params: ElasticaParams):
    L_tot = K_tot = 0.0
    arcs = []
    for c, m in zip(system.curves, system.multiplicities):
        k = curvature_samples(c) if params.beta > 0 else np.zeros(c.n)
        scale = c.length / c.perimeter
        L, K, a = _clip_one(c.points, True, omega, params, scale, k)
        L_tot += m * L
        K_tot += m * K
        arcs.extend(a)
    for path in system.doubled:
        k = polyline_curvature(path) if params.beta > 0 else np.zeros(len(path))
        L, K, a = _clip_one(np.asarray(path), False, omega, params, 1.0, k)
        L_tot += 2 * L
        K_tot += 2 * K
        arcs.extend(a)
    return L_tot, K_tot, arcs


def clip_energy(obj, omega, params: ElasticaParams = ElasticaParams()) -> EnergyReport:
    """Energy of the parts of level lines inside ``omega``.

    Parameters
    ----------
    obj : Curve, CurveSystem, LevelSetExtraction or LevelFamily
        For a family, each slab's clipped energy is weighted by the slab
        width (the localized ``G``); otherwise there is one row.
    omega : Omega or (n, 2) array_like
        Open simple polygon.
    params : ElasticaParams

    Returns
    -------
    EnergyReport
        ``extra`` holds the list of :class:`ClippedArc` (per slab for a family).
    """
    from .nesting import LevelFamily

    if not isinstance(omega, Omega):
        omega = Omega(omega)
    meta = {"p": params.p, "alpha": params.alpha, "beta": params.beta,
            "omega": omega.polygon.tolist()}
    if isinstance(obj, LevelFamily):
        report = EnergyReport(meta=meta)
        total, arcs_all = 0.0, []
        for j, (t, width, system) in enumerate(zip(obj.thresholds, obj.slab_widths, obj.systems)):
            L, K, arcs = _clip_system(system, omega, params)
            E = params.alpha * L + params.beta * K
            report.rows.append(LevelRow(j, t, L, K, E))
            total += float(width) * E
            arcs_all.append(arcs)
        report.total = total
        report.extra = arcs_all
        return report
    if isinstance(obj, Curve):
        system = CurveSystem([obj])
        t = 0.0
    elif isinstance(obj, LevelSetExtraction):
        system, t = obj.system, obj.threshold
    elif isinstance(obj, CurveSystem):
        system, t = obj, 0.0
    else:
        raise ValidationError(f"clip_energy: unsupported input {type(obj).__name__}")
    L, K, arcs = _clip_system(system, omega, params)
    E = params.alpha * L + params.beta * K
    return EnergyReport(rows=[LevelRow(0, t, L, K, E)], total=E, meta=meta, extra=arcs)
