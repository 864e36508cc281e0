"""Systems of closed curves with multiplicity.

A :class:`CurveSystem` is a finite family of closed curves, each carrying a
positive integer multiplicity, optionally completed by *doubled paths*: open
polylines that are traversed once in each direction (multiplicity two
everywhere).  Doubled paths model ghost bridges joining cusps; they belong to
the trace and carry energy, but their winding contribution is identically 0.

Queries provided here:

* :func:`winding_index` -- multiplicity-weighted winding number of a point;
* :func:`interior_membership` -- odd total index;
* :func:`interior_mask` / :func:`interior_area` -- rasterized interiors;
* :func:`trace_distance` -- distance from points to the trace;
* :func:`classify_contact` -- disjoint / tangential contact / crossing.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .curve_core import Curve, ElasticaParams, energy_terms, polyline_energy
from .errors import PointOnTrace, ValidationError

logger = logging.getLogger(__name__)

__all__ = [
    "CurveSystem",
    "ContactReport",
    "ContactWitness",
    "SegmentSet",
    "winding_index",
    "winding_numbers",
    "interior_membership",
    "interior_mask",
    "interior_area",
    "trace_distance",
    "classify_contact",
    "system_energy",
    "DEFAULT_ANGLE_TOL",
]

DEFAULT_ANGLE_TOL = 0.15


@dataclass(frozen=True, eq=False)
class CurveSystem:
    """Finite family of closed curves with multiplicities, plus doubled paths.

    Parameters
    ----------
    curves : sequence of Curve
    multiplicities : sequence of int, optional
        Positive integers, one per curve (default all 1).
    doubled : sequence of array_like, optional
        Open polylines, each traversed there and back (pointwise multiplicity 2).
    """

    curves: tuple = ()
    multiplicities: tuple = ()
    doubled: tuple = ()
    _segments: "SegmentSet | None" = field(default=None, init=False, repr=False)

    def __post_init__(self):
        curves = tuple(self.curves)
        for c in curves:
            if not isinstance(c, Curve):
                raise ValidationError("CurveSystem: every curve must be a Curve")
        mult = tuple(self.multiplicities) if len(self.multiplicities) else (1,) * len(curves)
        if len(mult) != len(curves):
            raise ValidationError(
                f"CurveSystem: {len(curves)} curves but {len(mult)} multiplicities"
            )
        mult = tuple(int(m) for m in mult)
        if any(m < 1 for m in mult):
            raise ValidationError("CurveSystem: multiplicities must be positive integers")
        paths = []
        for path in self.doubled:
            arr = np.array(path, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 2:
                raise ValidationError("CurveSystem: doubled paths must be (n>=2, 2) arrays")
            if not np.all(np.isfinite(arr)):
                raise ValidationError("CurveSystem: doubled paths must be finite")
            keep = np.ones(len(arr), dtype=bool)
            keep[1:] = np.any(arr[1:] != arr[:-1], axis=1)
            arr = arr[keep]
            if len(arr) < 2:
                raise ValidationError("CurveSystem: doubled path has zero length")
            arr.setflags(write=False)
            paths.append(arr)
        object.__setattr__(self, "curves", curves)
        object.__setattr__(self, "multiplicities", mult)
        object.__setattr__(self, "doubled", tuple(paths))

    @classmethod
    def empty(cls) -> "CurveSystem":
        return cls()

    @property
    def is_empty(self) -> bool:
        return not self.curves and not self.doubled

    def __len__(self) -> int:
        return len(self.curves)

    @property
    def segments(self) -> "SegmentSet":
        if self._segments is None:
            object.__setattr__(self, "_segments", SegmentSet.from_system(self))
        return self._segments

    def median_spacing(self) -> float:
        seg = self.segments
        return float(np.median(seg.lengths)) if len(seg) else 0.0

    def bbox(self) -> tuple[float, float, float, float]:
        """``(xmin, ymin, xmax, ymax)`` of the trace."""
        pts = self.trace_vertices()
        if len(pts) == 0:
            raise ValidationError("bbox of an empty system")
        return (*pts.min(axis=0), *pts.max(axis=0))

    def trace_vertices(self) -> np.ndarray:
        parts = [c.points for c in self.curves] + list(self.doubled)
        return np.vstack(parts) if parts else np.zeros((0, 2))

    def with_curves(self, curves, multiplicities=None) -> "CurveSystem":
        return CurveSystem(curves, multiplicities or (), self.doubled)


@dataclass(frozen=True)
class SegmentSet:
    """Flat arrays of the segments of a system's trace.

    ``owner[i]`` indexes curves first (``0..N-1``) then doubled paths
    (``N..N+M-1``); ``index[i]`` is the segment position within its owner and
    ``count[i]`` the number of segments of that owner; ``cyclic[i]`` tells
    whether the owner is closed.
    """

    a: np.ndarray
    b: np.ndarray
    owner: np.ndarray
    index: np.ndarray
    count: np.ndarray
    cyclic: np.ndarray
    weight: np.ndarray  # winding weight (multiplicity) of each segment; 0 on doubled paths

    @classmethod
    def from_system(cls, system: CurveSystem) -> "SegmentSet":
        a, b, owner, index, count, cyclic, weight = [], [], [], [], [], [], []
        for i, (c, m) in enumerate(zip(system.curves, system.multiplicities)):
            p = c.points
            a.append(p)
            b.append(np.roll(p, -1, axis=0))
            owner.append(np.full(len(p), i))
            index.append(np.arange(len(p)))
            count.append(np.full(len(p), len(p)))
            cyclic.append(np.ones(len(p), dtype=bool))
            weight.append(np.full(len(p), m))
        base = len(system.curves)
        for j, p in enumerate(system.doubled):
            k = len(p) - 1
            a.append(p[:-1])
            b.append(p[1:])
            owner.append(np.full(k, base + j))
            index.append(np.arange(k))
            count.append(np.full(k, k))
            cyclic.append(np.zeros(k, dtype=bool))
            weight.append(np.zeros(k, dtype=int))
        if not a:
            z2, z = np.zeros((0, 2)), np.zeros(0, dtype=int)
            return cls(z2, z2, z, z, z, z.astype(bool), z)
        return cls(
            np.vstack(a), np.vstack(b), np.concatenate(owner), np.concatenate(index),
            np.concatenate(count), np.concatenate(cyclic), np.concatenate(weight),
        )

    def __len__(self) -> int:
        return len(self.a)

    @property
    def lengths(self) -> np.ndarray:
        return np.hypot(*(self.b - self.a).T)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.a + self.b)


# ---------------------------------------------------------------------------
# distances


def _point_segment_distance(q: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from points ``q`` to segments ``[a, b]`` (broadcasting)."""
    ab = b - a
    aq = q - a
    den = np.einsum("...i,...i->...", ab, ab)
    t = np.where(den > 0, np.einsum("...i,...i->...", aq, ab) / np.where(den > 0, den, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    d = aq - t[..., None] * ab
    return np.sqrt(np.einsum("...i,...i->...", d, d))


def trace_distance(points, system: CurveSystem, k: int = 16) -> np.ndarray:
    """Exact distance from each point to the trace of ``system``.

    Candidate segments come from the ``k`` nearest segment midpoints
    (k-d tree); points for which an unexamined segment could still be closer
    are re-checked against all segments, so the result is exact.
    """
    q = np.atleast_2d(np.asarray(points, dtype=float))
    seg = system.segments
    if len(seg) == 0:
        return np.full(len(q), np.inf)
    mids = seg.midpoints
    half = 0.5 * seg.lengths.max()
    k = min(k, len(seg))
    tree = cKDTree(mids)
    dist_mid, idx = tree.query(q, k=k)
    if k == 1:
        dist_mid, idx = dist_mid[:, None], idx[:, None]
    d = _point_segment_distance(q[:, None, :], seg.a[idx], seg.b[idx]).min(axis=1)
    # a segment whose midpoint lies beyond the k-th neighbour is at least
    # (r_k - half) away; re-check exhaustively where that bound is not enough
    unsure = np.flatnonzero(dist_mid[:, -1] - half < d) if k < len(seg) else np.zeros(0, int)
    for start in range(0, len(unsure), 2048):
        chunk = unsure[start:start + 2048]
        dd = _point_segment_distance(q[chunk, None, :], seg.a[None], seg.b[None])
        d[chunk] = dd.min(axis=1)
    return d


def _default_point_tol(system: CurveSystem) -> float:
    xmin, ymin, xmax, ymax = system.bbox()
    return 1e-9 * max(math.hypot(xmax - xmin, ymax - ymin), 1.0)


# ---------------------------------------------------------------------------
# winding


def winding_numbers(points, system: CurveSystem, chunk: int = 4096) -> np.ndarray:
    """Multiplicity-weighted winding numbers by summed signed angle increments.

    Returns the real-valued sums (divided by ``2 pi``); callers round them.
    Doubled paths contribute exactly zero and are skipped.
    """
    q = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(len(q))
    for c, m in zip(system.curves, system.multiplicities):
        p0 = c.points
        p1 = np.roll(p0, -1, axis=0)
        for s in range(0, len(q), chunk):
            qq = q[s:s + chunk, None, :]
            u = p0[None] - qq
            v = p1[None] - qq
            cross = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
            dot = u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]
            out[s:s + chunk] += m * np.arctan2(cross, dot).sum(axis=1)
    return out / (2 * np.pi)


def winding_index(point, system: CurveSystem, dist_tol: float | None = None) -> int:
    """Total winding index ``sum_i m_i * I(point, gamma_i)``.

    Parameters
    ----------
    point : (2,) array_like
    system : CurveSystem
    dist_tol : float, optional
        Points closer than this to the trace raise :class:`PointOnTrace`.
        Defaults to ``1e-9`` times the trace diameter (i.e. on the trace up
        to round-off).

    Raises
    ------
    PointOnTrace
    """
    q = np.asarray(point, dtype=float).reshape(1, 2)
    if system.is_empty:
        return 0
    tol = _default_point_tol(system) if dist_tol is None else float(dist_tol)
    d = float(trace_distance(q, system)[0])
    if d <= tol:
        raise PointOnTrace(q[0], d, tol)
    w = float(winding_numbers(q, system)[0])
    r = round(w)
    if abs(w - r) >= 0.1:  # pragma: no cover - would indicate a numerical breakdown
        raise PointOnTrace(q[0], d, tol)
    return int(r)


def interior_membership(point, system: CurveSystem, dist_tol: float | None = None) -> bool:
    """True iff the total winding index of ``point`` is odd."""
    return winding_index(point, system, dist_tol) % 2 == 1


def winding_grid(system: CurveSystem, xs, ys) -> np.ndarray:
    """Integer winding numbers on the grid ``(ys[i], xs[j])`` by scanline crossings.

    Each segment crossing the horizontal line through a row contributes its
    signed multiplicity to all grid points to the left of the crossing (the
    half-open rule ``y0 <= y < y1`` makes vertices count once).  This yields
    the same integers as :func:`winding_numbers` away from the trace.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    out = np.zeros((len(ys), len(xs) + 1), dtype=np.int64)
    for c, m in zip(system.curves, system.multiplicities):
        p0 = c.points
        p1 = np.roll(p0, -1, axis=0)
        y0, y1 = p0[:, 1], p1[:, 1]
        up = y1 > y0
        lo = np.where(up, y0, y1)
        hi = np.where(up, y1, y0)
        # rows r with lo <= ys[r] < hi
        r0 = np.searchsorted(ys, lo, side="left")
        r1 = np.searchsorted(ys, hi, side="left")
        nrow = r1 - r0
        sel = np.flatnonzero(nrow > 0)
        if len(sel) == 0:
            continue
        seg_id = np.repeat(sel, nrow[sel])
        offsets = np.arange(len(seg_id)) - np.repeat(np.cumsum(nrow[sel]) - nrow[sel], nrow[sel])
        rows = r0[seg_id] + offsets
        yy = ys[rows]
        t = (yy - y0[seg_id]) / (y1[seg_id] - y0[seg_id])
        xc = p0[seg_id, 0] + t * (p1[seg_id, 0] - p0[seg_id, 0])
        col = np.searchsorted(xs, xc, side="left")  # grid points j < col lie left of xc
        sign = np.where(up[seg_id], m, -m)
        np.add.at(out, (rows, col), sign)
    # winding at column j = sum of contributions with col > j
    total = out.sum(axis=1, keepdims=True)
    return (total - np.cumsum(out, axis=1))[:, :-1]


def interior_mask(system: CurveSystem, xs, ys) -> np.ndarray:
    """Boolean raster of ``Int(system)`` (odd winding) at grid points ``(ys[i], xs[j])``."""
    if not system.curves:
        return np.zeros((len(ys), len(xs)), dtype=bool)
    return (winding_grid(system, xs, ys) % 2) == 1


def _cell_centers(bbox, resolution):
    xmin, ymin, xmax, ymax = bbox
    hx = (xmax - xmin) / resolution
    hy = (ymax - ymin) / resolution
    xs = xmin + (np.arange(resolution) + 0.5) * hx
    ys = ymin + (np.arange(resolution) + 0.5) * hy
    return xs, ys, hx * hy


def interior_area(system: CurveSystem, bbox, resolution: int) -> float:
    """Area of ``Int(system)`` rasterized on a ``resolution x resolution`` grid.

    Parameters
    ----------
    system : CurveSystem
    bbox : (xmin, ymin, xmax, ymax)
        Must contain the trace with a margin of at least two cells.
    resolution : int

    Returns
    -------
    float
        ``cell_area * #{cell centers with odd winding}``.
    """
    resolution = int(resolution)
    if resolution < 1:
        raise ValidationError("interior_area: resolution must be positive")
    xmin, ymin, xmax, ymax = (float(v) for v in bbox)
    if not (xmax > xmin and ymax > ymin):
        raise ValidationError(f"interior_area: invalid bbox {bbox}")
    if system.is_empty:
        return 0.0
    sx0, sy0, sx1, sy1 = system.bbox()
    mx = 2 * (xmax - xmin) / resolution
    my = 2 * (ymax - ymin) / resolution
    if sx0 < xmin + mx or sy0 < ymin + my or sx1 > xmax - mx or sy1 > ymax - my:
        raise ValidationError("interior_area: bbox must contain the system with a 2-cell margin")
    xs, ys, cell = _cell_centers((xmin, ymin, xmax, ymax), resolution)
    return float(interior_mask(system, xs, ys).sum() * cell)


# ---------------------------------------------------------------------------
# contacts


@dataclass(frozen=True)
class ContactWitness:
    """One maximal run of proximate segment pairs, summarised by its worst pair."""

    point: tuple
    curves: tuple  # (owner index in a, owner index in b)
    angle: float  # unoriented angle between the two segments, radians in [0, pi/2]
    distance: float
    kind: str  # "tangential_contact" or "crossing"

    def to_json(self) -> dict:
        return {
            "point": [float(v) for v in self.point],
            "curves": [int(v) for v in self.curves],
            "angle": float(self.angle),
            "distance": float(self.distance),
            "kind": self.kind,
        }


@dataclass(frozen=True)
class ContactReport:
    classification: str  # "disjoint" | "tangential_contact" | "crossing"
    witnesses: tuple = ()

    @property
    def crossings(self):
        return [w for w in self.witnesses if w.kind == "crossing"]


def _orient(p, q, r):
    return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])


def _segment_pair_geometry(a0, a1, b0, b1):
    """Distance, closest-point midpoint and proper-crossing flag for segment pairs."""
    o1 = _orient(a0, a1, b0)
    o2 = _orient(a0, a1, b1)
    o3 = _orient(b0, b1, a0)
    o4 = _orient(b0, b1, a1)
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    cands = np.stack([
        _point_segment_distance(a0, b0, b1),
        _point_segment_distance(a1, b0, b1),
        _point_segment_distance(b0, a0, a1),
        _point_segment_distance(b1, a0, a1),
    ])
    dist = np.where(proper, 0.0, cands.min(axis=0))
    where = 0.25 * (a0 + a1 + b0 + b1)
    return dist, where, proper


def _unoriented_angle(da, db):
    na = np.hypot(*da.T)
    nb = np.hypot(*db.T)
    c = np.abs(np.einsum("ij,ij->i", da, db)) / (na * nb)
    return np.arccos(np.clip(c, 0.0, 1.0))


def _link_components(points: np.ndarray, link: float) -> tuple[int, np.ndarray]:
    """Connected components of the graph joining points closer than ``link``.

    Dense clusters would make the pair list quadratic, so points are bucketed
    into cells of side ``link / sqrt(2)`` (everything inside one cell is
    linked) and only neighbouring cells are compared, by their closest pair.
    """
    side = link / math.sqrt(2.0)
    keys = np.floor(points / side).astype(np.int64)
    cells, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(len(cells) + 1))
    members = [order[bounds[c]:bounds[c + 1]] for c in range(len(cells))]
    trees = {}

    def tree(c):
        if c not in trees:
            trees[c] = cKDTree(points[members[c]])
        return trees[c]

    index = {tuple(k): c for c, k in enumerate(cells)}
    rows, cols = [], []
    for c, key in enumerate(cells):
        for dx in range(-2, 3):
            for dy in range(-2, 3):
                if (dx, dy) <= (0, 0):
                    continue  # each unordered neighbour pair once
                d = index.get((key[0] + dx, key[1] + dy))
                if d is None:
                    continue
                small, big = (c, d) if len(members[c]) <= len(members[d]) else (d, c)
                dist, _ = tree(big).query(points[members[small]], distance_upper_bound=2.0 * link)
                if np.any(dist <= link):
                    rows.append(c)
                    cols.append(d)
    m = len(cells)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))
    n_runs, cell_labels = connected_components(graph, directed=False)
    return n_runs, cell_labels[inverse]


def classify_contact(a: CurveSystem, b: CurveSystem, dist_tol: float | None = None,
                     angle_tol: float = DEFAULT_ANGLE_TOL) -> ContactReport:
    """Classify how the traces of two systems meet.

    Segment pairs closer than ``dist_tol`` are contacts.  Contacts are grouped
    into maximal runs (connected clusters); each run yields one witness.  A
    run is a crossing if it contains a proper segment intersection at an angle
    above ``angle_tol``, or if its closest pair (ties broken by the smaller
    angle) meets at an angle above ``angle_tol``; otherwise it is a tangential
    contact.  When ``a is b`` the self-contacts of the system are examined,
    excluding pairs that are neighbours along the same curve.

    Parameters
    ----------
    a, b : CurveSystem
    dist_tol : float, optional
        Proximity tolerance; default twice the median segment length.
    angle_tol : float
        Radians.

    Returns
    -------
    ContactReport
        ``classification`` is the worst over all runs.
    """
    sa, sb = a.segments, b.segments
    if len(sa) == 0 or len(sb) == 0:
        return ContactReport("disjoint")
    same = a is b
    if dist_tol is None:
        dist_tol = 2.0 * float(np.median(np.concatenate([sa.lengths, sb.lengths])))
    if not (dist_tol > 0 and angle_tol > 0):
        raise ValidationError("classify_contact: tolerances must be positive")
    la, lb = sa.lengths, sb.lengths
    radius = dist_tol + 0.5 * (la.max() + lb.max())
    ta, tb = cKDTree(sa.midpoints), cKDTree(sb.midpoints)
    pairs = ta.sparse_distance_matrix(tb, radius, output_type="ndarray")
    i = pairs["i"].astype(int)
    j = pairs["j"].astype(int)
    if same:
        keep = i < j
        same_owner = sa.owner[i] == sa.owner[j]
        gap = np.abs(sa.index[i] - sa.index[j])
        gap = np.where(sa.cyclic[i], np.minimum(gap, sa.count[i] - gap), gap)
        # neighbours along one curve are always within a few spacings; skip a
        # window covering the tolerance so a curve never "contacts" itself locally
        hmin = max(float(np.min(la)), 1e-300)
        window = 1 + int(math.ceil(2.0 * dist_tol / hmin))
        keep &= ~(same_owner & (gap <= window))
        i, j = i[keep], j[keep]
    if len(i) == 0:
        return ContactReport("disjoint")
    dist, where, proper = _segment_pair_geometry(sa.a[i], sa.b[i], sb.a[j], sb.b[j])
    close = dist < dist_tol
    i, j, dist, where, proper = i[close], j[close], dist[close], where[close], proper[close]
    if len(i) == 0:
        return ContactReport("disjoint")
    angle = _unoriented_angle(sa.b[i] - sa.a[i], sb.b[j] - sb.a[j])

    # group contacts into runs of nearby pairs
    link = 1.5 * max(la.max(), lb.max()) + dist_tol
    n_runs, labels = _link_components(where, link)

    scale = max(float(np.abs(np.concatenate([sa.a, sb.a])).max()), 1.0)
    witnesses = []
    for r in range(n_runs):
        members = np.flatnonzero(labels == r)
        crossing_members = members[proper[members] & (angle[members] > angle_tol)]
        if len(crossing_members):
            k = crossing_members[np.argmax(angle[crossing_members])]
            kind = "crossing"
        else:
            dmin = dist[members].min()
            tied = members[dist[members] <= dmin + 1e-12 * scale]
            k = tied[np.argmin(angle[tied])]
            kind = "crossing" if angle[k] > angle_tol else "tangential_contact"
        witnesses.append(ContactWitness(
            point=tuple(float(v) for v in where[k]),
            curves=(int(sa.owner[i[k]]), int(sb.owner[j[k]])),
            angle=float(angle[k]),
            distance=float(dist[k]),
            kind=kind,
        ))
    witnesses.sort(key=lambda w: (w.kind != "crossing", w.point))
    worst = "crossing" if any(w.kind == "crossing" for w in witnesses) else "tangential_contact"
    return ContactReport(worst, tuple(witnesses))


# ---------------------------------------------------------------------------
# energy


def system_energy(system: CurveSystem, params: ElasticaParams = ElasticaParams()) -> tuple[float, float, float]:
    """``(length, curvature_integral, energy)`` of a system, multiplicities included.

    Doubled paths count twice.  ``energy = alpha * length + beta * curvature``.
    """
    length = 0.0
    curv = 0.0
    for c, m in zip(system.curves, system.multiplicities):
        lc, kc = energy_terms(c, params.p, need_curvature=params.beta > 0)
        length += m * lc
        curv += m * kc
    for path in system.doubled:
        lp, kp = polyline_energy(path, params, closed=False)
        length += 2 * lp
        curv += 2 * kp
    return length, curv, params.alpha * length + params.beta * curv

