"""Level families, the nesting conditions, membership in A(u), and G(Phi).

A :class:`LevelFamily` is a map ``t -> Phi(t)`` that is piecewise constant on
slabs ``[t_j, t_{j+1})`` of a threshold grid, empty outside ``range``.  The
three conditions checked for levels ``t_lo < t_hi`` are

(i)   the traces of ``Phi(t_lo)`` and ``Phi(t_hi)`` may touch tangentially
      but never cross;
(ii)  ``Int(Phi(t_hi))`` is contained in ``Int(Phi(t_lo))``, pointwise --
      the trace of ``Phi(t_lo)`` (which is not part of its interior) must not
      run through ``Int(Phi(t_hi))``;
(iii) the arcs of ``Phi(t_hi)`` that leave the closure of
      ``Int(Phi(t_lo))`` ride on the trace of ``Phi(t_lo)``.

Measure-zero conditions are replaced by small tolerances: an area fraction of
the bounding box for (ii) and for the interior match, and a length fraction
for the trace conditions.

The module also provides the dyadic averages ``f^N`` of a tabulated level
energy, which form a martingale in ``N``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .curve_core import ElasticaParams
from .curve_systems import (
    DEFAULT_ANGLE_TOL,
    CurveSystem,
    classify_contact,
    interior_mask,
    system_energy,
    trace_distance,
    winding_numbers,
)
from .errors import NoValidCandidate, ValidationError
from .grid_function import GridFunction, extract_level_set
from .reports import EnergyReport, LevelRow

logger = logging.getLogger(__name__)

__all__ = [
    "LevelFamily",
    "ConditionResult",
    "NestingVerdict",
    "CandidateRanking",
    "DyadicAverages",
    "check_conditions",
    "check_membership",
    "family_energy_G",
    "compare_candidates",
    "dyadic_average",
    "self_covering_family",
    "AREA_TOL",
    "TRACE_TOL",
]

#: tolerated area (fraction of the bounding box) for "up to a null set"
AREA_TOL = 0.005
#: tolerated length fraction for "up to an H^1-null set"
TRACE_TOL = 0.01


@dataclass(frozen=True, eq=False)
class LevelFamily:
    """Piecewise-constant level family.

    ``Phi(t) = systems[j]`` for ``t`` in ``[thresholds[j], thresholds[j+1])``
    (the last slab closes at ``range[1]``); ``Phi(t)`` is empty for ``t``
    outside ``[thresholds[0], range[1])``.

    Parameters
    ----------
    thresholds : sequence of float
        Strictly increasing.
    systems : sequence of CurveSystem
    range : (float, float)
        ``(t_min, t_max)`` with ``t_min <= thresholds[0]`` and
        ``thresholds[-1] < t_max``.
    """

    thresholds: tuple
    systems: tuple
    range: tuple

    def __post_init__(self):
        ts = tuple(float(t) for t in self.thresholds)
        systems = tuple(self.systems)
        if len(ts) != len(systems):
            raise ValidationError(
                f"LevelFamily: {len(ts)} thresholds but {len(systems)} systems")
        if any(not isinstance(s, CurveSystem) for s in systems):
            raise ValidationError("LevelFamily: systems must be CurveSystem instances")
        if not all(np.isfinite(ts)):
            raise ValidationError("LevelFamily: thresholds must be finite")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValidationError("LevelFamily: thresholds must be strictly increasing")
        lo, hi = (float(v) for v in self.range)
        if not hi > lo:
            raise ValidationError(f"LevelFamily: invalid range {self.range}")
        if ts and (ts[0] < lo or ts[-1] >= hi):
            raise ValidationError("LevelFamily: range must bracket the thresholds")
        object.__setattr__(self, "thresholds", ts)
        object.__setattr__(self, "systems", systems)
        object.__setattr__(self, "range", (lo, hi))

    def __len__(self) -> int:
        return len(self.thresholds)

    @property
    def slab_ends(self) -> np.ndarray:
        return np.append(np.asarray(self.thresholds[1:]), self.range[1])

    @property
    def slab_widths(self) -> np.ndarray:
        return self.slab_ends - np.asarray(self.thresholds)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.thresholds) + self.slab_ends)

    def system_at(self, t: float) -> CurveSystem:
        if not self.thresholds or t < self.thresholds[0] or t >= self.range[1]:
            return CurveSystem.empty()
        j = int(np.searchsorted(self.thresholds, t, side="right")) - 1
        return self.systems[j]

    def split(self, t: float) -> tuple["LevelFamily", "LevelFamily"]:
        """Two families, on ``[range[0], t)`` and ``[t, range[1])``, that together equal this one."""
        lo, hi = self.range
        if not lo < t < hi:
            raise ValidationError("LevelFamily.split: t must lie inside the range")
        ts = np.asarray(self.thresholds)
        below = ts < t
        first = LevelFamily(ts[below], [s for s, b in zip(self.systems, below) if b], (lo, t))
        upper_t = list(ts[~below])
        upper_s = [s for s, b in zip(self.systems, below) if not b]
        if np.any(below) and (not upper_t or upper_t[0] > t):
            upper_t.insert(0, t)
            upper_s.insert(0, self.system_at(t))
        return first, LevelFamily(upper_t, upper_s, (t, hi))

    def bbox(self) -> tuple | None:
        boxes = [s.bbox() for s in self.systems if not s.is_empty]
        if not boxes:
            return None
        b = np.array(boxes)
        return (b[:, 0].min(), b[:, 1].min(), b[:, 2].max(), b[:, 3].max())

    def median_spacing(self) -> float:
        spacings = [s.median_spacing() for s in self.systems if not s.is_empty]
        return float(np.median(spacings)) if spacings else 0.0


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class ConditionResult:
    """Outcome of one condition; ``witnesses`` are JSON-ready dicts."""

    passed: bool = True
    witnesses: list = field(default_factory=list)

    def fail(self, witness: dict):
        self.passed = False
        self.witnesses.append(witness)

    def to_json(self) -> dict:
        return {"pass": bool(self.passed), "witnesses": list(self.witnesses)}


@dataclass
class NestingVerdict:
    """Conditions (i)-(iii), plus the interior/trace match when checked against ``u``.

    ``is_member`` is true iff every recorded condition passes.
    """

    condition_i: ConditionResult = field(default_factory=ConditionResult)
    condition_ii: ConditionResult = field(default_factory=ConditionResult)
    condition_iii: ConditionResult = field(default_factory=ConditionResult)
    interior_match: ConditionResult | None = None
    trace_cover: ConditionResult | None = None
    flags: dict = field(default_factory=dict)

    @property
    def conditions(self) -> dict:
        out = {"condition_i": self.condition_i, "condition_ii": self.condition_ii,
               "condition_iii": self.condition_iii}
        if self.interior_match is not None:
            out["interior_match"] = self.interior_match
        if self.trace_cover is not None:
            out["trace_cover"] = self.trace_cover
        return out

    @property
    def is_member(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    @property
    def failed(self) -> list:
        return [name for name, c in self.conditions.items() if not c.passed]

    def to_json(self) -> dict:
        out = {name: c.to_json() for name, c in self.conditions.items()}
        out["is_member"] = self.is_member
        out["flags"] = dict(self.flags)
        return out


class _Raster:
    """Cell-centre raster shared by all interior tests of one check."""

    def __init__(self, bbox, resolution: int):
        xmin, ymin, xmax, ymax = bbox
        self.bbox = bbox
        self.res = int(resolution)
        self.hx = (xmax - xmin) / self.res
        self.hy = (ymax - ymin) / self.res
        self.xs = xmin + (np.arange(self.res) + 0.5) * self.hx
        self.ys = ymin + (np.arange(self.res) + 0.5) * self.hy
        self.cell = self.hx * self.hy
        self.area = (xmax - xmin) * (ymax - ymin)
        self._masks = {}

    def mask(self, system: CurveSystem) -> np.ndarray:
        key = id(system)
        if key not in self._masks:
            self._masks[key] = (system, interior_mask(system, self.xs, self.ys))
        return self._masks[key][1]

    def lookup(self, mask: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Mask value of the cell containing each point (False outside)."""
        j = np.floor((points[:, 0] - self.bbox[0]) / self.hx).astype(int)
        i = np.floor((points[:, 1] - self.bbox[1]) / self.hy).astype(int)
        ok = (i >= 0) & (i < self.res) & (j >= 0) & (j < self.res)
        out = np.zeros(len(points), dtype=bool)
        out[ok] = mask[i[ok], j[ok]]
        return out

    def point_of(self, mask: np.ndarray) -> list:
        i, j = np.argwhere(mask)[0]
        return [float(self.xs[j]), float(self.ys[i])]


def _padded_bbox(box, dist_tol):
    xmin, ymin, xmax, ymax = box
    pad = 0.05 * max(xmax - xmin, ymax - ymin, 1e-12) + 2 * dist_tol
    return (xmin - pad, ymin - pad, xmax + pad, ymax + pad)


def _trace_samples(system: CurveSystem):
    """Segment midpoints, lengths and owning curve id (doubled paths after the curves)."""
    seg = system.segments
    if len(seg) == 0:
        return np.zeros((0, 2)), np.zeros(0), np.zeros(0, int)
    return seg.midpoints, seg.lengths, seg.owner


def _odd_interior(points: np.ndarray, system: CurveSystem) -> np.ndarray:
    if not system.curves or len(points) == 0:
        return np.zeros(len(points), dtype=bool)
    w = np.rint(winding_numbers(points, system)).astype(np.int64)
    return (w % 2) == 1


def _check_pair(lo_t, hi_t, lower: CurveSystem, upper: CurveSystem, raster: _Raster,
                dist_tol, angle_tol, area_tol, trace_tol):
    """Conditions (i)-(iii) for one ordered pair; returns three lists of witnesses."""
    w_i, w_ii, w_iii = [], [], []
    pair = {"t_lower": lo_t, "t_upper": hi_t}
    if upper.is_empty:
        return w_i, w_ii, w_iii

    # (i) no crossings
    if not lower.is_empty:
        rep = classify_contact(lower, upper, dist_tol, angle_tol)
        for w in rep.witnesses:
            if w.kind == "crossing":
                w_i.append({**pair, "point": list(w.point), "angle": w.angle})

    # (ii) area of Int(upper) \ Int(lower)
    m_lo, m_hi = raster.mask(lower), raster.mask(upper)
    excess = m_hi & ~m_lo
    area = float(excess.sum() * raster.cell)
    if area > area_tol * raster.area:
        w_ii.append({**pair, "kind": "area", "point": raster.point_of(excess),
                     "area": area, "area_fraction": area / raster.area})
    # (ii) pointwise: the trace of the lower system is not interior to it, so
    # it must not run through Int(upper) away from the upper trace
    if not lower.is_empty:
        mids, lens, _ = _trace_samples(lower)
        inside = _odd_interior(mids, upper)
        if inside.any():
            far = trace_distance(mids[inside], upper) > dist_tol
            bad = np.flatnonzero(inside)[far]
            frac = float(lens[bad].sum() / lens.sum())
            if frac > trace_tol:
                w_ii.append({**pair, "kind": "trace", "point": [float(v) for v in mids[bad[0]]],
                             "length_fraction": frac})

    # (iii) escaping arcs of the upper system must ride the lower trace
    mids, lens, owner = _trace_samples(upper)
    closure = ndimage.binary_dilation(m_lo, structure=np.ones((3, 3), bool))
    outside = ~raster.lookup(closure, mids)
    if outside.any():
        d = np.full(len(mids), np.inf) if lower.is_empty else np.zeros(len(mids))
        if not lower.is_empty:
            d[outside] = trace_distance(mids[outside], lower)
        escaping = outside & (d > dist_tol)
        for k in np.unique(owner):
            mine = owner == k
            frac = float(lens[mine & escaping].sum() / lens[mine].sum())
            if frac > trace_tol:
                idx = np.flatnonzero(mine & escaping)
                worst = idx[np.argmax(d[idx])] if np.isfinite(d[idx]).all() else idx[0]
                w_iii.append({**pair, "curve": int(k), "point": [float(v) for v in mids[worst]],
                              "length_fraction": frac})
    return w_i, w_ii, w_iii


def _pairs(n: int, seed: int) -> list:
    """Consecutive pairs plus ``ceil(log2(n))`` seeded long-range pairs."""
    pairs = [(j, j + 1) for j in range(n - 1)]
    if n > 2:
        rng = np.random.default_rng(seed)
        extra = set()
        want = int(math.ceil(math.log2(n)))
        candidates = [(a, b) for a in range(n) for b in range(a + 2, n)]
        pick = rng.choice(len(candidates), size=min(want, len(candidates)), replace=False)
        extra.update(candidates[int(k)] for k in pick)
        pairs.extend(sorted(extra))
    return pairs


def check_conditions(phi: LevelFamily, dist_tol: float | None = None,
                     angle_tol: float = DEFAULT_ANGLE_TOL, area_res: int = 512, *,
                     area_tol: float = AREA_TOL, trace_tol: float = TRACE_TOL,
                     seed: int = 0, workers: int = 1, bbox=None) -> NestingVerdict:
    """Check conditions (i)-(iii) on consecutive and sampled long-range level pairs.

    Parameters
    ----------
    phi : LevelFamily
        At least two thresholds.
    dist_tol : float, optional
        Trace proximity tolerance; default twice the median sample spacing.
    angle_tol : float
        Tangency tolerance (radians) for condition (i).
    area_res : int
        Raster resolution for the interior comparisons.
    area_tol, trace_tol : float
        Tolerated area fraction of the raster box (ii) and length fraction
        of a curve (ii, iii).
    seed : int
        Seeds the choice of long-range pairs.
    workers : int
        Threads for the per-pair checks (results are order-independent).
    bbox : tuple, optional
        Raster box; default the union of the traces plus a 5% margin.

    Returns
    -------
    NestingVerdict
        Failures carry witnesses with both thresholds and a location.
    """
    if len(phi) < 2:
        raise ValidationError("check_conditions: the family needs at least two thresholds")
    if dist_tol is None:
        dist_tol = 2.0 * phi.median_spacing()
    dist_tol = float(dist_tol)
    verdict = NestingVerdict()
    box = phi.bbox()
    if box is None:
        return verdict
    if bbox is None:
        bbox = _padded_bbox(box, dist_tol)
    raster = _Raster(bbox, area_res)
    pairs = _pairs(len(phi), seed)
    # rasterize once, up front, so that worker threads only read the cache
    for s in phi.systems:
        raster.mask(s)

    def job(pair):
        a, b = pair
        return _check_pair(phi.thresholds[a], phi.thresholds[b], phi.systems[a], phi.systems[b],
                           raster, dist_tol, angle_tol, area_tol, trace_tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, pairs))
    else:
        results = [job(p) for p in pairs]
    for w_i, w_ii, w_iii in results:
        for w in w_i:
            verdict.condition_i.fail(w)
        for w in w_ii:
            verdict.condition_ii.fail(w)
        for w in w_iii:
            verdict.condition_iii.fail(w)
    verdict.flags.update(pairs_checked=len(pairs), dist_tol=dist_tol, area_res=int(area_res),
                         area_tol=area_tol, trace_tol=trace_tol)
    return verdict


def check_membership(phi: LevelFamily, u: GridFunction, dist_tol: float | None = None,
                     angle_tol: float = DEFAULT_ANGLE_TOL, area_res: int = 512, *,
                     area_tol: float = AREA_TOL, trace_tol: float = TRACE_TOL,
                     seed: int = 0, workers: int = 1) -> NestingVerdict:
    """Is ``phi`` in ``A(u)``?

    Runs :func:`check_conditions`, then for every slab, at its midpoint
    ``t``: (a) the rasterized ``Int(Phi(t))`` and ``{u > t}`` differ by at most
    ``area_tol`` of the grid area; (b) at least ``1 - trace_tol`` of the
    extracted level line of ``u`` at ``t`` lies within ``dist_tol`` of the
    trace of ``Phi(t)``.

    The default ``dist_tol`` is the larger of twice the family's median sample
    spacing and two grid cells.

    Raises
    ------
    OpenContour
        If a level of ``u`` cannot be extracted.
    """
    lo, hi = u.vmin, u.vmax
    slack = 1e-9 * max(hi - lo, 1.0)
    if phi.thresholds and (phi.thresholds[0] < lo - slack or phi.thresholds[-1] >= hi):
        raise ValidationError("check_membership: family thresholds must lie in [min u, max u)")
    if dist_tol is None:
        dist_tol = max(2.0 * phi.median_spacing(), 2.0 * u.spacing)
    verdict = check_conditions(phi, dist_tol, angle_tol, area_res, area_tol=area_tol,
                               trace_tol=trace_tol, seed=seed, workers=workers, bbox=u.bbox)
    verdict.interior_match = ConditionResult()
    verdict.trace_cover = ConditionResult()
    raster = _Raster(u.bbox, area_res)
    X, Y = np.meshgrid(raster.xs, raster.ys)
    cells = np.column_stack([X.ravel(), Y.ravel()])
    uvals = u.interpolate(cells).reshape(X.shape)
    for t_mid, system in zip(phi.midpoints, phi.systems):
        t_mid = float(min(t_mid, hi))
        sup = uvals > t_mid
        diff = sup ^ raster.mask(system)
        area = float(diff.sum() * raster.cell)
        if area > area_tol * raster.area:
            verdict.interior_match.fail({"t": t_mid, "point": raster.point_of(diff),
                                         "area": area, "area_fraction": area / raster.area})
        ext = extract_level_set(u, t_mid)
        if ext.system.is_empty:
            continue
        pts = ext.system.trace_vertices()
        d = trace_distance(pts, system) if not system.is_empty else np.full(len(pts), np.inf)
        far = d > dist_tol
        if far.mean() > trace_tol:
            k = int(np.argmax(d))
            verdict.trace_cover.fail({"t": t_mid, "point": [float(v) for v in pts[k]],
                                      "uncovered_fraction": float(far.mean())})
    verdict.flags["membership_dist_tol"] = float(dist_tol)
    return verdict


def self_covering_family(u: GridFunction, n_levels: int = 64) -> LevelFamily:
    """The family whose slab systems are the level lines of ``u`` at the slab midpoints.

    The slabs are those of :func:`~elastica_coarea.grid_function.coarea_energy`,
    so ``family_energy_G`` of the result reproduces the coarea total.
    """
    lo, hi = u.vmin, u.vmax
    if not hi > lo:
        raise ValidationError("self_covering_family: u is constant")
    dt = (hi - lo) / n_levels
    ts = lo + dt * np.arange(n_levels)
    systems = [extract_level_set(u, float(t + 0.5 * dt)).system for t in ts]
    return LevelFamily(ts, systems, (lo, hi))


# ---------------------------------------------------------------------------
# the functional G


def family_energy_G(phi: LevelFamily, params: ElasticaParams = ElasticaParams()) -> EnergyReport:
    """``G(Phi) = int W(Phi(t)) dt`` = ``sum_j (t_{j+1} - t_j) W(Phi(t_j))``."""
    report = EnergyReport(meta={"range": list(phi.range), "p": params.p,
                                "alpha": params.alpha, "beta": params.beta})
    total = 0.0
    for j, (t, width, system) in enumerate(zip(phi.thresholds, phi.slab_widths, phi.systems)):
        L, K, E = system_energy(system, params) if not system.is_empty else (0.0, 0.0, 0.0)
        report.rows.append(LevelRow(j, t, L, K, E))
        total += float(width) * E
    report.total = total
    return report


@dataclass
class CandidateRanking:
    """Members ranked by ``G`` (ascending) and rejected candidates with their verdicts.

    ``members`` and ``rejected`` hold ``(candidate index, G or None, verdict)``.
    """

    members: list
    rejected: list

    @property
    def best(self) -> int:
        return self.members[0][0]

    def to_json(self) -> dict:
        return {
            "members": [{"index": i, "G": g, "verdict": v.to_json()} for i, g, v in self.members],
            "rejected": [{"index": i, "failed": v.failed, "verdict": v.to_json()}
                         for i, _, v in self.rejected],
        }


def compare_candidates(candidates, u: GridFunction, params: ElasticaParams = ElasticaParams(),
                       **tolerances) -> CandidateRanking:
    """Filter candidate families by membership in ``A(u)`` and rank members by ``G``.

    Raises
    ------
    NoValidCandidate
        If no candidate is a member.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValidationError("compare_candidates: at least one candidate is required")
    members, rejected = [], []
    for k, phi in enumerate(candidates):
        verdict = check_membership(phi, u, **tolerances)
        if verdict.is_member:
            members.append((k, family_energy_G(phi, params).total, verdict))
        else:
            logger.info("candidate %d rejected: %s", k, ", ".join(verdict.failed))
            rejected.append((k, None, verdict))
    if not members:
        reasons = "; ".join(f"#{k}: {', '.join(v.failed)}" for k, _, v in rejected)
        raise NoValidCandidate(f"compare_candidates: no candidate belongs to A(u) ({reasons})")
    members.sort(key=lambda m: (m[1], m[0]))
    return CandidateRanking(members, rejected)


# ---------------------------------------------------------------------------
# dyadic averages


@dataclass(frozen=True)
class DyadicAverages:
    """Means ``f^N`` of a tabulated function over ``I_{N,k} = [k 2^-N, (k+1) 2^-N)``.

    ``values`` maps the interval index ``k`` to the mean.
    """

    depth: int
    values: dict

    @property
    def width(self) -> float:
        return 2.0 ** -self.depth

    def integral(self) -> float:
        return float(sum(self.values.values()) * self.width)

    def __call__(self, t) -> np.ndarray:
        """Piecewise-constant evaluation (0 off the tabulated support)."""
        k = np.floor(np.asarray(t, dtype=float) / self.width).astype(int)
        return np.vectorize(lambda i: self.values.get(int(i), 0.0), otypes=[float])(k)


class _PiecewiseLinearIntegral:
    """Exact primitive of the piecewise-linear interpolant of a tabulation (0 outside)."""

    def __init__(self, ts, vs):
        self.ts, self.vs = ts, vs
        self.cum = np.concatenate([[0.0], np.cumsum(0.5 * (vs[1:] + vs[:-1]) * np.diff(ts))])

    def __call__(self, x: np.ndarray) -> np.ndarray:
        ts, vs = self.ts, self.vs
        x = np.clip(x, ts[0], ts[-1])
        i = np.clip(np.searchsorted(ts, x, side="right") - 1, 0, len(ts) - 2)
        dx = x - ts[i]
        vx = vs[i] + (vs[i + 1] - vs[i]) * dx / (ts[i + 1] - ts[i])
        return self.cum[i] + 0.5 * dx * (vs[i] + vx)


def dyadic_average(ts, values, depth: int) -> DyadicAverages:
    """Depth-``N`` dyadic means of a nonnegative tabulated function.

    The tabulation is read as its piecewise-linear interpolant (trapezoid
    rule), extended by zero; each mean is ``2^N`` times the exact integral of
    that interpolant over ``I_{N,k}``.  Consequently ``f^N`` is exactly the
    average of the two depth-``N+1`` means it contains, and
    ``sum_k 2^-N f^N_k`` is the trapezoid integral of the tabulation.

    Parameters
    ----------
    ts : array_like
        Strictly increasing sample positions (at least 2).
    values : array_like
        Nonnegative samples.
    depth : int
        ``0 <= depth <= 20``.
    """
    ts = np.asarray(ts, dtype=float)
    vs = np.asarray(values, dtype=float)
    depth = int(depth)
    if not 0 <= depth <= 20:
        raise ValidationError(f"dyadic_average: depth must be in [0, 20], got {depth}")
    if ts.ndim != 1 or ts.shape != vs.shape or len(ts) < 2:
        raise ValidationError("dyadic_average: need matching 1-D arrays of at least 2 samples")
    if np.any(np.diff(ts) <= 0):
        raise ValidationError("dyadic_average: sample positions must be strictly increasing")
    if np.any(vs < 0) or not np.all(np.isfinite(vs)):
        raise ValidationError("dyadic_average: values must be finite and nonnegative")
    scale = 2.0 ** depth
    k0 = int(math.floor(ts[0] * scale))
    k1 = int(math.ceil(ts[-1] * scale))
    ks = np.arange(k0, max(k1, k0 + 1))
    prim = _PiecewiseLinearIntegral(ts, vs)
    edges = prim(np.append(ks, ks[-1] + 1) / scale)
    means = scale * np.diff(edges)
    return DyadicAverages(depth, {int(k): float(m) for k, m in zip(ks, means)})
