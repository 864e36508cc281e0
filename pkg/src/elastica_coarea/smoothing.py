"""Smooth approximants of ``c * 1_E``: cut-off profiles, offset curves, collars.

The construction: with ``d`` the signed distance to ``partial E`` (negative
inside), set

    u(x) = c          if d(x) <= 0,
           w(d(x))    if 0 < d(x) < eta,
           0          otherwise,

where ``w`` is a C^2 monotone profile collapsing from ``c`` to 0 across the
collar of width ``eta``.  The level line ``{u = t}`` is the outward offset of
``partial E`` at distance ``w^{-1}(t)``; offsets transform curvature and arc
length by

    k_gamma = k / |1 + delta k|,        ds_gamma = |1 + delta k| ds,

which :func:`offset_curve` and :func:`offset_energy_transform` expose.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .curve_core import Curve, ElasticaParams, curvature_samples, elastica_energy, resample_arclength
from .curve_systems import CurveSystem, interior_mask, trace_distance
from .errors import OffsetSingularity, ValidationError
from .grid_function import DEFAULT_SAMPLE_CELLS, GridFunction, coarea_energy
from .reports import EnergyReport, format_total

logger = logging.getLogger(__name__)

__all__ = [
    "CutoffProfile",
    "OffsetCurve",
    "offset_curve",
    "offset_energy_transform",
    "signed_distance",
    "build_smooth_indicator",
    "SmoothingStudy",
    "smoothing_convergence_study",
    "admissible_collar",
    "OFFSET_MARGIN",
]

#: admissibility margin on |1 + delta k|
OFFSET_MARGIN = 0.05


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


@dataclass(frozen=True)
class CutoffProfile:
    """Quintic smoothstep cut-off ``w(d) = c (1 - S(d / width))``.

    ``S(x) = 10 x^3 - 15 x^4 + 6 x^5`` is monotone with vanishing first and
    second derivatives at both ends, so ``w`` is C^2, nonincreasing, equal to
    ``c`` at 0 and to 0 at ``width``, with flat ends.

    Parameters
    ----------
    width : float
        Collar width ``eta`` (physical units).
    c : float
        Plateau height.
    n_samples : int
        Size of the tabulation returned by :attr:`samples`.
    """

    width: float
    c: float = 1.0
    n_samples: int = 257

    def __post_init__(self):
        if not (np.isfinite(self.width) and self.width > 0):
            raise ValidationError(f"CutoffProfile: width must be positive, got {self.width}")
        if not (np.isfinite(self.c) and self.c > 0):
            raise ValidationError(f"CutoffProfile: c must be positive, got {self.c}")

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        return self.c * (1.0 - _smoothstep(d / self.width))

    def derivative(self, d):
        x = np.clip(np.asarray(d, dtype=float) / self.width, 0.0, 1.0)
        return -self.c * 30.0 * x * x * (1.0 - x) ** 2 / self.width

    def inverse(self, t):
        """Distance ``d`` with ``w(d) = t`` for ``0 < t < c`` (bisection)."""
        t = np.asarray(t, dtype=float)
        lo = np.zeros_like(t)
        hi = np.full_like(t, self.width)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            above = self(mid) > t
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return 0.5 * (lo + hi)

    @property
    def samples(self) -> np.ndarray:
        """``(n_samples, 2)`` table of ``(d, w(d))`` on ``[0, width]``."""
        d = np.linspace(0.0, self.width, self.n_samples)
        return np.column_stack([d, self(d)])


@dataclass(frozen=True, eq=False)
class OffsetCurve:
    """Normal offset ``gamma = alpha + delta n`` of a base curve."""

    base: Curve
    delta: float
    result: Curve
    predicted_curvature: np.ndarray = field(repr=False)
    stretch: np.ndarray = field(repr=False)  # 1 + delta * k at the base samples


def _outward_frame(base: Curve):
    """Relative curvature (positive where convex) and outward unit normals."""
    p = base.points
    tangent = np.roll(p, -1, axis=0) - np.roll(p, 1, axis=0)
    tangent /= np.hypot(*tangent.T)[:, None]
    o = base.orientation
    normal = o * np.column_stack([tangent[:, 1], -tangent[:, 0]])
    k = o * curvature_samples(base)
    return k, normal


def _check_margin(base: Curve, k: np.ndarray, delta: float, what: str):
    stretch = 1.0 + delta * k
    bad = np.abs(stretch) < OFFSET_MARGIN
    if np.any(bad):
        j = int(np.argmin(np.abs(stretch)))
        raise OffsetSingularity(
            f"{what}: |1 + delta*k| = {abs(stretch[j]):.3g} < {OFFSET_MARGIN} for delta={delta:g}",
            base.points[j],
        )
    return stretch


def _spline_resample(points: np.ndarray, n: int, oversample: int = 32) -> np.ndarray:
    """Equal-arc-length samples of the periodic cubic spline through ``points``.

    Resampling a polygon at its own density places the new points on chords,
    and the chord sag, divided by the squared spacing, shows up as an O(1)
    error in the Menger curvature.  Densifying along a smooth interpolant
    first makes the sag negligible.
    """
    closed = np.vstack([points, points[:1]])
    s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(closed, axis=0).T))])
    spline = CubicSpline(s, closed, bc_type="periodic")
    dense = spline(np.linspace(0.0, s[-1], oversample * len(points), endpoint=False))
    return resample_arclength(Curve(dense), n).points


def offset_curve(base: Curve, delta: float) -> OffsetCurve:
    """Offset a closed curve by ``delta`` along its outward normal.

    Parameters
    ----------
    base : Curve
        Arc-length resampled base curve.
    delta : float
        Signed distance; positive moves outward.

    Returns
    -------
    OffsetCurve
        ``result`` is re-resampled to arc length with the base sample count
        (for ``delta == 0`` it is the base itself);
        ``predicted_curvature`` holds ``k / |1 + delta k|`` at the base
        samples (sign relative to the outward normal, i.e. positive where
        convex).

    Raises
    ------
    OffsetSingularity
        If ``|1 + delta k| < 0.05`` somewhere.
    """
    delta = float(delta)
    k, normal = _outward_frame(base)
    stretch = _check_margin(base, k, delta, "offset_curve")
    if delta == 0.0:
        result = base
    else:
        result = Curve(_spline_resample(base.points + delta * normal, base.n))
    return OffsetCurve(base, delta, result, k / np.abs(stretch), stretch)


def offset_energy_transform(base: Curve, delta: float, params: ElasticaParams = ElasticaParams()) -> float:
    """Predicted elastica energy of the ``delta``-offset, evaluated on the base.

    ``sum_j [alpha + beta |k_j / (1 + delta k_j)|^p] |1 + delta k_j| ds_j``.
    """
    k, _ = _outward_frame(base)
    stretch = _check_margin(base, k, float(delta), "offset_energy_transform")
    w = base.vertex_weights()
    integrand = params.alpha + params.beta * np.abs(k / stretch) ** params.p
    return float(np.sum(integrand * np.abs(stretch) * w))


def admissible_collar(boundary: Curve) -> float:
    """Largest outward offset keeping ``1 + delta k >= 0.05`` (inf if convex)."""
    k, _ = _outward_frame(boundary)
    kmin = float(k.min())
    return np.inf if kmin >= 0 else (1.0 - OFFSET_MARGIN) / (-kmin)


def signed_distance(boundary: Curve, grid: GridFunction, max_distance: float | None = None) -> np.ndarray:
    """Signed distance to a closed curve on the grid nodes (negative inside).

    Distances are exact point-to-segment minima.  When ``max_distance`` is
    given, nodes outside the curve and farther than it are only guaranteed to
    carry a value ``> max_distance``.
    """
    system = CurveSystem([boundary])
    X, Y = grid.mesh()
    inside = interior_mask(system, grid.xs, grid.ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    out = ~inside.ravel()
    d = np.empty(len(pts))
    if max_distance is None:
        d[:] = trace_distance(pts, system)
    else:
        # coarse filter by vertex distance, exact distance where it matters
        from scipy.spatial import cKDTree

        coarse, _ = cKDTree(boundary.points).query(pts)
        near = coarse <= max_distance + boundary.segment_lengths.max()
        d[:] = coarse
        sel = near | ~out
        d[sel] = trace_distance(pts[sel], system)
    d[~out] *= -1.0
    return d.reshape(X.shape)


def build_smooth_indicator(boundary: Curve, c: float, profile: CutoffProfile,
                           grid: GridFunction) -> GridFunction:
    """Smooth approximant of ``c * 1_E`` with a collar of width ``profile.width``.

    Parameters
    ----------
    boundary : Curve
        Simple closed curve ``partial E`` (reoriented counterclockwise if needed).
    c : float
        Plateau value.
    profile : CutoffProfile
        Cut-off profile; its own ``c`` is ignored in favour of ``c``.
    grid : GridFunction
        Template providing shape, spacing and origin (values are ignored).

    Raises
    ------
    ValidationError
        If the collar is narrower than 4 cells or leaves the grid.
    OffsetSingularity
        If the collar exceeds the curvature-admissible width.
    """
    boundary = boundary.with_orientation(1)
    eta = profile.width
    if eta < 4 * grid.spacing:
        raise ValidationError(
            f"build_smooth_indicator: collar {eta:g} is narrower than 4 grid cells ({4 * grid.spacing:g})"
        )
    xmin, ymin, xmax, ymax = grid.bbox
    bx0, by0 = boundary.points.min(axis=0)
    bx1, by1 = boundary.points.max(axis=0)
    if bx0 - eta <= xmin or by0 - eta <= ymin or bx1 + eta >= xmax or by1 + eta >= ymax:
        raise ValidationError("build_smooth_indicator: the collar does not fit inside the grid")
    limit = admissible_collar(boundary)
    if eta > limit:
        k, _ = _outward_frame(boundary)
        raise OffsetSingularity(
            f"build_smooth_indicator: collar {eta:g} exceeds the admissible width {limit:.4g}",
            boundary.points[int(np.argmin(k))],
        )
    d = signed_distance(boundary, grid, max_distance=eta)
    shaped = CutoffProfile(eta, c)
    values = np.where(d <= 0, c, np.where(d < eta, shaped(np.maximum(d, 0.0)), 0.0))
    return grid.like(values)


@dataclass(frozen=True)
class StudyRow:
    collar: float
    F_coarea: float
    target: float
    abs_error: float


@dataclass
class SmoothingStudy:
    """Collar-width study of ``|F(u_h) - c W(partial E)|``."""

    rows: list
    flags: dict
    reports: list = field(default_factory=list, repr=False)

    def to_csv(self) -> str:
        lines = ["collar,F_coarea,target,abs_error"]
        for r in self.rows:
            lines.append(f"{r.collar!r},{format_total(r.F_coarea)},{format_total(r.target)},{format_total(r.abs_error)}")
        return "\n".join(lines) + "\n"

    @property
    def errors(self) -> list:
        return [r.abs_error for r in self.rows]

    @property
    def relative_errors(self) -> list:
        return [r.abs_error / r.target for r in self.rows]


def smoothing_convergence_study(boundary: Curve, c: float, collar_widths, params: ElasticaParams,
                                grid: GridFunction, n_levels: int = 64,
                                sample_cells: float = DEFAULT_SAMPLE_CELLS) -> SmoothingStudy:
    """Tabulate ``F_coarea(u_eta)`` against ``c * W(partial E)`` for shrinking collars.

    ``flags["decreasing"]`` is set when every error is below the previous
    one; ``flags["non_monotone"]`` when some error exceeds 1.2 times the
    previous one.
    """
    widths = [float(w) for w in collar_widths]
    if not widths:
        raise ValidationError("smoothing_convergence_study: empty collar list")
    if any(b >= a for a, b in zip(widths, widths[1:])):
        raise ValidationError("smoothing_convergence_study: collar widths must decrease")
    target = c * elastica_energy(boundary, params)
    rows, reports = [], []
    for w in widths:
        u = build_smooth_indicator(boundary, c, CutoffProfile(w, c), grid)
        rep = coarea_energy(u, params, n_levels, sample_cells=sample_cells)
        rows.append(StudyRow(w, rep.total, target, abs(rep.total - target)))
        reports.append(rep)
        logger.info("collar %.4g: F=%.6g target=%.6g", w, rep.total, target)
    errs = [r.abs_error for r in rows]
    flags = {
        "decreasing": all(b < a for a, b in zip(errs, errs[1:])),
        "non_monotone": any(b > 1.2 * a for a, b in zip(errs, errs[1:])),
    }
    return SmoothingStudy(rows, flags, reports)


def as_energy_report(study: SmoothingStudy) -> EnergyReport:
    """View a study as an :class:`EnergyReport` (one row per collar)."""
    from .reports import LevelRow

    rows = [LevelRow(i, r.collar, float("nan"), float("nan"), r.F_coarea) for i, r in enumerate(study.rows)]
    return EnergyReport(rows=rows, total=study.rows[-1].F_coarea, flags=dict(study.flags))
