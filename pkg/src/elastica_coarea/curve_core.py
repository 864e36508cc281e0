"""Closed planar curves, arc-length resampling, Menger curvature and p-elastica energy.

A :class:`Curve` is a closed polyline; the first point is implicitly joined to
the last one.  Curvature is estimated on consecutive point triples by the
circumscribed-circle (Menger) formula, which is exact on circles at any
sampling density, and the p-elastica energy

.. math::  W(\\gamma) = \\int_\\gamma (\\alpha + \\beta |k|^p)\\, ds

is evaluated with a midpoint rule on the per-vertex dual lengths.

Open polylines (arcs of cusped sets, clipped level lines) are handled by the
module-level helpers :func:`polyline_curvature` and :func:`polyline_energy`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCurve, ValidationError

logger = logging.getLogger(__name__)

__all__ = [
    "Curve",
    "ElasticaParams",
    "resample_arclength",
    "curvature_samples",
    "elastica_energy",
    "energy_terms",
    "polyline_curvature",
    "polyline_energy",
    "resample_polyline",
    "circle",
    "ellipse",
]


@dataclass(frozen=True)
class ElasticaParams:
    """Weights of the p-elastica integrand ``alpha + beta * |k|**p``.

    Parameters
    ----------
    p : float
        Curvature exponent, ``p > 1``.
    alpha : float
        Length weight, ``alpha > 0``.
    beta : float
        Curvature weight, ``beta >= 0``.
    """

    p: float = 2.0
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("p", "alpha", "beta"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValidationError(f"ElasticaParams: {name} must be finite, got {value!r}")
        if not self.p > 1:
            raise ValidationError(f"ElasticaParams: p must be > 1, got {self.p}")
        if not self.alpha > 0:
            raise ValidationError(f"ElasticaParams: alpha must be > 0, got {self.alpha}")
        if not self.beta >= 0:
            raise ValidationError(f"ElasticaParams: beta must be >= 0, got {self.beta}")


def _as_points(points) -> np.ndarray:
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError(f"points must have shape (n, 2), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("points must be finite")
    return pts


def _drop_repeats(pts: np.ndarray, closed: bool) -> np.ndarray:
    """Remove consecutive exact duplicates (and a repeated closing point)."""
    if len(pts) == 0:
        return pts
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
    pts = pts[keep]
    if closed and len(pts) > 1 and np.all(pts[0] == pts[-1]):
        pts = pts[:-1]
    return pts


@dataclass(frozen=True, eq=False)
class Curve:
    """A closed planar polyline.

    Parameters
    ----------
    points : array_like, shape (n, 2)
        Vertices in order.  Consecutive duplicates and a repeated closing
        vertex are dropped; at least three distinct vertices must remain.
    length : float, optional
        Length ``L`` of the curve this polyline represents.  Defaults to the
        polyline perimeter.  :func:`resample_arclength` sets it to the length
        of the source polyline, so that resampling preserves ``L`` exactly and
        the uniform spacing is ``L / n``.

    Attributes
    ----------
    orientation : int
        ``+1`` for counterclockwise (non-negative signed area), ``-1`` otherwise.
    arc_length_total : float
        The length ``L``.
    """

    points: np.ndarray
    length: float | None = None
    _segments: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pts = _drop_repeats(_as_points(self.points), closed=True)
        if len(pts) < 3:
            raise DegenerateCurve(
                f"Curve: need at least 3 distinct points, got {len(pts)}"
            )
        seg = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
        perimeter = float(seg.sum())
        if not perimeter > 0:
            raise DegenerateCurve("Curve: total length is zero")
        pts.setflags(write=False)
        seg.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_segments", seg)
        if self.length is None:
            object.__setattr__(self, "length", perimeter)
        elif not (np.isfinite(self.length) and self.length > 0):
            raise DegenerateCurve(f"Curve: length must be positive, got {self.length}")
        else:
            object.__setattr__(self, "length", float(self.length))

    # -- basic geometry -------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return self.n

    @property
    def segment_lengths(self) -> np.ndarray:
        """Length of segment ``i`` joining vertex ``i`` to vertex ``i+1``."""
        return self._segments

    @property
    def perimeter(self) -> float:
        return float(self._segments.sum())

    @property
    def arc_length_total(self) -> float:
        return float(self.length)

    @property
    def signed_area(self) -> float:
        x, y = self.points.T
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    @property
    def orientation(self) -> int:
        return 1 if self.signed_area >= 0 else -1

    @property
    def median_spacing(self) -> float:
        return float(np.median(self._segments))

    @property
    def spacing_ratio(self) -> float:
        """Max over min consecutive segment length."""
        return float(self._segments.max() / self._segments.min())

    def vertex_weights(self) -> np.ndarray:
        """Dual lengths ``(|e_{i-1}| + |e_i|)/2`` rescaled to sum to ``L``."""
        dual = 0.5 * (self._segments + np.roll(self._segments, 1))
        return dual * (self.length / dual.sum())

    # -- transforms -----------------------------------------------------
    def reversed(self) -> "Curve":
        return Curve(self.points[::-1].copy(), length=self.length)

    def transformed(self, angle: float = 0.0, shift=(0.0, 0.0), scale: float = 1.0) -> "Curve":
        """Rotate by ``angle``, scale by ``scale`` about the origin, then translate."""
        c, s = np.cos(angle), np.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        pts = scale * self.points @ rot.T + np.asarray(shift, dtype=float)
        return Curve(pts, length=self.length * abs(scale))

    def with_orientation(self, orientation: int) -> "Curve":
        return self if self.orientation == orientation else self.reversed()

    def closed_points(self) -> np.ndarray:
        """Vertices with the first one repeated at the end."""
        return np.vstack([self.points, self.points[:1]])


def resample_polyline(points, n_samples: int, closed: bool) -> np.ndarray:
    """Place ``n_samples`` points at equal arc length along a polyline.

    For a closed polyline the samples are ``s_k = k L / n`` (``k < n``); for an
    open one they include both endpoints, ``s_k = k L / (n - 1)``.
    Positions are interpolated linearly along the input segments.
    """
    pts = _drop_repeats(_as_points(points), closed=closed)
    if len(pts) < 2:
        raise DegenerateCurve("resample: need at least 2 distinct points")
    path = np.vstack([pts, pts[:1]]) if closed else pts
    s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(path, axis=0).T))])
    total = s[-1]
    if not total > 0:
        raise DegenerateCurve("resample: total length is zero")
    if closed:
        targets = np.arange(n_samples) * (total / n_samples)
    else:
        targets = np.linspace(0.0, total, n_samples)
    return np.column_stack([np.interp(targets, s, path[:, 0]), np.interp(targets, s, path[:, 1])])


def resample_arclength(curve: Curve, n_samples: int) -> Curve:
    """Resample a closed curve to ``n_samples`` points at equal arc-length spacing.

    Parameters
    ----------
    curve : Curve
        Input closed polyline.
    n_samples : int
        Number of output points, at least 8.

    Returns
    -------
    Curve
        Samples at ``s_k = k P / n`` along the input polyline of perimeter
        ``P``.  The represented length ``L`` is carried over unchanged.

    Raises
    ------
    DegenerateCurve
        If the input has zero length.
    """
    n_samples = int(n_samples)
    if n_samples < 8:
        raise ValidationError(f"resample_arclength: n_samples must be >= 8, got {n_samples}")
    pts = resample_polyline(curve.points, n_samples, closed=True)
    return Curve(pts, length=curve.arc_length_total)


def _menger(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Signed Menger curvature of triples ``(a, b, c)``; positive for left turns."""
    ab = np.hypot(*(b - a).T)
    bc = np.hypot(*(c - b).T)
    ca = np.hypot(*(a - c).T)
    den = ab * bc * ca
    bad = den == 0
    if np.any(bad):
        j = int(np.flatnonzero(bad)[0])
        raise DegenerateCurve(f"curvature: zero-side point triple at vertex {tuple(b[j])}")
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    return 2.0 * cross / den


def curvature_samples(curve: Curve) -> np.ndarray:
    """Per-vertex signed curvature by the circumscribed-circle estimator.

    The sign is geometric: left turns are positive, so a counterclockwise
    circle of radius ``R`` yields ``+1/R`` and a clockwise one ``-1/R``.
    Collinear triples give exactly 0.

    Raises
    ------
    DegenerateCurve
        If a triple has a zero-length side (e.g. a hairpin ``a == c``).
    """
    p = curve.points
    return _menger(np.roll(p, 1, axis=0), p, np.roll(p, -1, axis=0))


def polyline_curvature(points) -> np.ndarray:
    """Curvature at the interior vertices of an open polyline (endpoints get 0)."""
    p = _drop_repeats(_as_points(points), closed=False)
    k = np.zeros(len(p))
    if len(p) >= 3:
        k[1:-1] = _menger(p[:-2], p[1:-1], p[2:])
    return k


def energy_terms(curve: Curve, p: float = 2.0, need_curvature: bool = True) -> tuple[float, float]:
    """Return ``(L, sum_j |k_j|**p * w_j)`` for a closed curve."""
    if not need_curvature:
        return curve.arc_length_total, 0.0
    k = curvature_samples(curve)
    return curve.arc_length_total, float(np.sum(np.abs(k) ** p * curve.vertex_weights()))


def elastica_energy(curve: Curve, params: ElasticaParams = ElasticaParams()) -> float:
    """p-elastica energy ``sum_j (alpha + beta |k_j|^p) ds_j`` of a closed curve.

    With uniform arc-length sampling ``ds_j = L / n``.  When ``beta == 0`` the
    curvature is not evaluated and the result is exactly ``alpha * L``.
    """
    length, curv = energy_terms(curve, params.p, need_curvature=params.beta > 0)
    return params.alpha * length + params.beta * curv


def polyline_energy(points, params: ElasticaParams = ElasticaParams(), closed: bool = False,
                    weights=None) -> tuple[float, float]:
    """Length and curvature integral of a polyline.

    For an open polyline the length is the sum of its segments and the
    curvature integral runs over interior vertices with dual-length weights
    (the endpoints carry half a segment and no curvature).

    Parameters
    ----------
    weights : array_like, optional
        Per-vertex multiplicative weights in ``[0, 1]`` applied to the dual
        lengths (used when only part of a curve is counted).

    Returns
    -------
    length, curvature_integral : float
    """
    pts = _drop_repeats(_as_points(points), closed=closed)
    if closed:
        c = Curve(pts)
        k = curvature_samples(c) if params.beta > 0 else np.zeros(c.n)
        dual = c.vertex_weights()
    else:
        seg = np.hypot(*np.diff(pts, axis=0).T)
        dual = np.zeros(len(pts))
        dual[:-1] += 0.5 * seg
        dual[1:] += 0.5 * seg
        k = polyline_curvature(pts) if params.beta > 0 else np.zeros(len(pts))
    if weights is not None:
        dual = dual * np.asarray(weights, dtype=float)
    return float(dual.sum()), float(np.sum(np.abs(k) ** params.p * dual))


# -- constructors used throughout the package and its tests -----------------

def circle(radius: float = 1.0, n: int = 256, center=(0.0, 0.0), ccw: bool = True,
           phase: float = 0.0) -> Curve:
    """Regular ``n``-gon inscribed in a circle, starting at angle ``phase``."""
    theta = phase + 2 * np.pi * np.arange(n) / n
    if not ccw:
        theta = phase - 2 * np.pi * np.arange(n) / n
    pts = np.column_stack([np.cos(theta), np.sin(theta)]) * radius + np.asarray(center, float)
    return Curve(pts)


def ellipse(a: float = 2.0, b: float = 1.0, n: int = 512, center=(0.0, 0.0),
            oversample: int = 64) -> Curve:
    """Counterclockwise ellipse with semi-axes ``a``, ``b``, resampled to arc length."""
    m = max(n * oversample, 4096)
    theta = 2 * np.pi * np.arange(m) / m
    dense = np.column_stack([a * np.cos(theta), b * np.sin(theta)]) + np.asarray(center, float)
    # the length of the fine polygon is within O(1/m^2) of the true perimeter
    return resample_arclength(Curve(dense), n)
