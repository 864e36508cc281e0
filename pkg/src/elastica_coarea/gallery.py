"""Executable reconstructions of classical examples and counterexamples.

Two groups live here.

*Savaré's sequence.*  ``U`` is the primitive of the 2-periodic function
equal to ``1`` on ``(0, 1/2) U (1, 2)`` and ``-1`` on ``(1/2, 1)``, and
``U_n(x) = 2^-n U(2^n x)``.  The level counts ``f_n(t) = #{U_n = t}``
alternate between 3 and 1 on dyadic slabs of width ``2^-(n+1)``; they
converge weakly to 2 but not strongly, while the energies of the level lines
of ``u_n(x1, x2) = U_n(x1)`` stay bounded.

*Named geometries.*  Only the topology of each example matters, so every
fixture is parameterized; the defaults are disks of radius 1 with tops
3 apart, drop-shaped "horns" whose cusps face each other, and circular
arcs of opening ``2 pi / 3``.  Expected values are always computed by the
library from these parameters.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .curve_core import Curve, ElasticaParams, resample_arclength, resample_polyline
from .curve_systems import CurveSystem, winding_grid
from .errors import ValidationError
from .grid_function import GridFunction, coarea_energy
from .nesting import LevelFamily, dyadic_average
from .relaxed_sets import CuspedSet, Omega, relaxed_energy_cusped
from .smoothing import CutoffProfile, admissible_collar, build_smooth_indicator

logger = logging.getLogger(__name__)

__all__ = [
    "savare_U",
    "savare_level_counts",
    "savare_weak_convergence",
    "savare_energy_bound",
    "savare_dyadic_means",
    "savare_expected_count",
    "SavareFamily",
    "Fixture",
    "DropShape",
    "drop_arc",
    "mirrored_arcs",
    "mirrored_arcs_closed_form",
    "two_level_geometry",
    "tube_approximant",
    "staircase_table",
    "build_figure_examples",
    "FIXTURE_NAMES",
    "evaluate_fixture",
    "export_fixtures",
]


# ---------------------------------------------------------------------------
# Savaré


def savare_U(y) -> np.ndarray:
    """Primitive of the 2-periodic function ``+1`` on ``(0, 1/2) U (1, 2)``, ``-1`` on ``(1/2, 1)``.

    On one period: rises from ``q`` to ``q + 1/2`` on ``[2q, 2q + 1/2]``,
    falls back to ``q`` on ``[2q + 1/2, 2q + 1]`` and rises to ``q + 1`` on
    ``[2q + 1, 2q + 2]``.  Defined for ``y >= 0``.
    """
    y = np.asarray(y, dtype=float)
    q = np.floor(y / 2.0)
    r = y - 2.0 * q
    return q + np.where(r < 0.5, r, np.where(r < 1.0, 1.0 - r, r - 1.0))


@dataclass(frozen=True)
class SavareFamily:
    """Tabulation of ``U_n`` on ``[0, x_max]``.

    ``x_max`` is 1 for ``n >= 1`` and 2 for ``n = 0`` (see
    :func:`savare_level_counts`).  ``U_n(1) = 1/2`` for every ``n >= 1``.
    """

    n: int
    xs: np.ndarray
    U_n: np.ndarray

    @classmethod
    def build(cls, n: int, points_per_slab: int = 64) -> "SavareFamily":
        n = int(n)
        if n < 0:
            raise ValidationError("SavareFamily: n must be nonnegative")
        x_max = 1.0 if n >= 1 else 2.0
        # breakpoints of U_n sit at multiples of 2^-(n+1); put grid nodes on them
        m = int(round(x_max * 2 ** (n + 1))) * points_per_slab
        xs = np.linspace(0.0, x_max, m + 1)
        return cls(n, xs, 2.0 ** -n * savare_U(2.0 ** n * xs))

    @property
    def grid_resolution(self) -> int:
        return len(self.xs)


def _count_solutions(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Number of solutions of ``V(x) = t`` for a piecewise-linear ``V`` given at nodes.

    Half-open rule: a node exactly at ``t`` is counted once per crossing.
    """
    above = values[None, :] >= t[:, None]
    return np.abs(np.diff(above.astype(np.int8), axis=1)).sum(axis=1)


def _slab_levels(n: int, t_max: float, per_slab: int) -> np.ndarray:
    """Midpoints of ``per_slab`` sub-slabs in every dyadic slab of width ``2^-(n+1)``."""
    width = 2.0 ** -(n + 1) / per_slab
    count = int(round(t_max / width))
    return (np.arange(count) + 0.5) * width


def savare_level_counts(n: int, t_grid=None, per_slab: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Tabulate ``f_n(t)``, the number of solutions of ``U_n(x) = t``.

    Solutions are counted by sign changes on a node grid containing every
    breakpoint of ``U_n`` (``2^(n+6)`` nodes per unit length or more), which
    makes the count exact for levels off the breakpoints.

    The counting domain is ``[0, 1]`` for ``n >= 1``, which holds
    ``2^(n-1)`` whole periods of ``U(2^n .)``; for ``n = 0`` it is the full
    period ``[0, 2]`` (on ``[0, 1]`` alone, ``U`` covers only half a period
    and the 3/1 slab pattern does not hold).

    Parameters
    ----------
    n : int
    t_grid : array_like, optional
        Levels; default the sub-slab midpoints in ``(0, 1/2)`` (``(0, 1)``
        for ``n = 0``), which avoid the breakpoints ``k / 2^(n+1)``.
    per_slab : int
        Sub-slabs per dyadic slab for the default grid.

    Returns
    -------
    t, counts : ndarray
    """
    fam = SavareFamily.build(n)
    if t_grid is None:
        t_grid = _slab_levels(n, 0.5 if n >= 1 else 1.0, per_slab)
    t = np.asarray(t_grid, dtype=float)
    return t, _count_solutions(fam.U_n, t)


def savare_expected_count(n: int, t) -> np.ndarray:
    """Slab pattern: 3 on ``(2k/2^(n+1), (2k+1)/2^(n+1))``, 1 on the next slab."""
    k = np.floor(np.asarray(t, dtype=float) * 2 ** (n + 1)).astype(int)
    return np.where(k % 2 == 0, 3, 1)


def _integrate_on_slabs(t: np.ndarray, values: np.ndarray, width: float) -> float:
    return float(np.sum(values) * width)


def savare_weak_convergence(n_list, test_functions: dict | None = None, per_slab: int = 8) -> dict:
    """Weak but not strong convergence of ``f_n`` to 2 on ``(0, 1/2)``.

    For each ``n`` (``n >= 1``) and test function ``phi``: ``int f_n phi``,
    ``int 2 phi`` and their gap, by the midpoint rule on sub-slabs (exact for
    affine ``phi`` since ``f_n`` is constant on each sub-slab); also
    ``int |f_n - 2|^2``, which stays at ``1/2``.

    Returns
    -------
    dict
        ``{"rows": [{"n", "phi", "int_fn_phi", "int_2phi", "gap"}...],
        "l2_defect": {n: value}, "halving": {phi: [ratios]}}``.
    """
    if test_functions is None:
        test_functions = {"one": lambda t: np.ones_like(t), "t": lambda t: t}
    rows, l2 = [], {}
    gaps = {name: [] for name in test_functions}
    for n in n_list:
        n = int(n)
        if n < 1:
            raise ValidationError("savare_weak_convergence: n must be >= 1 (counting on [0, 1])")
        t, f = savare_level_counts(n, per_slab=per_slab)
        width = 2.0 ** -(n + 1) / per_slab
        l2[n] = _integrate_on_slabs(t, (f - 2.0) ** 2, width)
        for name, phi in test_functions.items():
            ph = np.asarray(phi(t), dtype=float)
            a = _integrate_on_slabs(t, f * ph, width)
            b = _integrate_on_slabs(t, 2.0 * ph, width)
            rows.append({"n": n, "phi": name, "int_fn_phi": a, "int_2phi": b, "gap": a - b})
            gaps[name].append(abs(a - b))
    halving = {}
    for name, g in gaps.items():
        halving[name] = [g[i + 1] / g[i] if g[i] > 0 else 0.0 for i in range(len(g) - 1)]
    return {"rows": rows, "l2_defect": l2, "halving": halving}


def savare_energy_bound(n: int, grid_resolution: int | None = None,
                        params: ElasticaParams = ElasticaParams()) -> dict:
    """``int_0^{1/2} int_{level line in (0,1)^2} (alpha + beta |k|^p) dH^1 dt`` for ``u_n(x1, x2) = U_n(x1)``.

    ``u_n`` is sampled on a square grid over ``[0, 1]^2``.  Every level line
    is a union of vertical unit segments (the field does not depend on
    ``x2``, which is checked on the grid), so each level contributes
    ``alpha * count`` with zero curvature.  The count is taken from the grid
    row by sign changes; levels are sub-slab midpoints in ``(0, 1/2)``.

    Returns
    -------
    dict
        ``{"n", "energy", "bound": 1.5, "below_bound"}``.
    """
    n = int(n)
    res = grid_resolution or max(2 ** (n + 6) + 1, 65)
    xs = np.linspace(0.0, 1.0, res)
    # include the breakpoints of U_n so that the node values are exact
    xs = np.union1d(xs, np.arange(0, 2 ** (n + 1) + 1) / 2 ** (n + 1))
    row = 2.0 ** -n * savare_U(2.0 ** n * xs)
    field_ = np.tile(row, (8, 1))
    if np.ptp(field_, axis=0).max() != 0.0:  # pragma: no cover - construction guarantees this
        raise AssertionError("u_n must not depend on x2")
    per_slab = 8
    t = _slab_levels(max(n, 0), 0.5, per_slab)
    width = 0.5 / len(t)
    counts = _count_solutions(row, t)
    segment_length = 1.0  # vertical extent of (0, 1)^2
    per_level = params.alpha * counts * segment_length  # zero curvature
    energy = float(np.sum(per_level) * width)
    return {"n": n, "energy": energy, "bound": 1.5, "below_bound": energy < 1.5,
            "levels": len(t)}


def savare_dyadic_means(n: int, depth: int, per_slab: int = 8) -> dict:
    """Dyadic means of ``f_n`` over ``(0, 1/2)`` at a fixed depth; they tend to 2 as ``n`` grows."""
    t, f = savare_level_counts(n, per_slab=per_slab)
    width = 2.0 ** -(n + 1) / per_slab
    # tabulate the step function at sub-slab edges and midpoints so that the
    # piecewise-linear reading reproduces the slab means
    edges = np.arange(len(t) + 1) * width
    ts = np.concatenate([edges[:-1] + 1e-12 * width, t, edges[1:] - 1e-12 * width])
    vs = np.concatenate([f, f, f]).astype(float)
    order = np.argsort(ts)
    avg = dyadic_average(ts[order], vs[order], depth)
    inside = {k: v for k, v in avg.values.items() if (k + 1) * avg.width <= 0.5 + 1e-15}
    return {"n": n, "depth": depth, "means": inside,
            "max_deviation": max(abs(v - 2.0) for v in inside.values())}


# ---------------------------------------------------------------------------
# geometry helpers


@dataclass(frozen=True)
class DropShape:
    """Drop with a cusp, tangent to the x axis at the cusp.

    In cusp coordinates ``(x', y')`` with ``theta in [0, 2 pi]``::

        x' = -length * (1 - cos theta) / 2
        y' = width * sin(theta) * sin(theta / 2)**3

    Near the cusp both branches are parabolas ``y' = +-c x'^2`` with
    ``c = 2 width / length^2``; the rounded end has curvature
    ``length / (2 width^2)``.  With ``bend`` set, the drop is wrapped around
    a circle of that radius tangent to the x axis at the cusp and lying
    below it (``x'`` becomes arc length along the circle, ``y'`` the offset
    along its outward normal), so the branches become
    ``y = (+-c - 1 / (2 bend)) x^2 + O(x^3)``.
    """

    length: float = 0.6
    width: float = 0.12
    bend: float | None = 0.4

    @property
    def branch_coefficient(self) -> float:
        return 2.0 * self.width / self.length ** 2

    def bent(self, xp, yp) -> np.ndarray:
        """Map cusp coordinates through the bending (identity when ``bend`` is None)."""
        xp, yp = np.asarray(xp, float), np.asarray(yp, float)
        if self.bend is None:
            return np.column_stack([xp, yp])
        rho = self.bend
        r = rho + yp
        phi = xp / rho
        return np.column_stack([r * np.sin(phi), r * np.cos(phi) - rho])


def drop_arc(cusp, shape: DropShape = DropShape(), spacing: float = 0.02,
             pointing: int = +1) -> np.ndarray:
    """Counterclockwise drop boundary as an open polyline from the cusp back to the cusp.

    ``pointing = +1`` puts the body to the left of the cusp (the cusp points
    towards ``+x``); ``-1`` mirrors it.  The cusp is an exact vertex at both
    ends; interior samples are equally spaced in arc length.
    """
    cusp = np.asarray(cusp, dtype=float)
    theta = np.linspace(0.0, 2 * np.pi, 8001)
    xp = -0.5 * shape.length * (1.0 - np.cos(theta))
    yp = shape.width * np.sin(theta) * np.sin(theta / 2) ** 3
    pts = shape.bent(xp, yp)
    pts[0] = pts[-1] = 0.0
    total = np.hypot(*np.diff(pts, axis=0).T).sum()
    n = max(16, int(math.ceil(total / spacing)) + 1)
    arc = resample_polyline(pts, n, closed=False)
    arc[0] = arc[-1] = 0.0
    if pointing < 0:
        arc = arc[::-1] * np.array([-1.0, 1.0])
    return arc + cusp


def _segment_points(a, b, spacing):
    a, b = np.asarray(a, float), np.asarray(b, float)
    n = max(2, int(math.ceil(np.hypot(*(b - a)) / spacing)) + 1)
    return a + np.linspace(0.0, 1.0, n)[:, None] * (b - a)


def _circle_from_top(center, radius, spacing):
    n = max(32, int(math.ceil(2 * np.pi * radius / spacing)))
    theta = np.pi / 2 + 2 * np.pi * np.arange(n) / n
    pts = np.column_stack([np.cos(theta), np.sin(theta)]) * radius + np.asarray(center, float)
    pts[0] = (center[0], center[1] + radius)
    return Curve(pts)


def mirrored_arcs(radius: float = 1.0, opening: float = 2 * np.pi / 3, gap: float = 1.0,
                  n: int = 1024, pair: bool = True) -> CuspedSet:
    """Two mirror-image circular arcs ending tangent to a common line at cusps ``gap`` apart.

    The left arc ends at ``(-gap/2, 0)`` travelling towards ``+x``; the right
    one is its mirror image, traversed from ``(gap/2, 0)``.  With ``pair``
    the two ends are joined by a ghost bridge.
    """
    c1 = np.array([-gap / 2, 0.0])
    center = c1 + np.array([0.0, -radius])
    theta = np.linspace(np.pi / 2 + opening, np.pi / 2, n)
    left = center + radius * np.column_stack([np.cos(theta), np.sin(theta)])
    left[-1] = c1
    right = (left * np.array([-1.0, 1.0]))[::-1]
    pairs = [(tuple(c1), (gap / 2, 0.0))] if pair else []
    return CuspedSet([left, right], pairs)


def mirrored_arcs_closed_form(radius: float = 1.0, opening: float = 2 * np.pi / 3, gap: float = 1.0,
                              params: ElasticaParams = ElasticaParams()) -> float:
    """``2 R theta (alpha + beta R^-p) + 2 alpha gap`` for :func:`mirrored_arcs`."""
    return (2 * radius * opening * (params.alpha + params.beta * radius ** -params.p)
            + 2 * params.alpha * gap)


@dataclass
class TwoLevelGeometry:
    """Disks ``E`` and horns ``F`` (inside ``E``) with the four systems of the nesting example."""

    A: np.ndarray
    B: np.ndarray
    circles: tuple
    horns: CuspedSet
    gamma1: CurveSystem
    gamma2: CurveSystem
    gamma3: CurveSystem
    gamma4: CurveSystem
    params: dict


def two_level_geometry(separation: float = 3.0, radius: float = 1.0, spacing: float = 0.01,
                       shape: DropShape = DropShape(), midline_depth: float = 0.5) -> TwoLevelGeometry:
    """Build ``E`` (two disks), ``F`` (two horns with facing cusps) and the systems Gamma_1..Gamma_4.

    The disks have radius ``radius`` and top points ``A = (-separation/2, 0)``
    and ``B = (separation/2, 0)``.  Each horn is a drop whose cusp sits at a
    top point, tangent to the disk there and pointing at the other disk.

    * Gamma_1: the two circles.
    * Gamma_2: one closed curve -- left horn, bridge ``A -> B``, right horn,
      bridge ``B -> A`` -- i.e. the horns completed by their ghost bridge.
    * Gamma_3: the circles plus the bridge ``[A, B]`` with multiplicity 2.
    * Gamma_4: the circles plus a multiplicity-2 path running along the
      horns' midlines and the bridge, so that part of it lies inside ``F``.
    """
    A = np.array([-separation / 2, 0.0])
    B = np.array([separation / 2, 0.0])
    cl = _circle_from_top((A[0], -radius), radius, spacing)
    cr = _circle_from_top((B[0], -radius), radius, spacing)
    left = drop_arc(A, shape, spacing, +1)
    right = drop_arc(B, shape, spacing, -1)
    horns = CuspedSet([left, right], [(tuple(A), tuple(B))])
    relaxed = relaxed_energy_cusped(horns)
    if relaxed.extra is None:  # pragma: no cover - geometry always closes up
        raise RuntimeError("two_level_geometry: horns and bridge do not chain")
    gamma2 = relaxed.extra
    bridge = _segment_points(A, B, spacing)
    gamma1 = CurveSystem([cl, cr])
    gamma3 = CurveSystem([cl, cr], doubled=[bridge])
    xs = np.linspace(-midline_depth, 0.0, max(3, int(math.ceil(midline_depth / spacing)) + 1))
    mid_left = shape.bent(xs, np.zeros_like(xs)) + A
    mid_right = (mid_left * np.array([-1.0, 1.0]))[::-1]
    path = np.vstack([mid_left, bridge[1:-1], mid_right])
    gamma4 = CurveSystem([cl, cr], doubled=[path])
    return TwoLevelGeometry(A, B, (cl, cr), horns, gamma1, gamma2, gamma3, gamma4,
                            {"separation": separation, "radius": radius, "spacing": spacing,
                             "drop_length": shape.length, "drop_width": shape.width,
                             "drop_bend": shape.bend, "midline_depth": midline_depth})


def _two_level_grid(geom: TwoLevelGeometry, resolution: int = 481) -> GridFunction:
    """``u = 1_E + 1_F`` sampled at grid nodes (``F`` inside ``E``)."""
    r = geom.params["radius"]
    half = geom.params["separation"] / 2 + r + 0.5
    cy = -r
    bbox = (-half, cy - half, half, cy + half)
    h = 2 * half / (resolution - 1)
    xs = bbox[0] + h * np.arange(resolution)
    ys = bbox[1] + h * np.arange(resolution)
    e = (winding_grid(geom.gamma1, xs, ys) % 2 == 1).astype(float)
    f = (winding_grid(geom.gamma2, xs, ys) % 2 == 1).astype(float)
    return GridFunction(e + f, h, (bbox[0], bbox[1]))


# ---------------------------------------------------------------------------
# staircase (smooth approximants with bounded energy)


def tube_approximant(drops: CuspedSet, eps: float, taper: float = 0.15,
                     spacing: float = 0.01) -> Curve:
    """Smooth boundary obtained by opening the ghost bridge of ``drops`` into a tube.

    The chained curve (drops + bridge traversed both ways) is pushed along
    its outward normal by ``eps * nu``, where ``nu = 1`` over the bridge and
    within ``taper`` of the cusps, and decays to 0 (quintic) over the next
    ``taper``.  The two bridge passes separate into rails ``2 eps`` apart and
    the tube opens into both drops.
    """
    rep = relaxed_energy_cusped(drops)
    if rep.extra is None or len(rep.extra.curves) != 1:
        raise ValidationError("tube_approximant: the drops and bridges must chain into one closed curve")
    chain = rep.extra.curves[0].with_orientation(1)
    p = chain.points
    tangent = np.roll(p, -1, axis=0) - np.roll(p, 1, axis=0)
    tangent /= np.hypot(*tangent.T)[:, None]
    normal = np.column_stack([tangent[:, 1], -tangent[:, 0]])
    cusps = np.array([c for pair in drops.cusp_pairs for c in pair])
    lo, hi = cusps[:, 0].min() - taper, cusps[:, 0].max() + taper
    outside = np.maximum(lo - p[:, 0], p[:, 0] - hi).clip(0.0)
    s = np.clip(outside / taper, 0.0, 1.0)
    nu = 1.0 - s ** 3 * (10 - 15 * s + 6 * s ** 2)
    moved = Curve(p + eps * nu[:, None] * normal)
    n = max(64, int(math.ceil(moved.perimeter / spacing)))
    return resample_arclength(moved, n)


def staircase_table(fixture: "Fixture", params: ElasticaParams = ElasticaParams(),
                    n_levels: int = 64) -> list:
    """Energies and L1 errors of the smooth approximants of fixture (a).

    Step ``k`` opens the bridge into a tube of half-width ``eps_k`` and
    smooths its indicator with a collar ``min(eps_k, 0.9 * admissible)``,
    where *admissible* is the largest outward offset the tube boundary
    supports (see :func:`~elastica_coarea.smoothing.admissible_collar`).

    Returns one dict per step: ``eps``, ``collar``, ``admissible_collar``,
    ``F`` (coarea energy) and ``L1`` (distance to ``u``).
    """
    u = fixture.objects["u"]
    drops = fixture.objects["drops"]
    rows = []
    for eps in fixture.params["eps"]:
        boundary = tube_approximant(drops, eps, fixture.params["taper"])
        limit = admissible_collar(boundary)
        collar = min(eps, 0.9 * limit)
        uh = build_smooth_indicator(boundary, 1.0, CutoffProfile(collar), u)
        F = coarea_energy(uh, params, n_levels).total
        rows.append({"eps": eps, "collar": collar, "admissible_collar": limit, "F": F,
                     "L1": uh.l1_distance(u)})
        logger.info("staircase eps=%g collar=%g F=%.4f L1=%.5f", eps, collar, F, rows[-1]["L1"])
    return rows


# ---------------------------------------------------------------------------
# fixtures


@dataclass
class Fixture:
    """A named example: its objects, parameters, a one-line description and expected categorical outcomes."""

    name: str
    figure: str
    params: dict
    objects: dict
    expected: dict = field(default_factory=dict)


def _fig1_staircase() -> Fixture:
    shape = DropShape(length=1.0, width=0.3, bend=None)
    gap = 1.0
    A, B = np.array([-gap / 2, 0.0]), np.array([gap / 2, 0.0])
    drops = CuspedSet([drop_arc(A, shape, 0.01, +1), drop_arc(B, shape, 0.01, -1)],
                      [(tuple(A), tuple(B))])
    h = 1.0 / 300
    half_x, half_y = 1.75, 0.6
    xs = -half_x + h * np.arange(int(round(2 * half_x / h)) + 1)
    ys = -half_y + h * np.arange(int(round(2 * half_y / h)) + 1)
    body = CurveSystem([Curve(a[:-1]) for a in drops.arcs])
    u = GridFunction((winding_grid(body, xs, ys) % 2 == 1).astype(float), h, (xs[0], ys[0]))
    return Fixture(
        "fig1_staircase", "staircase of smoothed drop pairs approaching a bridged limit",
        {"gap": gap, "drop_length": shape.length, "drop_width": shape.width, "taper": 0.15,
         "eps": [0.08, 0.04, 0.02], "spacing": h},
        {"u": u, "drops": drops},
        {"energy": "bounded across refinements", "L1": "decreasing to 0"},
    )


def _fig5_nesting() -> Fixture:
    g = two_level_geometry()
    fams = {}
    for name, lower in (("gamma1_gamma2", g.gamma1), ("gamma3_gamma2", g.gamma3),
                        ("gamma4_gamma2", g.gamma4)):
        fams[name] = LevelFamily([0.0, 1.0], [lower, g.gamma2], (0.0, 2.0))
    return Fixture(
        "fig5_nesting", "four systems tested for nesting against a common reference",
        g.params,
        {"gamma1": g.gamma1, "gamma2": g.gamma2, "gamma3": g.gamma3, "gamma4": g.gamma4, **fams},
        {"gamma1_gamma2": "fails condition_iii", "gamma3_gamma2": "passes",
         "gamma4_gamma2": "fails condition_ii"},
    )


def _fig9_two_level() -> Fixture:
    g = two_level_geometry()
    u = _two_level_grid(g)
    return Fixture(
        "fig9_two_level", "two-level image with bridged and unbridged candidate families",
        {**g.params, "resolution": u.shape[0]},
        {"u": u, "unbridged": LevelFamily([0.0, 1.0], [g.gamma1, g.gamma2], (0.0, 2.0)),
         "bridged": LevelFamily([0.0, 1.0], [g.gamma3, g.gamma2], (0.0, 2.0)),
         "E": g.gamma1, "F": g.horns},
        {"unbridged": "rejected", "bridged": "best member",
         "gap_at_least": (g.params["separation"] - 2 * g.params["radius"]) * 1.0},
    )


def _fig10_drop_in_omega() -> Fixture:
    shape = DropShape(length=1.0, width=0.3, bend=None)
    arc = drop_arc((0.0, 0.0), shape, 0.01, +1)
    omega = Omega.rectangle(-1.3, -0.5, -0.2, 0.5)
    return Fixture(
        "fig10_drop_in_omega", "cusped drop, whole plane vs clipped to a window",
        {"drop_length": shape.length, "drop_width": shape.width, "omega": [-1.3, -0.5, -0.2, 0.5]},
        {"drop": CuspedSet([arc]), "omega": omega, "candidate": CurveSystem([Curve(arc[:-1])])},
        {"whole_plane": "infinite (unpaired cusp)", "in_omega": "finite"},
    )


def _fig11_double_drop() -> Fixture:
    shape = DropShape(length=1.0, width=0.3, bend=None)
    tilt = np.deg2rad(35.0)
    rot = np.array([[np.cos(tilt), -np.sin(tilt)], [np.sin(tilt), np.cos(tilt)]])
    left = drop_arc((0.0, 0.0), shape, 0.01, +1) @ rot.T
    left[0] = left[-1] = 0.0
    right = (left * np.array([-1.0, 1.0]))[::-1]
    notch = [[-1.3, -1.0], [1.3, -1.0], [1.3, 0.6], [0.35, 0.6], [0.0, 0.0], [-0.35, 0.6], [-1.3, 0.6]]
    return Fixture(
        "fig11_double_drop", "tilted double drop, whole plane vs clipped to a window",
        {"drop_length": shape.length, "drop_width": shape.width, "tilt_degrees": 35.0, "omega": notch},
        {"drops": CuspedSet([left, right]), "omega": Omega(notch),
         "candidate": CurveSystem([Curve(left[:-1]), Curve(right[:-1])])},
        {"whole_plane": "infinite (corner at the meeting point)",
         "in_omega": "finite (the meeting point lies on the boundary of Omega)"},
    )


def _fig6_drop_pair() -> Fixture:
    shape = DropShape(length=1.0, width=0.3, bend=None)
    gap = 1.0
    A, B = (-gap / 2, 0.0), (gap / 2, 0.0)
    drops = CuspedSet([drop_arc(A, shape, 0.01, +1), drop_arc(B, shape, 0.01, -1)], [(A, B)])
    return Fixture("fig6_drop_pair", "drop pair joined by a ghost bridge", {"gap": gap, "drop_length": shape.length,
                                                "drop_width": shape.width},
                   {"drops": drops}, {"bridge_term": 2 * gap})


def _mirrored_arcs() -> Fixture:
    return Fixture("mirrored_arcs", "mirrored circular arcs joined by two bridges",
                   {"radius": 1.0, "opening": 2 * np.pi / 3, "gap": 1.0},
                   {"arcs": mirrored_arcs()},
                   {"energy": mirrored_arcs_closed_form()})


_BUILDERS = {
    "fig1_staircase": _fig1_staircase,
    "fig5_nesting": _fig5_nesting,
    "fig6_drop_pair": _fig6_drop_pair,
    "fig9_two_level": _fig9_two_level,
    "fig10_drop_in_omega": _fig10_drop_in_omega,
    "fig11_double_drop": _fig11_double_drop,
    "mirrored_arcs": _mirrored_arcs,
}
FIXTURE_NAMES = tuple(_BUILDERS)


def build_figure_examples(names=None) -> dict:
    """Build the named fixtures (all by default); deterministic.

    Fixture keys: ``fig1_staircase``, ``fig5_nesting``, ``fig9_two_level``,
    ``fig10_drop_in_omega``, ``fig11_double_drop``, ``fig6_drop_pair`` and
    ``mirrored_arcs``.
    """
    names = FIXTURE_NAMES if names is None else tuple(names)
    out = {}
    for name in names:
        if name not in _BUILDERS:
            raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}")
        out[name] = _BUILDERS[name]()
    return out


# ---------------------------------------------------------------------------
# evaluation and export


def evaluate_fixture(fixture: Fixture, params: ElasticaParams = ElasticaParams(),
                     workers: int = 1) -> dict:
    """Run the computation each fixture is about and return a JSON-ready summary."""
    from .curve_systems import system_energy
    from .nesting import check_conditions, compare_candidates, family_energy_G
    from .relaxed_sets import clip_energy, coarea_lower_bound

    name, obj = fixture.name, fixture.objects
    out = {"fixture": name, "figure": fixture.figure, "expected": fixture.expected}
    if name == "fig1_staircase":
        out["table"] = staircase_table(fixture, params)
        out["relaxed_limit"] = relaxed_energy_cusped(obj["drops"], params).total
    elif name == "fig5_nesting":
        out["verdicts"] = {}
        for key in ("gamma1_gamma2", "gamma3_gamma2", "gamma4_gamma2"):
            verdict = check_conditions(obj[key], workers=workers)
            out["verdicts"][key] = {"failed": verdict.failed, **verdict.to_json()}
    elif name == "fig9_two_level":
        ranking = compare_candidates([obj["unbridged"], obj["bridged"]], obj["u"], params, workers=workers)
        levels = [(0.5, system_energy(obj["E"], params)[2]),
                  (1.5, relaxed_energy_cusped(obj["F"], params).total)]
        bound = coarea_lower_bound(obj["u"], levels)
        best_G = ranking.members[0][1]
        out.update({"best": ["unbridged", "bridged"][ranking.best], "G_best": best_G,
                    "lower_bound": bound, "gap": best_G - bound,
                    "rejected": {["unbridged", "bridged"][i]: v.failed for i, _, v in ranking.rejected},
                    "G_by_candidate": {["unbridged", "bridged"][i]: g for i, g, _ in ranking.members}})
        out["G_check"] = family_energy_G(obj["bridged"], params).total
    elif name in ("fig10_drop_in_omega", "fig11_double_drop"):
        cset = obj.get("drop") or obj.get("drops")
        whole = relaxed_energy_cusped(cset, params)
        clipped = clip_energy(obj["candidate"], obj["omega"], params)
        out.update({"whole_plane": whole.total, "whole_plane_flags": whole.flags,
                    "in_omega": clipped.total, "clipped_pieces": len(clipped.extra)})
    elif name == "fig6_drop_pair":
        paired = relaxed_energy_cusped(obj["drops"], params).total
        bare = relaxed_energy_cusped(obj["drops"].with_pairs([]), params).total
        out.update({"paired": paired, "without_pair": bare,
                    "arcs_only": paired - 2 * params.alpha * fixture.params["gap"]})
    elif name == "mirrored_arcs":
        got = relaxed_energy_cusped(obj["arcs"], params).total
        want = mirrored_arcs_closed_form(fixture.params["radius"], fixture.params["opening"],
                                         fixture.params["gap"], params)
        out.update({"energy": got, "closed_form": want, "abs_error": abs(got - want)})
    return out


# file name for each exported object; anything unlisted is "<fixture>_<key>.json"
_EXPORT_NAMES = {
    ("fig5_nesting", "gamma1_gamma2"): "fig5_gamma1_gamma2.json",
    ("fig5_nesting", "gamma3_gamma2"): "fig5_gamma3_gamma2.json",
    ("fig5_nesting", "gamma4_gamma2"): "fig5_gamma4_gamma2.json",
    ("fig9_two_level", "u"): "figEF.json",
}


def export_fixtures(fixtures: dict, directory) -> dict:
    """Write every fixture object as JSON (grids also as PGM) plus ``manifest.json``.

    Grid-valued objects with integer values are written to PGM with
    ``maxval`` equal to their largest value, so the image is exact; the
    two-level grid is also written as ``figEF.pgm``.

    Returns the manifest.
    """
    import json
    from pathlib import Path

    from .io import FORMAT_VERSION, write_json, write_pgm

    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    manifest = {"format": FORMAT_VERSION, "fixtures": {}}
    for name, fx in fixtures.items():
        files = {}
        for key, obj in fx.objects.items():
            fname = _EXPORT_NAMES.get((name, key), f"{name}_{key}.json")
            write_json(root / fname, obj)
            files[key] = fname
            if isinstance(obj, GridFunction):
                top = float(obj.vmax)
                exact = top > 0 and float(top).is_integer() and np.all(obj.values == np.rint(obj.values))
                pgm = fname[:-5] + ".pgm"
                write_pgm(root / pgm, obj, maxval=int(top) if exact else 65535,
                          value_range=(0.0, top) if exact else None)
                files[key + "_pgm"] = pgm
        manifest["fixtures"][name] = {"figure": fx.figure, "params": fx.params,
                                      "expected": fx.expected, "files": files}
    # reference curve for the command-line examples
    from .curve_core import circle

    write_json(root / "circle.json", circle(1.0, 1024))
    manifest["fixtures"]["circle"] = {"figure": "unit circle (closed-form check)",
                                      "params": {"radius": 1.0, "samples": 1024},
                                      "expected": {"energy_p2": 4 * np.pi}, "files": {"curve": "circle.json"}}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=1, default=_jsonable) + "\n")
    return manifest


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"not JSON serialisable: {type(value).__name__}")
