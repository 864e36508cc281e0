"""Command-line front end.

Every subcommand prints its headline number(s) to stdout and, with
``--output``, writes the full report (CSV for energy tables, JSON for
verdicts and summaries).  Exit codes: 0 on success, 2 for invalid input,
3 when a well-formed input cannot be computed (open contour, offset
singularity, no valid candidate, ...).

Relative input paths that do not exist are looked up in the fixture
directory: ``$ELASTICA_FIXTURES`` if set, else ``fixtures/`` next to the
source checkout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gallery, io
from .curve_core import Curve, ElasticaParams, elastica_energy, resample_arclength
from .curve_systems import CurveSystem, system_energy
from .errors import ComputationError, ValidationError
from .grid_function import GridFunction, coarea_energy, divergence_energy
from .nesting import LevelFamily, check_membership, compare_candidates
from .relaxed_sets import clip_energy, relaxed_energy_cusped
from .reports import EnergyReport, LevelRow, format_total
from .smoothing import offset_curve, offset_energy_transform, smoothing_convergence_study

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INVALID, EXIT_COMPUTATION = 0, 2, 3


@dataclass
class RunConfig:
    """Validated options shared by all subcommands."""

    subcommand: str
    inputs: list = field(default_factory=list)
    p: float = 2.0
    alpha: float = 1.0
    beta: float = 1.0
    n_levels: int = 64
    resolution: int = 512
    dist_tol: float | None = None
    angle_tol: float = 0.15
    area_res: int = 512
    output: str | None = None
    threads: int = 1
    seed: int = 0

    def __post_init__(self):
        if not self.p >= 1:
            raise ValidationError(f"--p must be >= 1, got {self.p}")
        if not (self.alpha > 0 and self.beta >= 0):
            raise ValidationError("--alpha must be positive and --beta nonnegative")
        if self.n_levels < 1:
            raise ValidationError(f"--n-levels must be positive, got {self.n_levels}")
        if self.resolution < 16 or self.area_res < 16:
            raise ValidationError("--resolution and --area-res must be at least 16")
        if self.dist_tol is not None and not self.dist_tol > 0:
            raise ValidationError("--dist-tol must be positive")
        if not 0 < self.angle_tol < np.pi / 2:
            raise ValidationError("--angle-tol must lie in (0, pi/2)")
        if self.threads < 1:
            raise ValidationError(f"--threads must be positive, got {self.threads}")

    @property
    def params(self) -> ElasticaParams:
        return ElasticaParams(p=self.p, alpha=self.alpha, beta=self.beta)

    @property
    def tolerances(self) -> dict:
        return {"dist_tol": self.dist_tol, "angle_tol": self.angle_tol, "area_res": self.area_res,
                "seed": self.seed, "workers": self.threads}


# -- helpers ----------------------------------------------------------------------


def fixture_dir() -> Path:
    env = os.environ.get("ELASTICA_FIXTURES")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "fixtures"


def resolve(path: str) -> Path:
    p = Path(path)
    if p.exists() or p.is_absolute():
        return p
    alt = fixture_dir() / p
    return alt if alt.exists() else p


def _load(path: str, op: str):
    p = resolve(path)
    if not p.exists():
        raise ValidationError(f"{op}: input file {path} not found")
    return io.load(p)


def _load_grid(path: str, op: str, value_range=None) -> GridFunction:
    u = _load(path, op)
    if not isinstance(u, GridFunction):
        raise ValidationError(f"{op}: {path} is not an image or grid")
    if value_range is not None and str(path).lower().endswith(".pgm"):
        lo, hi = value_range
        u = u.like(lo + (hi - lo) * u.values)
    return u


def _as_system(obj, op: str, path: str) -> CurveSystem:
    if isinstance(obj, Curve):
        return CurveSystem([obj])
    if isinstance(obj, CurveSystem):
        return obj
    raise ValidationError(f"{op}: {path} must hold a curve or a curve system")


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text)


def _emit_json(cfg: RunConfig, doc: dict) -> str:
    text = json.dumps({"format": io.FORMAT_VERSION, **doc}, indent=1, default=_jsonable,
                      allow_nan=True, sort_keys=False) + "\n"
    _emit(cfg, text)
    return text


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"not JSON serialisable: {type(value).__name__}")


# -- subcommands ------------------------------------------------------------------


def cmd_energy_curve(cfg: RunConfig, args) -> int:
    obj = _load(args.curve, "energy-curve")
    system = _as_system(obj, "energy-curve", args.curve)
    L, K, E = system_energy(system, cfg.params)
    report = EnergyReport(rows=[LevelRow(0, 0.0, L, K, E)], total=E)
    _emit(cfg, report.to_csv())
    print(format_total(E))
    return EXIT_OK


def cmd_energy_image(cfg: RunConfig, args) -> int:
    u = _load_grid(args.image, "energy-image")
    report = coarea_energy(u, cfg.params, cfg.n_levels, workers=cfg.threads)
    div = divergence_energy(u, cfg.params)
    _emit(cfg, report.to_csv())
    print(f"coarea {format_total(report.total)}")
    print(f"divergence {format_total(div)}")
    return EXIT_OK


def _family_range_image(phi: LevelFamily, args, op: str) -> GridFunction:
    vr = tuple(args.value_range) if args.value_range else phi.range
    return _load_grid(args.image, op, vr)


def cmd_check_family(cfg: RunConfig, args) -> int:
    phi = _load(args.family, "check-family")
    if not isinstance(phi, LevelFamily):
        raise ValidationError(f"check-family: {args.family} is not a level family")
    u = _family_range_image(phi, args, "check-family")
    verdict = check_membership(phi, u, **cfg.tolerances)
    doc = {"family": args.family, "is_member": verdict.is_member, "failed": verdict.failed,
           **{k: v for k, v in verdict.to_json().items() if k != "is_member"}}
    print(_emit_json(cfg, doc), end="")
    return EXIT_OK


def cmd_compare(cfg: RunConfig, args) -> int:
    if len(args.files) < 2:
        raise ValidationError("compare: give at least one family and an image")
    *paths, image = args.files
    families = []
    for path in paths:
        phi = _load(path, "compare")
        if not isinstance(phi, LevelFamily):
            raise ValidationError(f"compare: {path} is not a level family")
        families.append(phi)
    args.image = image
    u = _family_range_image(families[0], args, "compare")
    ranking = compare_candidates(families, u, cfg.params, **cfg.tolerances)
    doc = ranking.to_json()
    for entry in doc["members"] + doc["rejected"]:
        entry["file"] = paths[entry["index"]]
    doc["best"] = paths[ranking.best]
    print(f"best {paths[ranking.best]} G {format_total(ranking.members[0][1])}")
    _emit_json(cfg, doc)
    return EXIT_OK


def _grid_around(curve: Curve, margin: float, resolution: int) -> GridFunction:
    xmin, ymin = curve.points.min(axis=0) - margin
    xmax, ymax = curve.points.max(axis=0) + margin
    side = max(xmax - xmin, ymax - ymin)
    cx, cy = 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)
    bbox = (cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2)
    return GridFunction.sample(lambda x, y: np.zeros_like(x), bbox, resolution)


def cmd_smooth(cfg: RunConfig, args) -> int:
    curve = _load(args.curve, "smooth")
    if not isinstance(curve, Curve):
        raise ValidationError(f"smooth: {args.curve} must hold one closed curve")
    collars = sorted(args.collar, reverse=True)
    grid = _grid_around(curve, 1.5 * collars[0] + 0.25 * np.ptp(curve.points, axis=0).max(),
                        cfg.resolution)
    study = smoothing_convergence_study(curve, args.c, collars, cfg.params, grid, cfg.n_levels)
    _emit(cfg, study.to_csv())
    for r in study.rows:
        print(f"collar {r.collar!r} F {format_total(r.F_coarea)} target {format_total(r.target)}")
    return EXIT_OK


def cmd_offset(cfg: RunConfig, args) -> int:
    curve = _load(args.curve, "offset")
    if not isinstance(curve, Curve):
        raise ValidationError(f"offset: {args.curve} must hold one closed curve")
    base = resample_arclength(curve, curve.n)
    off = offset_curve(base, args.delta)
    predicted = offset_energy_transform(base, args.delta, cfg.params)
    measured = elastica_energy(off.result, cfg.params)
    if cfg.output:
        io.write_json(cfg.output, off.result)
    print(f"predicted {format_total(predicted)}")
    print(f"measured {format_total(measured)}")
    return EXIT_OK


def cmd_relaxed(cfg: RunConfig, args) -> int:
    from .relaxed_sets import CuspedSet

    cset = _load(args.set, "relaxed-cusped")
    if not isinstance(cset, CuspedSet):
        raise ValidationError(f"relaxed-cusped: {args.set} is not a cusped set")
    report = relaxed_energy_cusped(cset, cfg.params)
    _emit(cfg, report.to_csv())
    print(format_total(report.total))
    for flag, value in report.flags.items():
        if value is True:
            where = report.meta.get(flag)
            print(f"flag {flag}" + (f" at {where}" if where else ""))
    return EXIT_OK


def cmd_clip(cfg: RunConfig, args) -> int:
    from .relaxed_sets import Omega

    obj = _load(args.target, "clip")
    omega = _load(args.omega, "clip")
    if not isinstance(omega, Omega):
        raise ValidationError(f"clip: {args.omega} is not a polygon domain")
    if not isinstance(obj, (Curve, CurveSystem, LevelFamily)):
        raise ValidationError(f"clip: {args.target} must hold a curve, system or level family")
    report = clip_energy(obj, omega, cfg.params)
    _emit(cfg, report.to_csv())
    print(format_total(report.total))
    return EXIT_OK


def cmd_savare(cfg: RunConfig, args) -> int:
    n = args.n
    if n < 0 or n > 16:
        raise ValidationError(f"savare: --n must lie in 0..16, got {n}")
    t, counts = gallery.savare_level_counts(n)
    pattern_ok = bool(np.all(counts == gallery.savare_expected_count(n, t)))
    bound = gallery.savare_energy_bound(n, params=cfg.params)
    doc = {"n": n, "counts_in_1_3": bool(np.isin(counts, (1, 3)).all()), "slab_pattern": pattern_ok,
           "energy": bound["energy"], "bound": bound["bound"], "below_bound": bound["below_bound"]}
    if n >= 1:
        ns = list(range(1, n + 2))
        weak = gallery.savare_weak_convergence(ns)
        doc["weak_gaps"] = {r["phi"] + f"_n{r['n']}": r["gap"] for r in weak["rows"]}
        doc["l2_defect"] = weak["l2_defect"][n]
    print(f"energy {format_total(bound['energy'])} < {bound['bound']}: {bound['below_bound']}")
    print(f"slab pattern {'ok' if pattern_ok else 'MISMATCH'}")
    _emit_json(cfg, doc)
    return EXIT_OK


def cmd_gallery(cfg: RunConfig, args) -> int:
    names = gallery.FIXTURE_NAMES if args.name == "all" else (args.name,)
    if args.name != "all" and args.name not in gallery.FIXTURE_NAMES:
        raise ValidationError(f"gallery: unknown fixture {args.name!r} "
                              f"(available: all, {', '.join(gallery.FIXTURE_NAMES)})")
    fixtures = gallery.build_figure_examples(names)
    if args.export:
        gallery.export_fixtures(fixtures, args.export)
        print(f"wrote {len(fixtures)} fixture(s) to {args.export}")
    summaries = {} if args.no_eval else {
        name: gallery.evaluate_fixture(fx, cfg.params, workers=cfg.threads) for name, fx in fixtures.items()}
    for name, s in summaries.items():
        print(f"{name}: {_headline(s)}")
    if summaries:
        _emit_json(cfg, {"fixtures": summaries})
    return EXIT_OK


def _headline(summary: dict) -> str:
    parts = []
    for k, v in summary.items():
        if k in ("fixture", "figure"):
            continue
        if isinstance(v, float):
            parts.append(f"{k}={format_total(v)}")
        elif isinstance(v, (int, str)):
            parts.append(f"{k}={v}")
        elif k == "verdicts":
            parts += [f"{fam} fails {'+'.join(d['failed']) or 'nothing'}" for fam, d in v.items()]
        elif k == "table":
            parts.append("F=" + "/".join(format_total(r["F"]) for r in v))
            parts.append("L1=" + "/".join(format_total(r["L1"]) for r in v))
    return ", ".join(parts)


# -- parser -----------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("energy and run options")
    g.add_argument("--p", type=float, default=2.0, help="curvature exponent p (default 2)")
    g.add_argument("--alpha", type=float, default=1.0, help="length weight (default 1)")
    g.add_argument("--beta", type=float, default=1.0, help="curvature weight (default 1)")
    g.add_argument("--n-levels", type=int, default=64, help="levels for coarea sums (default 64)")
    g.add_argument("--resolution", type=int, default=512, help="grid resolution for built grids")
    g.add_argument("--dist-tol", type=float, default=None, help="trace distance tolerance")
    g.add_argument("--angle-tol", type=float, default=0.15, help="tangency tolerance (radians)")
    g.add_argument("--area-res", type=int, default=512, help="raster size for interior tests")
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads (results do not depend on it)")
    g.add_argument("--seed", type=int, default=0, help="seed for sampled level pairs")
    g.add_argument("--output", "-o", default=None, help="write the full report here")
    g.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elastica-coarea",
                                     description="Elastica energies of curves, images and level families.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.set_defaults(func=func)
        return p

    p = add("energy-curve", cmd_energy_curve, "p-elastica energy of a curve or curve system JSON")
    p.add_argument("curve")
    p = add("energy-image", cmd_energy_image, "coarea and divergence energies of a PGM image or grid JSON")
    p.add_argument("image")
    for name, func, help_ in (("check-family", cmd_check_family, "membership verdict of a level family for an image"),):
        p = add(name, func, help_)
        p.add_argument("family")
        p.add_argument("image")
        p.add_argument("--value-range", type=float, nargs=2, metavar=("LO", "HI"),
                       help="map PGM [0,1] onto this range (default: the family's range)")
    p = add("compare", cmd_compare, "rank candidate families for an image: compare FAMILY... IMAGE")
    p.add_argument("files", nargs="+")
    p.add_argument("--value-range", type=float, nargs=2, metavar=("LO", "HI"),
                   help="map PGM [0,1] onto this range (default: the first family's range)")
    p = add("smooth", cmd_smooth, "collar study of the smoothed indicator of a curve's interior")
    p.add_argument("curve")
    p.add_argument("--collar", type=float, nargs="+", required=True, help="collar width(s)")
    p.add_argument("--c", type=float, default=1.0, help="plateau value (default 1)")
    p = add("offset", cmd_offset, "normal offset of a curve; predicted vs measured energy")
    p.add_argument("curve")
    p.add_argument("--delta", type=float, required=True, help="offset distance (positive = outward)")
    p = add("relaxed-cusped", cmd_relaxed, "relaxed energy of a cusped set with ghost bridges")
    p.add_argument("set")
    p = add("clip", cmd_clip, "energy of a curve, system or family clipped to a polygon")
    p.add_argument("target")
    p.add_argument("omega")
    p = add("savare", cmd_savare, "level counts, energy bound and weak convergence of U_n")
    p.add_argument("--n", type=int, required=True)
    p = add("gallery", cmd_gallery, "build, evaluate and optionally export a named fixture")
    p.add_argument("name", help=f"one of: all, {', '.join(gallery.FIXTURE_NAMES)}")
    p.add_argument("--export", default=None, metavar="DIR", help="write fixture files and manifest")
    p.add_argument("--no-eval", action="store_true", help="only build/export, skip the computations")
    for p in sub.choices.values():
        _common(p)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    inputs = [v for k, v in vars(args).items() if k in ("curve", "image", "family", "set", "target", "omega")]
    try:
        cfg = RunConfig(args.subcommand, inputs, args.p, args.alpha, args.beta, args.n_levels,
                        args.resolution, args.dist_tol, args.angle_tol, args.area_res, args.output,
                        args.threads, args.seed)
        return args.func(cfg, args)
    except ValidationError as exc:
        _report(args.subcommand, exc)
        return EXIT_INVALID
    except ComputationError as exc:
        _report(args.subcommand, exc)
        return EXIT_COMPUTATION
    except OSError as exc:
        _report(args.subcommand, exc)
        return EXIT_INVALID


def _report(subcommand: str, exc: Exception) -> None:
    message = str(exc)
    if not message.startswith(subcommand + ":"):
        message = f"{subcommand}: {message}"
    print(f"error: {message}", file=sys.stderr)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
