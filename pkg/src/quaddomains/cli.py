"""``quaddom`` command-line entry point.

Exit codes: 0 success, 1 self-test or assertion failure, 2 input or schema
error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import io
from .audit import format_report, run_audit
from .circle_fourier import TrigPolynomial, project_x4, riesz_product
from .conformal import (
    build_map,
    disk_map,
    geometry,
    map_from_taylor,
    moment_curve,
    moments_area,
    moments_contour,
    schwarzian_sup,
    univalence_check,
    values_at,
)
from .disk_ops import PolarField, PolarGrid, balayage, balayage_bruteforce, fubini_check, operator_K, poisson_moment
from .dss import SolverConfig, solve_branch
from .series import UnderResolvedSeries

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
FAULTS = ("radial-weights",)


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    mode: str = "singular"
    riesz_depth: int = 0
    measure_file: str | None = None
    a_max: float = 0.05
    a_points: int = 5
    a_spacing: str = "geometric"
    modes: int = 255
    radial_nodes: int = 64
    angles: int = 512
    series: int = 1024
    tol: float = 1e-11
    out: str = "out"
    seed: int = 0
    c_override: float | None = None
    n: tuple = (4,)
    a: tuple = (1e-3, 1e-2)
    newton: bool = False
    boundary_points: int = 1024

    def validate(self) -> None:
        if self.mode not in ("singular", "consistent"):
            raise InputError(f"mode must be singular or consistent, got {self.mode!r}")
        if self.a_spacing not in ("geometric", "linear"):
            raise InputError(f"a-spacing must be geometric or linear, got {self.a_spacing!r}")
        if 2 * self.modes + 1 > self.angles:
            raise InputError(f"--modes {self.modes} needs N <= (M-1)/2 with M={self.angles}")
        if self.series < 2 * self.modes:
            raise InputError(f"--series {self.series} must be at least 2N = {2 * self.modes}")
        if self.a_points < 1 or self.a_max < 0:
            raise InputError("a-grid needs a_max >= 0 and at least one point")
        if self.tol <= 0:
            raise InputError("tolerance must be positive")

    def a_grid(self) -> tuple:
        J = self.a_points
        if self.a_spacing == "geometric":
            rest = [self.a_max * 2.0 ** (j - J) for j in range(1, J + 1)]
        else:
            rest = [self.a_max * j / J for j in range(1, J + 1)]
        return tuple([0.0] + [a for a in rest if a > 0])

    def measure(self):
        if self.measure_file:
            try:
                doc = json.loads(Path(self.measure_file).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise InputError(f"cannot read measure file: {exc}") from exc
            return io.measure_from_document(doc)
        if self.riesz_depth < 0:
            raise InputError("riesz depth must be >= 0")
        return riesz_product(self.riesz_depth)

    def solver_config(self) -> SolverConfig:
        try:
            return SolverConfig(
                N=self.modes,
                Nr=self.radial_nodes,
                M=self.angles,
                mode=self.mode,
                measure=self.measure(),
                a_grid=self.a_grid(),
                tol_residual=self.tol,
                use_newton=self.newton,
                seed=self.seed,
            )
        except ValueError as exc:
            raise InputError(str(exc)) from exc

    def echo(self) -> dict:
        d = asdict(self)
        d["n"], d["a"] = list(self.n), list(self.a)
        d.pop("out")
        return d


_FLAG_NAMES = {f.name for f in fields(RunConfig)}


def _add_common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", metavar="PATH", help="JSON config file; flags override it")
    p.add_argument("--mode", choices=["singular", "consistent"], default=S)
    p.add_argument("--riesz-depth", type=int, metavar="K", dest="riesz_depth", default=S)
    p.add_argument("--measure-file", metavar="PATH", dest="measure_file", default=S)
    p.add_argument("--a-max", type=float, metavar="X", dest="a_max", default=S)
    p.add_argument("--a-points", type=int, metavar="J", dest="a_points", default=S)
    p.add_argument("--a-spacing", choices=["geometric", "linear"], dest="a_spacing", default=S)
    p.add_argument("--modes", type=int, metavar="N", default=S)
    p.add_argument("--radial-nodes", type=int, metavar="NR", dest="radial_nodes", default=S)
    p.add_argument("--angles", type=int, metavar="M", default=S)
    p.add_argument("--series", type=int, metavar="NS", default=S)
    p.add_argument("--tol", type=float, metavar="T", default=S)
    p.add_argument("--out", metavar="DIR", default=S)
    p.add_argument("--seed", type=int, metavar="S", default=S)
    p.add_argument("--c-override", type=float, metavar="X", dest="c_override", default=S)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quaddom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("selftest", help="operator identity checks")
    _add_common(p)
    p.add_argument("--fault", choices=FAULTS, help=argparse.SUPPRESS)

    p = sub.add_parser("solve", help="continue a branch and write branch/map/geometry files")
    _add_common(p)
    p.add_argument("--newton", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("audit", help="audit a map file (or the built-in 'disk')")
    _add_common(p)
    p.add_argument("map", help="map JSON file, or 'disk'")

    p = sub.add_parser("moments", help="tabulate M_n(a) and slopes at a = 0")
    _add_common(p)
    p.add_argument("--n", type=int, nargs="+", default=argparse.SUPPRESS)
    p.add_argument("--a", type=float, nargs="+", default=argparse.SUPPRESS)

    p = sub.add_parser("export-boundary", help="write the boundary polyline as x,y CSV")
    _add_common(p)
    p.add_argument("map", help="map JSON file, or 'disk'")
    p.add_argument("--points", type=int, dest="boundary_points", default=argparse.SUPPRESS)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config file: {exc}") from exc
        if not isinstance(loaded, dict):
            raise InputError("config file must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        unknown = set(loaded) - _FLAG_NAMES
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for name in _FLAG_NAMES:
        if name in vars(args):
            values[name] = getattr(args, name)
    for key in ("n", "a"):
        if key in values:
            values[key] = tuple(values[key])
    try:
        cfg = RunConfig(**values)
        cfg.validate()
    except TypeError as exc:
        raise InputError(f"bad config value: {exc}") from exc
    return cfg


# --- selftest -------------------------------------------------------------


def _selftest_grid(cfg: RunConfig, fault: str | None) -> PolarGrid:
    grid = PolarGrid.gauss(cfg.radial_nodes, cfg.angles)
    if fault == "radial-weights":
        bump = 1 + 1e-3 * np.cos(np.arange(grid.Nr))
        grid = grid.with_weights(grid.weights * bump)
    return grid


def _random_field(rng, grid: PolarGrid, modes: int = 8) -> PolarField:
    """Smooth real field built from a few random angular modes and radial powers."""
    a = rng.standard_normal((3, modes)) + 1j * rng.standard_normal((3, modes))
    n = np.arange(modes)
    r = grid.radii[:, None]
    t = grid.angles[None, :]
    vals = np.zeros((grid.Nr, grid.M))
    for p in range(3):
        vals += (np.exp(1j * t[..., None] * n) @ a[p]).real * r**p / (1 + p)
    return PolarField(grid, vals)


def selftest_checks(cfg: RunConfig, fault: str | None = None):
    """Yield ``(name, max_error, tolerance)`` in a fixed order."""
    rng = np.random.default_rng(cfg.seed)
    grid = _selftest_grid(cfg, fault)
    N = cfg.modes

    nmax = min(64, N)
    err = 0.0
    for n in range(-nmax, nmax + 1):
        e = TrigPolynomial.from_modes({n: 1.0}, nmax, is_real=False)
        Ke = operator_K(e, grid)
        err = max(err, float(np.max(np.abs(Ke.coeffs - e.coeffs / (abs(n) + 1)))))
    yield "balayage diagonal", err, 1e-10

    err = 0.0
    for _ in range(20):
        h = TrigPolynomial(rng.standard_normal(2 * 16 + 1), True)
        G = _random_field(rng, grid)
        lhs, rhs = fubini_check(h, G)
        err = max(err, abs(lhs - rhs) / max(1.0, abs(lhs)))
    yield "fubini pairing", err, 1e-9

    err = 0.0
    zetas = np.exp(2j * np.pi * (np.arange(8) + 0.3) / 8)
    for n in range(1, 17):
        for z in zetas:
            num, exact = poisson_moment(n, z, Nr=min(cfg.radial_nodes, 64))
            err = max(err, abs(num - exact))
    yield "poisson moment", err, 1e-9

    small = PolarGrid.gauss(min(cfg.radial_nodes, 32), 128)
    err = 0.0
    for _ in range(2):
        G = _random_field(rng, small)
        fast = values_at(balayage(G), 64)
        brute = balayage_bruteforce(G, 64)
        err = max(err, float(np.max(np.abs(fast - brute))))
    yield "balayage oracle", err, 1e-8

    rec = map_from_taylor([0, 1, 0, 0, 0, 0.1])
    err = max(abs(moments_area(rec, n, grid) - moments_contour(rec, n)) for n in range(17))
    yield "green cross-check", float(err), 1e-8

    rep = run_audit(disk_map(), grid=PolarGrid.gauss(cfg.radial_nodes, cfg.angles))
    disk_err = max(
        max(rep.quad_residuals),
        max(rep.orth_residuals),
        rep.id1_defect,
        rep.id2_defect,
        rep.volume_defect,
        rep.u_boundary_sup,
        rep.normal_deriv_dev,
    )
    yield "disk audit", float(disk_err), 1e-12


def cmd_selftest(cfg: RunConfig, fault: str | None = None) -> int:
    first_fail = None
    print(f"{'check':<20} {'max error':>12} {'tolerance':>10}  status")
    for name, err, tol in selftest_checks(cfg, fault):
        ok = err <= tol
        print(f"{name:<20} {err:12.3e} {tol:10.1e}  {'ok' if ok else 'FAIL'}")
        if not ok and first_fail is None:
            first_fail = name
    if first_fail:
        print(f"selftest FAILED: first failing check: {first_fail}")
        return EXIT_FAIL
    print("selftest passed")
    return EXIT_OK


# --- solve ----------------------------------------------------------------


def _point_doc(pt, map_file: str | None, map_error: str | None) -> dict:
    d = {
        "a": pt.a,
        "C": pt.C,
        "c": pt.c,
        "logC": pt.logC,
        "residual": pt.residual,
        "contraction_est": pt.contraction_est,
        "iterations": pt.iterations,
        "stop_reason": pt.stop_reason,
        "W": io.encode_trig(pt.W),
        "map_file": map_file,
    }
    if map_error:
        d["map_error"] = map_error
    return d


GEOMETRY_HEADER = [
    "a",
    "area",
    "area_grid",
    "perimeter",
    "centroid_x",
    "centroid_y",
    "radius_mean",
    "radius_std",
    "circularity_deficit",
    "schwarzian_sup",
    "simple",
]


def cmd_solve(cfg: RunConfig) -> int:
    scfg = cfg.solver_config()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    branch = solve_branch(scfg)
    echo = cfg.echo()
    rows, point_docs = [], []
    for j, pt in enumerate(branch.points):
        name, err = f"map_{j:03d}.json", None
        try:
            rec = build_map(pt, scfg, cfg.series)
        except (UnderResolvedSeries, ValueError) as exc:
            name, err = None, str(exc)
        else:
            geo = geometry(rec, scfg.grid)
            verdict = univalence_check(rec)
            io.write_json(out / name, io.map_document(rec, echo, geo.as_dict()))
            rows.append(
                [
                    pt.a,
                    geo.area,
                    geo.area_grid,
                    geo.perimeter,
                    float(geo.centroid.real),
                    float(geo.centroid.imag),
                    geo.radius_mean,
                    geo.radius_std,
                    geo.circularity_deficit,
                    schwarzian_sup(rec, scfg.grid),
                    int(verdict.simple),
                ]
            )
        point_docs.append(_point_doc(pt, name, err))
    doc = io.header("branch", echo)
    doc.update(
        solver=scfg.echo(),
        stop_reason=branch.stop_reason,
        stop_detail=branch.stop_detail,
        failed_a=branch.failed_a,
        points=point_docs,
    )
    io.write_json(out / "branch.json", doc)
    io.write_csv(out / "geometry.csv", GEOMETRY_HEADER, rows)
    print(f"{len(branch.points)} points accepted, stop_reason={branch.stop_reason}")
    if branch.stop_detail:
        print(f"  {branch.stop_detail}")
    nonzero = [pt for pt in branch.points if pt.a > 0]
    if cfg.mode == "consistent" and nonzero:
        dev = max((pt.W + pt.a * project_x4(scfg.mu)).sup_norm(scfg.M) for pt in nonzero)
        print(f"max ||W + a Pi0 mu|| = {dev:.3e}")
    elif nonzero:
        trend = ", ".join(f"a={pt.a:.4g}: {pt.W[4].real / pt.a:.6f}" for pt in nonzero)
        print(f"W^(4)/a (limit 1/3): {trend}")
    return EXIT_OK if branch.points else EXIT_FAIL


# --- audit / moments / export ---------------------------------------------


def _load_map(spec: str, cfg: RunConfig):
    if spec == "disk":
        return disk_map(N_s=64)
    return io.map_from_document(io.read_json(spec))


def cmd_audit(cfg: RunConfig, map_spec: str) -> int:
    rec = _load_map(map_spec, cfg)
    c = cfg.c_override if cfg.c_override is not None else rec.c
    if c is None:
        raise InputError("map has no quadrature constant; pass --c-override")
    grid = PolarGrid.gauss(cfg.radial_nodes, cfg.angles)
    report = run_audit(rec, c=c, grid=grid)
    print(format_report(report))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = io.header("audit", cfg.echo())
    doc["map"] = map_spec if map_spec == "disk" else Path(map_spec).name
    doc["report"] = report.as_dict()
    io.write_json(out / "audit.json", doc)
    return EXIT_OK


def cmd_moments(cfg: RunConfig) -> int:
    mu = cfg.measure()
    grid = PolarGrid.gauss(cfg.radial_nodes, cfg.angles)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, slopes = [], []
    print(f"{'n':>3} {'a':>10} {'Re M_n(a)':>14} {'Im M_n(a)':>14}")
    for n in cfg.n:
        curve = moment_curve(mu, n, cfg.a, grid)
        for a, v in zip(curve.a, curve.values):
            rows.append([n, a, float(v.real), float(v.imag), float(abs(v))])
            print(f"{n:>3} {a:>10.4g} {v.real:>14.6e} {v.imag:>14.6e}")
        d, ad = complex(curve.derivative), curve.analytic_derivative
        slopes.append([n, float(d.real), float(d.imag), float(ad.real), float(ad.imag), float(abs(d - ad))])
        print(f"    slope at 0: {d.real:.8f}{d.imag:+.2e}i  analytic {ad.real:.8f}  |diff| {abs(d - ad):.2e}")
    io.write_csv(out / "moments.csv", ["n", "a", "re", "im", "abs"], rows)
    io.write_csv(
        out / "moments_slope.csv", ["n", "slope_re", "slope_im", "analytic_re", "analytic_im", "abs_diff"], slopes
    )
    return EXIT_OK


def cmd_export_boundary(cfg: RunConfig, map_spec: str) -> int:
    rec = _load_map(map_spec, cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = "disk" if map_spec == "disk" else Path(map_spec).stem
    path = out / f"{stem}_boundary.csv"
    io.write_boundary_csv(path, rec.boundary(cfg.boundary_points))
    print(path)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "selftest":
            return cmd_selftest(cfg, args.fault)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "audit":
            return cmd_audit(cfg, args.map)
        if args.command == "moments":
            return cmd_moments(cfg)
        return cmd_export_boundary(cfg, args.map)
    except (InputError, io.DocumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
