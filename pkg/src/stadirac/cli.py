"""Command-line front end.

Subcommands: ``verify``, ``sample``, ``decompose``, ``estimate`` and
``crosscheck``. Exit status is 0 on success, 1 when a residual exceeds its
tolerance and 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import statistics
import sys
from typing import Callable

import numpy as np

from . import dirac_matrix as dm
from . import koga_field as kf
from . import physics
from . import verify as vf
from .config import ConfigError, RunConfig, load_config, with_overrides
from .report import Table, render, write_atomic
from .sta import BLADE_NAMES, BLADE_ORDER

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2

_POINT_COLS = ["t", "x", "y", "z"]
_SPINOR_COLS = [f"{part}{j}" for j in range(1, 5) for part in ("re", "im")]


def _coords(p: kf.SpacetimePoint) -> list[float]:
    return [p.t, p.x, p.y, p.z]


def _blades(m) -> list[float]:
    return [float(m.coeff[mask]) for mask in BLADE_ORDER]


def _spinor(v: np.ndarray) -> list[float]:
    out = []
    for c in v:
        out.extend([float(c.real), float(c.imag)])
    return out


def _meta(command: str, cfg: RunConfig, **extra) -> dict:
    return {"command": command, **extra, "config": cfg.as_dict()}


# -- verify -----------------------------------------------------------------

_VERIFY_HEADER = [
    "section", "check", "kappa", *_POINT_COLS, "mode", "h",
    "residual_abs", "residual_rel", "fitted_order", "passed",
]


def _residual_row(section, rep: vf.ResidualReport, kappa, tol) -> list:
    return [
        section, rep.check, kappa, *_coords(rep.point), rep.mode, rep.h,
        rep.residual_abs, rep.residual_rel, None, rep.residual_rel <= tol,
    ]


def cmd_verify(cfg: RunConfig) -> tuple[int, Table]:
    table = Table(_VERIFY_HEADER)
    maxima: dict[str, float] = {}
    orders: dict[str, float] = {}
    ok = True
    for kappa in cfg.kappa_list():
        params = cfg.params(kappa)
        points = vf.sample_points(cfg.points, cfg.seed, cfg.r_range, cfg.t_range)

        def point_suite(p, params=params):
            return [
                vf.dirac_hestenes_residual(params, p),
                vf.matrix_dirac_residual(params, p),
                vf.klein_gordon_residual(params, p),
            ]

        for reports in vf.evaluate_concurrently(point_suite, points, cfg.jobs):
            for rep in reports:
                table.rows.append(_residual_row("residual", rep, params.kappa, cfg.tol_analytic))
                maxima[rep.check] = max(maxima.get(rep.check, 0.0), rep.residual_rel)
                ok &= rep.residual_rel <= cfg.tol_analytic

        for phi in cfg.rotation_angles:
            for p in points[: min(10, len(points))]:
                rep = vf.rotation_covariance_check(params, p, phi)
                table.rows.append(_residual_row("rotation", rep, params.kappa, cfg.tol_analytic))
                maxima[rep.check] = max(maxima.get(rep.check, 0.0), rep.residual_rel)
                ok &= rep.residual_rel <= cfg.tol_analytic

        fd_points = points[: cfg.fd_points]
        for family in vf.FAMILIES:
            conv = vf.convergence_study(params, fd_points, cfg.fd_steps, family, jobs=cfg.jobs)
            good = conv.order_within(cfg.order_target, cfg.order_tol)
            ok &= good
            orders[f"{family}@kappa={params.kappa:g}"] = conv.fitted_order
            for h, res in zip(conv.steps, conv.residuals):
                table.rows.append(
                    ["convergence", family, params.kappa, None, None, None, None, "fd", h,
                     None, res, conv.fitted_order, good]
                )
    table.meta = _meta(
        "verify", cfg, passed=bool(ok), max_residual_rel=maxima, fitted_orders=orders
    )
    return (EXIT_OK if ok else EXIT_TOLERANCE), table


# -- sample / decompose -----------------------------------------------------


def cmd_sample(cfg: RunConfig) -> tuple[int, Table]:
    params = cfg.params()
    points = cfg.grid()

    def record(p):
        psi = kf.evaluate_psi_sta(params, p)
        spinor = dm.evaluate_psi_matrix(params, p)
        return [*_coords(p), *_blades(psi), *_spinor(spinor), psi.norm()]

    rows = vf.evaluate_concurrently(record, points, cfg.jobs)
    table = Table([*_POINT_COLS, *BLADE_NAMES, *_SPINOR_COLS, "norm"], rows)
    table.meta = _meta("sample", cfg, kappa=params.kappa, count=len(rows))
    return EXIT_OK, table


def cmd_decompose(cfg: RunConfig) -> tuple[int, Table]:
    params = cfg.params()
    points = cfg.grid()

    def record(p):
        d = kf.decompose(params, p)
        psi = kf.evaluate_psi_sta(params, p)
        err = (d.total() - psi).norm() / psi.norm()
        return [*_coords(p), *_blades(d.kg_term), *_blades(d.spin_term), *_blades(d.zitter_term), err]

    rows = vf.evaluate_concurrently(record, points, cfg.jobs)
    header = [*_POINT_COLS]
    for term in ("kg", "spin", "zitter"):
        header.extend(f"{term}_{name}" for name in BLADE_NAMES)
    header.append("recon_error")
    worst = max((r[-1] for r in rows), default=0.0)
    ok = worst <= cfg.tol_decompose
    table = Table(header, rows)
    table.meta = _meta("decompose", cfg, passed=ok, kappa=params.kappa, count=len(rows), max_recon_error=worst)
    return (EXIT_OK if ok else EXIT_TOLERANCE), table


# -- estimate ---------------------------------------------------------------


def cmd_estimate(cfg: RunConfig) -> tuple[int, Table]:
    est = physics.estimate(cfg.params())
    d = est.as_dict()
    d["size_bound_over_quoted"] = est.size_bound / est.quoted_size_bound
    table = Table(list(d), [list(d.values())])
    table.meta = _meta("estimate", cfg)
    return EXIT_OK, table


# -- crosscheck -------------------------------------------------------------

_CROSS_HEADER = [
    "section", "check", "kappa", *_POINT_COLS, "h", "residual",
    "fitted_order", "min", "median", "max", "passed",
]


def cmd_crosscheck(cfg: RunConfig) -> tuple[int, Table]:
    table = Table(_CROSS_HEADER)
    ok = True
    stats: dict[str, dict] = {}
    for kappa in cfg.kappa_list():
        params = cfg.params(kappa)
        points = vf.sample_points(cfg.points, cfg.seed, cfg.r_range, cfg.t_range)

        def suite(p, params=params):
            members = dm.solution_family(params, p)
            fam = [vf.matrix_dirac_residual(params, p, member=m).residual_rel for m in members]
            d1 = np.column_stack([members[0].value, members[1].value])
            d0 = np.column_stack([members[2].value, members[3].value])
            indep = [float(s[-1] / s[0]) for s in (np.linalg.svd(d1, compute_uv=False), np.linalg.svd(d0, compute_uv=False))]
            return dm.hestenes_map_residual(params, p), [m.label for m in members], fam, indep

        per_check: dict[str, list[float]] = {}
        for p, (hest, labels, fam, indep) in zip(points, vf.evaluate_concurrently(suite, points, cfg.jobs)):
            entries = [("hestenes", "hestenes_map", hest, hest <= cfg.tol_analytic)]
            entries += [("family", lab, r, r <= cfg.tol_analytic) for lab, r in zip(labels, fam)]
            entries += [
                ("independence", name, ratio, ratio > 1e-8)
                for name, ratio in zip(("D1phi_pair", "D0phi_pair"), indep)
            ]
            for section, check, value, good in entries:
                ok &= good
                per_check.setdefault(check, []).append(value)
                table.rows.append([section, check, params.kappa, *_coords(p), None, value,
                                   None, None, None, None, good])

        for check, values in per_check.items():
            s = {"min": min(values), "median": statistics.median(values), "max": max(values)}
            stats[f"{check}@kappa={params.kappa:g}"] = s
            table.rows.append(["stats", check, params.kappa, None, None, None, None, None, None,
                               None, s["min"], s["median"], s["max"], None])

        fd_points = points[: cfg.fd_points]
        for member in dm.solution_family(params, fd_points[0]):
            def residual(prm, q, h, member=member):
                return vf.matrix_dirac_residual(prm, q, h, member=member)

            conv = vf.convergence_study(params, fd_points, cfg.fd_steps, member.label, residual=residual, jobs=cfg.jobs)
            good = conv.order_within(cfg.order_target, cfg.order_tol)
            ok &= good
            for h, res in zip(conv.steps, conv.residuals):
                table.rows.append(["family_fd", member.label, params.kappa, None, None, None, None, h, res,
                                   conv.fitted_order, None, None, None, good])
    table.meta = _meta("crosscheck", cfg, passed=bool(ok), statistics=stats)
    return (EXIT_OK if ok else EXIT_TOLERANCE), table


COMMANDS: dict[str, Callable[[RunConfig], tuple[int, Table]]] = {
    "verify": cmd_verify,
    "sample": cmd_sample,
    "decompose": cmd_decompose,
    "estimate": cmd_estimate,
    "crosscheck": cmd_crosscheck,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--kappa", type=float, help="kappa in the active unit mode")
    common.add_argument("--units", choices=("natural", "si"))
    common.add_argument("--jobs", type=int, help="worker threads for point evaluation")

    parser = argparse.ArgumentParser(
        prog="stadirac", description="Spacetime-algebra Dirac field: verification, sampling and estimates."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "run the residual suites",
        "sample": "evaluate the field on a grid",
        "decompose": "split the field into Klein-Gordon, spin and zitter terms",
        "estimate": "spin rate, size bound and zitter frequency",
        "crosscheck": "matrix/STA equivalence and the four-solution family",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return with_overrides(
        cfg, out=args.out, format=args.format, seed=args.seed, kappa=args.kappa, units=args.units, jobs=args.jobs
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        status, table = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(table, cfg.format)
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)
    verdict = {EXIT_OK: "ok", EXIT_TOLERANCE: "TOLERANCE FAILURE"}[status]
    print(f"{args.command}: {verdict} ({len(table.rows)} records)", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
