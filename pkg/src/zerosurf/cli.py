"""Command-line interface.

Exit codes: 0 ok, 2 gate failure, 3 solve failure, 4 config or I/O error.
Every failing run prints one ``<status> cause=<cause> ...`` line on stderr.
"""

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from zerosurf import herglotz, pipeline
from zerosurf.config import load_config
from zerosurf.field import fd_check
from zerosurf.errors import ConfigError, DomainError

FD_STEPS = (1e-3, 5e-4)
FD_NOISE_FLOOR = 1e-10
MIN_FD_ORDER = 1.8


def _apply_overrides(cfg, args):
    if args.epsilon is not None:
        if args.epsilon < 0:
            raise ConfigError("--epsilon must be >= 0")
        cfg.epsilon = args.epsilon
    if args.force:
        cfg.force = True
    if args.partial:
        cfg.partial = True
    if args.threads is not None:
        cfg.threads = args.threads
    if args.output is not None:
        cfg.output_dir = Path(args.output)
    if args.no_oracle:
        cfg.oracle = False
    return cfg


def _load(args):
    path = args.config_opt or args.config
    if path is None:
        raise ConfigError("no config given")
    return _apply_overrides(load_config(path), args)


def herglotz_check(cfg, n_points=100, seed=0):
    """Quadrature, Helmholtz and closed-form checks for the herglotz blocks."""
    rng = np.random.default_rng(seed)
    checks = {}
    for name, spec in (("u", cfg.u), ("v", cfg.v)):
        if spec.type != "herglotz":
            continue
        hf = pipeline.build_herglotz(spec)
        q = hf.quadrature
        b = q.nodes
        pts = rng.uniform(-1, 1, size=(n_points, 3)) * (5.0 / hf.k)
        helm = max(abs(herglotz.herglotz_eval(hf, x).helmholtz_residual(hf.k)) for x in pts) / hf.scale
        entry = {
            "k": hf.k,
            "nodes": len(q),
            "weight_sum_error": abs(float(q.weights.sum()) - 4 * math.pi),
            "int_beta3": abs(float(q.integrate(b[:, 2]))),
            "int_beta3_sq_error": abs(float(q.integrate(b[:, 2] ** 2)) - 4 * math.pi / 3),
            "helmholtz_relative_residual": helm,
            "density_asymmetry": herglotz.density_asymmetry(hf),
        }
        ok = entry["weight_sum_error"] <= 1e-12 and entry["int_beta3"] <= 1e-13 and helm <= 1e-12
        if np.allclose(hf.density, hf.density[0]):
            r = np.linalg.norm(pts, axis=1)
            sinc = [abs(herglotz.herglotz_eval(hf, x).value - hf.density[0] * herglotz.sinc_closed_form(hf.k, ri)) for x, ri in zip(pts, r)]
            entry["sinc_max_error"] = float(max(sinc))
            ok = ok and entry["sinc_max_error"] <= 1e-10 * max(1.0, abs(hf.density[0]))
        entry["ok"] = bool(ok)
        checks[name] = entry
    if not checks:
        raise ConfigError("no herglotz field in [u] or [v]")
    return checks


def fd_report(cfg, n_points=100, seed=0):
    """AD-vs-finite-difference deviations and observed order for u and v."""
    rng = np.random.default_rng(seed)
    checks = {}
    seed_mesh = pipeline.build_seed(cfg.seed)
    for name, spec in (("u", cfg.u), ("v", cfg.v)):
        f = pipeline.build_field(spec)
        idx = rng.integers(0, seed_mesh.n_vertices, size=n_points)
        pts = seed_mesh.vertices[idx] + rng.normal(scale=0.1, size=(n_points, 3))
        worst, orders, skipped = 0.0, [], 0
        for x in pts:
            try:
                d1, d2 = (fd_check(f, x, h) for h in FD_STEPS)
            except DomainError:
                skipped += 1
                continue
            worst = max(worst, d1)
            if d1 > FD_NOISE_FLOOR and d2 > 0:
                orders.append(math.log(d1 / d2) / math.log(FD_STEPS[0] / FD_STEPS[1]))
        checks[name] = {
            "descriptor": f.descriptor,
            "max_deviation": worst,
            "min_order": min(orders) if orders else None,
            "orders_measured": len(orders),
            "skipped_domain": skipped,
            "ok": (not orders or min(orders) >= MIN_FD_ORDER),
        }
    return checks


def _checks_command(args, command, func):
    cfg = _load(args)
    report = pipeline.RunReport(command=command, config=cfg.describe())
    report.checks = func(cfg)
    if not all(c["ok"] for c in report.checks.values()):
        failed = ",".join(k for k, c in report.checks.items() if not c["ok"])
        report.fail("check_failed", f"{command}:{failed}", pipeline.EXIT_SOLVE)
    pipeline.write_report(report, cfg.output_dir)
    return report


def _dispatch(args):
    if args.command == "perturb":
        return pipeline.run(_load(args), "perturb")
    if args.command == "oracle":
        cfg = _load(args)
        cfg.oracle = True
        return pipeline.run(cfg, "oracle")
    if args.command == "bounds":
        return pipeline.bounds_only(_load(args))
    if args.command == "herglotz-check":
        return _checks_command(args, "herglotz-check", herglotz_check)
    return _checks_command(args, "fd-check", fd_report)


def build_parser():
    parser = argparse.ArgumentParser(prog="zerosurf", description="Perturb the zero surface of a scalar field.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "perturb": "full pipeline: validate, bounds, solve, oracle, write mesh",
        "bounds": "admissibility constants and gates only",
        "oracle": "solve and compare every vertex with bisection",
        "herglotz-check": "quadrature / Helmholtz / closed-form checks for herglotz fields",
        "fd-check": "compare AD derivatives with finite differences",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("config", nargs="?", help="config file (INI)")
        p.add_argument("--config", dest="config_opt", metavar="PATH")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--force", action="store_true", help="run past failed gates")
        p.add_argument("--partial", action="store_true", help="emit results even if some vertices fail")
        p.add_argument("--threads", type=int)
        p.add_argument("--output", metavar="DIR")
        p.add_argument("--no-oracle", action="store_true")
        p.add_argument("--json", action="store_true", help="print the report on stdout")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    report = pipeline.run_safely(_dispatch, args)
    if args.json or report.status == "ok":
        if args.json:
            sys.stdout.write(report.to_json())
        else:
            print(report.one_line())
    if report.status != "ok":
        print(report.one_line(), file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
