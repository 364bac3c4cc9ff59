"""Run orchestration: validate -> bounds -> solve -> oracle -> write."""

import json
import math
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from zerosurf import bounds as bnd
from zerosurf import herglotz, oracle, solver, surface
from zerosurf.config import read_density_csv
from zerosurf.errors import ConfigError, GateFailure, SolveFailed, ZeroSurfError
from zerosurf.field import builtin, parse_expression

EXIT_OK = 0
EXIT_GATE = 2
EXIT_SOLVE = 3
EXIT_CONFIG = 4
DEFAULT_MAX_DEVIATION = 1e-8


def build_field(spec):
    p = dict(spec.params)
    if spec.type == "expression":
        return parse_expression(p["expression"])
    if spec.type == "builtin":
        family = p.pop("family")
        return builtin(family, **p)
    return herglotz.herglotz_real(build_herglotz(spec), p["symmetry_tol"])


def build_herglotz(spec):
    p = spec.params
    quad = herglotz.make_quadrature(p["n_theta"], p["n_phi"])
    density = p["density"]
    if isinstance(density, str) and density not in ("const", "z-linear"):
        try:
            density = float(density)
        except ValueError:
            density = read_density_csv(spec.base_dir / density)
    return herglotz.HerglotzField(p["k"], herglotz.density_from(quad, density), quad)


def build_seed(spec):
    kind = spec["type"]
    if kind == "sphere":
        seed = surface.seed_sphere(spec["radius"], spec["subdivisions"])
    elif kind == "torus":
        seed = surface.seed_torus(spec["ring_radius"], spec["tube_radius"], spec["n_u"], spec["n_v"])
    else:
        try:
            seed = surface.SeedSurface.from_obj(spec["path"], allow_open=spec["allow_open"])
        except OSError as exc:
            raise ConfigError(f"cannot read seed mesh {spec['path']}: {exc.strerror}") from None
    if spec["allow_open"] and not seed.allow_open:
        seed = replace(seed, allow_open=True)
    return seed


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Path):
        return str(x)
    return x


@dataclass
class RunReport:
    command: str
    status: str = "ok"
    cause: str = None
    detail: str = None
    exit_code: int = EXIT_OK
    config: dict = None
    seed_validation: dict = None
    degenerate_vertices: list = None
    bounds: dict = None
    solve: dict = None
    oracle: dict = None
    checks: dict = None
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    timestamp: str = None

    def as_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        return _clean({k: v for k, v in d.items() if v is not None})

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def numerics(self):
        """Report content without the run-dependent timing fields."""
        d = self.as_dict()
        d.pop("timings", None)
        d.pop("timestamp", None)
        return d

    def fail(self, status, cause, exit_code, detail=""):
        self.status, self.cause, self.exit_code = status, cause, exit_code
        self.detail = detail or None
        return self

    def one_line(self):
        if self.status == "ok":
            return f"ok {self.command}"
        return f"{self.status} cause={self.cause}" + (f" detail={self.detail}" if self.detail else "")


class _Timer:
    def __init__(self, report):
        self.report = report

    def __call__(self, name):
        self.name = name
        return self

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.report.timings[self.name] = time.perf_counter() - self.t0


@dataclass
class Context:
    config: object
    u: object = None
    v: object = None
    seed: object = None
    report: RunReport = None
    bounds: object = None
    result: object = None


def _prepare(config, command):
    report = RunReport(command=command, config=config.describe())
    report.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    ctx = Context(config, report=report)
    timer = _Timer(report)
    with timer("setup"):
        ctx.u = build_field(config.u)
        ctx.v = build_field(config.v)
        seed = build_seed(config.seed)
        floor = config.solver.get("gradient_floor", surface.GRADIENT_FLOOR)
        ctx.seed = surface.attach_normals(seed, ctx.u, floor, skip_degenerate=True)
    with timer("validate"):
        val = surface.validate_seed(ctx.seed, ctx.u, config.seed["validation_tol"])
    report.seed_validation = val.as_dict()
    report.degenerate_vertices = list(ctx.seed.degenerate)
    if not val.passed and not config.force:
        report.fail("gate_failure", "seed_invalid", EXIT_GATE, "; ".join(val.failures()))
        return ctx
    with timer("bounds"):
        b = bnd.compute_bounds(
            ctx.seed,
            ctx.u,
            ctx.v,
            config.epsilon,
            n_t=config.bounds.get("n_t", bnd.N_T),
            safety_factor=config.bounds.get("safety_factor", bnd.SAFETY_FACTOR),
            delta_cap=config.bounds.get("delta_cap", "edge"),
            delta_override=config.solver.get("delta"),
            gradient_floor=floor,
            exclude_degenerate=config.seed["exclude_degenerate"],
        )
    ctx.bounds = b
    report.bounds = b.as_dict()
    try:
        b.gate(force=config.force)
    except GateFailure as exc:
        report.fail("gate_failure", exc.cause, EXIT_GATE, exc.detail)
    return ctx


def _delta(ctx):
    b = ctx.bounds
    if b is not None and math.isfinite(b.delta_max):
        return b.delta_max
    # forced run with c1 = 0: fall back to the geometric cap for the oracle window
    return bnd.geometric_cap(ctx.seed) if ctx.seed.n_vertices else 1.0


def _solve(ctx):
    cfg = ctx.config
    opts = solver.PerturbOptions(
        epsilon=cfg.epsilon,
        delta=_delta(ctx),
        tol_t=cfg.solver.get("tol_t", 1e-12),
        max_iter=cfg.solver.get("max_iter", 50),
        t0_strategy=cfg.solver.get("t0_strategy", "first_order"),
        gradient_floor=cfg.solver.get("gradient_floor", surface.GRADIENT_FLOOR),
        residual_tol=cfg.solver.get("residual_tol"),
    )
    with _Timer(ctx.report)("solve"):
        ctx.result = solver.perturb_surface(ctx.seed, ctx.u, ctx.v, opts, partial=True, threads=cfg.threads)
    summary = ctx.result.summary()
    summary["delta"] = opts.delta
    summary["tol_t"] = opts.tol_t
    if ctx.bounds is not None and math.isfinite(ctx.bounds.c3_hat) and 0 < ctx.bounds.c3_hat < 1:
        summary["iteration_bound"] = math.ceil(math.log(opts.tol_t / opts.delta) / math.log(ctx.bounds.c3_hat)) + 2
    ctx.report.solve = summary


def _oracle(ctx, table=False):
    cfg = ctx.config
    delta = _delta(ctx)
    with _Timer(ctx.report)("oracle"):
        results = oracle.oracle_surface(
            ctx.seed, ctx.u, ctx.v, cfg.epsilon, delta, cfg.oracle_opts.get("tol", 1e-13), cfg.threads
        )
    rows = oracle.deviation_table(ctx.result, results)
    devs = [r["deviation"] for r in rows if r["deviation"] is not None]
    limit = cfg.oracle_opts.get("max_deviation", DEFAULT_MAX_DEVIATION)
    section = {
        "bracket_half_width": delta,
        "max_deviation": max(devs, default=None),
        "max_deviation_limit": limit,
        "compared": len(devs),
        "no_bracket": [r.vertex_id for r in results if r.status != "ok"],
        "widened": [r.vertex_id for r in results if r.widened and r.status == "ok"],
    }
    if table:
        section["table"] = rows
    ctx.report.oracle = section
    return section


def _write_mesh(ctx):
    cfg = ctx.config
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "perturbed.obj"
    surface.objio.write_obj(path, ctx.result.points, ctx.result.triangles)
    ctx.report.outputs["mesh"] = str(path)
    if cfg.write_seed:
        seed_path = out / "seed_validated.obj"
        surface.objio.write_obj(seed_path, ctx.seed.vertices, ctx.seed.triangles)
        ctx.report.outputs["seed"] = str(seed_path)


def write_report(report, output_dir):
    """``report.json`` for ``perturb``; ``<command>_report.json`` otherwise."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = "report.json" if report.command == "perturb" else f"{report.command}_report.json"
    path = out / name
    report.outputs["report"] = str(path)
    path.write_text(report.to_json())
    return path


def run(config, command="perturb", write=True):
    """Full pipeline; returns the :class:`RunReport` (never raises on gates)."""
    ctx = _prepare(config, command)
    report = ctx.report
    if report.status == "ok":
        _solve(ctx)
        if config.oracle or command == "oracle":
            section = _oracle(ctx, table=(command == "oracle"))
        else:
            section = None
        if report.status == "ok":
            if not ctx.result.ok and not config.partial:
                err = SolveFailed(ctx.result.failed_vertices)
                report.fail("solve_failed", "not_converged", EXIT_SOLVE, str(err))
            elif section is not None and section["no_bracket"]:
                report.fail("solve_failed", "no_bracket", EXIT_SOLVE, f"{len(section['no_bracket'])} vertices")
            elif section is not None and section["max_deviation"] is not None and section["max_deviation"] > section["max_deviation_limit"]:
                report.fail("solve_failed", "oracle_mismatch", EXIT_SOLVE, f"max deviation {section['max_deviation']:.3e}")
        if write and (report.status == "ok" or config.partial):
            _write_mesh(ctx)
    if write:
        write_report(report, config.output_dir)
    return report


def bounds_only(config, write=True):
    ctx = _prepare(config, "bounds")
    if write:
        write_report(ctx.report, config.output_dir)
    return ctx.report


def run_safely(func, *args, **kwargs):
    """Call a pipeline entry point, mapping package errors to exit codes."""
    try:
        return func(*args, **kwargs)
    except ConfigError as exc:
        report = RunReport(command=getattr(func, "__name__", "run"))
        return report.fail("error", "config", EXIT_CONFIG, str(exc))
    except OSError as exc:
        report = RunReport(command=getattr(func, "__name__", "run"))
        return report.fail("error", "io", EXIT_CONFIG, str(exc))
    except ZeroSurfError as exc:
        report = RunReport(command=getattr(func, "__name__", "run"))
        return report.fail("error", type(exc).__name__, EXIT_CONFIG, str(exc))
