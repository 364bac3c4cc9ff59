"""INI run configuration.

Sections::

    [u] / [v]   type = builtin | expression | herglotz
                builtin:    family = sphere|ellipsoid|torus|affine|constant|squared_sphere
                            plus that family's parameters (vectors as "a, b, c")
                expression: expression = <text>
                herglotz:   k, density (const | z-linear | <number> | <csv path>),
                            n_theta, n_phi, symmetry_tol
    [seed]      type = sphere | torus | obj; radius, subdivisions |
                ring_radius, tube_radius, n_u, n_v | path; allow_open,
                exclude_degenerate, validation_tol
    [run]       epsilon, oracle (bool), force (bool), partial (bool), threads
    [solver]    tol_t, max_iter, t0_strategy, delta, gradient_floor, residual_tol
    [bounds]    n_t, safety_factor, delta_cap (edge | none | <number>)
    [oracle]    tol, max_deviation
    [output]    dir, write_seed
"""

import configparser
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from zerosurf.errors import ConfigError

FIELD_TYPES = ("builtin", "expression", "herglotz")
VECTOR_KEYS = ("center", "a")


@dataclass
class FieldSpec:
    type: str
    params: dict
    base_dir: Path = Path(".")

    def describe(self):
        return {"type": self.type, **{k: v for k, v in sorted(self.params.items())}}


@dataclass
class RunConfig:
    u: FieldSpec
    v: FieldSpec
    seed: dict
    epsilon: float
    oracle: bool = True
    force: bool = False
    partial: bool = False
    threads: int = 1
    solver: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    oracle_opts: dict = field(default_factory=dict)
    output_dir: Path = Path("out")
    write_seed: bool = False
    source: str = None

    def describe(self):
        return {
            "u": self.u.describe(),
            "v": self.v.describe(),
            "seed": {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(self.seed.items())},
            "epsilon": self.epsilon,
            "oracle": self.oracle,
            "force": self.force,
            "partial": self.partial,
            "solver": dict(sorted(self.solver.items())),
            "bounds": dict(sorted(self.bounds.items())),
            "oracle_options": dict(sorted(self.oracle_opts.items())),
        }


def _number(text, key):
    try:
        x = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if math.isnan(x):
        raise ConfigError(f"{key}: nan is not allowed")
    return x


def _int(text, key):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _bool(text, key):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def _vector(text, key):
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected 3 components, got {text!r}")
    return tuple(_number(p, key) for p in parts)


def _field_spec(section, name, base_dir):
    items = dict(section)
    kind = items.pop("type", None)
    if kind is None:
        if "expression" in items:
            kind = "expression"
        elif "family" in items:
            kind = "builtin"
        else:
            raise ConfigError(f"[{name}] needs a type")
    if kind not in FIELD_TYPES:
        raise ConfigError(f"[{name}] unknown type {kind!r}")
    params = {}
    if kind == "expression":
        if "expression" not in items:
            raise ConfigError(f"[{name}] expression missing")
        params["expression"] = items.pop("expression")
    elif kind == "builtin":
        if "family" not in items:
            raise ConfigError(f"[{name}] family missing")
        params["family"] = items.pop("family")
        for k, val in items.items():
            params[k] = _vector(val, f"{name}.{k}") if k in VECTOR_KEYS else _number(val, f"{name}.{k}")
        items = {}
    else:
        params["k"] = _number(items.pop("k", "1"), f"{name}.k")
        params["density"] = items.pop("density", "const")
        params["n_theta"] = _int(items.pop("n_theta", "32"), f"{name}.n_theta")
        params["n_phi"] = _int(items.pop("n_phi", "32"), f"{name}.n_phi")
        params["symmetry_tol"] = _number(items.pop("symmetry_tol", "1e-12"), f"{name}.symmetry_tol")
    if items:
        raise ConfigError(f"[{name}] unknown keys: {', '.join(sorted(items))}")
    return FieldSpec(kind, params, base_dir)


def _seed_spec(section, base_dir):
    items = dict(section)
    kind = items.pop("type", "sphere")
    out = {"type": kind}
    if kind == "sphere":
        out["radius"] = _number(items.pop("radius", "1"), "seed.radius")
        out["subdivisions"] = _int(items.pop("subdivisions", "3"), "seed.subdivisions")
    elif kind == "torus":
        out["ring_radius"] = _number(items.pop("ring_radius", "2"), "seed.ring_radius")
        out["tube_radius"] = _number(items.pop("tube_radius", "0.5"), "seed.tube_radius")
        out["n_u"] = _int(items.pop("n_u", "16"), "seed.n_u")
        out["n_v"] = _int(items.pop("n_v", "8"), "seed.n_v")
    elif kind == "obj":
        if "path" not in items:
            raise ConfigError("[seed] obj needs a path")
        out["path"] = (base_dir / items.pop("path")).resolve()
    else:
        raise ConfigError(f"[seed] unknown type {kind!r}")
    out["allow_open"] = _bool(items.pop("allow_open", "false"), "seed.allow_open")
    out["exclude_degenerate"] = _bool(items.pop("exclude_degenerate", "false"), "seed.exclude_degenerate")
    out["validation_tol"] = _number(items.pop("validation_tol", "1e-10"), "seed.validation_tol")
    if items:
        raise ConfigError(f"[seed] unknown keys: {', '.join(sorted(items))}")
    return out


_SOLVER_KEYS = {"tol_t": _number, "max_iter": _int, "delta": _number, "gradient_floor": _number, "residual_tol": _number}
_BOUNDS_KEYS = {"n_t": _int, "safety_factor": _number}
_ORACLE_KEYS = {"tol": _number, "max_deviation": _number}


def _typed(section, name, table, extra=()):
    out = {}
    for k, val in dict(section).items():
        if k in extra:
            continue
        if k not in table:
            raise ConfigError(f"[{name}] unknown key {k!r}")
        out[k] = table[k](val, f"{name}.{k}")
    return out


def loads_config(text, base_dir=".", source=None):
    base_dir = Path(base_dir)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0]) from None
    for required in ("u", "v"):
        if not cp.has_section(required):
            raise ConfigError(f"missing section [{required}]")
    known = {"u", "v", "seed", "run", "solver", "bounds", "oracle", "output"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown sections: {', '.join(sorted(unknown))}")

    def sec(name):
        return cp[name] if cp.has_section(name) else {}

    run = dict(sec("run"))
    epsilon = _number(run.pop("epsilon", "0"), "run.epsilon")
    if epsilon < 0:
        raise ConfigError("run.epsilon must be >= 0")
    cfg = RunConfig(
        u=_field_spec(cp["u"], "u", base_dir),
        v=_field_spec(cp["v"], "v", base_dir),
        seed=_seed_spec(sec("seed"), base_dir),
        epsilon=epsilon,
        oracle=_bool(run.pop("oracle", "true"), "run.oracle"),
        force=_bool(run.pop("force", "false"), "run.force"),
        partial=_bool(run.pop("partial", "false"), "run.partial"),
        threads=_int(run.pop("threads", "1"), "run.threads"),
        source=source,
    )
    if run:
        raise ConfigError(f"[run] unknown keys: {', '.join(sorted(run))}")
    solver = sec("solver")
    cfg.solver = _typed(solver, "solver", _SOLVER_KEYS, extra=("t0_strategy",))
    if "t0_strategy" in solver:
        cfg.solver["t0_strategy"] = solver["t0_strategy"].strip()
    bounds = sec("bounds")
    cfg.bounds = _typed(bounds, "bounds", _BOUNDS_KEYS, extra=("delta_cap",))
    if "delta_cap" in bounds:
        cap = bounds["delta_cap"].strip().lower()
        cfg.bounds["delta_cap"] = "edge" if cap == "edge" else None if cap == "none" else _number(cap, "bounds.delta_cap")
    cfg.oracle_opts = _typed(sec("oracle"), "oracle", _ORACLE_KEYS)
    output = dict(sec("output"))
    cfg.output_dir = base_dir / output.pop("dir", "out")
    cfg.write_seed = _bool(output.pop("write_seed", "false"), "output.write_seed")
    if output:
        raise ConfigError(f"[output] unknown keys: {', '.join(sorted(output))}")
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return loads_config(text, base_dir=path.parent, source=str(path))


def read_density_csv(path):
    """Rows of ``index, re, im``; returns a dense complex array."""
    rows = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                idx, re_, im = int(row[0]), float(row[1]), float(row[2]) if len(row) > 2 else 0.0
            except (ValueError, IndexError):
                if not rows:
                    continue  # header line
                raise ConfigError(f"{path}: bad density row {row!r}") from None
            rows[idx] = complex(re_, im)
    if not rows:
        raise ConfigError(f"{path}: empty density file")
    n = max(rows) + 1
    if sorted(rows) != list(range(n)):
        raise ConfigError(f"{path}: density indices must cover 0..{n - 1}")
    return np.array([rows[i] for i in range(n)], dtype=complex)
