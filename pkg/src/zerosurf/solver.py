"""Per-sample normal-offset solve and perturbed-surface assembly.

At each sample ``s`` with unit normal ``N`` we look for ``t`` such that
``u_eps(s + t N) = 0`` with ``u_eps = u + eps v``.  Splitting off the exact
second-order Taylor remainder gives the fixed-point map

    B t = -eps v(s) / g - t^2 phi / g,     g = grad u(s).N + eps grad v(s).N

and because ``t^2 phi`` *is* that remainder, the map collapses to the
parallel-chord step ``B t = t - u_eps(s + t N) / g``.  No intermediate point
or second derivative is needed inside the loop.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from zerosurf.errors import DegenerateGradient, SolveFailed
from zerosurf.field import perturbed
from zerosurf.surface import GRADIENT_FLOOR

CONVERGED = "converged"
MAX_ITER = "max_iter"
LEFT_M = "left_M"
DEGENERATE_GRADIENT = "degenerate_gradient"
NO_BRACKET = "no_bracket"
RESIDUAL = "residual"
STATUSES = (CONVERGED, MAX_ITER, LEFT_M, DEGENERATE_GRADIENT, NO_BRACKET, RESIDUAL)


@dataclass(frozen=True)
class PerturbOptions:
    epsilon: float
    delta: float
    tol_t: float = 1e-12
    max_iter: int = 50
    t0_strategy: str = "first_order"
    gradient_floor: float = GRADIENT_FLOOR
    # None: 10 * |g| * tol_t per sample
    residual_tol: float = None

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")
        if not self.tol_t > 0:
            raise ValueError("tol_t must be > 0")
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.t0_strategy not in ("zero", "first_order"):
            raise ValueError(f"unknown t0_strategy {self.t0_strategy!r}")


@dataclass
class PointSolve:
    vertex_id: int
    t: float
    iterations: int
    residual: float
    contraction_ratio: float  # nan when fewer than two steps were taken
    status: str
    slope: float = math.nan
    center: float = math.nan
    trace: list = field(default_factory=list)
    ratios: list = field(default_factory=list)

    @property
    def converged(self):
        return self.status == CONVERGED

    def as_dict(self, with_trace=False):
        d = {
            "vertex_id": self.vertex_id,
            "t": self.t,
            "iterations": self.iterations,
            "residual": self.residual,
            "contraction_ratio": None if math.isnan(self.contraction_ratio) else self.contraction_ratio,
            "status": self.status,
        }
        if with_trace:
            d["trace"] = list(self.trace)
        return d


def normal_slope(u, v, epsilon, s, N):
    """g = grad u(s).N + eps grad v(s).N, the fixed chord slope."""
    g = float(u.eval(s).gradient @ N)
    if epsilon != 0.0:
        g += epsilon * float(v.eval(s).gradient @ N)
    return g


def apply_B(u, v, epsilon, s, N, t, gradient_floor=GRADIENT_FLOOR):
    """One application of the fixed-point map at sample ``(s, N)``."""
    s = np.asarray(s, dtype=float)
    N = np.asarray(N, dtype=float)
    g = normal_slope(u, v, epsilon, s, N)
    if abs(g) < gradient_floor:
        raise DegenerateGradient(None, abs(g))
    return _chord_step(perturbed(u, v, epsilon), s, N, t, g)


def _chord_step(u_eps, s, N, t, g):
    return t - u_eps.value(s + t * N) / g


def solve_point(u, v, opts, sample):
    """Iterate t_{n+1} = B t_n at one sample; failures go into ``status``."""
    s, N, vid = np.asarray(sample.s, dtype=float), np.asarray(sample.N, dtype=float), sample.vertex_id
    eps = opts.epsilon
    u_eps = perturbed(u, v, eps)
    nan = math.nan

    if not np.any(N):
        return PointSolve(vid, nan, 0, nan, nan, DEGENERATE_GRADIENT)
    g = normal_slope(u, v, eps, s, N)
    if not abs(g) >= opts.gradient_floor:
        return PointSolve(vid, nan, 0, nan, nan, DEGENERATE_GRADIENT, slope=g)

    center = -eps * v.value(s) / g if eps else 0.0
    t = center if opts.t0_strategy == "first_order" else 0.0
    trace = [t]
    ratios = []
    prev_step = None
    status = MAX_ITER
    n = 0

    def done(status):
        residual = abs(u_eps.value(s + t * N))
        ratio = max(ratios) if ratios else nan
        return PointSolve(vid, t, n, residual, ratio, status, g, center, trace, ratios)

    if abs(t - center) > opts.delta:
        return done(LEFT_M)
    while n < opts.max_iter:
        t_new = _chord_step(u_eps, s, N, t, g)
        n += 1
        step = abs(t_new - t)
        t = t_new
        trace.append(t)
        if not math.isfinite(t) or abs(t - center) > opts.delta:
            return done(LEFT_M)
        if prev_step is not None and prev_step > 0:
            ratios.append(step / prev_step)
        prev_step = step
        if step <= opts.tol_t:
            status = CONVERGED
            break

    result = done(status)
    if status == CONVERGED:
        tol_r = opts.residual_tol if opts.residual_tol is not None else 10.0 * abs(g) * opts.tol_t
        if abs(t) > opts.delta:
            result.status = LEFT_M
        elif result.residual > tol_r:
            result.status = RESIDUAL
    return result


@dataclass
class PerturbedSurface:
    points: np.ndarray
    solves: list
    triangles: np.ndarray
    epsilon: float

    @property
    def ok(self):
        return all(p.converged for p in self.solves)

    @property
    def failed_vertices(self):
        return [p.vertex_id for p in self.solves if not p.converged]

    @property
    def t(self):
        return np.array([p.t for p in self.solves])

    def summary(self):
        conv = [p for p in self.solves if p.converged]
        ratios = [p.contraction_ratio for p in conv if not math.isnan(p.contraction_ratio)]
        counts = {}
        for p in self.solves:
            counts[p.status] = counts.get(p.status, 0) + 1
        return {
            "vertices": len(self.solves),
            "converged": len(conv),
            "status_counts": dict(sorted(counts.items())),
            "max_residual": max((p.residual for p in conv), default=None),
            "max_iterations": max((p.iterations for p in self.solves), default=0),
            "max_contraction_ratio": max(ratios, default=None),
            "max_abs_t": max((abs(p.t) for p in conv), default=None),
            "failed_vertices": self.failed_vertices,
        }


def _map(func, items, threads):
    if threads is None or threads <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def perturb_surface(seed, u, v, opts, partial=False, threads=1):
    """Solve every sample of ``seed`` and displace it along its normal.

    Raises :class:`SolveFailed` when any vertex fails to converge, unless
    ``partial`` is set, in which case the failing vertices stay in place
    and carry their status.
    """
    samples = seed.samples
    solves = _map(lambda smp: solve_point(u, v, opts, smp), samples, threads)
    points = np.array(seed.vertices, dtype=float)
    for p in solves:
        if p.converged:
            points[p.vertex_id] = seed.vertices[p.vertex_id] + p.t * seed.normals[p.vertex_id]
    result = PerturbedSurface(points, solves, np.array(seed.triangles), opts.epsilon)
    if not result.ok and not partial:
        raise SolveFailed(result.failed_vertices, result)
    return result
