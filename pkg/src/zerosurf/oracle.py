"""Bisection along the normal as an independent check on the solver.

Shares nothing with the solver except field evaluation.
"""

import math
from dataclasses import dataclass

import numpy as np

from zerosurf.errors import NoBracket
from zerosurf.field import perturbed
from zerosurf.solver import _map
from zerosurf.surface import mesh_vertex_normals


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")


def max_bisection_steps(bracket, tol):
    return max(0, math.ceil(math.log2((bracket.hi - bracket.lo) / tol)))


def bisect_root(field, s, N, bracket, tol=1e-13):
    """Root of ``t -> field(s + t N)`` inside ``bracket``.

    Returns ``(t, steps)``.  Raises :class:`NoBracket` when the endpoint
    values share a sign.
    """
    s = np.asarray(s, dtype=float)
    N = np.asarray(N, dtype=float)
    lo, hi = float(bracket.lo), float(bracket.hi)
    f_lo = field.value(s + lo * N)
    f_hi = field.value(s + hi * N)
    if f_lo == 0.0:
        return lo, 0
    if f_hi == 0.0:
        return hi, 0
    if (f_lo > 0) == (f_hi > 0):
        raise NoBracket(bracket=(lo, hi))
    steps = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = field.value(s + mid * N)
        steps += 1
        if f_mid == 0.0:
            return mid, steps
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi), steps


@dataclass
class OracleResult:
    vertex_id: int
    t: float
    bracket: tuple
    widened: bool
    status: str  # "ok" or "no_bracket"


def oracle_vertex(u_eps, s, N, vertex_id, delta, tol=1e-13):
    """Bisect on [-delta, delta], widening once to [-2 delta, 2 delta]."""
    for widened, half in ((False, delta), (True, 2 * delta)):
        br = Bracket(-half, half)
        try:
            t, _ = bisect_root(u_eps, s, N, br, tol)
            return OracleResult(vertex_id, t, (br.lo, br.hi), widened, "ok")
        except NoBracket:
            continue
    return OracleResult(vertex_id, math.nan, (-2 * delta, 2 * delta), True, "no_bracket")


def oracle_surface(seed, u, v, epsilon, delta, tol=1e-13, threads=1):
    """Per-vertex oracle results.

    Vertices whose field normal is degenerate are probed along the mesh
    vertex normal instead, so a forced run still gets a verdict there.
    """
    u_eps = perturbed(u, v, epsilon)
    normals = np.array(seed.normals if seed.normals is not None else np.zeros_like(seed.vertices))
    missing = ~np.any(normals, axis=1)
    if missing.any():
        normals[missing] = mesh_vertex_normals(seed)[missing]
    return _map(
        lambda i: oracle_vertex(u_eps, seed.vertices[i], normals[i], i, delta, tol),
        range(seed.n_vertices),
        threads,
    )


def compare_with_oracle(perturbed_surface, seed, u, v, epsilon, delta, tol=1e-13, threads=1):
    """Max |t_solver - t_bisection| over the converged vertices.

    Raises :class:`NoBracket` (with the vertex id) if any vertex has no sign
    change even after widening.
    """
    results = oracle_surface(seed, u, v, epsilon, delta, tol, threads)
    by_id = {p.vertex_id: p for p in perturbed_surface.solves}
    worst = 0.0
    for r in results:
        if r.status != "ok":
            raise NoBracket(r.vertex_id, r.bracket)
        p = by_id[r.vertex_id]
        if p.converged:
            worst = max(worst, abs(p.t - r.t))
    return worst


def deviation_table(perturbed_surface, results):
    by_id = {r.vertex_id: r for r in results}
    rows = []
    for p in perturbed_surface.solves:
        r = by_id.get(p.vertex_id)
        dev = abs(p.t - r.t) if (r is not None and r.status == "ok" and p.converged) else None
        rows.append(
            {
                "vertex_id": p.vertex_id,
                "t_solver": p.t if p.converged else None,
                "t_oracle": r.t if (r is not None and r.status == "ok") else None,
                "deviation": dev,
                "solver_status": p.status,
                "oracle_status": "skipped" if r is None else r.status,
                "widened": None if r is None else r.widened,
            }
        )
    return rows
