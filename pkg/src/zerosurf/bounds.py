"""Sampled estimates of the admissibility constants gating the solver.

Notation follows the solver: ``g(s) = grad u_eps(s).N`` and
``phi(s, t) = N^T Hess u_eps(s + t N) N``.  Every sup/inf is taken over the
seed vertices and a uniform offset grid in ``[-delta, delta]``; nothing here
is a rigorous bound.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from zerosurf.errors import Degenerate, GateFailure
from zerosurf.field import perturbed
from zerosurf.surface import GRADIENT_FLOOR

N_T = 9
SAFETY_FACTOR = 2.0
EPSILON_CAP = 1.0
TINY = 1e-300
PHI_DIFF_STEP = 1e-4
# used when neither curvature nor the mesh limits delta
UNBOUNDED_DELTA = 1.0


def _grad_norms(seed, field):
    return np.array([np.linalg.norm(field.eval(s).gradient) for s in seed.vertices])


def _active(seed):
    skip = set(seed.degenerate)
    return [i for i in range(seed.n_vertices) if i not in skip]


def estimate_c1(seed, u, gradient_floor=GRADIENT_FLOOR, exclude=()):
    """Half the smallest |grad u| over the seed; 0.0 when below the floor.

    Vertices listed in ``exclude`` (a detected degenerate set) are skipped.
    """
    skip = set(exclude)
    norms = [np.linalg.norm(u.eval(s).gradient) for i, s in enumerate(seed.vertices) if i not in skip]
    if not norms:
        return 0.0
    m = float(min(norms))
    return 0.0 if m < gradient_floor else 0.5 * m


def check_c1_eps(seed, u, v, epsilon, c1):
    if not c1 > 0:
        raise Degenerate("c1 must be positive")
    return bool(_grad_norms(seed, perturbed(u, v, epsilon)).min() >= c1)


def _offsets(delta, n_t):
    if not delta > 0:
        raise ValueError("delta must be positive")
    if n_t < 2:
        raise ValueError("n_t must be >= 2")
    return np.linspace(-delta, delta, n_t)


def _phi(u_eps, s, N, tau):
    return u_eps.eval(s + tau * N).normal_form(N)


def estimate_c2(seed, u, v, epsilon, delta, n_t=N_T):
    """Sup of |N^T Hess u_eps(s + tau N) N| over vertices and a tau grid."""
    u_eps = perturbed(u, v, epsilon)
    taus = _offsets(delta, n_t)
    best = 0.0
    for i in _active(seed):
        s, N = seed.vertices[i], seed.normals[i]
        for tau in taus:
            best = max(best, abs(_phi(u_eps, s, N, tau)))
    return best


def geometric_cap(seed):
    """Half the shortest mesh edge, so neighbouring normal segments stay apart."""
    return 0.5 * seed.min_edge_length()


def admissible_delta(c1, c2_hat, cap=math.inf):
    """Largest delta with (c2/c1) delta <= 1, clipped to ``cap``."""
    if not c1 > 0:
        raise Degenerate(f"c1 = {c1!r}; the gradient lower bound fails")
    if c2_hat <= 0:
        return cap
    return min(c1 / c2_hat, cap)


def estimate_c3(seed, u, v, epsilon, delta, grid=N_T, h=PHI_DIFF_STEP):
    """Sampled contraction constant max (2|t||phi| + t^2 |dphi/dt|) / |g|.

    ``dphi/dt`` is a central difference with step ``h``.
    """
    u_eps = perturbed(u, v, epsilon)
    taus = _offsets(delta, grid)
    best = 0.0
    for i in _active(seed):
        s, N = seed.vertices[i], seed.normals[i]
        g = abs(float(u_eps.eval(s).gradient @ N))
        if g == 0.0:
            return math.inf
        for t in taus:
            phi = _phi(u_eps, s, N, t)
            dphi = (_phi(u_eps, s, N, t + h) - _phi(u_eps, s, N, t - h)) / (2 * h)
            best = max(best, (2 * abs(t) * abs(phi) + t * t * abs(dphi)) / g)
    return best


def admissible_epsilon(seed, u, v, delta, c1, cap=EPSILON_CAP):
    """Conservative eps bound: keep the first-order offset within delta / 2.

    ``0.5 * delta * c1 / sup|v|`` over the seed, clipped to ``cap``.
    """
    if not (c1 > 0 and delta > 0):
        raise Degenerate("need c1 > 0 and delta > 0")
    sup_v = max((abs(v.value(seed.vertices[i])) for i in _active(seed)), default=0.0)
    return min(0.5 * delta * c1 / max(sup_v, TINY), cap)


@dataclass
class BoundsReport:
    c1: float
    c1_eps: float
    c1_eps_ok: bool
    c2_hat: float
    c3_hat: float
    delta_pre_cap: float
    delta_cap: float
    delta_max: float
    epsilon: float
    epsilon_max: float
    safety_factor: float
    grid: dict

    @property
    def contraction_ok(self):
        return self.c3_hat < 1.0

    @property
    def epsilon_ok(self):
        return self.epsilon <= self.epsilon_max

    def as_dict(self):
        d = asdict(self)
        for k, val in d.items():
            if isinstance(val, float) and math.isinf(val):
                d[k] = None
        d["contraction_ok"] = self.contraction_ok
        d["epsilon_ok"] = self.epsilon_ok
        d["epsilon_max_note"] = "conservative"
        return d

    def gate(self, force=False):
        """Raise :class:`GateFailure` for the first failing gate unless forced."""
        if force:
            return
        if self.c1 <= 0:
            raise GateFailure("c1_zero", "inf |grad u| over the seed is below the gradient floor")
        if not self.contraction_ok:
            raise GateFailure("contraction_exceeded", f"c3_hat = {self.c3_hat:.6g} >= 1")
        if not self.epsilon_ok:
            raise GateFailure("epsilon_too_large", f"epsilon = {self.epsilon!r} > epsilon_max = {self.epsilon_max:.6g}")


def compute_bounds(
    seed,
    u,
    v,
    epsilon,
    n_t=N_T,
    safety_factor=SAFETY_FACTOR,
    delta_cap="edge",
    delta_override=None,
    gradient_floor=GRADIENT_FLOOR,
    exclude_degenerate=False,
):
    """Run every estimate in order and collect a :class:`BoundsReport`.

    ``delta_cap`` is ``"edge"`` (half the shortest edge), ``None`` for no
    cap, or a number.  ``exclude_degenerate`` leaves the seed's detected
    degenerate vertices out of every estimate, c1 included.  With c1 = 0 the remaining constants are reported as
    nan and the c1 gate fails.
    """
    nan = math.nan
    if delta_cap == "edge":
        cap = geometric_cap(seed)
    elif delta_cap is None:
        cap = math.inf
    else:
        cap = float(delta_cap)
    grid = {"vertices": seed.n_vertices - len(seed.degenerate), "n_t": n_t, "phi_diff_step": PHI_DIFF_STEP}
    c1 = estimate_c1(seed, u, gradient_floor, seed.degenerate if exclude_degenerate else ())
    if c1 <= 0:
        return BoundsReport(c1, nan, False, nan, nan, nan, cap, nan, epsilon, nan, safety_factor, grid)

    u_eps = perturbed(u, v, epsilon)
    c1_eps = float(min(np.linalg.norm(u_eps.eval(seed.vertices[i]).gradient) for i in _active(seed)))
    # sample phi on a window that contains the final delta: c2 on the
    # window only grows with it, so c1 / c2_hat <= window
    c2_base = max(abs(_phi(u_eps, seed.vertices[i], seed.normals[i], 0.0)) for i in _active(seed))
    window = admissible_delta(c1, c2_base, cap)
    if not math.isfinite(window):
        window = UNBOUNDED_DELTA
    c2_hat = max(c2_base, estimate_c2(seed, u, v, epsilon, window, n_t))
    delta_pre_cap = c1 / c2_hat if c2_hat > 0 else math.inf
    delta_max = min(delta_pre_cap, cap) / safety_factor
    if delta_override is not None:
        delta_max = float(delta_override)
    if not math.isfinite(delta_max):
        delta_max = UNBOUNDED_DELTA
    c3_hat = estimate_c3(seed, u, v, epsilon, delta_max, n_t)
    eps_max = admissible_epsilon(seed, u, v, delta_max, c1)
    return BoundsReport(
        c1=c1,
        c1_eps=c1_eps,
        c1_eps_ok=c1_eps >= c1,
        c2_hat=c2_hat,
        c3_hat=float(c3_hat),
        delta_pre_cap=delta_pre_cap,
        delta_cap=cap,
        delta_max=delta_max,
        epsilon=epsilon,
        epsilon_max=eps_max,
        safety_factor=safety_factor,
        grid=grid,
    )
