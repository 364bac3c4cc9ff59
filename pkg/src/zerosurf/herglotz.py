"""Herglotz wave functions u(x) = int_{S^2} exp(i k beta.x) f(beta) dbeta.

The sphere integral is replaced by a product rule (Gauss-Legendre in
cos(theta) times the trapezoid rule in phi) with the density tabulated at
the nodes.  Because every node is a unit vector, the discretized field
satisfies the Helmholtz equation exactly, up to rounding.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from zerosurf.errors import AsymmetricDensity, NodeMismatch
from zerosurf.field import ScalarField


@dataclass(frozen=True, eq=False)
class SphericalQuadrature:
    nodes: np.ndarray  # (n, 3) unit vectors
    weights: np.ndarray  # (n,) positive, sum 4 pi
    n_theta: int
    n_phi: int

    def __len__(self):
        return len(self.weights)

    @property
    def antipode(self):
        """Index of -beta_j for every node, or None if the rule is not symmetric."""
        if self.n_phi % 2:
            return None
        i, j = np.divmod(np.arange(len(self)), self.n_phi)
        return (self.n_theta - 1 - i) * self.n_phi + (j + self.n_phi // 2) % self.n_phi

    def integrate(self, values):
        return np.sum(self.weights * np.asarray(values))

    def same_nodes(self, other):
        return self is other or (
            self.nodes.shape == other.nodes.shape
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )


def make_quadrature(n_theta, n_phi):
    if n_theta < 1 or n_phi < 1:
        raise ValueError("need n_theta >= 1 and n_phi >= 1")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    sin_t = np.sqrt(1.0 - x * x)
    nodes = np.empty((n_theta, n_phi, 3))
    nodes[..., 0] = sin_t[:, None] * np.cos(phi)[None, :]
    nodes[..., 1] = sin_t[:, None] * np.sin(phi)[None, :]
    nodes[..., 2] = x[:, None]
    weights = np.repeat(w * (2 * np.pi / n_phi), n_phi)
    return SphericalQuadrature(nodes.reshape(-1, 3), weights, n_theta, n_phi)


@dataclass(frozen=True, eq=False)
class HerglotzField:
    k: float
    density: np.ndarray  # complex, one value per node
    quadrature: SphericalQuadrature

    def __post_init__(self):
        d = np.asarray(self.density, dtype=complex).reshape(-1)
        if d.shape[0] != len(self.quadrature):
            raise NodeMismatch(f"density has {d.shape[0]} values, quadrature has {len(self.quadrature)} nodes")
        if not self.k > 0:
            raise ValueError("k must be positive")
        if not np.all(np.isfinite(d)):
            raise ValueError("density must be finite")
        object.__setattr__(self, "density", d)

    @property
    def scale(self):
        """Sum of w_j |f_j|; the natural size of the field and its derivatives."""
        return float(np.sum(self.quadrature.weights * np.abs(self.density)))


@dataclass(frozen=True)
class ComplexFieldEval:
    value: complex
    gradient: np.ndarray
    hessian: np.ndarray

    def helmholtz_residual(self, k):
        return np.trace(self.hessian) + k * k * self.value


def density_from(quadrature, spec):
    """Tabulate a density on the nodes.

    ``spec`` is a callable of the (n, 3) node array, a named built-in
    (``"const"`` for f = 1, ``"z-linear"`` for f = i beta_3), a scalar, or an
    array of node values.
    """
    b = quadrature.nodes
    if callable(spec):
        return np.asarray(spec(b), dtype=complex) * np.ones(len(b))
    if isinstance(spec, str):
        if spec == "const":
            return np.ones(len(b), dtype=complex)
        if spec == "z-linear":
            return 1j * b[:, 2]
        raise ValueError(f"unknown density {spec!r}")
    arr = np.asarray(spec, dtype=complex)
    if arr.ndim == 0:
        return np.full(len(b), complex(arr))
    if arr.shape != (len(b),):
        raise NodeMismatch(f"density has {arr.size} values, quadrature has {len(b)} nodes")
    return arr


def herglotz_eval(hf, x):
    """Value, gradient and Hessian by differentiating under the sum."""
    x = np.asarray(x, dtype=float).reshape(3)
    q = hf.quadrature
    b = q.nodes
    c = q.weights * hf.density * np.exp(1j * hf.k * (b @ x))
    ik = 1j * hf.k
    value = np.sum(c)
    gradient = ik * (c @ b)
    hessian = np.empty((3, 3), dtype=complex)
    for i in range(3):
        for j in range(i, 3):
            hessian[i, j] = hessian[j, i] = (ik * ik) * np.sum(c * b[:, i] * b[:, j])
    return ComplexFieldEval(complex(value), gradient, hessian)


class HerglotzRealField(ScalarField):
    """Real part of a Herglotz field with Hermitian-symmetric density."""

    def __init__(self, hf, label=None):
        self.hf = hf
        self.descriptor = label or f"herglotz(k={hf.k!r}, nodes={len(hf.quadrature)})"

    def _eval(self, x):
        e = herglotz_eval(self.hf, x)
        return e.value.real, e.gradient.real.copy(), e.hessian.real.copy()

    def _value(self, x):
        q = self.hf.quadrature
        c = q.weights * self.hf.density * np.exp(1j * self.hf.k * (q.nodes @ x))
        return float(np.sum(c).real)


def density_asymmetry(hf):
    anti = hf.quadrature.antipode
    if anti is None:
        return math.inf
    f = hf.density
    return float(np.max(np.abs(f - np.conj(f[anti]))))


def herglotz_real(hf, symmetry_tol=1e-12, label=None):
    """Expose a real-valued Herglotz field to the solver.

    Requires f(-beta) = conj(f(beta)) on an antipodally symmetric rule.
    """
    asym = density_asymmetry(hf)
    if not asym <= symmetry_tol:
        raise AsymmetricDensity(f"max |f(b) - conj(f(-b))| = {asym:.3e} > {symmetry_tol:.1e}")
    return HerglotzRealField(hf, label)


def perturb_density(hf, g, epsilon):
    """Field with density f + eps g.

    ``g`` is a node-value array or another :class:`HerglotzField` on the
    same quadrature.
    """
    if isinstance(g, HerglotzField):
        if not hf.quadrature.same_nodes(g.quadrature):
            raise NodeMismatch("densities live on different quadrature rules")
        if g.k != hf.k:
            raise NodeMismatch("wavenumbers differ")
        g = g.density
    g = np.asarray(g, dtype=complex).reshape(-1)
    if g.shape[0] != len(hf.quadrature):
        raise NodeMismatch(f"perturbation has {g.shape[0]} values, quadrature has {len(hf.quadrature)} nodes")
    return replace(hf, density=hf.density + epsilon * g)


def sinc_closed_form(k, r):
    """int_{S^2} exp(i k beta.x) dbeta = 4 pi sin(k r) / (k r), r = |x|."""
    kr = k * r
    return 4 * np.pi * (np.sinc(kr / np.pi))


def find_degenerate_set(seed, u, tol):
    """Vertex ids with |grad u(s)| < tol."""
    return [i for i, s in enumerate(seed.vertices) if np.linalg.norm(u.eval(s).gradient) < tol]
