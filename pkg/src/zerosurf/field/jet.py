"""Second-order forward-mode jets in three variables.

A :class:`Jet` carries a value, its gradient and the upper triangle of its
Hessian through every arithmetic operation, so one pass over an expression
yields all derivatives needed by the solver and the bounds estimates.

Hessian storage order is ``(00, 01, 02, 11, 12, 22)``.
"""

import math

import numpy as np

from zerosurf.errors import DomainError

_I = np.array([0, 0, 0, 1, 1, 2])
_J = np.array([0, 1, 2, 1, 2, 2])
_ZERO3 = np.zeros(3)
_ZERO6 = np.zeros(6)


def _sym_outer(a, b):
    """Upper triangle of a b^T + b a^T."""
    return a[_I] * b[_J] + b[_I] * a[_J]


def _outer(a):
    """Upper triangle of a a^T."""
    return a[_I] * a[_J]


def expand_upper(h6):
    """Full symmetric 3x3 matrix from the six stored components."""
    h = np.empty((3, 3))
    h[_I, _J] = h6
    h[_J, _I] = h6
    return h


class Jet:
    __slots__ = ("val", "grad", "hess")

    def __init__(self, val, grad, hess):
        self.val = val
        self.grad = grad
        self.hess = hess

    @classmethod
    def constant(cls, c):
        return cls(float(c), _ZERO3, _ZERO6)

    @classmethod
    def variable(cls, x, index):
        g = np.zeros(3)
        g[index] = 1.0
        return cls(float(x), g, _ZERO6)

    def _chain(self, f0, f1, f2):
        # f(a): grad = f' da, hess = f' Ha + f'' da da^T
        return Jet(f0, f1 * self.grad, f1 * self.hess + f2 * _outer(self.grad))

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.val + other, self.grad, self.hess)
        return Jet(self.val + other.val, self.grad + other.grad, self.hess + other.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.val - other, self.grad, self.hess)
        return Jet(self.val - other.val, self.grad - other.grad, self.hess - other.hess)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.val * other, self.grad * other, self.hess * other)
        a, b = self, other
        return Jet(
            a.val * b.val,
            a.val * b.grad + b.val * a.grad,
            a.val * b.hess + b.val * a.hess + _sym_outer(a.grad, b.grad),
        )

    __rmul__ = __mul__

    def reciprocal(self):
        a = self.val
        if a == 0.0:
            raise DomainError("division by zero")
        inv = 1.0 / a
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            if other == 0:
                raise DomainError("division by zero")
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def ipow(self, n):
        """Integer power ``self**n``."""
        n = int(n)
        if n == 0:
            return Jet.constant(1.0)
        if n == 1:
            return self
        a = self.val
        if n < 0 and a == 0.0:
            raise DomainError("zero raised to a negative power")
        if n == 2:
            f0, f1, f2 = a * a, 2.0 * a, 2.0
        else:
            f0 = a**n
            f1 = n * a ** (n - 1)
            f2 = n * (n - 1) * a ** (n - 2)
        return self._chain(f0, f1, f2)

    def sin(self):
        s, c = math.sin(self.val), math.cos(self.val)
        return self._chain(s, c, -s)

    def cos(self):
        s, c = math.sin(self.val), math.cos(self.val)
        return self._chain(c, -s, -c)

    def exp(self):
        try:
            e = math.exp(self.val)
        except OverflowError as exc:
            raise DomainError("exp overflow") from exc
        return self._chain(e, e, e)

    def sqrt(self):
        a = self.val
        if a <= 0.0:
            # derivatives are unbounded at 0
            raise DomainError(f"sqrt of non-positive value {a!r}")
        r = math.sqrt(a)
        return self._chain(r, 0.5 / r, -0.25 / (r * a))

    def __repr__(self):
        return f"Jet(val={self.val!r}, grad={self.grad!r}, hess={self.hess!r})"
