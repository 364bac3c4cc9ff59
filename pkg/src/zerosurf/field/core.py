from dataclasses import dataclass

import numpy as np

from zerosurf.errors import DomainError
from zerosurf.field import expression
from zerosurf.field.jet import expand_upper


@dataclass(frozen=True)
class FieldEval:
    """Value, gradient and symmetric Hessian of a scalar field at a point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    def normal_form(self, n):
        """The quadratic form n^T H n."""
        return float(n @ self.hessian @ n)


def as_point(p):
    x = np.asarray(p, dtype=float).reshape(3)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"non-finite point {x!r}")
    return x


def _checked(value, gradient, hessian):
    if not (np.isfinite(value) and np.all(np.isfinite(gradient)) and np.all(np.isfinite(hessian))):
        raise DomainError("non-finite field evaluation")
    return FieldEval(float(value), gradient, hessian)


class ScalarField:
    """A C^3 scalar field on R^3.

    Subclasses implement :meth:`_value` and :meth:`_eval`; callers use
    :meth:`value` (cheap, value only) and :meth:`eval`.
    """

    descriptor = "field"

    def value(self, p):
        v = self._value(as_point(p))
        if not np.isfinite(v):
            raise DomainError("non-finite field value")
        return float(v)

    def eval(self, p):
        return _checked(*self._eval(as_point(p)))

    def _value(self, x):
        return self._eval(x)[0]

    def _eval(self, x):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.descriptor}>"


class ExpressionField(ScalarField):
    def __init__(self, ast, text=None):
        self.ast = ast
        self.descriptor = text if text is not None else expression.to_text(ast)

    def _value(self, x):
        return expression.evaluate_value(self.ast, x)

    def _eval(self, x):
        jet = expression.evaluate_jet(self.ast, x)
        return jet.val, np.array(jet.grad, dtype=float), expand_upper(jet.hess)


class SumField(ScalarField):
    """``u + epsilon * v``; the perturbed field u_eps."""

    def __init__(self, u, v, epsilon):
        self.u = u
        self.v = v
        self.epsilon = float(epsilon)
        self.descriptor = f"({u.descriptor}) + {self.epsilon!r}*({v.descriptor})"

    def _value(self, x):
        if self.epsilon == 0.0:
            return self.u._value(x)
        return self.u._value(x) + self.epsilon * self.v._value(x)

    def _eval(self, x):
        a = self.u._eval(x)
        if self.epsilon == 0.0:
            return a
        b = self.v._eval(x)
        e = self.epsilon
        return a[0] + e * b[0], a[1] + e * b[1], a[2] + e * b[2]


def perturbed(u, v, epsilon):
    return SumField(u, v, epsilon)


def parse_expression(text):
    """Build an expression-backed field from source text.

    Raises :class:`~zerosurf.errors.ExpressionSyntaxError` or
    :class:`~zerosurf.errors.UnknownIdentifier`.
    """
    return ExpressionField(expression.parse(text), text.strip())


def eval_field(field, p):
    return field.eval(p)


def fd_check(field, p, h):
    """Max deviation between AD derivatives and central differences.

    The gradient is compared with central differences of the value and the
    Hessian with central differences of the AD gradient, both with step ``h``.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    x = as_point(p)
    ad = field.eval(x)
    fd_grad = np.empty(3)
    fd_hess = np.empty((3, 3))
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd_grad[i] = (field.value(x + e) - field.value(x - e)) / (2 * h)
        fd_hess[:, i] = (field.eval(x + e).gradient - field.eval(x - e).gradient) / (2 * h)
    fd_hess = 0.5 * (fd_hess + fd_hess.T)
    return float(max(np.max(np.abs(ad.gradient - fd_grad)), np.max(np.abs(ad.hessian - fd_hess))))
