"""Closed-form fields with hand-coded derivatives.

Every family accepts a ``scale`` factor multiplying the whole field, which
changes |grad u| but not the zero set.
"""

import numpy as np

from zerosurf.errors import ConfigError
from zerosurf.field.core import ScalarField

_EYE = np.eye(3)


class BuiltinField(ScalarField):
    family = None

    def __init__(self, scale=1.0, **params):
        self.scale = float(scale)
        self.params = params
        shown = ", ".join(f"{k}={v!r}" for k, v in params.items())
        if self.scale != 1.0:
            shown = f"{shown}, scale={self.scale!r}" if shown else f"scale={self.scale!r}"
        self.descriptor = f"{self.family}({shown})"

    def _eval(self, x):
        f, g, h = self._raw(x)
        s = self.scale
        return s * f, s * g, s * h

    def _value(self, x):
        return self.scale * self._raw_value(x)

    def _raw_value(self, x):
        return self._raw(x)[0]


class Sphere(BuiltinField):
    """|x - c|^2 - R^2."""

    family = "sphere"

    def __init__(self, radius=1.0, center=(0.0, 0.0, 0.0), scale=1.0):
        super().__init__(scale, radius=float(radius), center=tuple(float(c) for c in center))
        self.radius = float(radius)
        self.center = np.array(center, dtype=float)

    def _raw_value(self, x):
        d = x - self.center
        return d @ d - self.radius**2

    def _raw(self, x):
        d = x - self.center
        return d @ d - self.radius**2, 2.0 * d, 2.0 * _EYE


class Ellipsoid(BuiltinField):
    """(x1/a)^2 + (x2/b)^2 + (x3/c)^2 - 1."""

    family = "ellipsoid"

    def __init__(self, a=1.0, b=1.0, c=1.0, scale=1.0):
        super().__init__(scale, a=float(a), b=float(b), c=float(c))
        self.inv2 = 1.0 / np.array([a, b, c], dtype=float) ** 2

    def _raw(self, x):
        return self.inv2 @ (x * x) - 1.0, 2.0 * self.inv2 * x, np.diag(2.0 * self.inv2)


class Torus(BuiltinField):
    """Quartic level set (|x|^2 + R^2 - r^2)^2 - 4 R^2 (x1^2 + x2^2).

    Same zero set as (sqrt(x1^2 + x2^2) - R)^2 + x3^2 - r^2 but smooth
    everywhere.
    """

    family = "torus"

    def __init__(self, ring_radius=2.0, tube_radius=0.5, scale=1.0):
        super().__init__(scale, ring_radius=float(ring_radius), tube_radius=float(tube_radius))
        self.R = float(ring_radius)
        self.r = float(tube_radius)
        self._planar = np.array([1.0, 1.0, 0.0])

    def _raw_value(self, x):
        R2 = self.R**2
        q = x @ x + R2 - self.r**2
        return q * q - 4.0 * R2 * (x[0] ** 2 + x[1] ** 2)

    def _raw(self, x):
        R2 = self.R**2
        q = x @ x + R2 - self.r**2
        f = q * q - 4.0 * R2 * (x[0] ** 2 + x[1] ** 2)
        g = 4.0 * q * x - 8.0 * R2 * self._planar * x
        h = 8.0 * np.outer(x, x) + 4.0 * q * _EYE - 8.0 * R2 * np.diag(self._planar)
        return f, g, 0.5 * (h + h.T)


class Affine(BuiltinField):
    """a . x + b."""

    family = "affine"

    def __init__(self, a=(0.0, 0.0, 0.0), b=0.0, scale=1.0):
        super().__init__(scale, a=tuple(float(c) for c in a), b=float(b))
        self.a = np.array(a, dtype=float)
        self.b = float(b)

    def _raw(self, x):
        return self.a @ x + self.b, self.a.copy(), np.zeros((3, 3))


class Constant(Affine):
    family = "constant"

    def __init__(self, value=1.0, scale=1.0):
        BuiltinField.__init__(self, scale, value=float(value))
        self.a = np.zeros(3)
        self.b = float(value)


class SquaredSphere(BuiltinField):
    """(|x|^2 - R^2)^2: vanishes on the sphere with zero gradient there."""

    family = "squared_sphere"

    def __init__(self, radius=1.0, scale=1.0):
        super().__init__(scale, radius=float(radius))
        self.radius = float(radius)

    def _raw_value(self, x):
        return (x @ x - self.radius**2) ** 2

    def _raw(self, x):
        w = x @ x - self.radius**2
        return w * w, 4.0 * w * x, 8.0 * np.outer(x, x) + 4.0 * w * _EYE


FAMILIES = {
    cls.family: cls for cls in (Sphere, Ellipsoid, Torus, Affine, Constant, SquaredSphere)
}


def builtin(family, **params):
    """Instantiate a built-in family by name."""
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ConfigError(f"unknown builtin field family {family!r}") from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {family!r}: {exc}") from None
