"""Scalar fields with exact value, gradient and Hessian evaluation."""

from zerosurf.field.builtin import (
    Affine,
    Constant,
    Ellipsoid,
    Sphere,
    SquaredSphere,
    Torus,
    builtin,
)
from zerosurf.field.core import (
    ExpressionField,
    FieldEval,
    ScalarField,
    SumField,
    eval_field,
    fd_check,
    parse_expression,
    perturbed,
)

__all__ = [
    "Affine",
    "Constant",
    "Ellipsoid",
    "ExpressionField",
    "FieldEval",
    "ScalarField",
    "Sphere",
    "SquaredSphere",
    "SumField",
    "Torus",
    "builtin",
    "eval_field",
    "fd_check",
    "parse_expression",
    "perturbed",
]
