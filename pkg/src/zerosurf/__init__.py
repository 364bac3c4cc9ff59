"""Perturbation of zero surfaces of smooth scalar fields.

Given a field ``u`` whose zero set is a closed surface ``S`` with
non-vanishing gradient, and a perturbation ``eps * v``, find the zero surface
of ``u + eps * v`` as a normal graph ``r = s + t(s) N(s)`` over ``S``.
"""

__version__ = "0.1.0"
