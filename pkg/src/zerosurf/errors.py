"""Exception hierarchy shared across the package."""


class ZeroSurfError(Exception):
    """Base class for all package errors."""


class DomainError(ZeroSurfError, ArithmeticError):
    """A field expression hit an undefined operation at the evaluation point."""


class ExpressionSyntaxError(ZeroSurfError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnknownIdentifier(ZeroSurfError, ValueError):
    def __init__(self, name):
        super().__init__(f"unknown identifier {name!r}")
        self.name = name


class DegenerateGradient(ZeroSurfError):
    """|grad u| fell below the gradient floor at a surface sample."""

    def __init__(self, vertex_id, magnitude):
        super().__init__(f"degenerate gradient at vertex {vertex_id}: |grad u| = {magnitude:.3e}")
        self.vertex_id = vertex_id
        self.magnitude = magnitude


class Degenerate(ZeroSurfError, ValueError):
    """Raised when an admissibility constant cannot be formed (c1 <= 0)."""


class SolveFailed(ZeroSurfError):
    def __init__(self, vertex_ids, result=None):
        ids = list(vertex_ids)
        shown = ", ".join(str(i) for i in ids[:10])
        more = "" if len(ids) <= 10 else f", ... ({len(ids)} total)"
        super().__init__(f"solve failed at vertices {shown}{more}")
        self.vertex_ids = ids
        self.result = result


class NoBracket(ZeroSurfError):
    def __init__(self, vertex_id=None, bracket=None):
        where = "" if vertex_id is None else f" at vertex {vertex_id}"
        span = "" if bracket is None else f" on [{bracket[0]:.6g}, {bracket[1]:.6g}]"
        super().__init__(f"no sign change{where}{span}")
        self.vertex_id = vertex_id
        self.bracket = bracket


class AsymmetricDensity(ZeroSurfError, ValueError):
    pass


class NodeMismatch(ZeroSurfError, ValueError):
    pass


class ConfigError(ZeroSurfError, ValueError):
    pass


class GateFailure(ZeroSurfError):
    """An admissibility gate rejected the run.

    ``cause`` is one of ``c1_zero``, ``contraction_exceeded``,
    ``epsilon_too_large``.
    """

    def __init__(self, cause, detail=""):
        super().__init__(f"{cause}: {detail}" if detail else cause)
        self.cause = cause
        self.detail = detail
