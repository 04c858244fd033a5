"""Shared exception types."""


class ArityError(ValueError):
    """An index or sequence length is outside the supported range."""


class ConventionError(ValueError):
    """Parameters are incompatible with the chosen sign convention."""


class UnsupportedParameterError(ValueError):
    """Exact mode cannot represent a derived quantity inside Q(i)."""


class SingularityError(ArithmeticError):
    """A phase-space configuration hit a pole of the model."""


class SingularMatrixError(ArithmeticError):
    """Matrix inversion failed (exactly singular or numerically unusable)."""


class StructuralError(RuntimeError):
    """An algebraic reduction met input outside its guaranteed shape."""


class SamplerError(RuntimeError):
    """Random point sampling exhausted its retry budget."""


class BranchFailureError(RuntimeError):
    """The implicit map solver failed to converge to a solution branch."""


class CollisionError(RuntimeError):
    """Trajectory integration approached a two-body collision."""
