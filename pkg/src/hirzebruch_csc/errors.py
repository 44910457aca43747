"""Exception types shared across the package."""


class HCSCError(Exception):
    """Base class for package errors."""


class SingularityError(HCSCError, ValueError):
    """A formula needs ``1/f`` but the state sits at (or below) the floor ``f_floor``."""


class PreconditionError(HCSCError, ValueError):
    """Caller-supplied data violates a documented precondition."""


class InconsistencyError(HCSCError, ArithmeticError):
    """Two independent evaluation routes disagree beyond tolerance."""


class ConvergenceError(HCSCError, RuntimeError):
    """A solver failed to reach its stopping condition."""


class NonFiniteIntegrandError(HCSCError, FloatingPointError):
    """Quadrature met a NaN or infinity, usually an unregularised 1/f near t = +-T."""
