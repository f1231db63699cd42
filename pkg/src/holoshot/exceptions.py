"""Exception types raised across the package."""


class HoloshotError(Exception):
    """Base class for all package errors."""


class InvalidInput(HoloshotError, ValueError):
    """An argument is malformed, non-finite or out of its documented range."""


class ContractViolation(HoloshotError, ValueError):
    """An operator or state fails a structural invariant (hermiticity, unitarity, trace)."""


class UnreachableTransition(InvalidInput):
    """A transition with zero dipole coupling cannot be driven."""


class ConvergenceWarning(UserWarning):
    """The fixed-step integrator output drifted outside its trace/positivity bounds."""
