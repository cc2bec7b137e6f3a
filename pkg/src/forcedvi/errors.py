"""Exception types shared by the integrators and verification tools."""


class ForcedVIError(Exception):
    """Base class for all package errors."""


class NumericDomainError(ForcedVIError):
    """A function produced a non-finite value."""


class RegularityError(ForcedVIError):
    """A Jacobian needed for a solve is singular or badly conditioned."""


class ContractError(ForcedVIError):
    """Inputs violate the documented preconditions of an operation."""


class ConvergenceError(ForcedVIError):
    """Newton iteration did not reach the requested tolerance."""

    def __init__(self, message, last_residual=float("nan")):
        super().__init__(message)
        self.last_residual = last_residual


class DivergenceError(ForcedVIError):
    """A trajectory left the finite domain or a step solve failed."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class OracleFailure(ForcedVIError):
    """The numeric exact-discretization oracle could not solve its boundary value problem."""
