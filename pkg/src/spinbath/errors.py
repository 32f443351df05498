"""Exception hierarchy shared across the simulator."""


class SpinBathError(Exception):
    """Base class for all simulator-specific errors."""


class DegenerateCouplingError(SpinBathError, ValueError):
    """A coupling vector that must be nonzero is identically zero."""


class ConfigurationError(SpinBathError):
    """Invalid or inconsistent run configuration (missing couplings, bad
    config file, step size too coarse). CLI exit code 2."""


class IntegrityError(SpinBathError):
    """A numerical invariant (trace, hermiticity, positivity) was violated
    beyond tolerance. CLI exit code 3."""

    def __init__(self, message, partial_record=None):
        super().__init__(message)
        self.partial_record = partial_record


class ContractViolationError(SpinBathError):
    """An operation was called outside its contract, e.g. the sector-blocked
    propagator with a generator that does not conserve total magnetization."""


class ResourceError(SpinBathError):
    """Requested problem size exceeds the configured desk-scale caps."""
