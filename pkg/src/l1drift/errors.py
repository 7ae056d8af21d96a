"""Exception types raised across the package."""


class L1DriftError(Exception):
    """Base class for package errors."""


class DomainError(L1DriftError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class GridLookupError(L1DriftError, KeyError):
    """A time point is not on the declared grid of a tabulated kernel."""


class GridMismatchError(L1DriftError, ValueError):
    """Two paths or arrays that must share a grid do not."""


class DegenerateKernelError(L1DriftError, RuntimeError):
    """Covariance factorization failed even after jitter escalation."""


class IdentifiabilityError(L1DriftError, ValueError):
    """The drift cannot be identified from the data (e.g. x0 = 0)."""


class RangeError(L1DriftError, ValueError):
    """Value outside the range of a function being inverted."""


class NotApplicableError(L1DriftError):
    """Hypotheses of a bound are not met for the supplied profile."""
