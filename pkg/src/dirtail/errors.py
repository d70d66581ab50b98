"""Exception hierarchy shared by all dirtail modules.

The CLI maps these onto exit codes: anything that is the caller's fault
(bad arguments, bad config, unsupported regime) exits 2, a numerical
failure inside an otherwise valid computation exits 3.
"""


class DirtailError(Exception):
    """Base class for all dirtail errors."""


class DomainError(DirtailError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ValidationError(DirtailError, ValueError):
    """A problem instance or configuration failed validation."""


class WrongRegimeError(DirtailError, ValueError):
    """The requested asymptotic does not apply to this (p, weights, radial) combination."""


class UnsupportedClassError(DirtailError, ValueError):
    """The radial law's max-domain of attraction does not support the operation."""


class NumericError(DirtailError, ArithmeticError):
    """An iteration failed to converge or produced a non-finite result."""
