"""Exception hierarchy shared across the package.

CLI exit codes: ValidationError -> 1, ResourceCapError -> 2,
InvariantViolationError -> 3.
"""


class PTowerError(Exception):
    """Base class for package errors."""


class ValidationError(PTowerError):
    """Malformed input: bad presentation, non-prime modulus, bad corpus entry."""


class UnusablePrimeError(ValidationError):
    """The requested prime cannot be used (non-simple root, ramified, degree > 1)."""


class ResourceCapError(PTowerError):
    """A computation exceeded a configured size cap (module dimension, matrix size)."""


class InvariantViolationError(PTowerError):
    """An identity that is a theorem failed on computed data; indicates a bug."""


class FiltrationError(PTowerError):
    """Augmentation filtration stalled before the requested depth (working level too small)."""
