"""
Exception hierarchy for fingerprint design, analysis and simulation.

Every error derives from ValueError so callers that already guard input
problems with ``except ValueError`` keep working.
"""


class FingerprintError(ValueError):
    """Base class for all package errors."""


class DomainError(FingerprintError):
    """An argument lies outside the domain of the operation."""


class DimensionError(FingerprintError):
    """Array shapes or lengths do not agree."""


class CapacityError(FingerprintError):
    """A size or enumeration guard was exceeded."""


class ParseError(FingerprintError):
    """A text file does not follow its documented format."""


class ValidationError(FingerprintError):
    """A structural invariant (Steiner, Hadamard, unit norm, ...) is violated."""


class ConvergenceError(FingerprintError):
    """An iterative solver hit its iteration cap (only raised on request)."""
