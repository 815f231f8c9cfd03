"""Exception hierarchy shared across the kernel.

Everything raised on purpose derives from HsError so the CLI can map
domain failures to exit code 1 and input/parse failures to exit code 2.
"""


class HsError(Exception):
    """Base class for all kernel errors."""


class ParseError(HsError):
    """Malformed textual or JSON input (CLI exit code 2)."""


class PresentationError(HsError):
    """Algebra presentation rejected (non-monic relation, bad base, ...)."""


class NonConfluent(PresentationError):
    """Completion of the rewriting system exceeded the degree cap."""

    def __init__(self, message, pair=None, degree=None):
        super().__init__(message)
        self.pair = pair
        self.degree = degree


class NonUnitDivision(HsError):
    """Exact division attempted by a non-unit coefficient."""


class InvalidDerivation(HsError):
    """Generator images fail to kill the defining relations."""


class ShapeMismatch(HsError):
    """Operands live over incompatible coefficient shapes or rings."""


class IllDefinedSubstitution(HsError):
    """Proposed variable images do not respect the target shape.

    ``alpha`` names a monomial exponent that must vanish in the target
    but does not.
    """

    def __init__(self, message, alpha=None):
        super().__init__(message)
        self.alpha = alpha


class OrderExceeded(HsError):
    """Operator does not lie in the requested finite-order window."""


class DegreeCapExceeded(HsError):
    """A computation hit its configured degree or node budget."""


class NotAUnit(HsError):
    """Series inversion requested for a series with non-unit constant term."""


class InternalInvariantViolation(HsError):
    """A consistency identity the kernel re-verifies after construction failed.

    This signals a bug in the kernel, never bad user input.
    """
