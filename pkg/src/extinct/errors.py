"""Exception hierarchy shared across the package.

Exit-code contract for the CLI: validation problems exit 2, numerical
failures exit 3, cost guards exit 4.
"""


class ExtinctError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class ValidationError(ExtinctError, ValueError):
    """Bad inputs: rejected before any computation starts."""

    exit_code = 2


class NegativeEntry(ValidationError):
    pass


class NonPositiveEntry(ValidationError):
    """Zero (or negative) probability where strict positivity is required."""


class SumOutOfTolerance(ValidationError):
    pass


class TooFewStates(ValidationError):
    pass


class NonPositiveTau(ValidationError):
    pass


class EmptySample(ValidationError):
    pass


class DegenerateStd(ValidationError):
    pass


class Unreachable(ValidationError):
    """Requested target cannot be hit within the iteration budget."""


class Reducible(ValidationError):
    """Transition matrix is not irreducible."""


class SchemaMismatch(ValidationError):
    """Stored metadata disagrees with the supplied parameters."""


class NumericalError(ExtinctError, RuntimeError):
    exit_code = 3


class QuadratureFailure(NumericalError):
    pass


class BracketFailure(NumericalError):
    pass


class NotConverged(NumericalError):
    pass


class AllTrialsCensored(NumericalError):
    """Every Monte Carlo trial hit the step cap; no usable times."""


class CostGuardError(ExtinctError):
    exit_code = 4


class TooManyStates(CostGuardError):
    """Subset enumeration would need 2^M terms beyond the configured cap."""
