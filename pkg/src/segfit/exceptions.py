"""Exception hierarchy shared across the package."""


class SegfitError(Exception):
    """Base class for all segfit errors."""


class DataError(SegfitError):
    """Malformed input data (CSV parsing, schema or value violations)."""


class FitError(SegfitError):
    """A maximum-likelihood fit could not be carried out at all."""


class CandidatePoolError(SegfitError):
    """Candidate pool too small for the requested number of segments."""


class EnumerationBudgetError(SegfitError):
    """Exhaustive enumeration would exceed the configured cost guard."""


class SingularInformationError(SegfitError):
    """Estimated Fisher information is not positive definite."""
