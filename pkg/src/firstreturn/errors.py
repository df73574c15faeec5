"""Exception hierarchy shared by the library and the CLI.

The CLI maps :class:`DomainError` to exit status 1 and
:class:`ResourceError` to exit status 2.
"""


class FirstReturnError(Exception):
    """Base class for all errors raised by this package."""

    kind = "error"


class DomainError(FirstReturnError, ValueError):
    """An argument lies outside the domain of an operation."""

    kind = "domain"


class ValidationError(DomainError):
    """A step law or configuration failed validation."""

    kind = "validation"


class SingularityError(DomainError):
    """A series operation needs an invertible constant term."""

    kind = "singularity"


class HypothesisError(DomainError):
    """An asymptotic comparison was requested outside its hypotheses."""

    kind = "hypothesis"


class ResourceError(FirstReturnError):
    """A computation would exceed its memory or size budget."""

    kind = "resource"
