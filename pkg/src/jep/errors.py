"""Exception hierarchy shared by the library and the CLI."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class UndefinedIndexError(DomainError, KeyError):
    """A jump family has no distribution for the requested index set."""

    def __str__(self):
        return ValueError.__str__(self)


class NumericalError(ArithmeticError):
    """A numerical routine failed to converge or produced an invalid result."""


class TruncationError(NumericalError):
    """Probability mass escaping a truncated state space exceeds tolerance."""
