from __future__ import annotations

from typing import Optional


class Base(Exception):
    """Base class for all of the errors"""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self._message = message

    @property
    def message(self) -> str:
        return self._message

    def __str__(self) -> str:
        return f'{self.__class__.__name__}: {self.message}'


class Error(Base):
    """Represents an error raised by a numerical operation."""

    def __init__(self, message: str) -> None:
        super().__init__(message)


class DomainError(Error):
    """An argument lies outside the mathematical domain of the operation."""


class RangeError(Error):
    """A value lies outside the range of psi, so it cannot be inverted."""


class ConvergenceError(Error):
    """A bracketing, truncation, refinement or solver loop hit its cap."""


class PreconditionError(Error):
    """Structural preconditions (for example nonempty extremal sums) fail."""


class HypothesisError(PreconditionError):
    """The parameters violate the hypotheses `eta(n)-n >= a > 2`, `mu(n) >= b > 2`."""


class ArgumentError(Error):
    """A malformed argument. `field` names the offending parameter."""

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        super().__init__(message)
        self.field = field


class OutputError(Error):
    """A report could not be written. `path` names the target."""

    def __init__(self, message: str, path: Optional[str] = None) -> None:
        super().__init__(message)
        self.path = path
