from __future__ import annotations

from typing import TYPE_CHECKING, ClassVar


if TYPE_CHECKING:
    from collections.abc import Iterable

__all__ = [
    "ConfigError",
    "ConstraintError",
    "FluxUnreachable",
    "InvalidEpsilon",
    "InvalidGap",
    "InvalidParameters",
    "InvariantViolation",
    "MonotonicityViolated",
    "NoConvergence",
    "OutOfGap",
    "ParseError",
    "RheologyOutOfRange",
    "StepFailure",
    "ViscolubError",
]


class ViscolubError(Exception):
    """Base class of every error raised by viscolub.

    ``exit_code`` is what the command line returns when the error escapes a subcommand.
    """

    exit_code: ClassVar[int] = 4


class InvalidParameters(ViscolubError, ValueError):
    """A rheological or numerical parameter is outside its admissible range."""


class MonotonicityViolated(ViscolubError):
    """The shear-stress map is not globally invertible (r >= 8/9)."""


class RheologyOutOfRange(ViscolubError):
    """The generalized Reynolds problem needs r < 2/9 to keep U strictly negative."""


class NoConvergence(ViscolubError, ArithmeticError):
    """An iteration exhausted its budget."""


class InvalidGap(ViscolubError, ValueError):
    """The gap height is not strictly positive."""


class FluxUnreachable(ViscolubError):
    """No pressure gradient reproduces the prescribed flux."""


class StepFailure(ViscolubError):
    """The ODE integrator could not advance."""


class OutOfGap(ViscolubError, ValueError):
    """A height was requested outside [0, h(x)]."""


class InvalidEpsilon(ViscolubError, ValueError):
    """Rescaling factor outside (0, 1], or fields already rescaled."""


class InvariantViolation(ViscolubError, AssertionError):
    """A property that holds a priori failed numerically."""


class ConfigError(ViscolubError):
    """Configuration problems, all of them reported at once."""

    def __init__(self, problems: Iterable[str]) -> None:
        self.problems: list[str] = list(problems)
        super().__init__("; ".join(self.problems))


class ParseError(ConfigError):
    exit_code: ClassVar[int] = 2


class ConstraintError(ConfigError):
    exit_code: ClassVar[int] = 3
