"""Exception hierarchy shared by the numerical modules and the CLI.

The CLI maps ``InputError`` (and its subclasses) to exit code 2. Every other
``TwistorError`` raised inside a chart sweep is recorded as a failed check.
InputError is not a ValueError: pydantic validators of the numeric value
types let it through unchanged instead of wrapping it.
"""

from __future__ import annotations

from collections.abc import Sequence


class TwistorError(Exception):
    """Base class for all errors raised by hk-twistor."""


class InputError(TwistorError):
    """Malformed input: wrong dimensions, bad parameters, unreadable files."""


class UnknownModelError(InputError, KeyError):
    """Requested zoo model does not exist."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the plain message
        return str(self.args[0]) if self.args else ""


class ChartError(InputError):
    """A point or box violates the chart's domain (box, boundary, pole, string)."""

    def __init__(self, message: str, location: Sequence[float] | None = None) -> None:
        super().__init__(message)
        self.location = None if location is None else tuple(float(x) for x in location)


class DegeneracyError(TwistorError):
    """A form or operator that must be nondegenerate is (numerically) singular."""

    def __init__(self, message: str, smallest_singular_value: float) -> None:
        super().__init__(f"{message} (smallest singular value {smallest_singular_value:.3e})")
        self.smallest_singular_value = smallest_singular_value


class DirectSumError(TwistorError):
    """Two subspaces fail to span the ambient space as a direct sum."""

    def __init__(self, message: str, condition_number: float) -> None:
        super().__init__(f"{message} (condition number {condition_number:.3e})")
        self.condition_number = condition_number


class InconsistentFamilyError(TwistorError):
    """A holomorphic symplectic family violates an identity it must satisfy."""

    def __init__(self, identity: str, residual: float) -> None:
        super().__init__(f"identity '{identity}' violated (residual {residual:.3e})")
        self.identity = identity
        self.residual = residual


class InconsistentStructureError(TwistorError):
    """A pointwise structure (e.g. a rotation frame) cannot be built consistently."""

    def __init__(self, identity: str, residual: float) -> None:
        super().__init__(f"no frame satisfies '{identity}' (residual {residual:.3e})")
        self.identity = identity
        self.residual = residual


class ReconstructionError(TwistorError):
    """The structure could not be rebuilt at a chart point; carries ``location``."""

    def __init__(self, message: str, location: Sequence[float]) -> None:
        super().__init__(message)
        self.location = tuple(float(x) for x in location)
