"""Exception types and validation reporting shared across the package."""
from __future__ import annotations

from dataclasses import dataclass, field


class SdfProbeError(Exception):
    """Base class for all errors raised by this package."""


class InconsistentGraphError(SdfProbeError):
    """The balance equations of an SDF graph admit no positive integer solution."""


class UnknownActorError(SdfProbeError):
    """An actor id was referenced that the graph does not define."""


class FiringNotEnabledError(SdfProbeError):
    """fire() was asked to fire an actor whose guard condition does not hold."""


class DeadlockError(SdfProbeError):
    """Every tile is blocked on a read or write that can never be satisfied."""

    def __init__(self, message: str, blocked: dict[str, tuple[str, str]] | None = None):
        super().__init__(message)
        # tile id -> (kind, channel id) for the statement each tile is stuck at
        self.blocked = blocked or {}


class CycleBudgetExceededError(SdfProbeError):
    """The simulation passed its hard cycle budget without reaching the stop condition."""


class ControllerBusyError(SdfProbeError):
    """configure() was called while a measurement was in progress."""


class NonPositiveCyclesError(SdfProbeError):
    """A cycle count that must be positive was zero or negative."""


class NonPositiveShuntError(SdfProbeError):
    """A shunt resistance or rail voltage that must be positive was not."""


class InvalidWindowError(SdfProbeError):
    """A measurement window was empty, inverted, or outside the signal domain."""


class EmptyInputError(SdfProbeError):
    """An aggregate was requested over an empty collection of measurements."""


class ParseError(SdfProbeError):
    """A DUT description file could not be parsed; carries file location context."""


class SchemaError(SdfProbeError):
    """A CSV file did not match the expected column schema."""


class ValidationFailure(SdfProbeError):
    """Raised when a caller asks for strict validation and the report has violations."""

    def __init__(self, report: "ValidationReport"):
        super().__init__("; ".join(report.violations) or "validation failed")
        self.report = report


@dataclass
class ValidationReport:
    """Accumulates human-readable violation strings from the validators."""

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str) -> None:
        self.violations.append(message)

    def extend(self, other: "ValidationReport") -> None:
        self.violations.extend(other.violations)

    def raise_if_failed(self) -> None:
        if self.violations:
            raise ValidationFailure(self)
