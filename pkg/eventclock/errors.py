"""
Error types shared by the library, the CLI and the HTTP surface.
"""


class EventClockError(Exception):
    """Base class for all library errors."""

    kind = "error"
    exit_code = 1


class ContractError(EventClockError, ValueError):
    """A precondition or type invariant was violated."""

    kind = "validation"
    exit_code = 2


class ConfigError(ContractError):
    """A scenario file failed validation; `field` is the dotted path."""

    def __init__(self, field: str | None, message: str):
        self.field = field
        self.message = message
        prefix = f"{field}: " if field else ""
        super().__init__(f"{prefix}{message}")


class EventNeverHappens(EventClockError):
    """p(Π) fell at or below the conditioning floor."""

    kind = "event_never_happens"
    exit_code = 3


class UnreadableConfig(EventClockError):
    kind = "unreadable"
    exit_code = 4


class NumericalError(EventClockError, ArithmeticError):
    kind = "numerical"
    exit_code = 5


class ResourceError(EventClockError, MemoryError):
    kind = "resource"
    exit_code = 6


class OracleMismatch(EventClockError):
    kind = "oracle_mismatch"
    exit_code = 7


class PropertyViolation(EventClockError):
    kind = "property_violation"
    exit_code = 8
