"""Exception taxonomy shared across the package.

Two broad families matter to the CLI exit-code mapping: configuration errors
(bad scenario/plan files, bad overrides) and runtime/validation errors
(contract violations while computing).  I/O problems surface as ordinary
OSError.
"""

from __future__ import annotations


class SpurlineError(Exception):
    """Base class for everything this package raises on purpose."""


class ConfigError(SpurlineError):
    """A scenario/plan file or CLI override is malformed or inconsistent."""


class ConfigSyntaxError(ConfigError):
    """Unparseable config text; carries line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownComponentKind(ConfigError):
    pass


class InvariantViolation(ConfigError):
    """A parsed value violates a field invariant; names the field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DanglingLoReference(ConfigError):
    pass
