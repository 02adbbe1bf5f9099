"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ForgeError(Exception):
    """Base class for every error raised deliberately by schemaforge."""


class ContractViolation(ForgeError, ValueError):
    """A precondition of an operation was not met by the caller."""


class SchemaError(ForgeError, ValueError):
    """A schema (or schema file) violates its invariants."""


class SqlError(ForgeError, ValueError):
    """Base class for SQL parsing and binding failures.

    ``reason`` is a short machine-readable tag used in rejects files.
    """

    reason = "sql error"

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class SqlSyntaxError(SqlError):
    reason = "syntax error"


class UnsupportedSqlError(SqlError):
    reason = "unsupported construct"


class UnknownTableError(SqlError):
    reason = "unknown table"


class UnknownColumnError(SqlError):
    reason = "unknown column"


class AmbiguousColumnError(SqlError):
    reason = "ambiguous column"


class InvalidJoinError(SqlError):
    reason = "invalid join"


class TypeMismatchError(SqlError):
    reason = "type mismatch"


class NestingError(SqlError):
    reason = "nesting too deep"


class UnsatisfiableConfigError(ForgeError, ValueError):
    """The grammar configuration cannot be realised on the given schema."""


class ConfigError(ForgeError, ValueError):
    """A pipeline configuration or input location is unusable."""


class StageError(ForgeError):
    """A pipeline stage hit a contract violation on a specific record."""

    def __init__(self, stage: str, record_id: str | None, cause: Exception):
        self.stage = stage
        self.record_id = record_id
        self.cause = cause
        where = f" on record {record_id}" if record_id else ""
        super().__init__(f"stage {stage!r} failed{where}: {cause}")
