"""Exception hierarchy.

Every fatal error carries the process exit code the CLI reports for it, so the
exit status is a function of the first fatal error category only.
"""

from __future__ import annotations


class AuditError(Exception):
    exit_code = 1


class ConfigError(AuditError):
    """Invalid configuration or missing input (exit 2)."""

    exit_code = 2


class HarvestError(AuditError):
    """Repository harvest could not complete (exit 3)."""

    exit_code = 3

    def __init__(self, message: str, target: str | None = None, offset: int | None = None):
        self.target = target
        self.offset = offset
        where = []
        if target is not None:
            where.append(f"target={target}")
        if offset is not None:
            where.append(f"offset={offset}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class HarvestParseError(HarvestError):
    """A result document is not well-formed."""


class IntegrityError(AuditError):
    """Referential inconsistency between pipeline artifacts (exit 4)."""

    exit_code = 4


class InputIOError(AuditError):
    """Unreadable or unwritable file (exit 5)."""

    exit_code = 5


class FormatError(InputIOError):
    """An export file does not follow a supported layout."""

    def __init__(self, message: str, line_no: int | None = None, line: str | None = None):
        self.line_no = line_no
        self.line = line
        if line_no is not None:
            message = f"{message} at line {line_no}: {line!r}"
        super().__init__(message)


class QuerySyntaxError(ConfigError):
    """Address expression does not parse."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class QueryEvaluationError(AuditError):
    pass


class PolicyError(ConfigError):
    pass


class PolicyNotFound(PolicyError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)
