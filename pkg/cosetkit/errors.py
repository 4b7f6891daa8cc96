"""
Error Handling Module

Defines exception types and error response formatting for cosetkit.
Every failure carries a machine-readable code so the CLI can pick an exit
status and the HTTP surface can build a JSON payload from the same object.
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel


class CosetKitError(Exception):
    """
    Base exception for cosetkit errors.

    Attributes:
        code: A machine-readable error code (e.g., "DIMENSION_ERROR").
        message: A human-readable error message.
        details: Optional additional error details.
    """

    exit_code = 1

    def __init__(
        self,
        code: str,
        message: str,
        details: Any | None = None,
    ):
        super().__init__(message)
        self.code = code
        self.message = message
        self.details = details

    def to_response(self) -> ErrorResponse:
        """Convert to the API error model."""
        return ErrorResponse(code=self.code, message=self.message, details=self.details)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for JSON response."""
        return self.to_response().model_dump(mode="json", exclude_none=True)


class DimensionError(CosetKitError):
    """Raised when vector or matrix sizes do not fit together."""

    def __init__(self, message: str, details: Any | None = None):
        super().__init__("DIMENSION_ERROR", message, details)


class RankDeficientError(CosetKitError):
    """Raised when a generator matrix is not of full row rank."""

    def __init__(self, rank: int, rows: int):
        super().__init__(
            "RANK_DEFICIENT",
            f"Matrix has rank {rank} but {rows} rows",
            {"rank": rank, "rows": rows},
        )


class ParameterError(CosetKitError):
    """Raised when a parameter is out of range or inconsistent with others."""

    def __init__(self, message: str, details: Any | None = None):
        super().__init__("PARAMETER_ERROR", message, details)


class EnumerationLimitError(CosetKitError):
    """Raised when an exhaustive search would exceed the configured size cap."""

    def __init__(self, what: str, bits: int, limit: int):
        super().__init__(
            "ENUMERATION_LIMIT",
            f"Enumerating {what} needs 2^{bits} entries (limit 2^{limit})",
            {"what": what, "bits": bits, "limit": limit},
        )


class FormatError(CosetKitError):
    """Raised when a text document (matrix, alist, construction) is malformed."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(
            "FORMAT_ERROR",
            f"line {line}: {message}" if line is not None else message,
            {"line": line} if line is not None else None,
        )


class ConfigError(CosetKitError):
    """Raised when an experiment configuration fails validation."""

    def __init__(self, message: str, details: Any | None = None):
        super().__init__("CONFIG_ERROR", message, details)


class NumericalError(CosetKitError):
    """Raised when a computation produces non-finite values or fails to converge."""

    exit_code = 3

    def __init__(self, message: str, details: Any | None = None):
        super().__init__("NUMERICAL_ERROR", message, details)


class CommandNotFoundError(CosetKitError):
    """Raised when a requested command doesn't exist."""

    def __init__(self, command_name: str):
        super().__init__(
            "COMMAND_NOT_FOUND",
            f"Command '{command_name}' not found",
            {"command": command_name},
        )


# Response models for API

class ErrorResponse(BaseModel):
    """Standard error response format."""
    code: str
    message: str
    details: Any | None = None
