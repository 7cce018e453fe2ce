"""Platform exception hierarchy.

Every error carries a machine-readable ``code`` plus the HTTP status the
gateway maps it to, so each failure path surfaces as exactly one wire code.
"""

from __future__ import annotations

from typing import Any, Dict, Optional


class QfaasError(Exception):
    """Base class for all platform errors."""

    code = "InternalError"
    http_status = 500

    def __init__(self, message: str = "", detail: Optional[Dict[str, Any]] = None):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.detail = detail or {}

    def to_body(self) -> Dict[str, Any]:
        return {"code": self.code, "message": self.message, "detail": self.detail}


class ValidationError(QfaasError):
    """Malformed request body or parameter (wrong type, missing field)."""

    code = "ValidationError"
    http_status = 400


# --- simulator / circuits ---------------------------------------------------

class QubitLimitExceeded(QfaasError):
    code = "QubitLimitExceeded"
    http_status = 400


class IndexOutOfRange(QfaasError):
    code = "IndexOutOfRange"
    http_status = 400


class MalformedGate(QfaasError):
    code = "MalformedGate"
    http_status = 400


class CircuitSyntaxError(QfaasError):
    """Parse diagnostic for circuit source; carries line and column."""

    code = "SyntaxError"
    http_status = 400

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(message, {"line": line, "column": column})
        self.line = line
        self.column = column


class UnknownGate(CircuitSyntaxError):
    code = "UnknownGate"


class UndeclaredParameter(CircuitSyntaxError):
    code = "UndeclaredParameter"


class InputOutOfRange(QfaasError):
    code = "InputOutOfRange"
    http_status = 400


class InvalidN(QfaasError):
    code = "InvalidN"
    http_status = 400


class NotCoprime(QfaasError):
    code = "NotCoprime"
    http_status = 400


class NoPeriodFound(QfaasError):
    code = "NoPeriodFound"
    http_status = 422


# --- backends / jobs --------------------------------------------------------

class NoEligibleBackend(QfaasError):
    code = "NoEligibleBackend"
    http_status = 409


class BackendNotFound(QfaasError):
    code = "BackendNotFound"
    http_status = 404


class BackendUnavailable(QfaasError):
    code = "BackendUnavailable"
    http_status = 503


class CapacityExceeded(QfaasError):
    code = "CapacityExceeded"
    http_status = 400


class EmptyList(QfaasError):
    code = "EmptyList"
    http_status = 400


class ProviderNotFound(QfaasError):
    code = "ProviderNotFound"
    http_status = 404


class ProviderAuthError(QfaasError):
    code = "ProviderAuthError"
    http_status = 403


class JobNotFound(QfaasError):
    code = "JobNotFound"
    http_status = 404


class JobExecutionError(QfaasError):
    code = "JobExecutionError"
    http_status = 500


# --- auth / functions ---------------------------------------------------------

class InvalidToken(QfaasError):
    code = "InvalidToken"
    http_status = 401


class PermissionDenied(QfaasError):
    code = "PermissionError"
    http_status = 403


class FunctionNameError(QfaasError):
    code = "FunctionNameError"
    http_status = 400


class FunctionNotFound(QfaasError):
    code = "FunctionNotFound"
    http_status = 404


class FunctionNotReady(QfaasError):
    code = "FunctionNotReady"
    http_status = 409


class BuildError(QfaasError):
    code = "BuildError"
    http_status = 422


class LimitExceeded(QfaasError):
    code = "LimitExceeded"
    http_status = 400


class UnknownPlugin(QfaasError):
    code = "UnknownPlugin"
    http_status = 400


# --- persistence --------------------------------------------------------------

class NotFound(QfaasError):
    code = "NotFound"
    http_status = 404


class StorageError(QfaasError):
    code = "StorageError"
    http_status = 500
