"""Gestion standardisée des erreurs avec enveloppes et codes de sortie.

Ce module fournit une hiérarchie d'exceptions commune au domaine, à l'oracle et à la CLI, des
codes d'erreur cohérents et une enveloppe sérialisable pour la sortie machine.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

import structlog

from logitmed.core.constants import (
    EXIT_DIMENSION_ERROR,
    EXIT_EMPTY_SWEEP,
    EXIT_NON_ANCESTRAL,
    EXIT_PARSE_ERROR,
    EXIT_TAYLOR_SCOPE,
    EXIT_TOLERANCE_BREACH,
)

log = structlog.get_logger(__name__)


class ErrorCodes:
    """Standard error codes."""

    SPEC_PARSE_ERROR = "SPEC_PARSE_ERROR"
    USAGE_ERROR = "USAGE_ERROR"
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
    WRONG_TREATMENT_KIND = "WRONG_TREATMENT_KIND"
    UNREDUCED_MEDIATORS = "UNREDUCED_MEDIATORS"
    ENUMERATION_LIMIT = "ENUMERATION_LIMIT"
    EMPTY_INTERVAL = "EMPTY_INTERVAL"
    TOLERANCE_BREACH = "TOLERANCE_BREACH"
    CROSS_CHECK_FAILED = "CROSS_CHECK_FAILED"
    NON_ANCESTRAL_SET = "NON_ANCESTRAL_SET"
    TAYLOR_SCOPE = "TAYLOR_SCOPE"
    EMPTY_SWEEP = "EMPTY_SWEEP"


@dataclass
class ErrorEnvelope:
    """Standard error envelope for machine-readable output."""

    code: str
    message: str
    details: dict[str, Any] | None = None


class LogitMedError(Exception):
    """Base error with a standard envelope and a CLI exit code."""

    code: str = ErrorCodes.SPEC_PARSE_ERROR
    exit_code: int = EXIT_PARSE_ERROR

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        """Initialize the error with its message and optional details."""
        super().__init__(message)
        self.message = message
        self.details = details


class SpecParseError(LogitMedError):
    """Spec file unreadable, invalid JSON, or rejected by the schema."""


class UsageError(LogitMedError):
    """Command-line flags inconsistent with the spec file."""

    code = ErrorCodes.USAGE_ERROR


class IntervalError(LogitMedError, ValueError):
    """Empty interval (lower bound above upper bound)."""

    code = ErrorCodes.EMPTY_INTERVAL


class DimensionError(LogitMedError, ValueError):
    """Mediator or covariate vector does not match the spec."""

    code = ErrorCodes.DIMENSION_MISMATCH
    exit_code = EXIT_DIMENSION_ERROR


class TreatmentKindError(LogitMedError, ValueError):
    """Operation called on a spec with the wrong treatment kind."""

    code = ErrorCodes.WRONG_TREATMENT_KIND
    exit_code = EXIT_DIMENSION_ERROR


class ViewError(LogitMedError, ValueError):
    """More than one unreduced mediator in a single-mediator operation."""

    code = ErrorCodes.UNREDUCED_MEDIATORS
    exit_code = EXIT_DIMENSION_ERROR


class EnumerationLimitError(LogitMedError, ValueError):
    """Too many mediators for exact enumeration."""

    code = ErrorCodes.ENUMERATION_LIMIT
    exit_code = EXIT_DIMENSION_ERROR


class ToleranceBreachError(LogitMedError):
    """Closed form and oracle disagree beyond tolerance."""

    code = ErrorCodes.TOLERANCE_BREACH
    exit_code = EXIT_TOLERANCE_BREACH


class CrossCheckError(ToleranceBreachError):
    """Two closed-form routes disagree (k=2 display vs. iterative reduction)."""

    code = ErrorCodes.CROSS_CHECK_FAILED


class NonAncestralSetError(LogitMedError, ValueError):
    """Conditioning set is not ancestral in the mediator chain."""

    code = ErrorCodes.NON_ANCESTRAL_SET
    exit_code = EXIT_NON_ANCESTRAL


class TaylorScopeError(LogitMedError, ValueError):
    """Taylor linearization requested outside k=2 with continuous treatment."""

    code = ErrorCodes.TAYLOR_SCOPE
    exit_code = EXIT_TAYLOR_SCOPE


class EmptySweepError(LogitMedError, ValueError):
    """Sensitivity request with nothing to sweep."""

    code = ErrorCodes.EMPTY_SWEEP
    exit_code = EXIT_EMPTY_SWEEP


def create_error_envelope(exc: LogitMedError) -> dict[str, Any]:
    """Create a standardized error payload."""
    envelope = ErrorEnvelope(code=exc.code, message=exc.message, details=exc.details)
    payload = asdict(envelope)
    if not envelope.details:
        payload.pop("details")
    return payload


def handle_error(exc: LogitMedError) -> int:
    """Log the error with its envelope fields and return the exit code."""
    log.error(
        "logitmed_error",
        code=exc.code,
        error_message=exc.message,
        exit_code=exc.exit_code,
        details=exc.details,
    )
    return exc.exit_code
