"""Tests de la hiérarchie d'erreurs et des codes de sortie."""

from __future__ import annotations

import pytest

from logitmed.core.constants import (
    EXIT_DIMENSION_ERROR,
    EXIT_EMPTY_SWEEP,
    EXIT_NON_ANCESTRAL,
    EXIT_PARSE_ERROR,
    EXIT_TAYLOR_SCOPE,
    EXIT_TOLERANCE_BREACH,
)
from logitmed.core.errors import (
    CrossCheckError,
    DimensionError,
    EmptySweepError,
    EnumerationLimitError,
    ErrorCodes,
    IntervalError,
    LogitMedError,
    NonAncestralSetError,
    SpecParseError,
    TaylorScopeError,
    ToleranceBreachError,
    TreatmentKindError,
    UsageError,
    ViewError,
    create_error_envelope,
    handle_error,
)


@pytest.mark.parametrize(
    ("error_type", "exit_code"),
    [
        (SpecParseError, EXIT_PARSE_ERROR),
        (UsageError, EXIT_PARSE_ERROR),
        (IntervalError, EXIT_PARSE_ERROR),
        (DimensionError, EXIT_DIMENSION_ERROR),
        (TreatmentKindError, EXIT_DIMENSION_ERROR),
        (ViewError, EXIT_DIMENSION_ERROR),
        (EnumerationLimitError, EXIT_DIMENSION_ERROR),
        (ToleranceBreachError, EXIT_TOLERANCE_BREACH),
        (CrossCheckError, EXIT_TOLERANCE_BREACH),
        (NonAncestralSetError, EXIT_NON_ANCESTRAL),
        (TaylorScopeError, EXIT_TAYLOR_SCOPE),
        (EmptySweepError, EXIT_EMPTY_SWEEP),
    ],
)
def test_exit_codes(error_type, exit_code) -> None:
    assert handle_error(error_type("boom")) == exit_code


def test_domain_errors_are_value_errors() -> None:
    """Les erreurs d'entrée du domaine restent attrapables comme ValueError."""
    assert issubclass(DimensionError, ValueError)
    assert issubclass(NonAncestralSetError, ValueError)
    assert not issubclass(SpecParseError, ValueError)
    assert issubclass(CrossCheckError, LogitMedError)


def test_envelope_without_details() -> None:
    payload = create_error_envelope(TaylorScopeError("k=3"))
    assert payload == {"code": ErrorCodes.TAYLOR_SCOPE, "message": "k=3"}


def test_envelope_with_details() -> None:
    exc = CrossCheckError("mismatch", details={"residual": 0.5})
    payload = create_error_envelope(exc)
    assert payload["code"] == ErrorCodes.CROSS_CHECK_FAILED
    assert payload["details"] == {"residual": 0.5}
