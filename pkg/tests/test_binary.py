"""Tests du calcul par risques relatifs (traitement binaire)."""

from __future__ import annotations

import pytest
from scipy.special import log_expit

from logitmed.core.errors import DimensionError, TreatmentKindError
from logitmed.domain.binary import (
    beta_xw_from_relative_risks,
    beta_xw_identity_check,
    log_rr_w,
    log_rr_wbar,
    marginal_log_cpr,
)
from logitmed.domain.model import single_mediator_view
from logitmed.infra.oracle import (
    conditional_log_cpr_numeric,
    log_cpr_numeric,
    mediator_posterior_logit_numeric,
)
from tests.fakes import random_spec

EXACT_TOL = 1e-9
IDENTITY_DRAWS = 200
CPR_DRAWS = 1000


def test_log_cpr_matches_enumeration(rng) -> None:
    for _ in range(CPR_DRAWS):
        spec = random_spec(rng, k=1, kind="binary", p=2, scale=3.0)
        result = marginal_log_cpr(spec)
        parts = (
            result.beta_x
            + result.covariate_treatment
            + result.beta_xw
            + result.log_rr_at_x0
            - result.log_rr_at_x1
        )
        assert result.total == pytest.approx(parts, abs=1e-15)
        assert abs(result.total - log_cpr_numeric(spec)) <= EXACT_TOL


def test_log_cpr_at_other_covariate_point(rng) -> None:
    spec = random_spec(rng, k=1, kind="binary", p=2)
    c = (1.5, -0.5)
    assert abs(marginal_log_cpr(spec, c).total - log_cpr_numeric(spec, c)) <= EXACT_TOL


def test_outer_mediators_play_covariate_role(rng) -> None:
    """Avec W₂, W₃ fixés: log cpr(Y, X | W₂, W₃) après sommation sur W₁."""
    spec = random_spec(rng, k=3, kind="binary", p=1)
    for outer in ({2: 0, 3: 0}, {2: 1, 3: 0}, {2: 1, 3: 1}):
        closed = marginal_log_cpr(spec, outer=outer).total
        assert abs(closed - conditional_log_cpr_numeric(spec, outer)) <= EXACT_TOL


def test_relative_risks_match_bayes_inversion(rng) -> None:
    spec = random_spec(rng, k=1, kind="binary", p=1, scale=2.0)
    for x in (0, 1):
        g1 = mediator_posterior_logit_numeric(spec, 1, 1, x)
        g0 = mediator_posterior_logit_numeric(spec, 1, 0, x)
        assert log_rr_w(spec, x) == pytest.approx(log_expit(g1) - log_expit(g0), abs=EXACT_TOL)
        assert log_rr_wbar(spec, x) == pytest.approx(
            log_expit(-g1) - log_expit(-g0), abs=EXACT_TOL
        )


def test_collapsible_log_cpr_is_beta_x(rng) -> None:
    """β_w = β_xw = 0 ⇒ log cpr = β_x exactement."""
    for _ in range(IDENTITY_DRAWS):
        spec = random_spec(rng, k=1, kind="binary", scale=2.0)
        outcome = spec.outcome.model_copy(update={"beta_w": {}, "beta_xw": {}})
        spec = spec.model_copy(update={"outcome": outcome})
        assert marginal_log_cpr(spec).total == spec.outcome.beta_x


def test_four_relative_risk_identity(rng) -> None:
    """log RR_W(1) − log RR_W(0) − log RR_W̄(1) + log RR_W̄(0) = β_xw effectif."""
    for _ in range(IDENTITY_DRAWS):
        spec = random_spec(rng, k=1, kind="binary", p=2, scale=2.0)
        effective = single_mediator_view(spec).treatment_interaction()
        assert abs(beta_xw_from_relative_risks(spec) - effective) <= EXACT_TOL
        assert beta_xw_identity_check(spec)


def test_identity_without_covariates_recovers_beta_xw(rng) -> None:
    spec = random_spec(rng, k=1, kind="binary", scale=2.0)
    assert beta_xw_from_relative_risks(spec) == pytest.approx(
        spec.outcome.beta_xw[1], abs=EXACT_TOL
    )


def test_identity_under_outer_view(rng) -> None:
    spec = random_spec(rng, k=2, kind="binary", p=1)
    for w2 in (0, 1):
        assert beta_xw_identity_check(spec, outer={2: w2})


def test_errors(rng) -> None:
    continuous = random_spec(rng, k=1, kind="continuous")
    with pytest.raises(TreatmentKindError):
        marginal_log_cpr(continuous)
    binary = random_spec(rng, k=1, kind="binary")
    with pytest.raises(DimensionError):
        log_rr_w(binary, 2)
