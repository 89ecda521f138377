"""Tests de la décomposition de la pente marginale (traitement continu).

Référence: dérivée numérique du logit marginal calculé par l'oracle. Les propriétés
(collapsibilité, atténuation, absence d'inversion, bornes des crochets) sont vérifiées sur des
tirages aléatoires à graine fixe.
"""

from __future__ import annotations

import math

import pytest

from logitmed.core.errors import TreatmentKindError, ViewError
from logitmed.domain.decomp import delta_w, delta_y, gamma_of_x, marginal_slope, slope_bounds
from logitmed.domain.entities import MediatorModel, OutcomeModel, SystemSpec
from logitmed.domain.intervals import Interval
from logitmed.domain.model import g_y, logistic, outcome_logit, single_mediator_view
from logitmed.infra.oracle import marginal_slope_numeric
from tests.fakes import random_spec

NUMERIC_TOL = 1e-6
PROPERTY_DRAWS = 200
BOUNDS_DRAWS = 1000
SLOPE_DRAWS = 1000
COVARIATE_DRAWS = 500
COEFFICIENT_SCALE = 3.0
GRID_XS = (-2.0, -1.0, 0.0, 1.0, 2.0)
FD_STEP = 1e-5
XS = (-1.5, -0.2, 0.0, 0.9, 2.0)


def _single(rng, p: int = 0, scale: float = 1.5, **updates) -> SystemSpec:
    spec = random_spec(rng, k=1, kind="continuous", p=p, scale=scale)
    outcome = spec.outcome.model_copy(
        update={key: value for key, value in updates.items() if key.startswith("beta")}
    )
    mediator = spec.mediators[0].model_copy(
        update={key: value for key, value in updates.items() if key.startswith("gamma")}
    )
    return spec.model_copy(update={"outcome": outcome, "mediators": [mediator]})


def test_components_add_up_and_match_oracle(rng) -> None:
    """Total additif = dérivée numérique du logit marginal."""
    for _ in range(SLOPE_DRAWS):
        spec = _single(rng, scale=COEFFICIENT_SCALE)
        for x in GRID_XS:
            result = marginal_slope(spec, x)
            parts = result.direct + result.interaction + result.indirect
            assert result.total == pytest.approx(parts + result.covariate_treatment, abs=1e-15)
            assert abs(result.total - marginal_slope_numeric(spec, x)) <= NUMERIC_TOL


def test_covariate_interactions_match_oracle(rng) -> None:
    """Forme avec covariables (termes x × c, w × c, c × c) contre l'oracle."""
    for _ in range(COVARIATE_DRAWS):
        spec = _single(rng, p=2, scale=COEFFICIENT_SCALE)
        for x in GRID_XS:
            for c in (None, (0.5, -1.0)):
                closed = marginal_slope(spec, x, c).total
                assert abs(closed - marginal_slope_numeric(spec, x, c)) <= NUMERIC_TOL


def test_collapsible_total_is_beta_x(rng) -> None:
    """β_w = β_xw = 0 ⇒ β(x) = β_x exactement."""
    for _ in range(PROPERTY_DRAWS):
        spec = _single(rng, beta_w={}, beta_xw={})
        for x in XS:
            result = marginal_slope(spec, x)
            assert result.total == spec.outcome.beta_x
            assert result.delta_w == 0.0


def test_collapsible_fixture(collapsible) -> None:
    assert marginal_slope(collapsible, 0.0).total == 0.5


def test_attenuation_without_mediator_slope(rng) -> None:
    """γ_x = β_xw = 0 ⇒ |β(x)| ≤ |β_x|."""
    for _ in range(PROPERTY_DRAWS):
        spec = _single(rng, scale=3.0, beta_xw={}, gamma_x=0.0)
        for x in XS:
            assert abs(marginal_slope(spec, x).total) <= abs(spec.outcome.beta_x) + 1e-15


def test_no_reversal_with_positive_coefficients(rng) -> None:
    """γ_x = 0, β_x > 0, β_xw > 0 ⇒ β(x) > 0."""
    for _ in range(PROPERTY_DRAWS):
        spec = _single(
            rng,
            beta_x=float(rng.uniform(0.01, 2.0)),
            beta_xw={1: float(rng.uniform(0.01, 2.0))},
            gamma_x=0.0,
        )
        for x in XS:
            assert marginal_slope(spec, x).total > 0.0


def test_bracket_terms_are_bounded(rng) -> None:
    """Δ_w ∈ [−1, 1]; 1 − Δ_yΔ_w et la moyenne pondérée dans [0, 1]."""
    for _ in range(PROPERTY_DRAWS):
        spec = _single(rng, scale=4.0)
        view = single_mediator_view(spec)
        for x in XS:
            cond = view.conditionals(x)
            assert -1.0 <= cond.delta_w <= 1.0
            assert 0.0 <= 1.0 - cond.delta_y * cond.delta_w <= 1.0
            assert 0.0 <= cond.p_w_given_y1 - cond.delta_w * cond.p_y_given_w1 <= 1.0


def test_no_interaction_case(rng) -> None:
    """β_xw = 0: β(x) = β_x(1 − Δ_yΔ_w) + γ_xΔ_w."""
    spec = _single(rng, beta_xw={})
    for x in XS:
        dy, dw = delta_y(spec, x), delta_w(spec, x)
        expected = spec.outcome.beta_x * (1.0 - dy * dw) + spec.mediators[0].gamma_x * dw
        assert marginal_slope(spec, x).total == pytest.approx(expected, abs=1e-14)


def test_no_interaction_signs_agree(rng) -> None:
    """β_xw = 0: Δ_w et Δ_y ont le signe de β_w."""
    for _ in range(SLOPE_DRAWS):
        spec = _single(rng, scale=COEFFICIENT_SCALE, beta_xw={})
        for x in GRID_XS:
            dy, dw = delta_y(spec, x), delta_w(spec, x)
            assert dy * dw > 0.0
            assert (dy > 0.0) == (spec.outcome.beta_w[1] > 0.0)


def test_delta_y_worked_example() -> None:
    """β₀ = β_x = 0, β_w = log 9: Δ_y = 0.9 − 0.5."""
    spec = SystemSpec(
        treatment_kind="continuous",
        mediators=[MediatorModel(index=1, gamma0=0.0, gamma_x=0.0)],
        outcome=OutcomeModel(beta0=0.0, beta_x=0.0, beta_w={1: math.log(9.0)}),
    )
    assert delta_y(spec, 0.0) == pytest.approx(0.4, abs=1e-15)


def _folded(spec: SystemSpec) -> SystemSpec:
    """Système sans covariables, termes en c absorbés au point du bloc."""
    c = spec.covariates.values
    outcome, mediator = spec.outcome, spec.mediators[0]
    beta0 = math.fsum(
        [outcome.beta0]
        + [value * c[a] for a, value in outcome.beta_c.items()]
        + [value * c[a] * c[b] for (a, b), value in outcome.beta_cc.items()]
    )
    beta_w = math.fsum(
        [outcome.beta_w[1]] + [value * c[a] for (_, a), value in outcome.beta_wc.items()]
    )
    gamma0 = math.fsum(
        [mediator.gamma0]
        + [value * c[a] for a, value in mediator.gamma_c.items()]
        + [value * c[a] * c[b] for (a, b), value in mediator.gamma_cc.items()]
    )
    return SystemSpec(
        treatment_kind="continuous",
        mediators=[MediatorModel(index=1, gamma0=gamma0, gamma_x=mediator.gamma_x)],
        outcome=OutcomeModel(
            beta0=beta0,
            beta_x=outcome.beta_x,
            beta_w={1: beta_w},
            beta_xw=dict(outcome.beta_xw),
        ),
    )


def test_mediator_covariate_terms_only_shift_beta_w(rng) -> None:
    """Sans termes x × c, les β_wc n'agissent qu'à travers β_w + Σβ_wc c."""
    for _ in range(PROPERTY_DRAWS):
        spec = random_spec(rng, k=1, kind="continuous", p=2, scale=COEFFICIENT_SCALE)
        spec = spec.model_copy(
            update={
                "outcome": spec.outcome.model_copy(update={"beta_xc": {}}),
                "mediators": [spec.mediators[0].model_copy(update={"gamma_xc": {}})],
            }
        )
        folded = _folded(spec)
        for x in GRID_XS:
            result = marginal_slope(spec, x)
            assert result.covariate_treatment == 0.0
            assert result.total == pytest.approx(marginal_slope(folded, x).total, abs=1e-12)
            assert abs(result.total - marginal_slope_numeric(spec, x)) <= NUMERIC_TOL



def test_delta_y_reads_outcome_probabilities(non_collapsible) -> None:
    x = 0.4
    expected = logistic(outcome_logit(non_collapsible, x, [1])) - logistic(
        outcome_logit(non_collapsible, x, [0])
    )
    assert delta_y(non_collapsible, x) == pytest.approx(expected, abs=1e-15)


def test_gamma_of_x_is_derivative_of_g0(rng) -> None:
    """γ(x) = ∂g₀/∂x (différence centrée)."""
    for _ in range(20):
        spec = _single(rng, p=2)
        for x in XS:
            numeric = (g_y(spec, 0, x + FD_STEP) - g_y(spec, 0, x - FD_STEP)) / (2 * FD_STEP)
            assert abs(gamma_of_x(spec, x) - numeric) <= NUMERIC_TOL


def test_outer_view_slope_matches_conditional_oracle(rng) -> None:
    """Vue conditionnelle à W₂: pente du logit de P(Y=1 | x, W₂=w₂)."""
    from logitmed.infra.oracle import conditional_logit_numeric

    spec = random_spec(rng, k=2, kind="continuous", p=1)
    for w2 in (0, 1):
        for x in XS:
            closed = marginal_slope(spec, x, outer={2: w2}).total
            upper = conditional_logit_numeric(spec, x + FD_STEP, fixed={2: w2})
            lower = conditional_logit_numeric(spec, x - FD_STEP, fixed={2: w2})
            assert abs(closed - (upper - lower) / (2 * FD_STEP)) <= NUMERIC_TOL


def test_wrong_treatment_kind(rng) -> None:
    spec = random_spec(rng, k=1, kind="binary")
    with pytest.raises(TreatmentKindError):
        marginal_slope(spec, 1)


def test_two_unreduced_mediators(rng) -> None:
    spec = random_spec(rng, k=2, kind="continuous")
    with pytest.raises(ViewError):
        marginal_slope(spec, 0.0)


class TestSlopeBounds:
    """Enveloppe de β(x) par arithmétique d'intervalles."""

    def test_point_coefficients(self) -> None:
        bounds = slope_bounds(1.0, 0.5, -2.0)
        assert (bounds.lower, bounds.upper) == (-2.0, 3.5)
        assert bounds.assumptions == {"beta_x": "known", "beta_xw": "known", "gamma_x": "known"}

    def test_interval_assumptions_are_echoed(self) -> None:
        bounds = slope_bounds(Interval(-1.0, 2.0), (0.0, 1.0), 0.5)
        assert bounds.lower == -1.5
        assert bounds.upper == 3.5
        assert bounds.assumptions["beta_x"] == "interval [-1.0, 2.0]"

    def test_true_slope_always_inside(self, rng) -> None:
        """Le β(x) de l'oracle tombe dans l'enveloppe sur chaque tirage."""
        for _ in range(BOUNDS_DRAWS):
            spec = _single(rng, scale=3.0)
            outcome, mediator = spec.outcome, spec.mediators[0]
            widen = float(rng.uniform(0.0, 0.5))
            bounds = slope_bounds(
                (outcome.beta_x - widen, outcome.beta_x + widen),
                outcome.beta_xw[1],
                (mediator.gamma_x - widen, mediator.gamma_x),
            )
            x = float(rng.uniform(-3.0, 3.0))
            assert bounds.contains(marginal_slope_numeric(spec, x), tolerance=NUMERIC_TOL)
