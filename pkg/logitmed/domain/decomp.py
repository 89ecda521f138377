"""Calcul de la pente marginale pour un traitement continu.

Objectif du module
------------------
- Δ_y(x), Δ_w(x) et γ(x) = ∂g₀/∂x sur la vue « un seul médiateur ».
- Décomposition additive de β(x), dérivée du logit de P(Y=1 | X=x, C=c) après sommation sur
  le médiateur: effet direct, interaction, effet indirect, terme traitement × covariables.
- Enveloppe par arithmétique d'intervalles lorsque seuls des intervalles sont connus pour
  β_x, β_xw et γ_x.

Sous une vue dont les médiateurs externes sont fixés, ceux-ci jouent le rôle de covariables:
leurs termes en x rejoignent `covariate_treatment` (réponse) et `indirect` (médiateur).
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence

from logitmed.core.errors import TreatmentKindError
from logitmed.domain.entities import SystemSpec
from logitmed.domain.intervals import SIGNED_UNIT, UNIT, Interval
from logitmed.domain.model import check_treatment_value, logistic, single_mediator_view
from logitmed.domain.report_types import EffectBounds, SlopeDecomposition

Bound = Interval | float | tuple[float, float]


def delta_y(
    spec: SystemSpec,
    x: float,
    c: Sequence[float] | None = None,
    outer: Mapping[int, int] | None = None,
) -> float:
    """P(Y=1 | W=1, X=x, C=c) − P(Y=1 | W=0, X=x, C=c)."""
    x = check_treatment_value(spec, x)
    return single_mediator_view(spec, c, outer).conditionals(x).delta_y


def delta_w(
    spec: SystemSpec,
    x: float,
    c: Sequence[float] | None = None,
    outer: Mapping[int, int] | None = None,
) -> float:
    """P(W=1 | Y=1, X=x, C=c) − P(W=1 | Y=0, X=x, C=c), through g_y."""
    x = check_treatment_value(spec, x)
    return single_mediator_view(spec, c, outer).conditionals(x).delta_w


def gamma_of_x(
    spec: SystemSpec,
    x: float,
    c: Sequence[float] | None = None,
    outer: Mapping[int, int] | None = None,
) -> float:
    """Derivative of g₀ in x: γ_x − β_x·Δ_y(x) − β_xw·P(Y=1 | W=1, X=x).

    Covariate and fixed-outer-mediator terms enter through the effective slopes.
    """
    x = check_treatment_value(spec, x)
    view = single_mediator_view(spec, c, outer)
    cond = view.conditionals(x)
    return (
        view.mediator_slope()
        - view.treatment_slope() * cond.delta_y
        - view.treatment_interaction() * logistic(cond.eta1)
    )


def marginal_slope(
    spec: SystemSpec,
    x: float,
    c: Sequence[float] | None = None,
    outer: Mapping[int, int] | None = None,
) -> SlopeDecomposition:
    """Decompose β(x), the slope of the marginal logit of Y in x.

    Args:
        spec: Spécification à traitement continu.
        x: Point d'évaluation.
        c: Point des covariables (par défaut celui du bloc).
        outer: Valeurs fixées des médiateurs externes (obligatoire si k > 1).

    Returns:
        SlopeDecomposition: composantes additives et total.

    Raises:
        TreatmentKindError: traitement binaire.
        ViewError: plusieurs médiateurs non fixés.
    """
    if spec.treatment_kind != "continuous":
        raise TreatmentKindError(
            "marginal_slope requires a continuous treatment; use marginal_log_cpr"
        )
    x = check_treatment_value(spec, x)
    view = single_mediator_view(spec, c, outer)
    cond = view.conditionals(x)
    dy, dw = cond.delta_y, cond.delta_w
    attenuation = 1.0 - dy * dw
    weighted_mean = cond.p_w_given_y1 - dw * cond.p_y_given_w1

    direct = spec.outcome.beta_x * attenuation
    covariate_treatment = view.treatment_context() * attenuation
    interaction = view.treatment_interaction() * weighted_mean
    indirect = view.mediator_slope() * dw
    return SlopeDecomposition(
        direct=direct,
        interaction=interaction,
        indirect=indirect,
        covariate_treatment=covariate_treatment,
        total=direct + interaction + indirect + covariate_treatment,
        at_x=x,
        at_c=list(view.c),
        delta_y=dy,
        delta_w=dw,
    )


def slope_bounds(beta_x: Bound, beta_xw: Bound, gamma_x: Bound) -> EffectBounds:
    """Envelope of β(x) over every x given points or intervals for the three coefficients.

    The brackets are bounded independently (1 − Δ_yΔ_w and the weighted mean in [0, 1],
    Δ_w in [−1, 1]), which makes the envelope conservative.
    """
    named = {"beta_x": beta_x, "beta_xw": beta_xw, "gamma_x": gamma_x}
    intervals = {name: Interval.coerce(value) for name, value in named.items()}
    envelope = (
        intervals["beta_x"] * Interval(*UNIT)
        + intervals["beta_xw"] * Interval(*UNIT)
        + intervals["gamma_x"] * Interval(*SIGNED_UNIT)
    )
    assumptions = {
        name: "known" if interval.is_point else f"interval [{interval.lo!r}, {interval.hi!r}]"
        for name, interval in intervals.items()
    }
    return EffectBounds(lower=envelope.lo, upper=envelope.hi, assumptions=assumptions)
