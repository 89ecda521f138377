"""Chaîne de médiateurs: marginalisation itérative et comptabilité de l'effet total.

Objectif du module
------------------
- Marginaliser le médiateur le plus interne de façon exacte (traitement binaire): le logit
  réduit ℓ(x, w_ext) est saturé en ses arguments binaires, ses coefficients β* sont obtenus
  par différences finies exactes de η à w_j = 1 moins l'inversion de Möbius des log RR.
- Enchaîner les réductions de l'intérieur vers l'extérieur puis appliquer le log cpr à un
  médiateur; répartir l'effet total par chemin (télescopage des log RR).
- Conditionner sur un ensemble ancestral de médiateurs et marginaliser les autres.
- Traitement continu, k = 2: linéarisation de Taylor de ℓ(x, w₂) autour de x₀, puis pente
  marginale approchée.

Les indices des médiateurs restants sont conservés après réduction (W₂ reste W₂); les termes
de covariables sont absorbés au point c du bloc et les modèles des médiateurs externes sont
repris tels quels.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence

import structlog

from logitmed.core.constants import IDENTITY_TOLERANCE, TAYLOR_MEDIATORS, TREATMENT
from logitmed.core.errors import (
    CrossCheckError,
    DimensionError,
    NonAncestralSetError,
    TaylorScopeError,
    TreatmentKindError,
)
from logitmed.domain.binary import marginal_log_cpr
from logitmed.domain.decomp import marginal_slope
from logitmed.domain.entities import OutcomeModel, SystemSpec
from logitmed.domain.model import (
    Terms,
    check_treatment_value,
    covariate_vector,
    effective_coefficient,
    evaluate_terms,
    logistic,
    mediator_terms,
    outcome_terms,
    single_mediator_view,
)
from logitmed.domain.report_types import (
    DecompositionReport,
    MarginalizationStep,
    SlopeDecomposition,
    TaylorModel,
)

log = structlog.get_logger(__name__)

_X = frozenset({TREATMENT})
_CLOSED_FORM_MEDIATORS = 2


def _require_binary(spec: SystemSpec, operation: str) -> None:
    if spec.treatment_kind != "binary":
        raise TreatmentKindError(
            f"{operation} requires a binary treatment; use taylor_reduce for a continuous one"
        )


def _at_point(spec: SystemSpec, c: Sequence[float] | None) -> SystemSpec:
    if c is None:
        return spec
    return spec.with_covariate_values(covariate_vector(spec, c))


def _mobius(values: list[float], width: int) -> list[float]:
    """Coefficients of the multilinear polynomial taking `values` on {0,1}^width."""
    coefficients = list(values)
    for bit in range(width):
        flag = 1 << bit
        for mask in range(len(coefficients)):
            if mask & flag:
                coefficients[mask] -= coefficients[mask ^ flag]
    return coefficients


def _outcome_from_coefficients(coefficients: dict[frozenset[int], float]) -> OutcomeModel:
    fields: dict[str, dict] = {"beta_w": {}, "beta_xw": {}, "beta_ww": {}, "beta_higher": {}}
    for monomial, value in coefficients.items():
        if monomial in (frozenset(), _X) or value == 0.0:
            continue
        mediators = sorted(monomial - _X)
        if len(monomial) > 2:  # noqa: PLR2004
            fields["beta_higher"][tuple(sorted(monomial))] = value
        elif TREATMENT in monomial:
            fields["beta_xw"][mediators[0]] = value
        elif len(mediators) == 2:  # noqa: PLR2004
            fields["beta_ww"][tuple(mediators)] = value
        else:
            fields["beta_w"][mediators[0]] = value
    return OutcomeModel(
        beta0=coefficients.get(frozenset(), 0.0),
        beta_x=coefficients.get(_X, 0.0),
        **fields,
    )


def reduced_logit(
    spec: SystemSpec,
    x: float,
    outer: Mapping[int, int] | None = None,
    c: Sequence[float] | None = None,
) -> float:
    """ℓ(x, w_ext): logit of P(Y=1 | X=x, outer mediators, C=c) summed over the innermost one.

    Uses ℓ = η(x, w_j=1, ...) − log RR_{W_j|Y}; valid for both treatment kinds.
    """
    x = check_treatment_value(spec, x)
    cond = single_mediator_view(spec, c, outer).conditionals(x)
    return cond.eta1 - cond.log_rr


def reduce_inner_mediator(
    spec: SystemSpec, c: Sequence[float] | None = None
) -> tuple[SystemSpec, MarginalizationStep]:
    """Marginalize the innermost mediator exactly.

    Args:
        spec: Spécification à traitement binaire, k >= 2.
        c: Point des covariables (par défaut celui du bloc); la réduction est valable en ce point.

    Returns:
        tuple[SystemSpec, MarginalizationStep]: spécification réduite (mêmes indices, mêmes
        modèles externes) et trace de l'étape.
    """
    _require_binary(spec, "reduce_inner_mediator")
    if spec.k < 2:  # noqa: PLR2004
        raise DimensionError(
            f"reduction needs at least two mediators, got {spec.k}; use marginal_log_cpr"
        )
    spec = _at_point(spec, c)
    removed = spec.innermost
    remaining = spec.indices[1:]
    variables = (TREATMENT, *remaining)
    width = len(variables)
    base = outcome_terms(spec.outcome, spec.covariate_values)

    log_rr = []
    for mask in range(1 << width):
        point = {v: (mask >> bit) & 1 for bit, v in enumerate(variables)}
        view = single_mediator_view(spec, outer={j: point[j] for j in remaining})
        log_rr.append(view.conditionals(point[TREATMENT]).log_rr)
    log_rr_coefficients = _mobius(log_rr, width)

    coefficients: dict[frozenset[int], float] = {}
    for mask in range(1 << width):
        monomial = frozenset(v for bit, v in enumerate(variables) if (mask >> bit) & 1)
        fixed = {v: 0 for v in variables if v not in monomial}
        fixed[removed] = 1
        coefficients[monomial] = (
            effective_coefficient(base, monomial, fixed) - log_rr_coefficients[mask]
        )

    starred = _outcome_from_coefficients(coefficients)
    reduced = spec.model_copy(update={"mediators": list(spec.mediators[1:]), "outcome": starred})
    log.debug("inner_mediator_reduced", removed_index=removed, remaining=list(remaining))
    step = MarginalizationStep(
        removed_index=removed, starred=starred, exact=True, at_c=list(spec.covariate_values)
    )
    return reduced, step


def _ancestral_keep(spec: SystemSpec, keep: Mapping[int, int]) -> dict[int, int]:
    unknown = sorted(set(keep) - set(spec.indices))
    if unknown:
        raise DimensionError(f"keep names undeclared mediators {unknown}")
    for j, value in keep.items():
        if value not in (0, 1):
            raise DimensionError(f"mediator {j} is binary, got {value}")
    if keep:
        lowest = min(keep)
        gaps = [j for j in spec.indices if j > lowest and j not in keep]
        if gaps:
            raise NonAncestralSetError(
                f"conditioning on {sorted(keep)} while marginalizing {gaps} is not an ancestral "
                "set of the chain; keep every mediator outer to the lowest kept one",
                details={"keep": sorted(keep), "missing": gaps},
            )
    return {j: int(v) for j, v in sorted(keep.items())}


def _telescope(spec: SystemSpec, keep: dict[int, int]) -> DecompositionReport:
    """Marginalize mediators outside `keep` innermost first and split the effect by path."""
    marginalized = [j for j in spec.indices if j not in keep]
    base = outcome_terms(spec.outcome, spec.covariate_values)
    configuration: dict[int, float] = {j: 1 for j in marginalized}
    configuration.update(keep)
    interaction_terms: Terms = {m: v for m, v in base.items() if m != _X}

    indirect: dict[int, float] = {}
    steps: list[MarginalizationStep] = []
    current = spec
    for j in marginalized:
        outer = {i: 1 for i in marginalized if i > j}
        outer.update(keep)
        view = single_mediator_view(current, outer=outer)
        indirect[j] = view.conditionals(0).log_rr - view.conditionals(1).log_rr
        if j != marginalized[-1]:
            current, step = reduce_inner_mediator(current)
            steps.append(step)

    direct = base.get(_X, 0.0)
    interaction = effective_coefficient(interaction_terms, _X, configuration)
    if marginalized:
        total = marginal_log_cpr(current, outer=keep).total
    else:
        total = effective_coefficient(base, _X, configuration)
    return DecompositionReport(
        direct=direct,
        interaction=interaction,
        indirect=indirect,
        total=total,
        conditioned_on=keep,
        steps=steps,
    )


def _closed_form_two_mediators(spec: SystemSpec, reduced: SystemSpec) -> float:
    """βₓ + β_xw₁ + β_xw₂ + log RR_{W₂|Y} differences + log RR_{W₁|Y,W₂=1} differences."""
    inner, outer = spec.indices
    base = outcome_terms(spec.outcome, spec.covariate_values)
    inner_view = single_mediator_view(spec, outer={outer: 1})
    outer_view = single_mediator_view(reduced)
    return math.fsum(
        [
            effective_coefficient(base, _X, {inner: 1, outer: 1}),
            outer_view.conditionals(0).log_rr,
            -outer_view.conditionals(1).log_rr,
            inner_view.conditionals(0).log_rr,
            -inner_view.conditionals(1).log_rr,
        ]
    )


def total_log_cpr(
    spec: SystemSpec,
    c: Sequence[float] | None = None,
    tolerance: float = IDENTITY_TOLERANCE,
) -> DecompositionReport:
    """log cpr(Y, X | C=c) with every mediator summed out, split by path.

    Iterates reduce_inner_mediator innermost first, then applies marginal_log_cpr. For k = 2
    the closed two-mediator display is evaluated too and both routes must agree.

    Raises:
        CrossCheckError: les deux calculs diffèrent de plus de `tolerance` (k = 2).
    """
    _require_binary(spec, "total_log_cpr")
    spec = _at_point(spec, c)
    report = _telescope(spec, {})
    if spec.k != _CLOSED_FORM_MEDIATORS:
        return report

    reduced = spec.model_copy(
        update={"mediators": list(spec.mediators[1:]), "outcome": report.steps[0].starred}
    )
    closed = _closed_form_two_mediators(spec, reduced)
    residual = abs(closed - report.total)
    log.debug(
        "closed_form_cross_check", closed_form=closed, iterative=report.total, residual=residual
    )
    if residual > tolerance:
        raise CrossCheckError(
            f"two-mediator closed form {closed!r} differs from iterative total {report.total!r}",
            details={"closed_form": closed, "iterative": report.total, "residual": residual},
        )
    return report.model_copy(update={"closed_form_total": closed})


def conditional_and_marginal_mix(
    spec: SystemSpec,
    keep: Mapping[int, int],
    c: Sequence[float] | None = None,
) -> DecompositionReport:
    """Effect of X on Y given fixed values of the kept mediators, the others summed out.

    Args:
        spec: Spécification à traitement binaire.
        keep: Médiateurs conditionnés et leur valeur; doit former un ensemble ancestral
            (toute la partie externe de la chaîne à partir du plus bas indice conservé).
        c: Point des covariables.

    Raises:
        NonAncestralSetError: `keep` n'est pas ancestral.
    """
    _require_binary(spec, "conditional_and_marginal_mix")
    kept = _ancestral_keep(spec, keep)
    if not kept:
        return total_log_cpr(spec, c)
    return _telescope(_at_point(spec, c), kept)


# --------------------------------------------------------------------------------------------
# Traitement continu: linéarisation de Taylor (k = 2)
# --------------------------------------------------------------------------------------------


def _require_taylor_scope(spec: SystemSpec) -> int:
    if spec.treatment_kind != "continuous":
        raise TreatmentKindError(
            "taylor_reduce requires a continuous treatment; use reduce_inner_mediator"
        )
    if spec.k != TAYLOR_MEDIATORS:
        raise TaylorScopeError(
            f"Taylor linearization is defined for exactly two mediators, got {spec.k}",
            details={"k": spec.k},
        )
    return spec.indices[1]


def taylor_reduce(
    spec: SystemSpec, x0: float, c: Sequence[float] | None = None
) -> tuple[SystemSpec, TaylorModel]:
    """Replace ℓ(x, w₂) by its first-order expansion around x₀.

    tilde0 = ℓ(x₀,0) − β(x₀,0)x₀, tilde_x = β(x₀,0), tilde_xw₂ = β(x₀,1) − β(x₀,0) and
    tilde_w₂ = ℓ(x₀,1) − ℓ(x₀,0) − x₀(β(x₀,1) − β(x₀,0)), where β(x₀, w₂) is the marginal
    slope with W₂ held at w₂. The returned spec carries W₂ only.
    """
    outer = _require_taylor_scope(spec)
    if not math.isfinite(x0):
        raise DimensionError("expansion point must be finite")
    spec = _at_point(spec, c)
    logit0 = reduced_logit(spec, x0, outer={outer: 0})
    logit1 = reduced_logit(spec, x0, outer={outer: 1})
    slope0 = marginal_slope(spec, x0, outer={outer: 0}).total
    slope1 = marginal_slope(spec, x0, outer={outer: 1}).total
    model = TaylorModel(
        x0=x0,
        tilde0=logit0 - slope0 * x0,
        tilde_x=slope0,
        tilde_w2=logit1 - logit0 - x0 * (slope1 - slope0),
        tilde_xw2=slope1 - slope0,
    )
    outcome = OutcomeModel(
        beta0=model.tilde0,
        beta_x=model.tilde_x,
        beta_w={outer: model.tilde_w2},
        beta_xw={outer: model.tilde_xw2},
    )
    reduced = spec.model_copy(update={"mediators": list(spec.mediators[1:]), "outcome": outcome})
    log.debug("taylor_reduced", x0=x0, removed_index=spec.innermost)
    return reduced, model


def approximate_marginal_slope(
    spec: SystemSpec, x0: float, x: float, c: Sequence[float] | None = None
) -> SlopeDecomposition:
    """Marginal slope at x of the Taylor-reduced single-mediator spec."""
    reduced, _ = taylor_reduce(spec, x0, c)
    return marginal_slope(reduced, x)


def exact_marginal_slope(spec: SystemSpec, x: float, c: Sequence[float] | None = None) -> float:
    """Exact β(x) for a continuous treatment and at most two mediators.

    With two mediators, P(Y=1 | x) = Σ_{w₂} σ(ℓ(x, w₂)) P(W₂=w₂ | x) is differentiated in
    closed form, ∂ℓ/∂x being the conditional marginal slope given W₂.
    """
    if spec.treatment_kind != "continuous":
        raise TreatmentKindError("exact_marginal_slope requires a continuous treatment")
    spec = _at_point(spec, c)
    x = check_treatment_value(spec, x)
    if spec.k == 0:
        return outcome_terms(spec.outcome, spec.covariate_values).get(_X, 0.0)
    if spec.k == 1:
        return marginal_slope(spec, x).total
    outer = _require_taylor_scope(spec)

    mediator = mediator_terms(spec.mediator(outer), spec.covariate_values)
    pi = logistic(evaluate_terms(mediator, {TREATMENT: x}))
    pi_slope = pi * (1.0 - pi) * effective_coefficient(mediator, _X, {})
    s0 = logistic(reduced_logit(spec, x, outer={outer: 0}))
    s1 = logistic(reduced_logit(spec, x, outer={outer: 1}))
    b0 = marginal_slope(spec, x, outer={outer: 0}).total
    b1 = marginal_slope(spec, x, outer={outer: 1}).total

    p1 = (1.0 - pi) * s0 + pi * s1
    dp1 = (1.0 - pi) * s0 * (1.0 - s0) * b0 + pi * s1 * (1.0 - s1) * b1 + pi_slope * (s1 - s0)
    return dp1 / (p1 * (1.0 - p1))


def taylor_error(spec: SystemSpec, x0: float, h: float, c: Sequence[float] | None = None) -> float:
    """Even part of the approximation error, (e(x₀+h) + e(x₀−h)) / 2; quadratic in h."""
    reduced, _ = taylor_reduce(spec, x0, c)
    spec = _at_point(spec, c)

    def _error(x: float) -> float:
        return marginal_slope(reduced, x).total - exact_marginal_slope(spec, x)

    return 0.5 * (_error(x0 + h) + _error(x0 - h))
