"""Évaluation des modèles conditionnels: logits, probabilités et fonctions g_y.

Objectif du module
------------------
- Évaluer les prédicteurs linéaires de la réponse et des médiateurs, termes du second ordre
  (et d'ordre supérieur issus des réductions) compris.
- Exposer chaque prédicteur comme un polynôme en les variables binaires (0 = traitement,
  j = médiateur j) dont les coefficients dépendent du point c: les différences finies en ces
  variables s'obtiennent alors exactement à partir des coefficients.
- Fournir les vues « un seul médiateur » (le plus interne, les autres fixés) sur lesquelles
  reposent g_y, Δ_y, Δ_w et les risques relatifs.
"""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import expit, log_expit, logit

from logitmed.core.constants import CONSISTENCY_TOLERANCE, TREATMENT
from logitmed.core.errors import DimensionError, ViewError
from logitmed.domain.entities import ConfounderModel, MediatorModel, OutcomeModel, SystemSpec
from logitmed.domain.report_types import ConsistencyReport

Monomial = frozenset[int]
Terms = dict[Monomial, float]

_CONSTANT: Monomial = frozenset()
_X: Monomial = frozenset({TREATMENT})


def logistic(eta: float) -> float:
    """Numerically stable logistic transform."""
    return float(expit(eta))


def log_logistic(eta: float) -> float:
    """Return log(logistic(eta)) without underflow."""
    return float(log_expit(eta))


def log1pexp(eta: float) -> float:
    """Return log(1 + exp(eta)) without overflow."""
    return float(np.logaddexp(0.0, eta))


# --------------------------------------------------------------------------------------------
# Polynômes binaires
# --------------------------------------------------------------------------------------------


def outcome_terms(
    outcome: OutcomeModel, c: Sequence[float], *, include_beta_x: bool = True
) -> Terms:
    """Fold the outcome predictor into monomial coefficients at covariate point c.

    Args:
        outcome: Modèle de la réponse.
        c: Point des covariables (positions du bloc).
        include_beta_x: Si False, le coefficient du monôme {x} ne contient que Σβ_{xc}c.

    Returns:
        Terms: coefficient de chaque monôme en (x, w_j).
    """
    acc: defaultdict[Monomial, list[float]] = defaultdict(list)
    acc[_CONSTANT].append(outcome.beta0)
    acc[_X].extend([outcome.beta_x] if include_beta_x else [])
    for j, value in outcome.beta_w.items():
        acc[frozenset({j})].append(value)
    for j, value in outcome.beta_xw.items():
        acc[frozenset({TREATMENT, j})].append(value)
    for pair, value in outcome.beta_ww.items():
        acc[frozenset(pair)].append(value)
    for a, value in outcome.beta_c.items():
        acc[_CONSTANT].append(value * c[a])
    for a, value in outcome.beta_xc.items():
        acc[_X].append(value * c[a])
    for (a, b), value in outcome.beta_cc.items():
        acc[_CONSTANT].append(value * c[a] * c[b])
    for (j, a), value in outcome.beta_wc.items():
        acc[frozenset({j})].append(value * c[a])
    for key, value in outcome.beta_higher.items():
        acc[frozenset(key)].append(value)
    return {monomial: math.fsum(values) for monomial, values in acc.items()}


def mediator_terms(
    mediator: MediatorModel, c: Sequence[float], *, include_gamma_x: bool = True
) -> Terms:
    """Fold a mediator predictor into monomial coefficients at covariate point c."""
    acc: defaultdict[Monomial, list[float]] = defaultdict(list)
    acc[_CONSTANT].append(mediator.gamma0)
    acc[_X].extend([mediator.gamma_x] if include_gamma_x else [])
    for j, value in mediator.gamma_w.items():
        acc[frozenset({j})].append(value)
    for j, value in mediator.gamma_xw.items():
        acc[frozenset({TREATMENT, j})].append(value)
    for pair, value in mediator.gamma_ww.items():
        acc[frozenset(pair)].append(value)
    for a, value in mediator.gamma_c.items():
        acc[_CONSTANT].append(value * c[a])
    for a, value in mediator.gamma_xc.items():
        acc[_X].append(value * c[a])
    for (a, b), value in mediator.gamma_cc.items():
        acc[_CONSTANT].append(value * c[a] * c[b])
    for (j, a), value in mediator.gamma_wc.items():
        acc[frozenset({j})].append(value * c[a])
    return {monomial: math.fsum(values) for monomial, values in acc.items()}


def evaluate_terms(terms: Terms, values: Mapping[int, float]) -> float:
    """Evaluate a polynomial given a value for every variable it mentions."""
    parts = []
    for monomial, coefficient in terms.items():
        product = coefficient
        for variable in monomial:
            if variable not in values:
                raise DimensionError(f"no value supplied for variable {variable}")
            product *= values[variable]
        parts.append(product)
    return math.fsum(parts)


def effective_coefficient(terms: Terms, monomial: Monomial, fixed: Mapping[int, float]) -> float:
    """Coefficient of `monomial` once every other variable is fixed.

    Equals the finite difference of the predictor in the variables of `monomial` (the mixed
    difference for interactions), computed from coefficients only.
    """
    parts = []
    for term, coefficient in terms.items():
        if not monomial <= term:
            continue
        product = coefficient
        for variable in term - monomial:
            if variable not in fixed:
                raise DimensionError(f"no value supplied for variable {variable}")
            product *= fixed[variable]
        parts.append(product)
    return math.fsum(parts)


# --------------------------------------------------------------------------------------------
# Validation des arguments
# --------------------------------------------------------------------------------------------


def covariate_vector(spec: SystemSpec, c: Sequence[float] | None) -> tuple[float, ...]:
    """Return c as a tuple, defaulting to the block's point; check its length."""
    if c is None:
        return spec.covariate_values
    values = tuple(float(v) for v in c)
    if len(values) != spec.p:
        raise DimensionError(
            f"expected {spec.p} covariate values, got {len(values)}",
            details={"expected": spec.p, "got": len(values)},
        )
    if not all(math.isfinite(v) for v in values):
        raise DimensionError("covariate values must be finite")
    return values


def check_treatment_value(spec: SystemSpec, x: float) -> float:
    """Reject non-binary treatment values for binary-treatment specs."""
    if not math.isfinite(x):
        raise DimensionError("treatment value must be finite")
    if spec.treatment_kind == "binary" and x not in (0, 1):
        raise DimensionError(f"binary treatment takes values in {{0, 1}}, got {x}")
    return float(x)


def _binary(assignment: Mapping[int, int]) -> dict[int, int]:
    for j, value in assignment.items():
        if value not in (0, 1):
            raise DimensionError(f"mediator {j} is binary, got {value}")
    return {j: int(v) for j, v in assignment.items()}


def mediator_assignment(
    spec: SystemSpec, w: Mapping[int, int] | Sequence[int], among: Sequence[int] | None = None
) -> dict[int, int]:
    """Map mediator values onto indices.

    Args:
        spec: Spécification du système.
        w: Valeurs binaires, alignées sur `among` (séquence) ou indexées (mapping).
        among: Indices attendus (par défaut tous les médiateurs).

    Returns:
        dict[int, int]: valeur de chaque médiateur attendu.
    """
    expected = tuple(spec.indices if among is None else among)
    if isinstance(w, Mapping):
        missing = sorted(set(expected) - set(w))
        if missing:
            raise DimensionError(f"missing values for mediators {missing}")
        return _binary({j: w[j] for j in expected})
    if len(w) != len(expected):
        raise DimensionError(
            f"expected {len(expected)} mediator values, got {len(w)}",
            details={"expected": list(expected), "got": len(w)},
        )
    return _binary(dict(zip(expected, w, strict=True)))


# --------------------------------------------------------------------------------------------
# Prédicteurs linéaires
# --------------------------------------------------------------------------------------------


def outcome_logit(
    spec: SystemSpec,
    x: float,
    w: Mapping[int, int] | Sequence[int],
    c: Sequence[float] | None = None,
) -> float:
    """Linear predictor of the logit of P(Y=1 | X=x, W=w, C=c)."""
    x = check_treatment_value(spec, x)
    values: dict[int, float] = dict(mediator_assignment(spec, w))
    values[TREATMENT] = x
    return evaluate_terms(outcome_terms(spec.outcome, covariate_vector(spec, c)), values)


def mediator_logit(
    spec: SystemSpec,
    j: int,
    x: float,
    w_outer: Mapping[int, int] | Sequence[int],
    c: Sequence[float] | None = None,
) -> float:
    """Linear predictor of the logit of P(W_j=1 | X=x, outer mediators, C=c)."""
    mediator = spec.mediator(j)
    x = check_treatment_value(spec, x)
    outer = [i for i in spec.indices if i > j]
    values: dict[int, float] = dict(mediator_assignment(spec, w_outer, among=outer))
    values[TREATMENT] = x
    return evaluate_terms(mediator_terms(mediator, covariate_vector(spec, c)), values)


# --------------------------------------------------------------------------------------------
# Vue « un seul médiateur »
# --------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class MediatorView:
    """Innermost mediator in scope, every other mediator fixed, covariates at c."""

    spec: SystemSpec
    inner: int
    outer: dict[int, int]
    c: tuple[float, ...]

    @cached_property
    def outcome(self) -> Terms:
        """Outcome polynomial at c."""
        return outcome_terms(self.spec.outcome, self.c)

    @cached_property
    def outcome_context(self) -> Terms:
        """Outcome polynomial at c without the bare β_x coefficient."""
        return outcome_terms(self.spec.outcome, self.c, include_beta_x=False)

    @cached_property
    def mediator(self) -> Terms:
        """Inner mediator polynomial at c."""
        return mediator_terms(self.spec.mediator(self.inner), self.c)

    def _fixed(self, x: float, w: int | None = None) -> dict[int, float]:
        values: dict[int, float] = dict(self.outer)
        values[TREATMENT] = x
        if w is not None:
            values[self.inner] = w
        return values

    def eta(self, x: float, w: int) -> float:
        """Outcome predictor η_w(x) with the inner mediator at w."""
        return evaluate_terms(self.outcome, self._fixed(x, w))

    def mediator_eta(self, x: float) -> float:
        """Inner mediator predictor at x."""
        return evaluate_terms(self.mediator, self._fixed(x))

    def mediator_effect(self, x: float) -> float:
        """η₁(x) − η₀(x), exact from coefficients (β_w + β_xw·x + Σβ_wc·c + ...)."""
        return effective_coefficient(self.outcome, frozenset({self.inner}), self._fixed(x))

    def treatment_slope(self) -> float:
        """∂η₀/∂x: full treatment coefficient with the inner mediator at 0."""
        return effective_coefficient(self.outcome, _X, self._fixed(0.0, 0))

    def treatment_context(self) -> float:
        """∂η₀/∂x minus the bare β_x: covariate and fixed-outer-mediator treatment terms."""
        return effective_coefficient(self.outcome_context, _X, self._fixed(0.0, 0))

    def treatment_interaction(self) -> float:
        """Effective treatment × inner-mediator interaction at the fixed outer mediators."""
        return effective_coefficient(
            self.outcome, frozenset({TREATMENT, self.inner}), self._fixed(0.0)
        )

    def mediator_slope(self) -> float:
        """∂(mediator predictor)/∂x: γ_x + Σγ_{xc}c + fixed-outer terms."""
        return effective_coefficient(self.mediator, _X, self._fixed(0.0))

    def conditionals(self, x: float) -> Conditionals:
        """Conditional probabilities linking Y and the inner mediator at x."""
        eta0 = self.eta(x, 0)
        eta1 = self.eta(x, 1)
        effect = self.mediator_effect(x)
        m = self.mediator_eta(x)
        degenerate = effect == 0.0
        if degenerate:
            g0 = g1 = m
        else:
            ratio = log1pexp(eta0) - log1pexp(eta1)
            g0 = ratio + m
            g1 = effect + ratio + m
        return Conditionals(eta0=eta0, eta1=eta1, g0=g0, g1=g1, degenerate=degenerate)


@dataclass(frozen=True)
class Conditionals:
    """η_w (outcome predictors at W=w) and g_y (logits of P(W=1 | Y=y)) at one point."""

    eta0: float
    eta1: float
    g0: float
    g1: float
    degenerate: bool

    def g(self, y: int) -> float:
        """Logit of P(W=1 | Y=y)."""
        return self.g1 if y == 1 else self.g0

    @property
    def p_y_given_w1(self) -> float:
        """P(Y=1 | W=1)."""
        return logistic(self.eta1)

    @property
    def p_w_given_y1(self) -> float:
        """P(W=1 | Y=1)."""
        return logistic(self.g1)

    @property
    def log_rr(self) -> float:
        """log RR_{W|Y}: log P(W=1 | Y=1) − log P(W=1 | Y=0)."""
        if self.degenerate:
            return 0.0
        return log_logistic(self.g1) - log_logistic(self.g0)

    @property
    def log_rr_complement(self) -> float:
        """log RR_{W̄|Y} for W̄ = 1 − W."""
        if self.degenerate:
            return 0.0
        return log_logistic(-self.g1) - log_logistic(-self.g0)

    @property
    def delta_y(self) -> float:
        """P(Y=1 | W=1) − P(Y=1 | W=0); exactly 0 when Y ⊥ W."""
        if self.degenerate:
            return 0.0
        return logistic(self.eta1) - logistic(self.eta0)

    @property
    def delta_w(self) -> float:
        """P(W=1 | Y=1) − P(W=1 | Y=0); exactly 0 when Y ⊥ W."""
        if self.degenerate:
            return 0.0
        return logistic(self.g1) - logistic(self.g0)


def single_mediator_view(
    spec: SystemSpec,
    c: Sequence[float] | None = None,
    outer: Mapping[int, int] | None = None,
) -> MediatorView:
    """Build the view on the innermost mediator.

    Raises:
        ViewError: aucun médiateur, ou plusieurs médiateurs sans valeurs fixées pour les
            médiateurs externes.
    """
    if spec.k == 0:
        raise ViewError("spec has no mediator in scope")
    others = spec.indices[1:]
    if others and outer is None:
        raise ViewError(
            f"{spec.k} unreduced mediators; fix mediators {list(others)} or reduce the chain",
            details={"mediators": list(spec.indices)},
        )
    assignment = mediator_assignment(spec, outer or {}, among=others)
    extra = sorted(set(outer or {}) - set(others))
    if extra:
        raise DimensionError(f"outer assignment names mediators {extra} outside the view")
    return MediatorView(
        spec=spec, inner=spec.innermost, outer=assignment, c=covariate_vector(spec, c)
    )


def g_y(
    spec: SystemSpec,
    y: int,
    x: float,
    c: Sequence[float] | None = None,
    outer: Mapping[int, int] | None = None,
) -> float:
    """Logit of P(W=1 | Y=y, X=x, C=c) for the innermost mediator, in closed form.

    g_y = y(η₁ − η₀) + log[(1 + e^{η₀}) / (1 + e^{η₁})] + γ-predictor; hence
    g₁ − g₀ = η₁ − η₀ (= β_w + β_xw·x without mediator × covariate terms).
    """
    if y not in (0, 1):
        raise DimensionError(f"y must be 0 or 1, got {y}")
    x = check_treatment_value(spec, x)
    return single_mediator_view(spec, c, outer).conditionals(x).g(y)


# --------------------------------------------------------------------------------------------
# Vue confondeur
# --------------------------------------------------------------------------------------------


def check_confounder_consistency(
    spec: SystemSpec, tolerance: float = CONSISTENCY_TOLERANCE
) -> ConsistencyReport:
    """Check δ_w = γ_x between the declared X|W and W|X views of the same joint law."""
    view = spec.confounder_view
    if view is None or spec.k != 1 or spec.treatment_kind != "binary":
        return ConsistencyReport(applicable=False, consistent=True, tolerance=tolerance)
    gamma_x = spec.mediators[0].gamma_x
    return ConsistencyReport(
        applicable=True,
        consistent=abs(view.delta_w - gamma_x) <= tolerance,
        delta_w=view.delta_w,
        gamma_x=gamma_x,
        tolerance=tolerance,
    )


def mediator_from_confounder(
    confounder: ConfounderModel, p_mediator: float, index: int = 1
) -> MediatorModel:
    """W|X model of the joint P(W)P(X|W) (Bayes reversal, γ_x = δ_w).

    Args:
        confounder: Modèle logistique de X sachant W.
        p_mediator: P(W=1), strictement entre 0 et 1.
        index: Indice du médiateur construit.
    """
    if not 0.0 < p_mediator < 1.0:
        raise ValueError(f"P(W=1) must lie in (0, 1), got {p_mediator}")
    d0, dw = confounder.delta0, confounder.delta_w
    gamma0 = float(logit(p_mediator)) + log_logistic(-d0 - dw) - log_logistic(-d0)
    return MediatorModel(index=index, gamma0=gamma0, gamma_x=dw)


def reverse_confounder_view(spec: SystemSpec, p_mediator: float) -> SystemSpec:
    """Replace the W|X model by the one implied by the declared confounder view."""
    if spec.confounder_view is None or spec.k != 1:
        raise ViewError("arrow reversal needs a confounder view and exactly one mediator")
    mediator = mediator_from_confounder(spec.confounder_view, p_mediator, spec.innermost)
    return spec.model_copy(update={"mediators": [mediator]})
