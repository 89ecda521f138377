"""Oracle par énumération exacte: vérité terrain pour toutes les formes closes.

Objectif du module
------------------
- Énumérer les 2^(k+1) cellules (y, w₁, …, w_k) de P(Y, W | X=x, C=c) en multipliant, dans
  l'ordre du DAG, les lois logistiques de chaque médiateur puis de la réponse.
- Dériver de la table: logits marginaux et conditionnels, inversions de Bayes, log cpr,
  pentes marginales par différences centrées, loi jointe à flèche inversée.

Le module évalue les prédicteurs à partir de sa propre table de termes et n'utilise aucun des
modules de calcul qu'il vérifie. L'accumulation se fait en log, normalisée par log-sum-exp.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import log_expit, logsumexp

from logitmed.core.constants import DEFAULT_FD_STEP, MAX_ENUMERATION_MEDIATORS
from logitmed.core.errors import DimensionError, EnumerationLimitError, TreatmentKindError
from logitmed.domain.entities import ConfounderModel, MediatorModel, OutcomeModel, SystemSpec

# (coefficient, variables): 0 = treatment, j >= 1 = mediator j
TermTable = list[tuple[float, tuple[int, ...]]]


def _outcome_table(outcome: OutcomeModel, c: Sequence[float]) -> TermTable:
    table: TermTable = [(outcome.beta0, ()), (outcome.beta_x, (0,))]
    table += [(b, (j,)) for j, b in outcome.beta_w.items()]
    table += [(b, (0, j)) for j, b in outcome.beta_xw.items()]
    table += [(b, pair) for pair, b in outcome.beta_ww.items()]
    table += [(b * c[a], ()) for a, b in outcome.beta_c.items()]
    table += [(b * c[a], (0,)) for a, b in outcome.beta_xc.items()]
    table += [(b * c[a1] * c[a2], ()) for (a1, a2), b in outcome.beta_cc.items()]
    table += [(b * c[a], (j,)) for (j, a), b in outcome.beta_wc.items()]
    table += [(b, key) for key, b in outcome.beta_higher.items()]
    return table


def _mediator_table(mediator: MediatorModel, c: Sequence[float]) -> TermTable:
    table: TermTable = [(mediator.gamma0, ()), (mediator.gamma_x, (0,))]
    table += [(g, (j,)) for j, g in mediator.gamma_w.items()]
    table += [(g, (0, j)) for j, g in mediator.gamma_xw.items()]
    table += [(g, pair) for pair, g in mediator.gamma_ww.items()]
    table += [(g * c[a], ()) for a, g in mediator.gamma_c.items()]
    table += [(g * c[a], (0,)) for a, g in mediator.gamma_xc.items()]
    table += [(g * c[a1] * c[a2], ()) for (a1, a2), g in mediator.gamma_cc.items()]
    table += [(g * c[a], (j,)) for (j, a), g in mediator.gamma_wc.items()]
    return table


def _predictor(table: TermTable, columns: Mapping[int, np.ndarray], size: int) -> np.ndarray:
    total = np.zeros(size)
    for coefficient, variables in table:
        term = np.full(size, coefficient)
        for variable in variables:
            term = term * columns[variable]
        total += term
    return total


def _log_bernoulli(value: np.ndarray, eta: np.ndarray) -> np.ndarray:
    return np.where(value == 1, log_expit(eta), log_expit(-eta))


@dataclass(frozen=True)
class ConditionalTable:
    """P(Y, W₁, …, W_k | X=x, C=c) over every binary state.

    `states` has one row per cell; column 0 is y, column i is the mediator `indices[i-1]`.
    """

    x: float
    c: tuple[float, ...]
    indices: tuple[int, ...]
    states: np.ndarray
    log_probabilities: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        """Cell probabilities."""
        return np.exp(self.log_probabilities)

    @property
    def cells(self) -> dict[tuple[int, ...], float]:
        """Map (y, w₁, …, w_k) to its probability."""
        return {
            tuple(int(v) for v in row): float(p)
            for row, p in zip(self.states, self.probabilities, strict=True)
        }

    def column(self, variable: int) -> np.ndarray:
        """State column of Y (variable -1) or of mediator `variable`."""
        if variable == -1:
            return self.states[:, 0]
        return self.states[:, 1 + self.indices.index(variable)]

    def mask(self, y: int | None = None, fixed: Mapping[int, int] | None = None) -> np.ndarray:
        """Rows matching Y=y (if given) and the fixed mediator values."""
        rows = np.ones(len(self.states), dtype=bool)
        if y is not None:
            rows &= self.states[:, 0] == y
        for j, value in (fixed or {}).items():
            if j not in self.indices:
                raise DimensionError(f"mediator index {j} out of range {list(self.indices)}")
            rows &= self.column(j) == value
        return rows

    def log_mass(self, rows: np.ndarray) -> float:
        """Log of the total probability of the selected rows."""
        return float(logsumexp(self.log_probabilities[rows]))


def _check_inputs(spec: SystemSpec, x: float, c: Sequence[float] | None) -> tuple[float, ...]:
    if spec.treatment_kind == "binary" and x not in (0, 1):
        raise DimensionError(f"binary treatment takes values in {{0, 1}}, got {x}")
    values = tuple(spec.covariate_values if c is None else (float(v) for v in c))
    if len(values) != spec.p:
        raise DimensionError(f"expected {spec.p} covariate values, got {len(values)}")
    return values


def enumerate_joint(
    spec: SystemSpec,
    x: float,
    c: Sequence[float] | None = None,
    max_mediators: int = MAX_ENUMERATION_MEDIATORS,
) -> ConditionalTable:
    """Enumerate P(Y, W | X=x, C=c) cell by cell.

    Raises:
        EnumerationLimitError: plus de `max_mediators` médiateurs.
        DimensionError: x ou c incompatibles avec la spécification.
    """
    if spec.k > max_mediators:
        raise EnumerationLimitError(
            f"{spec.k} mediators exceed the enumeration limit of {max_mediators}",
            details={"k": spec.k, "limit": max_mediators},
        )
    values = _check_inputs(spec, x, c)
    states = np.array(list(itertools.product((0, 1), repeat=spec.k + 1)), dtype=np.int64)
    size = len(states)
    columns: dict[int, np.ndarray] = {0: np.full(size, float(x))}
    for position, j in enumerate(spec.indices, start=1):
        columns[j] = states[:, position].astype(float)

    log_p = np.zeros(size)
    for mediator in spec.mediators:
        eta = _predictor(_mediator_table(mediator, values), columns, size)
        log_p += _log_bernoulli(states[:, spec.indices.index(mediator.index) + 1], eta)
    eta_y = _predictor(_outcome_table(spec.outcome, values), columns, size)
    log_p += _log_bernoulli(states[:, 0], eta_y)
    log_p -= logsumexp(log_p)
    return ConditionalTable(
        x=float(x), c=values, indices=spec.indices, states=states, log_probabilities=log_p
    )


def marginal_logit_numeric(spec: SystemSpec, x: float, c: Sequence[float] | None = None) -> float:
    """logit P(Y=1 | X=x, C=c) with every mediator summed out."""
    return conditional_logit_numeric(spec, x, c)


def conditional_logit_numeric(
    spec: SystemSpec,
    x: float,
    c: Sequence[float] | None = None,
    fixed: Mapping[int, int] | None = None,
) -> float:
    """logit P(Y=1 | X=x, C=c, W_S=fixed), the other mediators summed out."""
    table = enumerate_joint(spec, x, c)
    return table.log_mass(table.mask(1, fixed)) - table.log_mass(table.mask(0, fixed))


def mediator_posterior_logit_numeric(
    spec: SystemSpec,
    j: int,
    y: int,
    x: float,
    c: Sequence[float] | None = None,
    fixed: Mapping[int, int] | None = None,
) -> float:
    """logit P(W_j=1 | Y=y, X=x, C=c, W_S=fixed) by Bayes inversion of the table."""
    table = enumerate_joint(spec, x, c)
    rows = table.mask(y, fixed)
    column = table.column(j)
    return table.log_mass(rows & (column == 1)) - table.log_mass(rows & (column == 0))


def marginal_slope_numeric(
    spec: SystemSpec, x: float, c: Sequence[float] | None = None, h: float = DEFAULT_FD_STEP
) -> float:
    """Central difference of the marginal logit in x."""
    if spec.treatment_kind != "continuous":
        raise TreatmentKindError("numerical slopes require a continuous treatment")
    upper = marginal_logit_numeric(spec, x + h, c)
    lower = marginal_logit_numeric(spec, x - h, c)
    return (upper - lower) / (2.0 * h)


def log_cpr_numeric(spec: SystemSpec, c: Sequence[float] | None = None) -> float:
    """log[P₁(1−P₀) / (P₀(1−P₁))] with P_x = P(Y=1 | X=x, C=c)."""
    if spec.treatment_kind != "binary":
        raise TreatmentKindError("the cross-product ratio requires a binary treatment")
    return marginal_logit_numeric(spec, 1, c) - marginal_logit_numeric(spec, 0, c)


def conditional_log_cpr_numeric(
    spec: SystemSpec, fixed: Mapping[int, int], c: Sequence[float] | None = None
) -> float:
    """log cpr(Y, X | C=c, W_S=fixed)."""
    if spec.treatment_kind != "binary":
        raise TreatmentKindError("the cross-product ratio requires a binary treatment")
    return conditional_logit_numeric(spec, 1, c, fixed) - conditional_logit_numeric(
        spec, 0, c, fixed
    )


def _log_joint_treatment_mediator(
    spec: SystemSpec, p_treated: float, c: Sequence[float] | None
) -> dict[tuple[int, int], float]:
    if spec.k != 1 or spec.treatment_kind != "binary":
        raise DimensionError("arrow reversal needs a binary treatment and exactly one mediator")
    if not 0.0 < p_treated < 1.0:
        raise ValueError(f"P(X=1) must lie in (0, 1), got {p_treated}")
    log_px = {0: math.log1p(-p_treated), 1: math.log(p_treated)}
    joint = {}
    for x in (0, 1):
        table = enumerate_joint(spec, x, c)
        column = table.column(spec.innermost)
        for w in (0, 1):
            joint[(x, w)] = log_px[x] + table.log_mass(column == w)
    return joint


def reversed_joint_delta(
    spec: SystemSpec, p_treated: float, c: Sequence[float] | None = None
) -> ConfounderModel:
    """δ₀, δ_w of the X | W model read off the joint P(X)P(W | X)."""
    joint = _log_joint_treatment_mediator(spec, p_treated, c)
    delta0 = joint[(1, 0)] - joint[(0, 0)]
    delta_w = joint[(1, 1)] - joint[(0, 1)] - delta0
    return ConfounderModel(delta0=delta0, delta_w=delta_w)


def log_cpr_confounded(
    spec: SystemSpec,
    confounder: ConfounderModel,
    p_mediator: float,
    c: Sequence[float] | None = None,
) -> float:
    """log cpr(Y, X) for the joint P(W)P(X | W)P(Y | X, W).

    Only the outcome model of `spec` is used; W is the single declared mediator.
    """
    if spec.k != 1 or spec.treatment_kind != "binary":
        raise DimensionError("arrow reversal needs a binary treatment and exactly one mediator")
    if not 0.0 < p_mediator < 1.0:
        raise ValueError(f"P(W=1) must lie in (0, 1), got {p_mediator}")
    values = _check_inputs(spec, 0, c)
    j = spec.innermost
    outcome = _outcome_table(spec.outcome, values)
    log_pw = {0: math.log1p(-p_mediator), 1: math.log(p_mediator)}
    logits = {}
    for x in (0, 1):
        columns = {0: np.full(2, float(x)), j: np.array([0.0, 1.0])}
        eta_y = _predictor(outcome, columns, 2)
        eta_x = confounder.delta0 + confounder.delta_w * columns[j]
        log_x_given_w = log_expit(eta_x) if x == 1 else log_expit(-eta_x)
        log_w = np.array([log_pw[0], log_pw[1]]) + log_x_given_w
        positive = logsumexp(log_w + log_expit(eta_y))
        negative = logsumexp(log_w + log_expit(-eta_y))
        logits[x] = float(positive - negative)
    return logits[1] - logits[0]

