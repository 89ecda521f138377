"""Traitement binaire: risques relatifs et log du rapport des produits croisés.

Objectif du module
------------------
- log RR_{W|Y,X=x} et log RR_{W̄|Y,X=x} à partir des mêmes g_y (différences de log-logistiques).
- Décomposition du log cpr(Y, X | C=c): β_x + Σβ_xc·c + β_xw + log RR(x=0) − log RR(x=1).
- Identité à quatre risques relatifs qui reconstitue β_xw.

La loi marginale de X n'intervient jamais: le cpr ne dépend que des lois conditionnelles de Y
sachant X.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence

from logitmed.core.constants import IDENTITY_TOLERANCE
from logitmed.core.errors import DimensionError, TreatmentKindError
from logitmed.domain.entities import SystemSpec
from logitmed.domain.model import MediatorView, single_mediator_view
from logitmed.domain.report_types import CprDecomposition


def _binary_view(
    spec: SystemSpec, c: Sequence[float] | None, outer: Mapping[int, int] | None
) -> MediatorView:
    if spec.treatment_kind != "binary":
        raise TreatmentKindError("relative-risk calculus requires a binary treatment")
    return single_mediator_view(spec, c, outer)


def log_rr_w(
    spec: SystemSpec,
    x: int,
    c: Sequence[float] | None = None,
    outer: Mapping[int, int] | None = None,
) -> float:
    """log[P(W=1 | Y=1, X=x, C=c) / P(W=1 | Y=0, X=x, C=c)]."""
    view = _binary_view(spec, c, outer)
    return view.conditionals(_level(x)).log_rr


def log_rr_wbar(
    spec: SystemSpec,
    x: int,
    c: Sequence[float] | None = None,
    outer: Mapping[int, int] | None = None,
) -> float:
    """Relative risk of W̄ = 1 − W: complements of the same g_y evaluations."""
    view = _binary_view(spec, c, outer)
    return view.conditionals(_level(x)).log_rr_complement


def _level(x: int) -> int:
    if x not in (0, 1):
        raise DimensionError(f"binary treatment takes values in {{0, 1}}, got {x}")
    return int(x)


def marginal_log_cpr(
    spec: SystemSpec,
    c: Sequence[float] | None = None,
    outer: Mapping[int, int] | None = None,
) -> CprDecomposition:
    """Decompose log cpr(Y, X | C=c) once the innermost mediator is summed out.

    Fixed outer mediators play the covariate role: their treatment terms are reported in
    `covariate_treatment` and `beta_xw` is the effective interaction at their values.
    """
    view = _binary_view(spec, c, outer)
    lrr0 = view.conditionals(0).log_rr
    lrr1 = view.conditionals(1).log_rr
    beta_x = spec.outcome.beta_x
    covariate_treatment = view.treatment_context()
    beta_xw = view.treatment_interaction()
    return CprDecomposition(
        beta_x=beta_x,
        beta_xw=beta_xw,
        covariate_treatment=covariate_treatment,
        log_rr_at_x0=lrr0,
        log_rr_at_x1=lrr1,
        total=beta_x + covariate_treatment + beta_xw + lrr0 - lrr1,
    )


def beta_xw_from_relative_risks(
    spec: SystemSpec,
    c: Sequence[float] | None = None,
    outer: Mapping[int, int] | None = None,
) -> float:
    """log RR_W(1) − log RR_W(0) − log RR_W̄(1) + log RR_W̄(0)."""
    view = _binary_view(spec, c, outer)
    cond0, cond1 = view.conditionals(0), view.conditionals(1)
    return cond1.log_rr - cond0.log_rr - cond1.log_rr_complement + cond0.log_rr_complement


def beta_xw_identity_check(
    spec: SystemSpec,
    c: Sequence[float] | None = None,
    outer: Mapping[int, int] | None = None,
    tolerance: float = IDENTITY_TOLERANCE,
) -> bool:
    """Whether the four-RR combination reproduces the effective β_xw within tolerance."""
    view = _binary_view(spec, c, outer)
    value = beta_xw_from_relative_risks(spec, c, outer)
    return abs(value - view.treatment_interaction()) <= tolerance
