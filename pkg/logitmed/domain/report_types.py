"""Types de résultats produits par les modules de calcul.

Ce module définit les modèles Pydantic des décompositions (pente marginale, rapport des
produits croisés), des bornes, des étapes de marginalisation et des audits de cohérence.
Chaque décomposition est additive: le total est la somme de ses composantes.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from logitmed.domain.entities import OutcomeModel

_FROZEN = ConfigDict(frozen=True)


class SlopeDecomposition(BaseModel):
    """Composantes additives de la pente marginale β(x) pour un traitement continu."""

    model_config = _FROZEN

    direct: float
    interaction: float
    indirect: float
    covariate_treatment: float
    total: float
    at_x: float
    at_c: list[float] = Field(default_factory=list)
    delta_y: float
    delta_w: float


class CprDecomposition(BaseModel):
    """Composantes du log du rapport des produits croisés pour un traitement binaire."""

    model_config = _FROZEN

    beta_x: float
    beta_xw: float
    covariate_treatment: float
    log_rr_at_x0: float
    log_rr_at_x1: float
    total: float


class EffectBounds(BaseModel):
    """Intervalle fermé contenant l'effet marginal sous connaissance partielle."""

    model_config = _FROZEN

    lower: float
    upper: float
    assumptions: dict[str, str] = Field(default_factory=dict)

    def contains(self, value: float, tolerance: float = 0.0) -> bool:
        """Return whether value lies within the bounds."""
        return self.lower - tolerance <= value <= self.upper + tolerance


class MarginalizationStep(BaseModel):
    """Modèle réduit de la réponse après marginalisation d'un médiateur interne."""

    model_config = _FROZEN

    removed_index: int
    starred: OutcomeModel
    exact: bool = True
    at_c: list[float] = Field(default_factory=list)


class TaylorModel(BaseModel):
    """Linéarisation au premier ordre de ℓ(x, w₂) autour de x₀."""

    model_config = _FROZEN

    x0: float
    tilde0: float
    tilde_x: float
    tilde_w2: float
    tilde_xw2: float

    def logit(self, x: float, w2: int) -> float:
        """Evaluate the linearized logit at (x, w2)."""
        return self.tilde0 + self.tilde_x * x + (self.tilde_w2 + self.tilde_xw2 * x) * w2


class DecompositionReport(BaseModel):
    """Effet total du traitement, réparti par chemin, après marginalisation des médiateurs."""

    model_config = _FROZEN

    direct: float
    interaction: float
    indirect: dict[int, float] = Field(default_factory=dict)
    total: float
    closed_form_total: float | None = None
    conditioned_on: dict[int, int] = Field(default_factory=dict)
    steps: list[MarginalizationStep] = Field(default_factory=list)

    @property
    def components_sum(self) -> float:
        """Sum of the additive components."""
        return self.direct + self.interaction + sum(self.indirect.values())


class ConsistencyReport(BaseModel):
    """Audit δ_w = γ_x entre les deux vues d'une même loi jointe."""

    model_config = _FROZEN

    applicable: bool
    consistent: bool
    delta_w: float | None = None
    gamma_x: float | None = None
    tolerance: float
