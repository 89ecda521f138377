"""Entités du domaine: paramétrisations des modèles logistiques conditionnels.

Ce module définit les modèles Pydantic du DAG traitement → médiateurs binaires → réponse:
modèle de la réponse (coefficients β), modèles des médiateurs (coefficients γ), vue
« confondeur » (coefficients δ), bloc de covariables et spécification complète du système.

Conventions d'indexation:
- médiateurs: indice ordinal j (le plus petit indice est le médiateur le plus interne);
- covariables: position dans `CovariateBlock.names`;
- paires: tuples ordonnés `(i, j)`; termes d'ordre supérieur: tuples triés où 0 désigne le
  traitement et j >= 1 le médiateur j.
Une clé absente vaut 0.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from typing import Any, Literal

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_serializer,
    field_validator,
    model_validator,
)

from logitmed.core.errors import DimensionError

TreatmentKind = Literal["continuous", "binary"]

Pair = tuple[int, int]

_STRICT = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)


def _parse_key(key: Any) -> tuple[int, ...]:
    """Accept tuples, lists or "i*j" strings as interaction keys."""
    if isinstance(key, str):
        return tuple(int(part) for part in key.split("*"))
    return tuple(int(part) for part in key)


def _tuple_keys(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {_parse_key(k): v for k, v in value.items()}
    return value


def _string_keys(value: Mapping[tuple[int, ...], float]) -> dict[str, float]:
    return {"*".join(str(part) for part in key): v for key, v in value.items()}


class OutcomeModel(BaseModel):
    """Coefficients du logit de Y sachant traitement, médiateurs et covariables."""

    model_config = _STRICT

    beta0: float = 0.0
    beta_x: float = 0.0
    beta_w: dict[int, float] = Field(default_factory=dict)
    beta_xw: dict[int, float] = Field(default_factory=dict)
    beta_ww: dict[Pair, float] = Field(default_factory=dict)
    beta_c: dict[int, float] = Field(default_factory=dict)
    beta_xc: dict[int, float] = Field(default_factory=dict)
    beta_cc: dict[Pair, float] = Field(default_factory=dict)
    beta_wc: dict[Pair, float] = Field(default_factory=dict)
    beta_higher: dict[tuple[int, ...], float] = Field(default_factory=dict)

    @field_validator("beta_ww", "beta_cc", "beta_wc", "beta_higher", mode="before")
    @classmethod
    def _normalize_keys(cls, value: Any) -> Any:
        return _tuple_keys(value)

    @field_validator("beta_ww", "beta_cc")
    @classmethod
    def _ordered_pairs(cls, value: dict[Pair, float]) -> dict[Pair, float]:
        for i, j in value:
            if not i < j:
                raise ValueError(f"pair ({i}, {j}) must be ordered i < j")
        return value

    @field_validator("beta_higher")
    @classmethod
    def _higher_terms(cls, value: dict[tuple[int, ...], float]) -> dict[tuple[int, ...], float]:
        for key in value:
            if len(key) < 3 or list(key) != sorted(set(key)) or key[0] < 0:  # noqa: PLR2004
                raise ValueError(f"higher-order key {key} must be a sorted tuple of >= 3 variables")
        return value

    @field_serializer("beta_ww", "beta_cc", "beta_wc", "beta_higher", when_used="json")
    def _serialize_pairs(self, value: dict[tuple[int, ...], float]) -> dict[str, float]:
        return _string_keys(value)

    def mediator_references(self) -> set[int]:
        """Return every mediator index the outcome model mentions."""
        refs = set(self.beta_w) | set(self.beta_xw)
        refs |= {i for pair in self.beta_ww for i in pair}
        refs |= {j for j, _ in self.beta_wc}
        refs |= {v for key in self.beta_higher for v in key if v != 0}
        return refs

    def covariate_references(self) -> set[int]:
        """Return every covariate position the outcome model mentions."""
        refs = set(self.beta_c) | set(self.beta_xc)
        refs |= {a for pair in self.beta_cc for a in pair}
        refs |= {a for _, a in self.beta_wc}
        return refs


class MediatorModel(BaseModel):
    """Coefficients du logit du médiateur j sachant ses parents."""

    model_config = _STRICT

    index: int = Field(ge=1)
    gamma0: float = 0.0
    gamma_x: float = 0.0
    gamma_w: dict[int, float] = Field(default_factory=dict)
    gamma_xw: dict[int, float] = Field(default_factory=dict)
    gamma_ww: dict[Pair, float] = Field(default_factory=dict)
    gamma_c: dict[int, float] = Field(default_factory=dict)
    gamma_xc: dict[int, float] = Field(default_factory=dict)
    gamma_cc: dict[Pair, float] = Field(default_factory=dict)
    gamma_wc: dict[Pair, float] = Field(default_factory=dict)

    @field_validator("gamma_ww", "gamma_cc", "gamma_wc", mode="before")
    @classmethod
    def _normalize_keys(cls, value: Any) -> Any:
        return _tuple_keys(value)

    @field_serializer("gamma_ww", "gamma_cc", "gamma_wc", when_used="json")
    def _serialize_pairs(self, value: dict[Pair, float]) -> dict[str, float]:
        return _string_keys(value)

    @model_validator(mode="after")
    def _acyclic(self) -> MediatorModel:
        outer = set(self.gamma_w) | set(self.gamma_xw)
        outer |= {i for pair in self.gamma_ww for i in pair}
        outer |= {j for j, _ in self.gamma_wc}
        inner = sorted(j for j in outer if j <= self.index)
        if inner:
            raise ValueError(
                f"mediator {self.index} may only depend on mediators with larger index, got {inner}"
            )
        for i, j in list(self.gamma_ww) + list(self.gamma_cc):
            if not i < j:
                raise ValueError(f"pair ({i}, {j}) must be ordered i < j")
        return self

    def mediator_references(self) -> set[int]:
        """Return the outer mediator indices this model depends on."""
        refs = set(self.gamma_w) | set(self.gamma_xw)
        refs |= {i for pair in self.gamma_ww for i in pair}
        refs |= {j for j, _ in self.gamma_wc}
        return refs

    def covariate_references(self) -> set[int]:
        """Return every covariate position this model mentions."""
        refs = set(self.gamma_c) | set(self.gamma_xc)
        refs |= {a for pair in self.gamma_cc for a in pair}
        refs |= {a for _, a in self.gamma_wc}
        return refs


class ConfounderModel(BaseModel):
    """Vue « confondeur »: logit de X binaire sachant W (flèche X–W inversée)."""

    model_config = _STRICT

    delta0: float = 0.0
    delta_w: float = 0.0


class CovariateBlock(BaseModel):
    """Noms des covariables et point c = (c₁, …, c_p) où les effets sont évalués."""

    model_config = _STRICT

    names: list[str] = Field(default_factory=list)
    values: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _same_length(self) -> CovariateBlock:
        if len(self.names) != len(self.values):
            raise ValueError(
                f"covariate names ({len(self.names)}) and values ({len(self.values)}) differ"
            )
        if len(set(self.names)) != len(self.names):
            raise ValueError("covariate names must be unique")
        return self


class SystemSpec(BaseModel):
    """DAG complet: chaîne ordonnée de médiateurs, modèle de la réponse, covariables."""

    model_config = _STRICT

    treatment_kind: TreatmentKind
    mediators: list[MediatorModel] = Field(default_factory=list)
    outcome: OutcomeModel = Field(default_factory=OutcomeModel)
    covariates: CovariateBlock | None = None
    confounder_view: ConfounderModel | None = None

    @model_validator(mode="after")
    def _references(self) -> SystemSpec:
        indices = [m.index for m in self.mediators]
        if indices and indices != list(range(indices[0], indices[0] + len(indices))):
            raise ValueError(f"mediator indices must be a contiguous ascending run, got {indices}")
        declared = set(indices)
        p = self.p
        unknown = self.outcome.mediator_references() - declared
        if unknown:
            raise ValueError(f"outcome model references undeclared mediators {sorted(unknown)}")
        for mediator in self.mediators:
            missing = mediator.mediator_references() - declared
            if missing:
                raise ValueError(
                    f"mediator {mediator.index} references undeclared mediators {sorted(missing)}"
                )
        covariate_refs = self.outcome.covariate_references()
        for mediator in self.mediators:
            covariate_refs |= mediator.covariate_references()
        bad = sorted(a for a in covariate_refs if not 0 <= a < p)
        if bad:
            raise ValueError(f"covariate positions {bad} outside the declared block (p={p})")
        for key in self.outcome.beta_higher:
            if not set(key) <= declared | {0}:
                raise ValueError(f"higher-order term {key} references undeclared variables")
        return self

    @property
    def k(self) -> int:
        """Number of mediators in scope."""
        return len(self.mediators)

    @property
    def p(self) -> int:
        """Number of covariates (0 without a block)."""
        return len(self.covariates.names) if self.covariates else 0

    @property
    def indices(self) -> tuple[int, ...]:
        """Mediator indices, innermost first."""
        return tuple(m.index for m in self.mediators)

    @property
    def innermost(self) -> int:
        """Index of the innermost mediator."""
        if not self.mediators:
            raise DimensionError("spec has no mediator")
        return self.mediators[0].index

    @property
    def covariate_values(self) -> tuple[float, ...]:
        """Covariate point of the block (empty without covariates)."""
        return tuple(self.covariates.values) if self.covariates else ()

    def mediator(self, j: int) -> MediatorModel:
        """Return the model of mediator j."""
        for mediator in self.mediators:
            if mediator.index == j:
                return mediator
        raise DimensionError(f"mediator index {j} out of range {list(self.indices)}")

    def with_covariate_values(self, values: Sequence[float]) -> SystemSpec:
        """Return the same system evaluated at another covariate point."""
        if len(values) != self.p:
            raise DimensionError(f"expected {self.p} covariate values, got {len(values)}")
        if not self.covariates:
            return self
        block = CovariateBlock(names=list(self.covariates.names), values=[float(v) for v in values])
        return self.model_copy(update={"covariates": block})
