"""Schéma du fichier de spécification (JSON, strict, versionné).

Objectif du module
------------------
- Décrire le fichier par des modèles Pydantic `extra="forbid"`: une faute de frappe dans un
  nom de coefficient est rejetée au lieu d'annuler silencieusement un effet.
- Résoudre les noms (`x`, `w1`, `w2`, noms des covariables, clés `"w1*w2"`, `"age*w1"`,
  `"x*w2*w3"`) vers les indices des entités du domaine.
- Envelopper toute erreur de lecture ou de validation dans `SpecParseError`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from logitmed.core.constants import SCHEMA_VERSION
from logitmed.core.errors import SpecParseError
from logitmed.domain.entities import (
    ConfounderModel,
    CovariateBlock,
    MediatorModel,
    OutcomeModel,
    SystemSpec,
    TreatmentKind,
)

TREATMENT_NAME = "x"

_FILE = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


def mediator_name(index: int) -> str:
    """Spec-file name of mediator `index`."""
    return f"w{index}"


class TreatmentSection(BaseModel):
    """Nature du traitement et points d'évaluation (traitement continu)."""

    model_config = _FILE

    kind: TreatmentKind
    points: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _binary_has_no_points(self) -> TreatmentSection:
        if self.kind == "binary" and self.points:
            raise ValueError("a binary treatment takes no evaluation points")
        return self


class MediatorSection(BaseModel):
    """Coefficients γ d'un médiateur, indexés par noms."""

    model_config = _FILE

    index: int = Field(ge=1)
    gamma0: float = 0.0
    gamma_x: float = 0.0
    gamma_w: dict[str, float] = Field(default_factory=dict)
    gamma_xw: dict[str, float] = Field(default_factory=dict)
    gamma_ww: dict[str, float] = Field(default_factory=dict)
    gamma_c: dict[str, float] = Field(default_factory=dict)
    gamma_xc: dict[str, float] = Field(default_factory=dict)
    gamma_cc: dict[str, float] = Field(default_factory=dict)
    gamma_wc: dict[str, float] = Field(default_factory=dict)


class OutcomeSection(BaseModel):
    """Coefficients β de la réponse, indexés par noms."""

    model_config = _FILE

    beta0: float = 0.0
    beta_x: float = 0.0
    beta_w: dict[str, float] = Field(default_factory=dict)
    beta_xw: dict[str, float] = Field(default_factory=dict)
    beta_ww: dict[str, float] = Field(default_factory=dict)
    beta_c: dict[str, float] = Field(default_factory=dict)
    beta_xc: dict[str, float] = Field(default_factory=dict)
    beta_cc: dict[str, float] = Field(default_factory=dict)
    beta_wc: dict[str, float] = Field(default_factory=dict)
    beta_higher: dict[str, float] = Field(default_factory=dict)


class SweepOptions(BaseModel):
    """Valeurs balayées pour les coefficients non observés."""

    model_config = _FILE

    beta_w: list[float] = Field(default_factory=list)
    beta_xw: list[float] = Field(default_factory=list)
    gamma_x: list[float] = Field(default_factory=list)


class BoundsOptions(BaseModel):
    """Intervalles [lo, hi] supposés pour β_x, β_xw, γ_x."""

    model_config = _FILE

    beta_x: tuple[float, float] | None = None
    beta_xw: tuple[float, float] | None = None
    gamma_x: tuple[float, float] | None = None


class SpecOptions(BaseModel):
    """Options d'exécution portées par le fichier."""

    model_config = _FILE

    tolerance: float | None = Field(default=None, gt=0.0)
    taylor_x0: float | None = None
    sweep: SweepOptions = Field(default_factory=SweepOptions)
    bounds: BoundsOptions | None = None


class SpecFile(BaseModel):
    """Document complet: version, traitement, covariables, médiateurs, réponse, options."""

    model_config = _FILE

    schema_version: Literal["1"]
    treatment: TreatmentSection
    covariates: CovariateBlock | None = None
    mediators: list[MediatorSection] = Field(default_factory=list)
    outcome: OutcomeSection = Field(default_factory=OutcomeSection)
    confounder_view: ConfounderModel | None = None
    options: SpecOptions = Field(default_factory=SpecOptions)

    @model_validator(mode="after")
    def _indices(self) -> SpecFile:
        indices = sorted(m.index for m in self.mediators)
        if indices != list(range(1, len(indices) + 1)):
            raise ValueError(f"mediator indices must be 1..k without gaps, got {indices}")
        names = self.covariates.names if self.covariates else []
        reserved = {TREATMENT_NAME} | {mediator_name(j) for j in indices}
        clash = sorted(set(names) & reserved)
        if clash:
            raise ValueError(f"covariate names {clash} collide with treatment/mediator names")
        return self

    def to_system_spec(self) -> SystemSpec:
        """Resolve names and build the domain spec."""
        resolver = _NameResolver(self)
        mediators = [
            resolver.mediator(section) for section in sorted(self.mediators, key=lambda m: m.index)
        ]
        return SystemSpec(
            treatment_kind=self.treatment.kind,
            mediators=mediators,
            outcome=resolver.outcome(self.outcome),
            covariates=self.covariates,
            confounder_view=self.confounder_view,
        )


class _NameResolver:
    """Translate spec-file names into mediator indices and covariate positions."""

    def __init__(self, spec_file: SpecFile) -> None:
        self.mediators = {mediator_name(m.index): m.index for m in spec_file.mediators}
        names = spec_file.covariates.names if spec_file.covariates else []
        self.covariates = {name: position for position, name in enumerate(names)}

    def _mediator(self, name: str) -> int:
        if name not in self.mediators:
            raise ValueError(f"unknown mediator name {name!r}; declared: {sorted(self.mediators)}")
        return self.mediators[name]

    def _covariate(self, name: str) -> int:
        if name not in self.covariates:
            declared = sorted(self.covariates)
            raise ValueError(f"unknown covariate name {name!r}; declared: {declared}")
        return self.covariates[name]

    @staticmethod
    def _split(key: str, size: int | None = 2) -> list[str]:
        parts = [part.strip() for part in key.split("*")]
        if size is not None and len(parts) != size:
            raise ValueError(f"interaction key {key!r} must name {size} variables")
        return parts

    def mediators_by_name(self, values: dict[str, float]) -> dict[int, float]:
        return {self._mediator(name): v for name, v in values.items()}

    def covariates_by_name(self, values: dict[str, float]) -> dict[int, float]:
        return {self._covariate(name): v for name, v in values.items()}

    def mediator_pairs(self, values: dict[str, float]) -> dict[tuple[int, int], float]:
        out = {}
        for key, v in values.items():
            i, j = sorted(self._mediator(part) for part in self._split(key))
            out[(i, j)] = v
        return out

    def covariate_pairs(self, values: dict[str, float]) -> dict[tuple[int, int], float]:
        out = {}
        for key, v in values.items():
            a, b = sorted(self._covariate(part) for part in self._split(key))
            out[(a, b)] = v
        return out

    def mediator_covariate_pairs(self, values: dict[str, float]) -> dict[tuple[int, int], float]:
        out = {}
        for key, v in values.items():
            first, second = self._split(key)
            if first in self.mediators:
                out[(self._mediator(first), self._covariate(second))] = v
            else:
                out[(self._mediator(second), self._covariate(first))] = v
        return out

    def higher_terms(self, values: dict[str, float]) -> dict[tuple[int, ...], float]:
        out = {}
        for key, v in values.items():
            parts = self._split(key, size=None)
            variables = [0 if part == TREATMENT_NAME else self._mediator(part) for part in parts]
            out[tuple(sorted(variables))] = v
        return out

    def mediator(self, section: MediatorSection) -> MediatorModel:
        return MediatorModel(
            index=section.index,
            gamma0=section.gamma0,
            gamma_x=section.gamma_x,
            gamma_w=self.mediators_by_name(section.gamma_w),
            gamma_xw=self.mediators_by_name(section.gamma_xw),
            gamma_ww=self.mediator_pairs(section.gamma_ww),
            gamma_c=self.covariates_by_name(section.gamma_c),
            gamma_xc=self.covariates_by_name(section.gamma_xc),
            gamma_cc=self.covariate_pairs(section.gamma_cc),
            gamma_wc=self.mediator_covariate_pairs(section.gamma_wc),
        )

    def outcome(self, section: OutcomeSection) -> OutcomeModel:
        return OutcomeModel(
            beta0=section.beta0,
            beta_x=section.beta_x,
            beta_w=self.mediators_by_name(section.beta_w),
            beta_xw=self.mediators_by_name(section.beta_xw),
            beta_ww=self.mediator_pairs(section.beta_ww),
            beta_c=self.covariates_by_name(section.beta_c),
            beta_xc=self.covariates_by_name(section.beta_xc),
            beta_cc=self.covariate_pairs(section.beta_cc),
            beta_wc=self.mediator_covariate_pairs(section.beta_wc),
            beta_higher=self.higher_terms(section.beta_higher),
        )


@dataclass(frozen=True)
class LoadedSpec:
    """Fichier validé et spécification du domaine correspondante."""

    source: str
    file: SpecFile
    system: SystemSpec


def load_spec_file(path: str | Path) -> LoadedSpec:
    """Read, validate and resolve a spec file.

    Raises:
        SpecParseError: fichier illisible, JSON invalide, version inconnue, champ ou nom
            inconnu, modèle incohérent.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SpecParseError(f"cannot read spec file {path.name}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SpecParseError(
            f"invalid JSON in {path.name}: {exc.msg}", details={"line": exc.lineno}
        ) from exc
    if isinstance(payload, dict) and payload.get("schema_version") not in (None, SCHEMA_VERSION):
        raise SpecParseError(
            f"unsupported schema_version {payload.get('schema_version')!r}",
            details={"supported": SCHEMA_VERSION},
        )
    try:
        spec_file = SpecFile.model_validate(payload)
        system = spec_file.to_system_spec()
    except ValidationError as exc:
        errors = [
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
            for err in exc.errors(include_url=False)
        ]
        raise SpecParseError(
            f"invalid spec file {path.name}: {errors[0]}", details={"errors": errors}
        ) from exc
    except ValueError as exc:
        raise SpecParseError(f"invalid spec file {path.name}: {exc}") from exc
    return LoadedSpec(source=path.name, file=spec_file, system=system)
