"""Générateurs de spécifications pour les tests.

Ce module fournit des spécifications fixes (cas d'ancrage) et des tirages aléatoires
reproductibles (`numpy.random.Generator`) de modèles logistiques hiérarchiques du second ordre.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

from logitmed.domain.entities import (
    CovariateBlock,
    MediatorModel,
    OutcomeModel,
    SystemSpec,
    TreatmentKind,
)

GOLDEN_DIR = Path(__file__).parent / "golden"


def _draw(rng: np.random.Generator, scale: float) -> float:
    return float(rng.uniform(-scale, scale))


def random_covariates(rng: np.random.Generator, p: int) -> CovariateBlock | None:
    """Bloc c1..cp tiré dans [-1, 1]."""
    if p == 0:
        return None
    return CovariateBlock(
        names=[f"c{a + 1}" for a in range(p)],
        values=[_draw(rng, 1.0) for _ in range(p)],
    )


def random_mediator(
    rng: np.random.Generator,
    index: int,
    k: int,
    p: int = 0,
    scale: float = 1.0,
    *,
    second_order: bool = True,
) -> MediatorModel:
    """Modèle du médiateur `index` dépendant de tous les médiateurs externes."""
    outer = list(range(index + 1, k + 1))
    covariates = list(range(p))
    return MediatorModel(
        index=index,
        gamma0=_draw(rng, scale),
        gamma_x=_draw(rng, scale),
        gamma_w={j: _draw(rng, scale) for j in outer},
        gamma_xw={j: _draw(rng, scale) for j in outer} if second_order else {},
        gamma_ww=(
            {pair: _draw(rng, scale) for pair in itertools.combinations(outer, 2)}
            if second_order
            else {}
        ),
        gamma_c={a: _draw(rng, scale) for a in covariates},
        gamma_xc={a: _draw(rng, scale) for a in covariates} if second_order else {},
        gamma_cc=(
            {pair: _draw(rng, scale) for pair in itertools.combinations(covariates, 2)}
            if second_order
            else {}
        ),
        gamma_wc=(
            {(j, a): _draw(rng, scale) for j in outer for a in covariates} if second_order else {}
        ),
    )


def random_outcome(
    rng: np.random.Generator,
    k: int,
    p: int = 0,
    scale: float = 1.0,
    *,
    second_order: bool = True,
) -> OutcomeModel:
    """Modèle de la réponse avec tous les termes du second ordre."""
    mediators = list(range(1, k + 1))
    covariates = list(range(p))
    return OutcomeModel(
        beta0=_draw(rng, scale),
        beta_x=_draw(rng, scale),
        beta_w={j: _draw(rng, scale) for j in mediators},
        beta_xw={j: _draw(rng, scale) for j in mediators},
        beta_ww=(
            {pair: _draw(rng, scale) for pair in itertools.combinations(mediators, 2)}
            if second_order
            else {}
        ),
        beta_c={a: _draw(rng, scale) for a in covariates},
        beta_xc={a: _draw(rng, scale) for a in covariates} if second_order else {},
        beta_cc=(
            {pair: _draw(rng, scale) for pair in itertools.combinations(covariates, 2)}
            if second_order
            else {}
        ),
        beta_wc=(
            {(j, a): _draw(rng, scale) for j in mediators for a in covariates}
            if second_order
            else {}
        ),
    )


def random_spec(
    rng: np.random.Generator,
    k: int,
    kind: TreatmentKind = "binary",
    p: int = 0,
    scale: float = 1.0,
    *,
    second_order: bool = True,
) -> SystemSpec:
    """Système complet: k médiateurs en chaîne, p covariables."""
    return SystemSpec(
        treatment_kind=kind,
        mediators=[
            random_mediator(rng, j, k, p, scale, second_order=second_order)
            for j in range(1, k + 1)
        ],
        outcome=random_outcome(rng, k, p, scale, second_order=second_order),
        covariates=random_covariates(rng, p),
    )


def collapsible_spec() -> SystemSpec:
    """Un médiateur, β_w = β_xw = 0: l'effet marginal vaut β_x."""
    return SystemSpec(
        treatment_kind="continuous",
        mediators=[MediatorModel(index=1, gamma0=0.2, gamma_x=0.8)],
        outcome=OutcomeModel(beta0=-0.3, beta_x=0.5),
    )


def non_collapsible_spec() -> SystemSpec:
    """Un médiateur, traitement continu, couplages non nuls."""
    return SystemSpec(
        treatment_kind="continuous",
        mediators=[MediatorModel(index=1, gamma0=0.1, gamma_x=0.9)],
        outcome=OutcomeModel(beta0=-0.4, beta_x=0.7, beta_w={1: 1.2}, beta_xw={1: -0.5}),
    )


def zero_coupling_chain() -> SystemSpec:
    """Deux médiateurs, W₁ sans effet sur Y: la réduction doit simplement retirer W₁."""
    return SystemSpec(
        treatment_kind="binary",
        mediators=[
            MediatorModel(index=1, gamma0=0.3, gamma_x=-0.6, gamma_w={2: 0.9}, gamma_xw={2: 0.4}),
            MediatorModel(index=2, gamma0=-0.2, gamma_x=1.1),
        ],
        outcome=OutcomeModel(beta0=0.25, beta_x=0.5, beta_w={2: 0.75}, beta_xw={2: -0.25}),
    )


def single_path_chain() -> SystemSpec:
    """Deux médiateurs binaires; seul le chemin X → W₂ → Y est ouvert."""
    return SystemSpec(
        treatment_kind="binary",
        mediators=[
            MediatorModel(index=1, gamma0=0.4, gamma_w={2: 0.7}),
            MediatorModel(index=2, gamma0=-0.3, gamma_x=1.3),
        ],
        outcome=OutcomeModel(beta0=-0.1, beta_x=0.6, beta_w={2: 1.1}),
    )
