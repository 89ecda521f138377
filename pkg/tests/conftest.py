"""Configuration de test pour pytest avec gestion des chemins.

Ce module ajoute la racine du projet au sys.path pour résoudre les imports `logitmed` et
fournit des fixtures partagées (générateur aléatoire à graine fixe, spécifications types).
"""

import os
import sys

import numpy as np
import pytest

# Ensure project root is on sys.path so that
# imports like `from logitmed...` resolve.
CURRENT_DIR = os.path.dirname(__file__)
PROJECT_ROOT = os.path.abspath(os.path.join(CURRENT_DIR, ".."))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from tests.fakes import collapsible_spec, non_collapsible_spec  # noqa: E402


@pytest.fixture
def rng() -> np.random.Generator:
    """Générateur reproductible pour les tests aléatoires."""
    return np.random.default_rng(20240611)


@pytest.fixture
def collapsible():
    """Un médiateur, traitement continu, β_w = β_xw = 0."""
    return collapsible_spec()


@pytest.fixture
def non_collapsible():
    """Un médiateur, traitement continu, tous les couplages non nuls."""
    return non_collapsible_spec()


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    """Neutralise les variables d'environnement qui changent les settings."""
    for name in ("LOG_LEVEL", "VERIFY_TOLERANCE", "SWEEP_WORKERS", "FD_STEP"):
        monkeypatch.delenv(name, raising=False)
