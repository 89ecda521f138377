"""Paramètres marginaux et conditionnels des régressions logistiques à médiateurs binaires."""

__version__ = "0.1.0"
