"""
Core: composants transverses (settings, logging, constantes, erreurs).

Expose les primitives utilisées par le domaine, l'oracle et la CLI.
"""
