"""Calculs purs: modèles conditionnels, décompositions, réductions de chaîne."""
