"""Interface en ligne de commande: fichier de spécification, sous-commandes, rapports."""
