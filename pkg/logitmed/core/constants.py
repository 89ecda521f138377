"""Constantes centrales de l'application.

Ce module contient les constantes qui font partie du contrat numérique (tolérances, pas de
différences finies), les codes de sortie de la CLI et la version du format de fichier.
"""

# Format du fichier de spécification
SCHEMA_VERSION = "1"

# Codes de sortie de la CLI
EXIT_OK = 0
EXIT_PARSE_ERROR = 2
EXIT_DIMENSION_ERROR = 3
EXIT_TOLERANCE_BREACH = 4
EXIT_NON_ANCESTRAL = 5
EXIT_TAYLOR_SCOPE = 6
EXIT_EMPTY_SWEEP = 7

# Tolérances
CONSISTENCY_TOLERANCE = 1e-12
IDENTITY_TOLERANCE = 1e-9
DEFAULT_VERIFY_TOLERANCE = 1e-6

# Différences finies centrées
DEFAULT_FD_STEP = 1e-5

# Oracle: 2^(k+1) cellules
MAX_ENUMERATION_MEDIATORS = 20

# Le développement de Taylor n'est défini que pour deux médiateurs
TAYLOR_MEDIATORS = 2

# Rendu des nombres: 17 chiffres significatifs (relecture exacte)
FLOAT_FORMAT = ".17g"

# Variable 0 du polynôme binaire = traitement
TREATMENT = 0
