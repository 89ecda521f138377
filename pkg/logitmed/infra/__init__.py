"""Oracle de vérification par énumération exacte."""
