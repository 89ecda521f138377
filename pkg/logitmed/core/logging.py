"""Configuration de logging basée sur structlog.

Objectif du module
------------------
- Fournir des logs structurés lisibles via `structlog.dev.ConsoleRenderer`
  avec métadonnées (niveau, timestamp).
- Écrire sur stderr: stdout est réservé au rapport déterministe de la CLI.
"""

import logging
import sys

import structlog


def setup_logging(level: str = "WARNING") -> None:
    """Configure structlog pour produire des logs filtrables par niveau.

    Processors principaux: timestamp ISO, niveau, stackinfo, exceptions formattées,
    rendu console.
    """
    numeric_level = logging.getLevelNamesMapping().get(level.upper(), logging.WARNING)
    timestamper = structlog.processors.TimeStamper(fmt="ISO")
    structlog.configure(
        processors=[
            timestamper,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
