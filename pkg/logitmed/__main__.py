"""Exécution via `python -m logitmed`."""

import sys

from logitmed.cli.main import main

sys.exit(main())
