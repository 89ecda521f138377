"""Point d'entrée de la CLI `logitmed`.

Usage:
  logitmed decompose --spec model.json --x=-1,0,1 [--c age=30,40] [--verify] [--json]
  logitmed reduce --spec chain.json [--keep 2=1] [--taylor-x0 0.5] [--verify]
  logitmed sensitivity --spec model.json --sweep-gamma-x=-1,0,1
  logitmed check --spec model.json

Le rapport est écrit sur stdout (table ou JSON), les logs et erreurs sur stderr.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from logitmed import __version__
from logitmed.cli.commands import COMMANDS
from logitmed.cli.report import render_error, render_json, render_table
from logitmed.core.constants import EXIT_OK, EXIT_TOLERANCE_BREACH
from logitmed.core.errors import LogitMedError, handle_error
from logitmed.core.logging import setup_logging
from logitmed.core.settings import get_settings


def _add_common(parser: argparse.ArgumentParser, *, grid: bool = True) -> None:
    parser.add_argument("--spec", required=True, help="Path to the JSON spec file")
    parser.add_argument("--json", action="store_true", help="Print the full report as JSON")
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    if not grid:
        return
    parser.add_argument("--x", default=None, help="Treatment grid, e.g. --x=-1,0,1")
    parser.add_argument(
        "--c",
        action="append",
        default=None,
        metavar="NAME=V1,V2",
        help="Covariate grid (repeatable); others stay at the spec values",
    )
    parser.add_argument("--verify", action="store_true", help="Check every row against the oracle")
    parser.add_argument("--tolerance", type=float, default=None, help="Verify tolerance")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with its four subcommands."""
    parser = argparse.ArgumentParser(prog="logitmed", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"logitmed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    decompose = sub.add_parser("decompose", help="Decompose the marginal treatment effect")
    _add_common(decompose)

    reduce = sub.add_parser("reduce", help="Marginalize mediators step by step")
    _add_common(reduce)
    reduce.add_argument(
        "--keep",
        action="append",
        default=None,
        metavar="IDX[=VAL]",
        help="Mediators to condition on (value defaults to 1); must be an ancestral set",
    )
    reduce.add_argument("--taylor-x0", type=float, default=None, help="Taylor expansion point")

    sensitivity = sub.add_parser("sensitivity", help="Sweep unobserved coefficients")
    _add_common(sensitivity)
    sensitivity.add_argument("--sweep-beta-w", default=None, help="Values of beta_w")
    sensitivity.add_argument("--sweep-beta-xw", default=None, help="Values of beta_xw")
    sensitivity.add_argument("--sweep-gamma-x", default=None, help="Values of gamma_x")

    check = sub.add_parser("check", help="Audit confounder consistency and the beta_xw identity")
    _add_common(check, grid=False)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return the process exit code."""
    args = build_parser().parse_args(argv)
    settings = get_settings()
    setup_logging(args.log_level or settings.LOG_LEVEL)
    try:
        report = COMMANDS[args.command](args, settings)
    except LogitMedError as exc:
        print(f"logitmed: error: {exc.message}", file=sys.stderr)
        if args.json:
            sys.stdout.write(render_error(exc))
        return handle_error(exc)
    sys.stdout.write(render_json(report) if args.json else render_table(report))
    return EXIT_OK if report.ok else EXIT_TOLERANCE_BREACH


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
