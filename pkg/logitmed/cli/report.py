"""Rapport unique de la CLI et ses deux rendus (table ligne à ligne, JSON).

La sortie est déterministe: aucun horodatage, version uniquement dans l'en-tête de la table,
nombres écrits avec 17 chiffres significatifs.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from logitmed import __version__
from logitmed.core.constants import FLOAT_FORMAT, SCHEMA_VERSION
from logitmed.core.errors import LogitMedError, create_error_envelope

Scalar = float | int | bool | str | None


class ReportRow(BaseModel):
    """Une ligne du rapport: un type et des couples clé/valeur ordonnés."""

    model_config = ConfigDict(frozen=True)

    kind: str
    values: dict[str, Scalar] = Field(default_factory=dict)


class Report(BaseModel):
    """Rapport d'une sous-commande: écho de la requête, lignes, verdict."""

    command: str
    request: dict[str, Scalar | list[Scalar]] = Field(default_factory=dict)
    rows: list[ReportRow] = Field(default_factory=list)
    ok: bool = True

    def add(self, kind: str, values: Mapping[str, Scalar]) -> ReportRow:
        """Append a row and return it."""
        row = ReportRow(kind=kind, values=dict(values))
        self.rows.append(row)
        return row


def format_value(value: Any) -> str:
    """Render a scalar for the table."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, float):
        # -0.0 is printed as 0
        return format(value + 0.0, FLOAT_FORMAT)
    if isinstance(value, list):
        return ",".join(format_value(v) for v in value)
    return str(value)


def render_table(report: Report) -> str:
    """Line-oriented table: header, request echo, one line per row."""
    lines = [f"# logitmed {__version__} schema={SCHEMA_VERSION} command={report.command}"]
    request = "\t".join(f"{key}={format_value(v)}" for key, v in report.request.items())
    lines.append(f"request\t{request}" if request else "request")
    for row in report.rows:
        fields = "\t".join(f"{key}={format_value(v)}" for key, v in row.values.items())
        lines.append(f"{row.kind}\t{fields}" if fields else row.kind)
    lines.append(f"status\tok={format_value(report.ok)}")
    return "\n".join(lines) + "\n"


def render_json(report: Report) -> str:
    """Full report as JSON (no header, no version)."""
    return json.dumps(report.model_dump(mode="json"), indent=2, allow_nan=False) + "\n"


def render_error(exc: LogitMedError) -> str:
    """Error envelope as JSON, written on stdout under `--json`."""
    return json.dumps(create_error_envelope(exc), indent=2) + "\n"
