"""Sous-commandes de la CLI: decompose, reduce, sensitivity, check.

Chaque commande charge le fichier de spécification, évalue la grille demandée (en parallèle
si `SWEEP_WORKERS > 1`, résultats rangés par indice de grille) et assemble un `Report`.
Avec `--verify`, chaque ligne exacte porte son résidu par rapport à l'oracle et le rapport
échoue si un résidu dépasse la tolérance.
"""

from __future__ import annotations

import argparse
import itertools
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TypeVar

import structlog

from logitmed.cli.report import Report, Scalar
from logitmed.cli.schemas import TREATMENT_NAME, LoadedSpec, load_spec_file, mediator_name
from logitmed.core.constants import TREATMENT
from logitmed.core.errors import (
    DimensionError,
    EmptySweepError,
    EnumerationLimitError,
    UsageError,
    ViewError,
)
from logitmed.core.settings import Settings
from logitmed.domain.binary import (
    beta_xw_from_relative_risks,
    beta_xw_identity_check,
    marginal_log_cpr,
)
from logitmed.domain.chain import (
    conditional_and_marginal_mix,
    exact_marginal_slope,
    taylor_reduce,
    total_log_cpr,
)
from logitmed.domain.decomp import marginal_slope, slope_bounds
from logitmed.domain.entities import OutcomeModel, SystemSpec
from logitmed.domain.intervals import Interval
from logitmed.domain.model import (
    check_confounder_consistency,
    mediator_terms,
    outcome_terms,
    single_mediator_view,
)
from logitmed.domain.report_types import DecompositionReport, MarginalizationStep
from logitmed.infra.oracle import (
    conditional_log_cpr_numeric,
    conditional_logit_numeric,
    log_cpr_numeric,
    marginal_slope_numeric,
)

log = structlog.get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

Row = tuple[str, dict[str, Scalar]]

_X = frozenset({TREATMENT})
_MAX_CONTINUOUS_MEDIATORS = 2


# --------------------------------------------------------------------------------------------
# Analyse des drapeaux
# --------------------------------------------------------------------------------------------


def parse_float_list(text: str, flag: str) -> list[float]:
    """Parse "v1,v2,..." into floats."""
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from exc
    if not values:
        raise UsageError(f"{flag}: no value given")
    if not all(math.isfinite(v) for v in values):
        raise UsageError(f"{flag}: values must be finite, got {text!r}")
    return values


def parse_keep(entries: Sequence[str], spec: SystemSpec) -> dict[int, int]:
    """Parse `--keep` entries "idx[=value]" (idx as 2 or w2, value 0/1, default 1)."""
    keep: dict[int, int] = {}
    for entry in entries:
        for item in filter(None, (part.strip() for part in entry.split(","))):
            name, sep, raw = item.partition("=")
            digits = name.removeprefix("w")
            if not digits.isdigit() or int(digits) not in spec.indices:
                raise DimensionError(f"--keep: unknown mediator {name!r}")
            if sep and raw not in ("0", "1"):
                raise UsageError(f"--keep: mediator values are 0 or 1, got {raw!r}")
            keep[int(digits)] = int(raw) if sep else 1
    return keep


def covariate_grid(entries: Sequence[str] | None, spec: SystemSpec) -> list[tuple[float, ...]]:
    """Cartesian grid over `--c name=v1,v2` values; unnamed covariates stay at the block point."""
    if not entries:
        return [spec.covariate_values]
    if spec.covariates is None:
        raise UsageError("--c given but the spec declares no covariates")
    choices = {
        name: [value]
        for name, value in zip(spec.covariates.names, spec.covariates.values, strict=True)
    }
    for entry in entries:
        name, sep, raw = entry.partition("=")
        if not sep or name not in choices:
            raise UsageError(f"--c: expected name=v1,v2 with a declared covariate, got {entry!r}")
        choices[name] = parse_float_list(raw, "--c")
    return [tuple(point) for point in itertools.product(*choices.values())]


def grid_map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    """Evaluate fn over items, concurrently when workers > 1, in grid order."""
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# --------------------------------------------------------------------------------------------
# Contexte d'exécution
# --------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class CommandContext:
    """Requête résolue: fichier, grilles, tolérance, vérification."""

    loaded: LoadedSpec
    x_grid: list[float]
    c_grid: list[tuple[float, ...]]
    tolerance: float
    verify: bool
    settings: Settings

    @property
    def spec(self) -> SystemSpec:
        """Domain spec of the loaded file."""
        return self.loaded.system

    def c_labels(self, c: Sequence[float]) -> dict[str, Scalar]:
        """Covariate values keyed `c.<name>`."""
        names = self.spec.covariates.names if self.spec.covariates else []
        return {f"c.{name}": float(v) for name, v in zip(names, c, strict=True)}

    def request(self, **extra: Scalar | list[Scalar]) -> dict[str, Scalar | list[Scalar]]:
        """Echo of the request (spec file name only, no path)."""
        echo: dict[str, Scalar | list[Scalar]] = {
            "spec": self.loaded.source,
            "treatment": self.spec.treatment_kind,
            "k": self.spec.k,
        }
        if self.spec.treatment_kind == "continuous":
            echo["x"] = list(self.x_grid)
        if self.spec.covariates is not None:
            for position, name in enumerate(self.spec.covariates.names):
                echo[f"c.{name}"] = sorted({c[position] for c in self.c_grid})
        echo.update({key: value for key, value in extra.items() if value is not None})
        echo["verify"] = self.verify
        echo["tolerance"] = self.tolerance
        return echo

    def gate(self, values: dict[str, Scalar], closed: float, oracle: Callable[[], float]) -> None:
        """Attach the oracle residual to an exact row when verifying."""
        if not self.verify:
            return
        residual = abs(closed - oracle())
        values["residual"] = residual
        values["within_tolerance"] = residual <= self.tolerance


def resolve_tolerance(flag: float | None, loaded: LoadedSpec, settings: Settings) -> float:
    """First tolerance set among flag, file options, settings; must be finite and positive."""
    candidates = (flag, loaded.file.options.tolerance, settings.VERIFY_TOLERANCE)
    tolerance = next(value for value in candidates if value is not None)
    if not (math.isfinite(tolerance) and tolerance > 0.0):
        raise UsageError(f"--tolerance: expected a finite positive number, got {tolerance!r}")
    return tolerance


def build_context(args: argparse.Namespace, settings: Settings) -> CommandContext:
    """Load the spec file and resolve grids and tolerance from flags, file options, settings."""
    loaded = load_spec_file(args.spec)
    spec = loaded.system
    x_flag = getattr(args, "x", None)
    if x_flag and spec.treatment_kind == "binary":
        raise UsageError("--x applies to a continuous treatment; a binary one uses 0 and 1")
    if x_flag:
        x_grid = parse_float_list(x_flag, "--x")
    else:
        x_grid = list(loaded.file.treatment.points or [0.0])
    tolerance = resolve_tolerance(getattr(args, "tolerance", None), loaded, settings)
    verify = bool(getattr(args, "verify", False))
    if verify and spec.k > settings.MAX_ENUMERATION_MEDIATORS:
        raise EnumerationLimitError(
            f"--verify enumerates 2^(k+1) cells; k={spec.k} exceeds "
            f"{settings.MAX_ENUMERATION_MEDIATORS}"
        )
    return CommandContext(
        loaded=loaded,
        x_grid=x_grid,
        c_grid=covariate_grid(getattr(args, "c", None), spec),
        tolerance=tolerance,
        verify=verify,
        settings=settings,
    )


def _finish(report: Report) -> Report:
    breaches = [row for row in report.rows if row.values.get("within_tolerance") is False]
    if breaches:
        report.ok = False
        log.error(
            "verify_tolerance_breach",
            command=report.command,
            rows=len(breaches),
            worst=max(float(row.values["residual"]) for row in breaches),  # type: ignore[arg-type]
        )
    return report


def _add_rows(report: Report, rows: Iterable[Row | list[Row]]) -> None:
    for item in rows:
        for kind, values in item if isinstance(item, list) else [item]:
            report.add(kind, values)


# --------------------------------------------------------------------------------------------
# Lignes communes
# --------------------------------------------------------------------------------------------


def _effect_values(result: DecompositionReport) -> dict[str, Scalar]:
    values: dict[str, Scalar] = {"direct": result.direct, "interaction": result.interaction}
    for j, value in sorted(result.indirect.items()):
        values[f"indirect.{mediator_name(j)}"] = value
    values["total"] = result.total
    if result.closed_form_total is not None:
        values["closed_form_total"] = result.closed_form_total
    return values


def _variable_names(variables: Iterable[int]) -> str:
    return "*".join(TREATMENT_NAME if v == TREATMENT else mediator_name(v) for v in variables)


def starred_values(outcome: OutcomeModel) -> dict[str, Scalar]:
    """Reduced-outcome coefficients keyed by spec-file names."""
    values: dict[str, Scalar] = {"beta0": outcome.beta0, "beta_x": outcome.beta_x}
    for j, value in sorted(outcome.beta_w.items()):
        values[f"beta_w.{mediator_name(j)}"] = value
    for j, value in sorted(outcome.beta_xw.items()):
        values[f"beta_xw.{mediator_name(j)}"] = value
    for pair, value in sorted(outcome.beta_ww.items()):
        values[f"beta_ww.{_variable_names(pair)}"] = value
    for key, value in sorted(outcome.beta_higher.items()):
        values[f"beta_higher.{_variable_names(key)}"] = value
    return values


def _step_row(ctx: CommandContext, step: MarginalizationStep, c: Sequence[float]) -> Row:
    values: dict[str, Scalar] = {"removed": mediator_name(step.removed_index)}
    values.update(ctx.c_labels(c))
    values["exact"] = step.exact
    values.update(starred_values(step.starred))
    return "step", values


# --------------------------------------------------------------------------------------------
# decompose
# --------------------------------------------------------------------------------------------


def _slope_row(ctx: CommandContext, point: tuple[float, tuple[float, ...]]) -> Row:
    x, c = point
    spec = ctx.spec
    values: dict[str, Scalar] = {"x": x}
    values.update(ctx.c_labels(c))
    if spec.k == 1:
        result = marginal_slope(spec, x, c)
        kind = "slope"
        values.update(
            direct=result.direct,
            interaction=result.interaction,
            indirect=result.indirect,
            covariate_treatment=result.covariate_treatment,
            total=result.total,
            delta_y=result.delta_y,
            delta_w=result.delta_w,
        )
        total = result.total
    elif spec.k <= _MAX_CONTINUOUS_MEDIATORS:
        kind = "marginal_slope"
        total = exact_marginal_slope(spec, x, c)
        values["total"] = total
    else:
        raise ViewError(
            f"continuous decomposition supports at most two mediators, got {spec.k}; "
            "use reduce --taylor-x0 for an approximation"
        )
    ctx.gate(
        values, total, lambda: marginal_slope_numeric(spec, x, c, h=ctx.settings.FD_STEP)
    )
    return kind, values


def _cpr_row(ctx: CommandContext, c: tuple[float, ...]) -> Row:
    spec = ctx.spec
    values: dict[str, Scalar] = ctx.c_labels(c)
    if spec.k == 1:
        result = marginal_log_cpr(spec, c)
        kind = "cpr"
        values.update(result.model_dump())
        total = result.total
    else:
        effect = total_log_cpr(spec, c, tolerance=ctx.settings.CROSS_CHECK_TOLERANCE)
        kind = "effect"
        values.update(_effect_values(effect))
        total = effect.total
    ctx.gate(values, total, lambda: log_cpr_numeric(spec, c))
    return kind, values


def run_decompose(args: argparse.Namespace, settings: Settings) -> Report:
    """Decompose the marginal effect over the x and covariate grids."""
    ctx = build_context(args, settings)
    report = Report(command="decompose", request=ctx.request())
    workers = settings.SWEEP_WORKERS
    if ctx.spec.treatment_kind == "continuous":
        points = [(x, c) for c in ctx.c_grid for x in ctx.x_grid]
        rows = grid_map(lambda p: _slope_row(ctx, p), points, workers)
    else:
        rows = grid_map(lambda c: _cpr_row(ctx, c), ctx.c_grid, workers)
    _add_rows(report, rows)
    log.info("decompose_done", spec=ctx.loaded.source, rows=len(report.rows))
    return _finish(report)


# --------------------------------------------------------------------------------------------
# reduce
# --------------------------------------------------------------------------------------------


def _binary_reduction_rows(
    ctx: CommandContext, keep: dict[int, int], c: tuple[float, ...]
) -> list[Row]:
    spec = ctx.spec
    if keep:
        result = conditional_and_marginal_mix(spec, keep, c)
    else:
        result = total_log_cpr(spec, c, tolerance=ctx.settings.CROSS_CHECK_TOLERANCE)
    rows = [_step_row(ctx, step, c) for step in result.steps]
    values: dict[str, Scalar] = ctx.c_labels(c)
    values["exact"] = True
    values.update(_effect_values(result))
    if keep:
        ctx.gate(values, result.total, lambda: conditional_log_cpr_numeric(spec, keep, c))
    else:
        ctx.gate(values, result.total, lambda: log_cpr_numeric(spec, c))
    rows.append(("effect", values))
    return rows


def _taylor_rows(ctx: CommandContext, x0: float, c: tuple[float, ...]) -> list[Row]:
    spec = ctx.spec
    reduced, model = taylor_reduce(spec, x0, c)
    outer = reduced.innermost
    values: dict[str, Scalar] = {"removed": mediator_name(spec.innermost)}
    values.update(ctx.c_labels(c))
    values.update(exact=False, x0=x0)
    values.update(model.model_dump(exclude={"x0"}))

    def _anchoring() -> float:
        return max(
            abs(model.logit(x0, w) - conditional_logit_numeric(spec, x0, c, {outer: w}))
            for w in (0, 1)
        )

    if ctx.verify:
        residual = _anchoring()
        values["residual"] = residual
        values["within_tolerance"] = residual <= ctx.tolerance
    rows: list[Row] = [("taylor", values)]
    for x in ctx.x_grid:
        result = marginal_slope(reduced, x)
        row: dict[str, Scalar] = {"x": x}
        row.update(ctx.c_labels(c))
        row.update(
            exact=False,
            x0=x0,
            direct=result.direct,
            interaction=result.interaction,
            indirect=result.indirect,
            total=result.total,
        )
        rows.append(("approx_slope", row))
    return rows


def run_reduce(args: argparse.Namespace, settings: Settings) -> Report:
    """Marginalize the mediator chain step by step and report the resulting effect."""
    ctx = build_context(args, settings)
    spec = ctx.spec
    workers = settings.SWEEP_WORKERS
    if spec.treatment_kind == "binary":
        if args.taylor_x0 is not None:
            raise UsageError("--taylor-x0 applies to a continuous treatment")
        keep = parse_keep(args.keep or [], spec)
        if spec.k < 2:  # noqa: PLR2004
            raise DimensionError(f"reduce needs at least two mediators, got {spec.k}")
        keep_echo = [f"{mediator_name(j)}={v}" for j, v in sorted(keep.items())] or None
        report = Report(command="reduce", request=ctx.request(keep=keep_echo))
        rows = grid_map(lambda c: _binary_reduction_rows(ctx, keep, c), ctx.c_grid, workers)
    else:
        if args.keep:
            raise UsageError("--keep applies to a binary treatment")
        x0 = args.taylor_x0 if args.taylor_x0 is not None else ctx.loaded.file.options.taylor_x0
        if x0 is None:
            raise UsageError("continuous treatment: give --taylor-x0 or options.taylor_x0")
        report = Report(command="reduce", request=ctx.request(taylor_x0=x0))
        rows = grid_map(lambda c: _taylor_rows(ctx, x0, c), ctx.c_grid, workers)
    _add_rows(report, rows)
    log.info("reduce_done", spec=ctx.loaded.source, rows=len(report.rows))
    return _finish(report)


# --------------------------------------------------------------------------------------------
# sensitivity
# --------------------------------------------------------------------------------------------


def _swept(flag: str | None, name: str, option: list[float]) -> list[float]:
    return parse_float_list(flag, name) if flag else list(option)


def with_coefficients(
    spec: SystemSpec, beta_w: float, beta_xw: float, gamma_x: float
) -> SystemSpec:
    """Single-mediator spec with β_w, β_xw, γ_x replaced."""
    j = spec.innermost
    outcome = spec.outcome.model_copy(
        update={
            "beta_w": {**spec.outcome.beta_w, j: beta_w},
            "beta_xw": {**spec.outcome.beta_xw, j: beta_xw},
        }
    )
    mediator = spec.mediators[0].model_copy(update={"gamma_x": gamma_x})
    return spec.model_copy(update={"outcome": outcome, "mediators": [mediator]})


def _sweep_row(
    ctx: CommandContext, point: tuple[tuple[float, float, float], tuple[float, ...], float]
) -> Row:
    (beta_w, beta_xw, gamma_x), c, x = point
    variant = with_coefficients(ctx.spec, beta_w, beta_xw, gamma_x)
    values: dict[str, Scalar] = {"beta_w": beta_w, "beta_xw": beta_xw, "gamma_x": gamma_x}
    if variant.treatment_kind == "continuous":
        values["x"] = x
        values.update(ctx.c_labels(c))
        result = marginal_slope(variant, x, c)
        values.update(
            direct=result.direct,
            interaction=result.interaction,
            indirect=result.indirect,
            covariate_treatment=result.covariate_treatment,
            total=result.total,
        )
        ctx.gate(
            values,
            result.total,
            lambda: marginal_slope_numeric(variant, x, c, h=ctx.settings.FD_STEP),
        )
    else:
        values.update(ctx.c_labels(c))
        cpr = marginal_log_cpr(variant, c)
        values.update(cpr.model_dump(exclude={"beta_xw"}))
        ctx.gate(values, cpr.total, lambda: log_cpr_numeric(variant, c))
    return "sweep", values


def _bound(
    option: tuple[float, float] | None, swept: list[float], point: float, shift: float
) -> Interval:
    if option is not None:
        base = Interval.coerce(option)
    elif swept:
        base = Interval.hull(swept)
    else:
        base = Interval.coerce(point)
    return base + Interval(shift, shift)


def run_sensitivity(args: argparse.Namespace, settings: Settings) -> Report:
    """Sweep unobserved coefficients and bound the marginal slope."""
    ctx = build_context(args, settings)
    spec = ctx.spec
    if spec.k != 1:
        raise ViewError(f"sensitivity analysis needs exactly one mediator, got {spec.k}")
    options = ctx.loaded.file.options
    sweep_w = _swept(args.sweep_beta_w, "--sweep-beta-w", options.sweep.beta_w)
    sweep_xw = _swept(args.sweep_beta_xw, "--sweep-beta-xw", options.sweep.beta_xw)
    sweep_gx = _swept(args.sweep_gamma_x, "--sweep-gamma-x", options.sweep.gamma_x)
    swept = bool(sweep_w or sweep_xw or sweep_gx)
    with_bounds = spec.treatment_kind == "continuous" and (swept or options.bounds is not None)
    if not swept and not with_bounds:
        raise EmptySweepError(
            "nothing to sweep: give --sweep-beta-w/--sweep-beta-xw/--sweep-gamma-x, "
            "options.sweep or (continuous treatment) options.bounds"
        )

    j = spec.innermost
    current = (
        spec.outcome.beta_w.get(j, 0.0),
        spec.outcome.beta_xw.get(j, 0.0),
        spec.mediators[0].gamma_x,
    )
    report = Report(
        command="sensitivity",
        request=ctx.request(
            sweep_beta_w=sweep_w or None,
            sweep_beta_xw=sweep_xw or None,
            sweep_gamma_x=sweep_gx or None,
        ),
    )
    if swept:
        combos = list(
            itertools.product(
                sweep_w or [current[0]], sweep_xw or [current[1]], sweep_gx or [current[2]]
            )
        )
        xs = ctx.x_grid if spec.treatment_kind == "continuous" else [0.0]
        points = [(combo, c, x) for combo in combos for c in ctx.c_grid for x in xs]
        _add_rows(report, grid_map(lambda p: _sweep_row(ctx, p), points, settings.SWEEP_WORKERS))

    if with_bounds:
        bounds_option = options.bounds
        for c in ctx.c_grid:
            context_x = outcome_terms(spec.outcome, c, include_beta_x=False).get(_X, 0.0)
            context_gx = mediator_terms(spec.mediators[0], c, include_gamma_x=False).get(_X, 0.0)
            bounds = slope_bounds(
                _bound(bounds_option and bounds_option.beta_x, [], spec.outcome.beta_x, context_x),
                _bound(bounds_option and bounds_option.beta_xw, sweep_xw, current[1], 0.0),
                _bound(bounds_option and bounds_option.gamma_x, sweep_gx, current[2], context_gx),
            )
            totals = [
                float(row.values["total"])  # type: ignore[arg-type]
                for row in report.rows
                if row.kind == "sweep" and _same_c(ctx, row.values, c)
            ]
            values: dict[str, Scalar] = ctx.c_labels(c)
            values.update(lower=bounds.lower, upper=bounds.upper)
            values.update({f"assume.{name}": text for name, text in bounds.assumptions.items()})
            values["contains_sweep"] = all(bounds.contains(t) for t in totals)
            report.add("bounds", values)
    log.info("sensitivity_done", spec=ctx.loaded.source, rows=len(report.rows))
    return _finish(report)


def _same_c(ctx: CommandContext, values: Mapping[str, Scalar], c: Sequence[float]) -> bool:
    return all(values.get(key) == value for key, value in ctx.c_labels(c).items())


# --------------------------------------------------------------------------------------------
# check
# --------------------------------------------------------------------------------------------


def run_check(args: argparse.Namespace, settings: Settings) -> Report:
    """Audit δ_w = γ_x and the four-RR identity on β_xw."""
    loaded = load_spec_file(args.spec)
    spec = loaded.system
    report = Report(
        command="check",
        request={"spec": loaded.source, "treatment": spec.treatment_kind, "k": spec.k},
    )
    consistency = check_confounder_consistency(spec)
    report.add("consistency", consistency.model_dump())
    ok = consistency.consistent

    if spec.treatment_kind == "binary" and spec.k >= 1:
        outers = spec.indices[1:]
        for assignment in itertools.product((0, 1), repeat=len(outers)):
            outer = dict(zip(outers, assignment, strict=True))
            values: dict[str, Scalar] = {
                f"outer.{mediator_name(j)}": v for j, v in outer.items()
            }
            effective = single_mediator_view(spec, outer=outer).treatment_interaction()
            four_rr = beta_xw_from_relative_risks(spec, outer=outer)
            holds = beta_xw_identity_check(
                spec, outer=outer, tolerance=settings.CROSS_CHECK_TOLERANCE
            )
            values.update(
                applicable=True,
                beta_xw=effective,
                four_rr=four_rr,
                residual=abs(four_rr - effective),
                holds=holds,
            )
            report.add("identity", values)
            ok = ok and holds
    else:
        report.add("identity", {"applicable": False})

    report.ok = ok
    if not ok:
        log.error("check_failed", spec=loaded.source)
    return report


COMMANDS: dict[str, Callable[[argparse.Namespace, Settings], Report]] = {
    "decompose": run_decompose,
    "reduce": run_reduce,
    "sensitivity": run_sensitivity,
    "check": run_check,
}
