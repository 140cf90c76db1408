# cli.py
"""
swarmx command line: run campaigns, aggregate them, explain them, plot them.

Exit codes: 0 success, 1 data/runtime failure, 2 usage/spec failure.
"""
import logging
import os
import time
from pathlib import Path
from typing import List, Literal, Optional

import click
import pandas as pd
from click.core import ParameterSource
from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError, field_validator

from bench_functions import SUPPORTED_FIDS
from campaign import (
    AGGREGATE_COLUMNS,
    ConfigGrid,
    aggregate,
    compare_topologies,
    execute_campaign,
    read_runs_csv,
    sample_grid,
    write_aggregate_csv,
    write_runs_csv,
)
from config import DATABASE_URL, setup_logging
from errors import ConfigurationError, IncompleteGridError, SwarmxError
from swarm_plot import render_swarm_svg
from topology import Topology
from xplain import (
    ATTRIBUTION_COLUMNS,
    attribution_table,
    build_feature_matrix,
    fit_surrogate,
    modal_class_importance,
    shapley_exact_all,
    shapley_surrogate_all,
    surrogate_report,
    swarm_plot_data,
)

logger = logging.getLogger("swarmx.cli")

EXIT_FAILURE = 1
EXIT_USAGE = 2


# ------------------------------
# Campaign spec
# ------------------------------
class CampaignSpec(BaseModel):
    topology: Topology
    fids: List[int] = Field(default_factory=lambda: list(SUPPORTED_FIDS))
    dim: int = Field(2, ge=1)
    budget: int = Field(100, ge=1)
    instances: int = Field(5, ge=1)
    runs: int = Field(5, ge=1)
    grid: Literal["full", "reduced"] = "full"
    output_dir: Path

    @field_validator("topology", mode="before")
    @classmethod
    def _parse_topology(cls, value):
        try:
            return Topology.parse(value)
        except ConfigurationError as exc:
            raise ValueError(str(exc)) from None

    @field_validator("fids", mode="before")
    @classmethod
    def _parse_fids(cls, value):
        if isinstance(value, str):
            value = [v for v in value.replace(" ", "").split(",") if v]
        fids = [int(v) for v in value]
        unsupported = sorted(set(fids) - set(SUPPORTED_FIDS))
        if unsupported:
            raise ValueError(f"unsupported function id(s) {unsupported}; supported: {list(SUPPORTED_FIDS)}")
        if not fids:
            raise ValueError("at least one function id is required")
        return fids

    @field_validator("output_dir")
    @classmethod
    def _writable(cls, value: Path):
        try:
            value.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ValueError(f"output directory {value} cannot be created: {exc}") from None
        if not os.access(value, os.W_OK):
            raise ValueError(f"output directory {value} is not writable")
        return value

    def config_grid(self) -> ConfigGrid:
        return ConfigGrid.reduced() if self.grid == "reduced" else ConfigGrid()


def _fail(message: str, code: int = EXIT_FAILURE):
    click.echo(f"error: {message}", err=True)
    raise click.exceptions.Exit(code)


def _apply_config_file(ctx: click.Context, params: dict, path: Optional[str]) -> dict:
    """Values from a flat key=value file fill every option the command line left at its default."""
    if not path:
        return params
    file_values = {k.strip().lower().replace("-", "_"): v for k, v in dotenv_values(path).items() if v is not None}
    merged = dict(params)
    for name, value in file_values.items():
        if name not in merged:
            raise click.UsageError(f"unknown key {name!r} in config file {path}")
        if ctx.get_parameter_source(name) in (ParameterSource.DEFAULT, None):
            merged[name] = value
    return merged


@click.group()
@click.option("--log-level", default=None, help="Logging level (default SWARMX_LOG_LEVEL or INFO).")
def cli(log_level):
    """Particle swarm topology campaigns, AOCC statistics and Shapley explanations."""
    setup_logging(level=log_level.upper() if log_level else None)


# ------------------------------
# run
# ------------------------------
@cli.command("run")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Flat key=value campaign file; flags given on the command line win.")
@click.option("--topology", default=None, help="star | ring | vonneumann")
@click.option("--fids", default=",".join(str(f) for f in SUPPORTED_FIDS), show_default=True)
@click.option("--dim", default=2, show_default=True)
@click.option("--budget", default=100, show_default=True)
@click.option("--instances", default=5, show_default=True)
@click.option("--runs", default=5, show_default=True)
@click.option("--grid", default="full", show_default=True, help="full | reduced")
@click.option("--out", default=None, help="Output directory for runs.csv.")
@click.option("--workers", default=None, help="Parallel workers (default SWARMX_WORKERS).")
@click.option("--sample", default=None, help="Run only this many randomly sampled grid configurations.")
@click.option("--sample-seed", default=0, show_default=True)
@click.option("--db", default=None, help="SQLAlchemy URL to also store the records in.")
@click.pass_context
def cmd_run(ctx, config_file, **params):
    """Run one topology's campaign and write runs.csv."""
    params = _apply_config_file(ctx, params, config_file)
    if params["topology"] is None:
        raise click.UsageError("--topology is required (star, ring or vonneumann)")
    if params["out"] is None:
        raise click.UsageError("--out is required")
    try:
        spec = CampaignSpec(
            topology=params["topology"], fids=params["fids"], dim=params["dim"], budget=params["budget"],
            instances=params["instances"], runs=params["runs"], grid=params["grid"], output_dir=params["out"],
        )
        workers = int(params["workers"]) if params["workers"] not in (None, "") else None
        sample = int(params["sample"]) if params["sample"] not in (None, "") else None
        grid = spec.config_grid()
        configs = sample_grid(grid, sample, int(params["sample_seed"])) if sample else None
    except (ValidationError, ValueError) as exc:
        _fail(f"invalid campaign spec: {exc}", EXIT_USAGE)

    started = time.perf_counter()
    try:
        records = execute_campaign(
            spec.topology, grid=grid, fids=spec.fids, iids=range(1, spec.instances + 1),
            runs_per_instance=spec.runs, budget=spec.budget, dim=spec.dim, workers=workers, configs=configs,
        )
        path = write_runs_csv(records, spec.output_dir / "runs.csv")
        db_url = params["db"] or DATABASE_URL
        if db_url:
            from db_models import save_runs
            save_runs(records, db_url)
    except SwarmxError as exc:
        _fail(str(exc))
    elapsed = time.perf_counter() - started
    click.echo(f"{len(records)} records written to {path} in {elapsed:.1f}s")


# ------------------------------
# stats
# ------------------------------
@cli.command("stats")
@click.option("--runs", "runs_csv", required=True, type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--grid", default=None, help="full | reduced: also require every grid configuration.")
def cmd_stats(runs_csv, out, grid):
    """Single-best / avg-best / all AOCC statistics per function and topology."""
    if grid not in (None, "full", "reduced"):
        raise click.UsageError(f"--grid must be full or reduced, got {grid!r}")
    config_grid = None if grid is None else (ConfigGrid.reduced() if grid == "reduced" else ConfigGrid())
    try:
        table = aggregate(read_runs_csv(runs_csv), config_grid)
        write_aggregate_csv(table, out)
    except SwarmxError as exc:
        _fail(str(exc))
    click.echo(f"{len(table)} aggregate rows written to {out}")


# ------------------------------
# explain
# ------------------------------
def _fid_labels(values) -> list:
    labels = []
    for value in values:
        for part in str(value).split(","):
            part = part.strip().lower()
            if not part:
                continue
            if part == "all":
                labels.append("all")
            elif part.isdigit():
                labels.append(int(part))
            else:
                raise click.UsageError(f"--fid expects function ids or 'all', got {part!r}")
    return labels


@cli.command("explain")
@click.option("--runs", "runs_csv", required=True, type=click.Path(dir_okay=False))
@click.option("--fid", "fids", multiple=True, required=True, help="Function id, comma list, or 'all'.")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--mode", type=click.Choice(["exact", "surrogate", "both"]), default="both", show_default=True)
@click.option("--topology", default=None, help="Required when runs.csv mixes topologies.")
@click.option("--trees", default=100, show_default=True)
@click.option("--max-depth", default=8, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--permutations", default=256, show_default=True)
def cmd_explain(runs_csv, fids, out, mode, topology, trees, max_depth, seed, permutations):
    """Shapley attributions of the hyperparameters plus the surrogate R2 report."""
    labels = _fid_labels(fids)
    if permutations < 1 or trees < 1 or max_depth < 1:
        raise click.UsageError("--permutations, --trees and --max-depth must be >= 1")
    if topology is not None:
        try:
            topology = Topology.parse(topology).value
        except ConfigurationError as exc:
            raise click.UsageError(str(exc))
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)

    tables = []
    try:
        records = read_runs_csv(runs_csv)
        for label in labels:
            fm = build_feature_matrix(records, None if label == "all" else label, topology)
            exact = surrogate_phi = None
            if mode in ("exact", "both"):
                exact = shapley_exact_all(fm)
            elif not fm.is_factorial():
                logger.info("f%s: sampled grid, surrogate attributions only", label)
            model = fit_surrogate(fm, trees=trees, max_depth=max_depth, seed=seed)
            if mode in ("surrogate", "both"):
                surrogate_phi = shapley_surrogate_all(model, fm, permutations=permutations, seed=seed)
            suffix = "all" if label == "all" else f"f{label}"
            table = attribution_table(fm, exact, surrogate_phi, fid_label=label)
            table.to_csv(out_dir / f"attr_{suffix}.csv", index=False, float_format="%.17g")
            sampled = permutations if surrogate_phi is not None else None
            surrogate_report(model, fm, fid_label=label, permutations=sampled).to_csv(
                out_dir / f"surrogate_{suffix}.csv", index=False, float_format="%.17g"
            )
            tables.append(table)
            click.echo(f"{suffix}: {len(table)} attribution rows, R2 train {model.r2_train:.4f}")
    except IncompleteGridError as exc:
        _fail(f"grid incomplete: {exc}")
    except SwarmxError as exc:
        _fail(str(exc))

    per_function = [t for t in tables if t["fid"].iloc[0] != "all"]
    if len(per_function) > 1:
        column = "shap_exact" if mode != "surrogate" else "shap_surrogate"
        modal_class_importance(pd.concat(per_function, ignore_index=True), column).to_csv(
            out_dir / "importance_by_class.csv", index=False, float_format="%.17g"
        )


# ------------------------------
# plot
# ------------------------------
@cli.command("plot")
@click.option("--attributions", "attribution_csv", required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_svg", required=True, type=click.Path(dir_okay=False))
@click.option("--column", type=click.Choice(["auto", "shap_exact", "shap_surrogate"]), default="auto",
              show_default=True)
def cmd_plot(attribution_csv, out_svg, column):
    """Render an attribution CSV as a static SVG swarm plot."""
    try:
        frame = _read_table(attribution_csv)
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame(columns=ATTRIBUTION_COLUMNS)
    except (OSError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        _fail(f"cannot read {attribution_csv}: {exc}")

    missing = [c for c in ATTRIBUTION_COLUMNS if c not in frame.columns]
    if missing:
        _fail(f"{attribution_csv} is not an attribution table (missing {missing})")
    try:
        if column == "auto":
            column = "shap_exact" if frame["shap_exact"].notna().any() or frame.empty else "shap_surrogate"
        frame = frame.assign(
            shap_value=pd.to_numeric(frame[column], errors="raise"),
            feature_value=pd.to_numeric(frame["feature_value"], errors="raise"),
        )
    except (ValueError, TypeError) as exc:
        _fail(f"{attribution_csv} holds non-numeric values: {exc}")

    title = "no data"
    if not frame.empty:
        fid = str(frame["fid"].iloc[0])
        title = f"{frame['topology'].iloc[0]} {'all functions' if fid == 'all' else 'f' + fid} ({column})"
    svg = render_swarm_svg(swarm_plot_data(frame), title=title)
    Path(out_svg).parent.mkdir(parents=True, exist_ok=True)
    Path(out_svg).write_text(svg, encoding="utf-8")
    click.echo(f"swarm plot written to {out_svg}")


def _read_table(path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


# ------------------------------
# compare
# ------------------------------
@cli.command("compare")
@click.option("--aggregate", "aggregate_csvs", multiple=True, required=True, type=click.Path(dir_okay=False))
@click.option("--reports", "report_csvs", multiple=True, type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_compare(aggregate_csvs, report_csvs, out):
    """Join aggregate tables of several topologies with their surrogate R2 values."""
    try:
        aggregates = pd.concat([_read_table(p) for p in aggregate_csvs], ignore_index=True)
        reports = pd.concat([_read_table(p) for p in report_csvs], ignore_index=True) if report_csvs else None
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        _fail(f"cannot read input: {exc}")
    missing = [c for c in AGGREGATE_COLUMNS if c not in aggregates.columns]
    if missing:
        _fail(f"aggregate input lacks columns {missing}")
    table = compare_topologies(aggregates, reports)
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out, index=False, float_format="%.17g")
    click.echo(f"{len(table)} comparison rows written to {out}")
