# campaign.py
"""
Full-factorial PSO campaigns: the hyperparameter grid, per-run seeds, the
(parallel) run scheduler, the runs.csv format and the per-function
single-best / avg-best / all aggregate statistics.
"""
import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from bench_functions import SUPPORTED_FIDS, make_instance
from config import SWARMX_CHUNK_SIZE, resolve_workers
from errors import ArgumentError, DataIntegrityError, IncompleteGridError, RunFailedError, SwarmxError
from metrics import AoccBounds, trace_aocc
from swarm_core import Hyperparameters, run
from topology import Topology

logger = logging.getLogger("swarmx.campaign")

FEATURES: Tuple[str, ...] = ("c1", "c2", "w", "n", "k", "p", "r")

RUN_COLUMNS = [
    "topology", "config_index", "c1", "c2", "w", "n", "k", "p", "r",
    "fid", "iid", "run", "seed", "aocc", "final_best",
]
AGGREGATE_COLUMNS = [
    "fid", "topology",
    "single_best_mean", "single_best_std",
    "avg_best_mean", "avg_best_std",
    "all_mean", "all_std",
]

# Salt for run seeds; changing it changes every published runs.csv.
SEED_SALT = 0x50_50_C0DE


@dataclass(frozen=True)
class ConfigGrid:
    c1_values: Tuple[float, ...] = (0.3, 0.5, 0.7, 0.9)
    c2_values: Tuple[float, ...] = (0.2, 0.4, 0.6, 0.7)
    w_values: Tuple[float, ...] = (0.9, 1.2, 0.4)
    n_values: Tuple[int, ...] = (50, 100, 150)
    k_values: Tuple[int, ...] = (1, 2, 3)
    p_values: Tuple[int, ...] = (1, 2)
    r_values: Tuple[int, ...] = (1, 2)

    @classmethod
    def reduced(cls) -> "ConfigGrid":
        """First value of every row: a single configuration for smoke tests."""
        full = cls()
        return cls(*(values[:1] for values in full.axes()))

    def axes(self) -> Tuple[Tuple, ...]:
        return (
            self.c1_values, self.c2_values, self.w_values, self.n_values,
            self.k_values, self.p_values, self.r_values,
        )

    @property
    def size(self) -> int:
        return int(np.prod([len(a) for a in self.axes()]))


@dataclass(frozen=True)
class RunRecord:
    config_index: int
    topology: Topology
    fid: int
    iid: int
    run_index: int
    seed: int
    aocc: float
    final_best: float
    values: Tuple = field(default=(), compare=False)

    def as_row(self) -> dict:
        row = {
            "topology": Topology.parse(self.topology).value,
            "config_index": self.config_index,
            "fid": self.fid,
            "iid": self.iid,
            "run": self.run_index,
            "seed": self.seed,
            "aocc": self.aocc,
            "final_best": self.final_best,
        }
        row.update(zip(FEATURES, self.values))
        return row


# ------------------------------
# Grid & seeds
# ------------------------------
def enumerate_grid(grid: ConfigGrid = None) -> List[Tuple]:
    """Cross product in (c1, c2, w, n, k, p, r) order, each row in its listed value order."""
    grid = grid or ConfigGrid()
    return list(itertools.product(*grid.axes()))


def sample_grid(grid: ConfigGrid, size: int, seed: int) -> List[Tuple[int, Tuple]]:
    """`size` distinct configurations drawn uniformly, as (config_index, values) pairs."""
    configs = enumerate_grid(grid)
    if not 1 <= size <= len(configs):
        raise ArgumentError(f"sample size must be within 1..{len(configs)}, got {size}")
    rng = np.random.default_rng(np.random.SeedSequence([SEED_SALT, int(seed)]))
    chosen = np.sort(rng.choice(len(configs), size=size, replace=False))
    return [(int(i), configs[i]) for i in chosen]


def derive_seed(topology, config_index: int, fid: int, iid: int, run_index: int) -> int:
    """
    64-bit run seed: the first uint64 word of
    numpy.random.SeedSequence([SEED_SALT, topology_code, config_index, fid, iid, run_index])
    with topology codes Star=0, Ring=1, VonNeumann=2.
    """
    code = Topology.parse(topology).code
    ss = np.random.SeedSequence([SEED_SALT, code, int(config_index), int(fid), int(iid), int(run_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# ------------------------------
# Execution
# ------------------------------
@lru_cache(maxsize=256)
def _instance(fid: int, iid: int, dim: int):
    return make_instance(fid, iid, dim)


def _run_chunk(topology: str, budget: int, dim: int, tasks: Sequence[Tuple]) -> List[RunRecord]:
    """Worker body. Each task is (config_index, values, fid, iid, run_index)."""
    records = []
    bounds = AoccBounds(-5.0, 5.0)
    for config_index, values, fid, iid, run_index in tasks:
        seed = derive_seed(topology, config_index, fid, iid, run_index)
        try:
            hp = Hyperparameters(topology, *values)
            inst = _instance(fid, iid, dim)
            trace = run(hp, inst, budget, seed)
            score = trace_aocc(trace, inst.f_opt, bounds)
        except Exception as exc:
            raise RunFailedError(
                {"topology": Topology.parse(topology).value, "config_index": config_index,
                 "fid": fid, "iid": iid, "run": run_index},
                exc,
            ) from exc
        records.append(RunRecord(
            config_index=config_index,
            topology=Topology.parse(topology),
            fid=fid,
            iid=iid,
            run_index=run_index,
            seed=seed,
            aocc=score,
            final_best=float(trace.best_so_far[-1]),
            values=tuple(values),
        ))
    return records


def _chunks(items: List, size: int) -> Iterable[List]:
    for start in range(0, len(items), size):
        yield items[start:start + size]


def execute_campaign(
    topology,
    grid: ConfigGrid = None,
    fids: Sequence[int] = SUPPORTED_FIDS,
    iids: Sequence[int] = (1, 2, 3, 4, 5),
    runs_per_instance: int = 5,
    budget: int = 100,
    dim: int = 2,
    workers: int = None,
    configs: Optional[Sequence[Tuple[int, Tuple]]] = None,
) -> List[RunRecord]:
    """
    One RunRecord per (config, fid, iid, run), sorted by that key.

    `configs` restricts the campaign to (config_index, values) pairs, e.g. from
    sample_grid; by default the whole grid runs. Content does not depend on the
    worker count or completion order.
    """
    topology = Topology.parse(topology)
    if budget < 1 or runs_per_instance < 1 or not iids or not fids:
        raise ArgumentError("budget, runs, instances and fids must all be non-empty / positive")
    for fid in fids:
        _instance(int(fid), 1, dim)  # rejects unsupported ids before any work starts
    if configs is None:
        configs = list(enumerate(enumerate_grid(grid)))

    tasks = [
        (int(ci), tuple(values), int(fid), int(iid), run_index)
        for ci, values in configs
        for fid in fids
        for iid in iids
        for run_index in range(1, runs_per_instance + 1)
    ]
    workers = resolve_workers(workers)
    logger.info(
        "campaign %s: %d configs x %d fids x %d instances x %d runs = %d runs on %d worker(s)",
        topology.value, len(configs), len(fids), len(iids), runs_per_instance, len(tasks), workers,
    )

    started = time.perf_counter()
    records: List[RunRecord] = []
    chunks = list(_chunks(tasks, max(1, SWARMX_CHUNK_SIZE)))
    if workers == 1 or len(chunks) == 1:
        for chunk in chunks:
            records.extend(_run_chunk(topology.value, budget, dim, chunk))
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_run_chunk, topology.value, budget, dim, chunk) for chunk in chunks]
            done = 0
            try:
                for future in as_completed(futures):
                    records.extend(future.result())
                    done += 1
                    if done % max(1, len(chunks) // 10) == 0:
                        logger.info("campaign %s: %d/%d chunks done", topology.value, done, len(chunks))
            except SwarmxError:
                for f in futures:
                    f.cancel()
                raise

    records.sort(key=lambda rec: (rec.config_index, rec.fid, rec.iid, rec.run_index))
    logger.info("campaign %s finished: %d records in %.1fs", topology.value, len(records),
                time.perf_counter() - started)
    return records


# ------------------------------
# runs.csv
# ------------------------------
def records_frame(records) -> pd.DataFrame:
    """RunRecords (or an already-loaded frame) as a DataFrame in runs.csv column order, sorted."""
    if isinstance(records, pd.DataFrame):
        df = records.copy()
    else:
        records = list(records)
        df = pd.DataFrame([rec.as_row() for rec in records], columns=RUN_COLUMNS)
        # exact uint64, never routed through float
        df["seed"] = np.array([rec.seed for rec in records], dtype=np.uint64)
    missing = [c for c in RUN_COLUMNS if c not in df.columns]
    if missing:
        raise DataIntegrityError(f"run records lack columns: {missing}")
    df = df[RUN_COLUMNS]
    if not df.empty:
        df["seed"] = df["seed"].astype("uint64")
    return df.sort_values(["topology", "config_index", "fid", "iid", "run"], kind="stable").reset_index(drop=True)


def write_runs_csv(records, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records_frame(records).to_csv(path, index=False, float_format="%.17g")
    return path


def read_runs_csv(path) -> pd.DataFrame:
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype={"seed": "uint64", "topology": str}, float_precision="round_trip")
    except pd.errors.EmptyDataError:
        raise DataIntegrityError(f"{path} is empty") from None
    except FileNotFoundError:
        raise DataIntegrityError(f"{path} does not exist") from None
    if df.empty:
        raise DataIntegrityError(f"{path} holds no run records")
    return records_frame(df)


# ------------------------------
# Aggregation
# ------------------------------
def check_complete(df: pd.DataFrame, expected_configs: Optional[Sequence[int]] = None) -> None:
    """Every (topology, config, fid) cell must hold the same full set of (iid, run) pairs."""
    if df.empty:
        raise IncompleteGridError("no run records")
    gaps, n_missing = [], 0
    n_expected = df["iid"].nunique() * df["run"].nunique()
    for topology, part in df.groupby("topology", sort=True):
        if expected_configs is None:
            configs = sorted(part["config_index"].unique())
        else:
            configs = sorted(int(c) for c in expected_configs)
            outside = sorted(set(part["config_index"].unique()) - set(configs))
            if outside:
                shown = ", ".join(str(c) for c in outside[:10])
                more = f" (+{len(outside) - 10} more)" if len(outside) > 10 else ""
                gaps.append(f"{topology}: configs outside the expected grid: {shown}{more}")
                part = part[part["config_index"].isin(configs)]
        n_duplicates = int(part.duplicated(["config_index", "fid", "iid", "run"]).sum())
        if n_duplicates:
            gaps.append(f"{topology}: {n_duplicates} duplicate run coordinates")
        fids = sorted(part["fid"].unique()) if not part.empty else sorted(df["fid"].unique())
        counts = part.drop_duplicates(["config_index", "fid", "iid", "run"]).groupby(["config_index", "fid"]).size()
        full = pd.MultiIndex.from_product([configs, fids], names=["config_index", "fid"])
        counts = counts.reindex(full, fill_value=0)
        for (config_index, fid), count in counts[counts != n_expected].items():
            n_missing += 1
            gaps.append(f"{topology}/config {config_index}/f{fid}: {count} of {n_expected} runs")
    if gaps:
        shown = "; ".join(gaps[:20])
        more = f" (+{len(gaps) - 20} more)" if len(gaps) > 20 else ""
        heading = "campaign has missing cells" if n_missing else "campaign does not match the expected grid"
        raise IncompleteGridError(f"{heading}: {shown}{more}")


def aggregate(records, grid: ConfigGrid = None) -> pd.DataFrame:
    """
    Per (fid, topology): the single-best config (argmax of its per-function mean AOCC),
    the avg-best config (argmax of the mean over all functions of per-function means)
    and all records pooled. Ties go to the lower config_index. Std uses ddof=0.
    """
    df = records_frame(records)
    expected = range(grid.size) if grid is not None else None
    check_complete(df, expected)

    rows = []
    for topology, part in df.groupby("topology", sort=True):
        per_config = part.groupby(["fid", "config_index"])["aocc"].agg(
            mean="mean", std=lambda s: s.std(ddof=0)
        )
        means = per_config["mean"].unstack("fid")
        avg_best = int(means.mean(axis=1).idxmax())
        pooled = part.groupby("fid")["aocc"]
        for fid, fid_stats in per_config.groupby(level="fid"):
            single = fid_stats["mean"].idxmax()
            rows.append({
                "fid": int(fid),
                "topology": topology,
                "single_best_mean": fid_stats.loc[single, "mean"],
                "single_best_std": fid_stats.loc[single, "std"],
                "avg_best_mean": per_config.loc[(fid, avg_best), "mean"],
                "avg_best_std": per_config.loc[(fid, avg_best), "std"],
                "all_mean": pooled.get_group(fid).mean(),
                "all_std": pooled.get_group(fid).std(ddof=0),
            })
    out = pd.DataFrame(rows, columns=AGGREGATE_COLUMNS)
    return out.sort_values(["fid", "topology"], kind="stable").reset_index(drop=True)


def best_configs(records) -> pd.DataFrame:
    """The config indices behind the single-best and avg-best columns, per (fid, topology)."""
    df = records_frame(records)
    rows = []
    for topology, part in df.groupby("topology", sort=True):
        means = part.groupby(["fid", "config_index"])["aocc"].mean().unstack("fid")
        avg_best = int(means.mean(axis=1).idxmax())
        for fid in means.columns:
            rows.append({"fid": int(fid), "topology": topology,
                         "single_best_config": int(means[fid].idxmax()), "avg_best_config": avg_best})
    return pd.DataFrame(rows).sort_values(["fid", "topology"], kind="stable").reset_index(drop=True)


def write_aggregate_csv(table: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table[AGGREGATE_COLUMNS].to_csv(path, index=False, float_format="%.17g")
    return path


def compare_topologies(aggregates: pd.DataFrame, surrogate_reports: pd.DataFrame = None) -> pd.DataFrame:
    """
    Long table over topologies in aggregate column order plus r2_train, with flags for the
    topology holding the best all_mean and the best r2_train of each function.
    """
    table = aggregates[AGGREGATE_COLUMNS].copy()
    if surrogate_reports is not None and not surrogate_reports.empty:
        r2 = surrogate_reports[["fid", "topology", "r2_train"]].drop_duplicates(["fid", "topology"], keep="last")
        r2 = r2[pd.to_numeric(r2["fid"], errors="coerce").notna()].astype({"fid": int})
        table = table.merge(r2, on=["fid", "topology"], how="left")
    else:
        table["r2_train"] = np.nan
    table = table.sort_values(["fid", "topology"], kind="stable").reset_index(drop=True)

    table["best_all_mean"] = table.groupby("fid")["all_mean"].transform("max").eq(table["all_mean"])
    r2_max = table.groupby("fid")["r2_train"].transform("max")
    table["best_r2_train"] = r2_max.notna() & r2_max.eq(table["r2_train"])
    return table
