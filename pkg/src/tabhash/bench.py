"""Throughput benchmark for tabulation-based hash families.

Per family and trial: fill the tables from the trial seed, draw an array
of random keys, hash the array ``passes`` times and record the wall time
per hash. The report gives the mean and sample standard deviation across
trials. Timings are machine-specific and only ever reported.
"""

import asyncio
import csv
import io
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, TextIO, Union

import numpy as np

from .config import BenchConfig
from .exceptions import BenchmarkError
from .families import HashFamilySpec, parse_family
from .tabulation import Hasher, LookupCounter, fill_tables_random, seeded_rng

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["family", "guaranteed_k", "mean_ns", "sd_ns", "lookups", "table_bytes", "machine_label"]

_TABLE_STREAM = 0
_KEY_STREAM = 1


@dataclass
class FamilyResult:
    """One report row."""
    family: str
    guaranteed_k: int
    mean_ns: float
    sd_ns: float
    lookups: int
    table_bytes: int
    machine_label: str = ""
    checksum: int = 0
    evaluations: Optional[int] = None
    measured_lookups: Optional[float] = None
    trial_ns: List[float] = field(default_factory=list)


@dataclass
class BenchReport:
    config: BenchConfig
    rows: List[FamilyResult]

    def row(self, family: str) -> FamilyResult:
        for row in self.rows:
            if row.family == family:
                return row
        raise KeyError(family)

    def fastest(self) -> FamilyResult:
        return min(self.rows, key=lambda row: row.mean_ns)


def checksum_hash_stream(h: Hasher, keys: Iterable[Sequence[int]]) -> int:
    """XOR-fold of the hash values of ``keys``."""
    acc = 0
    for key in keys:
        acc ^= h.hash(key)
    return acc


def trial_table_seed(rng_seed: int, trial: int) -> int:
    """Seed for the tables of one trial, independent of the key stream."""
    return int(np.random.SeedSequence(rng_seed, spawn_key=(_TABLE_STREAM, trial)).generate_state(1)[0])


def trial_keys(family: HashFamilySpec, rng_seed: int, trial: int, count: int) -> np.ndarray:
    rng = seeded_rng(rng_seed, _KEY_STREAM, trial)
    return rng.integers(0, family.universe_bound, size=(count, family.derivation.q), dtype=np.int64)


def _check_config(cfg: BenchConfig) -> None:
    if cfg.trials < 1 or cfg.keys_per_trial < 1 or cfg.passes < 1:
        raise BenchmarkError(
            f"trials, keys and passes must be at least 1, got {cfg.trials}, {cfg.keys_per_trial}, {cfg.passes}"
        )
    if not cfg.families:
        raise BenchmarkError("no families configured")


def bench_family(cfg: BenchConfig, family: HashFamilySpec) -> FamilyResult:
    """Run every trial of the protocol for one family."""
    counter = LookupCounter() if cfg.instrument else None
    sizes = family.table_sizes
    trial_ns = []
    checksum = 0
    table_bytes = 0
    for trial in range(cfg.trials):
        try:
            tables = fill_tables_random(trial_table_seed(cfg.rng_seed, trial), sizes, family.ell)
            keys = trial_keys(family, cfg.rng_seed, trial, cfg.keys_per_trial)
        except MemoryError as e:
            raise BenchmarkError(f"cannot allocate tables for {family.family_id}: {e}") from e
        table_bytes = tables.nbytes
        h = Hasher(family.derivation, tables, counter)

        sink = 0
        fold = 0
        start = time.perf_counter_ns()
        for _ in range(cfg.passes):
            fold = int(np.bitwise_xor.reduce(h.hash_many(keys)))
            sink ^= fold
        elapsed = time.perf_counter_ns() - start

        checksum ^= fold
        trial_ns.append(elapsed / (cfg.keys_per_trial * cfg.passes))
        logger.debug(f"{family.family_id} trial {trial}: {trial_ns[-1]:.2f} ns/hash (sink {sink:#x})")

    mean = float(np.mean(trial_ns))
    sd = float(np.std(trial_ns, ddof=1)) if len(trial_ns) > 1 else 0.0
    result = FamilyResult(
        family=family.family_id,
        guaranteed_k=family.guaranteed_k,
        mean_ns=mean,
        sd_ns=sd,
        lookups=family.lookups,
        table_bytes=table_bytes,
        machine_label=cfg.machine_label,
        checksum=checksum,
        trial_ns=trial_ns,
    )
    if counter is not None:
        result.evaluations = counter.evaluations
        result.measured_lookups = counter.lookups_per_evaluation
    logger.info(f"{family.family_id}: {mean:.2f} ns/hash (sd {sd:.2f}), {family.lookups} lookups")
    return result


def _resolve_families(cfg: BenchConfig) -> List[HashFamilySpec]:
    return [parse_family(family_id) for family_id in cfg.families]


def run_benchmark(cfg: BenchConfig) -> BenchReport:
    """Run the protocol for every configured family, in configuration order."""
    _check_config(cfg)
    if cfg.parallel:
        return asyncio.run(run_benchmark_async(cfg))
    families = _resolve_families(cfg)
    return BenchReport(cfg, [bench_family(cfg, family) for family in families])


async def run_benchmark_async(cfg: BenchConfig) -> BenchReport:
    """Run the families concurrently, each on its own worker thread."""
    _check_config(cfg)
    families = _resolve_families(cfg)
    rows = await asyncio.gather(*(asyncio.to_thread(bench_family, cfg, family) for family in families))
    return BenchReport(cfg, list(rows))


# Report output

def write_csv(report: BenchReport, target: Union[str, Path, TextIO]) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="") as f:
            write_csv(report, f)
        return
    writer = csv.DictWriter(target, fieldnames=CSV_COLUMNS, extrasaction="ignore")
    writer.writeheader()
    for row in report.rows:
        writer.writerow({
            "family": row.family,
            "guaranteed_k": row.guaranteed_k,
            "mean_ns": f"{row.mean_ns:.3f}",
            "sd_ns": f"{row.sd_ns:.3f}",
            "lookups": row.lookups,
            "table_bytes": row.table_bytes,
            "machine_label": row.machine_label,
        })


def report_csv(report: BenchReport) -> str:
    buffer = io.StringIO()
    write_csv(report, buffer)
    return buffer.getvalue()


def report_markdown(report: BenchReport) -> str:
    """Timing table grouped by guaranteed independence, strongest last."""
    label = report.config.machine_label or "this machine"
    lines = [
        f"| k | family | lookups | {label} (ns) |",
        "|---|--------|---------|------|",
    ]
    for k in sorted({row.guaranteed_k for row in report.rows}):
        group = [row for row in report.rows if row.guaranteed_k == k]
        for i, row in enumerate(group):
            k_cell = str(k) if i == 0 else ""
            lines.append(f"| {k_cell} | {row.family} | {row.lookups} | {row.mean_ns:.2f} ± {row.sd_ns:.2f} |")
    return "\n".join(lines) + "\n"
