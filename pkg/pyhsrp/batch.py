"""Batch experiments over scenarios, protocols, attack toggles and seeds.

Runs are independent, so they are farmed out to a process pool from an
asyncio loop. Results are merged only after every run finished and sorted
by ``(scenario, protocol, attack, seed)`` before anything is written, so the
output never depends on the worker count or completion order.
"""

from __future__ import annotations

import asyncio
import csv
import itertools
import logging
from collections.abc import Sequence
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .const import CSV_COLUMNS, PROTOCOLS
from .exceptions import PyHsrpError
from .scenario import Scenario
from .simulation import configure, run_one

_LOGGER = logging.getLogger(__name__)

SUMMARY_METRICS = ("pdr", "throughput_bps", "avg_delay_s", "jitter_s", "overhead_ratio")
FAILURE_COLUMNS = ("scenario", "protocol", "attack", "seed", "error")

RESULTS_FILE = "results.csv"
SUMMARY_FILE = "summary.csv"
FAILURES_FILE = "failures.csv"


@dataclass(frozen=True, slots=True)
class RunSpec:
    """One cell of the batch grid."""

    scenario: Scenario
    trace_dir: str | None = None

    @property
    def sort_key(self) -> tuple[str, str, str, int]:
        scn = self.scenario
        return (scn.name, scn.protocol, scn.attack.label, scn.seed)


@dataclass(frozen=True, slots=True)
class RunOutcome:
    """A finished cell: a CSV row or the error that stopped it."""

    key: tuple[str, str, str, int]
    row: dict[str, Any] | None = None
    error: str | None = None


@dataclass(slots=True)
class BatchResult:
    rows: list[dict[str, Any]] = field(default_factory=list)
    failures: list[dict[str, Any]] = field(default_factory=list)
    summary: list[dict[str, Any]] = field(default_factory=list)


def parse_seeds(spec: str) -> list[int] | int:
    """Parse ``--seeds``: a count ``n`` or a comma separated list of seeds.

    A count means ``master_seed .. master_seed + n - 1`` for each scenario.
    A single explicit seed is written with a trailing comma (``42,``).

    Raises:
        ValueError: If the value is neither form
    """
    text = spec.strip()
    if "," not in text:
        count = int(text)
        if count < 1:
            raise ValueError(f"seed count must be >= 1 (got {count})")
        return count
    seeds = [int(part) for part in text.split(",") if part.strip()]
    if not seeds or any(seed < 0 for seed in seeds):
        raise ValueError(f"invalid seed list: {spec!r}")
    return seeds


def build_grid(
    scenarios: Sequence[Scenario],
    *,
    seeds: Sequence[int] | None = None,
    seed_count: int | None = None,
    protocols: Sequence[str] = PROTOCOLS,
    attacks: Sequence[bool | None] = (None,),
    trace_dir: str | Path | None = None,
) -> list[RunSpec]:
    """Cartesian product of scenario, protocol, attack toggle and seed.

    Without ``seeds`` each scenario uses ``seed_count`` seeds (default 1)
    counted up from its own master seed. An attack toggle of None keeps
    the scenario's own setting.
    """
    trace = None if trace_dir is None else str(trace_dir)
    specs = []
    for scenario in scenarios:
        own_seeds = (
            list(seeds)
            if seeds is not None
            else [scenario.seed + i for i in range(seed_count or 1)]
        )
        for protocol, attack, seed in itertools.product(protocols, attacks, own_seeds):
            configured = configure(scenario, seed=seed, protocol=protocol, attack=attack)
            specs.append(RunSpec(configured, trace))
    return sorted(specs, key=lambda spec: spec.sort_key)


def _failed(spec: RunSpec, err: BaseException) -> RunOutcome:
    return RunOutcome(spec.sort_key, error=f"{type(err).__name__}: {err}")


def execute(spec: RunSpec) -> RunOutcome:
    """Run one cell; any error becomes a failed outcome."""
    try:
        result = run_one(spec.scenario, trace_dir=spec.trace_dir)
    except (PyHsrpError, ValueError, OSError) as err:
        _LOGGER.warning("Run %s failed: %s", spec.sort_key, err)
        return _failed(spec, err)
    except Exception as err:
        _LOGGER.exception("Run %s crashed", spec.sort_key)
        return _failed(spec, err)
    return RunOutcome(spec.sort_key, row=result.row)


def summarize(rows: Sequence[dict[str, Any]]) -> list[dict[str, Any]]:
    """Mean and sample standard deviation per (scenario, protocol, attack)."""
    groups: dict[tuple[str, str, str], list[dict[str, Any]]] = {}
    for row in rows:
        groups.setdefault((row["scenario"], row["protocol"], row["attack"]), []).append(row)
    summary = []
    for (scenario, protocol, attack), members in sorted(groups.items()):
        entry: dict[str, Any] = {
            "scenario": scenario,
            "protocol": protocol,
            "attack": attack,
            "runs": len(members),
        }
        for metric in SUMMARY_METRICS:
            values = np.array([float(m[metric]) for m in members], dtype=np.float64)
            entry[f"{metric}_mean"] = float(values.mean())
            entry[f"{metric}_std"] = float(values.std(ddof=1)) if len(values) > 1 else 0.0
        summary.append(entry)
    return summary


def _executor(jobs: int) -> Executor:
    if jobs <= 1:
        return ThreadPoolExecutor(max_workers=1)
    return ProcessPoolExecutor(max_workers=jobs)


async def run_batch(specs: Sequence[RunSpec], jobs: int = 1) -> BatchResult:
    """Execute every cell and merge the outcomes.

    Individual failures are collected, the rest of the batch continues.
    """
    loop = asyncio.get_running_loop()
    _LOGGER.info("Starting batch of %d runs on %d worker(s)", len(specs), max(1, jobs))
    with _executor(jobs) as pool:
        results = await asyncio.gather(
            *(loop.run_in_executor(pool, execute, spec) for spec in specs),
            return_exceptions=True,
        )
    outcomes: list[RunOutcome] = []
    for spec, outcome in zip(specs, results, strict=True):
        if isinstance(outcome, BaseException):
            # the worker itself died, e.g. a broken process pool
            _LOGGER.error("Run %s lost: %s", spec.sort_key, outcome)
            outcome = _failed(spec, outcome)
        outcomes.append(outcome)
    result = BatchResult()
    for outcome in sorted(outcomes, key=lambda o: o.key):
        if outcome.row is not None:
            result.rows.append(outcome.row)
        else:
            scenario, protocol, attack, seed = outcome.key
            result.failures.append(
                {
                    "scenario": scenario,
                    "protocol": protocol,
                    "attack": attack,
                    "seed": seed,
                    "error": outcome.error,
                }
            )
    result.summary = summarize(result.rows)
    _LOGGER.info("Batch finished: %d ok, %d failed", len(result.rows), len(result.failures))
    return result


def _write_csv(path: Path, columns: Sequence[str], rows: Sequence[dict[str, Any]]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def summary_columns() -> list[str]:
    columns = ["scenario", "protocol", "attack", "runs"]
    for metric in SUMMARY_METRICS:
        columns.extend((f"{metric}_mean", f"{metric}_std"))
    return columns


def write_outputs(result: BatchResult, out_dir: str | Path) -> dict[str, Path]:
    """Write results, summary and (if any) failures CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {"results": out / RESULTS_FILE, "summary": out / SUMMARY_FILE}
    _write_csv(written["results"], CSV_COLUMNS, result.rows)
    _write_csv(written["summary"], summary_columns(), result.summary)
    if result.failures:
        written["failures"] = out / FAILURES_FILE
        _write_csv(written["failures"], FAILURE_COLUMNS, result.failures)
    return written


def comparison_table(summary: Sequence[dict[str, Any]]) -> str:
    """Human readable mean ± std table."""
    header = f"{'scenario':<24} {'protocol':<8} {'attack':<10} {'runs':>4}"
    labels = {
        "pdr": "pdr",
        "throughput_bps": "throughput bps",
        "avg_delay_s": "delay s",
        "jitter_s": "jitter s",
        "overhead_ratio": "overhead",
    }
    for metric in SUMMARY_METRICS:
        header += f" {labels[metric]:>22}"
    lines = [header, "-" * len(header)]
    for entry in summary:
        line = (
            f"{entry['scenario']:<24} {entry['protocol']:<8} {entry['attack']:<10} "
            f"{entry['runs']:>4}"
        )
        for metric in SUMMARY_METRICS:
            cell = f"{entry[f'{metric}_mean']:.4g} ± {entry[f'{metric}_std']:.2g}"
            line += f" {cell:>22}"
        lines.append(line)
    return "\n".join(lines)
