"""Tests for batch experiments."""

from __future__ import annotations

import csv
from collections.abc import Callable
from concurrent.futures.process import BrokenProcessPool
from dataclasses import replace
from pathlib import Path
from typing import Any

import pytest

from pyhsrp import batch
from pyhsrp.batch import (
    FAILURES_FILE,
    BatchResult,
    RunSpec,
    build_grid,
    comparison_table,
    execute,
    parse_seeds,
    run_batch,
    summarize,
    summary_columns,
    write_outputs,
)
from pyhsrp.const import CSV_COLUMNS
from pyhsrp.scenario import Scenario


@pytest.fixture
def quick(make_scenario: Callable[..., Scenario]) -> Scenario:
    """A scenario short enough to run many times."""
    return make_scenario(duration_s=4.0)


def row(protocol: str, seed: int, pdr: float) -> dict[str, object]:
    return {
        "scenario": "s",
        "protocol": protocol,
        "attack": "none",
        "seed": seed,
        "pdr": pdr,
        "throughput_bps": 100.0,
        "avg_delay_s": 0.01,
        "jitter_s": 0.0,
        "overhead_ratio": 2.0,
    }


class TestParseSeeds:
    """Tests for parse_seeds."""

    def test_count(self) -> None:
        assert parse_seeds("10") == 10

    def test_list(self) -> None:
        assert parse_seeds("4, 9,2") == [4, 9, 2]

    def test_single_explicit(self) -> None:
        """A trailing comma marks one explicit seed."""
        assert parse_seeds("42,") == [42]

    @pytest.mark.parametrize("text", ["0", "-3", "x", ",", "1,-2"])
    def test_invalid(self, text: str) -> None:
        with pytest.raises(ValueError):
            parse_seeds(text)


class TestBuildGrid:
    """Tests for build_grid."""

    def test_counted_seeds(self, quick: Scenario) -> None:
        """Counts start at the scenario's own master seed."""
        specs = build_grid([quick], seed_count=3)
        assert len(specs) == 6
        assert {spec.scenario.seed for spec in specs} == {5, 6, 7}
        assert [spec.sort_key for spec in specs] == sorted(spec.sort_key for spec in specs)

    def test_explicit_seeds_and_attacks(self, quick: Scenario) -> None:
        specs = build_grid([quick], seeds=[11], protocols=("hsrp",), attacks=(False, True))
        assert [(s.scenario.protocol, s.scenario.attack.label) for s in specs] == [
            ("hsrp", "blackhole"),
            ("hsrp", "none"),
        ]

    def test_attack_none_keeps_setting(self, make_scenario: Callable[..., Scenario]) -> None:
        scenario = make_scenario(attack={"enabled": True, "kind": "sinkhole"})
        (spec,) = build_grid([scenario], protocols=("aodv",))
        assert spec.scenario.attack.label == "sinkhole"

    def test_trace_dir(self, quick: Scenario, tmp_path: Path) -> None:
        specs = build_grid([quick], trace_dir=tmp_path)
        assert all(spec.trace_dir == str(tmp_path) for spec in specs)


class TestExecute:
    """Tests for a single cell."""

    def test_success(self, quick: Scenario) -> None:
        outcome = execute(RunSpec(quick))
        assert outcome.error is None
        assert outcome.row is not None
        assert outcome.key == ("small", "aodv", "none", 5)

    def test_failure_captured(self, quick: Scenario, tmp_path: Path) -> None:
        """An unwritable trace directory fails the cell, not the batch."""
        blocker = tmp_path / "blocker"
        blocker.write_text("", encoding="utf-8")
        outcome = execute(RunSpec(quick, str(blocker)))
        assert outcome.row is None
        assert outcome.error is not None
        assert outcome.error.startswith("FileExistsError")

    def test_unexpected_error_captured(
        self, quick: Scenario, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """A crash outside the known error types still becomes a failed cell."""

        def crash(*args: object, **kwargs: object) -> None:
            raise RuntimeError("boom")

        monkeypatch.setattr(batch, "run_one", crash)
        outcome = execute(RunSpec(quick))
        assert outcome.row is None
        assert outcome.error == "RuntimeError: boom"


class TestRunBatch:
    """Tests for run_batch."""

    async def test_rows_sorted(self, quick: Scenario) -> None:
        specs = build_grid([quick], seed_count=2)
        result = await run_batch(specs)
        assert len(result.rows) == 4
        keys = [(r["protocol"], r["seed"]) for r in result.rows]
        assert keys == [("aodv", 5), ("aodv", 6), ("hsrp", 5), ("hsrp", 6)]
        assert len(result.summary) == 2
        assert result.failures == []

    async def test_jobs_do_not_matter(self, quick: Scenario) -> None:
        """Worker count never changes the output."""
        specs = build_grid([quick], seed_count=2)
        serial = await run_batch(specs, jobs=1)
        parallel = await run_batch(specs, jobs=2)
        assert serial.rows == parallel.rows
        assert serial.summary == parallel.summary

    async def test_failures_collected(self, quick: Scenario, tmp_path: Path) -> None:
        blocker = tmp_path / "blocker"
        blocker.write_text("", encoding="utf-8")
        specs = [RunSpec(quick), RunSpec(replace(quick, seed=6))]
        specs.append(RunSpec(specs[1].scenario, str(blocker)))
        result = await run_batch(specs)
        assert len(result.rows) == 2
        assert [f["seed"] for f in result.failures] == [6]

    async def test_crashing_seed_keeps_rest(
        self, quick: Scenario, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """One seed raising an arbitrary error leaves the other rows intact."""
        real_run_one = batch.run_one

        def flaky(scenario: Scenario, **kwargs: Any) -> Any:
            if scenario.seed == 6:
                raise RuntimeError("assertion in event handler")
            return real_run_one(scenario, **kwargs)

        monkeypatch.setattr(batch, "run_one", flaky)
        result = await run_batch(build_grid([quick], seed_count=3, protocols=("aodv",)))
        assert [r["seed"] for r in result.rows] == [5, 7]
        assert len(result.failures) == 1
        assert result.failures[0]["seed"] == 6
        assert result.failures[0]["error"].startswith("RuntimeError")

    async def test_lost_worker_becomes_failure(
        self, quick: Scenario, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        """An exception escaping the worker call is recorded, not raised."""
        real_execute = batch.execute

        def dying(spec: RunSpec) -> Any:
            if spec.scenario.seed == 5:
                raise BrokenProcessPool("worker died")
            return real_execute(spec)

        monkeypatch.setattr(batch, "execute", dying)
        result = await run_batch(build_grid([quick], seed_count=2, protocols=("aodv",)))
        assert [r["seed"] for r in result.rows] == [6]
        assert [f["seed"] for f in result.failures] == [5]
        assert result.failures[0]["error"].startswith("BrokenProcessPool")


class TestSummaries:
    """Tests for summarize and the written outputs."""

    def test_mean_and_std(self) -> None:
        summary = summarize([row("aodv", 1, 0.5), row("aodv", 2, 0.7), row("hsrp", 1, 0.9)])
        assert [entry["protocol"] for entry in summary] == ["aodv", "hsrp"]
        assert summary[0]["runs"] == 2
        assert summary[0]["pdr_mean"] == pytest.approx(0.6)
        assert summary[0]["pdr_std"] == pytest.approx(0.1414213562)
        assert summary[1]["pdr_std"] == 0.0

    def test_summary_columns(self) -> None:
        columns = summary_columns()
        assert columns[:4] == ["scenario", "protocol", "attack", "runs"]
        assert "overhead_ratio_std" in columns

    def test_write_outputs(self, quick: Scenario, tmp_path: Path) -> None:
        """Results use the fixed column order; failures only when present."""
        rows = [execute(RunSpec(quick)).row]
        result = BatchResult(rows=[r for r in rows if r is not None])
        result.summary = summarize(result.rows)
        written = write_outputs(result, tmp_path / "out")
        assert set(written) == {"results", "summary"}
        with written["results"].open(encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            assert tuple(next(reader)) == CSV_COLUMNS
            assert len(list(reader)) == 1
        assert not (tmp_path / "out" / FAILURES_FILE).exists()

    def test_write_failures(self, tmp_path: Path) -> None:
        failure = {"scenario": "s", "protocol": "aodv", "attack": "none", "seed": 1, "error": "x"}
        written = write_outputs(BatchResult(failures=[failure]), tmp_path)
        assert written["failures"].read_text(encoding="utf-8").splitlines()[1] == "s,aodv,none,1,x"

    def test_comparison_table(self) -> None:
        table = comparison_table(summarize([row("aodv", 1, 0.5), row("aodv", 2, 0.7)]))
        lines = table.splitlines()
        assert lines[0].startswith("scenario")
        assert "±" in lines[2]
        assert "aodv" in lines[2]
