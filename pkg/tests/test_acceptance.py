"""Paired-seed experiments on the bundled 700 m scenarios.

Everything marked ``slow`` runs fifty nodes for a simulated minute per
seed; select it with ``pytest -m slow``.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import pytest

from pyhsrp.routing.hsrp import HsrpNode
from pyhsrp.scenario import Scenario, load_scenario, scenario_from_dict
from pyhsrp.simulation import Simulation, configure, run_one
from pyhsrp.trace import read_trace, scan_flood_bound
from tests.conftest import SCENARIO_DIR, chain_layout, random_connected_layout, small_scenario_dict

SEEDS = range(42, 52)


@pytest.fixture(scope="module")
def baseline() -> Scenario:
    return load_scenario(SCENARIO_DIR / "baseline_700.scn")


def with_attack(scenario: Scenario, kind: str, **fields: object) -> Scenario:
    attack = replace(scenario.attack, enabled=True, kind=kind, **fields)
    return replace(scenario, attack=attack)


def pdr(scenario: Scenario, protocol: str, seed: int) -> float:
    return run_one(configure(scenario, protocol=protocol, seed=seed)).report.pdr


class TestBlackholeTrust:
    """A forwarder that swallows data loses its neighbor's trust."""

    def test_cut_vertex_blackhole(self) -> None:
        scenario = scenario_from_dict(
            small_scenario_dict(
                nodes=5,
                protocol="hsrp",
                area={"width": 500.0, "height": 100.0},
                channel={"range_m": 150.0, "loss_probability": 0.0, "jitter_us": 0},
                traffic={
                    "flows": 0,
                    "explicit": [{"src": 0, "dst": 4}],
                    "data_rate_pps": 4.0,
                    "start_s": 1.0,
                    "drain_s": 1.0,
                },
                attack={"enabled": True, "kind": "blackhole", "nodes": [2]},
            )
        )
        sim = Simulation(scenario, positions=chain_layout(5))
        report = sim.run().report
        watcher = sim.nodes[1]
        assert isinstance(watcher, HsrpNode)
        assert watcher.trust.fused(2) < 0.5
        assert report.pdr == 0.0
        assert report.md == report.data_originated


@pytest.mark.slow
class TestPairedSeeds:
    """Attack and defense comparisons over ten seeds."""

    def test_attack_degrades_aodv(self, baseline: Scenario) -> None:
        attacked = with_attack(baseline, "blackhole")
        worse = sum(pdr(attacked, "aodv", s) < pdr(baseline, "aodv", s) for s in SEEDS)
        assert worse >= 9

    def test_hsrp_resists_blackhole(self, baseline: Scenario) -> None:
        attacked = with_attack(baseline, "blackhole")
        better = sum(pdr(attacked, "hsrp", s) > pdr(attacked, "aodv", s) for s in SEEDS)
        assert better >= 9

    def test_hsrp_resists_sinkhole(self, baseline: Scenario) -> None:
        attacked = with_attack(baseline, "sinkhole", drop_fraction=0.5)
        better = sum(pdr(attacked, "hsrp", s) > pdr(attacked, "aodv", s) for s in SEEDS)
        assert better >= 8

    def test_flood_rate_bounded(self, baseline: Scenario, tmp_path: Path) -> None:
        """No node forwards more of one originator's requests than the guard allows."""
        attacked = configure(with_attack(baseline, "flooder"), protocol="hsrp")
        for seed in SEEDS:
            result = run_one(attacked, seed, trace_dir=tmp_path)
            assert result.trace_path is not None
            assert scan_flood_bound(read_trace(result.trace_path)) == []

    @pytest.mark.parametrize("protocol", ["aodv", "hsrp"])
    def test_static_lossless_delivers_all(self, baseline: Scenario, protocol: str) -> None:
        """A connected pinned layout without attackers loses nothing."""
        static = replace(
            baseline, mobility=replace(baseline.mobility, speed_min=0.0, speed_max=0.0)
        )
        channel = replace(static.channel, loss_probability=0.0)
        scenario = configure(replace(static, channel=channel), protocol=protocol, attack=False)
        positions, _graph = random_connected_layout(50, 700.0, 250.0, seed=42)
        report = Simulation(scenario, positions=positions).run().report
        assert report.pdr == 1.0
