"""Fixtures for pyhsrp tests."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import replace
from pathlib import Path
from typing import Any

import networkx as nx
import numpy as np
import pytest

from pyhsrp.channel import ChannelConfig
from pyhsrp.crypto.signatures import build_directory
from pyhsrp.kernel import fork_stream
from pyhsrp.mobility import Position, neighbors
from pyhsrp.routing.aodv import AodvNode
from pyhsrp.routing.hsrp import HsrpNode
from pyhsrp.scenario import Scenario, scenario_from_dict

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def scenario_dir() -> Path:
    """Directory of the bundled scenario files."""
    return SCENARIO_DIR


@pytest.fixture
def lossless_channel() -> ChannelConfig:
    """No loss, no jitter: first arrivals follow shortest paths."""
    return ChannelConfig(range_m=150.0, loss_probability=0.0, per_hop_delay_us=1_000, jitter_us=0)


def small_scenario_dict(**overrides: Any) -> dict[str, Any]:
    """A short static scenario document, with top-level overrides."""
    doc: dict[str, Any] = {
        "name": "small",
        "nodes": 12,
        "seed": 5,
        "protocol": "aodv",
        "duration_s": 8.0,
        "area": {"width": 400.0, "height": 400.0},
        "mobility": {"speed_min": 0.0, "speed_max": 0.0},
        "traffic": {"flows": 3, "data_rate_pps": 4.0, "start_s": 1.0, "drain_s": 1.0},
        "channel": {"range_m": 250.0, "jitter_us": 0},
    }
    doc.update(overrides)
    return doc


@pytest.fixture
def make_scenario() -> Callable[..., Scenario]:
    """Factory building a validated small scenario."""

    def factory(**overrides: Any) -> Scenario:
        return scenario_from_dict(small_scenario_dict(**overrides))

    return factory


def grid_layout(rows: int, cols: int, spacing: float = 100.0) -> list[Position]:
    """Row-major grid starting at (spacing/2, spacing/2)."""
    return [
        Position(spacing / 2 + c * spacing, spacing / 2 + r * spacing)
        for r in range(rows)
        for c in range(cols)
    ]


def chain_layout(length: int, spacing: float = 100.0) -> list[Position]:
    """Nodes on a horizontal line, each in range of its direct neighbors only."""
    return [Position(spacing / 2 + i * spacing, 50.0) for i in range(length)]


def topology(positions: list[Position], range_m: float) -> nx.Graph:
    """Disk graph of a layout, for BFS and connectivity oracles."""
    graph = nx.Graph()
    graph.add_nodes_from(range(len(positions)))
    for node, adjacent in neighbors(positions, range_m).items():
        graph.add_edges_from((node, other) for other in adjacent)
    return graph


def random_connected_layout(
    n: int, size: float, range_m: float, seed: int
) -> tuple[list[Position], nx.Graph]:
    """Uniform layout redrawn until its disk graph is connected."""
    rng = np.random.default_rng(seed)
    while True:
        coords = rng.uniform(0.0, size, size=(n, 2))
        positions = [Position(float(x), float(y)) for x, y in coords]
        graph = topology(positions, range_m)
        if nx.is_connected(graph):
            return positions, graph


@pytest.fixture
def aodv_chain() -> list[AodvNode]:
    """Three AODV nodes 0 - 1 - 2."""
    return [AodvNode(i) for i in range(3)]


@pytest.fixture
def hsrp_nodes() -> Callable[[int], list[HsrpNode]]:
    """Factory of keyed HSRP nodes sharing one directory."""

    def factory(count: int, seed: int = 3) -> list[HsrpNode]:
        directory, keys = build_directory(seed, count)
        return [HsrpNode(i, keys[i], directory) for i in range(count)]

    return factory


@pytest.fixture
def stream_factory() -> Callable[[str], Any]:
    """Fresh labelled random streams under a fixed master seed."""
    return lambda label: fork_stream(1234, label)


def static(scenario: Scenario) -> Scenario:
    """Copy of ``scenario`` with mobility switched off."""
    return replace(scenario, mobility=replace(scenario.mobility, speed_min=0.0, speed_max=0.0))
