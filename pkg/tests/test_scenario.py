"""Tests for scenario parsing, serialisation and sweeps."""

from __future__ import annotations

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest

from pyhsrp.adversary import AttackKind
from pyhsrp.const import DEFAULT_MASTER_SEED, PROTOCOL_HSRP
from pyhsrp.exceptions import ParseError
from pyhsrp.scenario import (
    AttackConfig,
    Scenario,
    discover_scenarios,
    dump_scenario,
    expand_sweep,
    load_scenario,
    parse_scenario,
    scenario_from_dict,
)
from pyhsrp.validators import ValidationError
from tests.conftest import SCENARIO_DIR, small_scenario_dict


class TestSchema:
    """Tests for schema defaults and field errors."""

    def test_minimal_document(self) -> None:
        """Only the node count is required."""
        scenario = scenario_from_dict({"nodes": 5})
        assert scenario.name == "scenario"
        assert scenario.protocol == PROTOCOL_HSRP
        assert scenario.seed == DEFAULT_MASTER_SEED
        assert scenario.sweep is None

    def test_coerces_numbers(self) -> None:
        scenario = scenario_from_dict({"nodes": "7", "area": {"width": 300}})
        assert scenario.nodes == 7
        assert scenario.area.width == 300.0

    @pytest.mark.parametrize(
        ("overrides", "field"),
        [
            ({"nodes": 1}, "nodes"),
            ({"bogus": 1}, "bogus"),
            ({"protocol": "olsr"}, "protocol"),
            ({"channel": {"loss_probability": 2.0}}, "channel.loss_probability"),
            ({"traffic": {"explicit": [{"src": 0}]}}, "traffic.explicit[0].dst"),
            ({"attack": {"kind": "wormhole"}}, "attack.kind"),
        ],
    )
    def test_field_errors(self, overrides: dict[str, Any], field: str) -> None:
        """Schema errors name the dotted path of the offending key."""
        doc = {"nodes": 10} | overrides
        with pytest.raises(ValidationError) as exc_info:
            scenario_from_dict(doc)
        assert exc_info.value.field == field

    @pytest.mark.parametrize(
        ("overrides", "field"),
        [
            ({"mobility": {"speed_min": 5.0, "speed_max": 1.0}}, "mobility.speed_min"),
            ({"trust": {"weights": {"engagement": 0.9}}}, "trust.weights"),
            ({"attack": {"nodes": [3, 3]}}, "attack.nodes"),
            ({"traffic": {"explicit": [{"src": 0, "dst": 99}]}}, "traffic.explicit[0].dst"),
        ],
    )
    def test_cross_field_errors(self, overrides: dict[str, Any], field: str) -> None:
        doc = {"nodes": 10} | overrides
        with pytest.raises(ValidationError) as exc_info:
            scenario_from_dict(doc)
        assert exc_info.value.field == field

    def test_not_an_object(self) -> None:
        with pytest.raises(ValidationError):
            scenario_from_dict([1, 2, 3])

    def test_attack_profile(self) -> None:
        """Attack times are converted to simulation time."""
        config = AttackConfig(enabled=True, kind="flooder", active_from_s=2.0)
        profile = config.profile()
        assert profile.kind is AttackKind.FLOODER
        assert profile.active_from == 2_000_000
        assert config.label == "flooder"
        assert AttackConfig().label == "none"


class TestFiles:
    """Tests for reading and writing scenario files."""

    def test_invalid_json(self) -> None:
        """JSON errors carry the line number."""
        with pytest.raises(ParseError) as exc_info:
            parse_scenario('{\n  "nodes": 5,\n}')
        assert exc_info.value.line == 3

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ParseError):
            load_scenario(tmp_path / "absent.scn")

    def test_name_from_stem(self, tmp_path: Path) -> None:
        path = tmp_path / "corner_case.scn"
        path.write_text(json.dumps({"nodes": 4}), encoding="utf-8")
        assert load_scenario(path).name == "corner_case"

    def test_dump_then_load(self, make_scenario: Callable[..., Scenario]) -> None:
        """A dumped scenario loads back unchanged."""
        scenario = make_scenario(
            channel={"range_m": 200.0, "jam_regions": [{"x": 1, "y": 2, "radius": 30}]},
            attack={"enabled": True, "kind": "jammer", "count": 1},
        )
        assert parse_scenario(dump_scenario(scenario), default_name="other") == scenario

    def test_dump_sorted(self, make_scenario: Callable[..., Scenario]) -> None:
        text = dump_scenario(make_scenario())
        keys = list(json.loads(text))
        assert keys == sorted(keys)

    @pytest.mark.parametrize("path", sorted(SCENARIO_DIR.glob("*.scn")), ids=lambda p: p.stem)
    def test_bundled_scenarios_load(self, path: Path) -> None:
        """Every shipped scenario validates."""
        scenario = load_scenario(path)
        assert scenario.name == path.stem


class TestDiscoverScenarios:
    """Tests for discover_scenarios."""

    def test_directory(self, tmp_path: Path) -> None:
        """Only scenario suffixes, in name order."""
        for name in ("b.scn", "a.json", "notes.txt"):
            (tmp_path / name).write_text("{}", encoding="utf-8")
        assert [p.name for p in discover_scenarios(tmp_path)] == ["a.json", "b.scn"]

    def test_single_file(self, tmp_path: Path) -> None:
        path = tmp_path / "one.scn"
        path.write_text("{}", encoding="utf-8")
        assert discover_scenarios(path) == [path]

    def test_missing(self, tmp_path: Path) -> None:
        with pytest.raises(ParseError):
            discover_scenarios(tmp_path / "nowhere")


class TestExpandSweep:
    """Tests for expand_sweep."""

    def test_no_sweep(self, make_scenario: Callable[..., Scenario]) -> None:
        scenario = make_scenario()
        assert expand_sweep(scenario) == [scenario]

    def test_grid(self) -> None:
        """Three node counts times three speeds."""
        points = expand_sweep(load_scenario(SCENARIO_DIR / "sweep_1000.scn"))
        assert len(points) == 9
        assert [(p.nodes, p.mobility.speed_max) for p in points[:3]] == [
            (20, 5.0),
            (20, 10.0),
            (20, 15.0),
        ]
        assert points[0].name == "sweep_1000-n20-v5"
        assert all(p.sweep is None for p in points)

    def test_speed_min_clamped(self) -> None:
        """Sweeping speed_max below speed_min lowers speed_min too."""
        doc = small_scenario_dict(
            mobility={"speed_min": 4.0, "speed_max": 8.0}, sweep={"speed_max": [2.0]}
        )
        (point,) = expand_sweep(scenario_from_dict(doc))
        assert point.mobility.speed_range == (2.0, 2.0)
