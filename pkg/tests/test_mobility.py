"""Tests for placement, random waypoint motion and connectivity."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from pyhsrp.kernel import fork_stream, seconds
from pyhsrp.mobility import (
    Area,
    MobilityState,
    Position,
    init_positions,
    init_state,
    neighbors,
    step_waypoint,
)


class TestInitPositions:
    """Tests for init_positions."""

    def test_single_node_inside_area(self) -> None:
        """One node lands inside a 700 x 700 area."""
        area = Area(700.0, 700.0)
        (pos,) = init_positions(1, area, fork_stream(1, "placement"))
        assert area.contains(pos)

    def test_replay(self) -> None:
        """Same seed, same layout."""
        area = Area(700.0, 700.0)
        first = init_positions(50, area, fork_stream(42, "placement"))
        second = init_positions(50, area, fork_stream(42, "placement"))
        assert first == second

    def test_uniform_mean(self) -> None:
        """Law of large numbers on the x coordinate."""
        area = Area(1000.0, 1000.0)
        positions = init_positions(10_000, area, fork_stream(7, "placement"))
        mean_x = float(np.mean([p.x for p in positions]))
        assert 1000.0 * 0.48 <= mean_x <= 1000.0 * 0.52

    @pytest.mark.parametrize(("n", "width", "height"), [(0, 10.0, 10.0), (3, 0.0, 10.0)])
    def test_rejects_bad_input(self, n: int, width: float, height: float) -> None:
        """Empty networks and degenerate areas are refused."""
        with pytest.raises(ValueError):
            init_positions(n, Area(width, height), fork_stream(1, "placement"))


class TestStepWaypoint:
    """Tests for step_waypoint."""

    def test_stays_inside_area(self) -> None:
        """Positions never leave the area over many steps."""
        area = Area(300.0, 200.0)
        stream = fork_stream(11, "mobility/0")
        state = init_state(Position(10.0, 10.0), area, (1.0, 20.0), stream)
        now = 0
        dt = seconds(0.5)
        for _ in range(2_000):
            state = step_waypoint(state, now, dt, area, (1.0, 20.0), seconds(1.0), stream)
            now += dt
            assert area.contains(state.current)

    def test_moves_at_speed(self) -> None:
        """Distance covered in one short step equals speed times time."""
        area = Area(1000.0, 1000.0)
        state = MobilityState(Position(0.0, 0.0), Position(1000.0, 0.0), speed=10.0)
        stepped = step_waypoint(
            state, 0, seconds(2.0), area, (10.0, 10.0), 0, fork_stream(1, "m")
        )
        assert stepped.current.x == pytest.approx(20.0)
        assert stepped.current.y == pytest.approx(0.0)

    def test_pause_holds_position(self) -> None:
        """A paused node does not move."""
        area = Area(100.0, 100.0)
        state = MobilityState(
            Position(5.0, 5.0), Position(90.0, 90.0), speed=5.0, pause_until=seconds(10.0)
        )
        stepped = step_waypoint(state, 0, seconds(2.0), area, (5.0, 5.0), 0, fork_stream(1, "m"))
        assert stepped.current == state.current

    def test_zero_speed_is_static(self) -> None:
        """Speed zero keeps the node in place."""
        area = Area(100.0, 100.0)
        state = MobilityState(Position(5.0, 5.0), Position(90.0, 90.0), speed=0.0)
        stepped = step_waypoint(state, 0, seconds(5.0), area, (0.0, 0.0), 0, fork_stream(1, "m"))
        assert stepped.current == state.current

    def test_rejects_nonpositive_step(self) -> None:
        """dt must be positive."""
        area = Area(100.0, 100.0)
        state = MobilityState(Position(5.0, 5.0), Position(90.0, 90.0), speed=1.0)
        with pytest.raises(ValueError):
            step_waypoint(state, 0, 0, area, (1.0, 1.0), 0, fork_stream(1, "m"))


class TestNeighbors:
    """Tests for disk connectivity."""

    def test_matches_brute_force(self) -> None:
        """Adjacency equals the all-pairs distance check."""
        area = Area(700.0, 700.0)
        positions = init_positions(50, area, fork_stream(42, "placement"))
        adjacency = neighbors(positions, 250.0)
        for i, j in itertools.permutations(range(50), 2):
            within = positions[i].distance_to(positions[j]) <= 250.0
            assert (j in adjacency[i]) == within

    def test_symmetric_irreflexive(self) -> None:
        """No self loops, every edge both ways."""
        positions = init_positions(30, Area(500.0, 500.0), fork_stream(2, "placement"))
        adjacency = neighbors(positions, 200.0)
        for i, adjacent in adjacency.items():
            assert i not in adjacent
            for j in adjacent:
                assert i in adjacency[j]

    def test_range_boundary_inclusive(self) -> None:
        """Exactly at range counts as adjacent."""
        adjacency = neighbors([Position(0.0, 0.0), Position(250.0, 0.0)], 250.0)
        assert adjacency == {0: (1,), 1: (0,)}

    def test_empty(self) -> None:
        """No nodes, no edges."""
        assert neighbors([], 100.0) == {}
