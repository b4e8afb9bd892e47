"""Node placement, random-waypoint motion and disk connectivity."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from .kernel import RandomStream, SimTime, to_seconds


@dataclass(frozen=True, slots=True)
class Position:
    """Point inside the simulation area, in meters."""

    x: float
    y: float

    def distance_to(self, other: Position) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True, slots=True)
class Area:
    """Rectangular simulation area anchored at the origin."""

    width: float
    height: float

    def contains(self, pos: Position) -> bool:
        return 0.0 <= pos.x <= self.width and 0.0 <= pos.y <= self.height


@dataclass(frozen=True, slots=True)
class MobilityState:
    """Random-waypoint state of one node."""

    current: Position
    waypoint: Position
    speed: float  # m/s
    pause_until: SimTime = 0


def random_position(area: Area, stream: RandomStream) -> Position:
    """Draw a uniform position inside ``area``."""
    return Position(stream.uniform(0.0, area.width), stream.uniform(0.0, area.height))


def init_positions(n: int, area: Area, stream: RandomStream) -> list[Position]:
    """Place ``n`` nodes independently and uniformly inside ``area``."""
    if n < 1:
        raise ValueError(f"node count must be >= 1 (got {n})")
    if area.width <= 0 or area.height <= 0:
        raise ValueError(f"area dimensions must be > 0 (got {area.width}x{area.height})")
    return [random_position(area, stream) for _ in range(n)]


def init_state(
    start: Position, area: Area, speed_range: tuple[float, float], stream: RandomStream
) -> MobilityState:
    """Start a node on its first leg."""
    return MobilityState(
        current=start,
        waypoint=random_position(area, stream),
        speed=stream.uniform(speed_range[0], speed_range[1])
        if speed_range[1] > speed_range[0]
        else speed_range[0],
    )


def _between(a: float, b: float, frac: float) -> float:
    """Interpolate from a to b, bounded by the segment's own endpoints."""
    value = a + (b - a) * frac
    lo, hi = (a, b) if a <= b else (b, a)
    return min(max(value, lo), hi)


def step_waypoint(
    state: MobilityState,
    now: SimTime,
    dt: SimTime,
    area: Area,
    speed_range: tuple[float, float],
    pause_time: SimTime,
    stream: RandomStream,
) -> MobilityState:
    """Advance ``state`` from ``now`` by ``dt`` microseconds.

    The node travels toward its waypoint at constant speed. On arrival it
    pauses for ``pause_time`` and then draws a new uniform waypoint and a
    uniform speed in ``speed_range``. Waypoints are always inside ``area`` so
    the straight-line motion between them stays inside too.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0 (got {dt})")
    t = now
    end = now + dt
    current = state.current
    waypoint = state.waypoint
    speed = state.speed
    pause_until = state.pause_until
    v_min, v_max = speed_range

    while t < end:
        if t < pause_until:
            t = min(pause_until, end)
            continue
        if speed <= 0.0:
            break
        remaining_s = to_seconds(end - t)
        distance = current.distance_to(waypoint)
        travel = speed * remaining_s
        if travel < distance:
            frac = travel / distance
            current = Position(
                _between(current.x, waypoint.x, frac),
                _between(current.y, waypoint.y, frac),
            )
            break
        # Arrive, pause, then start the next leg
        t += max(1, round(distance / speed * 1_000_000)) if distance > 0 else 0
        current = waypoint
        pause_until = t + pause_time
        waypoint = random_position(area, stream)
        speed = stream.uniform(v_min, v_max) if v_max > v_min else v_min

    return replace(
        state, current=current, waypoint=waypoint, speed=speed, pause_until=pause_until
    )


def neighbors(positions: Sequence[Position], range_m: float) -> dict[int, tuple[int, ...]]:
    """Disk connectivity: i and j are adjacent iff 0 < |i - j| <= range.

    Returns:
        Symmetric, irreflexive adjacency as node id -> sorted neighbor ids
    """
    count = len(positions)
    if count == 0:
        return {}
    coords = np.array([(p.x, p.y) for p in positions], dtype=np.float64)
    diff = coords[:, None, :] - coords[None, :, :]
    dist_sq = np.einsum("ijk,ijk->ij", diff, diff)
    within = dist_sq <= range_m * range_m
    np.fill_diagonal(within, False)
    return {i: tuple(int(j) for j in np.flatnonzero(within[i])) for i in range(count)}
