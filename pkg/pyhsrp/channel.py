"""Lossy broadcast channel with disk range and jamming regions."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum

from .const import (
    DEFAULT_JITTER_US,
    DEFAULT_LOSS_PROBABILITY,
    DEFAULT_PER_HOP_DELAY_US,
    DEFAULT_RANGE_M,
)
from .kernel import RandomStream, SimTime
from .mobility import Position

_LOGGER = logging.getLogger(__name__)


class LossReason(StrEnum):
    """Why a frame did not reach a receiver."""

    RANDOM = "random"
    JAMMED = "jammed"
    OUT_OF_RANGE = "out_of_range"


@dataclass(frozen=True, slots=True)
class JamRegion:
    """Disk in which no receiver can decode anything."""

    center: Position
    radius: float

    def covers(self, pos: Position) -> bool:
        return self.center.distance_to(pos) <= self.radius


@dataclass(frozen=True, slots=True)
class ChannelConfig:
    """Radio model parameters."""

    range_m: float = DEFAULT_RANGE_M
    loss_probability: float = DEFAULT_LOSS_PROBABILITY
    per_hop_delay_us: SimTime = DEFAULT_PER_HOP_DELAY_US
    jitter_us: SimTime = DEFAULT_JITTER_US
    jam_regions: tuple[JamRegion, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.range_m <= 0:
            raise ValueError(f"range must be > 0 (got {self.range_m})")
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ValueError(f"loss_probability must be in [0, 1] (got {self.loss_probability})")
        if self.per_hop_delay_us < 0 or self.jitter_us < 0:
            raise ValueError("per-hop delay and jitter must be non-negative")


@dataclass(frozen=True, slots=True)
class Delivered:
    """Receiver gets the frame at ``at``."""

    receiver: int
    at: SimTime


@dataclass(frozen=True, slots=True)
class Lost:
    """Receiver never gets the frame."""

    receiver: int
    reason: LossReason


Reception = Delivered | Lost


def transmit(
    cfg: ChannelConfig,
    sender_pos: Position,
    receivers: Sequence[tuple[int, Position]],
    now: SimTime,
    stream: RandomStream,
    jam_regions: Iterable[JamRegion] | None = None,
) -> list[Reception]:
    """Resolve one transmission against every candidate receiver.

    Every in-range receiver consumes one loss draw and one jitter draw, in
    candidate order, whether or not it ends up jammed. Stream consumption
    therefore never depends on the jamming configuration.

    Args:
        cfg: Channel parameters
        sender_pos: Sender position at transmit time
        receivers: Candidate (node id, position) pairs
        now: Transmit time
        stream: Channel random stream
        jam_regions: Regions active right now; defaults to ``cfg.jam_regions``

    Returns:
        One reception outcome per candidate, in candidate order
    """
    regions = tuple(cfg.jam_regions if jam_regions is None else jam_regions)
    range_sq = cfg.range_m * cfg.range_m
    outcomes: list[Reception] = []
    for node_id, pos in receivers:
        dx = pos.x - sender_pos.x
        dy = pos.y - sender_pos.y
        if dx * dx + dy * dy > range_sq:
            outcomes.append(Lost(node_id, LossReason.OUT_OF_RANGE))
            continue
        loss_draw = stream.random()
        jitter = stream.integer(0, cfg.jitter_us)
        if any(region.covers(pos) for region in regions):
            _LOGGER.debug("Frame to %d jammed at %d us", node_id, now)
            outcomes.append(Lost(node_id, LossReason.JAMMED))
        elif loss_draw < cfg.loss_probability:
            _LOGGER.debug("Frame to %d lost at %d us", node_id, now)
            outcomes.append(Lost(node_id, LossReason.RANDOM))
        else:
            outcomes.append(Delivered(node_id, now + cfg.per_hop_delay_us + jitter))
    return outcomes
