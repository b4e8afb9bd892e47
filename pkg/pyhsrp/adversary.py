"""Attacker profiles and the behaviors that override honest handlers.

A node consults its :class:`NodeBehavior` at three points: before answering
an RREQ, when passing an RREP on, and before forwarding data. The honest
behavior changes nothing. Jamming lives in the channel; a jammer profile
only claims a jam region so that its activity window applies to it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import StrEnum
from typing import TYPE_CHECKING

from .const import (
    ACTIVE_ROUTE_LIFETIME_US,
    BLACKHOLE_SEQ_INFLATION,
    DEFAULT_FLOODER_RATE,
    DEFAULT_SINKHOLE_DROP,
    FLOODER_TICK_US,
    NONEXISTENT_NODE,
)
from .kernel import RandomStream, SimTime

if TYPE_CHECKING:
    from .packets import DataPacket, RreqMsg, RrepMsg
    from .routing.aodv import AodvNode

_LOGGER = logging.getLogger(__name__)


class AttackKind(StrEnum):
    BLACKHOLE = "blackhole"
    FLOODER = "flooder"
    SINKHOLE = "sinkhole"
    JAMMER = "jammer"


@dataclass(frozen=True, slots=True)
class AttackProfile:
    """What one attacker does and when."""

    kind: AttackKind
    active_from: SimTime = 0
    active_until: SimTime | None = None
    rate: float = DEFAULT_FLOODER_RATE
    target: int = NONEXISTENT_NODE
    drop_fraction: float = DEFAULT_SINKHOLE_DROP
    region: int | None = None
    seq_inflation: int = BLACKHOLE_SEQ_INFLATION
    masquerade: bool = False

    def __post_init__(self) -> None:
        if self.rate < 0:
            raise ValueError(f"flood rate must be >= 0 (got {self.rate})")
        if not 0.0 <= self.drop_fraction <= 1.0:
            raise ValueError(f"drop_fraction must be in [0, 1] (got {self.drop_fraction})")
        if self.active_until is not None and self.active_until < self.active_from:
            raise ValueError("active_until precedes active_from")
        if self.kind is AttackKind.JAMMER and self.region is None:
            raise ValueError("jammer profile needs a jam region index")

    def active(self, now: SimTime) -> bool:
        """True inside ``[active_from, active_until)``."""
        if now < self.active_from:
            return False
        return self.active_until is None or now < self.active_until


@dataclass(frozen=True, slots=True)
class AttackEvent:
    """Ground-truth record of an adversarial action."""

    at: SimTime
    node: int
    kind: str
    detail: dict[str, int]


class NodeBehavior:
    """Honest behavior; attacker subclasses override the hooks."""

    profile: AttackProfile | None = None

    def __init__(self) -> None:
        self.events: list[AttackEvent] = []

    def is_active(self, now: SimTime) -> bool:
        return self.profile is not None and self.profile.active(now)

    def on_rreq(self, node: AodvNode, msg: RreqMsg, from_: int, now: SimTime) -> RrepMsg | None:
        """Return a reply to send instead of honest handling, or None."""
        return None

    def rewrite_rrep(self, node: AodvNode, msg: RrepMsg, now: SimTime) -> RrepMsg:
        return msg

    def swallow_data(self, node: AodvNode, packet: DataPacket, now: SimTime) -> bool:
        return False

    def claimed_signer(self, node: AodvNode, msg: RrepMsg) -> int | None:
        """Node id to list in place of the attacker's own when signing."""
        return None

    def _log(self, now: SimTime, node: int, kind: str, **detail: int) -> None:
        self.events.append(AttackEvent(now, node, kind, detail))
        _LOGGER.debug("Attacker %d %s at %d us %s", node, kind, now, detail)


HONEST = NodeBehavior()


def blackhole_on_rreq(node: AodvNode, rreq: RreqMsg, profile: AttackProfile) -> RrepMsg:
    """Forge a reply that claims a very fresh one-hop route to the destination."""
    best = node.known_seq(rreq.dest) or 0
    if rreq.dest_seq_known is not None:
        best = max(best, rreq.dest_seq_known)
    return RrepMsg(
        origin=rreq.origin,
        dest=rreq.dest,
        dest_seq=best + profile.seq_inflation,
        hop_count=0 if profile.masquerade else 1,
        lifetime_us=ACTIVE_ROUTE_LIFETIME_US,
    )


class BlackholeBehavior(NodeBehavior):
    """Answers every route request and drops all data it attracts."""

    def __init__(self, profile: AttackProfile) -> None:
        super().__init__()
        self.profile = profile

    def on_rreq(self, node: AodvNode, msg: RreqMsg, from_: int, now: SimTime) -> RrepMsg | None:
        if not self.is_active(now) or msg.dest == node.node_id:
            return None
        assert self.profile is not None
        forged = blackhole_on_rreq(node, msg, self.profile)
        self._log(now, node.node_id, "forged_rrep", dest=msg.dest, dest_seq=forged.dest_seq)
        return forged

    def claimed_signer(self, node: AodvNode, msg: RrepMsg) -> int | None:
        if self.profile is not None and self.profile.masquerade and msg.dest != node.node_id:
            return msg.dest
        return None

    def swallow_data(self, node: AodvNode, packet: DataPacket, now: SimTime) -> bool:
        if not self.is_active(now) or packet.src == node.node_id:
            return False
        self._log(now, node.node_id, "swallowed", packet=packet.packet_id)
        return True


class SinkholeBehavior(NodeBehavior):
    """Advertises better metrics than it has and drops part of the data."""

    def __init__(self, profile: AttackProfile, stream: RandomStream) -> None:
        super().__init__()
        self.profile = profile
        self.stream = stream

    def on_rreq(self, node: AodvNode, msg: RreqMsg, from_: int, now: SimTime) -> RrepMsg | None:
        if not self.is_active(now) or msg.dest == node.node_id:
            return None
        route = node.route_to(msg.dest, now)
        if route is None:
            return None
        best = max(route.dest_seq, node.known_seq(msg.dest) or 0, msg.dest_seq_known or 0)
        forged = RrepMsg(
            origin=msg.origin,
            dest=msg.dest,
            dest_seq=best + 1,
            hop_count=max(1, route.hop_count - 1),
            lifetime_us=ACTIVE_ROUTE_LIFETIME_US,
        )
        self._log(now, node.node_id, "sinkhole_rrep", dest=msg.dest, dest_seq=forged.dest_seq)
        return forged

    def rewrite_rrep(self, node: AodvNode, msg: RrepMsg, now: SimTime) -> RrepMsg:
        if not self.is_active(now):
            return msg
        self._log(now, node.node_id, "sinkhole_rewrite", dest=msg.dest)
        return sinkhole_behavior(msg)

    def swallow_data(self, node: AodvNode, packet: DataPacket, now: SimTime) -> bool:
        if not self.is_active(now) or packet.src == node.node_id:
            return False
        assert self.profile is not None
        # one draw per attracted packet
        if self.stream.random() < self.profile.drop_fraction:
            self._log(now, node.node_id, "swallowed", packet=packet.packet_id)
            return True
        return False


def sinkhole_behavior(msg: RrepMsg) -> RrepMsg:
    """Make a passing reply look one hop shorter and one sequence fresher."""
    return replace(msg, hop_count=max(1, msg.hop_count - 1), dest_seq=msg.dest_seq + 1)


class FlooderBehavior(NodeBehavior):
    """Emits route requests for a destination that never answers."""

    def __init__(self, profile: AttackProfile, stream: RandomStream) -> None:
        super().__init__()
        self.profile = profile
        self.stream = stream


class JammerBehavior(NodeBehavior):
    """Claims a jam region; the channel does the rest."""

    def __init__(self, profile: AttackProfile) -> None:
        super().__init__()
        self.profile = profile


def flooder_tick(
    node: AodvNode,
    profile: AttackProfile,
    stream: RandomStream,
    now: SimTime,
    tick: SimTime = FLOODER_TICK_US,
) -> list[tuple[SimTime, RreqMsg]]:
    """Route requests a flooder emits during ``[now, now + tick)``.

    Emission times are Poisson arrivals at ``profile.rate`` per second.
    Each request has a fresh id and targets ``profile.target``.
    """
    if profile.rate <= 0 or not profile.active(now):
        return []
    mean_gap_us = 1_000_000 / profile.rate
    out: list[tuple[SimTime, RreqMsg]] = []
    t = float(now)
    while True:
        t += stream.exponential(mean_gap_us)
        at = int(t)
        if at >= now + tick or not profile.active(at):
            break
        out.append((at, node.new_rreq(profile.target, now)))
    return out


def make_behavior(profile: AttackProfile | None, stream: RandomStream) -> NodeBehavior:
    """Behavior object for a node's profile (honest when ``profile`` is None)."""
    if profile is None:
        return NodeBehavior()
    if profile.kind is AttackKind.BLACKHOLE:
        return BlackholeBehavior(profile)
    if profile.kind is AttackKind.SINKHOLE:
        return SinkholeBehavior(profile, stream)
    if profile.kind is AttackKind.FLOODER:
        return FlooderBehavior(profile, stream)
    return JammerBehavior(profile)
