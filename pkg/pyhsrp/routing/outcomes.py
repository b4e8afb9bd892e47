"""Handler results.

Protocol handlers never raise for per-packet failures. They return one of
these values and the simulation applies it (transmit, count, trace).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum

from ..packets import DataPacket, RerrMsg, RreqMsg, RrepMsg, SignedControlPacket


class DropReason(StrEnum):
    DUPLICATE = "duplicate"
    TTL = "ttl"
    WORSE = "worse"
    STALE = "stale"
    NO_ROUTE = "no_route"
    NO_TRUSTED_ROUTE = "no_trusted_route"
    BAD_SIGNATURE = "bad_signature"
    RATE_LIMITED = "rate_limited"
    IMPLAUSIBLE_SEQ = "implausible_seq"
    UNTRUSTED = "untrusted"
    BUFFER_OVERFLOW = "buffer_overflow"
    SWALLOWED = "swallowed"
    CHANNEL = "channel"
    PAYLOAD_CORRUPT = "payload_corrupt"
    NOT_ADOPTED = "not_adopted"


@dataclass(frozen=True, slots=True)
class Forward:
    """Rebroadcast the (already updated) packet."""

    packet: RreqMsg | SignedControlPacket


@dataclass(frozen=True, slots=True)
class Reply:
    """Unicast a route reply to ``next_hop``."""

    packet: RrepMsg | SignedControlPacket
    next_hop: int
    forged: bool = False


@dataclass(frozen=True, slots=True)
class Drop:
    """Packet discarded; ``penalized`` names the node blamed, if any."""

    reason: DropReason
    penalized: int | None = None


@dataclass(frozen=True, slots=True)
class InstallAndForward:
    """Route installed; pass the reply on toward the origin."""

    packet: RrepMsg | SignedControlPacket
    next_hop: int


@dataclass(frozen=True, slots=True)
class InstallOnly:
    """Route installed at the discovery origin."""

    dest: int


@dataclass(frozen=True, slots=True)
class NextHop:
    node: int


@dataclass(frozen=True, slots=True)
class Buffered:
    """Data queued at its source while a route is discovered."""

    rreq: RreqMsg | SignedControlPacket | None = None
    evicted: DataPacket | None = None


@dataclass(frozen=True, slots=True)
class Dropped:
    """Data packet dropped at this node."""

    reason: DropReason
    rerr: RerrMsg | None = None


@dataclass(frozen=True, slots=True)
class UpdateResult:
    """How a proactive update was applied."""

    refreshed: bool = False
    adopted: bool = False
    rejected: DropReason | None = None


RreqOutcome = Forward | Reply | Drop
RrepOutcome = InstallAndForward | InstallOnly | Drop
DataOutcome = NextHop | Buffered | Dropped

