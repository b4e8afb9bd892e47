"""Packet types and the binary wire format.

All integers are big-endian. Every frame starts with a one-byte type tag.
The layout of each frame is documented in docs/wire_format.md; trace logs
store signed control packets as hex of :func:`encode`.

Signed packets authenticate :func:`canonical_bytes`, which holds only fields
no forwarder may change. RREQ hop count and TTL are excluded. For RREPs the
replier's claimed hop count is derived as
``hop_count - (len(hop_list) - 1)`` and included, so a forwarder that edits
the hop count breaks every signature on the chain.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, replace
from enum import IntEnum, StrEnum

from .crypto.multisig import MultiSig, decode_chain, encode_chain
from .kernel import SimTime

_LOGGER = logging.getLogger(__name__)

CANONICAL_PREFIX = b"pyhsrp/1"

_RREQ = struct.Struct(">IIIIBIBB")
_RREP = struct.Struct(">IIIBI")
_RERR_ITEM = struct.Struct(">II")
_HELLO_HEAD = struct.Struct(">IIH")
_HELLO_REPORT = struct.Struct(">BId")
_UPDATE = struct.Struct(">IIIIBQ")
_DATA_HEAD = struct.Struct(">QIIIQIBBI")


class PacketType(IntEnum):
    RREQ = 1
    RREP = 2
    RERR = 3
    HELLO = 4
    UPDATE = 5
    DATA = 6
    SIGNED = 7


class GossipKind(StrEnum):
    REPUTATION = "reputation"
    RECOMMENDATION = "recommendation"


_GOSSIP_CODES = {GossipKind.REPUTATION: 1, GossipKind.RECOMMENDATION: 2}
_GOSSIP_KINDS = {code: kind for kind, code in _GOSSIP_CODES.items()}


@dataclass(frozen=True, slots=True)
class RreqMsg:
    """Route request, flooded."""

    rreq_id: tuple[int, int]  # (origin, counter)
    origin: int
    origin_seq: int
    dest: int
    dest_seq_known: int | None
    hop_count: int = 0
    ttl: int = 0

    def forwarded(self) -> RreqMsg:
        """Copy for rebroadcast: one more hop, one less TTL."""
        return replace(self, hop_count=self.hop_count + 1, ttl=self.ttl - 1)


@dataclass(frozen=True, slots=True)
class RrepMsg:
    """Route reply, unicast back along the reverse path.

    ``hop_count`` counts hops from the transmitter to ``dest``.
    """

    origin: int
    dest: int
    dest_seq: int
    hop_count: int
    lifetime_us: SimTime

    def forwarded(self) -> RrepMsg:
        return replace(self, hop_count=self.hop_count + 1)


@dataclass(frozen=True, slots=True)
class RerrMsg:
    """Route error listing (destination, sequence) pairs now unreachable."""

    unreachable: tuple[tuple[int, int], ...]

    @property
    def destinations(self) -> tuple[int, ...]:
        return tuple(dest for dest, _seq in self.unreachable)


@dataclass(frozen=True, slots=True)
class GossipReport:
    """Trust opinion piggybacked on a HELLO."""

    kind: GossipKind
    peer: int
    score: float


@dataclass(frozen=True, slots=True)
class HelloMsg:
    """One-hop liveness beacon with the sender's neighbor list."""

    origin: int
    seq: int
    neighbors: tuple[int, ...] = ()
    reports: tuple[GossipReport, ...] = ()


@dataclass(frozen=True, slots=True)
class ProactiveUpdate:
    """Periodic single-hop route maintenance message."""

    update_id: tuple[int, int]  # (issuer, counter)
    issuer: int
    about_dest: int
    dest_seq: int
    advertised_hop_count: int
    issued_at: SimTime


@dataclass(frozen=True, slots=True)
class DataPacket:
    """Application payload of one CBR flow."""

    packet_id: int
    flow_id: int
    src: int
    dst: int
    created_at: SimTime
    size_bytes: int
    payload: bytes = b""
    ttl: int = 0
    encrypted: bool = False

    def forwarded(self) -> DataPacket:
        return replace(self, ttl=self.ttl - 1)


ControlInner = RreqMsg | RrepMsg | ProactiveUpdate


@dataclass(frozen=True, slots=True)
class SignedControlPacket:
    """Control packet carrying the hop list and one signature per hop."""

    inner: ControlInner
    hop_list: tuple[int, ...]
    chain: MultiSig

    @property
    def replier(self) -> int:
        """First signer: the originator of the inner message."""
        return self.hop_list[0]


Packet = RreqMsg | RrepMsg | RerrMsg | HelloMsg | ProactiveUpdate | DataPacket | SignedControlPacket


def packet_kind(packet: Packet) -> str:
    """Short lowercase label used in counters and trace records."""
    if isinstance(packet, SignedControlPacket):
        packet = packet.inner
    if isinstance(packet, RreqMsg):
        return "rreq"
    if isinstance(packet, RrepMsg):
        return "rrep"
    if isinstance(packet, RerrMsg):
        return "rerr"
    if isinstance(packet, HelloMsg):
        return "hello"
    if isinstance(packet, ProactiveUpdate):
        return "proactive"
    return "data"


def claimed_hop_count(rrep: RrepMsg, hop_list_length: int) -> int:
    """Hop count the replier put in the RREP before any forwarding."""
    return rrep.hop_count - (hop_list_length - 1)


def canonical_bytes(inner: ControlInner, hop_list_length: int = 1) -> bytes:
    """Immutable content covered by every signature on the chain."""
    if isinstance(inner, RreqMsg):
        known = inner.dest_seq_known
        body = struct.pack(
            ">BIIIIBI",
            PacketType.RREQ,
            inner.origin,
            inner.rreq_id[1],
            inner.origin_seq,
            inner.dest,
            known is not None,
            known or 0,
        )
    elif isinstance(inner, RrepMsg):
        body = struct.pack(
            ">BIIIIi",
            PacketType.RREP,
            inner.origin,
            inner.dest,
            inner.dest_seq,
            inner.lifetime_us,
            claimed_hop_count(inner, hop_list_length),
        )
    else:
        body = bytes([PacketType.UPDATE]) + _UPDATE.pack(
            inner.issuer,
            inner.update_id[1],
            inner.about_dest,
            inner.dest_seq,
            inner.advertised_hop_count,
            inner.issued_at,
        )
    return CANONICAL_PREFIX + body


def encode(packet: Packet) -> bytes:
    """Serialize a packet to its wire form."""
    if isinstance(packet, RreqMsg):
        known = packet.dest_seq_known
        return bytes([PacketType.RREQ]) + _RREQ.pack(
            packet.origin,
            packet.rreq_id[1],
            packet.origin_seq,
            packet.dest,
            known is not None,
            known or 0,
            packet.hop_count,
            packet.ttl,
        )
    if isinstance(packet, RrepMsg):
        return bytes([PacketType.RREP]) + _RREP.pack(
            packet.origin, packet.dest, packet.dest_seq, packet.hop_count, packet.lifetime_us
        )
    if isinstance(packet, RerrMsg):
        items = b"".join(_RERR_ITEM.pack(dest, seq) for dest, seq in packet.unreachable)
        return bytes([PacketType.RERR, len(packet.unreachable)]) + items
    if isinstance(packet, HelloMsg):
        parts = [
            bytes([PacketType.HELLO]),
            _HELLO_HEAD.pack(packet.origin, packet.seq, len(packet.neighbors)),
            struct.pack(f">{len(packet.neighbors)}I", *packet.neighbors),
            bytes([len(packet.reports)]),
        ]
        parts.extend(
            _HELLO_REPORT.pack(_GOSSIP_CODES[report.kind], report.peer, report.score)
            for report in packet.reports
        )
        return b"".join(parts)
    if isinstance(packet, ProactiveUpdate):
        return bytes([PacketType.UPDATE]) + _UPDATE.pack(
            packet.issuer,
            packet.update_id[1],
            packet.about_dest,
            packet.dest_seq,
            packet.advertised_hop_count,
            packet.issued_at,
        )
    if isinstance(packet, DataPacket):
        return (
            bytes([PacketType.DATA])
            + _DATA_HEAD.pack(
                packet.packet_id,
                packet.flow_id,
                packet.src,
                packet.dst,
                packet.created_at,
                packet.size_bytes,
                packet.ttl,
                packet.encrypted,
                len(packet.payload),
            )
            + packet.payload
        )
    inner = encode(packet.inner)
    return b"".join(
        (
            bytes([PacketType.SIGNED]),
            struct.pack(">H", len(inner)),
            inner,
            bytes([len(packet.hop_list)]),
            struct.pack(f">{len(packet.hop_list)}I", *packet.hop_list),
            encode_chain(packet.chain),
        )
    )


def decode(data: bytes) -> Packet:
    """Parse a frame produced by :func:`encode`.

    Raises:
        ValueError: If the frame is truncated or the type tag is unknown
    """
    try:
        return _decode(data)
    except (struct.error, IndexError, KeyError) as err:
        _LOGGER.debug("Malformed %d-byte frame: %s", len(data), err)
        raise ValueError(f"malformed frame: {err}") from err


def _decode(data: bytes) -> Packet:
    if not data:
        raise ValueError("empty frame")
    tag = PacketType(data[0])
    if tag is PacketType.RREQ:
        origin, counter, origin_seq, dest, has_known, known, hop, ttl = _RREQ.unpack_from(data, 1)
        return RreqMsg(
            rreq_id=(origin, counter),
            origin=origin,
            origin_seq=origin_seq,
            dest=dest,
            dest_seq_known=known if has_known else None,
            hop_count=hop,
            ttl=ttl,
        )
    if tag is PacketType.RREP:
        return RrepMsg(*_RREP.unpack_from(data, 1))
    if tag is PacketType.RERR:
        count = data[1]
        return RerrMsg(
            tuple(_RERR_ITEM.unpack_from(data, 2 + i * _RERR_ITEM.size) for i in range(count))
        )
    if tag is PacketType.HELLO:
        origin, seq, n_neighbors = _HELLO_HEAD.unpack_from(data, 1)
        offset = 1 + _HELLO_HEAD.size
        neighbor_ids = struct.unpack_from(f">{n_neighbors}I", data, offset)
        offset += 4 * n_neighbors
        n_reports = data[offset]
        offset += 1
        reports = []
        for _ in range(n_reports):
            code, peer, score = _HELLO_REPORT.unpack_from(data, offset)
            offset += _HELLO_REPORT.size
            reports.append(GossipReport(_GOSSIP_KINDS[code], peer, score))
        return HelloMsg(origin, seq, tuple(neighbor_ids), tuple(reports))
    if tag is PacketType.UPDATE:
        issuer, counter, about, seq, adv, issued_at = _UPDATE.unpack_from(data, 1)
        return ProactiveUpdate((issuer, counter), issuer, about, seq, adv, issued_at)
    if tag is PacketType.DATA:
        head = _DATA_HEAD.unpack_from(data, 1)
        packet_id, flow_id, src, dst, created_at, size, ttl, encrypted, length = head
        start = 1 + _DATA_HEAD.size
        payload = bytes(data[start : start + length])
        if len(payload) != length:
            raise ValueError("truncated payload")
        return DataPacket(
            packet_id, flow_id, src, dst, created_at, size, payload, ttl, bool(encrypted)
        )
    (inner_len,) = struct.unpack_from(">H", data, 1)
    inner = _decode(data[3 : 3 + inner_len])
    if not isinstance(inner, RreqMsg | RrepMsg | ProactiveUpdate):
        raise ValueError(f"signed frame wraps unsupported {type(inner).__name__}")
    offset = 3 + inner_len
    n_hops = data[offset]
    hop_list = struct.unpack_from(f">{n_hops}I", data, offset + 1)
    chain, _end = decode_chain(data, offset + 1 + 4 * n_hops)
    return SignedControlPacket(inner, tuple(hop_list), chain)
