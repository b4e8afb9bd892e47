"""Baseline on-demand distance-vector routing node.

Handlers are pure state transitions on one node: they take a received
message and return an outcome describing what to transmit. Timers, the
channel and counters live in the simulation.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Hashable
from dataclasses import dataclass

from ..adversary import HONEST, NodeBehavior
from ..const import (
    ACTIVE_ROUTE_LIFETIME_US,
    ALLOWED_HELLO_LOSS,
    BUFFER_CAPACITY,
    DATA_TTL,
    HELLO_INTERVAL_US,
    NET_DIAMETER_TTL,
    PROTOCOL_AODV,
    RREQ_RETRIES,
    RREQ_WAIT_US,
    SEEN_CACHE_CAPACITY,
    SEEN_CACHE_RETENTION_US,
)
from ..exceptions import RouteAlreadyValid
from ..kernel import SimTime
from ..metrics import RunCounters
from ..packets import (
    ControlInner,
    DataPacket,
    HelloMsg,
    Packet,
    RerrMsg,
    RreqMsg,
    RrepMsg,
)
from .outcomes import (
    Buffered,
    DataOutcome,
    Drop,
    Dropped,
    DropReason,
    Forward,
    InstallAndForward,
    InstallOnly,
    NextHop,
    Reply,
    RreqOutcome,
    RrepOutcome,
)
from .routes import RouteEntry, RouteState, RouteTable, SeenCache

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class AodvConfig:
    """Reactive routing constants."""

    active_route_lifetime_us: SimTime = ACTIVE_ROUTE_LIFETIME_US
    rreq_retries: int = RREQ_RETRIES
    rreq_wait_us: SimTime = RREQ_WAIT_US
    net_diameter_ttl: int = NET_DIAMETER_TTL
    hello_interval_us: SimTime = HELLO_INTERVAL_US
    allowed_hello_loss: int = ALLOWED_HELLO_LOSS
    buffer_capacity: int = BUFFER_CAPACITY
    seen_cache_capacity: int = SEEN_CACHE_CAPACITY
    seen_cache_retention_us: SimTime = SEEN_CACHE_RETENTION_US
    data_ttl: int = DATA_TTL


def rreq_key(msg: RreqMsg) -> Hashable:
    """Duplicate-cache key of a route request."""
    return ("rreq", msg.rreq_id[0], msg.rreq_id[1])


class AodvNode:
    """Per-node AODV state machine."""

    protocol = PROTOCOL_AODV

    def __init__(
        self,
        node_id: int,
        cfg: AodvConfig | None = None,
        *,
        counters: RunCounters | None = None,
        behavior: NodeBehavior | None = None,
    ) -> None:
        self.node_id = node_id
        self.cfg = cfg or AodvConfig()
        self.counters = counters if counters is not None else RunCounters()
        self.behavior = behavior or HONEST
        self.seq = 0
        self.rreq_counter = 0
        self.routes = RouteTable()
        self.seen = SeenCache(self.cfg.seen_cache_capacity, self.cfg.seen_cache_retention_us)
        self.buffer: deque[DataPacket] = deque()
        self.pending: dict[int, int] = {}
        self.last_known: dict[int, int] = {}
        self.last_heard: dict[int, SimTime] = {}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.node_id})"

    # -- sequence numbers -------------------------------------------------

    def note_seq(self, dest: int, seq: int) -> None:
        """Remember the greatest sequence number seen for ``dest``."""
        if dest == self.node_id:
            return
        if seq > self.last_known.get(dest, -1):
            self.last_known[dest] = seq

    def known_seq(self, dest: int) -> int | None:
        return self.last_known.get(dest)

    # -- route table ------------------------------------------------------

    def route_to(self, dest: int, now: SimTime) -> RouteEntry | None:
        """Usable route to ``dest``, if any."""
        return self.routes.lookup(dest, now)

    def has_route(self, dest: int, now: SimTime) -> bool:
        return self.route_to(dest, now) is not None

    def install_route(
        self,
        dest: int,
        next_hop: int,
        dest_seq: int,
        hop_count: int,
        now: SimTime,
        *,
        last_hop: int | None = None,
        lifetime: SimTime | None = None,
    ) -> bool:
        """Apply the sequence-number freshness rule.

        A route replaces the current entry if it is fresher, or equally fresh
        and shorter. An unusable entry is replaced by any route at least as
        fresh. Stored sequence numbers never decrease.

        Returns:
            True if the table changed
        """
        del last_hop
        expires = now + (lifetime if lifetime is not None else self.cfg.active_route_lifetime_us)
        existing = self.routes.get(dest)
        if existing is not None:
            if existing.usable(now):
                fresher = dest_seq > existing.dest_seq
                shorter = dest_seq == existing.dest_seq and hop_count < existing.hop_count
                if existing.next_hop == next_hop and dest_seq == existing.dest_seq:
                    existing.expires_at = max(existing.expires_at, expires)
                    if hop_count < existing.hop_count:
                        existing.hop_count = hop_count
                        return True
                    return False
                if not (fresher or shorter):
                    return False
            elif dest_seq < existing.dest_seq:
                return False
            precursors = existing.precursors
        else:
            precursors = set()
        self.routes.put(
            RouteEntry(
                dest=dest,
                next_hop=next_hop,
                dest_seq=dest_seq,
                hop_count=hop_count,
                expires_at=expires,
                precursors=precursors,
            )
        )
        self.note_seq(dest, dest_seq)
        return True

    def refresh_route(self, dest: int, now: SimTime) -> None:
        """Extend a route's lifetime because it carried traffic."""
        entry = self.routes.lookup(dest, now)
        if entry is not None:
            entry.expires_at = max(entry.expires_at, now + self.cfg.active_route_lifetime_us)

    def add_precursor(self, dest: int, neighbor: int, now: SimTime) -> None:
        entry = self.routes.lookup(dest, now)
        if entry is not None:
            entry.precursors.add(neighbor)

    def invalidate_via(
        self, neighbor: int, now: SimTime, rerr_seqs: dict[int, int] | None = None
    ) -> list[tuple[int, int]]:
        """Invalidate usable routes whose next hop is ``neighbor``.

        With ``rerr_seqs`` only the listed destinations are affected and each
        stored sequence number is raised to at least the reported one.
        Otherwise (link break) every affected sequence number is incremented.
        """
        lost: list[tuple[int, int]] = []
        for entry in self.routes:
            if entry.next_hop != neighbor or not entry.usable(now):
                continue
            if rerr_seqs is None:
                entry.dest_seq += 1
            elif entry.dest in rerr_seqs:
                entry.dest_seq = max(entry.dest_seq, rerr_seqs[entry.dest])
            else:
                continue
            entry.state = RouteState.INVALID
            self.note_seq(entry.dest, entry.dest_seq)
            lost.append((entry.dest, entry.dest_seq))
        return lost

    def stored_seq(self, dest: int) -> int | None:
        entry = self.routes.get(dest)
        return None if entry is None else entry.dest_seq

    def routes_snapshot(self, now: SimTime) -> dict[int, int]:
        """Selected next hop per destination, for loop scanning."""
        return {entry.dest: entry.next_hop for entry in self.routes if entry.usable(now)}

    # -- discovery --------------------------------------------------------

    def seal(self, inner: ControlInner) -> Packet:
        """Wrap an originated control message for transmission."""
        return inner

    def new_rreq(self, dest: int, now: SimTime) -> RreqMsg:
        """Build a fresh route request and mark it as seen locally."""
        self.seq += 1
        self.rreq_counter += 1
        msg = RreqMsg(
            rreq_id=(self.node_id, self.rreq_counter),
            origin=self.node_id,
            origin_seq=self.seq,
            dest=dest,
            dest_seq_known=self.known_seq(dest),
            hop_count=0,
            ttl=self.cfg.net_diameter_ttl,
        )
        self.seen.insert(rreq_key(msg), now)
        return msg

    def originate_rreq(self, dest: int, now: SimTime) -> Packet:
        """Start route discovery for ``dest``.

        Raises:
            RouteAlreadyValid: If a usable route already exists
        """
        if self.has_route(dest, now):
            raise RouteAlreadyValid(f"node {self.node_id} already has a route to {dest}")
        self.pending.setdefault(dest, 0)
        msg = self.new_rreq(dest, now)
        _LOGGER.debug("Node %d discovering %d (rreq %s)", self.node_id, dest, msg.rreq_id)
        return self.seal(msg)

    def discovery_timeout(self, dest: int, now: SimTime) -> Packet | None:
        """Retry discovery after the wait expired.

        Returns:
            The retry RREQ, or None when the route exists or retries are spent
        """
        if dest not in self.pending:
            return None
        if self.has_route(dest, now):
            del self.pending[dest]
            return None
        attempts = self.pending[dest]
        if attempts >= self.cfg.rreq_retries:
            del self.pending[dest]
            return None
        self.pending[dest] = attempts + 1
        return self.seal(self.new_rreq(dest, now))

    def retry_wait(self, dest: int) -> SimTime:
        """Wait before the next retry, doubled per attempt already made."""
        return self.cfg.rreq_wait_us * (2 ** self.pending.get(dest, 0))

    def handle_rreq(self, msg: RreqMsg, from_: int, now: SimTime) -> RreqOutcome:
        """Process a received RREQ.

        Duplicates are dropped. Otherwise the reverse route to the origin is
        installed, then the node replies (as destination, or from a route at
        least as fresh as the requested sequence number) or rebroadcasts.
        """
        if msg.origin == self.node_id:
            return Drop(DropReason.DUPLICATE)
        if not self.counters.record_hf_store(self.node_id, self.seen, rreq_key(msg), now):
            return Drop(DropReason.DUPLICATE)
        return self.process_rreq(msg, from_, now)

    def process_rreq(
        self, msg: RreqMsg, from_: int, now: SimTime, *, last_hop: int | None = None
    ) -> RreqOutcome:
        self.install_route(
            msg.origin, from_, msg.origin_seq, msg.hop_count + 1, now, last_hop=last_hop
        )
        self.note_seq(msg.origin, msg.origin_seq)

        forged = self.behavior.on_rreq(self, msg, from_, now)
        if forged is not None:
            return Reply(forged, from_, forged=True)

        if msg.dest == self.node_id:
            self.seq = max(self.seq, msg.dest_seq_known or 0) + 1
            return Reply(
                RrepMsg(
                    origin=msg.origin,
                    dest=self.node_id,
                    dest_seq=self.seq,
                    hop_count=0,
                    lifetime_us=self.cfg.active_route_lifetime_us,
                ),
                from_,
            )

        route = self.route_to(msg.dest, now)
        if (
            route is not None
            and msg.dest_seq_known is not None
            and route.dest_seq >= msg.dest_seq_known
        ):
            route.precursors.add(from_)
            self.add_precursor(msg.origin, route.next_hop, now)
            return Reply(
                RrepMsg(
                    origin=msg.origin,
                    dest=msg.dest,
                    dest_seq=route.dest_seq,
                    hop_count=route.hop_count,
                    lifetime_us=route.expires_at - now,
                ),
                from_,
            )

        if msg.ttl - 1 <= 0:
            return Drop(DropReason.TTL)
        return Forward(msg.forwarded())

    def handle_rrep(
        self, msg: RrepMsg, from_: int, now: SimTime, *, last_hop: int | None = None
    ) -> RrepOutcome:
        """Install the forward route and pass the reply toward the origin."""
        stored = self.stored_seq(msg.dest)
        if not self.install_route(
            msg.dest,
            from_,
            msg.dest_seq,
            msg.hop_count + 1,
            now,
            last_hop=last_hop,
            lifetime=msg.lifetime_us,
        ):
            if stored is not None and msg.dest_seq < stored:
                return Drop(DropReason.STALE)
            return Drop(DropReason.WORSE)
        return self.after_rrep_install(msg, from_, now)

    def after_rrep_install(self, msg: RrepMsg, from_: int, now: SimTime) -> RrepOutcome:
        if msg.origin == self.node_id:
            self.pending.pop(msg.dest, None)
            return InstallOnly(msg.dest)
        reverse = self.route_to(msg.origin, now)
        if reverse is None:
            return Drop(DropReason.NO_ROUTE)
        self.add_precursor(msg.dest, reverse.next_hop, now)
        reverse.precursors.add(from_)
        rewritten = self.behavior.rewrite_rrep(self, msg.forwarded(), now)
        return InstallAndForward(rewritten, reverse.next_hop)

    # -- maintenance ------------------------------------------------------

    def handle_link_break(self, dead_neighbor: int, now: SimTime) -> list[RerrMsg]:
        """Invalidate every route through ``dead_neighbor``.

        Returns:
            One RERR naming all newly unreachable destinations, or nothing
        """
        self.last_heard.pop(dead_neighbor, None)
        lost = self.invalidate_via(dead_neighbor, now)
        if not lost:
            return []
        _LOGGER.debug(
            "Node %d lost link to %d, %d routes invalidated", self.node_id, dead_neighbor, len(lost)
        )
        return [RerrMsg(tuple(lost))]

    def handle_rerr(self, msg: RerrMsg, from_: int, now: SimTime) -> list[RerrMsg]:
        """Cascade an RERR to routes that used its sender as next hop."""
        lost = self.invalidate_via(from_, now, dict(msg.unreachable))
        return [RerrMsg(tuple(lost))] if lost else []

    def make_hello(self, now: SimTime) -> HelloMsg:
        del now
        return HelloMsg(origin=self.node_id, seq=self.seq)

    def handle_hello(self, msg: HelloMsg, from_: int, now: SimTime) -> None:
        """Record neighbor liveness and keep a one-hop route to it."""
        self.last_heard[from_] = now
        hello_lifetime = self.cfg.hello_interval_us * self.cfg.allowed_hello_loss
        self.install_route(from_, from_, msg.seq, 1, now, lifetime=hello_lifetime)

    def live_neighbors(self, now: SimTime) -> tuple[int, ...]:
        deadline = self.cfg.hello_interval_us * self.cfg.allowed_hello_loss
        return tuple(sorted(n for n, at in self.last_heard.items() if now - at <= deadline))

    def silent_neighbors(self, now: SimTime) -> list[int]:
        """Neighbors that missed ``allowed_hello_loss`` HELLOs in a row."""
        deadline = self.cfg.hello_interval_us * self.cfg.allowed_hello_loss
        return sorted(n for n, at in self.last_heard.items() if now - at > deadline)

    # -- data -------------------------------------------------------------

    def next_hop_for(self, dest: int, now: SimTime) -> int | None:
        route = self.route_to(dest, now)
        return None if route is None else route.next_hop

    def forward_data(self, packet: DataPacket, now: SimTime) -> DataOutcome:
        """Route a data packet that is not addressed to this node."""
        if self.behavior.swallow_data(self, packet, now):
            return Dropped(DropReason.SWALLOWED)
        if packet.src != self.node_id and packet.ttl <= 0:
            return Dropped(DropReason.TTL)
        next_hop = self.next_hop_for(packet.dst, now)
        if next_hop is not None:
            self.refresh_route(packet.dst, now)
            self.refresh_route(packet.src, now)
            return NextHop(next_hop)
        if packet.src == self.node_id:
            evicted = None
            self.buffer.append(packet)
            if len(self.buffer) > self.cfg.buffer_capacity:
                evicted = self.buffer.popleft()
            rreq = None if packet.dst in self.pending else self.originate_rreq(packet.dst, now)
            return Buffered(rreq=rreq, evicted=evicted)
        seq = self.known_seq(packet.dst)
        return Dropped(DropReason.NO_ROUTE, RerrMsg(((packet.dst, seq or 0),)))

    def take_buffered(self, dest: int) -> list[DataPacket]:
        """Remove and return buffered packets for ``dest`` in arrival order."""
        taken = [p for p in self.buffer if p.dst == dest]
        if taken:
            self.buffer = deque(p for p in self.buffer if p.dst != dest)
        return taken
