"""Hybrid secure routing node.

Discovery follows the reactive handlers of :class:`AodvNode`, but every
RREQ, RREP and proactive update travels inside a
:class:`SignedControlPacket` whose multi-signature chain grows by one entry
per hop. Routes are kept as sets of link-disjoint paths, refreshed by
periodic single-hop updates, and the next hop is picked among them by the
trust gate. Received control packets pass an inline pipeline before the
reactive handlers see them: chain verification, the per-originator flood
guard for RREQs, and the sequence-number plausibility check for RREPs.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, replace
from enum import StrEnum

from ..adversary import NodeBehavior
from ..const import (
    ENCRYPT_PAYLOADS,
    FLOOD_BUCKET_CAPACITY,
    FLOOD_REFILL_PER_S,
    MAINTENANCE_INTERVAL_US,
    MAX_PATHS,
    MAX_REPORTS_PER_HELLO,
    MAX_SEQ_JUMP,
    PROTOCOL_HSRP,
    SCHEME_KEYED_DIGEST,
    WATCHDOG_DEADLINE_US,
)
from ..crypto.multisig import MultiSig, multisig_append, multisig_verify
from ..crypto.signatures import KeyDirectory, KeyPairRecord
from ..exceptions import DuplicateSigner, PyHsrpError
from ..kernel import SimTime
from ..metrics import RunCounters
from ..packets import (
    ControlInner,
    DataPacket,
    GossipKind,
    GossipReport,
    HelloMsg,
    Packet,
    ProactiveUpdate,
    RreqMsg,
    RrepMsg,
    SignedControlPacket,
    canonical_bytes,
    claimed_hop_count,
)
from ..trust import LinkLabel, Outcome, ReportKind, TrustClass, TrustReport, TrustTable
from .aodv import AodvConfig, AodvNode, rreq_key
from .flood_guard import FloodGuardState
from .outcomes import (
    DataOutcome,
    Drop,
    Dropped,
    DropReason,
    Forward,
    InstallAndForward,
    Reply,
    RreqOutcome,
    RrepOutcome,
    UpdateResult,
)
from .routes import MultipathRouteSet, PathEntry, RouteEntry

_LOGGER = logging.getLogger(__name__)

_CLASS_RANK = {TrustClass.GOOD: 0, TrustClass.NEUTRAL: 1}


@dataclass(frozen=True, slots=True)
class HsrpConfig:
    """Settings layered on top of :class:`AodvConfig`."""

    max_paths: int = MAX_PATHS
    maintenance_interval_us: SimTime = MAINTENANCE_INTERVAL_US
    max_seq_jump: int = MAX_SEQ_JUMP
    watchdog_deadline_us: SimTime = WATCHDOG_DEADLINE_US
    flood_bucket_capacity: int = FLOOD_BUCKET_CAPACITY
    flood_refill_per_s: int = FLOOD_REFILL_PER_S
    max_reports_per_hello: int = MAX_REPORTS_PER_HELLO
    encrypt_payloads: bool = ENCRYPT_PAYLOADS
    verify_signatures: bool = True
    allow_insecure_fallback: bool = False
    signature_scheme: str = SCHEME_KEYED_DIGEST


@dataclass(frozen=True, slots=True)
class NoTrustedRoute:
    """Every candidate next hop is classified Bad."""

    excluded: tuple[int, ...]


class Plausibility(StrEnum):
    PLAUSIBLE = "plausible"
    IMPLAUSIBLE = "implausible"


SignedOutcome = RreqOutcome | RrepOutcome | UpdateResult


def trust_gate(candidates: list[tuple[int, int]], table: TrustTable) -> int | NoTrustedRoute:
    """Pick a next hop from ``(next_hop, hop_count)`` candidates.

    Bad neighbors are excluded. Survivors are ordered Good before Neutral,
    then by hop count, then by higher fused trust, then by lower node id.

    Raises:
        ValueError: If ``candidates`` is empty
    """
    if not candidates:
        raise ValueError("trust_gate needs at least one candidate")
    ranked = []
    excluded = []
    for next_hop, hop_count in candidates:
        cls = table.trust_class(next_hop)
        if cls is TrustClass.BAD:
            excluded.append(next_hop)
            continue
        ranked.append((_CLASS_RANK[cls], hop_count, -table.fused(next_hop), next_hop))
    if not ranked:
        return NoTrustedRoute(tuple(sorted(excluded)))
    return min(ranked)[3]


def blackhole_check(
    dest_seq: int,
    last_known: int | None,
    *,
    claimed_hop: int = 0,
    replier: int | None = None,
    dest: int | None = None,
    neighbor_view: tuple[int, ...] | None = None,
    max_jump: int = MAX_SEQ_JUMP,
) -> Plausibility:
    """Judge whether a reply's sequence number and hop claim are believable.

    With a known sequence number only the jump is tested. Without one, a
    one-hop claim needs ``dest`` in the replier's advertised neighbor list
    (when this node has heard that list) and a zero-hop claim needs the
    replier to be the destination itself.
    """
    if last_known is not None:
        if dest_seq - last_known > max_jump:
            return Plausibility.IMPLAUSIBLE
        return Plausibility.PLAUSIBLE
    if claimed_hop == 0 and replier is not None and replier != dest:
        return Plausibility.IMPLAUSIBLE
    if claimed_hop == 1 and neighbor_view is not None and dest not in neighbor_view:
        return Plausibility.IMPLAUSIBLE
    return Plausibility.PLAUSIBLE


class HsrpNode(AodvNode):
    """Per-node HSRP state machine."""

    protocol = PROTOCOL_HSRP

    def __init__(
        self,
        node_id: int,
        keypair: KeyPairRecord,
        directory: KeyDirectory,
        cfg: AodvConfig | None = None,
        hsrp_cfg: HsrpConfig | None = None,
        *,
        trust: TrustTable | None = None,
        counters: RunCounters | None = None,
        behavior: NodeBehavior | None = None,
    ) -> None:
        super().__init__(node_id, cfg, counters=counters, behavior=behavior)
        if keypair.node != node_id:
            raise ValueError(f"key pair of node {keypair.node} handed to node {node_id}")
        self.keypair = keypair
        self.directory = directory
        self.hsrp_cfg = hsrp_cfg or HsrpConfig()
        self.trust = trust or TrustTable(node_id)
        self.guard = FloodGuardState(
            self.hsrp_cfg.flood_bucket_capacity, self.hsrp_cfg.flood_refill_per_s
        )
        self.multipath: dict[int, MultipathRouteSet] = {}
        self.neighbor_view: dict[int, tuple[int, ...]] = {}
        self.pending_penalties: deque[int] = deque()
        self.update_counter = 0
        self.last_used: dict[int, SimTime] = {}
        self.untrusted_dests: set[int] = set()
        self._gossip_cursor = 0

    # -- multipath route table ---------------------------------------------

    def _route_set(self, dest: int) -> MultipathRouteSet:
        mset = self.multipath.get(dest)
        if mset is None:
            mset = self.multipath[dest] = MultipathRouteSet(dest, max_paths=self.hsrp_cfg.max_paths)
        return mset

    def select_path(self, dest: int, now: SimTime) -> PathEntry | NoTrustedRoute | None:
        """Gate choice among the valid paths to ``dest``, without side effects."""
        mset = self.multipath.get(dest)
        if mset is None:
            return None
        valid = mset.valid_paths(now)
        if not valid:
            return None
        choice = trust_gate([(p.next_hop, p.hop_count) for p in valid], self.trust)
        if isinstance(choice, NoTrustedRoute):
            return choice
        return mset.path_via(choice)

    def route_to(self, dest: int, now: SimTime) -> RouteEntry | None:
        choice = self.select_path(dest, now)
        if choice is None:
            return None
        mset = self.multipath[dest]
        if isinstance(choice, NoTrustedRoute):
            _LOGGER.debug(
                "Node %d: no trusted route to %d, discarding paths via %s",
                self.node_id,
                dest,
                choice.excluded,
            )
            for bad in choice.excluded:
                mset.remove_via(bad)
            self.untrusted_dests.add(dest)
            return None
        self.untrusted_dests.discard(dest)
        assert mset.dest_seq is not None
        return RouteEntry(
            dest=dest,
            next_hop=choice.next_hop,
            dest_seq=mset.dest_seq,
            hop_count=choice.hop_count,
            expires_at=choice.expires_at,
            precursors=mset.precursors,
        )

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
        """Offer a path to the destination's multipath set."""
        expires = now + (lifetime if lifetime is not None else self.cfg.active_route_lifetime_us)
        mset = self._route_set(dest)
        changed = mset.offer(next_hop, last_hop, hop_count, dest_seq, expires, now)
        if changed and mset.dest_seq is not None:
            self.note_seq(dest, mset.dest_seq)
        return changed

    def refresh_route(self, dest: int, now: SimTime) -> None:
        choice = self.select_path(dest, now)
        if isinstance(choice, PathEntry):
            choice.expires_at = max(choice.expires_at, now + self.cfg.active_route_lifetime_us)

    def add_precursor(self, dest: int, neighbor: int, now: SimTime) -> None:
        mset = self.multipath.get(dest)
        if mset is not None and mset.valid_paths(now):
            mset.precursors.add(neighbor)

    def invalidate_via(
        self, neighbor: int, now: SimTime, rerr_seqs: dict[int, int] | None = None
    ) -> list[tuple[int, int]]:
        """Remove paths through ``neighbor``.

        A destination is reported lost only when its last valid path goes.
        """
        lost: list[tuple[int, int]] = []
        for dest in sorted(self.multipath):
            mset = self.multipath[dest]
            if rerr_seqs is not None and dest not in rerr_seqs:
                continue
            path = mset.path_via(neighbor)
            if path is None or not path.usable(now) or mset.dest_seq is None:
                continue
            mset.remove_via(neighbor)
            if mset.valid_paths(now):
                continue
            if rerr_seqs is None:
                mset.dest_seq += 1
            else:
                mset.dest_seq = max(mset.dest_seq, rerr_seqs[dest])
            self.note_seq(dest, mset.dest_seq)
            lost.append((dest, mset.dest_seq))
        return lost

    def stored_seq(self, dest: int) -> int | None:
        mset = self.multipath.get(dest)
        return None if mset is None else mset.dest_seq

    def routes_snapshot(self, now: SimTime) -> dict[int, int]:
        snapshot = {}
        for dest in sorted(self.multipath):
            choice = self.select_path(dest, now)
            if isinstance(choice, PathEntry):
                snapshot[dest] = choice.next_hop
        return snapshot

    def path_count(self, dest: int, now: SimTime) -> int:
        mset = self.multipath.get(dest)
        return 0 if mset is None else len(mset.valid_paths(now))

    # -- signing -----------------------------------------------------------

    def _sign(self, inner: ControlInner, chain: MultiSig, hop_list_length: int) -> MultiSig:
        return multisig_append(
            chain,
            self.node_id,
            self.keypair.private_key,
            canonical_bytes(inner, hop_list_length),
            self.directory.scheme,
        )

    def seal(self, inner: ControlInner) -> Packet:
        """Open a fresh chain with this node's signature."""
        if isinstance(inner, RrepMsg):
            return self.seal_reply(inner)
        return SignedControlPacket(inner, (self.node_id,), self._sign(inner, MultiSig(), 1))

    def seal_reply(self, msg: RrepMsg) -> SignedControlPacket:
        """Sign a reply this node originates.

        A masquerading attacker lists another node's id but can only sign
        with its own key.
        """
        claimed = self.behavior.claimed_signer(self, msg)
        chain = multisig_append(
            MultiSig(),
            self.node_id,
            self.keypair.private_key,
            canonical_bytes(msg, 1),
            self.directory.scheme,
            claimed_signer=claimed,
        )
        return SignedControlPacket(msg, (claimed if claimed is not None else self.node_id,), chain)

    def extend(self, pkt: SignedControlPacket, inner: ControlInner) -> SignedControlPacket | Drop:
        """Append this node to the hop list and sign the updated packet."""
        hop_list = (*pkt.hop_list, self.node_id)
        try:
            chain = self._sign(inner, pkt.chain, len(hop_list))
        except DuplicateSigner:
            return Drop(DropReason.DUPLICATE)
        return SignedControlPacket(inner, hop_list, chain)

    def chain_ok(self, pkt: SignedControlPacket, from_: int) -> bool:
        """Structural checks on the hop list, then the signature chain."""
        hop_list = pkt.hop_list
        if not hop_list or pkt.chain.signers != hop_list or hop_list[-1] != from_:
            return False
        inner = pkt.inner
        if isinstance(inner, RreqMsg) and (
            inner.hop_count != len(hop_list) - 1 or hop_list[0] != inner.origin
        ):
            return False
        if isinstance(inner, ProactiveUpdate) and hop_list != (inner.issuer,):
            return False
        verdict = multisig_verify(pkt.chain, self.directory, canonical_bytes(inner, len(hop_list)))
        return bool(verdict)

    # -- penalties and gossip ----------------------------------------------

    def penalize(self, peer: int, now: SimTime, *, report: bool = False) -> None:
        """Count one failed interaction with ``peer``.

        With ``report`` a zero reputation report about the peer is queued
        for the next HELLO.
        """
        if peer == self.node_id:
            return
        self.trust.record_interaction(peer, Outcome.FAILURE)
        if report and peer not in self.pending_penalties:
            self.pending_penalties.append(peer)
        _LOGGER.debug(
            "Node %d penalized %d at t=%d (fused %.3f)",
            self.node_id,
            peer,
            now,
            self.trust.fused(peer),
        )

    def gossip(self) -> tuple[GossipReport, ...]:
        """Reports to piggyback on the next HELLO.

        Pending penalty reports go first; the rest of the budget rotates
        through the peers this node has direct evidence about.
        """
        budget = self.hsrp_cfg.max_reports_per_hello
        reports: list[GossipReport] = []
        while self.pending_penalties and len(reports) < budget:
            peer = self.pending_penalties.popleft()
            reports.append(GossipReport(GossipKind.REPUTATION, peer, 0.0))
        watched = [
            rec.peer
            for rec in self.trust
            if rec.engagement.successes + rec.engagement.failures > 0
        ]
        room = budget - len(reports)
        if watched and room > 0:
            start = self._gossip_cursor % len(watched)
            rotation = watched[start:] + watched[:start]
            for peer in rotation[:room]:
                score = self.trust.record(peer).engagement.score
                reports.append(GossipReport(GossipKind.RECOMMENDATION, peer, score))
            self._gossip_cursor = start + min(room, len(watched))
        return tuple(reports)

    def make_hello(self, now: SimTime) -> HelloMsg:
        return HelloMsg(
            origin=self.node_id,
            seq=self.seq,
            neighbors=self.live_neighbors(now),
            reports=self.gossip(),
        )

    def handle_hello(self, msg: HelloMsg, from_: int, now: SimTime) -> None:
        super().handle_hello(msg, from_, now)
        self.neighbor_view[from_] = msg.neighbors
        for gossip in msg.reports:
            kind = ReportKind(gossip.kind.value)
            try:
                self.trust.ingest_report(kind, TrustReport(from_, gossip.peer, gossip.score, now))
            except PyHsrpError as err:
                _LOGGER.debug("Node %d ignored report from %d: %s", self.node_id, from_, err)

    # -- signed control pipeline -------------------------------------------

    def handle_unsigned(
        self, msg: RreqMsg | RrepMsg, from_: int, now: SimTime
    ) -> RreqOutcome | RrepOutcome:
        """Accept a bare control message only under the insecure fallback."""
        if not self.hsrp_cfg.allow_insecure_fallback:
            self.penalize(from_, now)
            return Drop(DropReason.BAD_SIGNATURE, from_)
        if isinstance(msg, RreqMsg):
            return self.handle_rreq(msg, from_, now)
        return self.handle_rrep(msg, from_, now)

    def handle_signed(self, pkt: SignedControlPacket, from_: int, now: SimTime) -> SignedOutcome:
        """Run a received signed control packet through the defense pipeline."""
        if self.hsrp_cfg.verify_signatures and not self.chain_ok(pkt, from_):
            self.penalize(from_, now, report=True)
            _LOGGER.debug("Node %d rejected chain from %d", self.node_id, from_)
            return Drop(DropReason.BAD_SIGNATURE, from_)
        inner = pkt.inner
        if isinstance(inner, RreqMsg):
            return self._signed_rreq(pkt, inner, from_, now)
        if isinstance(inner, RrepMsg):
            return self._signed_rrep(pkt, inner, from_, now)
        return self.handle_update(inner, from_, now)

    def _signed_rreq(
        self, pkt: SignedControlPacket, msg: RreqMsg, from_: int, now: SimTime
    ) -> RreqOutcome:
        if msg.origin == self.node_id:
            return Drop(DropReason.DUPLICATE)
        # reverse path: self -> from_ -> ... -> origin
        last_hop = pkt.hop_list[1] if len(pkt.hop_list) > 1 else self.node_id
        key = rreq_key(msg)
        if self.seen.contains(key, now):
            self.install_route(
                msg.origin, from_, msg.origin_seq, msg.hop_count + 1, now, last_hop=last_hop
            )
            return Drop(DropReason.DUPLICATE)
        if not self.guard.allow(msg.origin, now):
            self.seen.insert(key, now)
            self.penalize(msg.origin, now)
            return Drop(DropReason.RATE_LIMITED, msg.origin)
        self.counters.record_hf_store(self.node_id, self.seen, key, now)
        return self._wrap(pkt, self.process_rreq(msg, from_, now, last_hop=last_hop))

    def _signed_rrep(
        self, pkt: SignedControlPacket, msg: RrepMsg, from_: int, now: SimTime
    ) -> RrepOutcome:
        replier = pkt.replier
        verdict = blackhole_check(
            msg.dest_seq,
            self.known_seq(msg.dest),
            claimed_hop=claimed_hop_count(msg, len(pkt.hop_list)),
            replier=replier,
            dest=msg.dest,
            neighbor_view=self.neighbor_view.get(replier),
            max_jump=self.hsrp_cfg.max_seq_jump,
        )
        if verdict is Plausibility.IMPLAUSIBLE:
            self.penalize(replier, now)
            _LOGGER.debug(
                "Node %d: implausible reply from %d for %d (seq %d)",
                self.node_id,
                replier,
                msg.dest,
                msg.dest_seq,
            )
            return Drop(DropReason.IMPLAUSIBLE_SEQ, replier)
        if self.trust.trust_class(from_) is TrustClass.BAD:
            return Drop(DropReason.UNTRUSTED, from_)
        if replier == msg.dest:
            last_hop: int | None = pkt.hop_list[1] if len(pkt.hop_list) > 1 else self.node_id
        else:
            last_hop = None
        outcome = self.handle_rrep(msg, from_, now, last_hop=last_hop)
        return self._wrap(pkt, outcome)

    def _wrap(self, pkt: SignedControlPacket, outcome: SignedOutcome) -> SignedOutcome:
        if isinstance(outcome, Forward):
            assert isinstance(outcome.packet, RreqMsg)
            signed = self.extend(pkt, outcome.packet)
            return signed if isinstance(signed, Drop) else Forward(signed)
        if isinstance(outcome, InstallAndForward):
            assert isinstance(outcome.packet, RrepMsg)
            signed = self.extend(pkt, outcome.packet)
            if isinstance(signed, Drop):
                return signed
            return InstallAndForward(signed, outcome.next_hop)
        if isinstance(outcome, Reply):
            assert isinstance(outcome.packet, RrepMsg)
            return Reply(self.seal_reply(outcome.packet), outcome.next_hop, outcome.forged)
        return outcome

    # -- proactive maintenance ---------------------------------------------

    def active_destinations(self, now: SimTime) -> list[int]:
        """Destinations with valid paths that carried data recently."""
        lifetime = self.cfg.active_route_lifetime_us
        return [
            dest
            for dest in sorted(self.multipath)
            if dest in self.last_used
            and now - self.last_used[dest] <= lifetime
            and self.multipath[dest].valid_paths(now)
        ]

    def proactive_tick(self, now: SimTime) -> list[tuple[int, SignedControlPacket]]:
        """One signed update per active destination for each path's next hop."""
        out: list[tuple[int, SignedControlPacket]] = []
        for dest in self.active_destinations(now):
            mset = self.multipath[dest]
            assert mset.dest_seq is not None
            for path in sorted(mset.valid_paths(now), key=lambda p: p.next_hop):
                if path.next_hop == dest:
                    continue
                self.update_counter += 1
                update = ProactiveUpdate(
                    update_id=(self.node_id, self.update_counter),
                    issuer=self.node_id,
                    about_dest=dest,
                    dest_seq=mset.dest_seq,
                    advertised_hop_count=mset.advertised_hop_count,
                    issued_at=now,
                )
                sealed = self.seal(update)
                assert isinstance(sealed, SignedControlPacket)
                out.append((path.next_hop, sealed))
        return out

    def handle_update(self, upd: ProactiveUpdate, from_: int, now: SimTime) -> UpdateResult:
        """Apply a proactive update from an upstream neighbor.

        The receiver refreshes its own paths to the destination. A fresher
        sequence number replaces the set with a path via the issuer; at the
        same sequence number the issuer is accepted as an alternate only if
        its advertised hop count is below the receiver's own.
        """
        key = ("update", upd.issuer, upd.update_id[1])
        if not self.counters.record_hf_store(self.node_id, self.seen, key, now):
            return UpdateResult(rejected=DropReason.DUPLICATE)
        if upd.about_dest == self.node_id:
            return UpdateResult(rejected=DropReason.NOT_ADOPTED)
        if self.trust.trust_class(from_) is TrustClass.BAD:
            return UpdateResult(rejected=DropReason.UNTRUSTED)
        mset = self.multipath.get(upd.about_dest)
        had_paths = mset is not None and bool(mset.valid_paths(now))
        fresher = mset is None or mset.dest_seq is None or upd.dest_seq > mset.dest_seq
        if not had_paths and not fresher:
            return UpdateResult(rejected=DropReason.NO_ROUTE)
        if had_paths:
            assert mset is not None
            mset.refresh(now + self.cfg.active_route_lifetime_us, now)
        adopted = self.install_route(
            upd.about_dest, from_, upd.dest_seq, upd.advertised_hop_count + 1, now
        )
        return UpdateResult(refreshed=had_paths, adopted=adopted)

    # -- watchdog ------------------------------------------------------------

    def watchdog_observe(self, next_hop: int, outcome: Outcome, now: SimTime) -> Outcome:
        """Feed one forwarding observation into trust and link quality."""
        self.trust.record_interaction(next_hop, outcome)
        if outcome is Outcome.FAILURE:
            label = self.trust.record_bypass(next_hop, now)
            if label is LinkLabel.WEAK:
                for mset in self.multipath.values():
                    mset.remove_via(next_hop)
        return outcome

    # -- data ------------------------------------------------------------------

    def forward_data(self, packet: DataPacket, now: SimTime) -> DataOutcome:
        self.last_used[packet.dst] = now
        outcome = super().forward_data(packet, now)
        if (
            isinstance(outcome, Dropped)
            and outcome.reason is DropReason.NO_ROUTE
            and packet.dst in self.untrusted_dests
        ):
            return replace(outcome, reason=DropReason.NO_TRUSTED_ROUTE)
        return outcome

