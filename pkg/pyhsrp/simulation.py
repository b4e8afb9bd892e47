"""One deterministic simulation run.

:class:`Simulation` wires a :class:`~pyhsrp.scenario.Scenario` into an event
queue: node placement and mobility, HELLO timers, CBR flows, the broadcast
channel, attackers and (for HSRP) proactive maintenance and the watchdog.
Every random choice comes from a stream forked from the master seed by
label, so a run depends only on the scenario and the seed.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .adversary import (
    AttackEvent,
    AttackKind,
    AttackProfile,
    FlooderBehavior,
    flooder_tick,
    make_behavior,
)
from .channel import Delivered, JamRegion, Reception, transmit
from .const import FLOODER_TICK_US, PROTOCOL_HSRP, VERSION
from .crypto.signatures import build_directory, make_scheme
from .crypto.tea import TeaKey, decrypt_payload, encrypt_payload
from .kernel import EventHandle, EventQueue, RandomStream, SimTime, fork_stream, seconds
from .metrics import MetricsReport, csv_row, finalize
from .mobility import MobilityState, Position, init_positions, init_state, neighbors, step_waypoint
from .packets import (
    DataPacket,
    HelloMsg,
    Packet,
    ProactiveUpdate,
    RerrMsg,
    RreqMsg,
    RrepMsg,
    SignedControlPacket,
    encode,
    packet_kind,
)
from .routing.aodv import AodvNode
from .routing.hsrp import HsrpNode
from .routing.outcomes import (
    Buffered,
    Drop,
    Dropped,
    DropReason,
    Forward,
    InstallAndForward,
    InstallOnly,
    NextHop,
    Reply,
    UpdateResult,
)
from .routing.watchdog import Watchdog
from .scenario import Scenario, scenario_to_dict
from .trace import TracedCounters, TraceWriter
from .trust import Outcome

_LOGGER = logging.getLogger(__name__)

# Encryption counters advance per block; packets get disjoint counter ranges.
_COUNTER_SHIFT = 20

Timer = Callable[[SimTime], None]


@dataclass(frozen=True, slots=True)
class Flow:
    flow_id: int
    src: int
    dst: int
    offset_us: SimTime
    key: TeaKey | None = None


@dataclass(frozen=True, slots=True)
class RunResult:
    """Report, CSV row and trace digest of one run."""

    report: MetricsReport
    row: dict[str, Any]
    trace_digest: str
    trace_path: Path | None
    attackers: tuple[int, ...]


def flow_plaintext(packet_id: int, size: int) -> bytes:
    """Deterministic payload of a data packet."""
    seed = packet_id.to_bytes(8, "big")
    return (seed * (size // 8 + 1))[:size]


def run_label(scenario: Scenario) -> str:
    """File stem for a run's outputs."""
    return f"{scenario.name}_{scenario.protocol}_{scenario.attack.label}_s{scenario.seed}"


class Simulation:
    """A single run of a scenario.

    ``positions`` pins the initial layout instead of drawing it from the
    placement stream; with a static mobility section it is the layout for
    the whole run.
    """

    def __init__(
        self,
        scenario: Scenario,
        *,
        trace_path: str | Path | None = None,
        positions: Sequence[Position] | None = None,
    ) -> None:
        self.scenario = scenario
        self.seed = scenario.seed
        self.hsrp = scenario.protocol == PROTOCOL_HSRP
        self.queue = EventQueue()
        self.trace = TraceWriter(trace_path, lambda: self.queue.now)
        self.counters = TracedCounters(sink=self.trace)
        self.end = scenario.duration_us
        self.channel_stream = fork_stream(self.seed, "channel")
        self.watchdog = Watchdog(scenario.hsrp.watchdog_deadline_us)
        self._packet_ids = 0
        self._discovery: dict[tuple[int, int], EventHandle] = {}

        n = scenario.nodes
        area = scenario.area
        self.layout = None if positions is None else list(positions)
        self.positions: list[Position]
        if self.layout is not None:
            if len(self.layout) != n or not all(area.contains(p) for p in self.layout):
                raise ValueError(f"layout must hold {n} positions inside the area")
            self.positions = list(self.layout)
        else:
            self.positions = init_positions(n, area, fork_stream(self.seed, "placement"))
        self.mobility: list[MobilityState] = []
        self.mobility_streams: list[RandomStream] = []
        if not scenario.mobility.static:
            for i in range(n):
                stream = fork_stream(self.seed, f"mobility/{i}")
                self.mobility_streams.append(stream)
                self.mobility.append(
                    init_state(self.positions[i], area, scenario.mobility.speed_range, stream)
                )
        self.adjacency = neighbors(self.positions, scenario.channel.range_m)

        self.flows = self._plan_flows()
        self.attackers = self._pick_attackers()
        self.profiles = self._attack_profiles()
        self.jam_claims = self._jam_claims(self.profiles)

        if self.hsrp:
            self.directory, self.keys = build_directory(
                self.seed, n, make_scheme(scenario.hsrp.signature_scheme)
            )
        self.nodes: list[AodvNode] = []
        for i in range(n):
            behavior = make_behavior(self.profiles.get(i), fork_stream(self.seed, f"attacker/{i}"))
            node: AodvNode
            if self.hsrp:
                node = HsrpNode(
                    i,
                    self.keys[i],
                    self.directory,
                    scenario.aodv,
                    scenario.hsrp,
                    trust=scenario.trust.table(i),
                    counters=self.counters,
                    behavior=behavior,
                )
            else:
                node = AodvNode(i, scenario.aodv, counters=self.counters, behavior=behavior)
            self.nodes.append(node)

    # -- setup ---------------------------------------------------------------

    def _plan_flows(self) -> list[Flow]:
        """Choose flow endpoints and start offsets from the traffic stream."""
        scenario = self.scenario
        stream = fork_stream(self.seed, "traffic")
        explicit_attackers = set(scenario.attack.nodes or ())
        honest = [i for i in range(scenario.nodes) if i not in explicit_attackers]
        period = seconds(1.0 / scenario.traffic.data_rate_pps)
        pairs = [(f.src, f.dst) for f in scenario.traffic.explicit]
        while len(pairs) < len(scenario.traffic.explicit) + scenario.traffic.flows:
            src, dst = stream.sample(honest, 2)
            pairs.append((src, dst))
        flows = []
        for flow_id, (src, dst) in enumerate(pairs):
            offset = stream.integer(0, max(0, period - 1))
            key = None
            if self.hsrp and scenario.hsrp.encrypt_payloads:
                key = TeaKey.from_bytes(fork_stream(self.seed, f"flowkey/{flow_id}").bytes(16))
            flows.append(Flow(flow_id, src, dst, offset, key))
        return flows

    def _pick_attackers(self) -> tuple[int, ...]:
        """Attacker ids, fixed per seed whether or not the attack is enabled."""
        attack = self.scenario.attack
        if attack.nodes is not None:
            return tuple(sorted(attack.nodes))
        endpoints = {f.src for f in self.flows} | {f.dst for f in self.flows}
        candidates = [i for i in range(self.scenario.nodes) if i not in endpoints]
        count = min(attack.count, len(candidates))
        if count < attack.count:
            _LOGGER.warning(
                "Only %d of %d attackers placed: every other node is a flow endpoint",
                count,
                attack.count,
            )
        return tuple(sorted(fork_stream(self.seed, "attackers").sample(candidates, count)))

    def _attack_profiles(self) -> dict[int, AttackProfile]:
        attack = self.scenario.attack
        if not attack.enabled:
            return {}
        regions = len(self.scenario.channel.jam_regions)
        profiles = {}
        for index, node in enumerate(self.attackers):
            region = index % regions if attack.kind == AttackKind.JAMMER and regions else None
            profiles[node] = attack.profile(region)
        return profiles

    def _jam_claims(
        self, profiles: dict[int, AttackProfile]
    ) -> dict[int, list[AttackProfile]]:
        """Region index -> profiles of the jammers that claim it.

        Under a jammer scenario a region keeps its claim with no profiles
        while the attack is disabled, so it is never jammed.
        """
        claims: dict[int, list[AttackProfile]] = {}
        attack = self.scenario.attack
        regions = len(self.scenario.channel.jam_regions)
        if attack.kind != AttackKind.JAMMER or not regions:
            return claims
        for index, node in enumerate(self.attackers):
            claims.setdefault(index % regions, [])
            if node in profiles:
                claims[index % regions].append(profiles[node])
        return claims

    def active_jam_regions(self, now: SimTime) -> tuple[JamRegion, ...]:
        active = []
        for index, region in enumerate(self.scenario.channel.jam_regions):
            claim = self.jam_claims.get(index)
            if claim is None or any(profile.active(now) for profile in claim):
                active.append(region)
        return tuple(active)

    def discover(self, origin: int, dest: int) -> bool:
        """Flood one route request from ``origin`` now, without retries.

        Returns:
            False if ``origin`` already had a usable route to ``dest``
        """
        node = self.nodes[origin]
        now = self.queue.now
        if node.has_route(dest, now):
            return False
        self._broadcast(origin, node.originate_rreq(dest, now))
        return True

    # -- scheduling ----------------------------------------------------------

    def _schedule_timers(self) -> None:
        scenario = self.scenario
        hello_stream = fork_stream(self.seed, "hello")
        interval = scenario.aodv.hello_interval_us
        for node in self.nodes:
            self._every(hello_stream.integer(0, interval - 1), interval, self._hello_timer(node))
        if not scenario.mobility.static:
            step = seconds(scenario.mobility.step_s)
            self._every(step, step, self._mobility_step)
        period = seconds(1.0 / scenario.traffic.data_rate_pps)
        start = seconds(scenario.traffic.start_s)
        for flow in self.flows:
            self._every(start + flow.offset_us, period, self._cbr_tick(flow))
        if self.hsrp:
            maintenance = scenario.hsrp.maintenance_interval_us
            for node in self.nodes:
                offset = hello_stream.integer(0, maintenance - 1)
                self._every(offset, maintenance, self._proactive_timer(node))
        for node in self.nodes:
            if isinstance(node.behavior, FlooderBehavior):
                self._every(0, FLOODER_TICK_US, self._flooder_timer(node))
        if self.trace.enabled:
            snapshot = scenario.trust.snapshot_interval_us
            self._every(snapshot, snapshot, self._snapshot)

    def _every(self, first: SimTime, interval: SimTime, action: Timer) -> None:
        """Fire ``action(now)`` at ``first`` and every ``interval`` after, until the end."""

        def fire() -> None:
            now = self.queue.now
            action(now)
            if now + interval < self.end:
                self.queue.schedule(now + interval, fire)

        if first < self.end:
            self.queue.schedule(first, fire)

    def _hello_timer(self, node: AodvNode) -> Timer:
        def tick(now: SimTime) -> None:
            for dead in node.silent_neighbors(now):
                for rerr in node.handle_link_break(dead, now):
                    self._broadcast(node.node_id, rerr)
            self._broadcast(node.node_id, node.make_hello(now))

        return tick

    def _mobility_step(self, now: SimTime) -> None:
        scenario = self.scenario
        dt = seconds(scenario.mobility.step_s)
        pause = seconds(scenario.mobility.pause_time_s)
        for i, state in enumerate(self.mobility):
            self.mobility[i] = step_waypoint(
                state,
                now - dt,
                dt,
                scenario.area,
                scenario.mobility.speed_range,
                pause,
                self.mobility_streams[i],
            )
            self.positions[i] = self.mobility[i].current
        self.adjacency = neighbors(self.positions, scenario.channel.range_m)

    def _cbr_tick(self, flow: Flow) -> Timer:
        last = self.end - seconds(self.scenario.traffic.drain_s)

        def tick(now: SimTime) -> None:
            if now < last:
                self._originate(flow, now)

        return tick

    def _proactive_timer(self, node: AodvNode) -> Timer:
        assert isinstance(node, HsrpNode)

        def tick(now: SimTime) -> None:
            for next_hop, packet in node.proactive_tick(now):
                self._unicast(node.node_id, next_hop, packet)

        return tick

    def _flooder_timer(self, node: AodvNode) -> Timer:
        behavior = node.behavior
        assert isinstance(behavior, FlooderBehavior) and behavior.profile is not None
        profile = behavior.profile

        def tick(now: SimTime) -> None:
            for at, rreq in flooder_tick(node, profile, behavior.stream, now):
                behavior.events.append(
                    AttackEvent(at, node.node_id, "flood_rreq", {"rreq": rreq.rreq_id[1]})
                )
                packet = node.seal(rreq)
                self.queue.schedule(at, lambda p=packet: self._broadcast(node.node_id, p))

        return tick

    def _snapshot(self, now: SimTime) -> None:
        tables = {
            str(node.node_id): {str(d): nh for d, nh in node.routes_snapshot(now).items()}
            for node in self.nodes
        }
        self.trace.emit("routes", tables=tables)
        if not self.hsrp:
            return
        for node in self.nodes:
            assert isinstance(node, HsrpNode)
            for record in node.trust:
                self.trace.emit(
                    "trust",
                    node=node.node_id,
                    peer=record.peer,
                    e=record.engagement.score,
                    r=record.reputation,
                    c=record.recommendation,
                    fused=record.fused,
                    **{"class": str(record.trust_class)},
                )

    # -- channel ---------------------------------------------------------------

    def _record_tx(self, sender: int, packet: Packet) -> None:
        kind = packet_kind(packet)
        self.counters.record_tx(sender, kind)
        fields: dict[str, Any] = {"node": sender, "kind": kind}
        inner = packet.inner if isinstance(packet, SignedControlPacket) else packet
        if isinstance(inner, RreqMsg):
            fields["origin"] = inner.origin
            fields["fwd"] = inner.origin != sender
        if isinstance(packet, SignedControlPacket) and self.trace.enabled:
            fields["frame"] = encode(packet).hex()
        if isinstance(packet, DataPacket):
            fields["packet"] = packet.packet_id
        self.trace.emit("tx", **fields)

    def _broadcast(self, sender: int, packet: Packet) -> None:
        now = self.queue.now
        self._record_tx(sender, packet)
        receivers = [(j, self.positions[j]) for j in self.adjacency[sender]]
        for reception in self._transmit(sender, receivers, now):
            if isinstance(reception, Delivered):
                self._deliver(reception, sender, packet)

    def _unicast(self, sender: int, receiver: int, packet: Packet) -> bool:
        """Send to one neighbor; False if the frame did not arrive."""
        now = self.queue.now
        self._record_tx(sender, packet)
        if receiver not in self.adjacency[sender]:
            return False
        (reception,) = self._transmit(sender, [(receiver, self.positions[receiver])], now)
        if not isinstance(reception, Delivered):
            return False
        self._deliver(reception, sender, packet)
        return True

    def _transmit(
        self, sender: int, receivers: list[tuple[int, Position]], now: SimTime
    ) -> list[Reception]:
        return transmit(
            self.scenario.channel,
            self.positions[sender],
            receivers,
            now,
            self.channel_stream,
            self.active_jam_regions(now),
        )

    def _deliver(self, reception: Delivered, sender: int, packet: Packet) -> None:
        receiver = reception.receiver
        self.queue.schedule(reception.at, lambda: self._receive(receiver, sender, packet))

    # -- reception ---------------------------------------------------------------

    def _receive(self, receiver: int, sender: int, packet: Packet) -> None:
        now = self.queue.now
        node = self.nodes[receiver]
        if isinstance(packet, DataPacket):
            self._receive_data(node, packet, now)
            return
        if isinstance(packet, HelloMsg):
            node.handle_hello(packet, sender, now)
        elif isinstance(packet, RerrMsg):
            for rerr in node.handle_rerr(packet, sender, now):
                self._broadcast(receiver, rerr)
        elif isinstance(packet, SignedControlPacket):
            assert isinstance(node, HsrpNode)
            self._apply(node, node.handle_signed(packet, sender, now))
        elif isinstance(packet, RreqMsg | RrepMsg):
            if isinstance(node, HsrpNode):
                self._apply(node, node.handle_unsigned(packet, sender, now))
            elif isinstance(packet, RreqMsg):
                self._apply(node, node.handle_rreq(packet, sender, now))
            else:
                self._apply(node, node.handle_rrep(packet, sender, now))
        elif isinstance(packet, ProactiveUpdate):
            _LOGGER.debug("Node %d ignored unsigned update from %d", receiver, sender)
        if node.buffer:
            self._flush_ready(node, now)

    def _apply(self, node: AodvNode, outcome: Any) -> None:
        """Carry out what a control handler decided."""
        if isinstance(outcome, Forward):
            self._broadcast(node.node_id, outcome.packet)
        elif isinstance(outcome, Reply | InstallAndForward):
            self._unicast(node.node_id, outcome.next_hop, outcome.packet)
        elif isinstance(outcome, InstallOnly):
            self._flush(node, outcome.dest)
        elif isinstance(outcome, Drop) and outcome.penalized is not None:
            self.trace.emit(
                "penalty", node=node.node_id, peer=outcome.penalized, reason=str(outcome.reason)
            )
        elif isinstance(outcome, UpdateResult) and outcome.rejected is not None:
            _LOGGER.debug("Node %d rejected update: %s", node.node_id, outcome.rejected)

    # -- data ------------------------------------------------------------------

    def _originate(self, flow: Flow, now: SimTime) -> None:
        self._packet_ids += 1
        packet_id = self._packet_ids
        size = self.scenario.traffic.packet_bytes
        payload = flow_plaintext(packet_id, size)
        encrypted = flow.key is not None
        if flow.key is not None:
            payload = encrypt_payload(payload, flow.key, packet_id << _COUNTER_SHIFT)
        packet = DataPacket(
            packet_id=packet_id,
            flow_id=flow.flow_id,
            src=flow.src,
            dst=flow.dst,
            created_at=now,
            size_bytes=size,
            payload=payload,
            ttl=self.scenario.aodv.data_ttl,
            encrypted=encrypted,
        )
        self.counters.record_originated()
        self.trace.emit("data", op="orig", packet=packet_id, flow=flow.flow_id, node=flow.src)
        self._send_data(self.nodes[flow.src], packet, now)

    def _drop(self, node: int, packet: DataPacket, reason: DropReason) -> None:
        self.counters.record_drop(node, str(reason))
        self.trace.emit("data", op="drop", packet=packet.packet_id, node=node, reason=str(reason))

    def _send_data(self, node: AodvNode, packet: DataPacket, now: SimTime) -> None:
        outcome = node.forward_data(packet, now)
        node_id = node.node_id
        if isinstance(outcome, NextHop):
            next_hop = outcome.node
            if isinstance(node, HsrpNode):
                self._trace_select(node, packet.dst, next_hop)
            out = packet if packet.src == node_id else packet.forwarded()
            if self.hsrp:
                heard = self.watchdog.overheard(
                    node_id, packet.packet_id, lambda w: w in self.adjacency[node_id]
                )
                for watcher in heard:
                    watcher_node = self.nodes[watcher]
                    assert isinstance(watcher_node, HsrpNode)
                    watcher_node.watchdog_observe(node_id, Outcome.SUCCESS, now)
            if not self._unicast(node_id, next_hop, out):
                # a lost frame is a channel drop, not a forwarding failure
                self._drop(node_id, packet, DropReason.CHANNEL)
            elif self.hsrp and next_hop != packet.dst:
                self._watch(node_id, next_hop, packet.packet_id, now)
        elif isinstance(outcome, Buffered):
            if outcome.rreq is not None:
                self._broadcast(node_id, outcome.rreq)
                self._arm_discovery(node, packet.dst, now)
            if outcome.evicted is not None:
                self._drop(node_id, outcome.evicted, DropReason.BUFFER_OVERFLOW)
        elif isinstance(outcome, Dropped):
            self._drop(node_id, packet, outcome.reason)
            if outcome.rerr is not None:
                self._broadcast(node_id, outcome.rerr)

    def _trace_select(self, node: HsrpNode, dest: int, next_hop: int) -> None:
        if not self.trace.enabled:
            return
        self.trace.emit(
            "select",
            node=node.node_id,
            dest=dest,
            next_hop=next_hop,
            fused=node.trust.fused(next_hop),
            **{"class": str(node.trust.trust_class(next_hop))},
        )

    def _watch(self, watcher: int, next_hop: int, packet_id: int, now: SimTime) -> None:
        deadline = self.watchdog.expect(watcher, next_hop, packet_id, now)

        def expire() -> None:
            if self.watchdog.expire(watcher, next_hop, packet_id) is Outcome.FAILURE:
                node = self.nodes[watcher]
                assert isinstance(node, HsrpNode)
                node.watchdog_observe(next_hop, Outcome.FAILURE, self.queue.now)

        if deadline <= self.end:
            self.queue.schedule(deadline, expire)

    def _receive_data(self, node: AodvNode, packet: DataPacket, now: SimTime) -> None:
        if packet.dst != node.node_id:
            self._send_data(node, packet, now)
            return
        if packet.encrypted:
            key = self.flows[packet.flow_id].key
            assert key is not None
            try:
                intact = decrypt_payload(packet.payload, key) == flow_plaintext(
                    packet.packet_id, packet.size_bytes
                )
            except ValueError:
                intact = False
            if not intact:
                self._drop(node.node_id, packet, DropReason.PAYLOAD_CORRUPT)
                return
        node.refresh_route(packet.src, now)
        delay = now - packet.created_at
        self.counters.record_delivered(packet.flow_id, delay)
        self.trace.emit(
            "data", op="deliver", packet=packet.packet_id, flow=packet.flow_id, delay_us=delay
        )

    # -- discovery -------------------------------------------------------------

    def _arm_discovery(self, node: AodvNode, dest: int, now: SimTime) -> None:
        key = (node.node_id, dest)
        previous = self._discovery.pop(key, None)
        if previous is not None and not (previous.fired or previous.cancelled):
            self.queue.cancel(previous)
        at = now + node.retry_wait(dest)
        if at <= self.end:
            self._discovery[key] = self.queue.schedule(
                at, lambda: self._discovery_timeout(node, dest)
            )

    def _discovery_timeout(self, node: AodvNode, dest: int) -> None:
        now = self.queue.now
        self._discovery.pop((node.node_id, dest), None)
        retry = node.discovery_timeout(dest, now)
        if retry is not None:
            self._broadcast(node.node_id, retry)
            self._arm_discovery(node, dest, now)
            return
        if node.has_route(dest, now):
            self._flush(node, dest)
            return
        reason = DropReason.NO_ROUTE
        if isinstance(node, HsrpNode) and dest in node.untrusted_dests:
            reason = DropReason.NO_TRUSTED_ROUTE
        for packet in node.take_buffered(dest):
            self._drop(node.node_id, packet, reason)

    def _flush(self, node: AodvNode, dest: int) -> None:
        now = self.queue.now
        for packet in node.take_buffered(dest):
            self._send_data(node, packet, now)

    def _flush_ready(self, node: AodvNode, now: SimTime) -> None:
        for dest in sorted({p.dst for p in node.buffer}):
            if node.has_route(dest, now):
                node.pending.pop(dest, None)
                self._flush(node, dest)

    # -- run -------------------------------------------------------------------

    def _header(self) -> None:
        self.trace.emit(
            "header",
            version=VERSION,
            scenario=scenario_to_dict(self.scenario),
            seed=self.seed,
            protocol=self.scenario.protocol,
            attack=self.scenario.attack.label,
            attackers=sorted(self.profiles),
            flows=[[f.flow_id, f.src, f.dst] for f in self.flows],
            layout=None if self.layout is None else [[p.x, p.y] for p in self.layout],
        )

    def run(self) -> RunResult:
        """Run to the end of the scenario and finalise metrics."""
        scenario = self.scenario
        _LOGGER.info(
            "Running %s (%s, attack %s, seed %d)",
            scenario.name,
            scenario.protocol,
            scenario.attack.label,
            self.seed,
        )
        try:
            self._header()
            self._schedule_timers()
            processed = self.queue.run_until(self.end)
            events = sorted(
                (event for node in self.nodes for event in node.behavior.events),
                key=lambda e: (e.at, e.node, e.kind),
            )
            for event in events:
                self.trace.emit(
                    "attack", at=event.at, node=event.node, kind=event.kind, detail=event.detail
                )
            report = finalize(self.counters, self.end, scenario.payload_bits)
            self.trace.emit("report", **report.as_dict())
        finally:
            self.trace.close()
        _LOGGER.info(
            "Finished %s: %d events, pdr %.3f, %d/%d delivered",
            scenario.name,
            processed,
            report.pdr,
            report.data_delivered,
            report.data_originated,
        )
        row = csv_row(
            report,
            scenario=scenario.name,
            protocol=scenario.protocol,
            attack=scenario.attack.label,
            seed=self.seed,
            nodes=scenario.nodes,
            area_w=scenario.area.width,
            area_h=scenario.area.height,
            max_speed=scenario.mobility.speed_max,
            duration_s=scenario.duration_s,
        )
        return RunResult(report, row, self.trace.digest, self.trace.path, self.attackers)


def configure(
    scenario: Scenario,
    *,
    seed: int | None = None,
    protocol: str | None = None,
    attack: bool | None = None,
) -> Scenario:
    """Apply command-line style overrides to a scenario."""
    if seed is not None:
        scenario = replace(scenario, seed=seed)
    if protocol is not None:
        scenario = replace(scenario, protocol=protocol)
    if attack is not None:
        scenario = replace(scenario, attack=replace(scenario.attack, enabled=attack))
    return scenario


def run_one(
    scenario: Scenario, seed: int | None = None, *, trace_dir: str | Path | None = None
) -> RunResult:
    """Run ``scenario`` once, optionally writing its trace under ``trace_dir``."""
    scenario = configure(scenario, seed=seed)
    trace_path = None
    if trace_dir is not None:
        trace_path = Path(trace_dir) / f"{run_label(scenario)}.jsonl"
    return Simulation(scenario, trace_path=trace_path).run()
