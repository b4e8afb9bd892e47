"""Scenario files.

A scenario is a JSON document (``.scn``) with one nested section per
concern. Every key is optional except ``nodes``; missing keys take the
defaults from :mod:`pyhsrp.const`. Unknown keys are rejected. See
docs/scenarios.md for the full key reference.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import voluptuous as vol

from .adversary import AttackKind, AttackProfile
from .channel import ChannelConfig, JamRegion
from .const import (
    ACCEPTED_SCENARIO_SUFFIXES,
    ACTIVE_ROUTE_LIFETIME_US,
    ALLOWED_HELLO_LOSS,
    ATTACK_BLACKHOLE,
    ATTACK_KINDS,
    BLACKHOLE_SEQ_INFLATION,
    BUFFER_CAPACITY,
    BYPASS_THRESHOLD,
    BYPASS_WINDOW_US,
    DATA_TTL,
    DEFAULT_AREA_HEIGHT,
    DEFAULT_AREA_WIDTH,
    DEFAULT_ATTACKER_COUNT,
    DEFAULT_DATA_RATE_PPS,
    DEFAULT_DRAIN_S,
    DEFAULT_DURATION_S,
    DEFAULT_FLOODER_RATE,
    DEFAULT_FLOW_COUNT,
    DEFAULT_JITTER_US,
    DEFAULT_LOSS_PROBABILITY,
    DEFAULT_MASTER_SEED,
    DEFAULT_MOBILITY_STEP_S,
    DEFAULT_PACKET_BYTES,
    DEFAULT_PAUSE_TIME_S,
    DEFAULT_PER_HOP_DELAY_US,
    DEFAULT_RANGE_M,
    DEFAULT_SINKHOLE_DROP,
    DEFAULT_SPEED_MAX,
    DEFAULT_SPEED_MIN,
    DEFAULT_TRAFFIC_START_S,
    ENCRYPT_PAYLOADS,
    FLOOD_BUCKET_CAPACITY,
    FLOOD_REFILL_PER_S,
    HELLO_INTERVAL_US,
    MAINTENANCE_INTERVAL_US,
    MAX_PATHS,
    MAX_REPORTS_PER_HELLO,
    MAX_SEQ_JUMP,
    NET_DIAMETER_TTL,
    NONEXISTENT_NODE,
    PROTOCOL_HSRP,
    PROTOCOLS,
    RREQ_RETRIES,
    RREQ_WAIT_US,
    SCHEME_KEYED_DIGEST,
    SEEN_CACHE_CAPACITY,
    SEEN_CACHE_RETENTION_US,
    SIGNATURE_SCHEMES,
    TRUST_SNAPSHOT_INTERVAL_US,
    TRUST_WINDOW,
    WATCHDOG_DEADLINE_US,
    WEIGHT_ENGAGEMENT,
    WEIGHT_RECOMMENDATION,
    WEIGHT_REPUTATION,
)
from .exceptions import ParseError
from .kernel import SimTime, seconds
from .mobility import Area, Position
from .routing.aodv import AodvConfig
from .routing.hsrp import HsrpConfig
from .trust import TrustConfig, TrustWeights
from .validators import ValidationError, validate_scenario_data

_LOGGER = logging.getLogger(__name__)


def _number(minimum: float | None = None, maximum: float | None = None) -> vol.All:
    return vol.All(vol.Coerce(float), vol.Range(min=minimum, max=maximum))


def _integer(minimum: int | None = None, maximum: int | None = None) -> vol.All:
    return vol.All(vol.Coerce(int), vol.Range(min=minimum, max=maximum))


_FRACTION = _number(0.0, 1.0)
_DURATION_US = _integer(0)

AREA_SCHEMA = vol.Schema(
    {
        vol.Optional("width", default=DEFAULT_AREA_WIDTH): _number(1.0),
        vol.Optional("height", default=DEFAULT_AREA_HEIGHT): _number(1.0),
    }
)

MOBILITY_SCHEMA = vol.Schema(
    {
        vol.Optional("speed_min", default=DEFAULT_SPEED_MIN): _number(0.0, 100.0),
        vol.Optional("speed_max", default=DEFAULT_SPEED_MAX): _number(0.0, 100.0),
        vol.Optional("pause_time_s", default=DEFAULT_PAUSE_TIME_S): _number(0.0),
        vol.Optional("step_s", default=DEFAULT_MOBILITY_STEP_S): _number(0.001, 60.0),
    }
)

FLOW_SCHEMA = vol.Schema(
    {
        vol.Required("src"): _integer(0),
        vol.Required("dst"): _integer(0),
    }
)

TRAFFIC_SCHEMA = vol.Schema(
    {
        vol.Optional("flows", default=DEFAULT_FLOW_COUNT): _integer(0, 10_000),
        vol.Optional("explicit", default=list): [FLOW_SCHEMA],
        vol.Optional("packet_bytes", default=DEFAULT_PACKET_BYTES): _integer(1, 65_000),
        vol.Optional("data_rate_pps", default=DEFAULT_DATA_RATE_PPS): _number(0.001, 10_000.0),
        vol.Optional("start_s", default=DEFAULT_TRAFFIC_START_S): _number(0.0),
        vol.Optional("drain_s", default=DEFAULT_DRAIN_S): _number(0.0),
    }
)

JAM_REGION_SCHEMA = vol.Schema(
    {
        vol.Required("x"): vol.Coerce(float),
        vol.Required("y"): vol.Coerce(float),
        vol.Required("radius"): _number(0.0),
    }
)

CHANNEL_SCHEMA = vol.Schema(
    {
        vol.Optional("range_m", default=DEFAULT_RANGE_M): _number(0.001),
        vol.Optional("loss_probability", default=DEFAULT_LOSS_PROBABILITY): _FRACTION,
        vol.Optional("per_hop_delay_us", default=DEFAULT_PER_HOP_DELAY_US): _DURATION_US,
        vol.Optional("jitter_us", default=DEFAULT_JITTER_US): _DURATION_US,
        vol.Optional("jam_regions", default=list): [JAM_REGION_SCHEMA],
    }
)

AODV_SCHEMA = vol.Schema(
    {
        vol.Optional("active_route_lifetime_us", default=ACTIVE_ROUTE_LIFETIME_US): _integer(1),
        vol.Optional("rreq_retries", default=RREQ_RETRIES): _integer(0, 10),
        vol.Optional("rreq_wait_us", default=RREQ_WAIT_US): _integer(1),
        vol.Optional("net_diameter_ttl", default=NET_DIAMETER_TTL): _integer(1, 255),
        vol.Optional("hello_interval_us", default=HELLO_INTERVAL_US): _integer(1),
        vol.Optional("allowed_hello_loss", default=ALLOWED_HELLO_LOSS): _integer(1, 100),
        vol.Optional("buffer_capacity", default=BUFFER_CAPACITY): _integer(1),
        vol.Optional("seen_cache_capacity", default=SEEN_CACHE_CAPACITY): _integer(1),
        vol.Optional("seen_cache_retention_us", default=SEEN_CACHE_RETENTION_US): _integer(1),
        vol.Optional("data_ttl", default=DATA_TTL): _integer(1, 255),
    }
)

HSRP_SCHEMA = vol.Schema(
    {
        vol.Optional("max_paths", default=MAX_PATHS): _integer(1, 16),
        vol.Optional("maintenance_interval_us", default=MAINTENANCE_INTERVAL_US): _integer(1),
        vol.Optional("max_seq_jump", default=MAX_SEQ_JUMP): _integer(0),
        vol.Optional("watchdog_deadline_us", default=WATCHDOG_DEADLINE_US): _integer(1),
        vol.Optional("flood_bucket_capacity", default=FLOOD_BUCKET_CAPACITY): _integer(1),
        vol.Optional("flood_refill_per_s", default=FLOOD_REFILL_PER_S): _integer(0),
        vol.Optional("max_reports_per_hello", default=MAX_REPORTS_PER_HELLO): _integer(0, 255),
        vol.Optional("encrypt_payloads", default=ENCRYPT_PAYLOADS): bool,
        vol.Optional("verify_signatures", default=True): bool,
        vol.Optional("allow_insecure_fallback", default=False): bool,
        vol.Optional("signature_scheme", default=SCHEME_KEYED_DIGEST): vol.In(SIGNATURE_SCHEMES),
    }
)

WEIGHTS_SCHEMA = vol.Schema(
    {
        vol.Optional("engagement", default=WEIGHT_ENGAGEMENT): _FRACTION,
        vol.Optional("reputation", default=WEIGHT_REPUTATION): _FRACTION,
        vol.Optional("recommendation", default=WEIGHT_RECOMMENDATION): _FRACTION,
    }
)

TRUST_SCHEMA = vol.Schema(
    {
        vol.Optional("window", default=TRUST_WINDOW): _integer(1),
        vol.Optional("weights", default=dict): WEIGHTS_SCHEMA,
        vol.Optional("bypass_window_us", default=BYPASS_WINDOW_US): _integer(1),
        vol.Optional("bypass_threshold", default=BYPASS_THRESHOLD): _integer(1),
        vol.Optional("snapshot_interval_us", default=TRUST_SNAPSHOT_INTERVAL_US): _integer(1),
    }
)

ATTACK_SCHEMA = vol.Schema(
    {
        vol.Optional("enabled", default=False): bool,
        vol.Optional("kind", default=ATTACK_BLACKHOLE): vol.In(ATTACK_KINDS),
        vol.Optional("count", default=DEFAULT_ATTACKER_COUNT): _integer(0),
        vol.Optional("nodes", default=None): vol.Any(None, [_integer(0)]),
        vol.Optional("active_from_s", default=0.0): _number(0.0),
        vol.Optional("active_until_s", default=None): vol.Any(None, _number(0.0)),
        vol.Optional("flood_rate", default=DEFAULT_FLOODER_RATE): _number(0.0),
        vol.Optional("flood_target", default=NONEXISTENT_NODE): _integer(0, NONEXISTENT_NODE),
        vol.Optional("drop_fraction", default=DEFAULT_SINKHOLE_DROP): _FRACTION,
        vol.Optional("seq_inflation", default=BLACKHOLE_SEQ_INFLATION): _integer(0),
        vol.Optional("masquerade", default=False): bool,
    }
)

SWEEP_SCHEMA = vol.Schema(
    {
        vol.Optional("nodes"): vol.All([_integer(2)], vol.Length(min=1)),
        vol.Optional("speed_max"): vol.All([_number(0.0, 100.0)], vol.Length(min=1)),
    }
)

SCENARIO_SCHEMA = vol.Schema(
    {
        vol.Optional("name"): vol.All(str, vol.Length(min=1)),
        vol.Required("nodes"): _integer(2),
        vol.Optional("seed", default=DEFAULT_MASTER_SEED): _integer(0, 2**64 - 1),
        vol.Optional("protocol", default=PROTOCOL_HSRP): vol.In(PROTOCOLS),
        vol.Optional("duration_s", default=DEFAULT_DURATION_S): _number(0.000001),
        vol.Optional("area", default=dict): AREA_SCHEMA,
        vol.Optional("mobility", default=dict): MOBILITY_SCHEMA,
        vol.Optional("traffic", default=dict): TRAFFIC_SCHEMA,
        vol.Optional("channel", default=dict): CHANNEL_SCHEMA,
        vol.Optional("aodv", default=dict): AODV_SCHEMA,
        vol.Optional("hsrp", default=dict): HSRP_SCHEMA,
        vol.Optional("trust", default=dict): TRUST_SCHEMA,
        vol.Optional("attack", default=dict): ATTACK_SCHEMA,
        vol.Optional("sweep", default=None): vol.Any(None, SWEEP_SCHEMA),
    }
)


@dataclass(frozen=True, slots=True)
class MobilityConfig:
    speed_min: float = DEFAULT_SPEED_MIN
    speed_max: float = DEFAULT_SPEED_MAX
    pause_time_s: float = DEFAULT_PAUSE_TIME_S
    step_s: float = DEFAULT_MOBILITY_STEP_S

    @property
    def speed_range(self) -> tuple[float, float]:
        return (self.speed_min, self.speed_max)

    @property
    def static(self) -> bool:
        return self.speed_max <= 0.0


@dataclass(frozen=True, slots=True)
class FlowSpec:
    src: int
    dst: int


@dataclass(frozen=True, slots=True)
class TrafficConfig:
    """Constant-bit-rate flows.

    ``data_rate_pps`` is packets per second per flow. No packets are
    originated during the final ``drain_s`` seconds so in-flight packets can
    arrive before the run ends.
    """

    flows: int = DEFAULT_FLOW_COUNT
    explicit: tuple[FlowSpec, ...] = ()
    packet_bytes: int = DEFAULT_PACKET_BYTES
    data_rate_pps: float = DEFAULT_DATA_RATE_PPS
    start_s: float = DEFAULT_TRAFFIC_START_S
    drain_s: float = DEFAULT_DRAIN_S


@dataclass(frozen=True, slots=True)
class AttackConfig:
    enabled: bool = False
    kind: str = ATTACK_BLACKHOLE
    count: int = DEFAULT_ATTACKER_COUNT
    nodes: tuple[int, ...] | None = None
    active_from_s: float = 0.0
    active_until_s: float | None = None
    flood_rate: float = DEFAULT_FLOODER_RATE
    flood_target: int = NONEXISTENT_NODE
    drop_fraction: float = DEFAULT_SINKHOLE_DROP
    seq_inflation: int = BLACKHOLE_SEQ_INFLATION
    masquerade: bool = False

    @property
    def attacker_count(self) -> int:
        return len(self.nodes) if self.nodes is not None else self.count

    @property
    def label(self) -> str:
        """Attack column value in result rows."""
        return self.kind if self.enabled else "none"

    def profile(self, region: int | None = None) -> AttackProfile:
        """Profile shared by the configured attackers (jammers get their region)."""
        return AttackProfile(
            kind=AttackKind(self.kind),
            active_from=seconds(self.active_from_s),
            active_until=None if self.active_until_s is None else seconds(self.active_until_s),
            rate=self.flood_rate,
            target=self.flood_target,
            drop_fraction=self.drop_fraction,
            region=region,
            seq_inflation=self.seq_inflation,
            masquerade=self.masquerade,
        )


@dataclass(frozen=True, slots=True)
class SweepConfig:
    nodes: tuple[int, ...] = ()
    speed_max: tuple[float, ...] = ()


@dataclass(frozen=True, slots=True)
class Scenario:
    """A validated scenario."""

    name: str
    nodes: int
    seed: int = DEFAULT_MASTER_SEED
    protocol: str = PROTOCOL_HSRP
    duration_s: float = DEFAULT_DURATION_S
    area: Area = field(default_factory=lambda: Area(DEFAULT_AREA_WIDTH, DEFAULT_AREA_HEIGHT))
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    aodv: AodvConfig = field(default_factory=AodvConfig)
    hsrp: HsrpConfig = field(default_factory=HsrpConfig)
    trust: TrustConfig = field(default_factory=TrustConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    sweep: SweepConfig | None = None

    @property
    def duration_us(self) -> SimTime:
        return seconds(self.duration_s)

    @property
    def payload_bits(self) -> int:
        return self.traffic.packet_bytes * 8


def _format_path(path: list[Any]) -> str:
    parts: list[str] = []
    for item in path:
        key = getattr(item, "schema", item)
        if isinstance(key, int):
            parts.append(f"[{key}]")
        else:
            parts.append(f".{key}" if parts else str(key))
    return "".join(parts) or "<root>"


def validate_scenario_dict(raw: Any) -> dict[str, Any]:
    """Apply the schema and the cross-field checks.

    Raises:
        ValidationError: Naming the offending field
    """
    if not isinstance(raw, dict):
        raise ValidationError("scenario must be a JSON object", None)
    try:
        data: dict[str, Any] = SCENARIO_SCHEMA(raw)
    except vol.Invalid as err:
        path = _format_path(list(err.path))
        raise ValidationError(f"{path}: {err.msg}", path) from err
    validate_scenario_data(data)
    return data


def scenario_from_dict(raw: Any, *, default_name: str = "scenario") -> Scenario:
    """Build a :class:`Scenario` from a decoded document."""
    data = validate_scenario_dict(raw)
    traffic = data["traffic"]
    channel = data["channel"]
    trust = data["trust"]
    attack = data["attack"]
    sweep = data["sweep"]
    return Scenario(
        name=data.get("name", default_name),
        nodes=data["nodes"],
        seed=data["seed"],
        protocol=data["protocol"],
        duration_s=data["duration_s"],
        area=Area(data["area"]["width"], data["area"]["height"]),
        mobility=MobilityConfig(**data["mobility"]),
        traffic=TrafficConfig(
            flows=traffic["flows"],
            explicit=tuple(FlowSpec(f["src"], f["dst"]) for f in traffic["explicit"]),
            packet_bytes=traffic["packet_bytes"],
            data_rate_pps=traffic["data_rate_pps"],
            start_s=traffic["start_s"],
            drain_s=traffic["drain_s"],
        ),
        channel=ChannelConfig(
            range_m=channel["range_m"],
            loss_probability=channel["loss_probability"],
            per_hop_delay_us=channel["per_hop_delay_us"],
            jitter_us=channel["jitter_us"],
            jam_regions=tuple(
                JamRegion(Position(r["x"], r["y"]), r["radius"]) for r in channel["jam_regions"]
            ),
        ),
        aodv=AodvConfig(**data["aodv"]),
        hsrp=HsrpConfig(**data["hsrp"]),
        trust=TrustConfig(
            window=trust["window"],
            weights=TrustWeights(**trust["weights"]),
            bypass_window_us=trust["bypass_window_us"],
            bypass_threshold=trust["bypass_threshold"],
            snapshot_interval_us=trust["snapshot_interval_us"],
        ),
        attack=AttackConfig(
            **{key: value for key, value in attack.items() if key != "nodes"},
            nodes=None if attack["nodes"] is None else tuple(attack["nodes"]),
        ),
        sweep=None
        if sweep is None
        else SweepConfig(
            nodes=tuple(sweep.get("nodes", ())), speed_max=tuple(sweep.get("speed_max", ()))
        ),
    )


def parse_scenario(text: str, *, default_name: str = "scenario") -> Scenario:
    """Parse scenario text.

    Raises:
        ParseError: If the text is not valid JSON
        ValidationError: If the document violates the schema or an invariant
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, line=err.lineno) from err
    return scenario_from_dict(raw, default_name=default_name)


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file.

    Raises:
        ParseError: If the file cannot be read or is not valid JSON
        ValidationError: If the document violates the schema or an invariant
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err.strerror}") from err
    scenario = parse_scenario(text, default_name=path.stem)
    _LOGGER.debug("Loaded scenario %s from %s", scenario.name, path)
    return scenario


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    """Serialise a scenario so that :func:`scenario_from_dict` inverts it."""
    traffic = scenario.traffic
    channel = scenario.channel
    trust = scenario.trust
    attack = scenario.attack
    out: dict[str, Any] = {
        "name": scenario.name,
        "nodes": scenario.nodes,
        "seed": scenario.seed,
        "protocol": scenario.protocol,
        "duration_s": scenario.duration_s,
        "area": {"width": scenario.area.width, "height": scenario.area.height},
        "mobility": {
            "speed_min": scenario.mobility.speed_min,
            "speed_max": scenario.mobility.speed_max,
            "pause_time_s": scenario.mobility.pause_time_s,
            "step_s": scenario.mobility.step_s,
        },
        "traffic": {
            "flows": traffic.flows,
            "explicit": [{"src": f.src, "dst": f.dst} for f in traffic.explicit],
            "packet_bytes": traffic.packet_bytes,
            "data_rate_pps": traffic.data_rate_pps,
            "start_s": traffic.start_s,
            "drain_s": traffic.drain_s,
        },
        "channel": {
            "range_m": channel.range_m,
            "loss_probability": channel.loss_probability,
            "per_hop_delay_us": channel.per_hop_delay_us,
            "jitter_us": channel.jitter_us,
            "jam_regions": [
                {"x": r.center.x, "y": r.center.y, "radius": r.radius}
                for r in channel.jam_regions
            ],
        },
        "aodv": {name: getattr(scenario.aodv, name) for name in AodvConfig.__dataclass_fields__},
        "hsrp": {name: getattr(scenario.hsrp, name) for name in HsrpConfig.__dataclass_fields__},
        "trust": {
            "window": trust.window,
            "weights": {
                "engagement": trust.weights.engagement,
                "reputation": trust.weights.reputation,
                "recommendation": trust.weights.recommendation,
            },
            "bypass_window_us": trust.bypass_window_us,
            "bypass_threshold": trust.bypass_threshold,
            "snapshot_interval_us": trust.snapshot_interval_us,
        },
        "attack": {
            name: getattr(attack, name)
            for name in AttackConfig.__dataclass_fields__
            if name != "nodes"
        }
        | {"nodes": None if attack.nodes is None else list(attack.nodes)},
        "sweep": None
        if scenario.sweep is None
        else {"nodes": list(scenario.sweep.nodes), "speed_max": list(scenario.sweep.speed_max)},
    }
    return out


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2, sort_keys=True) + "\n"


def expand_sweep(scenario: Scenario) -> list[Scenario]:
    """One scenario per point of the sweep grid (the scenario itself if none)."""
    sweep = scenario.sweep
    if sweep is None or not (sweep.nodes or sweep.speed_max):
        return [scenario]
    node_counts = sweep.nodes or (scenario.nodes,)
    speeds = sweep.speed_max or (scenario.mobility.speed_max,)
    expanded = []
    for nodes, speed_max in itertools.product(node_counts, speeds):
        mobility = replace(
            scenario.mobility,
            speed_max=speed_max,
            speed_min=min(scenario.mobility.speed_min, speed_max),
        )
        expanded.append(
            replace(
                scenario,
                name=f"{scenario.name}-n{nodes}-v{speed_max:g}",
                nodes=nodes,
                mobility=mobility,
                sweep=None,
            )
        )
    return expanded


def discover_scenarios(directory: str | Path) -> list[Path]:
    """Scenario files in ``directory``, sorted by name.

    Raises:
        ParseError: If ``directory`` is neither a file nor a directory
    """
    root = Path(directory)
    if root.is_file():
        return [root]
    if not root.is_dir():
        raise ParseError(f"no such scenario file or directory: {root}")
    return sorted(p for p in root.iterdir() if p.suffix in ACCEPTED_SCENARIO_SUFFIXES)
