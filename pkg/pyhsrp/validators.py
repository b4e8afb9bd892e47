"""Scenario validation beyond what the schema can express.

The voluptuous schema in :mod:`pyhsrp.scenario` checks types, ranges and
unknown keys one field at a time. The functions here check invariants that
span several fields. All of them raise :class:`ValidationError` naming the
offending field; none of them modify their input.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from typing import Any, Final

from .const import ATTACK_JAMMER, MICROS_PER_SECOND, NONEXISTENT_NODE

_LOGGER = logging.getLogger(__name__)

MAX_NODES: Final = 1000
MAX_DURATION_S: Final = 24 * 3600.0

# Strict mode thresholds
STRICT_MAX_ATTACK_SHARE: Final = 0.5
STRICT_MAX_DURATION_S: Final = 3600.0
STRICT_MIN_EXPECTED_DEGREE: Final = 3.0

_strict_mode: bool = False


def enable_strict_mode(enabled: bool = True) -> None:
    """Enable or disable strict scenario validation.

    In strict mode, warnings are logged for legal but suspicious scenarios:
    - node densities unlikely to give a connected network
    - more than half of the nodes configured as attackers
    - runs longer than one hour of simulated time
    """
    global _strict_mode
    _strict_mode = enabled
    _LOGGER.info("Strict validation mode %s", "enabled" if enabled else "disabled")


def is_strict_mode() -> bool:
    """Check if strict validation mode is enabled."""
    return _strict_mode


def _strict_warn(message: str, field: str | None = None) -> None:
    if _strict_mode:
        field_info = f" (field: {field})" if field else ""
        _LOGGER.warning("[STRICT] %s%s", message, field_info)


class ValidationError(Exception):
    """Raised when a scenario violates an invariant."""

    def __init__(self, message: str, field: str | None = None) -> None:
        """Initialize validation error.

        Args:
            message: Error description
            field: Optional dotted path of the field that failed validation
        """
        super().__init__(message)
        self.field = field
        self.message = message


def validate_node_id(node: Any, nodes: int, field_name: str = "node") -> None:
    """Check that ``node`` names one of the ``nodes`` scenario nodes."""
    if isinstance(node, bool) or not isinstance(node, int):
        raise ValidationError(f"{field_name} must be an integer", field_name)
    if not 0 <= node < nodes:
        raise ValidationError(
            f"{field_name} must be between 0 and {nodes - 1} (got {node})", field_name
        )


def validate_speed_range(speed_min: float, speed_max: float) -> None:
    if speed_min > speed_max:
        raise ValidationError(
            f"speed_min ({speed_min}) must not exceed speed_max ({speed_max})",
            "mobility.speed_min",
        )


def validate_weights(weights: dict[str, float]) -> None:
    """Fusion weights must be non-negative and sum to one."""
    values = [weights["engagement"], weights["reputation"], weights["recommendation"]]
    if any(w < 0 for w in values):
        raise ValidationError("trust weights must be non-negative", "trust.weights")
    total = math.fsum(values)
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"trust weights must sum to 1 (got {total})", "trust.weights")


def validate_attack_nodes(attack_nodes: Sequence[int], nodes: int) -> None:
    """Attack node ids must exist and be distinct."""
    for index, node in enumerate(attack_nodes):
        validate_node_id(node, nodes, f"attack.nodes[{index}]")
    if len(set(attack_nodes)) != len(attack_nodes):
        raise ValidationError("attack nodes must be distinct", "attack.nodes")


def validate_flows(
    flows: Sequence[dict[str, Any]], nodes: int, attackers: Sequence[int] = ()
) -> None:
    """Explicit flow endpoints must exist, differ and be honest."""
    hostile = set(attackers)
    for index, flow in enumerate(flows):
        prefix = f"traffic.explicit[{index}]"
        validate_node_id(flow["src"], nodes, f"{prefix}.src")
        validate_node_id(flow["dst"], nodes, f"{prefix}.dst")
        if flow["src"] == flow["dst"]:
            raise ValidationError("flow source and destination must differ", prefix)
        for end in ("src", "dst"):
            if flow[end] in hostile:
                raise ValidationError(
                    f"flow endpoint {flow[end]} is configured as an attacker", f"{prefix}.{end}"
                )


def validate_flow_count(flows: int, nodes: int, attackers: int) -> None:
    """Random flows need at least two honest nodes."""
    if flows > 0 and nodes - attackers < 2:
        raise ValidationError(
            f"{flows} flows need at least 2 honest nodes ({nodes} nodes, {attackers} attackers)",
            "traffic.flows",
        )


def validate_attack(attack: dict[str, Any], nodes: int, jam_regions: int) -> None:
    """Check the attack section against the node count and channel."""
    explicit = attack.get("nodes")
    count = len(explicit) if explicit is not None else attack["count"]
    if explicit is not None:
        validate_attack_nodes(explicit, nodes)
    elif count > nodes:
        raise ValidationError(
            f"attack count {count} exceeds node count {nodes}", "attack.count"
        )
    target = attack.get("flood_target")
    if target is not None and target != NONEXISTENT_NODE:
        validate_node_id(target, nodes, "attack.flood_target")
    until = attack.get("active_until_s")
    if until is not None and until < attack["active_from_s"]:
        raise ValidationError("active_until_s precedes active_from_s", "attack.active_until_s")
    if attack["kind"] == ATTACK_JAMMER and jam_regions == 0:
        raise ValidationError(
            "jammer attacks need at least one channel.jam_regions entry", "attack.kind"
        )
    if attack["enabled"] and nodes and count / nodes > STRICT_MAX_ATTACK_SHARE:
        _strict_warn(f"{count} of {nodes} nodes are attackers", "attack.count")


def validate_timing(duration_s: float, start_s: float, drain_s: float) -> None:
    if duration_s * MICROS_PER_SECOND < 1:
        raise ValidationError("duration_s must be positive", "duration_s")
    if start_s + drain_s >= duration_s:
        raise ValidationError(
            f"traffic window [{start_s}, {duration_s - drain_s}) is empty", "traffic.start_s"
        )
    if duration_s > STRICT_MAX_DURATION_S:
        _strict_warn(f"simulated duration of {duration_s} s is longer than one hour", "duration_s")


def check_density(nodes: int, width: float, height: float, range_m: float) -> None:
    """Warn (strict mode) when the expected node degree is very low."""
    expected_degree = (nodes - 1) * math.pi * range_m * range_m / (width * height)
    if expected_degree < STRICT_MIN_EXPECTED_DEGREE:
        _strict_warn(
            f"expected neighbor count {expected_degree:.1f} makes a partitioned network likely",
            "nodes",
        )


def validate_scenario_data(data: dict[str, Any]) -> None:
    """Run every cross-field check on schema-validated scenario data.

    Raises:
        ValidationError: On the first violated invariant
    """
    nodes = data["nodes"]
    if nodes > MAX_NODES:
        raise ValidationError(f"nodes must be at most {MAX_NODES} (got {nodes})", "nodes")
    mobility = data["mobility"]
    validate_speed_range(mobility["speed_min"], mobility["speed_max"])
    validate_weights(data["trust"]["weights"])
    attack = data["attack"]
    validate_attack(attack, nodes, len(data["channel"]["jam_regions"]))
    traffic = data["traffic"]
    attackers = attack.get("nodes") or ()
    validate_flows(traffic["explicit"], nodes, attackers)
    attacker_count = len(attackers) if attack.get("nodes") is not None else attack["count"]
    validate_flow_count(traffic["flows"], nodes, attacker_count)
    validate_timing(data["duration_s"], traffic["start_s"], traffic["drain_s"])
    area = data["area"]
    check_density(nodes, area["width"], area["height"], data["channel"]["range_m"])
    sweep = data.get("sweep") or {}
    for index, count in enumerate(sweep.get("nodes", ())):
        if count > MAX_NODES:
            raise ValidationError(f"sweep node count {count} too large", f"sweep.nodes[{index}]")
        if attack.get("nodes") is not None:
            validate_attack_nodes(attack["nodes"], count)
        validate_flows(traffic["explicit"], count, attackers)
