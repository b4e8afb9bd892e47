"""Run counters and end-of-run metrics.

Message dropped (MD) is reconciled at the end of a run as
``data_originated - data_delivered``; per-reason drop counts are kept for
diagnosis only. Jitter is the mean absolute difference of consecutive
delays within a flow, averaged over flows with at least two deliveries.
Hall-of-fame (HF) counts unique control packets stored per node.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from collections.abc import Hashable
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from .const import CSV_COLUMNS
from .kernel import SimTime, to_seconds

if TYPE_CHECKING:
    from .routing.routes import SeenCache

_LOGGER = logging.getLogger(__name__)

CONTROL_KINDS = ("rreq", "rrep", "rerr", "proactive", "hello")


@dataclass(slots=True)
class RunCounters:
    """Event-hook counters for one simulation run."""

    hf: Counter[int] = field(default_factory=Counter)
    tx: Counter[str] = field(default_factory=Counter)
    tx_by_node: dict[str, Counter[int]] = field(default_factory=lambda: defaultdict(Counter))
    data_originated: int = 0
    data_delivered: int = 0
    drops: Counter[str] = field(default_factory=Counter)
    delays: dict[int, list[SimTime]] = field(default_factory=lambda: defaultdict(list))

    @property
    def hf_count(self) -> int:
        return sum(self.hf.values())

    @property
    def control_tx_total(self) -> int:
        return sum(self.tx[kind] for kind in CONTROL_KINDS)

    @property
    def md_count(self) -> int:
        return self.data_originated - self.data_delivered

    def record_hf_store(self, node: int, seen: SeenCache, key: Hashable, now: SimTime) -> bool:
        """Store ``key`` in the node's duplicate cache.

        HF is incremented only when the id was not already present.

        Returns:
            True on first receipt
        """
        if not seen.insert(key, now):
            return False
        self.hf[node] += 1
        return True

    def record_tx(self, node: int, kind: str) -> None:
        self.tx[kind] += 1
        self.tx_by_node[kind][node] += 1

    def record_originated(self) -> None:
        self.data_originated += 1

    def record_delivered(self, flow_id: int, delay: SimTime) -> None:
        self.data_delivered += 1
        self.delays[flow_id].append(delay)

    def record_drop(self, node: int, reason: str) -> None:
        """Attribute a lost data packet to ``reason``."""
        self.drops[reason] += 1
        _LOGGER.debug("Node %d dropped data packet (%s)", node, reason)


@dataclass(frozen=True, slots=True)
class MetricsReport:
    """Derived metrics of one run plus the raw counters they came from."""

    pdr: float
    throughput_bps: float
    avg_delay_s: float
    jitter_s: float
    overhead_ratio: float
    hf: int
    md: int
    rreq: int
    rrep: int
    rerr: int
    proactive: int
    hello: int
    data_originated: int
    data_delivered: int
    control_tx_total: int
    drops: dict[str, int] = field(default_factory=dict)
    hf_by_node: dict[int, int] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "pdr": self.pdr,
            "throughput_bps": self.throughput_bps,
            "avg_delay_s": self.avg_delay_s,
            "jitter_s": self.jitter_s,
            "overhead_ratio": self.overhead_ratio,
            "hf": self.hf,
            "md": self.md,
            "rreq": self.rreq,
            "rrep": self.rrep,
            "rerr": self.rerr,
            "proactive": self.proactive,
            "hello": self.hello,
            "data_originated": self.data_originated,
            "data_delivered": self.data_delivered,
            "control_tx_total": self.control_tx_total,
            "drops": dict(sorted(self.drops.items())),
            "hf_by_node": {str(k): v for k, v in sorted(self.hf_by_node.items())},
        }


def flow_jitter(delays: list[SimTime]) -> float | None:
    """Mean absolute consecutive delay difference of one flow, in seconds."""
    if len(delays) < 2:
        return None
    diffs = np.abs(np.diff(np.asarray(delays, dtype=np.int64)))
    return to_seconds(int(diffs.sum())) / len(diffs)


def finalize(counters: RunCounters, duration: SimTime, payload_bits: int) -> MetricsReport:
    """Derive the report from raw counters.

    Raises:
        ValueError: If ``duration`` is not positive
    """
    if duration <= 0:
        raise ValueError(f"duration must be > 0 (got {duration})")
    originated = counters.data_originated
    delivered = counters.data_delivered
    all_delays = [d for flow in sorted(counters.delays) for d in counters.delays[flow]]
    jitters = [
        j
        for flow in sorted(counters.delays)
        if (j := flow_jitter(counters.delays[flow])) is not None
    ]
    control_total = counters.control_tx_total
    return MetricsReport(
        pdr=delivered / originated if originated else 0.0,
        throughput_bps=delivered * payload_bits / to_seconds(duration),
        avg_delay_s=to_seconds(sum(all_delays)) / len(all_delays) if all_delays else 0.0,
        jitter_s=float(np.mean(jitters)) if jitters else 0.0,
        overhead_ratio=control_total / max(1, delivered),
        hf=counters.hf_count,
        md=counters.md_count,
        rreq=counters.tx["rreq"],
        rrep=counters.tx["rrep"],
        rerr=counters.tx["rerr"],
        proactive=counters.tx["proactive"],
        hello=counters.tx["hello"],
        data_originated=originated,
        data_delivered=delivered,
        control_tx_total=control_total,
        drops=dict(counters.drops),
        hf_by_node=dict(counters.hf),
    )


def csv_row(
    report: MetricsReport,
    *,
    scenario: str,
    protocol: str,
    attack: str,
    seed: int,
    nodes: int,
    area_w: float,
    area_h: float,
    max_speed: float,
    duration_s: float,
) -> dict[str, Any]:
    """One CSV row in the fixed column order."""
    row: dict[str, Any] = {
        "scenario": scenario,
        "protocol": protocol,
        "attack": attack,
        "seed": seed,
        "nodes": nodes,
        "area_w": area_w,
        "area_h": area_h,
        "max_speed": max_speed,
        "duration_s": duration_s,
    }
    values = report.as_dict()
    for column in CSV_COLUMNS:
        if column not in row:
            row[column] = values[column]
    return {column: row[column] for column in CSV_COLUMNS}
