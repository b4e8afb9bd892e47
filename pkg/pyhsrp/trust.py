"""Per-node trust tables.

Each node keeps one :class:`TrustTable`. A peer's fused score combines three
evidence sources:

- engagement E: Laplace-smoothed success ratio of direct interactions,
  ``(successes + 1) / (successes + failures + 2)``
- reputation R: mean of the assessments other nodes sent about the peer
- recommendation C: mean of the watchdog observations relayed by
  intermediate nodes

``fused = wE*E + wR*R + wC*C`` is classified into the bands Bad [0, 0.5),
Neutral [0.5, 0.8) and Good [0.8, 1]. Links are also labelled qualitatively
from the number of bypasses observed in a sliding window.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import StrEnum

from .const import (
    BYPASS_THRESHOLD,
    BYPASS_WINDOW_US,
    TRUST_GOOD_MIN,
    TRUST_NEUTRAL_MIN,
    TRUST_SNAPSHOT_INTERVAL_US,
    TRUST_WINDOW,
    WEIGHT_ENGAGEMENT,
    WEIGHT_RECOMMENDATION,
    WEIGHT_REPUTATION,
)
from .exceptions import BadWeights, ScoreOutOfRange, SelfReport, SelfTrust
from .kernel import SimTime

_LOGGER = logging.getLogger(__name__)

NEUTRAL_PRIOR = 0.5
_WEIGHT_TOLERANCE = 1e-9


class TrustClass(StrEnum):
    BAD = "bad"
    NEUTRAL = "neutral"
    GOOD = "good"


class Outcome(StrEnum):
    SUCCESS = "success"
    FAILURE = "failure"


class ReportKind(StrEnum):
    REPUTATION = "reputation"
    RECOMMENDATION = "recommendation"


class LinkLabel(StrEnum):
    STRONG = "strong"
    NORMAL = "normal"
    WEAK = "weak"


@dataclass(frozen=True, slots=True)
class TrustWeights:
    """Convex fusion weights."""

    engagement: float = WEIGHT_ENGAGEMENT
    reputation: float = WEIGHT_REPUTATION
    recommendation: float = WEIGHT_RECOMMENDATION

    def __post_init__(self) -> None:
        validate_weights(self)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.engagement, self.reputation, self.recommendation)


def validate_weights(weights: TrustWeights | tuple[float, float, float]) -> None:
    """Raise :class:`BadWeights` unless weights are non-negative and sum to 1."""
    values = weights.as_tuple() if isinstance(weights, TrustWeights) else tuple(weights)
    if len(values) != 3 or any(w < 0 for w in values):
        raise BadWeights(f"weights must be three non-negative numbers (got {values})")
    if abs(math.fsum(values) - 1.0) > _WEIGHT_TOLERANCE:
        raise BadWeights(f"weights must sum to 1 (got {math.fsum(values)})")


@dataclass(frozen=True, slots=True)
class TrustReport:
    """An opinion ``reporter`` holds about ``peer``."""

    reporter: int
    peer: int
    score: float
    at: SimTime


@dataclass(slots=True)
class EngagementStats:
    successes: int = 0
    failures: int = 0

    @property
    def score(self) -> float:
        return (self.successes + 1) / (self.successes + self.failures + 2)


@dataclass(slots=True)
class TrustRecord:
    """Everything a node knows about one peer."""

    peer: int
    engagement: EngagementStats = field(default_factory=EngagementStats)
    reputation_reports: dict[int, deque[TrustReport]] = field(default_factory=dict)
    recommendation_reports: dict[int, deque[TrustReport]] = field(default_factory=dict)
    reputation: float = NEUTRAL_PRIOR
    recommendation: float = NEUTRAL_PRIOR
    fused: float = NEUTRAL_PRIOR
    trust_class: TrustClass = TrustClass.NEUTRAL

    def reports(self, kind: ReportKind) -> dict[int, deque[TrustReport]]:
        if kind is ReportKind.REPUTATION:
            return self.reputation_reports
        return self.recommendation_reports


@dataclass(slots=True)
class LinkQuality:
    """Bypass events on one link within a sliding window."""

    window: SimTime = BYPASS_WINDOW_US
    events: deque[SimTime] = field(default_factory=deque)

    def record_bypass(self, now: SimTime) -> None:
        self.events.append(now)
        self.advance(now)

    def advance(self, now: SimTime) -> None:
        while self.events and self.events[0] <= now - self.window:
            self.events.popleft()

    @property
    def bypass_count(self) -> int:
        return len(self.events)


def classify(fused: float) -> TrustClass:
    """Map a score in [0, 1] to its band; lower bounds are inclusive."""
    if not 0.0 <= fused <= 1.0:
        raise ScoreOutOfRange(f"trust score must be in [0, 1] (got {fused})")
    if fused < TRUST_NEUTRAL_MIN:
        return TrustClass.BAD
    if fused < TRUST_GOOD_MIN:
        return TrustClass.NEUTRAL
    return TrustClass.GOOD


def label_link(quality: LinkQuality | int, threshold: int = BYPASS_THRESHOLD) -> LinkLabel:
    """Strong with no bypasses, Normal below ``threshold``, Weak otherwise."""
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1 (got {threshold})")
    count = quality if isinstance(quality, int) else quality.bypass_count
    if count == 0:
        return LinkLabel.STRONG
    if count < threshold:
        return LinkLabel.NORMAL
    return LinkLabel.WEAK


def fuse(record: TrustRecord, weights: TrustWeights | tuple[float, float, float]) -> float:
    """Fuse E, R and C with convex weights and update the record's class.

    Raises:
        BadWeights: If the weights are not a convex combination
    """
    validate_weights(weights)
    w_e, w_r, w_c = weights.as_tuple() if isinstance(weights, TrustWeights) else weights
    value = w_e * record.engagement.score + w_r * record.reputation + w_c * record.recommendation
    record.fused = min(1.0, max(0.0, value))
    record.trust_class = classify(record.fused)
    return record.fused


def _mean(values: list[float]) -> float:
    if not values:
        return NEUTRAL_PRIOR
    return math.fsum(sorted(values)) / len(values)


class TrustTable:
    """Trust state one node holds about its peers."""

    def __init__(
        self,
        owner: int,
        *,
        window: int = TRUST_WINDOW,
        weights: TrustWeights | None = None,
        bypass_window: SimTime = BYPASS_WINDOW_US,
        bypass_threshold: int = BYPASS_THRESHOLD,
    ) -> None:
        self.owner = owner
        self.window = window
        self.weights = weights or TrustWeights()
        self.bypass_window = bypass_window
        self.bypass_threshold = bypass_threshold
        self.records: dict[int, TrustRecord] = {}
        self.links: dict[int, LinkQuality] = {}

    def __contains__(self, peer: object) -> bool:
        return peer in self.records

    def __iter__(self) -> Iterator[TrustRecord]:
        return iter(self.records[peer] for peer in sorted(self.records))

    def record(self, peer: int) -> TrustRecord:
        """Get or create the record for ``peer``."""
        if peer == self.owner:
            raise SelfTrust(f"node {self.owner} cannot hold a trust record about itself")
        rec = self.records.get(peer)
        if rec is None:
            rec = self.records[peer] = TrustRecord(peer)
        return rec

    def peek(self, peer: int) -> TrustRecord | None:
        return self.records.get(peer)

    def fused(self, peer: int) -> float:
        rec = self.records.get(peer)
        return NEUTRAL_PRIOR if rec is None else rec.fused

    def trust_class(self, peer: int) -> TrustClass:
        rec = self.records.get(peer)
        return TrustClass.NEUTRAL if rec is None else rec.trust_class

    def record_interaction(self, peer: int, outcome: Outcome) -> float:
        """Count one direct interaction and return the new engagement score.

        Raises:
            SelfTrust: If ``peer`` is the table owner
        """
        rec = self.record(peer)
        if outcome is Outcome.SUCCESS:
            rec.engagement.successes += 1
        else:
            rec.engagement.failures += 1
        self.refresh(peer)
        return rec.engagement.score

    def ingest_report(self, kind: ReportKind, report: TrustReport) -> None:
        """Store a reputation or recommendation report about a peer.

        Only the latest ``window`` reports per reporter are kept. Reports about
        the owner itself are ignored.

        Raises:
            ScoreOutOfRange: If the score is outside [0, 1]
            SelfReport: If the reporter rates itself
        """
        if not 0.0 <= report.score <= 1.0:
            raise ScoreOutOfRange(f"report score must be in [0, 1] (got {report.score})")
        if report.reporter == report.peer:
            raise SelfReport(f"node {report.reporter} cannot report on itself")
        if report.peer == self.owner:
            return
        rec = self.record(report.peer)
        per_reporter = rec.reports(kind)
        retained = per_reporter.get(report.reporter)
        if retained is None:
            retained = per_reporter[report.reporter] = deque(maxlen=self.window)
        retained.append(report)
        self.refresh(report.peer)

    def aggregate(self, peer: int, kind: ReportKind) -> float:
        """Mean retained score for ``peer``, ignoring reporters this node rates Bad."""
        rec = self.records.get(peer)
        if rec is None:
            return NEUTRAL_PRIOR
        scores = [
            report.score
            for reporter, reports in rec.reports(kind).items()
            if self.trust_class(reporter) is not TrustClass.BAD
            for report in reports
        ]
        return _mean(scores)

    def refresh(self, peer: int) -> float:
        """Recompute R, C and the fused score for ``peer``.

        When ``peer`` enters or leaves Bad its reports start or stop counting,
        so every peer it reported on is recomputed as well. Each peer is
        recomputed at most once per call.
        """
        pending = deque([peer])
        done: set[int] = set()
        while pending:
            current = pending.popleft()
            if current in done:
                continue
            done.add(current)
            if self._fuse_peer(current):
                pending.extend(self._reported_by(current))
        return self.records[peer].fused

    def _fuse_peer(self, peer: int) -> bool:
        """Re-fuse one peer; True if it crossed the Bad boundary."""
        rec = self.record(peer)
        rec.reputation = self.aggregate(peer, ReportKind.REPUTATION)
        rec.recommendation = self.aggregate(peer, ReportKind.RECOMMENDATION)
        before = rec.trust_class
        fuse(rec, self.weights)
        if rec.trust_class is before:
            return False
        _LOGGER.debug(
            "Node %d reclassified %d: %s -> %s (%.3f)",
            self.owner,
            peer,
            before,
            rec.trust_class,
            rec.fused,
        )
        return TrustClass.BAD in (before, rec.trust_class)

    def _reported_by(self, reporter: int) -> list[int]:
        """Peers holding retained reports from ``reporter``, in id order."""
        return [
            peer
            for peer in sorted(self.records)
            if reporter in self.records[peer].reputation_reports
            or reporter in self.records[peer].recommendation_reports
        ]

    def link(self, peer: int) -> LinkQuality:
        quality = self.links.get(peer)
        if quality is None:
            quality = self.links[peer] = LinkQuality(window=self.bypass_window)
        return quality

    def record_bypass(self, peer: int, now: SimTime) -> LinkLabel:
        """Count one bypass on the link to ``peer`` and return its label."""
        quality = self.link(peer)
        quality.record_bypass(now)
        return label_link(quality, self.bypass_threshold)

    def link_label(self, peer: int, now: SimTime) -> LinkLabel:
        quality = self.link(peer)
        quality.advance(now)
        return label_link(quality, self.bypass_threshold)


@dataclass(frozen=True, slots=True)
class TrustConfig:
    """Trust engine settings shared by every node of a run."""

    window: int = TRUST_WINDOW
    weights: TrustWeights = field(default_factory=TrustWeights)
    bypass_window_us: SimTime = BYPASS_WINDOW_US
    bypass_threshold: int = BYPASS_THRESHOLD
    snapshot_interval_us: SimTime = TRUST_SNAPSHOT_INTERVAL_US

    def table(self, owner: int) -> TrustTable:
        return TrustTable(
            owner,
            window=self.window,
            weights=self.weights,
            bypass_window=self.bypass_window_us,
            bypass_threshold=self.bypass_threshold,
        )
