"""Per-originator token bucket for RREQ forwarding."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..const import FLOOD_BUCKET_CAPACITY, FLOOD_REFILL_PER_S, MICROS_PER_SECOND
from ..kernel import SimTime

# One token is a million micro-tokens; a refill rate of r tokens/s is then
# exactly r micro-tokens per microsecond.
_TOKEN: int = MICROS_PER_SECOND


@dataclass(slots=True)
class _Bucket:
    level: int
    updated_at: SimTime


@dataclass(slots=True)
class FloodGuardState:
    """Token buckets keyed by RREQ originator.

    Over any interval of length t the guard admits at most
    ``capacity + refill_per_s * t`` RREQs from one originator.
    """

    capacity: int = FLOOD_BUCKET_CAPACITY
    refill_per_s: int = FLOOD_REFILL_PER_S
    buckets: dict[int, _Bucket] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError(f"bucket capacity must be >= 1 (got {self.capacity})")
        if self.refill_per_s < 0:
            raise ValueError(f"refill rate must be >= 0 (got {self.refill_per_s})")

    def tokens(self, originator: int, now: SimTime) -> float:
        """Tokens currently available to ``originator``."""
        return self._level(originator, now) / _TOKEN

    def _level(self, originator: int, now: SimTime) -> int:
        bucket = self.buckets.get(originator)
        if bucket is None:
            return self.capacity * _TOKEN
        elapsed = max(0, now - bucket.updated_at)
        return min(self.capacity * _TOKEN, bucket.level + elapsed * self.refill_per_s)

    def allow(self, originator: int, now: SimTime) -> bool:
        """Consume one token for ``originator`` if one is available."""
        level = self._level(originator, now)
        if level < _TOKEN:
            self.buckets[originator] = _Bucket(level, now)
            return False
        self.buckets[originator] = _Bucket(level - _TOKEN, now)
        return True
