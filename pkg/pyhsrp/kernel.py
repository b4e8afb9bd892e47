"""Discrete-event kernel: virtual clock, stable event queue, seeded streams.

Time is an integer count of microseconds. Events are ordered by
``(fire_at, seq)`` where ``seq`` is the insertion counter, so two events
never compare equal and ties resolve in scheduling order.

Random streams use numpy's Philox counter-based generator. A stream's key is
derived from ``BLAKE2b(master_seed || label)``, so the contents of a stream
depend only on ``(master_seed, label)`` and never on the order streams were
forked in.
"""

from __future__ import annotations

import hashlib
import heapq
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import TypeVar

import numpy as np

from .const import MICROS_PER_SECOND
from .exceptions import EventAlreadyCancelled, SchedulingInPast

_LOGGER = logging.getLogger(__name__)

SimTime = int
Action = Callable[[], None]

_T = TypeVar("_T")


def seconds(value: float) -> SimTime:
    """Convert seconds to integer microseconds."""
    return round(value * MICROS_PER_SECOND)


def to_seconds(value: SimTime) -> float:
    """Convert integer microseconds to seconds."""
    return value / MICROS_PER_SECOND


@dataclass(frozen=True, slots=True, order=True)
class Event:
    """A scheduled action."""

    fire_at: SimTime
    seq: int
    action: Action = field(compare=False)
    kind: str = field(default="", compare=False)


@dataclass(slots=True)
class EventHandle:
    """Cancellation handle returned by :meth:`EventQueue.schedule`."""

    event: Event
    cancelled: bool = False
    fired: bool = False

    @property
    def fire_at(self) -> SimTime:
        return self.event.fire_at

    @property
    def seq(self) -> int:
        return self.event.seq


class EventQueue:
    """Stable-priority event queue with a monotone virtual clock."""

    def __init__(self) -> None:
        self._heap: list[tuple[SimTime, int, EventHandle]] = []
        self._seq = 0
        self._now: SimTime = 0
        self._pending = 0

    @property
    def now(self) -> SimTime:
        """Current simulated time."""
        return self._now

    def __len__(self) -> int:
        return self._pending

    def schedule(self, at: SimTime, action: Action, kind: str = "") -> EventHandle:
        """Enqueue ``action`` to fire at absolute time ``at``.

        Raises:
            SchedulingInPast: If ``at`` is before the current clock
        """
        if at < self._now:
            raise SchedulingInPast(at, self._now)
        self._seq += 1
        handle = EventHandle(Event(at, self._seq, action, kind))
        heapq.heappush(self._heap, (at, self._seq, handle))
        self._pending += 1
        return handle

    def schedule_in(self, delay: SimTime, action: Action, kind: str = "") -> EventHandle:
        """Enqueue ``action`` to fire ``delay`` microseconds from now."""
        return self.schedule(self._now + delay, action, kind)

    def cancel(self, handle: EventHandle) -> bool:
        """Cancel a pending event.

        Returns:
            False if the event already fired (nothing to remove), True otherwise

        Raises:
            EventAlreadyCancelled: If the handle was cancelled before
        """
        if handle.cancelled:
            raise EventAlreadyCancelled(f"event seq={handle.seq} already cancelled")
        if handle.fired:
            return False
        handle.cancelled = True
        self._pending -= 1
        return True

    def run_until(self, end: SimTime) -> int:
        """Process every event with ``fire_at <= end`` in order.

        The clock is left at ``end`` (or where it was, if already later).

        Returns:
            Number of events processed (cancelled events are not counted)
        """
        processed = 0
        heap = self._heap
        while heap and heap[0][0] <= end:
            fire_at, _seq, handle = heapq.heappop(heap)
            if handle.cancelled:
                continue
            handle.fired = True
            self._pending -= 1
            self._now = fire_at
            handle.event.action()
            processed += 1
        if end > self._now:
            self._now = end
        _LOGGER.debug("run_until(%d) processed %d events", end, processed)
        return processed


@dataclass(frozen=True, slots=True)
class StreamKey:
    """Identity of a random stream."""

    seed: int
    stream_id: int
    philox_key: int


def derive_stream_key(master_seed: int, label: bytes | str) -> StreamKey:
    """Derive the Philox key for ``(master_seed, label)``."""
    if isinstance(label, str):
        label = label.encode("utf-8")
    digest = hashlib.blake2b(
        (master_seed & 0xFFFF_FFFF_FFFF_FFFF).to_bytes(8, "big") + label, digest_size=16
    ).digest()
    return StreamKey(
        seed=master_seed,
        stream_id=int.from_bytes(digest[:8], "big"),
        philox_key=int.from_bytes(digest, "big"),
    )


class RandomStream:
    """Reproducible random stream for one stochastic consumer."""

    def __init__(self, key: StreamKey) -> None:
        self.key = key
        self._gen = np.random.Generator(np.random.Philox(key=key.philox_key))

    @property
    def seed(self) -> int:
        return self.key.seed

    @property
    def stream_id(self) -> int:
        return self.key.stream_id

    def random(self) -> float:
        """Uniform draw in [0, 1)."""
        return float(self._gen.random())

    def uniform(self, low: float, high: float) -> float:
        """Uniform draw in [low, high)."""
        return float(self._gen.uniform(low, high))

    def integer(self, low: int, high: int) -> int:
        """Uniform integer draw in [low, high] (inclusive)."""
        return int(self._gen.integers(low, high, endpoint=True))

    def exponential(self, mean: float) -> float:
        """Exponential draw with the given mean."""
        return float(self._gen.exponential(mean))

    def bytes(self, length: int) -> bytes:
        """Draw ``length`` random bytes."""
        return self._gen.bytes(length)

    def sample(self, population: Sequence[_T], k: int) -> list[_T]:
        """Draw ``k`` distinct items, preserving draw order."""
        picks = self._gen.choice(len(population), size=k, replace=False)
        return [population[int(i)] for i in picks]


def fork_stream(master_seed: int, label: bytes | str) -> RandomStream:
    """Create the stream for ``label`` under ``master_seed``."""
    return RandomStream(derive_stream_key(master_seed, label))
