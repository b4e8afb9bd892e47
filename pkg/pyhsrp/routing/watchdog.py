"""Promiscuous-mode forwarding observation."""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Callable
from dataclasses import dataclass, field

from ..const import WATCHDOG_DEADLINE_US
from ..kernel import SimTime
from ..trust import Outcome


@dataclass(slots=True)
class Watchdog:
    """Pending expectations that a next hop will retransmit a packet.

    A watcher registers an expectation when it hands a data packet to a
    next hop that is not the packet's destination. Hearing the next hop's
    retransmission before the deadline is a success; silence is a failure.
    """

    deadline_us: SimTime = WATCHDOG_DEADLINE_US
    pending: dict[tuple[int, int], set[int]] = field(default_factory=lambda: defaultdict(set))

    def expect(self, watcher: int, next_hop: int, packet_id: int, now: SimTime) -> SimTime:
        """Start watching; return the deadline."""
        self.pending[(next_hop, packet_id)].add(watcher)
        return now + self.deadline_us

    def overheard(
        self, forwarder: int, packet_id: int, can_hear: Callable[[int], bool]
    ) -> list[int]:
        """Resolve expectations satisfied by ``forwarder`` retransmitting.

        Returns:
            Watchers that heard the retransmission, in id order
        """
        watchers = self.pending.get((forwarder, packet_id))
        if not watchers:
            return []
        heard = sorted(w for w in watchers if can_hear(w))
        watchers.difference_update(heard)
        if not watchers:
            del self.pending[(forwarder, packet_id)]
        return heard

    def expire(self, watcher: int, next_hop: int, packet_id: int) -> Outcome | None:
        """Deadline reached: Failure if still pending, None if already resolved."""
        watchers = self.pending.get((next_hop, packet_id))
        if watchers is None or watcher not in watchers:
            return None
        watchers.discard(watcher)
        if not watchers:
            del self.pending[(next_hop, packet_id)]
        return Outcome.FAILURE
