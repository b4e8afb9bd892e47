"""Route tables, the duplicate cache and multipath route sets."""

from __future__ import annotations

from collections import OrderedDict
from collections.abc import Hashable, Iterator
from dataclasses import dataclass, field
from enum import StrEnum

from ..const import MAX_PATHS, SEEN_CACHE_CAPACITY, SEEN_CACHE_RETENTION_US
from ..kernel import SimTime


class RouteState(StrEnum):
    VALID = "valid"
    INVALID = "invalid"


@dataclass(slots=True)
class RouteEntry:
    """Next-hop record for one destination."""

    dest: int
    next_hop: int
    dest_seq: int
    hop_count: int
    expires_at: SimTime
    state: RouteState = RouteState.VALID
    precursors: set[int] = field(default_factory=set)

    def usable(self, now: SimTime) -> bool:
        return self.state is RouteState.VALID and now < self.expires_at


class RouteTable:
    """Single-path table keyed by destination."""

    def __init__(self) -> None:
        self._entries: dict[int, RouteEntry] = {}

    def __contains__(self, dest: object) -> bool:
        return dest in self._entries

    def __iter__(self) -> Iterator[RouteEntry]:
        return iter(self._entries[dest] for dest in sorted(self._entries))

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, dest: int) -> RouteEntry | None:
        return self._entries.get(dest)

    def lookup(self, dest: int, now: SimTime) -> RouteEntry | None:
        """Return the entry for ``dest`` if it is valid and unexpired."""
        entry = self._entries.get(dest)
        if entry is None or not entry.usable(now):
            return None
        return entry

    def put(self, entry: RouteEntry) -> None:
        self._entries[entry.dest] = entry


class SeenCache:
    """Capacity-bounded set of packet ids with insertion times.

    An id stays a member for ``retention`` microseconds after insertion, or
    until the oldest ids are evicted to make room.
    """

    def __init__(
        self, capacity: int = SEEN_CACHE_CAPACITY, retention: SimTime = SEEN_CACHE_RETENTION_US
    ) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1 (got {capacity})")
        self.capacity = capacity
        self.retention = retention
        self._entries: OrderedDict[Hashable, SimTime] = OrderedDict()

    def __len__(self) -> int:
        return len(self._entries)

    def _expire(self, now: SimTime) -> None:
        cutoff = now - self.retention
        while self._entries:
            key, at = next(iter(self._entries.items()))
            if at > cutoff:
                break
            del self._entries[key]

    def contains(self, key: Hashable, now: SimTime) -> bool:
        self._expire(now)
        return key in self._entries

    def insert(self, key: Hashable, now: SimTime) -> bool:
        """Add ``key``; return True if it was not already a member."""
        self._expire(now)
        if key in self._entries:
            return False
        self._entries[key] = now
        while len(self._entries) > self.capacity:
            self._entries.popitem(last=False)
        return True


@dataclass(slots=True)
class PathEntry:
    """One of the alternate paths to a destination."""

    next_hop: int
    last_hop: int | None
    hop_count: int
    expires_at: SimTime

    def usable(self, now: SimTime) -> bool:
        return now < self.expires_at


@dataclass(slots=True)
class MultipathRouteSet:
    """Up to ``max_paths`` link-disjoint paths to one destination.

    All paths held for one sequence number share the same hop count, which is
    also the advertised hop count. A strictly shorter path at the same
    sequence number replaces the set, a longer one is refused, and an equal
    one is added as an alternate if neither its next hop nor its last hop is
    already in use. Every hop count a node relays is therefore its advertised
    hop count, and advertised hop counts strictly decrease along next-hop
    pointers.
    """

    dest: int
    dest_seq: int | None = None
    paths: list[PathEntry] = field(default_factory=list)
    max_paths: int = MAX_PATHS
    advertised_hop_count: int = 0
    precursors: set[int] = field(default_factory=set)

    def valid_paths(self, now: SimTime) -> list[PathEntry]:
        return [path for path in self.paths if path.usable(now)]

    def prune(self, now: SimTime) -> None:
        """Forget expired paths."""
        self.paths = self.valid_paths(now)

    def path_via(self, next_hop: int) -> PathEntry | None:
        for path in self.paths:
            if path.next_hop == next_hop:
                return path
        return None

    def _disjoint(self, next_hop: int, last_hop: int | None) -> bool:
        for path in self.paths:
            if path.next_hop == next_hop:
                return False
            if last_hop is not None and path.last_hop == last_hop:
                return False
        return True

    def _reset(self, path: PathEntry, dest_seq: int) -> bool:
        self.dest_seq = dest_seq if self.dest_seq is None else max(self.dest_seq, dest_seq)
        self.paths = [path]
        self.advertised_hop_count = path.hop_count
        return True

    def offer(
        self,
        next_hop: int,
        last_hop: int | None,
        hop_count: int,
        dest_seq: int,
        expires_at: SimTime,
        now: SimTime,
    ) -> bool:
        """Try to add a path.

        Returns:
            True if the set of paths changed
        """
        self.prune(now)
        path = PathEntry(next_hop, last_hop, hop_count, expires_at)
        if self.dest_seq is None or dest_seq > self.dest_seq:
            return self._reset(path, dest_seq)
        if dest_seq < self.dest_seq:
            return False
        if not self.paths or hop_count < self.advertised_hop_count:
            return self._reset(path, dest_seq)
        if hop_count > self.advertised_hop_count:
            return False
        existing = self.path_via(next_hop)
        if existing is not None:
            existing.expires_at = max(existing.expires_at, expires_at)
            return False
        if len(self.paths) >= self.max_paths or not self._disjoint(next_hop, last_hop):
            return False
        self.paths.append(path)
        return True

    def remove_via(self, next_hop: int) -> bool:
        before = len(self.paths)
        self.paths = [path for path in self.paths if path.next_hop != next_hop]
        return len(self.paths) != before

    def refresh(self, until: SimTime, now: SimTime) -> None:
        for path in self.paths:
            if path.usable(now):
                path.expires_at = max(path.expires_at, until)
