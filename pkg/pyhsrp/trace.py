"""Run trace log: writer, reader and offline checks.

A trace is line-delimited JSON, one record per line with sorted keys. The
first record is the ``header`` (scenario, seed, protocol, attackers), the
last is the ``report``. Everything a :class:`~pyhsrp.metrics.MetricsReport`
is derived from is recorded, so :func:`recompute_report` can rebuild it from
the trace alone. Record kinds:

- ``tx``: one transmission (``node``, ``kind``; RREQs add ``origin`` and
  ``fwd``; signed packets add ``frame``, the hex wire encoding)
- ``store``: a control packet stored for the first time (HF)
- ``data``: ``op`` is ``orig``, ``deliver`` (with ``delay_us``) or ``drop``
  (with ``reason``)
- ``select``: trust-gated next hop choice
- ``penalty``: a node blamed a peer
- ``routes`` / ``trust``: periodic snapshots
- ``attack``: ground truth of adversarial actions
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections import defaultdict
from collections.abc import Callable, Hashable, Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any

import networkx as nx

from .const import PROTOCOL_HSRP, SCHEME_KEYED_DIGEST, TRUST_NEUTRAL_MIN
from .crypto.multisig import multisig_verify
from .crypto.signatures import build_directory, make_scheme
from .exceptions import ParseError
from .kernel import SimTime, seconds
from .metrics import RunCounters, finalize
from .packets import SignedControlPacket, canonical_bytes, decode
from .routing.routes import SeenCache
from .trust import TrustClass

_LOGGER = logging.getLogger(__name__)

TRACE_SUFFIX = ".jsonl"


def dumps_record(record: dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class TraceWriter:
    """Serialise trace records and keep a running digest.

    With ``path`` None nothing is written but the digest is still kept.
    """

    def __init__(self, path: str | Path | None, clock: Callable[[], SimTime]) -> None:
        self.path = Path(path) if path is not None else None
        self.clock = clock
        self.records = 0
        self._digest = hashlib.sha256()
        self._fh: IO[str] | None = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self.path.open("w", encoding="utf-8", newline="\n")

    @property
    def enabled(self) -> bool:
        """True when records go to a file."""
        return self._fh is not None

    @property
    def digest(self) -> str:
        return self._digest.hexdigest()

    def emit(self, ev: str, **fields: Any) -> None:
        line = dumps_record({"ev": ev, "t": self.clock(), **fields}) + "\n"
        self._digest.update(line.encode())
        self.records += 1
        if self._fh is not None:
            self._fh.write(line)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> TraceWriter:
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


@dataclass(slots=True)
class TracedCounters(RunCounters):
    """Run counters that also log every HF store."""

    sink: TraceWriter | None = None

    def record_hf_store(self, node: int, seen: SeenCache, key: Hashable, now: SimTime) -> bool:
        stored = RunCounters.record_hf_store(self, node, seen, key, now)
        if stored and self.sink is not None:
            self.sink.emit("store", node=node)
        return stored


def read_trace(path: str | Path) -> list[dict[str, Any]]:
    """Load every record of a trace file.

    Raises:
        ParseError: On unreadable files or malformed lines
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err.strerror}") from err
    records = []
    for number, line in enumerate(lines, start=1):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as err:
            raise ParseError(f"malformed trace record: {err.msg}", line=number) from err
        if not isinstance(record, dict) or "ev" not in record:
            raise ParseError("trace record without 'ev'", line=number)
        records.append(record)
    if not records or records[0]["ev"] != "header":
        raise ParseError("trace does not start with a header", line=1)
    return records


def _of_kind(records: Iterable[dict[str, Any]], ev: str) -> Iterator[dict[str, Any]]:
    return (record for record in records if record["ev"] == ev)


def recompute_report(records: list[dict[str, Any]]) -> dict[str, Any]:
    """Rebuild the metrics report from the trace's primary records."""
    header = records[0]
    scenario = header["scenario"]
    counters = RunCounters()
    for record in records:
        ev = record["ev"]
        if ev == "tx":
            counters.record_tx(record["node"], record["kind"])
        elif ev == "store":
            counters.hf[record["node"]] += 1
        elif ev == "data":
            op = record["op"]
            if op == "orig":
                counters.record_originated()
            elif op == "deliver":
                counters.record_delivered(record["flow"], record["delay_us"])
            else:
                counters.record_drop(record["node"], record["reason"])
    report = finalize(
        counters, seconds(scenario["duration_s"]), scenario["traffic"]["packet_bytes"] * 8
    )
    # through JSON so float and key types match the stored report
    result: dict[str, Any] = json.loads(dumps_record(report.as_dict()))
    return result


def stored_report(records: list[dict[str, Any]]) -> dict[str, Any] | None:
    last = records[-1]
    if last["ev"] != "report":
        return None
    return {key: value for key, value in last.items() if key not in ("ev", "t")}


def scan_loops(records: list[dict[str, Any]]) -> list[dict[str, Any]]:
    """Next-hop cycles among honest nodes in any route snapshot."""
    attackers = set(records[0]["attackers"])
    found = []
    for snapshot in _of_kind(records, "routes"):
        by_dest: dict[int, nx.DiGraph] = defaultdict(nx.DiGraph)
        for node_key, table in snapshot["tables"].items():
            node = int(node_key)
            if node in attackers:
                continue
            for dest_key, next_hop in table.items():
                by_dest[int(dest_key)].add_edge(node, next_hop)
        for dest in sorted(by_dest):
            try:
                cycle = nx.find_cycle(by_dest[dest])
            except nx.NetworkXNoCycle:
                continue
            found.append({"t": snapshot["t"], "dest": dest, "cycle": [u for u, _v in cycle]})
    return found


def scan_signatures(records: list[dict[str, Any]]) -> list[dict[str, Any]]:
    """Signed packets sent by honest nodes whose chain does not verify."""
    header = records[0]
    if header["protocol"] != PROTOCOL_HSRP:
        return []
    hsrp = header["scenario"].get("hsrp", {})
    scheme = make_scheme(hsrp.get("signature_scheme", SCHEME_KEYED_DIGEST))
    directory, _keys = build_directory(header["seed"], header["scenario"]["nodes"], scheme)
    attackers = set(header["attackers"])
    found = []
    for record in _of_kind(records, "tx"):
        frame = record.get("frame")
        if frame is None or record["node"] in attackers:
            continue
        packet = decode(bytes.fromhex(frame))
        assert isinstance(packet, SignedControlPacket)
        message = canonical_bytes(packet.inner, len(packet.hop_list))
        if not multisig_verify(packet.chain, directory, message):
            found.append({"t": record["t"], "node": record["node"], "kind": record["kind"]})
    return found


def scan_gate(records: list[dict[str, Any]]) -> list[dict[str, Any]]:
    """Selections of a next hop the gate should have excluded."""
    return [
        record
        for record in _of_kind(records, "select")
        if record["class"] == TrustClass.BAD or record["fused"] < TRUST_NEUTRAL_MIN
    ]


def scan_flood_bound(records: list[dict[str, Any]]) -> list[dict[str, Any]]:
    """Windows where a node forwarded more RREQs of one originator than the guard allows.

    For forwarding times ``t_0 <= ... <= t_k`` the guard guarantees
    ``(j - i + 1) * 1e6 <= B * 1e6 + r * (t_j - t_i)`` for every ``i <= j``
    (times in microseconds), checked here in integers.
    """
    header = records[0]
    if header["protocol"] != PROTOCOL_HSRP:
        return []
    hsrp = header["scenario"]["hsrp"]
    capacity = hsrp["flood_bucket_capacity"] * 1_000_000
    rate = hsrp["flood_refill_per_s"]
    times: dict[tuple[int, int], list[SimTime]] = defaultdict(list)
    for record in _of_kind(records, "tx"):
        if record["kind"] == "rreq" and record.get("fwd"):
            times[(record["node"], record["origin"])].append(record["t"])
    found = []
    for (node, origin), series in sorted(times.items()):
        best = None
        for j, t_j in enumerate(series):
            term = rate * t_j - j * 1_000_000
            best = term if best is None else max(best, term)
            if (j + 1) * 1_000_000 - rate * t_j + best > capacity:
                found.append({"t": t_j, "node": node, "origin": origin})
                break
    return found


@dataclass(slots=True)
class TraceVerdict:
    """Outcome of :func:`verify_trace`."""

    report_matches: bool
    recomputed: dict[str, Any]
    findings: dict[str, list[dict[str, Any]]] = field(default_factory=dict)

    @property
    def violations(self) -> int:
        return sum(len(items) for items in self.findings.values())

    @property
    def ok(self) -> bool:
        return self.report_matches and self.violations == 0


def verify_trace(path: str | Path) -> TraceVerdict:
    """Re-derive the report and run every scanner over a trace file.

    Raises:
        ParseError: If the trace cannot be read
    """
    records = read_trace(path)
    recomputed = recompute_report(records)
    stored = stored_report(records)
    verdict = TraceVerdict(
        report_matches=stored == recomputed,
        recomputed=recomputed,
        findings={
            "loops": scan_loops(records),
            "signatures": scan_signatures(records),
            "gate": scan_gate(records),
            "flood_bound": scan_flood_bound(records),
        },
    )
    _LOGGER.info(
        "Verified %s: report %s, %d scanner findings",
        path,
        "matches" if verdict.report_matches else "DIFFERS",
        verdict.violations,
    )
    return verdict
