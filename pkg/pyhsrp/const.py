"""Constants for the pyhsrp simulator.

Every tunable here has a matching scenario key; scenario files override these
defaults section by section (see docs/scenarios.md).
"""

from __future__ import annotations

from typing import Final

VERSION: Final = "0.3.0"

# Time base: all simulated time is integer microseconds
MICROS_PER_SECOND: Final = 1_000_000

# Node ids at or above this value never exist in a scenario
NONEXISTENT_NODE: Final = 0xFFFF_FFFF

PROTOCOL_AODV: Final = "aodv"
PROTOCOL_HSRP: Final = "hsrp"
PROTOCOLS: Final = (PROTOCOL_AODV, PROTOCOL_HSRP)

# Mobility / area
DEFAULT_AREA_WIDTH: Final = 1000.0
DEFAULT_AREA_HEIGHT: Final = 1000.0
DEFAULT_SPEED_MIN: Final = 0.0
DEFAULT_SPEED_MAX: Final = 10.0
DEFAULT_PAUSE_TIME_S: Final = 0.0
DEFAULT_MOBILITY_STEP_S: Final = 0.5

# Channel
DEFAULT_RANGE_M: Final = 250.0
DEFAULT_LOSS_PROBABILITY: Final = 0.0
DEFAULT_PER_HOP_DELAY_US: Final = 2_000
DEFAULT_JITTER_US: Final = 1_000

# Traffic
DEFAULT_PACKET_BYTES: Final = 512
DEFAULT_DATA_RATE_PPS: Final = 2.5  # packets per second per flow
DEFAULT_FLOW_COUNT: Final = 10
DEFAULT_TRAFFIC_START_S: Final = 2.0
DEFAULT_DURATION_S: Final = 60.0
DEFAULT_MASTER_SEED: Final = 1
DEFAULT_DRAIN_S: Final = 1.0
DATA_TTL: Final = 35

# AODV (RFC 3561 style defaults)
ACTIVE_ROUTE_LIFETIME_US: Final = 10 * MICROS_PER_SECOND
RREQ_RETRIES: Final = 2
RREQ_WAIT_US: Final = 1 * MICROS_PER_SECOND
NET_DIAMETER_TTL: Final = 35
HELLO_INTERVAL_US: Final = 1 * MICROS_PER_SECOND
ALLOWED_HELLO_LOSS: Final = 3
BUFFER_CAPACITY: Final = 64
SEEN_CACHE_CAPACITY: Final = 4096
SEEN_CACHE_RETENTION_US: Final = 30 * MICROS_PER_SECOND

# HSRP
MAX_PATHS: Final = 3
MAINTENANCE_INTERVAL_US: Final = 2 * MICROS_PER_SECOND
MAX_SEQ_JUMP: Final = 50
WATCHDOG_DEADLINE_US: Final = 500_000
FLOOD_BUCKET_CAPACITY: Final = 10
FLOOD_REFILL_PER_S: Final = 10
MAX_REPORTS_PER_HELLO: Final = 8
ENCRYPT_PAYLOADS: Final = True
SCHEME_KEYED_DIGEST: Final = "keyed-digest"
SCHEME_ED25519: Final = "ed25519"
SIGNATURE_SCHEMES: Final = (SCHEME_KEYED_DIGEST, SCHEME_ED25519)

# Trust
TRUST_WINDOW: Final = 20
WEIGHT_ENGAGEMENT: Final = 0.5
WEIGHT_REPUTATION: Final = 0.3
WEIGHT_RECOMMENDATION: Final = 0.2
TRUST_NEUTRAL_MIN: Final = 0.5
TRUST_GOOD_MIN: Final = 0.8
BYPASS_THRESHOLD: Final = 5
BYPASS_WINDOW_US: Final = 10 * MICROS_PER_SECOND
TRUST_SNAPSHOT_INTERVAL_US: Final = 10 * MICROS_PER_SECOND

# Adversary
DEFAULT_ATTACKER_COUNT: Final = 5
BLACKHOLE_SEQ_INFLATION: Final = 10_000
DEFAULT_FLOODER_RATE: Final = 20.0
DEFAULT_SINKHOLE_DROP: Final = 0.5
FLOODER_TICK_US: Final = 1 * MICROS_PER_SECOND

ATTACK_BLACKHOLE: Final = "blackhole"
ATTACK_FLOODER: Final = "flooder"
ATTACK_SINKHOLE: Final = "sinkhole"
ATTACK_JAMMER: Final = "jammer"
ATTACK_KINDS: Final = (ATTACK_BLACKHOLE, ATTACK_FLOODER, ATTACK_SINKHOLE, ATTACK_JAMMER)

# Crypto
TEA_DELTA: Final = 0x9E3779B9
TEA_CYCLES: Final = 32
MASK32: Final = 0xFFFF_FFFF

# CLI exit codes
EXIT_OK: Final = 0
EXIT_VALIDATION: Final = 2
EXIT_RUN_FAILURE: Final = 3

# Metrics CSV schema (exact column order)
CSV_COLUMNS: Final = (
    "scenario",
    "protocol",
    "attack",
    "seed",
    "nodes",
    "area_w",
    "area_h",
    "max_speed",
    "duration_s",
    "pdr",
    "throughput_bps",
    "avg_delay_s",
    "jitter_s",
    "overhead_ratio",
    "hf",
    "md",
    "rreq",
    "rrep",
    "rerr",
    "proactive",
    "hello",
)

# Scenario files
ACCEPTED_SCENARIO_SUFFIXES: Final = (".scn", ".json")
