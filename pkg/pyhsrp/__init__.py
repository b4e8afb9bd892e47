"""Deterministic MANET simulator comparing AODV with a hybrid secure routing protocol."""

from .const import VERSION
from .exceptions import ParseError, PyHsrpError
from .metrics import MetricsReport, RunCounters, finalize
from .scenario import Scenario, dump_scenario, expand_sweep, load_scenario, scenario_to_dict
from .simulation import RunResult, Simulation, run_one
from .trace import TraceVerdict, verify_trace
from .validators import ValidationError, enable_strict_mode, is_strict_mode

__version__ = VERSION

__all__ = [
    "MetricsReport",
    "ParseError",
    "PyHsrpError",
    "RunCounters",
    "RunResult",
    "Scenario",
    "Simulation",
    "TraceVerdict",
    "ValidationError",
    "__version__",
    "dump_scenario",
    "enable_strict_mode",
    "expand_sweep",
    "finalize",
    "is_strict_mode",
    "load_scenario",
    "run_one",
    "scenario_to_dict",
    "verify_trace",
]
