"""Command line interface: ``run``, ``batch`` and ``verify-trace``.

Exit codes: 0 on success, 2 when a scenario does not parse or validate,
3 when a run fails or a trace does not verify.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from .batch import (
    BatchResult,
    build_grid,
    comparison_table,
    parse_seeds,
    run_batch,
    summarize,
    write_outputs,
)
from .const import (
    EXIT_OK,
    EXIT_RUN_FAILURE,
    EXIT_VALIDATION,
    PROTOCOLS,
    VERSION,
)
from .exceptions import ParseError, PyHsrpError
from .scenario import Scenario, discover_scenarios, expand_sweep, load_scenario
from .simulation import configure, run_one
from .trace import verify_trace
from .validators import ValidationError, enable_strict_mode

_LOGGER = logging.getLogger(__name__)

_ATTACK_CHOICES = {"on": (True,), "off": (False,), "both": (False, True)}


def _load_all(paths: Sequence[Path]) -> list[Scenario]:
    scenarios: list[Scenario] = []
    for path in paths:
        scenarios.extend(expand_sweep(load_scenario(path)))
    return scenarios


def _cmd_run(args: argparse.Namespace) -> int:
    base = load_scenario(args.scenario)
    attack = None if args.attack is None else args.attack == "on"
    out = Path(args.out)
    trace_dir = None if args.no_trace else out / "traces"
    rows = []
    for scenario in expand_sweep(base):
        configured = configure(scenario, seed=args.seed, protocol=args.protocol, attack=attack)
        result = run_one(configured, trace_dir=trace_dir)
        rows.append(result.row)
        print(
            f"{configured.name} {configured.protocol} attack={configured.attack.label} "
            f"seed={configured.seed}: pdr={result.report.pdr:.4f} "
            f"delivered={result.report.data_delivered}/{result.report.data_originated} "
            f"trace={result.trace_digest[:16]}"
        )
    write_outputs(BatchResult(rows=rows, summary=summarize(rows)), out)
    return EXIT_OK


def _cmd_batch(args: argparse.Namespace) -> int:
    paths = discover_scenarios(args.scenarios)
    if not paths:
        raise ParseError(f"no scenario files found in {args.scenarios}")
    scenarios = _load_all(paths)
    try:
        seeds = parse_seeds(args.seeds)
    except ValueError as err:
        raise ValidationError(str(err), "seeds") from err
    out = Path(args.out)
    specs = build_grid(
        scenarios,
        seeds=seeds if isinstance(seeds, list) else None,
        seed_count=seeds if isinstance(seeds, int) else None,
        protocols=tuple(args.protocol or PROTOCOLS),
        attacks=_ATTACK_CHOICES[args.attack] if args.attack else (None,),
        trace_dir=out / "traces" if args.traces else None,
    )
    result = asyncio.run(run_batch(specs, jobs=args.jobs))
    written = write_outputs(result, out)
    print(comparison_table(result.summary))
    for name, path in sorted(written.items()):
        _LOGGER.info("Wrote %s to %s", name, path)
    if result.failures:
        _LOGGER.warning(
            "%d of %d runs failed, see %s", len(result.failures), len(specs), written["failures"]
        )
        return EXIT_RUN_FAILURE
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    verdict = verify_trace(args.trace)
    print(
        json.dumps(
            {
                "report_matches": verdict.report_matches,
                "findings": {name: len(items) for name, items in verdict.findings.items()},
            },
            sort_keys=True,
        )
    )
    if args.verbose:
        for name, items in sorted(verdict.findings.items()):
            for item in items:
                print(f"{name}: {json.dumps(item, sort_keys=True)}")
    if not verdict.report_matches:
        return EXIT_RUN_FAILURE
    if args.strict and verdict.violations:
        return EXIT_RUN_FAILURE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pyhsrp",
        description="Deterministic MANET simulator: AODV versus hybrid secure routing",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level",
    )
    parser.add_argument(
        "--strict-scenarios",
        action="store_true",
        help="Warn about legal but suspicious scenarios",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser(
        "run",
        help="Run one scenario (every sweep point) once",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    run.add_argument("--scenario", required=True, help="Scenario file (.scn)")
    run.add_argument("--seed", type=int, default=None, help="Master seed (default: scenario's)")
    run.add_argument("--protocol", choices=PROTOCOLS, default=None, help="Override protocol")
    run.add_argument("--attack", choices=("on", "off"), default=None, help="Override attack toggle")
    run.add_argument("--out", required=True, help="Output directory")
    run.add_argument("--no-trace", action="store_true", help="Skip writing the trace log")
    run.set_defaults(handler=_cmd_run)

    batch = sub.add_parser(
        "batch",
        help="Run the scenario x protocol x attack x seed grid",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    batch.add_argument("--scenarios", required=True, help="Scenario directory or file")
    batch.add_argument("--seeds", default="1", help="Seed count n, or a comma separated list")
    batch.add_argument("--jobs", type=int, default=1, help="Worker processes")
    batch.add_argument(
        "--protocol",
        action="append",
        choices=PROTOCOLS,
        help="Protocol to run (repeatable, default: all)",
    )
    batch.add_argument(
        "--attack",
        choices=tuple(_ATTACK_CHOICES),
        default=None,
        help="Attack toggle (default: each scenario's own setting)",
    )
    batch.add_argument("--out", required=True, help="Output directory")
    batch.add_argument("--traces", action="store_true", help="Write a trace log per run")
    batch.set_defaults(handler=_cmd_batch)

    verify = sub.add_parser(
        "verify-trace",
        help="Re-derive the report of a trace and scan it",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    verify.add_argument("trace", help="Trace file (.jsonl)")
    verify.add_argument(
        "--strict", action="store_true", help="Fail on scanner findings, not only report mismatch"
    )
    verify.add_argument("-v", "--verbose", action="store_true", help="Print every finding")
    verify.set_defaults(handler=_cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point for the ``pyhsrp`` command."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    if args.strict_scenarios:
        enable_strict_mode()

    try:
        code: int = args.handler(args)
    except (ValidationError, ParseError) as err:
        field = getattr(err, "field", None)
        suffix = f" (field: {field})" if field else ""
        print(f"error: {err}{suffix}", file=sys.stderr)
        return EXIT_VALIDATION
    except (PyHsrpError, OSError) as err:
        _LOGGER.error("Run failed: %s", err)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUN_FAILURE
    return code


if __name__ == "__main__":
    sys.exit(main())
