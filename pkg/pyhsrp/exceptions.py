"""Exceptions raised by pyhsrp.

Per-packet protocol failures are not exceptions; handlers return outcome
values for those. These classes cover API misuse and bad input.
"""

from __future__ import annotations


class PyHsrpError(Exception):
    """Base class for all pyhsrp errors."""


class SchedulingInPast(PyHsrpError):
    """An event was scheduled before the current clock."""

    def __init__(self, at: int, now: int) -> None:
        super().__init__(f"cannot schedule at t={at}us, clock is at t={now}us")
        self.at = at
        self.now = now


class EventAlreadyCancelled(PyHsrpError):
    """An event handle was cancelled twice."""


class DuplicateNode(PyHsrpError):
    """A node registered a key pair twice."""


class DuplicateSigner(PyHsrpError):
    """A signer tried to append to a chain it already signed."""


class SelfTrust(PyHsrpError):
    """A trust table was asked to rate its own owner."""


class SelfReport(PyHsrpError):
    """A report names the same node as reporter and subject."""


class ScoreOutOfRange(PyHsrpError):
    """A trust score is outside [0, 1]."""


class BadWeights(PyHsrpError):
    """Fusion weights are negative or do not sum to one."""


class RouteAlreadyValid(PyHsrpError):
    """Discovery was requested for a destination that already has a usable route."""


class ParseError(PyHsrpError):
    """A scenario file could not be parsed."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None) -> None:
        """Initialize parse error.

        Args:
            message: Error description
            line: 1-based line of the offending token, when known
            field: Dotted path of the offending key, when known
        """
        location = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.message = message
        self.line = line
        self.field = field
