"""Routing state machines: baseline AODV and the hybrid secure protocol."""

from .aodv import AodvConfig, AodvNode
from .hsrp import HsrpConfig, HsrpNode, NoTrustedRoute, Plausibility, blackhole_check, trust_gate
from .outcomes import DropReason

__all__ = [
    "AodvConfig",
    "AodvNode",
    "DropReason",
    "HsrpConfig",
    "HsrpNode",
    "NoTrustedRoute",
    "Plausibility",
    "blackhole_check",
    "trust_gate",
]
