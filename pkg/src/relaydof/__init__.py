"""Relay-aided multi-way exchange over fully-connected interference networks.

Per-slot linear simulation of relay schemes, their algebraic invariants,
Monte Carlo sum-DoF estimates and the cut-set LP bound.
"""

from .channel import ChannelSet, Slot, SlotPlan, Topology, draw_realization, propagate
from .converse import lemma1_sum_bound, lp_bound
from .dof import DofEstimate, RateReport, estimate_dof, round_sum_rate
from .errors import (BadBand, ConfigError, DegenerateDraw, EmptyNullSpace, HalfDuplexViolation,
                     RankDeficient, RelayDofError, Singular, SingularNoiseCov)
from .linalg import Tolerance
from .schemes import SCHEME_IDS, resolve

__version__ = "0.1.0"

__all__ = [
    "BadBand", "ChannelSet", "ConfigError", "DegenerateDraw", "DofEstimate",
    "EmptyNullSpace", "HalfDuplexViolation", "RankDeficient", "RateReport",
    "RelayDofError", "SCHEME_IDS", "Singular", "SingularNoiseCov", "Slot", "SlotPlan",
    "Tolerance", "Topology", "draw_realization", "estimate_dof", "lemma1_sum_bound",
    "lp_bound", "propagate", "resolve", "round_sum_rate",
]
