"""Simulator and analysis toolkit for a ranked labor-market matching model.

Deterministic mean-field iteration, a stochastic agent-level simulator
with a compiled matching kernel, weak-coupling expansions of the steady
state, and the analytic unemployment formula built on the expansion.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .core import (MarketConfig, assert_distribution, energy, gibbs_weights,
                   local_mismatch, make_config, ranking)
from .hightemp import (acceptance_profile, analytic_unemployment,
                       elementary_symmetric, expansion_order0,
                       expansion_order1, expansion_order2)
from .meanfield import (critical_gamma_scan, frozen_line, iterate, map_step,
                        reversal_condition)
from .microsim import run_market, year_rng

__all__ = [
    "__version__",
    "BACKEND",
    "MarketConfig",
    "make_config",
    "ranking",
    "energy",
    "gibbs_weights",
    "local_mismatch",
    "assert_distribution",
    "map_step",
    "iterate",
    "critical_gamma_scan",
    "frozen_line",
    "reversal_condition",
    "expansion_order0",
    "expansion_order1",
    "expansion_order2",
    "acceptance_profile",
    "elementary_symmetric",
    "analytic_unemployment",
    "run_market",
    "year_rng",
]
