"""Monte Carlo outage analysis of relay-assisted links in Poisson networks."""

__version__ = "0.1.0"

from .analytic import DtParams, constant_C, dt_outage_closed_form
from .config import ConfigError, SimulationConfig
from .engine import OutageEstimate, estimate_op, optimize_nc, run_trial, sweep, wilson_interval
from .protocols import PROTOCOLS, ProtocolConfig, ThresholdConfig, evaluate_batch

__all__ = [
    "ConfigError",
    "DtParams",
    "OutageEstimate",
    "PROTOCOLS",
    "ProtocolConfig",
    "SimulationConfig",
    "ThresholdConfig",
    "constant_C",
    "dt_outage_closed_form",
    "estimate_op",
    "evaluate_batch",
    "optimize_nc",
    "run_trial",
    "sweep",
    "wilson_interval",
]
