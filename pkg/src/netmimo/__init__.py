"""Analysis and simulation of clustered ZF network MIMO downlinks."""
from .analytic import AnalyticParams, QuadratureSpec, RateResult, per_bs_ergodic_sum_rate
from .config import SystemConfig, load_config
from .montecarlo import SimPlan, SimResult

__all__ = [
    "AnalyticParams", "QuadratureSpec", "RateResult", "SimPlan", "SimResult",
    "SystemConfig", "load_config", "per_bs_ergodic_sum_rate",
]
__version__ = "0.1.0"
