"""Hawkes flocking model for paired tick-level price processes.

Exact simulation, maximum-likelihood calibration, branching-ratio systemic
risk metrics, tick-data ingestion, and a copula CoVaR benchmark pipeline.
"""

from .core import (
    EventStream,
    FlockParams,
    IntensityPath,
    IntensityState,
    Mark,
    PricePath,
    decay,
    intensity_path,
    jump,
)
from .covar import CoVaRPair, CoVaRSeries, covar_pair, rolling_covar, simple_returns
from .copulas import (
    CopulaFit,
    CopulaSpec,
    cdf,
    fit_copula,
    h_function,
    h_inverse,
    select_copula,
)
from .estimate import FitResult, daily_calibrate, fit, loglik
from .ingest import AdjustConfig, RawTickSeries, adjust_levels, ingest_pair
from .marginals import EmpiricalMarginal, fit_marginal, fit_tgarch, pit
from .risk import (
    RiskSummary,
    branching_matrix,
    empirical_p,
    quarter_ratios,
    risk_summary,
    spectral_radius,
)
from .sim import SimConfig, price_path, simulate, simulate_batch

__version__ = "0.1.0"

__all__ = [
    "EventStream", "FlockParams", "IntensityPath", "IntensityState", "Mark",
    "PricePath", "decay", "intensity_path", "jump",
    "SimConfig", "simulate", "simulate_batch", "price_path",
    "FitResult", "fit", "loglik", "daily_calibrate",
    "AdjustConfig", "RawTickSeries", "adjust_levels", "ingest_pair",
    "RiskSummary", "branching_matrix", "spectral_radius", "quarter_ratios",
    "empirical_p", "risk_summary",
    "CopulaSpec", "CopulaFit", "cdf", "h_function", "h_inverse",
    "fit_copula", "select_copula",
    "EmpiricalMarginal", "fit_marginal", "fit_tgarch", "pit",
    "CoVaRPair", "CoVaRSeries", "covar_pair", "rolling_covar", "simple_returns",
    "__version__",
]
