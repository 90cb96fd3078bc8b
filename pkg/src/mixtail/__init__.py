"""Asymptotically unbiased tail index and extreme quantile estimation for
heavy-tailed, serially dependent time series, with simulation models, a
Monte Carlo study harness and a return-level backtesting protocol."""

__version__ = "0.1.0"

from .asymptotics import VarianceComparison, av_dependent_optimal, covariance_r
from .backtest import (
    ArimaCoeffs,
    BacktestConfig,
    BacktestReport,
    KupiecResult,
    arima_residuals,
    block_bootstrap_ci,
    kupiec_test,
    return_level_transform,
    rolling_forecast,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    DomainError,
    InvalidEstimateError,
    MixtailError,
)
from .kernels import Kernel, ab_kernel, av_iid
from .mc_study import DEFAULT_K_GRID, ESTIMATORS, StudyConfig, StudyResult, run_study
from .tail_core import (
    QuantileEstimate,
    SecondOrderEstimate,
    TailIndexEstimate,
    TailSample,
    build_tail_sample,
    estimate_A,
    gamma_dhmz,
    gamma_kernel,
    gamma_optimal_unbiased,
    hill,
    moments,
    quantile_dhmz,
    quantile_unbiased,
    quantile_weissman,
    rho_estimate,
    select_k_rho,
)
from .tsgen import (
    InnovationLaw,
    ModelSpec,
    SeededStream,
    ar1_model,
    frechet_mixture_quantile,
    garch_model,
    generate,
    iid_model,
    ma1_model,
    sample_innovation,
    true_quantile_mc,
)
from ._backend import BACKEND

__all__ = [
    "__version__",
    "BACKEND",
    "ArimaCoeffs",
    "BacktestConfig",
    "BacktestReport",
    "BudgetExceededError",
    "ConfigError",
    "DEFAULT_K_GRID",
    "DomainError",
    "ESTIMATORS",
    "InnovationLaw",
    "InvalidEstimateError",
    "Kernel",
    "KupiecResult",
    "MixtailError",
    "ModelSpec",
    "QuantileEstimate",
    "SecondOrderEstimate",
    "SeededStream",
    "StudyConfig",
    "StudyResult",
    "TailIndexEstimate",
    "TailSample",
    "VarianceComparison",
    "ab_kernel",
    "ar1_model",
    "arima_residuals",
    "av_dependent_optimal",
    "av_iid",
    "block_bootstrap_ci",
    "build_tail_sample",
    "covariance_r",
    "estimate_A",
    "frechet_mixture_quantile",
    "gamma_dhmz",
    "gamma_kernel",
    "gamma_optimal_unbiased",
    "garch_model",
    "generate",
    "hill",
    "iid_model",
    "kupiec_test",
    "ma1_model",
    "moments",
    "quantile_dhmz",
    "quantile_unbiased",
    "quantile_weissman",
    "return_level_transform",
    "rho_estimate",
    "rolling_forecast",
    "run_study",
    "sample_innovation",
    "select_k_rho",
    "true_quantile_mc",
]
