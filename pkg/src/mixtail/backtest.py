"""Rolling out-of-sample backtest of extreme return levels, violation
counting with an exact unconditional-coverage test, and a circular
moving-block bootstrap for confidence bands.

A forecast at time t is the extrapolated 1-p quantile fitted on the
preceding window; a violation is a realized value strictly above the
forecast (ties do not count).  Windows whose estimator fails yield a
missing forecast, which is excluded from the violation denominator and
reported separately.

For differenced series an ARIMA(1,1,1) pre-whitening step is provided:
residuals follow e_t = x_t - x_{t-1} - phi1 x_{t-1} + phi1 x_{t-2}
+ theta1 e_{t-1} with e and the pre-sample terms started at zero, and the
fitted return level on the residual scale maps back to the observation
scale through the same affine recursion.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.signal import lfilter
from scipy.special import xlogy
from scipy.stats import chi2

from ._fmt import fg17
from .errors import DomainError, InvalidEstimateError
from .tail_core import (
    build_tail_sample,
    quantile_dhmz,
    quantile_unbiased,
    quantile_weissman,
    select_k_rho,
)
from .tsgen import SeededStream

_METHODS = ("unbiased", "weissman", "dhmz")
_XI_POLICIES = ("rho_hat", "canonical")


class KupiecResult(NamedTuple):
    lr: float
    pvalue: float


def kupiec_test(n_forecasts: int, n_violations: int, p: float) -> KupiecResult:
    """Likelihood-ratio test of the violation frequency against p.

    LR = -2 log L(p) + 2 log L(x/n) with the 0 * log 0 = 0 convention;
    the p-value is the chi-square(1) upper tail at LR.
    """
    n, x = int(n_forecasts), int(n_violations)
    if n < 1:
        raise DomainError(f"need at least one forecast, got {n}")
    if not 0 <= x <= n:
        raise DomainError(f"need 0 <= violations <= {n}, got {x}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"need 0 < p < 1, got {p}")
    null_ll = xlogy(n - x, 1.0 - p) + xlogy(x, p)
    alt_ll = xlogy(n - x, 1.0 - x / n) + xlogy(x, x / n)
    lr = max(0.0, -2.0 * null_ll + 2.0 * alt_ll)
    return KupiecResult(float(lr), float(chi2.sf(lr, 1)))


@dataclass(frozen=True)
class ArimaCoeffs:
    phi1: float
    theta1: float


def arima_residuals(series, coeffs: ArimaCoeffs) -> np.ndarray:
    """Residuals of a once-differenced AR(1)+MA(1) filter, length n-2.

    e_t = (x_t - x_{t-1}) - phi1 (x_{t-1} - x_{t-2}) + theta1 e_{t-1},
    starting from e = 0.
    """
    x = np.asarray(series, dtype=np.float64).ravel()
    if x.size < 3:
        raise DomainError(f"need at least 3 observations, got {x.size}")
    if not np.isfinite(x).all():
        raise DomainError("series contains non-finite values")
    rhs = x[2:] - (1.0 + coeffs.phi1) * x[1:-1] + coeffs.phi1 * x[:-2]
    e = lfilter([1.0], [1.0, -coeffs.theta1], rhs)
    return e


def return_level_transform(r_e: float, e_prev: float, x_prev: float,
                           x_prev2: float, coeffs: ArimaCoeffs) -> float:
    """Map a return level on the residual scale back to the observation
    scale, inverting the residual recursion one step ahead."""
    return (x_prev + coeffs.phi1 * (x_prev - x_prev2)
            + r_e - coeffs.theta1 * e_prev)


@dataclass(frozen=True)
class BacktestConfig:
    window: int
    horizon_points: int
    p: float
    k: int
    method: str = "unbiased"
    xi_policy: str = "rho_hat"
    canonical_xi: float = -1.0

    def __post_init__(self):
        if self.window < 3:
            raise DomainError(f"need window >= 3, got {self.window}")
        if self.horizon_points < 1:
            raise DomainError(
                f"need horizon_points >= 1, got {self.horizon_points}"
            )
        if not 1 <= self.k <= self.window - 1:
            raise DomainError(
                f"need 1 <= k <= window-1 = {self.window - 1}, got {self.k}"
            )
        if not 0.0 < self.p <= self.k / self.window:
            raise DomainError(
                f"need 0 < p <= k/window = {self.k / self.window}, "
                f"got {self.p}"
            )
        if self.method not in _METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if self.xi_policy not in _XI_POLICIES:
            raise DomainError(f"unknown xi policy {self.xi_policy!r}")
        if not self.canonical_xi < 0.0:
            raise DomainError(
                f"canonical xi must be negative, got {self.canonical_xi}"
            )


def _forecast_window(window: np.ndarray, config: BacktestConfig) -> float:
    sample = build_tail_sample(window, config.k)
    if config.method == "weissman":
        return quantile_weissman(sample, config.p).x_hat
    if config.xi_policy == "rho_hat":
        second_order = select_k_rho(window)
        xi = second_order.rho_hat if second_order.valid else config.canonical_xi
    else:
        xi = config.canonical_xi
    if config.method == "unbiased":
        return quantile_unbiased(sample, config.p, xi).x_hat
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return quantile_dhmz(sample, config.p, xi).x_hat


@dataclass(frozen=True)
class BacktestReport:
    config: BacktestConfig
    start_index: int
    forecasts: np.ndarray  # NaN where the estimator failed
    realized: np.ndarray
    violations: np.ndarray  # bool; False at missing forecasts
    n_forecasts: int  # non-missing count
    n_missing: int
    n_violations: int
    expected_violations: float
    kupiec_lr: float
    kupiec_pvalue: float

    def rows(self):
        for t in range(self.forecasts.size):
            yield {
                "time": self.start_index + t,
                "forecast": float(self.forecasts[t]),
                "realized": float(self.realized[t]),
                "violation": bool(self.violations[t]),
            }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "forecast", "realized", "violation"])
            for row in self.rows():
                writer.writerow([
                    row["time"], fg17(row["forecast"]),
                    fg17(row["realized"]), int(row["violation"]),
                ])

    def violation_indices(self) -> list[int]:
        return [int(self.start_index + t)
                for t in np.flatnonzero(self.violations)]

    def to_json_obj(self) -> dict:
        def clean(v: float):
            return None if math.isnan(v) else v

        return {
            "window": self.config.window,
            "horizon_points": self.config.horizon_points,
            "p": self.config.p,
            "k": self.config.k,
            "method": self.config.method,
            "n_forecasts": self.n_forecasts,
            "n_missing": self.n_missing,
            "n_violations": self.n_violations,
            "violations": self.violation_indices(),
            "expected_violations": self.expected_violations,
            "kupiec_lr": clean(self.kupiec_lr),
            "kupiec_pvalue": clean(self.kupiec_pvalue),
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_obj(), fh, indent=2)
            fh.write("\n")


def rolling_forecast(series, config: BacktestConfig,
                     forecaster: Callable[[np.ndarray], float] | None = None,
                     ) -> BacktestReport:
    """Forecast the last horizon_points observations one step at a time
    from the preceding window and count strict violations.

    ``forecaster`` overrides the built-in estimator dispatch (it receives
    the window array and returns a level); exceptions from the domain or
    flagged-estimate families mark the forecast missing.
    """
    x = np.asarray(series, dtype=np.float64).ravel()
    need = config.window + config.horizon_points
    if x.size < need:
        raise DomainError(
            f"need at least window + horizon = {need} observations, "
            f"got {x.size}"
        )
    if not np.isfinite(x).all():
        raise DomainError("series contains non-finite values")
    fc = forecaster if forecaster is not None else (
        lambda w: _forecast_window(w, config)
    )
    horizon = config.horizon_points
    start = x.size - horizon
    forecasts = np.full(horizon, np.nan)
    for t in range(horizon):
        window = x[start + t - config.window: start + t]
        try:
            forecasts[t] = fc(window)
        except (DomainError, InvalidEstimateError):
            pass
    realized = x[start:]
    with np.errstate(invalid="ignore"):
        violations = realized > forecasts  # NaN forecast compares False
    n_missing = int(np.isnan(forecasts).sum())
    n_eff = horizon - n_missing
    n_viol = int(violations.sum())
    if n_eff >= 1:
        lr, pvalue = kupiec_test(n_eff, n_viol, config.p)
    else:
        lr, pvalue = math.nan, math.nan
    return BacktestReport(
        config=config,
        start_index=start,
        forecasts=forecasts,
        realized=realized,
        violations=violations,
        n_forecasts=n_eff,
        n_missing=n_missing,
        n_violations=n_viol,
        expected_violations=horizon * config.p,
        kupiec_lr=lr,
        kupiec_pvalue=pvalue,
    )


def block_bootstrap_ci(series, statistic: Callable[[np.ndarray], float],
                       stream: SeededStream, n_boot: int = 99,
                       block_length: int = 200, level: float = 0.95,
                       max_retries: int = 10) -> tuple[float, float]:
    """Percentile interval for a statistic under a circular moving-block
    bootstrap.

    Each resample concatenates ceil(n / L) blocks of length L started
    uniformly at random (wrapping around), trimmed to n.  A resample on
    which the statistic fails (domain error, flagged estimate, non-finite
    value) is redrawn up to max_retries times, then dropped with a warning.
    The interval is the (ceil((B+1) a/2))-th to (floor((B+1)(1-a/2)))-th
    order statistic of the B surviving values, a = 1 - level.
    """
    x = np.asarray(series, dtype=np.float64).ravel()
    n = x.size
    if n < 2:
        raise DomainError(f"need at least 2 observations, got {n}")
    if not 1 <= block_length <= n:
        raise DomainError(
            f"need 1 <= block_length <= {n}, got {block_length}"
        )
    if n_boot < 2:
        raise DomainError(f"need n_boot >= 2, got {n_boot}")
    if not 0.0 < level < 1.0:
        raise DomainError(f"need 0 < level < 1, got {level}")
    rng = stream.generator()
    n_blocks = -(-n // block_length)  # ceil
    offsets = np.arange(block_length)
    values = []
    n_dropped = 0
    for _ in range(n_boot):
        value = None
        for _attempt in range(max_retries + 1):
            starts = rng.integers(0, n, size=n_blocks)
            idx = ((starts[:, None] + offsets[None, :]) % n).ravel()[:n]
            try:
                v = float(statistic(x[idx]))
            except (DomainError, InvalidEstimateError):
                continue
            if math.isfinite(v):
                value = v
                break
        if value is None:
            n_dropped += 1
        else:
            values.append(value)
    if n_dropped:
        warnings.warn(
            f"{n_dropped} bootstrap resamples dropped after retries",
            RuntimeWarning, stacklevel=2,
        )
    if not values:
        raise DomainError("statistic failed on every bootstrap resample")
    values.sort()
    b = len(values)
    alpha = 1.0 - level
    lo_rank = max(1, min(b, math.ceil((b + 1) * alpha / 2.0)))
    hi_rank = max(1, min(b, math.floor((b + 1) * (1.0 - alpha / 2.0))))
    return values[lo_rank - 1], values[hi_rank - 1]
