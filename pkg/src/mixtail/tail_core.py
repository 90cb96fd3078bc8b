"""Tail index and extreme quantile estimation from the largest order
statistics of a heavy-tailed sample.

The central objects are the top-k log-spacings

    top_log[i-1] = log X_{n-i+1,n} - log X_{n-k,n},   i = 1..k,

stored descending in a :class:`TailSample`.  Plain averaging gives the Hill
estimator; kernel weighting (see :mod:`mixtail.kernels`) gives the family of
weighted estimators, including a mixture kernel whose first-order bias term
cancels exactly at a given second-order parameter rho while minimizing the
asymptotic variance among such unbiased combinations.

Estimates of gamma that come out non-positive are flagged, never clamped;
quantile extrapolation refuses flagged inputs with
:class:`~mixtail.errors.InvalidEstimateError`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidEstimateError
from .kernels import Kernel

NONPOSITIVE_GAMMA = "nonpositive_gamma"
NONPOSITIVE_CORRECTION = "nonpositive_correction"
CANONICAL_XI_FALLBACK = "canonical_xi_fallback"


@dataclass(frozen=True)
class TailSample:
    """Sorted tail view of a series: the k largest log-spacings above the
    (k+1)-th largest observation."""

    n: int
    k: int
    top_log: np.ndarray
    threshold: float
    m_positive: int


@dataclass(frozen=True)
class TailIndexEstimate:
    gamma_hat: float
    method: str
    k: int
    kernel: Kernel | None = None
    rho_used: float | None = None
    flags: tuple[str, ...] = ()

    @property
    def usable(self) -> bool:
        """True when the estimate can feed quantile extrapolation."""
        return math.isfinite(self.gamma_hat) and self.gamma_hat > 0.0


@dataclass(frozen=True)
class SecondOrderEstimate:
    """Second-order parameter estimate; ``valid`` is False when the moment
    statistic fell outside its admissible open interval (2/3, 3/4)."""

    rho_hat: float | None
    k_rho: int
    s_value: float
    valid: bool


@dataclass(frozen=True)
class QuantileEstimate:
    x_hat: float
    p: float
    k: int
    method: str
    correction_factor: float = 1.0
    ci: tuple[float, float] | None = None
    flags: tuple[str, ...] = ()


def build_tail_sample(series, k: int) -> TailSample:
    """Sort the series and extract the top-k log-spacings.

    The threshold X_{n-k,n} must be strictly positive (logs are taken of
    ratios against it); non-finite input is rejected outright.
    """
    arr = np.asarray(series, dtype=np.float64).ravel()
    n = arr.size
    if n < 3:
        raise DomainError(f"need at least 3 observations, got {n}")
    if not np.isfinite(arr).all():
        raise DomainError("series contains non-finite values")
    k = int(k)
    if not 1 <= k <= n - 1:
        raise DomainError(f"need 1 <= k <= n-1 = {n - 1}, got k={k}")
    xs = np.sort(arr)
    threshold = float(xs[n - k - 1])
    if threshold <= 0.0:
        raise DomainError(
            f"threshold X_(n-k) = {threshold} is not positive; k too large "
            f"for the positive part of the sample"
        )
    top_desc = xs[n - k:][::-1]
    top_log = np.log(top_desc) - math.log(threshold)
    return TailSample(
        n=n,
        k=k,
        top_log=top_log,
        threshold=threshold,
        m_positive=int((arr > 0.0).sum()),
    )


def moments(sample: TailSample, alpha: int) -> float:
    """Empirical moment of order alpha of the top log-spacings,
    M_k^(alpha) = mean(top_log ** alpha).  Orders 1 through 4 are supported.
    """
    if alpha not in (1, 2, 3, 4):
        raise DomainError(f"moment order must be in 1..4, got {alpha}")
    return float(np.mean(sample.top_log ** alpha))


def hill(sample: TailSample) -> TailIndexEstimate:
    """Average of the top log-spacings (uniform-kernel special case)."""
    g = float(np.mean(sample.top_log))
    flags = () if g > 0.0 else (NONPOSITIVE_GAMMA,)
    return TailIndexEstimate(g, "hill", sample.k, flags=flags)


def gamma_kernel(sample: TailSample, kernel: Kernel) -> TailIndexEstimate:
    """Kernel-weighted log-spacing estimator: the exact discretization of
    integrating the empirical tail quantile process against d(t K(t))."""
    w = kernel.weights(sample.k)
    g = float(np.dot(w, sample.top_log))
    flags = () if g > 0.0 else (NONPOSITIVE_GAMMA,)
    return TailIndexEstimate(g, "kernel", sample.k, kernel=kernel,
                             flags=flags)


def _s_statistic(top_log: np.ndarray) -> float:
    """Moment ratio driving the second-order parameter estimate."""
    m1 = float(np.mean(top_log))
    m2 = float(np.mean(top_log ** 2))
    m3 = float(np.mean(top_log ** 3))
    m4 = float(np.mean(top_log ** 4))
    den = m3 - 6.0 * m1 ** 3
    if den == 0.0:
        return math.nan
    return 0.75 * (m4 - 24.0 * m1 ** 4) * (m2 - 2.0 * m1 ** 2) / den ** 2


def _rho_from_s(s: float) -> float:
    """Map an admissible S in (2/3, 3/4) to rho < 0."""
    return (-4.0 + 6.0 * s + math.sqrt(3.0 * s - 2.0)) / (4.0 * s - 3.0)


def rho_estimate(sample: TailSample) -> SecondOrderEstimate:
    """Second-order parameter estimate from the first four moments of the
    top log-spacings.

    Valid only when the S statistic falls strictly inside (2/3, 3/4); the
    returned rho_hat is then strictly negative.  Outside that window the
    estimate is marked invalid and rho_hat is None.
    """
    s = _s_statistic(sample.top_log)
    if math.isfinite(s) and 2.0 / 3.0 < s < 0.75:
        return SecondOrderEstimate(_rho_from_s(s), sample.k, s, True)
    return SecondOrderEstimate(None, sample.k, s, False)


def rho_scan_cap(m_positive: int) -> int:
    """Largest k admitted by the scan rule: min(m-1, 2m/loglog(m)) for m
    strictly positive observations."""
    if m_positive < 3:
        raise DomainError(
            f"need at least 3 positive observations, got {m_positive}"
        )
    growth = 2.0 * m_positive / math.log(math.log(m_positive))
    return min(m_positive - 1, int(growth))


_SENTINEL = SecondOrderEstimate(None, 0, math.nan, False)

# below this many strictly positive observations the scan is not attempted
MIN_POSITIVE_FOR_RHO = 16

# the S statistic degenerates to the constant 69/100 at k = 1, so the scan
# never descends into single-digit k where validity is vacuous
MIN_K_FOR_RHO = 4


def select_k_rho(series, k_min: int = MIN_K_FOR_RHO) -> SecondOrderEstimate:
    """Scan k downward from the admissibility cap and return the estimate at
    the largest k where :func:`rho_estimate` is valid.

    Returns the invalid sentinel (valid=False, k_rho=0) when no k in
    [k_min, cap] is valid or when fewer than ``MIN_POSITIVE_FOR_RHO``
    observations are strictly positive.  Raises only when the series has
    fewer than 3 positive points.
    """
    arr = np.asarray(series, dtype=np.float64).ravel()
    if not np.isfinite(arr).all():
        raise DomainError("series contains non-finite values")
    m = int((arr > 0.0).sum())
    if m < 3:
        raise DomainError(f"need at least 3 positive observations, got {m}")
    if m < MIN_POSITIVE_FOR_RHO:
        return _SENTINEL
    cap = rho_scan_cap(m)
    xs_desc = np.sort(arr)[::-1]
    ls = np.log(xs_desc[:cap + 1])
    for k in range(cap, k_min - 1, -1):
        s = _s_statistic(ls[:k] - ls[k])
        if math.isfinite(s) and 2.0 / 3.0 < s < 0.75:
            return SecondOrderEstimate(_rho_from_s(s), k, s, True)
    return _SENTINEL


def gamma_optimal_unbiased(sample: TailSample, rho: float) -> TailIndexEstimate:
    """Tail index from the variance-minimizing bias-cancelling kernel
    mixture at second-order parameter rho.

    Identical (up to rounding) to delta * hill + (1 - delta) * second-order
    kernel estimate with delta = ((1-rho)/rho)^2.
    """
    if not rho < 0:
        raise DomainError(f"need rho < 0, got {rho}")
    est = gamma_kernel(sample, Kernel.optimal_mixture(rho))
    return TailIndexEstimate(est.gamma_hat, "optimal_unbiased", sample.k,
                             kernel=est.kernel, rho_used=float(rho),
                             flags=est.flags)


def gamma_dhmz(sample: TailSample, rho: float) -> TailIndexEstimate:
    """Moment-corrected Hill estimator: Hill minus its estimated
    second-order bias, using the second moment of the log-spacings."""
    if not rho < 0:
        raise DomainError(f"need rho < 0, got {rho}")
    gh = float(np.mean(sample.top_log))
    if gh <= 0.0:
        raise DomainError(
            "Hill estimate is non-positive; bias correction undefined"
        )
    m2 = moments(sample, 2)
    g = gh - (m2 - 2.0 * gh ** 2) * (1.0 - rho) / (2.0 * gh * rho)
    flags = () if g > 0.0 else (NONPOSITIVE_GAMMA,)
    return TailIndexEstimate(g, "dhmz", sample.k, rho_used=float(rho),
                             flags=flags)


def estimate_A(sample: TailSample, xi: float) -> float:
    """Scale of the second-order bias term at t = n/k, recovered from the
    gap between the uniform-kernel and second-order-kernel estimates:

        A_hat = -((1-xi)(1-2xi)/xi^2) * (gamma(K_power0) - gamma(K_2,xi)).
    """
    if not xi < 0:
        raise DomainError(f"need xi < 0, got {xi}")
    g1 = gamma_kernel(sample, Kernel.power(0.0)).gamma_hat
    g2 = gamma_kernel(sample, Kernel.second_order(xi)).gamma_hat
    return -((1.0 - xi) * (1.0 - 2.0 * xi) / xi ** 2) * (g1 - g2)


def _extrapolation_ratio(sample: TailSample, p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"need 0 < p < 1, got {p}")
    ratio = sample.k / (sample.n * p)
    if ratio < 1.0:
        raise DomainError(
            f"p={p} is not in the extrapolation regime (k/(n p) = {ratio} "
            f"< 1); pick a smaller p or a larger k"
        )
    return ratio


def quantile_weissman(sample: TailSample, p: float,
                      gamma: TailIndexEstimate | None = None) -> QuantileEstimate:
    """Plain extrapolation x_hat = X_{n-k,n} * (k/(n p))^gamma_hat with the
    Hill estimate by default."""
    ratio = _extrapolation_ratio(sample, p)
    if gamma is None:
        gamma = hill(sample)
    if not gamma.usable:
        raise InvalidEstimateError(
            f"refusing extrapolation from flagged gamma {gamma.gamma_hat}"
        )
    x_hat = sample.threshold * ratio ** gamma.gamma_hat
    if not math.isfinite(x_hat):
        raise InvalidEstimateError("extrapolated quantile overflowed")
    return QuantileEstimate(x_hat, p, sample.k, "weissman")


def quantile_unbiased(sample: TailSample, p: float, xi: float,
                      gamma: TailIndexEstimate | None = None) -> QuantileEstimate:
    """Extrapolation from the bias-cancelling mixture estimate, with an
    explicit multiplicative correction for the second-order term:

        x_hat = X_{n-k,n} * r^gamma * exp(A_hat * (r^xi - 1) / xi),

    where r = k/(n p).  A vanishing A_hat collapses the correction to 1 and
    the estimate to plain extrapolation from the mixture gamma.
    """
    if not xi < 0:
        raise DomainError(f"need xi < 0, got {xi}")
    ratio = _extrapolation_ratio(sample, p)
    if gamma is None:
        gamma = gamma_optimal_unbiased(sample, xi)
    if not gamma.usable:
        raise InvalidEstimateError(
            f"refusing extrapolation from flagged gamma {gamma.gamma_hat}"
        )
    a_hat = estimate_A(sample, xi)
    correction = math.exp(a_hat * (ratio ** xi - 1.0) / xi)
    x_hat = sample.threshold * ratio ** gamma.gamma_hat * correction
    if not math.isfinite(x_hat):
        raise InvalidEstimateError("extrapolated quantile overflowed")
    return QuantileEstimate(x_hat, p, sample.k, "unbiased",
                            correction_factor=correction)


def quantile_dhmz(sample: TailSample, p: float, rho: float) -> QuantileEstimate:
    """Extrapolation from the moment-corrected Hill estimate with its own
    first-order correction factor.

    The factor can overshoot to zero or below in small samples; the value
    is then still returned (never clamped) but flagged, and a warning is
    emitted.
    """
    ratio = _extrapolation_ratio(sample, p)
    g_corr = gamma_dhmz(sample, rho)
    if not g_corr.usable:
        raise InvalidEstimateError(
            f"refusing extrapolation from flagged gamma {g_corr.gamma_hat}"
        )
    gh = float(np.mean(sample.top_log))
    m2 = moments(sample, 2)
    bias_scale = (m2 - 2.0 * gh ** 2) * (1.0 - rho) ** 2 / (2.0 * gh * rho ** 2)
    factor = 1.0 - bias_scale * (1.0 - ratio ** rho)
    flags: tuple[str, ...] = ()
    if factor <= 0.0:
        warnings.warn(
            f"quantile correction factor {factor} is not positive; "
            f"returning the uncorrected-sign value anyway",
            RuntimeWarning, stacklevel=2,
        )
        flags = (NONPOSITIVE_CORRECTION,)
    x_hat = sample.threshold * ratio ** g_corr.gamma_hat * factor
    if not math.isfinite(x_hat):
        raise InvalidEstimateError("extrapolated quantile overflowed")
    return QuantileEstimate(x_hat, p, sample.k, "dhmz",
                            correction_factor=factor, flags=flags)
