"""Asymptotic variance formulas under serial dependence.

For the bias-cancelling mixture kernel the limiting variance is the serial
independence value scaled by r(1, 1), where r is the extremal covariance
function of the model.  The competitor here is the corrected-Hill limit,
whose variance carries an extra non-negative dependence term, so the
mixture's variance never exceeds it on the supported models.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .errors import DomainError

_MODELS = ("iid", "ar1", "ma1")

# additive tail of the AR(1) covariance series is geometric; terms below
# this are dropped
_SERIES_TOL = 1e-14


class VarianceComparison(NamedTuple):
    av_optimal: float
    sigma2_competitor: float


def _check_model(model: str, theta: float | None) -> None:
    if model not in _MODELS:
        raise DomainError(f"unknown model tag {model!r}")
    if model != "iid":
        if theta is None:
            raise DomainError(f"model {model!r} needs theta")
        if not 0.0 < theta < 1.0:
            raise DomainError(f"need theta in (0, 1), got {theta}")


def covariance_r(model: str, gamma: float, x: float, y: float,
                 theta: float | None = None) -> float:
    """Extremal covariance r(x, y) of the tail empirical process.

    iid: min(x, y).  MA(1): two extra reflected terms damped by
    theta^(1/gamma).  AR(1): the full geometric series of lagged
    reflections, truncated once terms drop below 1e-14.
    """
    _check_model(model, theta)
    if x < 0.0 or y < 0.0:
        raise DomainError(f"need x, y >= 0, got x={x}, y={y}")
    base = min(x, y)
    if model == "iid":
        return base
    if not gamma > 0.0:
        raise DomainError(f"need gamma > 0 for {model!r}, got {gamma}")
    w = theta ** (1.0 / gamma)
    if model == "ma1":
        return base + (min(x, y * w) + min(y, x * w)) / (1.0 + w)
    # ar1
    total = base
    wm = 1.0
    while True:
        wm *= w
        term = min(x, y * wm) + min(y, x * wm)
        total += term
        if term < _SERIES_TOL:
            return total


def av_dependent_optimal(model: str, theta: float | None, gamma: float,
                         rho: float) -> VarianceComparison:
    """Limiting variances at tail index gamma and second-order rho < 0.

    Returns (mixture-kernel variance, corrected-Hill variance).  The first
    is gamma^2 ((1-rho)/rho)^2 r(1,1); the second adds a dependence term
    specific to the model.  Degenerate gamma = 0 gives (0, 0).
    """
    if not rho < 0.0:
        raise DomainError(f"need rho < 0, got {rho}")
    if gamma < 0.0:
        raise DomainError(f"need gamma >= 0, got {gamma}")
    _check_model(model, theta)
    if gamma == 0.0:
        return VarianceComparison(0.0, 0.0)

    r11 = covariance_r(model, gamma, 1.0, 1.0, theta)
    av = gamma ** 2 * ((1.0 - rho) / rho) ** 2 * r11

    core = ((1.0 - rho) ** 2 + rho ** 2) * r11
    if model == "iid":
        extra = 0.0
    else:
        w = theta ** (1.0 / gamma)
        wlogw = w * math.log(w)
        if model == "ar1":
            extra = 2.0 * rho * (1.0 - rho) * wlogw / (1.0 - w) ** 2
        else:  # ma1
            extra = 2.0 * rho * (1.0 - rho) * wlogw / (1.0 + w)
    sigma2 = gamma ** 2 / rho ** 2 * (core + extra)
    return VarianceComparison(av, sigma2)
