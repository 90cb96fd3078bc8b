"""Pure-Python/numpy implementations of the sequential model recursions.

Used when the compiled extension is unavailable (or forced off via
MIXTAIL_BACKEND=py).  Expression order matches mixtail._speedups so that
both backends produce the same doubles on finite inputs.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import lfilter


def ar1_recurse(eps: np.ndarray, theta: float, x0: float = 0.0) -> np.ndarray:
    """X_t = theta * X_{t-1} + eps_t started at x0."""
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    zi = np.array([theta * x0])
    out, _ = lfilter([1.0], [1.0, -theta], eps, zi=zi)
    return out


def garch_recurse(eps: np.ndarray, alpha0: float, alpha: np.ndarray,
                  beta: np.ndarray, sigma2_init: float) -> np.ndarray:
    """GARCH(p, q) observation recursion; see the compiled twin for the
    state equations."""
    eps = np.asarray(eps, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    n = eps.shape[0]
    p, q = alpha.shape[0], beta.shape[0]
    out = np.empty(n)
    e = eps.tolist()
    o = out  # assigned per index below

    if p == 1 and q == 1:
        a1 = float(alpha[0])
        b1 = float(beta[0])
        x2_1 = sigma2_init
        s2_1 = sigma2_init
        for i in range(n):
            s2 = alpha0 + a1 * x2_1 + b1 * s2_1
            x = math.sqrt(s2) * e[i]
            o[i] = x
            x2_1 = x * x
            s2_1 = s2
        return out

    if p == 1 and q == 2:
        a1 = float(alpha[0])
        b1 = float(beta[0])
        b2 = float(beta[1])
        x2_1 = sigma2_init
        s2_1 = sigma2_init
        s2_2 = sigma2_init
        for i in range(n):
            s2 = alpha0 + a1 * x2_1 + b1 * s2_1 + b2 * s2_2
            x = math.sqrt(s2) * e[i]
            o[i] = x
            x2_1 = x * x
            s2_2 = s2_1
            s2_1 = s2
        return out

    x2h = [sigma2_init] * p
    s2h = [sigma2_init] * q
    al = alpha.tolist()
    be = beta.tolist()
    for i in range(n):
        s2 = alpha0
        for j in range(p):
            s2 = s2 + al[j] * x2h[j]
        for j in range(q):
            s2 = s2 + be[j] * s2h[j]
        x = math.sqrt(s2) * e[i]
        o[i] = x
        x2h = [x * x] + x2h[:-1]
        s2h = [s2] + s2h[:-1]
    return out
