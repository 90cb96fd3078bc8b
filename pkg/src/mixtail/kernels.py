"""Weight functions for kernel-weighted log-spacing statistics.

A kernel K lives on (0, 1], integrates to one, and induces discrete weights

    w_i = (i/k) K(i/k) - ((i-1)/k) K((i-1)/k),   i = 1..k,

with the convention 0 * K(0) = 0.  The weighted sum of the top log-spacings
with these weights is the exact discretization of the Stieltjes integral of
the empirical tail quantile process against d(t K(t)); the weights always
telescope to K(1).

Four families are provided:

``power(nu)``
    K(u) = (1 + nu) u^nu, nu >= 0.  nu = 0 is the uniform kernel (plain
    Hill averaging).
``logweight(nu)``
    K(u) = (-log u)^nu / Gamma(1 + nu), nu >= 0.
``second_order(rho)``
    K(u) = (1 - rho) u^(-rho), rho < 0.
``optimal_mixture(rho)``
    The variance-minimizing unbiased combination
    K(u) = ((1-rho)/rho)^2 - ((1-rho)(1-2rho)/rho^2) u^(-rho), rho < 0.
    Its uniform-kernel weight is delta = ((1-rho)/rho)^2 and the
    second-order kernel enters with weight 1 - delta = (2rho-1)/rho^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError

_FAMILIES = ("power", "logweight", "second_order", "optimal_mixture")

# absolute tolerance demanded from the adaptive quadratures below
_QUAD_TOL = 1e-10


@dataclass(frozen=True)
class Kernel:
    """One member of the supported kernel families.

    Use the named constructors; the raw constructor does not validate the
    parameter range beyond family membership.
    """

    family: str
    param: float

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise DomainError(f"unknown kernel family {self.family!r}")

    # -- named constructors -------------------------------------------------

    @classmethod
    def power(cls, nu: float) -> "Kernel":
        if not nu >= 0:
            raise DomainError(f"power kernel needs nu >= 0, got {nu}")
        return cls("power", float(nu))

    @classmethod
    def logweight(cls, nu: float) -> "Kernel":
        if not nu >= 0:
            raise DomainError(f"logweight kernel needs nu >= 0, got {nu}")
        return cls("logweight", float(nu))

    @classmethod
    def second_order(cls, rho: float) -> "Kernel":
        if not rho < 0:
            raise DomainError(f"second_order kernel needs rho < 0, got {rho}")
        return cls("second_order", float(rho))

    @classmethod
    def optimal_mixture(cls, rho: float) -> "Kernel":
        if not rho < 0:
            raise DomainError(
                f"optimal_mixture kernel needs rho < 0, got {rho}"
            )
        return cls("optimal_mixture", float(rho))

    # -- pointwise machinery ------------------------------------------------

    def eval(self, t) -> np.ndarray | float:
        """Evaluate K on t in (0, 1] (scalar or array)."""
        t_arr = np.asarray(t, dtype=np.float64)
        if np.any(t_arr <= 0.0) or np.any(t_arr > 1.0):
            raise DomainError("kernel argument must lie in (0, 1]")
        out = self._eval_unchecked(t_arr)
        return float(out) if np.isscalar(t) else out

    def _eval_unchecked(self, t: np.ndarray) -> np.ndarray:
        f, a = self.family, self.param
        if f == "power":
            return (1.0 + a) * t ** a
        if f == "logweight":
            return (-np.log(t)) ** a / math.gamma(1.0 + a)
        if f == "second_order":
            return (1.0 - a) * t ** (-a)
        # optimal_mixture
        delta = ((1.0 - a) / a) ** 2
        slope = (1.0 - a) * (1.0 - 2.0 * a) / a ** 2
        return delta - slope * t ** (-a)

    def _tk(self, t: np.ndarray) -> np.ndarray:
        """t * K(t) with the 0 * K(0) = 0 convention, valid on [0, 1]."""
        out = np.zeros_like(t)
        pos = t > 0.0
        out[pos] = t[pos] * self._eval_unchecked(t[pos])
        return out

    def _tk_prime(self, t: np.ndarray) -> np.ndarray:
        """(t K(t))' = K(t) + t K'(t) on (0, 1]."""
        f, a = self.family, self.param
        if f == "power":
            return (1.0 + a) ** 2 * t ** a
        if f == "logweight":
            lg = -np.log(t)
            return (lg ** a - a * lg ** (a - 1.0) if a > 0 else lg ** a) \
                / math.gamma(1.0 + a)
        if f == "second_order":
            return (1.0 - a) ** 2 * t ** (-a)
        delta = ((1.0 - a) / a) ** 2
        slope = (1.0 - a) * (1.0 - 2.0 * a) / a ** 2
        return delta - slope * (1.0 - a) * t ** (-a)

    # -- discretization -----------------------------------------------------

    def weights(self, k: int) -> np.ndarray:
        """Discrete weights w_1..w_k; they sum to K(1) exactly up to
        floating-point telescoping."""
        if k < 1:
            raise DomainError(f"need k >= 1, got {k}")
        grid = np.arange(k + 1, dtype=np.float64) / k
        return np.diff(self._tk(grid))


def _quad_sqrt_sub(f, tol: float = _QUAD_TOL) -> float:
    """Integrate f over (0, 1] with the t = u^2 substitution, which tames
    the logarithmic endpoint blow-up of the logweight family."""
    val, err = quad(lambda u: f(np.asarray([u * u]))[0] * 2.0 * u, 0.0, 1.0,
                    epsabs=tol, epsrel=tol, limit=200)
    if err > 1e-7:
        raise DomainError(f"kernel quadrature did not converge (err={err})")
    return val


def ab_kernel(kernel: Kernel, rho: float) -> float:
    """Asymptotic-bias functional AB(K) = int_0^1 t^(-rho) K(t) dt for a
    second-order tail of index rho < 0, by adaptive quadrature."""
    if not rho < 0:
        raise DomainError(f"need rho < 0, got {rho}")
    return _quad_sqrt_sub(lambda t: t ** (-rho) * kernel._eval_unchecked(t))


def av_iid(kernel: Kernel, gamma: float) -> float:
    """Asymptotic-variance functional of the kernel statistic under serial
    independence.

    The defining double integral of min(s, t)/(st) against d(tK(t)) twice,
    minus K(1)^2, collapses by symmetry and the telescoping identity
    int_0^t d(sK(s)) = t K(t) to the single integral

        2 * int_0^1 (t K(t))' K(t) dt - K(1)^2,

    which is what is integrated here (no closed form is consulted).
    """
    if gamma < 0:
        raise DomainError(f"need gamma >= 0, got {gamma}")
    core = _quad_sqrt_sub(
        lambda t: kernel._tk_prime(t) * kernel._eval_unchecked(t)
    )
    k1 = float(kernel._eval_unchecked(np.asarray([1.0]))[0])
    return gamma ** 2 * (2.0 * core - k1 * k1)
