"""Backend selection for the sequential recursions.

The compiled extension is preferred when importable.  Set MIXTAIL_BACKEND=py
to force the pure-Python fallback, or MIXTAIL_BACKEND=cy to insist on the
compiled module (ImportError if the build is missing).
"""

from __future__ import annotations

import os

import numpy as np

_requested = os.environ.get("MIXTAIL_BACKEND", "").strip().lower()
if _requested not in ("", "cy", "py"):
    raise ImportError(
        f"MIXTAIL_BACKEND must be 'cy' or 'py', got {_requested!r}"
    )

if _requested == "py":
    from . import _fallback as _impl
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        if _requested == "cy":
            raise
        from . import _fallback as _impl  # type: ignore[no-redef]
        BACKEND = "python"


def ar1_recurse(eps, theta, x0=0.0):
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    return _impl.ar1_recurse(eps, float(theta), float(x0))


def garch_recurse(eps, alpha0, alpha, beta, sigma2_init):
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    alpha = np.ascontiguousarray(alpha, dtype=np.float64)
    beta = np.ascontiguousarray(beta, dtype=np.float64)
    return _impl.garch_recurse(eps, float(alpha0), alpha, beta,
                               float(sigma2_init))
