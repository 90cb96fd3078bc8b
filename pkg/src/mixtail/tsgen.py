"""Simulation models for heavy-tailed, serially dependent series.

Innovations come from one of two laws:

* a two-sided mixture placing mass q on a unit-Frechet right tail and
  mass 1-q on its reflection (tail index 1 on both sides), drawn by exact
  CDF inversion;
* a Student-t standardized to unit variance, t * sqrt((nu-2)/nu).

Model kinds: iid, ar1 (X_t = theta X_{t-1} + eps_t), ma1
(X_t = theta eps_{t-1} + eps_t, one pre-sample draw) and garch
(sigma2_t = alpha0 + sum alpha_j X^2_{t-j} + sum beta_k sigma2_{t-k}).
Recurrent kinds discard a burn-in prefix (default 1000).

Streams are counter-based (Philox) and addressed by (seed, path): child i
of a stream appends i to the path, so replication i draws the same numbers
no matter how many replications run in total or on how many threads.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import _backend
from .errors import BudgetExceededError, ConfigError, DomainError

_KINDS = ("iid", "ar1", "ma1", "garch")
_LAWS = ("frechet_mixture", "student_t")


@dataclass(frozen=True)
class SeededStream:
    """Deterministic random stream address: a 64-bit seed plus a spawn
    path.  Identical (seed, path) means identical draws."""

    seed: int
    path: tuple[int, ...] = ()
    algorithm: str = "philox"

    def __post_init__(self):
        if self.algorithm != "philox":
            raise DomainError(
                f"unsupported generator algorithm {self.algorithm!r}"
            )

    def child(self, index: int) -> "SeededStream":
        return replace(self, path=self.path + (int(index),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class InnovationLaw:
    family: str
    q: float | None = None
    nu: float | None = None

    @classmethod
    def frechet_mixture(cls, q: float = 0.75) -> "InnovationLaw":
        if not 0.0 < q < 1.0:
            raise DomainError(f"need q in (0, 1), got {q}")
        return cls("frechet_mixture", q=float(q))

    @classmethod
    def student_t(cls, nu: float) -> "InnovationLaw":
        if not nu > 2.0:
            raise DomainError(
                f"need nu > 2 for unit-variance standardization, got {nu}"
            )
        return cls("student_t", nu=float(nu))

    def __post_init__(self):
        if self.family not in _LAWS:
            raise ConfigError(f"unknown innovation family {self.family!r}")


def frechet_mixture_quantile(u, q: float):
    """Inverse CDF of the two-sided Frechet mixture at u in [0, 1).

    u > 1-q lands on the positive branch -1/log((u-1+q)/q); u <= 1-q on
    the negative branch 1/log(1 - u/(1-q)).  The boundary u = 1-q belongs
    to the negative branch and maps to 0 by continuity.
    """
    if not 0.0 < q < 1.0:
        raise DomainError(f"need q in (0, 1), got {q}")
    scalar = np.isscalar(u)
    u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if np.any(u_arr < 0.0) or np.any(u_arr >= 1.0):
        raise DomainError("need u in [0, 1)")
    out = np.empty_like(u_arr)
    pos = u_arr > 1.0 - q
    # the endpoints u = 0 (-> -inf) and u = 1-q (-> 0) divide by zero on
    # purpose; keep numpy quiet about them
    with np.errstate(divide="ignore"):
        out[pos] = -1.0 / np.log((u_arr[pos] - (1.0 - q)) / q)
        neg = ~pos
        out[neg] = 1.0 / np.log1p(-u_arr[neg] / (1.0 - q))
    return float(out[0]) if scalar else out


def _draw(law: InnovationLaw, rng: np.random.Generator, size: int) -> np.ndarray:
    if law.family == "frechet_mixture":
        u = rng.random(size)
        out = np.empty(size)
        q = law.q
        pos = u > 1.0 - q
        with np.errstate(divide="ignore"):
            out[pos] = -1.0 / np.log((u[pos] - (1.0 - q)) / q)
            neg = ~pos
            out[neg] = 1.0 / np.log1p(-u[neg] / (1.0 - q))
        return out
    # student_t
    return rng.standard_t(law.nu, size) * math.sqrt((law.nu - 2.0) / law.nu)


def sample_innovation(law: InnovationLaw, stream: SeededStream) -> float:
    """One innovation from the given stream (same stream, same value)."""
    return float(_draw(law, stream.generator(), 1)[0])


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    innovation: InnovationLaw
    theta: float | None = None
    alpha0: float | None = None
    alpha: tuple[float, ...] = ()
    beta: tuple[float, ...] = ()
    burn_in: int = 1000

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if self.burn_in < 0:
            raise ConfigError(f"need burn_in >= 0, got {self.burn_in}")
        if self.kind in ("ar1", "ma1"):
            if self.theta is None or not 0.0 < self.theta < 1.0:
                raise ConfigError(
                    f"{self.kind} needs theta in (0, 1), got {self.theta}"
                )
        if self.kind == "garch":
            if self.alpha0 is None or not self.alpha0 > 0.0:
                raise ConfigError(f"garch needs alpha0 > 0, got {self.alpha0}")
            if len(self.alpha) == 0 or any(a <= 0.0 for a in self.alpha):
                raise ConfigError(
                    "garch needs a non-empty alpha vector with positive "
                    "entries"
                )
            if any(b <= 0.0 for b in self.beta):
                raise ConfigError("garch beta weights must be positive")
            persistence = sum(self.alpha) + sum(self.beta)
            if persistence >= 1.0:
                warnings.warn(
                    f"garch persistence {persistence} >= 1: the variance "
                    f"recursion is non-stationary",
                    RuntimeWarning, stacklevel=3,
                )


def iid_model(innovation: InnovationLaw) -> ModelSpec:
    return ModelSpec("iid", innovation)


def ar1_model(theta: float, innovation: InnovationLaw,
              burn_in: int = 1000) -> ModelSpec:
    return ModelSpec("ar1", innovation, theta=float(theta), burn_in=burn_in)


def ma1_model(theta: float, innovation: InnovationLaw) -> ModelSpec:
    return ModelSpec("ma1", innovation, theta=float(theta))


def garch_model(alpha0: float, alpha, beta, innovation: InnovationLaw,
                burn_in: int = 1000) -> ModelSpec:
    return ModelSpec("garch", innovation, alpha0=float(alpha0),
                     alpha=tuple(float(a) for a in np.atleast_1d(alpha)),
                     beta=tuple(float(b) for b in np.atleast_1d(beta)),
                     burn_in=burn_in)


def generate(spec: ModelSpec, n: int, stream: SeededStream) -> np.ndarray:
    """Simulate n observations from the model, deterministically in the
    stream address."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    rng = stream.generator()
    law = spec.innovation
    if spec.kind == "iid":
        return _draw(law, rng, n)
    if spec.kind == "ma1":
        eps = _draw(law, rng, n + 1)
        return spec.theta * eps[:-1] + eps[1:]
    if spec.kind == "ar1":
        eps = _draw(law, rng, spec.burn_in + n)
        x = _backend.ar1_recurse(eps, spec.theta, 0.0)
        return x[spec.burn_in:]
    # garch
    eps = _draw(law, rng, spec.burn_in + n)
    persistence = sum(spec.alpha) + sum(spec.beta)
    if persistence < 1.0:
        sigma2_init = spec.alpha0 / (1.0 - persistence)
    else:
        sigma2_init = spec.alpha0
    x = _backend.garch_recurse(eps, spec.alpha0, np.asarray(spec.alpha),
                               np.asarray(spec.beta), sigma2_init)
    return x[spec.burn_in:]


def _extra_draws(spec: ModelSpec) -> int:
    if spec.kind in ("ar1", "garch"):
        return spec.burn_in
    if spec.kind == "ma1":
        return 1
    return 0


def true_quantile_mc(spec: ModelSpec, p: float, n_rep: int, sample_size: int,
                     stream: SeededStream,
                     max_draws: int = 1_000_000_000) -> tuple[float, float]:
    """Monte Carlo reference for the 1-p quantile of the model: the mean
    over n_rep independent replications of the empirical 1-p quantile of a
    sample of the given size.  Returns (estimate, standard error).

    Refuses up front when the total innovation budget
    n_rep * (sample_size + burn-in) exceeds max_draws.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"need 0 < p < 1, got {p}")
    if n_rep < 2:
        raise DomainError(f"need n_rep >= 2 for a standard error, got {n_rep}")
    total = n_rep * (sample_size + _extra_draws(spec))
    if total > max_draws:
        raise BudgetExceededError(
            f"{total} draws requested exceeds the budget of {max_draws}"
        )
    qs = np.empty(n_rep)
    for i in range(n_rep):
        series = generate(spec, sample_size, stream.child(i))
        qs[i] = np.quantile(series, 1.0 - p)
    return float(qs.mean()), float(qs.std(ddof=1) / math.sqrt(n_rep))


# -- config round-tripping ---------------------------------------------------

_MODEL_KEYS = ("kind", "theta", "alpha0", "alpha", "beta", "innovation",
               "q", "nu", "burn_in")


def model_to_mapping(spec: ModelSpec) -> dict:
    """Flat mapping with the canonical field names (kind, theta, alpha0,
    alpha, beta, innovation, q, nu, burn_in)."""
    out: dict = {"kind": spec.kind, "innovation": spec.innovation.family}
    if spec.innovation.q is not None:
        out["q"] = spec.innovation.q
    if spec.innovation.nu is not None:
        out["nu"] = spec.innovation.nu
    if spec.theta is not None:
        out["theta"] = spec.theta
    if spec.alpha0 is not None:
        out["alpha0"] = spec.alpha0
    if spec.alpha:
        out["alpha"] = list(spec.alpha)
    if spec.beta:
        out["beta"] = list(spec.beta)
    out["burn_in"] = spec.burn_in
    return out


def model_from_mapping(mapping: dict) -> ModelSpec:
    """Inverse of :func:`model_to_mapping`; unknown keys are rejected."""
    unknown = set(mapping) - set(_MODEL_KEYS)
    if unknown:
        raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
    if "kind" not in mapping:
        raise ConfigError("model config needs a 'kind'")
    if "innovation" not in mapping:
        raise ConfigError("model config needs an 'innovation'")
    fam = mapping["innovation"]
    if fam == "frechet_mixture":
        law = InnovationLaw.frechet_mixture(float(mapping.get("q", 0.75)))
    elif fam == "student_t":
        if "nu" not in mapping:
            raise ConfigError("student_t innovation needs 'nu'")
        law = InnovationLaw.student_t(float(mapping["nu"]))
    else:
        raise ConfigError(f"unknown innovation family {fam!r}")
    kwargs: dict = {}
    if "theta" in mapping:
        kwargs["theta"] = float(mapping["theta"])
    if "alpha0" in mapping:
        kwargs["alpha0"] = float(mapping["alpha0"])
    if "alpha" in mapping:
        kwargs["alpha"] = tuple(
            float(a) for a in np.atleast_1d(mapping["alpha"])
        )
    if "beta" in mapping:
        kwargs["beta"] = tuple(
            float(b) for b in np.atleast_1d(mapping["beta"])
        )
    if "burn_in" in mapping:
        kwargs["burn_in"] = int(mapping["burn_in"])
    try:
        return ModelSpec(str(mapping["kind"]), law, **kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad model config: {exc}") from exc


def _parse_scalar(text: str):
    t = text.strip()
    if "," in t:
        return [_parse_scalar(part) for part in t.split(",")]
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def parse_config_text(text: str) -> dict:
    """Parse a config given either as JSON (first character '{') or as
    plain key=value lines ('#' starts a comment)."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON config: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError("JSON config must be an object")
        return obj
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = _parse_scalar(value)
    return out


def load_model_config(path) -> tuple[ModelSpec, int | None]:
    """Read a model config file; returns the parsed model and the optional
    seed carried alongside it."""
    with open(path, "r", encoding="utf-8") as fh:
        mapping = parse_config_text(fh.read())
    seed = mapping.pop("seed", None)
    if seed is not None:
        seed = int(seed)
    return model_from_mapping(mapping), seed
