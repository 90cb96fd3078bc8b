"""Monte Carlo bias and RMSE study of the extreme-quantile estimators.

Each replication simulates one series, estimates the second-order parameter
once (at the scan-selected k, falling back to the canonical value when the
scan finds nothing valid), then sweeps the k grid computing each requested
quantile estimator.  Per (estimator, k) cell the study reports

    abias = |mean(x_hat / x_p) - 1|,    rmse = sqrt(mean((x_hat/x_p - 1)^2))

over the replications that produced a usable estimate; failures are
excluded and counted, and a cell where everything failed is marked missing
rather than zero.

Replication i always draws from child stream i of the study seed, so
results are invariant to the thread count and to enlarging the replication
count (the first N replications of a longer run match a shorter run
exactly).
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._fmt import fg17
from .errors import DomainError, InvalidEstimateError
from .tail_core import (
    build_tail_sample,
    quantile_dhmz,
    quantile_unbiased,
    quantile_weissman,
    select_k_rho,
)
from .tsgen import ModelSpec, SeededStream, generate

ESTIMATORS = ("unbiased", "weissman", "dhmz")

DEFAULT_K_GRID = tuple(range(20, 601, 20))


@dataclass(frozen=True)
class StudyConfig:
    model: ModelSpec
    n: int
    replications: int
    p: float
    x_p_true: float
    seed: int
    k_grid: tuple[int, ...] = DEFAULT_K_GRID
    estimators: tuple[str, ...] = ESTIMATORS
    canonical_xi: float = -1.0
    threads: int = 1

    def __post_init__(self):
        if self.n < 3:
            raise DomainError(f"need n >= 3, got {self.n}")
        if self.replications < 1:
            raise DomainError(
                f"need at least 1 replication, got {self.replications}"
            )
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"need 0 < p < 1, got {self.p}")
        if not (math.isfinite(self.x_p_true) and self.x_p_true > 0.0):
            raise DomainError(
                f"need a positive reference quantile, got {self.x_p_true}"
            )
        ks = self.k_grid
        if len(ks) == 0:
            raise DomainError("k grid is empty")
        if any(k2 <= k1 for k1, k2 in zip(ks, ks[1:])):
            raise DomainError("k grid must be strictly increasing")
        if ks[0] < 1 or ks[-1] > self.n - 1:
            raise DomainError(
                f"k grid must stay within [1, n-1] = [1, {self.n - 1}]"
            )
        if len(self.estimators) == 0:
            raise DomainError("no estimators requested")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad:
            raise DomainError(f"unknown estimators: {sorted(bad)}")
        if len(set(self.estimators)) != len(self.estimators):
            raise DomainError("duplicate estimators requested")
        if not self.canonical_xi < 0.0:
            raise DomainError(
                f"canonical xi must be negative, got {self.canonical_xi}"
            )
        if self.threads < 1:
            raise DomainError(f"need threads >= 1, got {self.threads}")


def _cell_estimate(estimator: str, sample, p: float, xi: float) -> float:
    if estimator == "unbiased":
        return quantile_unbiased(sample, p, xi).x_hat
    if estimator == "weissman":
        return quantile_weissman(sample, p).x_hat
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return quantile_dhmz(sample, p, xi).x_hat


def replication_ratios(config: StudyConfig, index: int) -> np.ndarray:
    """Ratios x_hat / x_p for one replication, shaped (estimators, k grid);
    NaN marks a failed cell."""
    stream = SeededStream(config.seed).child(index)
    series = generate(config.model, config.n, stream)
    try:
        second_order = select_k_rho(series)
    except DomainError:
        second_order = None
    if second_order is not None and second_order.valid:
        xi = second_order.rho_hat
    else:
        xi = config.canonical_xi

    out = np.full((len(config.estimators), len(config.k_grid)), np.nan)
    for j, k in enumerate(config.k_grid):
        try:
            sample = build_tail_sample(series, k)
        except DomainError:
            continue
        for i, estimator in enumerate(config.estimators):
            try:
                x_hat = _cell_estimate(estimator, sample, config.p, xi)
            except (DomainError, InvalidEstimateError):
                continue
            ratio = x_hat / config.x_p_true
            if math.isfinite(ratio):
                out[i, j] = ratio
    return out


def _worker(args) -> tuple[int, np.ndarray]:
    config, index = args
    return index, replication_ratios(config, index)


@dataclass(frozen=True)
class StudyResult:
    """Raw ratio matrix plus the labels needed to aggregate it."""

    model_kind: str
    estimators: tuple[str, ...]
    k_grid: tuple[int, ...]
    p: float
    x_p_true: float
    ratios: np.ndarray  # (n_estimators, n_replications, n_k); NaN = failed

    def _est_index(self, estimator: str) -> int:
        try:
            return self.estimators.index(estimator)
        except ValueError:
            raise DomainError(
                f"estimator {estimator!r} was not part of the study"
            ) from None

    def n_failed(self, estimator: str) -> np.ndarray:
        r = self.ratios[self._est_index(estimator)]
        return np.isnan(r).sum(axis=0)

    def abias(self, estimator: str) -> np.ndarray:
        r = self.ratios[self._est_index(estimator)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return np.abs(np.nanmean(r, axis=0) - 1.0)

    def rmse(self, estimator: str) -> np.ndarray:
        r = self.ratios[self._est_index(estimator)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return np.sqrt(np.nanmean((r - 1.0) ** 2, axis=0))

    def rows(self):
        """Tidy per-cell records: model, estimator, k, abias, rmse,
        n_failed."""
        for estimator in self.estimators:
            ab = self.abias(estimator)
            rm = self.rmse(estimator)
            nf = self.n_failed(estimator)
            for j, k in enumerate(self.k_grid):
                yield {
                    "model": self.model_kind,
                    "estimator": estimator,
                    "k": k,
                    "abias": float(ab[j]),
                    "rmse": float(rm[j]),
                    "n_failed": int(nf[j]),
                }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["model", "estimator", "k", "abias", "rmse", "n_failed"]
            )
            for row in self.rows():
                writer.writerow([
                    row["model"], row["estimator"], row["k"],
                    fg17(row["abias"]), fg17(row["rmse"]), row["n_failed"],
                ])

    def to_json_obj(self) -> dict:
        def clean(v: float):
            return None if math.isnan(v) else v

        return {
            "model": self.model_kind,
            "p": self.p,
            "x_p_true": self.x_p_true,
            "k_grid": list(self.k_grid),
            "cells": [
                {**row, "abias": clean(row["abias"]),
                 "rmse": clean(row["rmse"])}
                for row in self.rows()
            ],
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_obj(), fh, indent=2)
            fh.write("\n")


def run_study(config: StudyConfig) -> StudyResult:
    """Run the full replication-by-grid sweep, optionally across processes;
    the assembled ratio matrix is identical either way."""
    n_rep = config.replications
    shape = (len(config.estimators), n_rep, len(config.k_grid))
    ratios = np.full(shape, np.nan)
    if config.threads == 1:
        for i in range(n_rep):
            ratios[:, i, :] = replication_ratios(config, i)
    else:
        tasks = [(config, i) for i in range(n_rep)]
        chunk = max(1, n_rep // (config.threads * 8))
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            for i, row in pool.map(_worker, tasks, chunksize=chunk):
                ratios[:, i, :] = row
    return StudyResult(
        model_kind=config.model.kind,
        estimators=config.estimators,
        k_grid=config.k_grid,
        p=config.p,
        x_p_true=config.x_p_true,
        ratios=ratios,
    )
