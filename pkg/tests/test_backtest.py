import csv
import json
import math
import warnings

import numpy as np
import pytest

from mixtail.backtest import (
    ArimaCoeffs,
    BacktestConfig,
    arima_residuals,
    block_bootstrap_ci,
    kupiec_test,
    return_level_transform,
    rolling_forecast,
)
from mixtail.errors import DomainError
from mixtail.tsgen import InnovationLaw, SeededStream, ar1_model, generate

COEFFS = ArimaCoeffs(phi1=0.819, theta1=-0.989)


# -- violation-frequency test --------------------------------------------------

def test_kupiec_reference_pvalues():
    assert kupiec_test(400, 7, 0.01).pvalue == pytest.approx(
        0.17292449371829166, rel=1e-13)
    assert kupiec_test(1200, 17, 0.01).pvalue == pytest.approx(
        0.17222128236663126, rel=1e-13)
    assert kupiec_test(400, 7, 0.01).lr == pytest.approx(1.858, abs=1e-3)


def test_kupiec_zero_lr_at_exact_fraction():
    res = kupiec_test(200, 10, 0.05)
    assert res.lr == 0.0
    assert res.pvalue == 1.0


def test_kupiec_corner_counts():
    none = kupiec_test(400, 0, 0.01)
    assert none.lr == pytest.approx(-2.0 * 400 * math.log(0.99), rel=1e-13)
    every = kupiec_test(50, 50, 0.01)
    assert every.lr == pytest.approx(-2.0 * 50 * math.log(0.01), rel=1e-13)
    assert 0.0 <= every.pvalue < 1e-30


def test_kupiec_validation():
    with pytest.raises(DomainError):
        kupiec_test(0, 0, 0.01)
    with pytest.raises(DomainError):
        kupiec_test(10, -1, 0.01)
    with pytest.raises(DomainError):
        kupiec_test(10, 11, 0.01)
    with pytest.raises(DomainError):
        kupiec_test(10, 1, 0.0)
    with pytest.raises(DomainError):
        kupiec_test(10, 1, 1.0)


# -- differencing filter --------------------------------------------------------

def test_residuals_three_point_example():
    got = arima_residuals([1.0, 2.0, 4.0], ArimaCoeffs(0.5, -1.0))
    assert got.shape == (1,)
    assert got[0] == pytest.approx(1.5, rel=1e-15)


def test_residuals_match_scripted_recursion():
    rng = np.random.default_rng(29)
    x = np.cumsum(rng.standard_normal(40)) + 50.0
    e = arima_residuals(x, COEFFS)
    assert e.shape == (38,)
    e_prev = 0.0
    for i in range(38):
        t = i + 2
        expected = ((x[t] - x[t - 1]) - COEFFS.phi1 * (x[t - 1] - x[t - 2])
                    + COEFFS.theta1 * e_prev)
        assert e[i] == pytest.approx(expected, rel=1e-12, abs=1e-12)
        e_prev = e[i]


def test_residuals_validation():
    with pytest.raises(DomainError):
        arima_residuals([1.0, 2.0], COEFFS)
    with pytest.raises(DomainError):
        arima_residuals([1.0, 2.0, np.nan], COEFFS)


def test_transform_inverts_the_residual_recursion():
    rng = np.random.default_rng(31)
    x = np.cumsum(rng.standard_normal(30)) + 20.0
    e = arima_residuals(x, COEFFS)
    for i in range(1, e.size):
        t = i + 2
        back = return_level_transform(e[i], e[i - 1], x[t - 1], x[t - 2],
                                      COEFFS)
        assert back == pytest.approx(x[t], rel=1e-12)


def test_transform_hand_value_and_identity_coeffs():
    got = return_level_transform(1.0, 0.2, 3.0, 2.5, COEFFS)
    assert got == pytest.approx(4.6073, abs=1e-10)
    plain = return_level_transform(1.7, 9.9, 3.0, 2.5, ArimaCoeffs(0.0, 0.0))
    assert plain == 3.0 + 1.7


# -- rolling backtest -----------------------------------------------------------

def make_series(n=700, seed=19):
    law = InnovationLaw.frechet_mixture(0.75)
    return np.abs(generate(ar1_model(0.3, law), n, SeededStream(seed))) + 0.1


def test_rolling_forecast_with_infinite_stub():
    series = make_series(120)
    config = BacktestConfig(window=100, horizon_points=20, p=0.05, k=20)
    report = rolling_forecast(series, config, forecaster=lambda w: math.inf)
    assert report.n_missing == 0
    assert report.n_forecasts == 20
    assert report.n_violations == 0
    assert not report.violations.any()
    assert report.kupiec_pvalue == pytest.approx(
        kupiec_test(20, 0, 0.05).pvalue, rel=1e-15)


def test_ties_are_not_violations():
    series = np.arange(1.0, 61.0)
    config = BacktestConfig(window=40, horizon_points=10, p=0.1, k=5)
    report = rolling_forecast(series, config,
                              forecaster=lambda w: w[-1] + 1.0)
    # each forecast equals the realized value exactly
    assert np.array_equal(report.forecasts, report.realized)
    assert report.n_violations == 0


def test_failing_windows_become_missing_forecasts(tmp_path):
    series = np.arange(1.0, 61.0)
    config = BacktestConfig(window=40, horizon_points=10, p=0.1, k=5)

    def moody(window):
        if int(window[-1]) % 2 == 0:
            raise DomainError("window rejected")
        return window[-1] - 0.5  # always violated

    report = rolling_forecast(series, config, forecaster=moody)
    assert report.n_missing == 5
    assert report.n_forecasts == 5
    assert report.n_violations == 5
    assert report.n_forecasts + report.n_missing == config.horizon_points
    assert report.kupiec_pvalue == pytest.approx(
        kupiec_test(5, 5, 0.1).pvalue, rel=1e-15)
    # violations stay False at missing forecasts
    missing = np.isnan(report.forecasts)
    assert not report.violations[missing].any()

    csv_path = tmp_path / "bt.csv"
    report.write_csv(csv_path)
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["forecast"] for r in rows].count("") == 5


def test_report_bookkeeping_on_a_real_run(tmp_path):
    series = make_series(700)
    config = BacktestConfig(window=600, horizon_points=60, p=0.05, k=60,
                            method="weissman")
    report = rolling_forecast(series, config)
    assert report.start_index == 640
    assert report.forecasts.shape == (60,)
    assert report.n_forecasts + report.n_missing == 60
    assert report.n_violations == int(report.violations.sum())
    assert report.expected_violations == pytest.approx(60 * 0.05)
    recomputed = kupiec_test(report.n_forecasts, report.n_violations, 0.05)
    assert report.kupiec_lr == recomputed.lr
    assert report.kupiec_pvalue == recomputed.pvalue
    assert report.violation_indices() == [
        640 + t for t in np.flatnonzero(report.violations)]

    json_path = tmp_path / "bt.json"
    report.write_json(json_path)
    with open(json_path) as fh:
        obj = json.load(fh)
    assert obj["n_forecasts"] == report.n_forecasts
    assert obj["violations"] == report.violation_indices()
    assert obj["method"] == "weissman"


def test_rolling_forecast_validation():
    config = BacktestConfig(window=40, horizon_points=10, p=0.1, k=5)
    with pytest.raises(DomainError):
        rolling_forecast(np.ones(49), config)
    bad = np.ones(60)
    bad[3] = np.inf
    with pytest.raises(DomainError):
        rolling_forecast(bad, config)


def test_backtest_config_validation():
    good = dict(window=40, horizon_points=10, p=0.1, k=5)
    with pytest.raises(DomainError):
        BacktestConfig(**{**good, "window": 2})
    with pytest.raises(DomainError):
        BacktestConfig(**{**good, "horizon_points": 0})
    with pytest.raises(DomainError):
        BacktestConfig(**{**good, "k": 0})
    with pytest.raises(DomainError):
        BacktestConfig(**{**good, "k": 40})
    with pytest.raises(DomainError):
        BacktestConfig(**{**good, "p": 0.2})  # above k/window
    with pytest.raises(DomainError):
        BacktestConfig(**{**good, "p": 0.0})
    with pytest.raises(DomainError):
        BacktestConfig(**{**good, "method": "gev"})
    with pytest.raises(DomainError):
        BacktestConfig(**{**good, "xi_policy": "fixed"})
    with pytest.raises(DomainError):
        BacktestConfig(**{**good, "canonical_xi": 0.5})


# -- block bootstrap -------------------------------------------------------------

def test_bootstrap_is_deterministic_in_the_stream():
    series = make_series(400)
    stat = lambda a: float(np.mean(a))
    ci1 = block_bootstrap_ci(series, stat, SeededStream(8), n_boot=49,
                             block_length=25)
    ci2 = block_bootstrap_ci(series, stat, SeededStream(8), n_boot=49,
                             block_length=25)
    assert ci1 == ci2
    ci3 = block_bootstrap_ci(series, stat, SeededStream(9), n_boot=49,
                             block_length=25)
    assert ci1 != ci3


def test_bootstrap_degenerate_cases():
    const = np.full(300, 2.5)
    lo, hi = block_bootstrap_ci(const, lambda a: float(np.mean(a)),
                                SeededStream(1), n_boot=19, block_length=50)
    assert lo == hi == 2.5
    # one full-length block is a rotation, so a permutation-invariant
    # statistic collapses the interval
    series = make_series(200)
    lo, hi = block_bootstrap_ci(series, lambda a: float(np.max(a)),
                                SeededStream(2), n_boot=19,
                                block_length=series.size)
    assert lo == hi == series.max()


def test_bootstrap_percentile_ranks_match_reimplementation():
    series = make_series(500)
    stat = lambda a: float(np.mean(a))
    stream = SeededStream(14)
    lo, hi = block_bootstrap_ci(series, stat, stream)

    rng = stream.generator()
    n = series.size
    block, n_boot = 200, 99
    n_blocks = -(-n // block)
    offsets = np.arange(block)
    values = []
    for _ in range(n_boot):
        starts = rng.integers(0, n, size=n_blocks)
        idx = ((starts[:, None] + offsets[None, :]) % n).ravel()[:n]
        values.append(stat(series[idx]))
    values.sort()
    # B = 99, level 0.95: ranks ceil(100*0.025) = 3 and floor(100*0.975) = 97
    assert lo == values[2]
    assert hi == values[96]


def test_bootstrap_retries_partial_failures():
    series = make_series(300)
    cutoff = float(np.median(series))

    def picky(a):
        if a[0] > cutoff:
            raise DomainError("resample rejected")
        return float(np.mean(a))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        lo, hi = block_bootstrap_ci(series, picky, SeededStream(3),
                                    n_boot=29, block_length=30)
    assert lo <= hi


def test_bootstrap_total_failure_warns_then_raises():
    def broken(a):
        raise DomainError("nope")

    with pytest.warns(RuntimeWarning):
        with pytest.raises(DomainError):
            block_bootstrap_ci(make_series(100), broken, SeededStream(4),
                               n_boot=9, block_length=10)


def test_bootstrap_validation():
    series = make_series(100)
    stat = lambda a: float(np.mean(a))
    with pytest.raises(DomainError):
        block_bootstrap_ci(series, stat, SeededStream(1), n_boot=1)
    with pytest.raises(DomainError):
        block_bootstrap_ci(series, stat, SeededStream(1), block_length=0)
    with pytest.raises(DomainError):
        block_bootstrap_ci(series, stat, SeededStream(1), block_length=101)
    with pytest.raises(DomainError):
        block_bootstrap_ci(series, stat, SeededStream(1), level=1.0)
    with pytest.raises(DomainError):
        block_bootstrap_ci(np.array([1.0]), stat, SeededStream(1))
