import csv
import hashlib
import json
import math
import os

import numpy as np
import pytest

from mixtail.backtest import ArimaCoeffs, arima_residuals, return_level_transform
from mixtail.cli import main
from mixtail.tsgen import InnovationLaw, SeededStream, generate, iid_model

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")
AR1_CONF = os.path.join(FIXTURE_DIR, "ar1_frechet.conf")

E = math.e


def write_value_csv(path, values, header=("value",)):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for v in values:
            writer.writerow([repr(float(v))])


def read_csv_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- estimate on a tiny exact ladder -------------------------------------------

def test_estimate_geometric_ladder(tmp_path, capsys):
    inp = tmp_path / "ladder.csv"
    out = tmp_path / "est.csv"
    write_value_csv(inp, [1.0, E, E**2, E**3])
    rc = main(["estimate", "--input", str(inp), "--k-grid", "2",
               "--p", "0.1", "--methods", "weissman", "--xi", "-1",
               "--output", str(out)])
    assert rc == 0
    rows = read_csv_rows(out)
    assert len(rows) == 1
    row = rows[0]
    assert row["k"] == "2"
    assert row["method"] == "weissman"
    # log-spacing mean over the top two points: (2 + 1)/2
    assert float(row["gamma_hat"]) == pytest.approx(1.5, rel=1e-14)
    # threshold e, extrapolation ratio k/(n p) = 5
    assert float(row["x_hat"]) == pytest.approx(E * 5.0**1.5, rel=1e-13)
    assert float(row["rho_hat"]) == -1.0
    assert row["k_rho"] == "0"
    # the manifest sits next to the output and hashes the input
    with open(str(out) + ".manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["tool"] == "mixtail"
    assert manifest["subcommand"] == "estimate"
    with open(inp, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    assert manifest["inputs"][str(inp)] == digest


def test_estimate_hill_alias_and_shared_rho(tmp_path):
    inp = tmp_path / "series.csv"
    out = tmp_path / "est.csv"
    series = np.abs(generate(iid_model(InnovationLaw.frechet_mixture(0.75)),
                             2000, SeededStream(21))) + 1e-9
    write_value_csv(inp, series)
    rc = main(["estimate", "--input", str(inp), "--k-grid", "100:200:50",
               "--p", "0.01,0.001", "--methods", "unbiased,hill,dhmz",
               "--output", str(out)])
    assert rc == 0
    rows = read_csv_rows(out)
    # 3 k values x 3 methods x 2 probabilities
    assert len(rows) == 18
    assert {r["method"] for r in rows} == {"unbiased", "weissman", "dhmz"}
    rhos = {r["rho_hat"] for r in rows}
    assert len(rhos) == 1
    assert float(rhos.pop()) < 0.0
    k_rho = int(rows[0]["k_rho"])
    assert k_rho >= 4
    for row in rows:
        assert float(row["gamma_hat"]) > 0.0
        assert float(row["x_hat"]) > 0.0


def test_estimate_json_format_and_ci(tmp_path):
    inp = tmp_path / "series.csv"
    out = tmp_path / "est.json"
    series = np.abs(generate(iid_model(InnovationLaw.frechet_mixture(0.75)),
                             600, SeededStream(22))) + 1e-9
    write_value_csv(inp, series)
    rc = main(["estimate", "--input", str(inp), "--k-grid", "50,100",
               "--p", "0.01", "--methods", "weissman", "--xi", "-1",
               "--ci", "--ci-n-boot", "9", "--ci-block-length", "50",
               "--seed", "5", "--format", "json", "--output", str(out)])
    assert rc == 0
    with open(out) as fh:
        cells = json.load(fh)
    assert len(cells) == 2
    for cell in cells:
        assert cell["method"] == "weissman"
        assert cell["ci_lo"] <= cell["ci_hi"]
        assert cell["x_hat"] > 0.0


NEGATIVE_EXITS = [
    (["--k-grid", "100:600:100", "--p", "0.01"], 4, "k grid"),
    (["--k-grid", "2,3", "--p", "1.5"], 4, "0 < p < 1"),
    (["--k-grid", "2,3", "--p", "0.01", "--methods", "mle"], 3, "mle"),
    (["--k-grid", "5:4:1", "--p", "0.01"], 3, "empty k grid"),
    (["--k-grid", "two", "--p", "0.01"], 3, "bad k grid"),
    (["--k-grid", "2,3", "--p", "0.01", "--xi", "0.5"], 4, "negative"),
]


@pytest.mark.parametrize("extra,code,needle", NEGATIVE_EXITS)
def test_estimate_rejects_bad_requests(tmp_path, capsys, extra, code, needle):
    inp = tmp_path / "series.csv"
    write_value_csv(inp, np.arange(1.0, 101.0))
    rc = main(["estimate", "--input", str(inp), "--output",
               str(tmp_path / "out.csv")] + extra)
    assert rc == code
    assert needle in capsys.readouterr().err


def test_estimate_requires_positive_observations(tmp_path, capsys):
    inp = tmp_path / "neg.csv"
    write_value_csv(inp, -np.arange(1.0, 31.0))
    rc = main(["estimate", "--input", str(inp), "--k-grid", "2,3",
               "--p", "0.01", "--output", str(tmp_path / "out.csv")])
    assert rc == 4
    assert "positive" in capsys.readouterr().err


def test_estimate_missing_input_is_io_error(tmp_path, capsys):
    rc = main(["estimate", "--input", str(tmp_path / "absent.csv"),
               "--k-grid", "2", "--p", "0.1",
               "--output", str(tmp_path / "out.csv")])
    assert rc == 5
    assert "i/o error" in capsys.readouterr().err


def test_usage_errors_exit_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["estimate", "--k-grid", "2", "--p", "0.1",
              "--output", str(tmp_path / "o.csv")])  # no --input
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_version_flag_exits_cleanly():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


# -- simulate -------------------------------------------------------------------

def test_simulate_is_byte_deterministic(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    for out in (out1, out2):
        rc = main(["simulate", "--model", AR1_CONF, "--n", "50",
                   "--seed", "3", "--output", str(out)])
        assert rc == 0
    assert out1.read_bytes() == out2.read_bytes()
    rows = read_csv_rows(out1)
    assert len(rows) == 50
    # 17 significant digits round-trip through the public generator
    direct = generate(*_fixture_model(), 50, SeededStream(3))
    assert [float(r["value"]) for r in rows] == [float(v) for v in direct]


def _fixture_model():
    from mixtail.tsgen import load_model_config
    spec, _ = load_model_config(AR1_CONF)
    return (spec,)


def test_simulate_json_and_manifest(tmp_path):
    out = tmp_path / "sim.json"
    rc = main(["simulate", "--model", AR1_CONF, "--n", "5", "--seed", "11",
               "--format", "json", "--output", str(out)])
    assert rc == 0
    with open(out) as fh:
        obj = json.load(fh)
    assert len(obj["values"]) == 5
    with open(str(out) + ".manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["seed"] == 11
    assert manifest["backend"] in ("cython", "python")
    assert manifest["config"]["model"]["kind"] == "ar1"
    assert manifest["outputs"] == [str(out)]


def test_simulate_rejects_unknown_config_key(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("kind = ar1\ntheta = 0.3\n"
                    "innovation = frechet_mixture\narmor = 3\n")
    rc = main(["simulate", "--model", str(conf), "--n", "5",
               "--output", str(tmp_path / "o.csv")])
    assert rc == 3
    assert "armor" in capsys.readouterr().err


# -- fixture model end to end ----------------------------------------------------

@pytest.mark.parametrize("seed", [0, 1, 2])
def test_fixture_model_tail_index_near_one(tmp_path, seed):
    """Simulated positive-tail index of the bundled dependent model sits
    within three standard errors of 1 at an intermediate k."""
    sim = tmp_path / "sim.csv"
    est = tmp_path / "est.csv"
    rc = main(["simulate", "--model", AR1_CONF, "--n", "5000",
               "--seed", str(seed), "--output", str(sim)])
    assert rc == 0
    rc = main(["estimate", "--input", str(sim), "--k-grid", "200",
               "--p", "0.001", "--methods", "weissman", "--xi", "-1",
               "--output", str(est)])
    assert rc == 0
    gamma = float(read_csv_rows(est)[0]["gamma_hat"])
    # dependence-adjusted standard error sqrt(13/7 / 200) times three
    assert abs(gamma - 1.0) < 3.0 * math.sqrt(13.0 / 7.0 / 200.0)


def test_neg_log_returns_pipeline(tmp_path):
    z = generate(iid_model(InnovationLaw.frechet_mixture(0.75)), 400,
                 SeededStream(30))
    # damp the random walk so the exponential stays inside double range
    prices = np.exp(-np.cumsum(z) / 10.0)
    inp = tmp_path / "prices.csv"
    with open(inp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "value"])
        for t, v in enumerate(prices):
            writer.writerow([t, repr(float(v))])
    out = tmp_path / "est.csv"
    rc = main(["estimate", "--input", str(inp), "--column", "value",
               "--neg-log-returns", "--k-grid", "40", "--p", "0.01",
               "--methods", "weissman", "--xi", "-1", "--output", str(out)])
    assert rc == 0
    assert float(read_csv_rows(out)[0]["gamma_hat"]) > 0.0
    rc = main(["estimate", "--input", str(inp), "--column", "price",
               "--neg-log-returns", "--k-grid", "40", "--p", "0.01",
               "--output", str(out)])
    assert rc == 3


# -- mcstudy ----------------------------------------------------------------------

MC_CONF = """\
kind = iid
innovation = frechet_mixture
q = 0.75
n = 400
replications = 4
p = 0.01
x_p_true = 74.499
k_grid = 40,80
seed = 9
"""


def test_mcstudy_smoke_and_reproducibility(tmp_path):
    conf = tmp_path / "study.conf"
    conf.write_text(MC_CONF)
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    for out in (out1, out2):
        rc = main(["mcstudy", "--config", str(conf), "--output", str(out)])
        assert rc == 0
    assert out1.read_bytes() == out2.read_bytes()
    rows = read_csv_rows(out1)
    assert len(rows) == 6  # 3 estimators x 2 grid points
    for row in rows:
        if row["abias"] == "":
            continue
        assert float(row["rmse"]) >= float(row["abias"])
    with open(str(out1) + ".manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["seed"] == 9
    assert manifest["config"]["replications"] == 4


def test_mcstudy_replication_cap(tmp_path):
    conf = tmp_path / "study.conf"
    conf.write_text(MC_CONF)
    out = tmp_path / "capped.csv"
    rc = main(["mcstudy", "--config", str(conf), "--max-replications", "2",
               "--output", str(out)])
    assert rc == 0
    with open(str(out) + ".manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["config"]["replications"] == 2


def test_mcstudy_missing_key(tmp_path, capsys):
    conf = tmp_path / "study.conf"
    conf.write_text(MC_CONF.replace("x_p_true = 74.499\n", ""))
    rc = main(["mcstudy", "--config", str(conf),
               "--output", str(tmp_path / "o.csv")])
    assert rc == 3
    assert "x_p_true" in capsys.readouterr().err


# -- backtest ---------------------------------------------------------------------

def test_backtest_counts_mode_prints_json(capsys):
    rc = main(["backtest", "--counts", "400,7", "--p", "0.01"])
    assert rc == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["kupiec_pvalue"] == pytest.approx(0.17292449371829166,
                                                 rel=1e-15)
    assert obj["n_forecasts"] == 400
    assert obj["expected_violations"] == pytest.approx(4.0)


def test_backtest_counts_malformed(capsys):
    rc = main(["backtest", "--counts", "400;7", "--p", "0.01"])
    assert rc == 3
    assert "N,X" in capsys.readouterr().err


def test_backtest_known_violations(tmp_path):
    inp = tmp_path / "series.csv"
    write_value_csv(inp, [1.0, 2.0, 3.0, 4.0, 5.0, 1.0, 10.0])
    base = tmp_path / "bt"
    rc = main(["backtest", "--input", str(inp), "--window", "4",
               "--horizon", "3", "--k", "2", "--p", "0.5",
               "--method", "weissman", "--output", str(base)])
    assert rc == 0
    with open(str(base) + ".json") as fh:
        obj = json.load(fh)
    # extrapolation ratio is exactly 1, so each forecast equals the window
    # threshold: 2, 3, 3 against realized 5, 1, 10
    assert obj["violations"] == [4, 6]
    assert obj["n_violations"] == 2
    assert obj["n_forecasts"] == 3
    rows = read_csv_rows(str(base) + ".csv")
    assert [r["time"] for r in rows] == ["4", "5", "6"]
    assert [float(r["forecast"]) for r in rows] == pytest.approx(
        [2.0, 3.0, 3.0], rel=1e-12)
    assert [r["violation"] for r in rows] == ["1", "0", "1"]


def test_backtest_arima_writes_both_scales(tmp_path):
    z = generate(iid_model(InnovationLaw.frechet_mixture(0.75)), 120,
                 SeededStream(44))
    series = np.cumsum(z) + 100.0
    inp = tmp_path / "levels.csv"
    write_value_csv(inp, series)
    base = tmp_path / "bt"
    rc = main(["backtest", "--input", str(inp), "--window", "100",
               "--horizon", "6", "--k", "15", "--p", "0.1",
               "--method", "weissman", "--arima", "phi1=0.3,theta1=-0.5",
               "--output", str(base)])
    assert rc == 0
    rows = read_csv_rows(str(base) + ".csv")
    assert list(rows[0].keys()) == ["time", "forecast", "realized",
                                    "violation", "forecast_resid",
                                    "realized_resid"]
    coeffs = ArimaCoeffs(phi1=0.3, theta1=-0.5)
    resid = arima_residuals(series, coeffs)
    for row in rows:
        tx = int(row["time"])
        te = tx - 2
        assert float(row["realized"]) == float(series[tx])
        assert float(row["realized_resid"]) == pytest.approx(
            float(resid[te]), rel=1e-15)
        if row["forecast"] == "":
            continue
        back = return_level_transform(
            float(row["forecast_resid"]), float(resid[te - 1]),
            float(series[tx - 1]), float(series[tx - 2]), coeffs)
        assert float(row["forecast"]) == pytest.approx(back, rel=1e-12)
    with open(str(base) + ".json") as fh:
        obj = json.load(fh)
    assert obj["arima"] == {"phi1": 0.3, "theta1": -0.5}


def test_backtest_requires_rolling_flags(capsys):
    rc = main(["backtest", "--p", "0.1"])
    assert rc == 3
    assert "--input" in capsys.readouterr().err
