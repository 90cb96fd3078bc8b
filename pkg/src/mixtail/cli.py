"""Command-line front end.

Four subcommands: ``simulate`` (draw a series from a model config),
``estimate`` (tail index / quantile sweep over a k grid on a numeric CSV),
``mcstudy`` (replicated bias/RMSE study from a config file) and
``backtest`` (rolling return-level violations, Kupiec test, optional
ARIMA pre-whitening; or a counts-only Kupiec evaluation).

Every file-producing invocation writes a JSON manifest next to the main
output recording the resolved configuration, the seed, the backend, the
package version and SHA-256 digests of all inputs, so a run can be checked
and reproduced byte for byte (per backend).

Exit codes: 0 success, 2 usage, 3 config/parse, 4 numeric domain,
5 input/output.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import warnings

import numpy as np

from . import __version__, _backend
from ._fmt import fg17
from .backtest import (
    ArimaCoeffs,
    BacktestConfig,
    arima_residuals,
    block_bootstrap_ci,
    kupiec_test,
    return_level_transform,
    rolling_forecast,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    DomainError,
    InvalidEstimateError,
    MixtailError,
)
from .mc_study import ESTIMATORS, StudyConfig, run_study
from .tail_core import (
    CANONICAL_XI_FALLBACK,
    build_tail_sample,
    gamma_dhmz,
    gamma_optimal_unbiased,
    hill,
    quantile_dhmz,
    quantile_unbiased,
    quantile_weissman,
    select_k_rho,
)
from .tsgen import (
    SeededStream,
    generate,
    load_model_config,
    model_from_mapping,
    model_to_mapping,
    parse_config_text,
)

DEFAULT_SEED = 0

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_DOMAIN = 4
EXIT_IO = 5


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(manifest_path: str, subcommand: str, config: dict,
                    seed: int | None, inputs: list[str],
                    outputs: list[str]) -> None:
    manifest = {
        "tool": "mixtail",
        "version": __version__,
        "backend": _backend.BACKEND,
        "subcommand": subcommand,
        "seed": seed,
        "config": config,
        "inputs": {p: _sha256(p) for p in inputs},
        "outputs": outputs,
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_series(path: str, column: str | None = None) -> np.ndarray:
    """Numeric CSV reader: single column, or several with the value column
    named via ``column`` (default: the last one)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(
            cell.strip() for cell in row)]
    if not rows:
        raise ConfigError(f"{path}: no data rows")

    def _is_number(cell: str) -> bool:
        try:
            float(cell)
            return True
        except ValueError:
            return False

    header = None
    if not all(_is_number(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ConfigError(f"{path}: header but no data rows")
    if column is not None:
        if header is None:
            raise ConfigError(
                f"{path}: --column given but the file has no header"
            )
        try:
            idx = header.index(column)
        except ValueError:
            raise ConfigError(
                f"{path}: no column named {column!r} in {header}"
            ) from None
    else:
        idx = len(rows[0]) - 1
    values = np.empty(len(rows))
    for i, row in enumerate(rows):
        try:
            values[i] = float(row[idx])
        except (ValueError, IndexError) as exc:
            raise ConfigError(
                f"{path}: row {i + 1}: bad value in column {idx}: {exc}"
            ) from exc
    return values


def _neg_log_returns(prices: np.ndarray) -> np.ndarray:
    if prices.size < 2:
        raise DomainError("need at least 2 prices for returns")
    if np.any(prices <= 0.0):
        raise DomainError("prices must be positive to take log returns")
    return -np.diff(np.log(prices))


def _parse_k_grid(text: str) -> tuple[int, ...]:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(
                f"k grid range must be start:stop:step, got {text!r}"
            )
        try:
            start, stop, step = (int(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"bad k grid {text!r}: {exc}") from exc
        if step < 1:
            raise ConfigError(f"k grid step must be >= 1, got {step}")
        return tuple(range(start, stop + 1, step))
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad k grid {text!r}: {exc}") from exc


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad numeric list {text!r}: {exc}") from exc


# -- simulate -----------------------------------------------------------------

def _cmd_simulate(args) -> int:
    spec, config_seed = load_model_config(args.model)
    seed = args.seed if args.seed is not None else (
        config_seed if config_seed is not None else DEFAULT_SEED)
    series = generate(spec, args.n, SeededStream(seed))
    if args.format == "csv":
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["value"])
            for v in series:
                writer.writerow([fg17(float(v))])
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump({"values": [float(v) for v in series]}, fh)
            fh.write("\n")
    config = {"model": model_to_mapping(spec), "n": args.n,
              "format": args.format}
    _write_manifest(args.output + ".manifest.json", "simulate", config,
                    seed, [args.model], [args.output])
    return EXIT_OK


# -- estimate -----------------------------------------------------------------

def _estimate_cells(series: np.ndarray, k_grid, methods, ps, xi: float,
                    xi_flag: str):
    """One row dict per (k, method, p); failed cells carry empty values and
    a 'failed' flag."""
    rows = []
    for k in k_grid:
        try:
            sample = build_tail_sample(series, k)
        except DomainError:
            sample = None
        for method in methods:
            gamma_hat = math.nan
            flags = [xi_flag] if xi_flag else []
            if sample is not None:
                try:
                    if method == "unbiased":
                        est = gamma_optimal_unbiased(sample, xi)
                    elif method == "weissman":
                        est = hill(sample)
                    else:
                        est = gamma_dhmz(sample, xi)
                    gamma_hat = est.gamma_hat
                    flags.extend(est.flags)
                except (DomainError, InvalidEstimateError):
                    pass
            for p in ps:
                x_hat = math.nan
                if sample is not None and math.isfinite(gamma_hat):
                    try:
                        with warnings.catch_warnings():
                            warnings.simplefilter("ignore", RuntimeWarning)
                            if method == "unbiased":
                                x_hat = quantile_unbiased(sample, p, xi).x_hat
                            elif method == "weissman":
                                x_hat = quantile_weissman(sample, p).x_hat
                            else:
                                x_hat = quantile_dhmz(sample, p, xi).x_hat
                    except (DomainError, InvalidEstimateError):
                        pass
                cell_flags = list(flags)
                if not math.isfinite(x_hat):
                    cell_flags.append("failed")
                rows.append({
                    "k": int(k), "method": method, "p": p,
                    "gamma_hat": gamma_hat, "x_hat": x_hat,
                    "flags": ";".join(dict.fromkeys(cell_flags)),
                })
    return rows


def _cmd_estimate(args) -> int:
    series = _read_series(args.input, args.column)
    if args.neg_log_returns:
        series = _neg_log_returns(series)
    k_grid = _parse_k_grid(args.k_grid)
    if len(k_grid) == 0:
        raise ConfigError("empty k grid")
    if min(k_grid) < 1 or max(k_grid) > series.size - 1:
        raise DomainError(
            f"k grid must stay within [1, n-1] = [1, {series.size - 1}], "
            f"got [{min(k_grid)}, {max(k_grid)}]"
        )
    ps = _parse_float_list(args.p)
    for p in ps:
        if not 0.0 < p < 1.0:
            raise DomainError(f"need 0 < p < 1, got {p}")
    # 'hill' is accepted as an alias: its quantile extrapolation is the
    # plain one and its gamma column is the plain log-spacing mean
    methods = tuple("weissman" if m == "hill" else m
                    for m in args.methods.split(","))
    bad = set(methods) - set(ESTIMATORS)
    if bad:
        raise ConfigError(f"unknown methods: {sorted(bad)}")
    if not (series > 0.0).any():
        raise DomainError("series has no positive observations")

    rho_hat, k_rho = math.nan, 0
    if args.xi == "auto":
        so = select_k_rho(series)
        if so.valid:
            xi, xi_flag = so.rho_hat, ""
            rho_hat, k_rho = so.rho_hat, so.k_rho
        else:
            xi, xi_flag = args.canonical_xi, CANONICAL_XI_FALLBACK
    else:
        try:
            xi = float(args.xi)
        except ValueError as exc:
            raise ConfigError(
                f"--xi must be 'auto' or a negative number, got {args.xi!r}"
            ) from exc
        xi_flag = ""
        rho_hat = xi
    if not xi < 0:
        raise DomainError(f"xi must be negative, got {xi}")

    rows = _estimate_cells(series, k_grid, methods, ps, xi, xi_flag)

    ci_lo = ci_hi = None
    if args.ci:
        stream = SeededStream(args.seed if args.seed is not None
                              else DEFAULT_SEED)

        def evaluate(resample: np.ndarray) -> np.ndarray:
            cells = _estimate_cells(resample, k_grid, methods, ps, xi,
                                    xi_flag)
            return np.array([c["x_hat"] for c in cells])

        ci_lo, ci_hi = _bootstrap_cells(series, evaluate, stream,
                                        args.ci_n_boot, args.ci_block_length,
                                        args.ci_level)

    header = ["k", "method", "p", "gamma_hat", "x_hat", "rho_hat", "k_rho",
              "flags"]
    if args.ci:
        header += ["ci_lo", "ci_hi"]
    if args.format == "csv":
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i, row in enumerate(rows):
                out = [row["k"], row["method"], fg17(row["p"]),
                       fg17(row["gamma_hat"]), fg17(row["x_hat"]),
                       fg17(rho_hat), k_rho, row["flags"]]
                if args.ci:
                    out += [fg17(float(ci_lo[i])), fg17(float(ci_hi[i]))]
                writer.writerow(out)
    else:
        def clean(v):
            return None if (isinstance(v, float) and math.isnan(v)) else v

        obj = []
        for i, row in enumerate(rows):
            rec = {**row, "gamma_hat": clean(row["gamma_hat"]),
                   "x_hat": clean(row["x_hat"]), "rho_hat": clean(rho_hat),
                   "k_rho": k_rho}
            if args.ci:
                rec["ci_lo"] = clean(float(ci_lo[i]))
                rec["ci_hi"] = clean(float(ci_hi[i]))
            obj.append(rec)
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")

    config = {
        "input": args.input, "neg_log_returns": bool(args.neg_log_returns),
        "k_grid": list(k_grid), "p": list(ps), "methods": list(methods),
        "xi": args.xi, "canonical_xi": args.canonical_xi,
        "ci": bool(args.ci), "format": args.format,
    }
    if args.ci:
        config.update({"ci_n_boot": args.ci_n_boot,
                       "ci_block_length": args.ci_block_length,
                       "ci_level": args.ci_level})
    _write_manifest(args.output + ".manifest.json", "estimate", config,
                    args.seed, [args.input], [args.output])
    return EXIT_OK


def _bootstrap_cells(series: np.ndarray, evaluate, stream: SeededStream,
                     n_boot: int, block_length: int, level: float):
    """Vector version of the percentile block bootstrap: one resample feeds
    every cell, NaN cells drop out of their own order statistics."""
    x = np.asarray(series, dtype=np.float64)
    n = x.size
    if not 1 <= block_length <= n:
        raise DomainError(f"need 1 <= block_length <= {n}, got {block_length}")
    rng = stream.generator()
    n_blocks = -(-n // block_length)
    offsets = np.arange(block_length)
    samples = []
    for _ in range(n_boot):
        starts = rng.integers(0, n, size=n_blocks)
        idx = ((starts[:, None] + offsets[None, :]) % n).ravel()[:n]
        samples.append(evaluate(x[idx]))
    mat = np.vstack(samples)  # (n_boot, n_cells)
    alpha = 1.0 - level
    lo = np.full(mat.shape[1], np.nan)
    hi = np.full(mat.shape[1], np.nan)
    for j in range(mat.shape[1]):
        col = np.sort(mat[np.isfinite(mat[:, j]), j])
        b = col.size
        if b == 0:
            continue
        lo_rank = max(1, min(b, math.ceil((b + 1) * alpha / 2.0)))
        hi_rank = max(1, min(b, math.floor((b + 1) * (1.0 - alpha / 2.0))))
        lo[j] = col[lo_rank - 1]
        hi[j] = col[hi_rank - 1]
    return lo, hi


# -- mcstudy ------------------------------------------------------------------

_STUDY_KEYS = ("n", "replications", "p", "k_grid", "estimators", "x_p_true",
               "canonical_xi", "threads", "seed")


def _cmd_mcstudy(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        mapping = parse_config_text(fh.read())
    study_part = {k: mapping.pop(k) for k in list(mapping)
                  if k in _STUDY_KEYS}
    model = model_from_mapping(mapping)
    for key in ("n", "replications", "p", "x_p_true"):
        if key not in study_part:
            raise ConfigError(f"mcstudy config needs {key!r}")
    seed = args.seed if args.seed is not None else int(
        study_part.get("seed", DEFAULT_SEED))
    k_grid = study_part.get("k_grid")
    if isinstance(k_grid, str):
        k_grid = _parse_k_grid(k_grid)
    elif k_grid is not None:
        k_grid = tuple(int(k) for k in np.atleast_1d(k_grid))
    estimators = study_part.get("estimators")
    if isinstance(estimators, str):
        estimators = tuple(estimators.split(","))
    elif estimators is not None:
        estimators = tuple(str(e) for e in np.atleast_1d(estimators))
    replications = int(study_part["replications"])
    if args.max_replications is not None:
        replications = min(replications, args.max_replications)
    kwargs = {}
    if k_grid is not None:
        kwargs["k_grid"] = k_grid
    if estimators is not None:
        kwargs["estimators"] = estimators
    if "canonical_xi" in study_part:
        kwargs["canonical_xi"] = float(study_part["canonical_xi"])
    config = StudyConfig(
        model=model,
        n=int(study_part["n"]),
        replications=replications,
        p=float(study_part["p"]),
        x_p_true=float(study_part["x_p_true"]),
        seed=seed,
        threads=args.threads,
        **kwargs,
    )
    result = run_study(config)
    if args.format == "csv":
        result.write_csv(args.output)
    else:
        result.write_json(args.output)
    manifest_config = {
        "model": model_to_mapping(model),
        "n": config.n, "replications": config.replications, "p": config.p,
        "x_p_true": config.x_p_true, "k_grid": list(config.k_grid),
        "estimators": list(config.estimators),
        "canonical_xi": config.canonical_xi, "threads": config.threads,
        "format": args.format,
    }
    _write_manifest(args.output + ".manifest.json", "mcstudy",
                    manifest_config, seed, [args.config], [args.output])
    return EXIT_OK


# -- backtest -----------------------------------------------------------------

def _parse_arima(text: str) -> ArimaCoeffs:
    fields = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        if not value:
            raise ConfigError(
                f"--arima expects phi1=..,theta1=.., got {text!r}"
            )
        fields[key.strip()] = float(value)
    if set(fields) != {"phi1", "theta1"}:
        raise ConfigError(
            f"--arima needs exactly phi1 and theta1, got {sorted(fields)}"
        )
    return ArimaCoeffs(phi1=fields["phi1"], theta1=fields["theta1"])


def _cmd_backtest(args) -> int:
    if args.counts is not None:
        try:
            n_txt, x_txt = args.counts.split(",")
            n_fc, n_viol = int(n_txt), int(x_txt)
        except ValueError as exc:
            raise ConfigError(
                f"--counts expects N,X integers, got {args.counts!r}"
            ) from exc
        lr, pvalue = kupiec_test(n_fc, n_viol, args.p)
        obj = {"n_forecasts": n_fc, "n_violations": n_viol, "p": args.p,
               "expected_violations": n_fc * args.p,
               "kupiec_lr": lr, "kupiec_pvalue": pvalue}
        text = json.dumps(obj, indent=2) + "\n"
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
            _write_manifest(args.output + ".manifest.json", "backtest",
                            {"counts": args.counts, "p": args.p}, args.seed,
                            [], [args.output])
        else:
            sys.stdout.write(text)
        return EXIT_OK

    for name in ("input", "window", "horizon", "k", "output"):
        if getattr(args, name) is None:
            raise ConfigError(f"backtest needs --{name.replace('_', '-')}")
    series = _read_series(args.input, args.column)
    if args.neg_log_returns:
        series = _neg_log_returns(series)
    config = BacktestConfig(
        window=args.window, horizon_points=args.horizon, p=args.p, k=args.k,
        method=args.method, xi_policy=args.xi_policy,
        canonical_xi=args.canonical_xi,
    )
    coeffs = _parse_arima(args.arima) if args.arima else None
    if coeffs is None:
        report = rolling_forecast(series, config)
        rows = list(report.rows())
    else:
        resid = arima_residuals(series, coeffs)
        report = rolling_forecast(resid, config)
        rows = []
        for t in range(report.forecasts.size):
            te = report.start_index + t  # residual-scale index
            tx = te + 2  # observation-scale index
            r_e = report.forecasts[t]
            if math.isfinite(r_e):
                r_x = return_level_transform(
                    r_e, float(resid[te - 1]), float(series[tx - 1]),
                    float(series[tx - 2]), coeffs)
            else:
                r_x = math.nan
            rows.append({
                "time": tx,
                "forecast": r_x,
                "realized": float(series[tx]),
                "violation": bool(report.violations[t]),
                "forecast_resid": float(r_e),
                "realized_resid": float(report.realized[t]),
            })

    json_obj = report.to_json_obj()
    if coeffs is not None:
        json_obj["arima"] = {"phi1": coeffs.phi1, "theta1": coeffs.theta1}

    if args.ci_n_boot:
        stream = SeededStream(args.seed if args.seed is not None
                              else DEFAULT_SEED)
        base = resid if coeffs is not None else series
        final_window = base[base.size - config.horizon_points
                            - config.window: base.size
                            - config.horizon_points]

        def stat(resample: np.ndarray) -> float:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                return _final_quantile(resample, config)

        lo, hi = block_bootstrap_ci(
            final_window, stat, stream, n_boot=args.ci_n_boot,
            block_length=args.ci_block_length, level=args.ci_level)
        json_obj["final_quantile_ci"] = [lo, hi]

    base_out = args.output
    json_path, csv_path = base_out + ".json", base_out + ".csv"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(json_obj, fh, indent=2)
        fh.write("\n")
    fieldnames = list(rows[0].keys()) if rows else ["time", "forecast",
                                                    "realized", "violation"]
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            out = []
            for f in fieldnames:
                if f == "time":
                    out.append(row[f])
                elif f == "violation":
                    out.append(int(row[f]))
                else:
                    out.append(fg17(row[f]))
            writer.writerow(out)

    manifest_config = {
        "window": config.window, "horizon_points": config.horizon_points,
        "p": config.p, "k": config.k, "method": config.method,
        "xi_policy": config.xi_policy, "canonical_xi": config.canonical_xi,
        "neg_log_returns": bool(args.neg_log_returns),
    }
    if coeffs is not None:
        manifest_config["arima"] = {"phi1": coeffs.phi1,
                                    "theta1": coeffs.theta1}
    if args.ci_n_boot:
        manifest_config.update({"ci_n_boot": args.ci_n_boot,
                                "ci_block_length": args.ci_block_length,
                                "ci_level": args.ci_level})
    _write_manifest(base_out + ".manifest.json", "backtest", manifest_config,
                    args.seed, [args.input], [json_path, csv_path])
    return EXIT_OK


def _final_quantile(window: np.ndarray, config: BacktestConfig) -> float:
    sample = build_tail_sample(window, config.k)
    if config.method == "weissman":
        return quantile_weissman(sample, config.p).x_hat
    so = select_k_rho(window)
    xi = so.rho_hat if (config.xi_policy == "rho_hat" and so.valid) \
        else config.canonical_xi
    if config.method == "unbiased":
        return quantile_unbiased(sample, config.p, xi).x_hat
    return quantile_dhmz(sample, config.p, xi).x_hat


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixtail",
        description="Tail index and extreme quantile estimation for "
                    "heavy-tailed dependent series",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sim = sub.add_parser("simulate", help="draw a series from a model")
    p_sim.add_argument("--model", required=True,
                       help="model config file (key=value or JSON)")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--output", required=True)
    p_sim.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sim.set_defaults(func=_cmd_simulate)

    p_est = sub.add_parser("estimate", help="tail index / quantile sweep")
    p_est.add_argument("--input", required=True, help="numeric CSV")
    p_est.add_argument("--column", default=None)
    p_est.add_argument("--neg-log-returns", action="store_true")
    p_est.add_argument("--k-grid", required=True,
                       help="start:stop:step or comma list")
    p_est.add_argument("--p", required=True, help="comma list of tail "
                       "probabilities")
    p_est.add_argument("--methods", default=",".join(ESTIMATORS))
    p_est.add_argument("--xi", default="auto",
                       help="'auto' (scan, canonical fallback) or a "
                       "negative number")
    p_est.add_argument("--canonical-xi", type=float, default=-1.0)
    p_est.add_argument("--ci", action="store_true",
                       help="attach block-bootstrap bands per cell")
    p_est.add_argument("--ci-n-boot", type=int, default=99)
    p_est.add_argument("--ci-block-length", type=int, default=200)
    p_est.add_argument("--ci-level", type=float, default=0.95)
    p_est.add_argument("--seed", type=int, default=None)
    p_est.add_argument("--output", required=True)
    p_est.add_argument("--format", choices=("csv", "json"), default="csv")
    p_est.set_defaults(func=_cmd_estimate)

    p_mc = sub.add_parser("mcstudy", help="replicated bias/RMSE study")
    p_mc.add_argument("--config", required=True,
                      help="flat config: model fields plus n, replications, "
                      "p, x_p_true, k_grid, estimators, seed")
    p_mc.add_argument("--seed", type=int, default=None)
    p_mc.add_argument("--threads", type=int, default=1)
    p_mc.add_argument("--max-replications", type=int, default=None,
                      help="budget cap on the replication count")
    p_mc.add_argument("--output", required=True)
    p_mc.add_argument("--format", choices=("csv", "json"), default="csv")
    p_mc.set_defaults(func=_cmd_mcstudy)

    p_bt = sub.add_parser("backtest", help="rolling return-level backtest")
    p_bt.add_argument("--input", default=None, help="numeric CSV")
    p_bt.add_argument("--column", default=None)
    p_bt.add_argument("--neg-log-returns", action="store_true")
    p_bt.add_argument("--counts", default=None,
                      help="N,X: skip forecasting, test the counts directly")
    p_bt.add_argument("--window", type=int, default=None)
    p_bt.add_argument("--horizon", type=int, default=None)
    p_bt.add_argument("--p", type=float, required=True)
    p_bt.add_argument("--k", type=int, default=None)
    p_bt.add_argument("--method", choices=ESTIMATORS, default="unbiased")
    p_bt.add_argument("--xi-policy", choices=("rho_hat", "canonical"),
                      default="rho_hat")
    p_bt.add_argument("--canonical-xi", type=float, default=-1.0)
    p_bt.add_argument("--arima", default=None,
                      help="phi1=..,theta1=..: pre-whiten, forecast "
                      "residuals, map levels back")
    p_bt.add_argument("--ci-n-boot", type=int, default=0,
                      help="bootstrap CI on the final-window quantile "
                      "(0 = off)")
    p_bt.add_argument("--ci-block-length", type=int, default=200)
    p_bt.add_argument("--ci-level", type=float, default=0.95)
    p_bt.add_argument("--seed", type=int, default=None)
    p_bt.add_argument("--output", default=None,
                      help="base path; writes .json, .csv and the manifest")
    p_bt.set_defaults(func=_cmd_backtest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"mixtail: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, InvalidEstimateError, BudgetExceededError) as exc:
        print(f"mixtail: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except MixtailError as exc:
        print(f"mixtail: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"mixtail: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
