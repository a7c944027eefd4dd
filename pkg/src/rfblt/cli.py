"""Command-line interface: simulate, fit, forecast, evaluate.

Every run resolves its configuration (defaults, then an optional JSON
config file, then explicit flags), performs all computation in memory, and
only then writes its outputs, each file via write-to-temp plus atomic
rename, together with a ``manifest.json`` capturing the fully resolved
config, the seed, and the artifact version. Re-running a subcommand with
``--config manifest.json`` reproduces every output byte-for-byte.

Exit codes: 0 success, 1 validation (bad flags, config, or input files),
2 runtime failure during computation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ComputationError, ConfigError, ValidationError
from .evaluation import (
    ExpandingWindowPlan,
    holt_fit_forecast,
    run_expanding_window,
)
from .features import DistributionSpec, feature_map_text
from .forecaster import fit, forecast
from .gibbs import GibbsConfig, draws_csv_text
from .series import TimeSeries, load_series_csv
from .sueir import NoiseSpec, SueirParams, generate_ensemble

SIMULATE_DEFAULTS = {
    "beta": 3.0 / 14.0, "sigma": 0.25, "gamma": 1.0 / 14.0, "mu": 0.75,
    "s0": 1e6, "e0": 0.0, "i0": 1.0, "r0": 0.0,
    "t_end": 180.0, "dt_out": 1.0,
    "noise": 0.1, "per_point": True, "count": 1, "seed": 0,
}

_MODEL_DEFAULTS = {
    "features": None, "samples": 2000, "burn_in": 1000, "thin": 5,
    "prior": "lasso", "activation": "fourier", "smoothing": 7,
    "weight_dist": "normal", "bias_dist": "uniform",
    "normalize": False, "seed": 0,
}

FIT_DEFAULTS = {"input": None, "m": 9, "mode": "rfblt", **_MODEL_DEFAULTS}

FORECAST_DEFAULTS = {
    "input": None, "m": 9, "mode": "rfblt", "horizon": 7, "alpha": 0.05,
    "sample_paths": False, **_MODEL_DEFAULTS,
}

# For evaluate, "m" is the first training size of the expanding window;
# the model's embedding dimension is "embed_dim".
EVALUATE_DEFAULTS = {
    "input": None, "m": None, "horizon": 7, "method": "rfblt",
    "alpha": 0.05, "embed_dim": 9, **_MODEL_DEFAULTS,
}

DEFAULTS = {
    "simulate": SIMULATE_DEFAULTS,
    "fit": FIT_DEFAULTS,
    "forecast": FORECAST_DEFAULTS,
    "evaluate": EVALUATE_DEFAULTS,
}


@dataclass(frozen=True)
class RunConfig:
    """A resolved run: subcommand, full option map, output directory."""

    subcommand: str
    config: dict
    output_dir: Path


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; bad flags are a validation
    # problem here, so surface them as ConfigError instead.
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rfblt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--output-dir", required=True)
        p.add_argument("--config", help="JSON config or a prior manifest.json")
        p.add_argument("--seed", type=int)

    p_sim = sub.add_parser("simulate", description="Write benchmark "
                           "epidemic-proportion trajectories.")
    common(p_sim)
    p_sim.add_argument("--count", type=int)
    p_sim.add_argument("--noise", type=float)

    def model_flags(p, with_horizon):
        p.add_argument("--input", help="series CSV (time,value)")
        p.add_argument("--m", type=int)
        p.add_argument("--features", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--burn-in", dest="burn_in", type=int)
        p.add_argument("--thin", type=int)
        p.add_argument("--activation")
        p.add_argument("--normalize", action=argparse.BooleanOptionalAction,
                       default=None)
        p.add_argument("--smoothing",
                       help="moving-average level, or 'none' for pass-through")
        p.add_argument("--prior", choices=("ridge", "lasso"))
        p.add_argument("--weight-dist", dest="weight_dist")
        p.add_argument("--bias-dist", dest="bias_dist")
        if with_horizon:
            p.add_argument("--horizon", type=int)
            p.add_argument("--alpha", type=float)

    p_fit = sub.add_parser("fit", description="Fit a model and export its "
                           "posterior draws and feature map.")
    common(p_fit)
    model_flags(p_fit, with_horizon=False)
    p_fit.add_argument("--mode", choices=("rfblt", "rfbl"))

    p_fc = sub.add_parser("forecast", description="Fit and produce an "
                          "h-step credible-interval forecast.")
    common(p_fc)
    model_flags(p_fc, with_horizon=True)
    p_fc.add_argument("--mode", choices=("rfblt", "rfbl"))
    p_fc.add_argument("--sample-paths", dest="sample_paths",
                      action=argparse.BooleanOptionalAction, default=None)

    p_ev = sub.add_parser("evaluate", description="Expanding-window "
                          "backtest; here --m is the first training size.")
    common(p_ev)
    model_flags(p_ev, with_horizon=True)
    p_ev.add_argument("--method", choices=("rfblt", "rfbl", "holt"))
    p_ev.add_argument("--embed-dim", dest="embed_dim", type=int)
    return parser


def _load_config_file(path: str, subcommand: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    if "config" in raw and "subcommand" in raw:  # a prior manifest
        if raw["subcommand"] != subcommand:
            raise ConfigError(
                f"{path} is a manifest for '{raw['subcommand']}', "
                f"not '{subcommand}'"
            )
        raw = raw["config"]
    return raw


# accepted spellings in config files, normalized before validation
_CONFIG_ALIASES = {"h": "horizon"}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """defaults <- config file <- explicit flags, validated key-by-key."""
    sub = args.subcommand
    config = dict(DEFAULTS[sub])
    if args.config:
        loaded = _load_config_file(args.config, sub)
        for key, value in loaded.items():
            key = _CONFIG_ALIASES.get(key, key)
            if key not in config:
                raise ConfigError(f"unknown config key {key!r} for '{sub}'")
            config[key] = value
    skip = {"subcommand", "output_dir", "config"}
    for key, value in vars(args).items():
        if key in skip or value is None:
            continue
        config[key] = value
    if "smoothing" in config:
        config["smoothing"] = _parse_smoothing(config["smoothing"])
    return RunConfig(sub, config, Path(args.output_dir))


def _parse_smoothing(value):
    if value is None or value == "none":
        return None
    try:
        s = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"smoothing must be an int or 'none', got {value!r}")
    if s < 1:
        raise ConfigError("smoothing level must be >= 1")
    return s


def _parse_dist(text) -> DistributionSpec:
    """'normal' or 'family:p1,p2' -> DistributionSpec."""
    if isinstance(text, (list, tuple)):
        return DistributionSpec(text[0], tuple(text[1:]))
    family, _, params = str(text).partition(":")
    if params:
        return DistributionSpec(family, tuple(float(p) for p in params.split(",")))
    return DistributionSpec(family)


# -- output helpers ------------------------------------------------------------

def _fmt(value) -> str:
    return repr(float(value))


def _series_csv(series: TimeSeries) -> str:
    lines = ["time,value"]
    lines += [f"{_fmt(t)},{_fmt(v)}"
              for t, v in zip(series.times, series.values)]
    return "\n".join(lines) + "\n"


def _table_csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(cells) for cells in rows]
    return "\n".join(lines) + "\n"


def _manifest_text(run: RunConfig) -> str:
    payload = {"subcommand": run.subcommand, "version": __version__,
               "config": run.config}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _write_outputs(outdir: Path, files: dict[str, str]) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for relpath, text in files.items():
        path = outdir / relpath
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)


def _require_input(config: dict) -> TimeSeries:
    if not config.get("input"):
        raise ConfigError("an input series CSV is required (--input)")
    return load_series_csv(config["input"])


def _fit_from_config(series: TimeSeries, config: dict, mode: str,
                     embed_key: str = "m"):
    cfg = GibbsConfig(n_samples=config["samples"], burn_in=config["burn_in"],
                      thin=config["thin"], seed=config["seed"],
                      prior=config["prior"])
    return fit(
        series,
        embed_dim=config[embed_key],
        n_features=config["features"],
        smoothing=config["smoothing"],
        weight_spec=_parse_dist(config["weight_dist"]),
        bias_spec=_parse_dist(config["bias_dist"]),
        activation=config["activation"],
        gibbs=cfg,
        normalize=config["normalize"],
        mode=mode,
        seed=config["seed"],
    )


# -- subcommands ---------------------------------------------------------------

def cmd_simulate(run: RunConfig) -> None:
    c = run.config
    params = SueirParams(beta=c["beta"], sigma=c["sigma"], gamma=c["gamma"],
                         mu=c["mu"], s0=c["s0"], e0=c["e0"], i0=c["i0"],
                         r0=c["r0"], t_end=c["t_end"], dt_out=c["dt_out"])
    spec = NoiseSpec(sigma_zeta=c["noise"], seed=c["seed"],
                     per_point=c["per_point"])
    ensemble = generate_ensemble(params, spec, int(c["count"]))
    files = {f"trajectory_{i:03d}.csv": _series_csv(s)
             for i, s in enumerate(ensemble)}
    files["manifest.json"] = _manifest_text(run)
    _write_outputs(run.output_dir, files)


def cmd_fit(run: RunConfig) -> None:
    c = run.config
    series = _require_input(c)
    model = _fit_from_config(series, c, mode=c["mode"])
    meta = {
        "mode": model.mode,
        "embed_dim": model.embed_dim,
        "n_features": model.feature_map.n_features,
        "retained_draws": model.draws.n_retained,
        "sigma_delta_sq": model.sigma_delta_sq,
        "scaler": None if model.scaler is None
        else {"min": model.scaler.min, "max": model.scaler.max},
        "seed": model.seed,
    }
    files = {
        "posterior_draws.csv": draws_csv_text(model.draws),
        "feature_map.txt": feature_map_text(model.feature_map),
        "model.json": json.dumps(meta, sort_keys=True, indent=2) + "\n",
        "manifest.json": _manifest_text(run),
    }
    _write_outputs(run.output_dir, files)


def cmd_forecast(run: RunConfig) -> None:
    c = run.config
    series = _require_input(c)
    model = _fit_from_config(series, c, mode=c["mode"])
    result = forecast(model, h=c["horizon"], alpha=c["alpha"])

    rows = [[_fmt(result.horizon_times[k]), _fmt(result.mean[k]),
             _fmt(result.lower[k]), _fmt(result.upper[k])]
            for k in range(result.horizon)]
    files = {
        "forecast.csv": _table_csv(["time", "mean", "lower", "upper"], rows),
        "manifest.json": _manifest_text(run),
    }
    if c["sample_paths"]:
        header = ["draw"] + ["t" + _fmt(t) for t in result.horizon_times]
        path_rows = [[str(i)] + [_fmt(v) for v in row]
                     for i, row in enumerate(result.sample_paths)]
        files["sample_paths.csv"] = _table_csv(header, path_rows)
    _write_outputs(run.output_dir, files)


def cmd_evaluate(run: RunConfig) -> None:
    c = run.config
    series = _require_input(c)
    if c["m"] is None:
        raise ConfigError("evaluate needs 'm', the first training size")
    plan = ExpandingWindowPlan(first_train_end=int(c["m"]),
                               horizon=int(c["horizon"]),
                               series_length=len(series))

    method = c["method"]
    if method == "holt":
        def callback(train, h):
            return holt_fit_forecast(train.values, h)
    elif method in ("rfblt", "rfbl"):
        def callback(train, h):
            model = _fit_from_config(train, c, mode=method,
                                     embed_key="embed_dim")
            return forecast(model, h=h, alpha=c["alpha"])
    else:
        raise ConfigError(f"unknown method {method!r}")

    report = run_expanding_window(series, plan, callback)

    files = {
        "metrics.csv": _table_csv(
            ["train_size", "relative_error"],
            [[str(int(v)), _fmt(e)]
             for v, e in zip(report.train_sizes, report.relative_errors)]),
        "mda.csv": _table_csv(
            ["horizon", "mda"],
            [[str(q + 1), _fmt(val)] for q, val in enumerate(report.mda)]),
        "manifest.json": _manifest_text(run),
    }
    if report.coverage_prob is not None:
        med_range = np.median(report.coverage_ranges, axis=0)
        files["coverage.csv"] = _table_csv(
            ["horizon", "coverage_prob", "median_range"],
            [[str(q + 1), _fmt(report.coverage_prob[q]), _fmt(med_range[q])]
             for q in range(plan.horizon)])
    for w, v in enumerate(report.train_sizes):
        times = series.times[v:v + plan.horizon]
        if report.lowers is not None:
            header = ["time", "mean", "lower", "upper", "actual"]
            rows = [[_fmt(times[q]), _fmt(report.means[w, q]),
                     _fmt(report.lowers[w, q]), _fmt(report.uppers[w, q]),
                     _fmt(report.actuals[w, q])]
                    for q in range(plan.horizon)]
        else:
            header = ["time", "mean", "actual"]
            rows = [[_fmt(times[q]), _fmt(report.means[w, q]),
                     _fmt(report.actuals[w, q])]
                    for q in range(plan.horizon)]
        files[f"forecasts/window_{w:03d}.csv"] = _table_csv(header, rows)
    _write_outputs(run.output_dir, files)


_DISPATCH = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "forecast": cmd_forecast,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        run = resolve_config(args)
        _DISPATCH[run.subcommand](run)
    except (ValidationError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"rfblt: error: {exc}", file=sys.stderr)
        return 1
    except ComputationError as exc:
        print(f"rfblt: runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


def entrypoint() -> None:
    sys.exit(main())
