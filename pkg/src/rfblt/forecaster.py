"""End-to-end fitting and recursive probabilistic forecasting.

Two variants share the machinery:

- ``rfblt``: the delay-embedded model of the *smoothed derivative*. Each
  retained posterior draw predicts a derivative (plus its own observation
  noise and a smoothing-error correction) which is Euler-integrated one
  step; the prediction is fed back as the newest lag for the next step.
- ``rfbl``: the same embedding paired directly with next values; draws emit
  the next value (no derivative pipeline, no smoothing-error term).

Each retained draw traces its own sample path over the horizon, so the
per-step posterior-predictive distribution is summarized by the path mean
and its quantiles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientDataError,
    InvalidIntervalError,
    NumericalError,
    ShapeError,
    ValidationError,
)
from .features import (
    DEFAULT_BIAS_SPEC,
    DEFAULT_WEIGHT_SPEC,
    DistributionSpec,
    FeatureMap,
    default_feature_count,
    sample_feature_map,
)
from .gibbs import GibbsConfig, PosteriorDraws, run_gibbs
from .rng import FEATURE_MAP, FORECAST_NOISE, GIBBS, stream
from .series import (
    MinMaxScaler,
    Smoothing,
    TimeSeries,
    build_derivative_series,
    build_embedding,
    fit_scaler,
)

MODES = ("rfblt", "rfbl")


@dataclass(frozen=True)
class RfbltModel:
    """Everything needed to roll a fitted model forward recursively."""

    feature_map: FeatureMap
    draws: PosteriorDraws
    sigma_delta_sq: float
    smoothing: Smoothing
    embed_dim: int
    scaler: MinMaxScaler | None
    mode: str
    train_tail: np.ndarray  # last m (scaled) training values
    last_time: float
    step: float             # mean training time step
    seed: int

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}")
        if self.embed_dim != self.feature_map.input_dim:
            raise ShapeError("embed_dim != feature_map.input_dim")
        tail = np.array(self.train_tail, dtype=float)
        if tail.shape != (self.embed_dim,):
            raise ShapeError("train_tail must hold exactly embed_dim values")
        tail.flags.writeable = False
        object.__setattr__(self, "train_tail", tail)


@dataclass(frozen=True)
class ForecastResult:
    """Per-horizon posterior-predictive summary plus the raw paths."""

    horizon_times: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    sample_paths: np.ndarray  # (retained draws, h)
    alpha: float

    def __post_init__(self):
        for name in ("horizon_times", "mean", "lower", "upper", "sample_paths"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        h = self.horizon_times.size
        if not (self.mean.size == self.lower.size == self.upper.size == h
                and self.sample_paths.ndim == 2
                and self.sample_paths.shape[1] == h):
            raise ShapeError("forecast arrays disagree on the horizon length")
        if not 0 < self.alpha < 1:
            raise ValidationError("alpha must lie in (0, 1)")
        if np.any(self.lower > self.upper):
            raise InvalidIntervalError("lower bound above upper bound")
        med = np.median(self.sample_paths, axis=0)
        if np.any(self.lower > med) or np.any(med > self.upper):
            raise InvalidIntervalError("median escapes the credible interval")
        if not np.array_equal(self.mean, self.sample_paths.mean(axis=0)):
            raise ValidationError("mean must be the sample-path column mean")

    @property
    def horizon(self) -> int:
        return self.horizon_times.size


def point_forecast(result: ForecastResult) -> np.ndarray:
    """The point forecast is the per-step mean over posterior sample paths."""
    return result.mean


def fit(series: TimeSeries,
        embed_dim: int = 9,
        n_features: int | None = None,
        smoothing: Smoothing = 7,
        weight_spec: DistributionSpec = DEFAULT_WEIGHT_SPEC,
        bias_spec: DistributionSpec = DEFAULT_BIAS_SPEC,
        activation: str = "fourier",
        gibbs: GibbsConfig | None = None,
        normalize: bool = False,
        mode: str = "rfblt",
        seed: int = 0) -> RfbltModel:
    """Fit the pipeline on a training series.

    Pipeline: optional min-max scaling, then (rfblt only) forward
    differences and derivative smoothing, delay embedding, the frozen
    random-feature transform, and the Gibbs chain on the transformed
    design.

    ``n_features=None`` applies the default rule, half the number of
    embedding rows. ``smoothing`` follows
    :func:`rfblt.series.build_derivative_series` (``None`` for
    pass-through) and is ignored in ``rfbl`` mode.

    All randomness derives from ``seed``: the feature map, the Gibbs chain,
    and (later) the forecast noise consume disjoint child streams, so
    ``gibbs.seed`` is ignored here.
    """
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}")
    n = len(series)
    if n <= embed_dim + 2:
        raise InsufficientDataError(
            f"need n > m + 2 observations (n={n}, m={embed_dim})"
        )
    gibbs = gibbs or GibbsConfig()

    scaler = fit_scaler(series.values) if normalize else None
    work = scaler.apply(series.values) if scaler else series.values
    work_series = TimeSeries(series.times, work, name=series.name)

    if mode == "rfblt":
        deriv = build_derivative_series(work_series, smoothing)
        dataset = build_embedding(work_series, embed_dim, "derivative", deriv)
        sigma_delta_sq = deriv.sigma_delta_sq
    else:
        dataset = build_embedding(work_series, embed_dim, "next_value")
        sigma_delta_sq = 0.0

    D = n_features if n_features is not None \
        else default_feature_count(dataset.n_rows)
    fmap = sample_feature_map(embed_dim, D, weight_spec, bias_spec,
                              activation, rng=stream(seed, FEATURE_MAP))
    Z = fmap.transform(dataset.design)
    draws = run_gibbs(dataset.targets, Z, gibbs, rng=stream(seed, GIBBS))

    return RfbltModel(
        feature_map=fmap,
        draws=draws,
        sigma_delta_sq=sigma_delta_sq,
        smoothing=smoothing if mode == "rfblt" else None,
        embed_dim=embed_dim,
        scaler=scaler,
        mode=mode,
        train_tail=work[-embed_dim:],
        last_time=float(series.times[-1]),
        step=series.mean_dt,
        seed=seed,
    )


def _predictive_noise(model: RfbltModel, n_draws: int, h: int):
    """Standard-normal noise tables, keyed per (draw index, step).

    Each (draw, step) pair owns a child stream, so changing the retained
    draw count or the horizon never perturbs any other pair's noise (nor
    the feature-map / Gibbs streams). The derivative-correction normal is
    only consumed in rfblt mode.
    """
    eps = np.empty((n_draws, h))
    delta = np.zeros((n_draws, h))
    want_delta = model.mode == "rfblt"
    for i in range(n_draws):
        for k in range(h):
            g = stream(model.seed, FORECAST_NOISE, i, k)
            eps[i, k] = g.standard_normal()
            if want_delta:
                delta[i, k] = g.standard_normal()
    return eps, delta


def forecast(model: RfbltModel, h: int, alpha: float = 0.05,
             horizon_times=None) -> ForecastResult:
    """Recursive h-step posterior-predictive forecast.

    For every retained draw, each step builds the lag vector from the
    observed tail and that draw's own previous predictions, transforms it
    through the frozen map, adds the draw's observation noise (and, for
    rfblt, a smoothing-error draw before Euler integration), and feeds the
    result forward. Summaries (mean and the alpha/2, 1-alpha/2 quantiles,
    linear interpolation between order statistics) are taken per step
    across paths, after inverting any training-time scaling path-by-path.

    ``horizon_times`` defaults to extrapolating the mean training step.
    """
    h = int(h)
    if h < 1:
        raise ValidationError("h must be >= 1")
    if not 0 < alpha < 1:
        raise ValidationError("alpha must lie in (0, 1)")
    if horizon_times is None:
        times = model.last_time + model.step * np.arange(1, h + 1)
    else:
        times = np.asarray(horizon_times, dtype=float)
        if times.shape != (h,):
            raise ShapeError(f"horizon_times must have length {h}")
        if times[0] <= model.last_time or np.any(np.diff(times) <= 0):
            raise ValidationError("horizon_times must increase beyond the "
                                  "end of training")
    dts = np.diff(times, prepend=model.last_time)

    draws = model.draws
    R = draws.n_retained
    eps_std, delta_std = _predictive_noise(model, R, h)
    eps = eps_std * np.sqrt(draws.sigma_eps_sq)[:, None]
    delta = delta_std * np.sqrt(model.sigma_delta_sq)

    lags = np.tile(model.train_tail, (R, 1))
    paths = np.empty((R, h))
    for k in range(h):
        Zk = model.feature_map.transform(lags)
        pred = draws.beta0 + np.einsum("ij,ij->i", Zk, draws.beta) + eps[:, k]
        if model.mode == "rfblt":
            nxt = lags[:, -1] + (pred + delta[:, k]) * dts[k]
        else:
            nxt = pred
        bad = ~np.isfinite(nxt)
        if np.any(bad):
            raise NumericalError(
                f"non-finite forecast at step {k + 1}, draw {int(np.argmax(bad))}"
            )
        paths[:, k] = nxt
        lags = np.concatenate([lags[:, 1:], nxt[:, None]], axis=1)

    if model.scaler is not None:
        paths = model.scaler.invert(paths)

    return ForecastResult(
        horizon_times=times,
        mean=paths.mean(axis=0),
        lower=np.quantile(paths, alpha / 2.0, axis=0),
        upper=np.quantile(paths, 1.0 - alpha / 2.0, axis=0),
        sample_paths=paths,
        alpha=alpha,
    )


def write_forecast_csv(result: ForecastResult, path) -> None:
    """``time,mean,lower,upper`` rows, shortest round-trip decimals."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("time,mean,lower,upper\n")
        for k in range(result.horizon):
            fh.write(",".join(repr(float(v)) for v in (
                result.horizon_times[k], result.mean[k],
                result.lower[k], result.upper[k])) + "\n")


def write_sample_paths_csv(result: ForecastResult, path) -> None:
    """Raw per-draw paths, one row per retained draw."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("draw," + ",".join(
            "t" + repr(float(t)) for t in result.horizon_times) + "\n")
        for i, row in enumerate(result.sample_paths):
            fh.write(str(i) + "," + ",".join(repr(float(v)) for v in row) + "\n")
