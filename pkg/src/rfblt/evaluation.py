"""Expanding-window backtesting, forecast metrics, and the Holt baseline.

The driver grows the training prefix one step at a time: window v trains on
the first v observations and is scored on the next h. A forecast callback
``fn(train_series, h)`` may return a plain length-h point forecast, a
``(mean, lower, upper)`` triple, or a :class:`~rfblt.forecaster.ForecastResult`;
interval metrics are computed only when bounds are supplied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyPlanError,
    EvaluationError,
    InsufficientDataError,
    InvalidIntervalError,
    ShapeError,
    UndefinedMetricError,
    ValidationError,
)
from .forecaster import ForecastResult
from .series import TimeSeries

_HOLT_GRID = np.arange(1, 101) / 100.0  # 0.01, 0.02, ..., 1.00


@dataclass(frozen=True)
class ExpandingWindowPlan:
    """First training size m, horizon h, and the series length n.

    Evaluation windows are v = m, m+1, ..., n-h: exactly n - h - m + 1.
    """

    first_train_end: int
    horizon: int
    series_length: int

    def __post_init__(self):
        m, h, n = self.first_train_end, self.horizon, self.series_length
        if m < 1 or h < 1:
            raise ValidationError("need first_train_end >= 1 and horizon >= 1")
        if m + h > n:
            raise EmptyPlanError(
                f"no evaluation windows: m + h = {m + h} exceeds n = {n}"
            )

    @property
    def n_windows(self) -> int:
        return self.series_length - self.horizon - self.first_train_end + 1

    @property
    def train_sizes(self) -> range:
        return range(self.first_train_end,
                     self.series_length - self.horizon + 1)


@dataclass(frozen=True)
class MetricReport:
    """Per-window and per-horizon scores from one expanding-window run.

    ``coverage_prob`` / ``coverage_ranges`` are None when the forecaster
    supplied no intervals. Means/bounds/actuals are retained so callers can
    dump per-window forecasts.
    """

    train_sizes: np.ndarray        # (windows,)
    relative_errors: np.ndarray    # (windows,)
    directional: np.ndarray        # (windows, h) of {0, 1}
    mda: np.ndarray                # (h,)
    coverage_prob: np.ndarray | None    # (h,)
    coverage_ranges: np.ndarray | None  # (windows, h)
    means: np.ndarray              # (windows, h)
    lowers: np.ndarray | None
    uppers: np.ndarray | None
    actuals: np.ndarray            # (windows, h)

    @property
    def n_windows(self) -> int:
        return self.train_sizes.size


def relative_error(actual, predicted) -> float:
    """Root of the squared error over the squared actuals:
    sqrt(sum (y - yhat)^2 / sum y^2)."""
    actual = np.asarray(actual, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if actual.shape != predicted.shape:
        raise ShapeError("actual and predicted lengths differ")
    denom = float(np.sum(actual**2))
    if denom == 0.0:
        raise UndefinedMetricError("relative error undefined for all-zero actuals")
    return float(np.sqrt(np.sum((actual - predicted) ** 2) / denom))


def directional_accuracy(anchor, actual, predicted) -> int:
    """1 iff the forecast moved in the true direction from the anchor.

    Ties count as agreement: sign(0) == sign(0), so a flat actual matched
    by a flat forecast scores 1.
    """
    return int(np.sign(actual - anchor) == np.sign(predicted - anchor))


def mda(directional: np.ndarray) -> np.ndarray:
    """Mean directional accuracy per horizon: column means of the 0/1 matrix."""
    directional = np.asarray(directional, dtype=float)
    if directional.ndim != 2:
        raise ShapeError("expected a (windows, horizon) matrix")
    if directional.shape[0] == 0:
        raise EmptyPlanError("no windows to average over")
    return directional.mean(axis=0)


def coverage(actuals, lowers, uppers):
    """Closed-interval hit rates and widths.

    Returns (coverage_prob, ranges): the per-horizon fraction of windows
    with lower <= actual <= upper, and the (windows, h) matrix of interval
    widths upper - lower.
    """
    actuals = np.asarray(actuals, dtype=float)
    lowers = np.asarray(lowers, dtype=float)
    uppers = np.asarray(uppers, dtype=float)
    if not (actuals.shape == lowers.shape == uppers.shape) or actuals.ndim != 2:
        raise ShapeError("actuals/lowers/uppers must share a (windows, h) shape")
    if np.any(lowers > uppers):
        raise InvalidIntervalError("lower bound above upper bound")
    hit = (uppers >= actuals) & (actuals >= lowers)
    return hit.mean(axis=0), uppers - lowers


def _as_forecast(out, h):
    """Normalize a callback's return value to (mean, lower|None, upper|None)."""
    if isinstance(out, ForecastResult):
        return out.mean, out.lower, out.upper
    if isinstance(out, tuple):
        if len(out) != 3:
            raise ShapeError("tuple forecasts must be (mean, lower, upper)")
        mean, lower, upper = (np.asarray(a, dtype=float) for a in out)
    else:
        mean, lower, upper = np.asarray(out, dtype=float), None, None
    if mean.shape != (h,):
        raise ShapeError(f"forecast length {mean.shape} != horizon {h}")
    return mean, lower, upper


def run_expanding_window(series: TimeSeries, plan: ExpandingWindowPlan,
                         forecast_fn) -> MetricReport:
    """Drive the callback over every window and accumulate metrics."""
    n = len(series)
    if plan.series_length != n:
        raise ValidationError(
            f"plan was built for length {plan.series_length}, series has {n}"
        )
    W, h = plan.n_windows, plan.horizon
    means = np.empty((W, h))
    actuals = np.empty((W, h))
    lowers = np.empty((W, h))
    uppers = np.empty((W, h))
    rel = np.empty(W)
    has_intervals: bool | None = None

    for w, v in enumerate(plan.train_sizes):
        train = series.prefix(v)
        try:
            out = forecast_fn(train, h)
        except Exception as exc:
            raise EvaluationError(
                f"forecast callback failed at window {w} (train size {v}): {exc}"
            ) from exc
        mean, lower, upper = _as_forecast(out, h)
        window_has = lower is not None and upper is not None
        if has_intervals is None:
            has_intervals = window_has
        elif has_intervals != window_has:
            raise EvaluationError(
                f"window {w} switched interval availability mid-run"
            )
        means[w] = mean
        actuals[w] = series.values[v:v + h]
        if has_intervals:
            lowers[w] = lower
            uppers[w] = upper
        rel[w] = relative_error(actuals[w], mean)

    anchors = series.values[np.asarray(plan.train_sizes) - 1]
    directional = (np.sign(actuals - anchors[:, None])
                   == np.sign(means - anchors[:, None])).astype(int)

    if has_intervals:
        cov_prob, cov_ranges = coverage(actuals, lowers, uppers)
    else:
        cov_prob = cov_ranges = None
        lowers = uppers = None

    return MetricReport(
        train_sizes=np.asarray(plan.train_sizes, dtype=int),
        relative_errors=rel,
        directional=directional,
        mda=mda(directional),
        coverage_prob=cov_prob,
        coverage_ranges=cov_ranges,
        means=means,
        lowers=lowers,
        uppers=uppers,
        actuals=actuals,
    )


# -- Holt's linear trend -------------------------------------------------------

@dataclass(frozen=True)
class HoltState:
    """Level/trend pair under double exponential smoothing.

    Updates follow
        level_t = alpha y_t + (1 - alpha) (level + trend)
        trend_t = gamma (level_t - level) + (1 - gamma) trend
    and the q-step forecast is level + q * trend.
    """

    level: float
    trend: float
    alpha: float
    gamma: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.gamma <= 1.0):
            raise ValidationError("alpha and gamma must lie in [0, 1]")

    def update(self, y: float) -> "HoltState":
        new_level = self.alpha * y + (1.0 - self.alpha) * (self.level + self.trend)
        new_trend = (self.gamma * (new_level - self.level)
                     + (1.0 - self.gamma) * self.trend)
        return HoltState(new_level, new_trend, self.alpha, self.gamma)

    def forecast(self, h: int) -> np.ndarray:
        return self.level + np.arange(1, h + 1) * self.trend


def _holt_grid_run(y: np.ndarray):
    """Run the recursion for every (alpha, gamma) pair on the 0.01 grid.

    Returns (sse, levels, trends), each of length 10000, after consuming
    the whole series with level_1 = y_1 and trend_1 = y_2 - y_1.
    """
    alphas, gammas = np.meshgrid(_HOLT_GRID, _HOLT_GRID, indexing="ij")
    a = alphas.ravel()
    g = gammas.ravel()
    level = np.full(a.size, y[0])
    trend = np.full(a.size, y[1] - y[0])
    sse = np.zeros(a.size)
    for t in range(1, y.size):
        pred = level + trend
        err = y[t] - pred
        sse += err * err
        new_level = a * y[t] + (1.0 - a) * pred
        trend = g * (new_level - level) + (1.0 - g) * trend
        level = new_level
    return sse, level, trend, a, g


def holt_fit_forecast(train, h: int) -> np.ndarray:
    """Holt forecast with in-sample grid-searched smoothing parameters.

    The grid is {0.01, ..., 1.00}^2; the pair minimizing the one-step-ahead
    squared error over the training series wins (first minimum on ties).
    """
    y = np.asarray(train, dtype=float)
    if y.ndim != 1:
        raise ShapeError("train must be a 1-D vector")
    if y.size < 3:
        raise InsufficientDataError("Holt needs at least 3 training points")
    sse, level, trend, _, _ = _holt_grid_run(y)
    best = int(np.argmin(sse))
    return level[best] + np.arange(1, h + 1) * trend[best]


def holt_fitted_params(train) -> tuple[float, float]:
    """The grid-search winner as (alpha, gamma); diagnostic companion."""
    y = np.asarray(train, dtype=float)
    if y.size < 3:
        raise InsufficientDataError("Holt needs at least 3 training points")
    sse, _, _, a, g = _holt_grid_run(y)
    best = int(np.argmin(sse))
    return float(a[best]), float(g[best])
