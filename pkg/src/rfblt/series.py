"""Time-series containers, differentiation, smoothing, delay embeddings.

Index convention
----------------
The classical presentation of delay embeddings is 1-based; internal arrays
are 0-based. The mapping used throughout this module:

===========================  ==============================================
1-based quantity             0-based realization
===========================  ==============================================
y_{t_k},        k = 1..n     ``values[k-1]``
y'_{t_k},       k = 1..n-1   ``deriv[k-1]``
window ending at t_k (len m) ``values[k-m : k]``
embedding row i = 1..n-m     ``design[i-1] == values[i-1 : i-1+m]``
derivative target of row i   ``smoothed[i+m-2]``  (i.e. ybar' at t_{i+m-1})
next-value target of row i   ``values[i+m-1]``    (i.e. y at t_{i+m})
===========================  ==============================================

Equivalently, 0-based row ``j`` covers ``values[j : j+m]`` and is paired
with ``smoothed[j+m-1]`` (derivative mode) or ``values[j+m]`` (next-value
mode).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import (
    CsvFormatError,
    DegenerateScaleError,
    EmbeddingTooLargeError,
    InsufficientDataError,
    InvalidWindowError,
    ShapeError,
    ValidationError,
)

#: Smoothing choice: ``None`` is pass-through, an int is the left-moving
#: average level s, and a callable maps the raw derivative vector to a
#: smoothed vector of the same length (extension point for other smoothers).
Smoothing = None | int | Callable[[np.ndarray], np.ndarray]


def _frozen_array(x, dtype=float) -> np.ndarray:
    out = np.array(x, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class TimeSeries:
    """Ordered (time, value) observations with strictly increasing stamps."""

    times: np.ndarray
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        times = _frozen_array(self.times)
        values = _frozen_array(self.values)
        if times.ndim != 1 or values.ndim != 1:
            raise ShapeError("times and values must be 1-D")
        if times.shape != values.shape:
            raise ShapeError(
                f"times and values lengths differ: {times.size} vs {values.size}"
            )
        if times.size < 2:
            raise InsufficientDataError("a series needs at least 2 observations")
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(values)):
            raise ValidationError("times and values must be finite")
        if not np.all(np.diff(times) > 0):
            raise ValidationError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def mean_dt(self) -> float:
        return float((self.times[-1] - self.times[0]) / (len(self) - 1))

    def prefix(self, k: int) -> "TimeSeries":
        """First ``k`` observations as a new series."""
        return TimeSeries(self.times[:k], self.values[:k], name=self.name)

    @classmethod
    def from_values(cls, values, t0: float = 0.0, dt: float = 1.0,
                    name: str = "") -> "TimeSeries":
        values = np.asarray(values, dtype=float)
        times = t0 + dt * np.arange(values.size)
        return cls(times, values, name=name)


@dataclass(frozen=True)
class DerivativeSeries:
    """Raw and smoothed forward differences plus the smoothing residuals.

    ``sigma_delta_sq`` is the residual variance estimate
    (1/(n-2)) * sum(delta_k^2); it is exactly 0 for pass-through smoothing.
    """

    raw: np.ndarray
    smoothed: np.ndarray
    residuals: np.ndarray
    sigma_delta_sq: float

    def __post_init__(self):
        raw = _frozen_array(self.raw)
        smoothed = _frozen_array(self.smoothed)
        residuals = _frozen_array(self.residuals)
        if not (raw.shape == smoothed.shape == residuals.shape):
            raise ShapeError("raw, smoothed, residuals must share one length")
        if self.sigma_delta_sq < 0:
            raise ShapeError("sigma_delta_sq must be >= 0")
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "smoothed", smoothed)
        object.__setattr__(self, "residuals", residuals)


@dataclass(frozen=True)
class EmbeddingDataset:
    """Delay-embedding design matrix paired with its regression targets."""

    design: np.ndarray
    targets: np.ndarray
    embed_dim: int
    mode: str  # "derivative" | "next_value"

    def __post_init__(self):
        design = _frozen_array(self.design)
        targets = _frozen_array(self.targets)
        if design.ndim != 2:
            raise ShapeError("design must be 2-D")
        if design.shape != (targets.size, self.embed_dim):
            raise ShapeError(
                f"design shape {design.shape} inconsistent with "
                f"{targets.size} targets and embed_dim {self.embed_dim}"
            )
        if self.mode not in ("derivative", "next_value"):
            raise ShapeError(f"unknown embedding mode {self.mode!r}")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "targets", targets)

    @property
    def n_rows(self) -> int:
        return self.targets.size


@dataclass(frozen=True)
class MinMaxScaler:
    """Affine map sending the fitted window's [min, max] onto [0, 1].

    Not clamped: out-of-range inputs map outside [0, 1], which is the
    desired behaviour for forecasts exceeding the training range.
    """

    min: float
    max: float

    def apply(self, x):
        return (np.asarray(x, dtype=float) - self.min) / (self.max - self.min)

    def invert(self, x):
        return np.asarray(x, dtype=float) * (self.max - self.min) + self.min


def fit_scaler(train) -> MinMaxScaler:
    """Fit a min-max scaler on a training window.

    Raises
    ------
    DegenerateScaleError
        If the window is constant (max == min); mapping it silently to 0
        would hide a zero division downstream.
    """
    train = np.asarray(train, dtype=float)
    lo, hi = float(np.min(train)), float(np.max(train))
    if not hi > lo:
        raise DegenerateScaleError(f"constant training window (min == max == {lo})")
    return MinMaxScaler(lo, hi)


def forward_difference(series: TimeSeries) -> np.ndarray:
    """First-order forward differences (y_{k+1} - y_k) / (t_{k+1} - t_k).

    Length n-1; uses the actual time steps, so non-uniform sampling is
    handled exactly.
    """
    return np.diff(series.values) / np.diff(series.times)


def left_moving_average(x, window: int) -> np.ndarray:
    """Trailing (left-looking) moving average with warm-up.

    For 0-based position k the output is the mean of ``x[max(0, k-s+1) : k+1]``:
    a partial mean of everything seen so far while fewer than ``window``
    points are available, the full s-point trailing mean afterwards.
    """
    x = np.asarray(x, dtype=float)
    s = int(window)
    if x.ndim != 1:
        raise ShapeError("left_moving_average expects a 1-D vector")
    if s < 1 or s > x.size:
        raise InvalidWindowError(f"window {s} outside [1, {x.size}]")
    if s == 1:
        return x.copy()
    head = np.cumsum(x[: s - 1]) / np.arange(1, s)
    tail = np.lib.stride_tricks.sliding_window_view(x, s).mean(axis=1)
    out = np.concatenate([head, tail])
    # A mean of finite values lies in [min, max]; clamp the ~1-ULP spill
    # floating summation can produce at the range edges.
    return np.clip(out, x.min(), x.max())


def build_derivative_series(series: TimeSeries,
                            smoothing: Smoothing = None) -> DerivativeSeries:
    """Differentiate a series and smooth the derivative.

    Parameters
    ----------
    series
        Source observations.
    smoothing
        ``None`` for pass-through (residuals and their variance are exactly
        zero), an int ``s`` for the left moving average at level s, or a
        callable implementing a custom same-length smoother.

    The residual variance uses divisor n-2 over the n-1 residuals, so a
    smoothed derivative needs n >= 3.
    """
    raw = forward_difference(series)
    if smoothing is None:
        zeros = np.zeros_like(raw)
        return DerivativeSeries(raw, raw.copy(), zeros, 0.0)

    n = len(series)
    if n < 3:
        raise InsufficientDataError(
            "smoothing the derivative needs n >= 3 (variance divisor n-2)"
        )
    if callable(smoothing):
        smoothed = np.asarray(smoothing(raw), dtype=float)
        if smoothed.shape != raw.shape:
            raise ShapeError("custom smoother changed the vector length")
    else:
        smoothed = left_moving_average(raw, smoothing)
    residuals = raw - smoothed
    sigma_delta_sq = float(np.sum(residuals**2) / (n - 2))
    return DerivativeSeries(raw, smoothed, residuals, sigma_delta_sq)


def build_embedding(series: TimeSeries,
                    m: int,
                    mode: str = "derivative",
                    deriv: DerivativeSeries | None = None) -> EmbeddingDataset:
    """Construct the (n-m) x m delay matrix and its aligned targets.

    Row j (0-based) is the window ``values[j : j+m]``. In derivative mode
    the target is the smoothed derivative at the window's last stamp; in
    next-value mode it is the observation one step past the window.
    """
    n = len(series)
    m = int(m)
    if m < 1:
        raise ShapeError("embedding dimension m must be >= 1")
    if m >= n:
        raise EmbeddingTooLargeError(f"m={m} must be < series length {n}")

    design = np.lib.stride_tricks.sliding_window_view(series.values, m)[: n - m]
    if mode == "derivative":
        if deriv is None:
            raise ShapeError("derivative mode requires a DerivativeSeries")
        if deriv.raw.size != n - 1:
            raise ShapeError(
                f"derivative length {deriv.raw.size} does not match series "
                f"length {n} (expected {n - 1})"
            )
        targets = deriv.smoothed[m - 1:]
    elif mode == "next_value":
        targets = series.values[m:]
    else:
        raise ShapeError(f"unknown embedding mode {mode!r}")
    return EmbeddingDataset(np.array(design), targets, m, mode)


def euler_reconstruct(times, start: float, deriv) -> np.ndarray:
    """Cumulative first-order integration of a derivative sequence.

    Inverse of :func:`forward_difference`: starting from ``start`` at
    ``times[0]``, each step adds deriv_k * (t_{k+1} - t_k).
    """
    times = np.asarray(times, dtype=float)
    deriv = np.asarray(deriv, dtype=float)
    if deriv.size != times.size - 1:
        raise ShapeError("need one derivative per time step")
    out = np.empty(times.size)
    out[0] = start
    np.cumsum(deriv * np.diff(times), out=out[1:])
    out[1:] += start
    return out


def load_series_csv(path) -> TimeSeries:
    """Read a ``time,value`` CSV (header required, UTF-8, '.' decimals).

    Rows must already be sorted by time; the loader refuses to reorder.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        if [c.strip().lower() for c in header[:2]] != ["time", "value"]:
            raise CsvFormatError(
                f"{path}: header must be 'time,value', got {header!r}"
            )
        times, values = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise CsvFormatError(f"{path}:{lineno}: expected 2 columns")
            try:
                times.append(float(row[0]))
                values.append(float(row[1]))
            except ValueError as exc:
                raise CsvFormatError(f"{path}:{lineno}: {exc}") from None
    try:
        return TimeSeries(np.array(times), np.array(values), name=path.stem)
    except ValidationError as exc:
        raise CsvFormatError(f"{path}: {exc}") from None
