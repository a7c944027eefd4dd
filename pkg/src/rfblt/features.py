"""Random feature maps: frozen random projections plus a nonlinearity.

A map holds a weight matrix W (m x D) and bias vector b (D), both sampled
once from configurable distributions and never updated. The transform sends
a lag vector x to z = activation(x @ W + b); with standard-normal weights,
uniform [0, 2pi) biases, and the fourier activation, z(x).z(y) is an
unbiased Monte-Carlo estimate of the Gaussian kernel exp(-||x-y||^2 / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import InvalidDistributionError, ShapeError
from .rng import FEATURE_MAP, stream

TWO_PI = 2.0 * math.pi

ACTIVATIONS = ("fourier", "relu", "sigmoid", "tanh", "sine", "cosine")

#: Standard parameterizations and their defaults.  The source distributions
#: for W and b are a modelling choice; these are the conventional ones.
DISTRIBUTION_DEFAULTS = {
    "normal": (0.0, 1.0),        # loc, scale
    "uniform": (0.0, TWO_PI),    # low, high
    "cauchy": (0.0, 1.0),        # loc, scale
    "exponential": (1.0,),       # scale (mean)
    "bernoulli": (0.5,),         # success probability, values in {0, 1}
    "lognormal": (0.0, 1.0),     # log-mean, log-sd
}


@dataclass(frozen=True)
class DistributionSpec:
    """A named sampling family with its parameter tuple."""

    family: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.family not in DISTRIBUTION_DEFAULTS:
            raise InvalidDistributionError(
                f"unknown family {self.family!r}; "
                f"choose from {sorted(DISTRIBUTION_DEFAULTS)}"
            )
        params = tuple(float(p) for p in self.params)
        if not params:
            params = DISTRIBUTION_DEFAULTS[self.family]
        expected = len(DISTRIBUTION_DEFAULTS[self.family])
        if len(params) != expected:
            raise InvalidDistributionError(
                f"{self.family} takes {expected} parameter(s), got {len(params)}"
            )
        self._validate(params)
        object.__setattr__(self, "params", params)

    def _validate(self, p):
        fam = self.family
        if any(not math.isfinite(v) for v in p):
            raise InvalidDistributionError(f"{fam} parameters must be finite")
        if fam in ("normal", "cauchy", "lognormal") and p[1] <= 0:
            raise InvalidDistributionError(f"{fam} scale must be > 0")
        if fam == "uniform" and not p[0] < p[1]:
            raise InvalidDistributionError("uniform needs low < high")
        if fam == "exponential" and p[0] <= 0:
            raise InvalidDistributionError("exponential scale must be > 0")
        if fam == "bernoulli" and not 0.0 <= p[0] <= 1.0:
            raise InvalidDistributionError("bernoulli p must lie in [0, 1]")

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        p = self.params
        if self.family == "normal":
            return rng.normal(p[0], p[1], size)
        if self.family == "uniform":
            return rng.uniform(p[0], p[1], size)
        if self.family == "cauchy":
            return p[0] + p[1] * rng.standard_cauchy(size)
        if self.family == "exponential":
            return rng.exponential(p[0], size)
        if self.family == "bernoulli":
            return (rng.random(size) < p[0]).astype(float)
        return rng.lognormal(p[0], p[1], size)


#: Paper-of-record defaults for the map: W ~ N(0, 1), b ~ Unif[0, 2pi).
DEFAULT_WEIGHT_SPEC = DistributionSpec("normal")
DEFAULT_BIAS_SPEC = DistributionSpec("uniform")


@dataclass(frozen=True)
class FeatureMap:
    """Frozen random projection: weights W (m x D), biases b (D), activation."""

    weights: np.ndarray
    biases: np.ndarray
    activation: str

    def __post_init__(self):
        W = np.array(self.weights, dtype=float)
        b = np.array(self.biases, dtype=float)
        if W.ndim != 2 or b.ndim != 1 or W.shape[1] != b.size:
            raise ShapeError(
                f"weights {W.shape} and biases {b.shape} are inconsistent"
            )
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise ShapeError("weights and biases must be finite")
        if self.activation not in ACTIVATIONS:
            raise InvalidDistributionError(
                f"unknown activation {self.activation!r}; "
                f"choose from {ACTIVATIONS}"
            )
        W.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "biases", b)

    @property
    def input_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def transform(self, x) -> np.ndarray:
        """Map inputs through the frozen nonlinearity.

        Accepts a single lag vector of length m (returns a D-vector) or a
        batch matrix of shape (rows, m) (returns (rows, D), computed as one
        matrix product).
        """
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.input_dim:
            raise ShapeError(
                f"input dimension {x.shape[-1]} != map input_dim {self.input_dim}"
            )
        if x.ndim > 2:
            raise ShapeError("transform expects a vector or a 2-D batch")
        pre = x @ self.weights + self.biases
        return _activate(pre, self.activation, self.n_features)


def _activate(pre: np.ndarray, activation: str, n_features: int) -> np.ndarray:
    if activation == "fourier":
        return math.sqrt(2.0 / n_features) * np.cos(pre)
    if activation == "relu":
        return np.maximum(0.0, pre)
    if activation == "sigmoid":
        return expit(pre)
    if activation == "tanh":
        return np.tanh(pre)
    if activation == "sine":
        return np.sin(pre)
    return np.cos(pre)


def sample_feature_map(m: int,
                       n_features: int,
                       weight_spec: DistributionSpec = DEFAULT_WEIGHT_SPEC,
                       bias_spec: DistributionSpec = DEFAULT_BIAS_SPEC,
                       activation: str = "fourier",
                       rng_seed: int = 0,
                       rng: np.random.Generator | None = None) -> FeatureMap:
    """Draw a frozen feature map.

    Entries of W and b are i.i.d. from their specs. Bit-identical for a
    fixed seed; pass ``rng`` to source the draw from an existing stream
    instead (the seed is then ignored).
    """
    m, D = int(m), int(n_features)
    if m < 1 or D < 1:
        raise ShapeError("need m >= 1 and n_features >= 1")
    if rng is None:
        rng = stream(rng_seed, FEATURE_MAP)
    W = weight_spec.sample((m, D), rng)
    b = bias_spec.sample(D, rng)
    return FeatureMap(W, b, activation)


def default_feature_count(n_train: int, policy: str = "half",
                          value: float | None = None) -> int:
    """Feature-count rule given the number of training rows.

    Policies: ``half`` (ceil(n/2), the default), ``sqrt`` (ceil of the
    square root), ``multiplier`` (ceil(value * n)), ``fixed`` (value as-is).
    """
    n = int(n_train)
    if n < 1:
        raise ShapeError("n_train must be >= 1")
    if policy == "half":
        return math.ceil(n / 2)
    if policy == "sqrt":
        return math.ceil(math.sqrt(n))
    if policy == "multiplier":
        if value is None or value <= 0:
            raise InvalidDistributionError("multiplier policy needs value > 0")
        return math.ceil(value * n)
    if policy == "fixed":
        if value is None or int(value) < 1:
            raise InvalidDistributionError("fixed policy needs value >= 1")
        return int(value)
    raise InvalidDistributionError(f"unknown feature-count policy {policy!r}")


def feature_map_text(fmap: FeatureMap) -> str:
    """Flat text dump for reproducibility audits.

    W row-major (one row per line), then b on one line, then a trailing
    metadata line (activation, m, D). Values are shortest round-trip
    decimals, so a reload is bit-exact.
    """
    lines = [" ".join(repr(v) for v in row.tolist()) for row in fmap.weights]
    lines.append(" ".join(repr(v) for v in fmap.biases.tolist()))
    lines.append(f"{fmap.activation} {fmap.input_dim} {fmap.n_features}")
    return "\n".join(lines) + "\n"


def save_feature_map(fmap: FeatureMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(feature_map_text(fmap))


def load_feature_map(path) -> FeatureMap:
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    activation, m, D = lines[-1].split()
    m, D = int(m), int(D)
    if len(lines) != m + 2:
        raise ShapeError(f"{path}: expected {m} weight rows plus biases "
                         "and metadata")
    W = np.array([[float(v) for v in lines[i].split()] for i in range(m)])
    b = np.array([float(v) for v in lines[m].split()])
    return FeatureMap(W.reshape(m, D), b, activation)
