"""Compartmental epidemic simulation with a discovery-rate discount.

The system tracks susceptible (S), exposed (E), infectious (I), and removed
(R) compartments; only a fraction ``mu`` of transitions out of exposure is
publicly confirmed as infectious:

    dS/dt = -beta (I + E) S / N
    dE/dt =  beta (I + E) S / N - sigma E
    dI/dt =  mu sigma E - gamma I
    dR/dt =  gamma I

with N the (fixed) initial population S0+E0+I0+R0. The total S+E+I+R leaks
at rate (mu-1) sigma E, so it is conserved exactly when mu = 1 and
non-increasing otherwise.

Benchmark datasets are built from the infectious *proportion* I/N with
additive observation noise scaled by the trajectory's peak, then passed
through a 7-day trailing average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError, ValidationError
from .rng import SIM_NOISE, stream
from .series import TimeSeries, left_moving_average

DEFAULT_INTERNAL_STEP = 0.05  # days; non-stiff at desk-scale parameters


@dataclass(frozen=True)
class SueirParams:
    """Rates, initial compartments, and the output grid."""

    beta: float = 3.0 / 14.0    # contact rate
    sigma: float = 1.0 / 4.0    # latency rate
    gamma: float = 1.0 / 14.0   # removal rate
    mu: float = 3.0 / 4.0       # discovery rate
    s0: float = 1e6
    e0: float = 0.0
    i0: float = 1.0
    r0: float = 0.0
    t_end: float = 180.0
    dt_out: float = 1.0

    def __post_init__(self):
        if min(self.beta, self.sigma, self.gamma) <= 0:
            raise ValidationError("rates beta, sigma, gamma must be > 0")
        if not 0 < self.mu <= 1:
            raise ValidationError("discovery rate mu must lie in (0, 1]")
        if min(self.s0, self.e0, self.i0, self.r0) < 0:
            raise ValidationError("initial compartments must be >= 0")
        if self.population <= 0:
            raise ValidationError("total initial population must be > 0")
        if self.t_end <= 0 or self.dt_out <= 0 or self.dt_out > self.t_end:
            raise ValidationError("need 0 < dt_out <= t_end")

    @property
    def population(self) -> float:
        return self.s0 + self.e0 + self.i0 + self.r0


@dataclass(frozen=True)
class NoiseSpec:
    """Observation-noise level as a fraction of the trajectory peak."""

    sigma_zeta: float
    seed: int = 0
    per_point: bool = True  # False: one shared draw for the whole trajectory

    def __post_init__(self):
        if self.sigma_zeta < 0:
            raise ValidationError("sigma_zeta must be >= 0")


@dataclass(frozen=True)
class SueirRun:
    """One integrated trajectory, one series per compartment."""

    params: SueirParams
    susceptible: TimeSeries
    exposed: TimeSeries
    infectious: TimeSeries
    removed: TimeSeries


def _rhs(s, e, i, beta, sigma, gamma, mu, n_pop):
    infections = beta * (i + e) * s / n_pop
    return (-infections,
            infections - sigma * e,
            mu * sigma * e - gamma * i,
            gamma * i)


def integrate_sueir(params: SueirParams,
                    internal_step: float = DEFAULT_INTERNAL_STEP) -> SueirRun:
    """Classical fixed-step 4th-order Runge-Kutta integration.

    The internal step is shrunk so that output stamps are hit exactly.
    States are checked after every internal step: negatives beyond -1e-9
    abort with IntegrationError, anything in (-1e-9, 0) is clamped to 0.
    """
    p = params
    n_pop = p.population
    n_out = int(round(p.t_end / p.dt_out))
    substeps = max(1, int(round(p.dt_out / internal_step)))
    h = p.dt_out / substeps

    s, e, i, r = float(p.s0), float(p.e0), float(p.i0), float(p.r0)
    out = np.empty((n_out + 1, 4))
    out[0] = (s, e, i, r)
    args = (p.beta, p.sigma, p.gamma, p.mu, n_pop)

    for step_out in range(1, n_out + 1):
        for _ in range(substeps):
            k1 = _rhs(s, e, i, *args)
            k2 = _rhs(s + 0.5 * h * k1[0], e + 0.5 * h * k1[1],
                      i + 0.5 * h * k1[2], *args)
            k3 = _rhs(s + 0.5 * h * k2[0], e + 0.5 * h * k2[1],
                      i + 0.5 * h * k2[2], *args)
            k4 = _rhs(s + h * k3[0], e + h * k3[1], i + h * k3[2], *args)
            s += (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            e += (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            i += (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
            r += (h / 6.0) * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
            low = min(s, e, i, r)
            if low < -1e-9:
                raise IntegrationError(
                    f"negative compartment {low:.3e} near "
                    f"t={step_out * p.dt_out:.3f}; reduce the step or check "
                    "parameters"
                )
            s, e, i, r = (max(0.0, s), max(0.0, e), max(0.0, i), max(0.0, r))
        out[step_out] = (s, e, i, r)

    times = p.dt_out * np.arange(n_out + 1)
    return SueirRun(
        params=p,
        susceptible=TimeSeries(times, out[:, 0], name="S"),
        exposed=TimeSeries(times, out[:, 1], name="E"),
        infectious=TimeSeries(times, out[:, 2], name="I"),
        removed=TimeSeries(times, out[:, 3], name="R"),
    )


def infectious_proportion(run: SueirRun) -> TimeSeries:
    """Confirmed-infectious fraction I(t) / N of the initial population."""
    inf = run.infectious
    return TimeSeries(inf.times, inf.values / run.params.population,
                      name="infectious_proportion")


def add_noise(series: TimeSeries, spec: NoiseSpec,
              rng: np.random.Generator | None = None) -> TimeSeries:
    """Additive Gaussian observation noise scaled by the trajectory peak.

    noisy(t) = y(t) + zeta_t * max_s |y(s)| with zeta_t ~ N(0, sigma_zeta^2)
    drawn independently per time point (or once per trajectory when
    ``spec.per_point`` is off). The peak is taken over the clean input.
    Deterministic under ``spec.seed`` unless an explicit ``rng`` is given.
    """
    if spec.sigma_zeta == 0.0:
        return series
    if rng is None:
        rng = stream(spec.seed, SIM_NOISE)
    size = len(series) if spec.per_point else 1
    zeta = rng.normal(0.0, spec.sigma_zeta, size)
    peak = float(np.max(np.abs(series.values)))
    return TimeSeries(series.times, series.values + zeta * peak,
                      name=series.name)


def smooth_7day(series: TimeSeries) -> TimeSeries:
    """Trailing 7-point average with partial-window warm-up."""
    return TimeSeries(series.times, left_moving_average(series.values, 7),
                      name=series.name)


def generate_ensemble(params: SueirParams, spec: NoiseSpec,
                      count: int) -> list[TimeSeries]:
    """Benchmark ensemble: one clean trajectory, ``count`` noise realizations.

    The clean infectious proportion is integrated once; each realization
    adds noise from its own child stream (keyed by trajectory index under
    ``spec.seed``) and is 7-day smoothed.
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    clean = infectious_proportion(integrate_sueir(params))
    out = []
    for idx in range(count):
        noisy = add_noise(clean, spec, rng=stream(spec.seed, SIM_NOISE, idx))
        smoothed = smooth_7day(noisy)
        out.append(TimeSeries(smoothed.times, smoothed.values,
                              name=f"trajectory_{idx:03d}"))
    return out
