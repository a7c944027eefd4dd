"""Gibbs samplers for Bayesian ridge and lasso regression with Gaussian errors.

Model
-----
    y_i ~ N(beta0 + z_i . beta, sigma_eps^2),       i = 1..n
    beta0           ~ flat (improper uniform)
    beta_j          ~ N(0, lambda_j^2 tau^2 sigma_eps^2),   j = 1..D
    sigma_eps^2     ~ 1 / sigma_eps^2 (scale-invariant improper)
    tau^2 | xi      ~ Inv-Gamma(1/2, 1/xi)
    xi              ~ Inv-Gamma(1/2, 1)

Ridge pins every local scale lambda_j^2 at 1; lasso gives each an Exp(1)
prior, realized through inverse-Gaussian updates of 1/lambda_j^2. Both
samplers sweep the full conditionals in the order
beta0, beta, sigma_eps^2, (lambda^2,) tau^2, xi; each conditional is exact,
so no accept/reject step is involved.

The multivariate-normal update for beta switches between a D x D Cholesky
factorization and an n x n auxiliary-variable construction depending on
D/n, so wide design matrices (D >> n) stay cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import (
    ConfigError,
    InvalidVarianceError,
    NumericalError,
    ShapeError,
    SingularPrecisionError,
)
from .rng import GIBBS, stream

_JITTER_LADDER = (1e-10, 1e-8, 1e-6)
_SIGMA_EPS_INIT_FLOOR = 1e-12  # var(y) = 0 for exactly-constant targets
# With the scale-invariant noise prior, exactly-degenerate targets (zero
# attainable residual) send sigma_eps^2 -> 0 geometrically until the
# precision matrix overflows; real data bottoms out at the floating-point
# residual floor instead. Flooring the draw keeps the chain finite while
# staying ~50 orders below any meaningful noise scale.
_SIGMA_EPS_DRAW_FLOOR = 1e-100


@dataclass(frozen=True)
class GibbsConfig:
    """Chain length bookkeeping: S total sweeps, B burn-in, thinning."""

    n_samples: int = 2000
    burn_in: int = 1000
    thin: int = 5
    seed: int = 0
    prior: str = "lasso"

    def __post_init__(self):
        if self.prior not in ("ridge", "lasso"):
            raise ConfigError(f"prior must be 'ridge' or 'lasso', got {self.prior!r}")
        if self.burn_in < 0 or self.n_samples <= self.burn_in:
            raise ConfigError(
                f"need n_samples > burn_in >= 0, got "
                f"({self.n_samples}, {self.burn_in})"
            )
        if self.thin < 1:
            raise ConfigError("thin must be >= 1")
        if self.retained < 1:
            raise ConfigError("chain retains no draws; decrease thin or burn_in")

    @property
    def retained(self) -> int:
        """Number of retained draws: floor((S - B) / thin)."""
        return (self.n_samples - self.burn_in) // self.thin


@dataclass(frozen=True)
class PosteriorDraws:
    """Retained posterior samples, one row per kept sweep.

    ``lambda_sq`` is identically 1 for ridge chains. All variance-type
    entries are validated strictly positive.
    """

    beta0: np.ndarray         # (R,)
    beta: np.ndarray          # (R, D)
    sigma_eps_sq: np.ndarray  # (R,)
    lambda_sq: np.ndarray     # (R, D)
    tau_sq: np.ndarray        # (R,)
    xi: np.ndarray            # (R,)

    def __post_init__(self):
        R = self.beta0.size
        if not (self.sigma_eps_sq.size == self.tau_sq.size == self.xi.size == R
                and self.beta.shape[0] == R and self.lambda_sq.shape == self.beta.shape):
            raise ShapeError("posterior arrays must share the retained-draw count")
        for label, arr in (("sigma_eps_sq", self.sigma_eps_sq),
                           ("tau_sq", self.tau_sq),
                           ("xi", self.xi),
                           ("lambda_sq", self.lambda_sq)):
            if not np.all(arr > 0):
                raise NumericalError(f"non-positive {label} draw retained")

    @property
    def n_retained(self) -> int:
        return self.beta0.size

    @property
    def n_features(self) -> int:
        return self.beta.shape[1]

    def subset(self, idx) -> "PosteriorDraws":
        """Row-subset (or reorder) of the retained draws."""
        return PosteriorDraws(self.beta0[idx], self.beta[idx],
                              self.sigma_eps_sq[idx], self.lambda_sq[idx],
                              self.tau_sq[idx], self.xi[idx])


def draws_csv_text(draws: PosteriorDraws) -> str:
    """One row per retained draw; columns beta0, beta_1..D, sigma_eps_sq,
    tau_sq, xi, lambda_sq_1..D. For external MCMC diagnostics."""
    D = draws.n_features
    header = (["beta0"] + [f"beta_{j}" for j in range(1, D + 1)]
              + ["sigma_eps_sq", "tau_sq", "xi"]
              + [f"lambda_sq_{j}" for j in range(1, D + 1)])
    lines = [",".join(header)]
    for i in range(draws.n_retained):
        row = ([draws.beta0[i]] + draws.beta[i].tolist()
               + [draws.sigma_eps_sq[i], draws.tau_sq[i], draws.xi[i]]
               + draws.lambda_sq[i].tolist())
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_draws_csv(draws: PosteriorDraws, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(draws_csv_text(draws))


# -- scalar samplers ----------------------------------------------------------

def sample_inverse_gamma(shape, scale, rng: np.random.Generator):
    """Draw from Inv-Gamma(shape, scale): the reciprocal of a Gamma(shape)
    variate with rate ``scale``. Vectorizes over parameter arrays."""
    shape = np.asarray(shape, dtype=float)
    scale = np.asarray(scale, dtype=float)
    if np.any(shape <= 0) or np.any(scale <= 0):
        raise InvalidVarianceError("inverse-gamma needs shape > 0 and scale > 0")
    g = rng.gamma(shape, 1.0 / scale)
    g = np.maximum(g, np.finfo(float).tiny)  # underflow guard, prob ~ 0
    out = 1.0 / g
    return float(out) if out.ndim == 0 else out


def sample_inverse_gaussian(mu, lam, rng: np.random.Generator):
    """Draw from Inverse-Gaussian(mu, lam), mean mu, shape lam.

    Michael-Schucany-Haas transform: one chi-square root candidate, then a
    ratio acceptance deciding between the candidate and its mirror
    mu^2 / candidate. Strictly positive. Vectorizes over mu/lam arrays and
    consumes exactly one normal and one uniform per element.
    """
    mu = np.asarray(mu, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(mu <= 0) or np.any(lam <= 0):
        raise InvalidVarianceError("inverse-gaussian needs mu > 0 and lam > 0")
    shape = np.broadcast_shapes(mu.shape, lam.shape)
    nu = rng.standard_normal(shape) ** 2
    x = mu + (mu * mu * nu) / (2.0 * lam) \
        - (mu / (2.0 * lam)) * np.sqrt(4.0 * mu * lam * nu + (mu * nu) ** 2)
    x = np.maximum(x, np.finfo(float).tiny)  # cancellation guard for huge nu
    u = rng.random(shape)
    out = np.where(u <= mu / (mu + x), x, mu * mu / x)
    return float(out) if out.ndim == 0 else out


# -- conditional parameterizations -------------------------------------------
# Small pure helpers so each printed full conditional is directly testable.

def beta0_conditional(y, Zbeta, sigma_eps_sq, n):
    """Mean and variance of beta0 given everything else."""
    return float(np.mean(y - Zbeta)), sigma_eps_sq / n


def sigma_eps_conditional(rss, prior_quad, n, D):
    """Inv-Gamma (shape, scale) for sigma_eps^2 given everything else."""
    return (n + D) / 2.0, 0.5 * (rss + prior_quad)


def tau_conditional(shrunk_quad, xi, sigma_eps_sq, D):
    """Inv-Gamma (shape, scale) for tau^2 given everything else."""
    return (D + 1) / 2.0, 1.0 / xi + shrunk_quad / (2.0 * sigma_eps_sq)


def xi_conditional(tau_sq):
    """Inv-Gamma (shape, scale) for the mixing parameter xi."""
    return 1.0, 1.0 + 1.0 / tau_sq


def lambda_conditional(beta_sq, tau_sq, sigma_eps_sq):
    """Inverse-Gaussian (mean, shape) for 1/lambda_j^2 given everything else.

    beta_sq is clamped away from exact zero: the event has measure zero but
    occurs in floating point.
    """
    beta_sq = np.maximum(beta_sq, 1e-300)
    return np.sqrt(2.0 * tau_sq * sigma_eps_sq / beta_sq), 2.0


# -- multivariate normal draw from a precision-form conditional ---------------

def _chol_with_jitter(A: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        pass
    mean_diag = float(np.trace(A)) / A.shape[0]
    for eps in _JITTER_LADDER:
        try:
            return np.linalg.cholesky(A + (eps * mean_diag) * np.eye(A.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise SingularPrecisionError(
        f"matrix not positive definite after jitter up to "
        f"{_JITTER_LADDER[-1]:g} x mean diagonal"
    )


def draw_mvn_precision(resid, Z, sigma_eps_sq, prior_var, rng,
                       ZtZ=None, method: str = "auto") -> np.ndarray:
    """Exact draw of beta from its Gaussian full conditional.

    The target is N(mu, Lambda^{-1}) with

        Lambda = Z'Z / sigma_eps_sq + diag(1 / prior_var),
        mu     = Lambda^{-1} Z' resid / sigma_eps_sq,

    where ``prior_var`` is the per-coefficient prior variance
    (sigma_eps^2 tau^2 lambda_j^2) and ``resid`` the intercept-adjusted
    response y - beta0.

    Two algorithmic paths produce draws from the identical law:

    - ``direct``: factorize the D x D precision (used when D/n < 2);
    - ``auxiliary``: an n x n auxiliary-variable construction that never
      forms the D x D matrix (used when D/n >= 2, i.e. wide designs).

    Raises SingularPrecisionError if the factorization fails after the
    jitter ladder.
    """
    resid = np.asarray(resid, dtype=float)
    Z = np.asarray(Z, dtype=float)
    prior_var = np.asarray(prior_var, dtype=float)
    n, D = Z.shape
    if resid.size != n or prior_var.size != D:
        raise ShapeError("resid/prior_var sizes inconsistent with Z")
    if sigma_eps_sq <= 0 or np.any(prior_var <= 0):
        raise InvalidVarianceError("variances must be strictly positive")

    if method == "auto":
        method = "direct" if D / n < 2 else "auxiliary"
    if method == "direct":
        if ZtZ is None:
            ZtZ = Z.T @ Z
        prec = ZtZ / sigma_eps_sq
        prec[np.diag_indices_from(prec)] += 1.0 / prior_var
        L = _chol_with_jitter(prec)
        mu = cho_solve((L, True), Z.T @ resid / sigma_eps_sq)
        noise = solve_triangular(L, rng.standard_normal(D), lower=True, trans="T")
        return mu + noise
    if method == "auxiliary":
        sigma = math.sqrt(sigma_eps_sq)
        phi = Z / sigma
        alpha = resid / sigma
        u = np.sqrt(prior_var) * rng.standard_normal(D)
        d = rng.standard_normal(n)
        M = (phi * prior_var) @ phi.T
        M[np.diag_indices_from(M)] += 1.0
        L = _chol_with_jitter(M)
        w = cho_solve((L, True), alpha - (phi @ u + d))
        return u + prior_var * (phi.T @ w)
    raise ConfigError(f"unknown MVN method {method!r}")


# -- log likelihood ------------------------------------------------------------

def gaussian_log_likelihood(y, Z, beta0, beta, sigma_eps_sq) -> float:
    """Gaussian log likelihood of the linear model in the feature space:

        n log(1 / (sqrt(2 pi) sigma_eps)) - ||y - beta0 - Z beta||^2 / (2 sigma_eps^2)
    """
    if sigma_eps_sq <= 0:
        raise InvalidVarianceError("sigma_eps_sq must be > 0")
    y = np.asarray(y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if Z.shape != (y.size, beta.size):
        raise ShapeError(f"Z shape {Z.shape} inconsistent with y/beta")
    resid = y - beta0 - Z @ beta
    n = y.size
    return float(n * np.log(1.0 / (np.sqrt(2.0 * np.pi * sigma_eps_sq)))
                 - resid @ resid / (2.0 * sigma_eps_sq))


# -- the two samplers ----------------------------------------------------------

def _validate_regression_inputs(y, Z):
    y = np.asarray(y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or y.ndim != 1 or Z.shape[0] != y.size:
        raise ShapeError(f"inconsistent shapes: y {y.shape}, Z {Z.shape}")
    if y.size < 2 or Z.shape[1] < 1:
        raise ShapeError("need n >= 2 observations and D >= 1 predictors")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(Z))):
        raise NumericalError("y and Z must be finite")
    return y, Z


def _check_positive(**named):
    for label, value in named.items():
        if not np.all(np.asarray(value) > 0):
            raise NumericalError(f"chain produced non-positive {label}")


def gibbs_ridge(y, Z, cfg: GibbsConfig,
                rng: np.random.Generator | None = None,
                fixed_tau_sq: float | None = None,
                fixed_sigma_eps_sq: float | None = None) -> PosteriorDraws:
    """Gibbs chain for the ridge model (all local scales pinned at 1).

    ``fixed_tau_sq`` / ``fixed_sigma_eps_sq`` freeze a hyperparameter at the
    given value and skip its update (consuming no randomness for it), which
    turns the chain into the conjugate Gaussian model used by the oracle
    tests. Freezing tau^2 also skips the xi update, since xi exists only to
    mix tau^2.
    """
    y, Z = _validate_regression_inputs(y, Z)
    n, D = Z.shape
    if rng is None:
        rng = stream(cfg.seed, GIBBS)

    beta0 = float(np.mean(y))
    beta = np.zeros(D)
    s2 = fixed_sigma_eps_sq if fixed_sigma_eps_sq is not None \
        else max(float(np.var(y)), _SIGMA_EPS_INIT_FLOOR)
    t2 = fixed_tau_sq if fixed_tau_sq is not None else 1.0
    xi = 1.0
    if s2 <= 0 or t2 <= 0:
        raise InvalidVarianceError("fixed variances must be > 0")

    ZtZ = Z.T @ Z if D / n < 2 else None
    R = cfg.retained
    out_beta0 = np.empty(R)
    out_beta = np.empty((R, D))
    out_s2 = np.empty(R)
    out_t2 = np.empty(R)
    out_xi = np.empty(R)
    kept = 0

    for s in range(1, cfg.n_samples + 1):
        mean0, var0 = beta0_conditional(y, Z @ beta, s2, n)
        beta0 = rng.normal(mean0, math.sqrt(var0))

        r = y - beta0
        prior_var = s2 * t2 * np.ones(D)
        beta = draw_mvn_precision(r, Z, s2, prior_var, rng, ZtZ=ZtZ)

        resid = r - Z @ beta
        beta_sq = beta * beta
        if fixed_sigma_eps_sq is None:
            shape, scale = sigma_eps_conditional(
                resid @ resid, np.sum(beta_sq / t2), n, D)
            s2 = max(sample_inverse_gamma(shape, scale, rng),
                     _SIGMA_EPS_DRAW_FLOOR)

        if fixed_tau_sq is None:
            shape, scale = tau_conditional(np.sum(beta_sq), xi, s2, D)
            t2 = sample_inverse_gamma(shape, scale, rng)
            xi = sample_inverse_gamma(*xi_conditional(t2), rng)

        if s > cfg.burn_in and (s - cfg.burn_in) % cfg.thin == 0:
            _check_positive(sigma_eps_sq=s2, tau_sq=t2, xi=xi)
            out_beta0[kept] = beta0
            out_beta[kept] = beta
            out_s2[kept] = s2
            out_t2[kept] = t2
            out_xi[kept] = xi
            kept += 1

    return PosteriorDraws(out_beta0, out_beta, out_s2,
                          np.ones((R, D)), out_t2, out_xi)


def gibbs_lasso(y, Z, cfg: GibbsConfig,
                rng: np.random.Generator | None = None,
                fixed_tau_sq: float | None = None,
                fixed_sigma_eps_sq: float | None = None,
                fixed_lambda_sq: float | np.ndarray | None = None) -> PosteriorDraws:
    """Gibbs chain for the lasso model (Exp(1) prior on each lambda_j^2).

    ``fixed_lambda_sq`` pins every local scale and skips the
    inverse-Gaussian update (a diagnostic hook: pinning at 1 with the same
    seed makes the chain draw-for-draw identical to :func:`gibbs_ridge`).
    """
    y, Z = _validate_regression_inputs(y, Z)
    n, D = Z.shape
    if rng is None:
        rng = stream(cfg.seed, GIBBS)

    beta0 = float(np.mean(y))
    beta = np.zeros(D)
    s2 = fixed_sigma_eps_sq if fixed_sigma_eps_sq is not None \
        else max(float(np.var(y)), _SIGMA_EPS_INIT_FLOOR)
    t2 = fixed_tau_sq if fixed_tau_sq is not None else 1.0
    xi = 1.0
    lam2 = np.broadcast_to(np.asarray(
        1.0 if fixed_lambda_sq is None else fixed_lambda_sq, dtype=float),
        (D,)).copy()
    if s2 <= 0 or t2 <= 0 or np.any(lam2 <= 0):
        raise InvalidVarianceError("fixed variances must be > 0")

    ZtZ = Z.T @ Z if D / n < 2 else None
    R = cfg.retained
    out_beta0 = np.empty(R)
    out_beta = np.empty((R, D))
    out_s2 = np.empty(R)
    out_lam2 = np.empty((R, D))
    out_t2 = np.empty(R)
    out_xi = np.empty(R)
    kept = 0

    for s in range(1, cfg.n_samples + 1):
        mean0, var0 = beta0_conditional(y, Z @ beta, s2, n)
        beta0 = rng.normal(mean0, math.sqrt(var0))

        r = y - beta0
        prior_var = s2 * t2 * lam2
        beta = draw_mvn_precision(r, Z, s2, prior_var, rng, ZtZ=ZtZ)

        resid = r - Z @ beta
        beta_sq = beta * beta
        if fixed_sigma_eps_sq is None:
            shape, scale = sigma_eps_conditional(
                resid @ resid, np.sum(beta_sq / (t2 * lam2)), n, D)
            s2 = max(sample_inverse_gamma(shape, scale, rng),
                     _SIGMA_EPS_DRAW_FLOOR)

        if fixed_lambda_sq is None:
            ig_mean, ig_shape = lambda_conditional(beta_sq, t2, s2)
            lam2 = 1.0 / sample_inverse_gaussian(ig_mean, ig_shape, rng)

        if fixed_tau_sq is None:
            shape, scale = tau_conditional(np.sum(beta_sq / lam2), xi, s2, D)
            t2 = sample_inverse_gamma(shape, scale, rng)
            xi = sample_inverse_gamma(*xi_conditional(t2), rng)

        if s > cfg.burn_in and (s - cfg.burn_in) % cfg.thin == 0:
            _check_positive(sigma_eps_sq=s2, tau_sq=t2, xi=xi, lambda_sq=lam2)
            out_beta0[kept] = beta0
            out_beta[kept] = beta
            out_s2[kept] = s2
            out_lam2[kept] = lam2
            out_t2[kept] = t2
            out_xi[kept] = xi
            kept += 1

    return PosteriorDraws(out_beta0, out_beta, out_s2, out_lam2, out_t2, out_xi)


def run_gibbs(y, Z, cfg: GibbsConfig,
              rng: np.random.Generator | None = None) -> PosteriorDraws:
    """Dispatch on ``cfg.prior``."""
    sampler = gibbs_ridge if cfg.prior == "ridge" else gibbs_lasso
    return sampler(y, Z, cfg, rng=rng)
