import csv
import dataclasses
import math

import numpy as np
import pytest

from rfblt.errors import (
    InsufficientDataError,
    InvalidIntervalError,
    ValidationError,
)
from rfblt.features import FeatureMap
from rfblt.forecaster import (
    ForecastResult,
    RfbltModel,
    fit,
    forecast,
    point_forecast,
    write_forecast_csv,
    write_sample_paths_csv,
)
from rfblt.gibbs import GibbsConfig, PosteriorDraws
from rfblt.series import TimeSeries, fit_scaler

FAST_GIBBS = GibbsConfig(n_samples=300, burn_in=100, thin=2)


def linear_series(n=60, intercept=2.0, slope=3.0):
    t = np.arange(float(n))
    return TimeSeries(t, intercept + slope * t)


def synthetic_model(beta_rows, tail, sigma_delta_sq=0.0, mode="rfblt",
                    scaler=None, seed=0):
    """Hand-built model: identity weights + relu, so the 'prediction' is a
    plain dot product with each draw's coefficients on positive lags."""
    m = len(tail)
    beta = np.atleast_2d(np.asarray(beta_rows, dtype=float))
    R = beta.shape[0]
    fmap = FeatureMap(np.eye(m), np.zeros(m), "relu")
    draws = PosteriorDraws(
        beta0=np.zeros(R),
        beta=beta,
        sigma_eps_sq=np.full(R, 1e-300),  # noise far below double resolution
        lambda_sq=np.ones((R, m)),
        tau_sq=np.ones(R),
        xi=np.ones(R),
    )
    return RfbltModel(
        feature_map=fmap, draws=draws, sigma_delta_sq=sigma_delta_sq,
        smoothing=None, embed_dim=m, scaler=scaler, mode=mode,
        train_tail=np.asarray(tail, dtype=float), last_time=float(m - 1),
        step=1.0, seed=seed,
    )


class TestRecursion:
    def test_degenerate_noise_constant_paths(self):
        # zero coefficients, vanishing noise, constant tail: every path
        # stays at the last training value, exactly
        model = synthetic_model(np.zeros((3, 4)), [5.0, 5.0, 5.0, 5.0])
        result = forecast(model, h=6)
        np.testing.assert_array_equal(result.sample_paths, 5.0)
        np.testing.assert_array_equal(result.mean, 5.0)
        np.testing.assert_array_equal(result.lower, 5.0)
        np.testing.assert_array_equal(result.upper, 5.0)

    def test_each_path_follows_its_own_draw(self):
        # beta = [0, 0, c] predicts c * (last lag): each path grows
        # geometrically at its own rate (1 + c)^k
        rates = np.array([0.1, 0.25])
        model = synthetic_model([[0, 0, r] for r in rates], [1.0, 1.0, 1.0])
        result = forecast(model, h=5)
        expected = np.stack([(1 + r) ** np.arange(1, 6) for r in rates])
        np.testing.assert_allclose(result.sample_paths, expected, rtol=1e-12)

    def test_lag_vector_replay(self):
        # independent scalar replay of the recursion with mixed lag weights
        a, b, c = 0.05, 0.1, 0.2
        tail = [1.0, 2.0, 3.0]
        model = synthetic_model([[a, b, c]], tail)
        result = forecast(model, h=5)
        lags = list(tail)
        expected = []
        for _ in range(5):
            pred = a * lags[0] + b * lags[1] + c * lags[2]
            nxt = lags[-1] + pred * 1.0
            expected.append(nxt)
            lags = lags[1:] + [nxt]
        np.testing.assert_allclose(result.sample_paths[0], expected,
                                   rtol=1e-12)

    def test_rfbl_emits_directly(self):
        # next-value mode: the prediction is the new value, no integration
        model = synthetic_model([[0.0, 0.0, 0.5]], [2.0, 2.0, 2.0],
                                mode="rfbl")
        result = forecast(model, h=3)
        # step 1: 0.5*2 = 1; step 2: lags [2,2,1] -> 0.5; step 3: [2,1,.5] -> .25
        np.testing.assert_allclose(result.sample_paths[0], [1.0, 0.5, 0.25],
                                   rtol=1e-12)

    def test_smoothing_error_draws_enter_paths(self):
        base = synthetic_model(np.zeros((40, 2)), [1.0, 1.0])
        noisy = dataclasses.replace(base, sigma_delta_sq=4.0)
        still = forecast(base, h=4)
        spread = forecast(noisy, h=4)
        np.testing.assert_array_equal(still.sample_paths, 1.0)
        # paths now diffuse with per-step variance ~ sigma_delta_sq
        assert spread.sample_paths[:, 0].std() == pytest.approx(2.0, rel=0.5)

    def test_horizon_times_default_extrapolation(self):
        model = synthetic_model([[0.0, 0.0, 0.0]], [1.0, 1.0, 1.0])
        result = forecast(model, h=4)
        np.testing.assert_allclose(result.horizon_times, [3.0, 4.0, 5.0, 6.0])

    def test_explicit_horizon_times(self):
        model = synthetic_model([[0.0, 0.0, 0.1]], [1.0, 1.0, 1.0])
        result = forecast(model, h=2, horizon_times=[2.5, 4.0])
        # first dt = 0.5, second dt = 1.5
        first = 1.0 + 0.1 * 1.0 * 0.5
        second = first + 0.1 * first * 1.5
        np.testing.assert_allclose(result.sample_paths[0], [first, second],
                                   rtol=1e-12)

    def test_nonfinite_prediction_reports_step_and_draw(self):
        from rfblt.errors import NumericalError
        model = synthetic_model([[0.0, 0.0, 1e200]], [1.0, 1.0, 1.0])
        with pytest.raises(NumericalError, match="step 2, draw 0"):
            forecast(model, h=3)

    def test_bad_horizon_times_rejected(self):
        model = synthetic_model([[0.0, 0.0, 0.0]], [1.0, 1.0, 1.0])
        with pytest.raises(ValidationError):
            forecast(model, h=2, horizon_times=[1.0, 4.0])  # starts in past
        with pytest.raises(ValidationError):
            forecast(model, h=0)
        with pytest.raises(ValidationError):
            forecast(model, h=2, alpha=1.5)


class TestNoiseKeying:
    def test_prefix_of_draws_reproduces_prefix_of_paths(self):
        model = synthetic_model(np.random.default_rng(0).normal(
            scale=0.05, size=(8, 3)), [1.0, 1.2, 1.4], sigma_delta_sq=0.01)
        full = forecast(model, h=4)
        small = dataclasses.replace(model, draws=model.draws.subset(range(3)))
        part = forecast(small, h=4)
        np.testing.assert_array_equal(part.sample_paths,
                                      full.sample_paths[:3])

    def test_longer_horizon_preserves_earlier_steps(self):
        model = synthetic_model(np.random.default_rng(1).normal(
            scale=0.05, size=(5, 3)), [1.0, 1.1, 1.2], sigma_delta_sq=0.02)
        short = forecast(model, h=3)
        long = forecast(model, h=7)
        np.testing.assert_array_equal(short.sample_paths,
                                      long.sample_paths[:, :3])

    def test_permuting_paths_leaves_summaries_unchanged(self):
        model = synthetic_model(np.random.default_rng(2).normal(
            scale=0.05, size=(30, 3)), [1.0, 1.0, 1.0], sigma_delta_sq=0.5)
        result = forecast(model, h=5)
        perm = np.random.default_rng(3).permutation(30)
        shuffled = result.sample_paths[perm]
        np.testing.assert_allclose(shuffled.mean(axis=0), result.mean,
                                   rtol=1e-12)
        np.testing.assert_array_equal(
            np.quantile(shuffled, result.alpha / 2, axis=0), result.lower)
        np.testing.assert_array_equal(
            np.quantile(shuffled, 1 - result.alpha / 2, axis=0), result.upper)


class TestQuantiles:
    def test_bracket_matches_brute_force_order_statistics(self):
        model = synthetic_model(np.random.default_rng(4).normal(
            scale=0.1, size=(41, 3)), [1.0, 1.0, 1.0], sigma_delta_sq=1.0)
        result = forecast(model, h=3, alpha=0.05)

        def type7(col, q):
            a = np.sort(col)
            pos = (a.size - 1) * q
            lo = int(math.floor(pos))
            hi = min(lo + 1, a.size - 1)
            frac = pos - lo
            return a[lo] * (1.0 - frac) + a[hi] * frac

        for k in range(3):
            col = result.sample_paths[:, k]
            assert result.lower[k] == pytest.approx(type7(col, 0.025),
                                                    abs=1e-12)
            assert result.upper[k] == pytest.approx(type7(col, 0.975),
                                                    abs=1e-12)
            assert result.lower[k] <= np.median(col) <= result.upper[k]


class TestFitPipeline:
    def test_paper_default_shapes(self):
        rng = np.random.default_rng(5)
        ts = TimeSeries.from_values(np.cumsum(rng.normal(size=85)) + 50.0)
        model = fit(ts, embed_dim=9, smoothing=7,
                    gibbs=GibbsConfig(n_samples=2000, burn_in=1000, thin=5),
                    seed=6)
        assert model.draws.n_retained == 200
        # default feature count: half the 76 embedding rows
        assert model.feature_map.n_features == 38
        result = forecast(model, h=7)
        assert result.sample_paths.shape == (200, 7)

    def test_insufficient_data(self):
        ts = TimeSeries.from_values([1.0, 2.0, 3.0, 4.0])
        with pytest.raises(InsufficientDataError):
            fit(ts, embed_dim=2, gibbs=FAST_GIBBS)

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            fit(linear_series(), mode="arima", gibbs=FAST_GIBBS)

    def test_determinism_end_to_end(self):
        ts = linear_series(40)
        kwargs = dict(embed_dim=4, smoothing=None, gibbs=FAST_GIBBS, seed=9)
        r1 = forecast(fit(ts, **kwargs), h=5)
        r2 = forecast(fit(ts, **kwargs), h=5)
        np.testing.assert_array_equal(r1.sample_paths, r2.sample_paths)
        np.testing.assert_array_equal(r1.mean, r2.mean)
        np.testing.assert_array_equal(r1.lower, r2.lower)

    def test_noiseless_linear_consistency(self):
        slope, h = 3.0, 7
        failures = 0
        for seed in (1, 2, 3):
            ts = linear_series(100, intercept=2.0, slope=slope)
            model = fit(ts, embed_dim=5, smoothing=None,
                        gibbs=GibbsConfig(n_samples=700, burn_in=300, thin=2),
                        seed=seed)
            # posterior-mean derivative at the training rows hugs the slope
            from rfblt.series import build_derivative_series, build_embedding
            deriv = build_derivative_series(ts, None)
            ds = build_embedding(ts, 5, "derivative", deriv)
            Z = model.feature_map.transform(ds.design)
            pred = (model.draws.beta0.mean()
                    + Z @ model.draws.beta.mean(axis=0))
            assert np.mean(np.abs(pred - slope)) < 0.05 * slope

            result = forecast(model, h=h, alpha=0.05)
            truth = 2.0 + slope * (99.0 + np.arange(1, h + 1))
            mae = np.mean(np.abs(result.mean - truth))
            if mae >= 0.05 * slope * h:
                failures += 1
        assert failures <= 1

    def test_rfbl_mode_skips_derivative_pipeline(self):
        rng = np.random.default_rng(7)
        ts = TimeSeries.from_values(10 + np.sin(np.arange(50) / 5.0)
                                    + 0.05 * rng.normal(size=50))
        model = fit(ts, embed_dim=6, mode="rfbl", gibbs=FAST_GIBBS, seed=8)
        assert model.mode == "rfbl"
        assert model.sigma_delta_sq == 0.0
        assert model.smoothing is None
        result = forecast(model, h=5)
        assert np.all(np.isfinite(result.sample_paths))

    def test_scaling_equivariance(self):
        rng = np.random.default_rng(10)
        values = 1000.0 + 150.0 * np.cumsum(rng.normal(size=60)) / 8.0
        ts = TimeSeries.from_values(values)
        kwargs = dict(embed_dim=5, smoothing=3, gibbs=FAST_GIBBS, seed=11)

        auto = forecast(fit(ts, normalize=True, **kwargs), h=4)

        scaler = fit_scaler(values)
        manual_ts = TimeSeries(ts.times, scaler.apply(values))
        manual = forecast(fit(manual_ts, normalize=False, **kwargs), h=4)
        np.testing.assert_array_equal(auto.sample_paths,
                                      scaler.invert(manual.sample_paths))
        # monotone map: quantiles commute with the inverse transform
        np.testing.assert_allclose(
            auto.lower, scaler.invert(manual.lower), rtol=1e-12)
        np.testing.assert_allclose(
            auto.upper, scaler.invert(manual.upper), rtol=1e-12)


class TestForecastResult:
    def _result(self):
        model = synthetic_model(np.random.default_rng(12).normal(
            scale=0.1, size=(20, 3)), [1.0, 1.0, 1.0], sigma_delta_sq=0.3)
        return forecast(model, h=4)

    def test_point_forecast_is_column_mean(self):
        result = self._result()
        np.testing.assert_array_equal(point_forecast(result),
                                      result.sample_paths.mean(axis=0))

    def test_invariants_enforced(self):
        r = self._result()
        with pytest.raises(InvalidIntervalError):
            ForecastResult(r.horizon_times, r.mean, r.upper, r.lower,
                           r.sample_paths, r.alpha)  # bounds swapped
        with pytest.raises(ValidationError):
            ForecastResult(r.horizon_times, r.mean + 1.0, r.lower, r.upper,
                           r.sample_paths, r.alpha)  # mean inconsistent

    def test_forecast_csv(self, tmp_path):
        result = self._result()
        path = tmp_path / "forecast.csv"
        write_forecast_csv(result, path)
        with path.open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4
        got = np.array([float(r["mean"]) for r in rows])
        np.testing.assert_array_equal(got, result.mean)
        assert all(float(r["lower"]) <= float(r["upper"]) for r in rows)

    def test_sample_paths_csv_recomputes_mean(self, tmp_path):
        result = self._result()
        path = tmp_path / "paths.csv"
        write_sample_paths_csv(result, path)
        table = np.loadtxt(path, delimiter=",", skiprows=1)
        paths = table[:, 1:]  # drop the draw-index column
        np.testing.assert_array_equal(paths, result.sample_paths)
        np.testing.assert_array_equal(paths.mean(axis=0), result.mean)
