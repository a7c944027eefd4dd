import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfblt.errors import (
    CsvFormatError,
    DegenerateScaleError,
    EmbeddingTooLargeError,
    InsufficientDataError,
    InvalidWindowError,
    ShapeError,
    ValidationError,
)
from rfblt.series import (
    TimeSeries,
    build_derivative_series,
    build_embedding,
    euler_reconstruct,
    fit_scaler,
    forward_difference,
    left_moving_average,
    load_series_csv,
)

values_strategy = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, width=64),
    min_size=2, max_size=200,
)


def unit_series(values):
    return TimeSeries.from_values(values)


class TestTimeSeries:
    def test_rejects_single_point(self):
        with pytest.raises(InsufficientDataError):
            TimeSeries(np.array([0.0]), np.array([1.0]))

    def test_rejects_unsorted_times(self):
        with pytest.raises(ValidationError):
            TimeSeries(np.array([0.0, 2.0, 1.0]), np.array([1.0, 2.0, 3.0]))

    def test_rejects_nan_values(self):
        with pytest.raises(ValidationError):
            TimeSeries(np.array([0.0, 1.0]), np.array([1.0, np.nan]))

    def test_rejects_length_mismatch(self):
        with pytest.raises(ShapeError):
            TimeSeries(np.array([0.0, 1.0, 2.0]), np.array([1.0, 2.0]))

    def test_values_immutable(self):
        ts = unit_series([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            ts.values[0] = 99.0

    def test_prefix(self):
        ts = unit_series([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(ts.prefix(2).values, [1.0, 2.0])


class TestForwardDifference:
    def test_unit_steps(self):
        np.testing.assert_allclose(
            forward_difference(unit_series([1, 3, 6])), [2.0, 3.0])

    def test_constant_series(self):
        np.testing.assert_allclose(
            forward_difference(unit_series([5, 5, 5])), [0.0, 0.0])

    def test_fractional_step(self):
        ts = TimeSeries(np.array([0.0, 0.5]), np.array([0.0, 2.0]))
        np.testing.assert_allclose(forward_difference(ts), [4.0])

    @settings(max_examples=200, deadline=None)
    @given(values_strategy)
    def test_euler_reconstruction(self, values):
        """Integrating the differences back recovers the series."""
        ts = unit_series(values)
        recon = euler_reconstruct(ts.times, ts.values[0], forward_difference(ts))
        scale = max(1.0, float(np.max(np.abs(ts.values))))
        assert np.max(np.abs(recon - ts.values)) / scale <= 1e-10


class TestLeftMovingAverage:
    def test_window_two(self):
        np.testing.assert_allclose(
            left_moving_average([2, 4, 6], 2), [2.0, 3.0, 5.0])

    def test_window_one_is_identity(self):
        x = [3.5, -1.0, 2.0]
        np.testing.assert_array_equal(left_moving_average(x, 1), x)

    def test_full_window(self):
        np.testing.assert_allclose(
            left_moving_average([1, 1, 1, 10], 4), [1.0, 1.0, 1.0, 3.25])

    @pytest.mark.parametrize("window", [0, -1, 5])
    def test_invalid_window(self, window):
        with pytest.raises(InvalidWindowError):
            left_moving_average([1.0, 2.0, 3.0], window)

    @settings(max_examples=200, deadline=None)
    @given(values_strategy, st.data())
    def test_identity_and_bounds(self, values, data):
        x = np.asarray(values, dtype=float)
        np.testing.assert_array_equal(left_moving_average(x, 1), x)
        s = data.draw(st.integers(min_value=1, max_value=x.size))
        out = left_moving_average(x, s)
        assert out.size == x.size
        assert np.all(out >= x.min()) and np.all(out <= x.max())

    def test_bounds_at_ulp_edge(self):
        # mean of three copies of 0.1 rounds above 0.1 without the clamp
        out = left_moving_average([0.1, 0.1, 0.1], 3)
        assert np.all(out <= 0.1)


class TestBuildDerivativeSeries:
    def test_pass_through_has_zero_residual_variance(self):
        d = build_derivative_series(unit_series([1.0, 4.0, 2.0]), None)
        np.testing.assert_array_equal(d.residuals, 0.0)
        assert d.sigma_delta_sq == 0.0
        np.testing.assert_array_equal(d.raw, d.smoothed)

    def test_window_one_smoothing_is_identity(self):
        d = build_derivative_series(unit_series([0, 1, 2, 3]), 1)
        np.testing.assert_array_equal(d.residuals, 0.0)
        assert d.sigma_delta_sq == 0.0

    def test_hand_worked_case(self):
        # raw [1,2,3]; window-2 smoothing [1,1.5,2.5]; variance over n-2=2
        d = build_derivative_series(unit_series([0, 1, 3, 6]), 2)
        np.testing.assert_allclose(d.raw, [1, 2, 3])
        np.testing.assert_allclose(d.smoothed, [1.0, 1.5, 2.5])
        np.testing.assert_allclose(d.sigma_delta_sq, 0.25)

    def test_residual_identity(self):
        d = build_derivative_series(unit_series([0.0, 2.0, -1.0, 5.0, 4.0]), 3)
        np.testing.assert_array_equal(d.residuals, d.raw - d.smoothed)

    def test_too_short_for_smoothing(self):
        with pytest.raises(InsufficientDataError):
            build_derivative_series(unit_series([1.0, 2.0]), 2)

    def test_custom_smoother_callable(self):
        d = build_derivative_series(unit_series([0, 1, 3, 6]),
                                    lambda raw: np.zeros_like(raw))
        np.testing.assert_array_equal(d.smoothed, 0.0)
        np.testing.assert_allclose(d.sigma_delta_sq, (1 + 4 + 9) / 2)


class TestBuildEmbedding:
    def test_next_value_mode(self):
        ds = build_embedding(unit_series([1, 2, 3, 4, 5]), 2, "next_value")
        np.testing.assert_array_equal(ds.design, [[1, 2], [2, 3], [3, 4]])
        np.testing.assert_array_equal(ds.targets, [3, 4, 5])

    def test_derivative_mode_unit_slope(self):
        ts = unit_series([1, 2, 3, 4, 5])
        deriv = build_derivative_series(ts, None)
        ds = build_embedding(ts, 2, "derivative", deriv)
        np.testing.assert_array_equal(ds.targets, [1.0, 1.0, 1.0])

    def test_shape_arithmetic(self):
        ts = unit_series(np.sin(np.arange(180.0)))
        deriv = build_derivative_series(ts, 7)
        ds = build_embedding(ts, 9, "derivative", deriv)
        assert ds.design.shape == (171, 9)
        assert ds.targets.shape == (171,)

    def test_embedding_too_large(self):
        with pytest.raises(EmbeddingTooLargeError):
            build_embedding(unit_series([1, 2, 3]), 3, "next_value")

    def test_derivative_mode_requires_deriv(self):
        with pytest.raises(ShapeError):
            build_embedding(unit_series([1, 2, 3]), 2, "derivative")

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=5, max_value=60), st.data())
    def test_row_target_alignment(self, n, data):
        """Each row is a contiguous window; targets sit at the window end
        (derivative) or one past it (next value)."""
        m = data.draw(st.integers(min_value=1, max_value=n - 1))
        rng = np.random.default_rng(n * 1000 + m)
        ts = unit_series(rng.normal(size=n))
        deriv = build_derivative_series(ts, None)
        for mode in ("derivative", "next_value"):
            ds = build_embedding(ts, m, mode, deriv)
            assert ds.design.shape == (n - m, m)
            for j in range(ds.n_rows):
                np.testing.assert_array_equal(ds.design[j],
                                              ts.values[j:j + m])
                if mode == "derivative":
                    assert ds.targets[j] == deriv.smoothed[j + m - 1]
                else:
                    assert ds.targets[j] == ts.values[j + m]


class TestMinMaxScaler:
    def test_endpoints(self):
        sc = fit_scaler([0.0, 5.0, 10.0])
        np.testing.assert_allclose(sc.apply([0, 5, 10]), [0.0, 0.5, 1.0])

    def test_roundtrip_single_value(self):
        sc = fit_scaler([0.0, 10.0])
        assert sc.invert(sc.apply(7.3)) == pytest.approx(7.3, abs=1e-12)

    def test_no_clamping_out_of_range(self):
        sc = fit_scaler([0.0, 10.0])
        assert sc.apply(12.0) == pytest.approx(1.2)

    def test_degenerate_window_rejected(self):
        with pytest.raises(DegenerateScaleError):
            fit_scaler([4.0, 4.0, 4.0])

    def test_roundtrip_many_random_inputs(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            lo, width = rng.uniform(-50, 50), rng.uniform(0.1, 100)
            sc = fit_scaler([lo, lo + width])
            x = rng.uniform(lo - width, lo + 2 * width, size=40)
            np.testing.assert_allclose(sc.invert(sc.apply(x)), x, atol=1e-12)


class TestCsvLoader:
    def _write(self, tmp_path, text):
        p = tmp_path / "series.csv"
        p.write_text(text, encoding="utf-8")
        return p

    def test_roundtrip(self, tmp_path):
        p = self._write(tmp_path, "time,value\n0.0,1.5\n1.0,2.5\n2.0,-3.0\n")
        ts = load_series_csv(p)
        np.testing.assert_array_equal(ts.times, [0.0, 1.0, 2.0])
        np.testing.assert_array_equal(ts.values, [1.5, 2.5, -3.0])
        assert ts.name == "series"

    def test_missing_header(self, tmp_path):
        p = self._write(tmp_path, "0.0,1.5\n1.0,2.5\n")
        with pytest.raises(CsvFormatError):
            load_series_csv(p)

    def test_unsorted_rows(self, tmp_path):
        p = self._write(tmp_path, "time,value\n1.0,2.5\n0.0,1.5\n")
        with pytest.raises(CsvFormatError):
            load_series_csv(p)

    def test_bad_number(self, tmp_path):
        p = self._write(tmp_path, "time,value\n0.0,abc\n1.0,2.0\n")
        with pytest.raises(CsvFormatError):
            load_series_csv(p)

    def test_empty_file(self, tmp_path):
        p = self._write(tmp_path, "")
        with pytest.raises(CsvFormatError):
            load_series_csv(p)
