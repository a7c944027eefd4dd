"""rfblt: probabilistic time-series forecasting from delay embeddings.

The pipeline projects delay-embedded lag vectors through a frozen random
feature map, fits a sparse Bayesian regression (ridge or lasso shrinkage)
to smoothed derivatives (or next values) by Gibbs sampling, and rolls the
retained posterior draws forward recursively to produce credible-interval
forecasts. Simulation and expanding-window evaluation utilities round out
the toolkit.
"""

__version__ = "0.1.0"

from .errors import RfbltError
from .evaluation import (
    ExpandingWindowPlan,
    HoltState,
    MetricReport,
    coverage,
    directional_accuracy,
    holt_fit_forecast,
    mda,
    relative_error,
    run_expanding_window,
)
from .features import (
    DistributionSpec,
    FeatureMap,
    default_feature_count,
    load_feature_map,
    sample_feature_map,
    save_feature_map,
)
from .forecaster import (
    ForecastResult,
    RfbltModel,
    fit,
    forecast,
    point_forecast,
    write_forecast_csv,
    write_sample_paths_csv,
)
from .gibbs import (
    GibbsConfig,
    PosteriorDraws,
    draw_mvn_precision,
    gaussian_log_likelihood,
    gibbs_lasso,
    gibbs_ridge,
    sample_inverse_gamma,
    sample_inverse_gaussian,
    write_draws_csv,
)
from .series import (
    DerivativeSeries,
    EmbeddingDataset,
    MinMaxScaler,
    TimeSeries,
    build_derivative_series,
    build_embedding,
    fit_scaler,
    forward_difference,
    left_moving_average,
    load_series_csv,
)
from .sueir import (
    NoiseSpec,
    SueirParams,
    SueirRun,
    add_noise,
    generate_ensemble,
    infectious_proportion,
    integrate_sueir,
    smooth_7day,
)

__all__ = [
    "DerivativeSeries", "DistributionSpec", "EmbeddingDataset",
    "ExpandingWindowPlan", "FeatureMap", "ForecastResult", "GibbsConfig",
    "HoltState", "MetricReport", "MinMaxScaler", "NoiseSpec",
    "PosteriorDraws", "RfbltError", "RfbltModel", "SueirParams", "SueirRun",
    "TimeSeries", "add_noise", "build_derivative_series", "build_embedding",
    "coverage", "default_feature_count", "directional_accuracy",
    "draw_mvn_precision", "fit", "fit_scaler", "forecast",
    "forward_difference", "gaussian_log_likelihood", "generate_ensemble",
    "gibbs_lasso", "gibbs_ridge", "holt_fit_forecast",
    "infectious_proportion", "integrate_sueir", "left_moving_average",
    "load_feature_map", "load_series_csv", "mda", "point_forecast",
    "relative_error", "run_expanding_window", "sample_feature_map",
    "sample_inverse_gamma", "sample_inverse_gaussian", "save_feature_map",
    "smooth_7day", "write_draws_csv", "write_forecast_csv",
    "write_sample_paths_csv",
]
