"""Sparse recovery of ODEs from partially observed time series.

The n-th time derivative of an observed series is regressed on polynomials
of its lower derivatives with a cross-validated Lasso; the recovered
equation is integrated to forecast.
"""

from latentode.differentiation import DerivativeStack, differentiate, endpoint_state
from latentode.dictionary import FeatureMatrix, Monomial, build_features, enumerate_monomials
from latentode.dynamics import (
    SystemSpec,
    TimeSeries,
    integrate,
    make_system,
    rhs,
    sample_initial_conditions,
)
from latentode.errors import IntegrationDiverged, InvalidArgument, LatentOdeError
from latentode.evaluation import (
    ExperimentConfig,
    ExperimentResult,
    fit_models,
    naive_forecast,
    preset,
    run_experiment,
)
from latentode.lasso import LassoConfig, LassoFit, coefficient_mse, coordinate_descent, fit_cv, lambda_path
from latentode.metrics import smape
from latentode.model import ForecastReport, SparseOdeModel, forecast, forecast_system, model_rhs

__version__ = "0.1.0"
