"""Gaussian-process regression with Hilbert-space basis functions projected by tensor trains."""

from .als import AlsConfig, als_fit, converged, core_update
from .baseline import (
    full_gp_predict,
    hilbert_gp_fit,
    hilbert_gp_posterior,
    hilbert_gp_predict,
    select_dominant_bases,
)
from .basis import (
    BasisConfig,
    HyperParams,
    LambdaFactors,
    eigenfunction_value,
    eigenvalue,
    feature_matrix,
    lambda_factors,
    spectral_density,
)
from .estimators import ExactGPRegressor, HilbertGPRegressor, HyperboxScaler, ProjectedGPRegressor
from .metrics import msll, rmse
from .projected import Prediction, ProjectedPosterior, fit, posterior_core, predict, project_posterior
from .structured import FeatureSet, gram_and_moment, project_features, project_test_rows
from .tt import TensorTrain, contract_full, materialize_projection, orthogonalize_site, tt_random

__version__ = "0.1.0"

__all__ = [
    "AlsConfig",
    "BasisConfig",
    "ExactGPRegressor",
    "FeatureSet",
    "HilbertGPRegressor",
    "HyperParams",
    "HyperboxScaler",
    "LambdaFactors",
    "Prediction",
    "ProjectedGPRegressor",
    "ProjectedPosterior",
    "TensorTrain",
    "als_fit",
    "contract_full",
    "converged",
    "core_update",
    "eigenfunction_value",
    "eigenvalue",
    "feature_matrix",
    "fit",
    "full_gp_predict",
    "gram_and_moment",
    "hilbert_gp_fit",
    "hilbert_gp_posterior",
    "hilbert_gp_predict",
    "lambda_factors",
    "materialize_projection",
    "msll",
    "orthogonalize_site",
    "posterior_core",
    "predict",
    "project_features",
    "project_posterior",
    "project_test_rows",
    "rmse",
    "select_dominant_bases",
    "spectral_density",
    "tt_random",
]
