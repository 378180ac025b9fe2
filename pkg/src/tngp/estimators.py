"""scikit-learn compatible wrappers around the functional core.

Inputs are centered and given a hyperbox from the training data unless
``half_widths`` is passed explicitly, in which case they are used as-is.
"""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import baseline, projected
from .als import AlsConfig
from .basis import BasisConfig, HyperParams
from .data import Scaling, fit_scaling


class HyperboxScaler(TransformerMixin, BaseEstimator):
    """Center inputs and record hyperbox half-widths ``(1 + boundary_factor) * max|x|``."""

    def __init__(self, boundary_factor=0.5):
        self.boundary_factor = boundary_factor

    def fit(self, X, y=None):
        X = check_array(X)
        self.scaling_ = fit_scaling(X, self.boundary_factor)
        self.center_ = self.scaling_.center
        self.half_widths_ = self.scaling_.half_width
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "scaling_")
        return self.scaling_.transform(check_array(X))

    def inverse_transform(self, X):
        check_is_fitted(self, "scaling_")
        return self.scaling_.inverse_transform(check_array(X))


def _per_dim(value, dims, name):
    if np.isscalar(value):
        return (value,) * dims
    value = tuple(value)
    if len(value) != dims:
        raise ValueError(f"{name} has {len(value)} entries for {dims} input dimensions")
    return value


class _BasisRegressor(RegressorMixin, BaseEstimator):
    """Shared input handling for the basis-function regressors."""

    def _hp(self):
        return HyperParams(self.sigma_f_sq, self.length_scale, self.sigma_y_sq)

    def _setup(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        dims = X.shape[1]
        self.n_features_in_ = dims
        if self.half_widths is None:
            self.scaling_ = fit_scaling(X, self.boundary_factor)
            X = self.scaling_.transform(X)
            widths = tuple(self.scaling_.half_width)
        else:
            self.scaling_ = Scaling(np.zeros(dims), np.asarray(_per_dim(self.half_widths, dims, "half_widths"), float))
            widths = tuple(self.scaling_.half_width)
        self.basis_ = BasisConfig(_per_dim(self.n_basis, dims, "n_basis"), widths)
        self.hp_ = self._hp()
        return X, y

    def _inputs(self, X):
        check_is_fitted(self, "basis_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.scaling_.transform(X)

    def predict(self, X, return_std=False, return_var=False):
        """Predictive mean, optionally with the standard deviation or variance of f."""
        pred = self._posterior(self._inputs(X))
        if return_std:
            return pred.mean, pred.std
        if return_var:
            return pred.mean, pred.variance
        return pred.mean


class ProjectedGPRegressor(_BasisRegressor):
    """GP regression with basis functions projected through a low-rank tensor train.

    Parameters
    ----------
    n_basis : int or sequence of int
        Basis functions per input dimension.
    ranks : int or sequence of int
        Uniform interior TT-rank, the ``D - 1`` interior ranks, or the full chain.
    site : int, optional
        1-based core that receives the Bayesian treatment; default ``ceil(D/2)``.
    half_widths : float or sequence, optional
        Hyperbox half-widths. When omitted the inputs are centered and the
        half-widths are derived with ``boundary_factor``.
    reg_lambda : float, optional
        ALS ridge weight; defaults to ``sigma_y_sq``.
    """

    def __init__(self, n_basis=10, ranks=5, site=None, sigma_f_sq=1.0, length_scale=1.0,
                 sigma_y_sq=0.1, half_widths=None, boundary_factor=0.5, max_sweeps=20,
                 rel_tol=1e-6, reg_lambda=None, random_state=0):
        self.n_basis = n_basis
        self.ranks = ranks
        self.site = site
        self.sigma_f_sq = sigma_f_sq
        self.length_scale = length_scale
        self.sigma_y_sq = sigma_y_sq
        self.half_widths = half_widths
        self.boundary_factor = boundary_factor
        self.max_sweeps = max_sweeps
        self.rel_tol = rel_tol
        self.reg_lambda = reg_lambda
        self.random_state = random_state

    def fit(self, X, y):
        X, y = self._setup(X, y)
        als_cfg = AlsConfig(self.max_sweeps, self.rel_tol, self.reg_lambda, self.random_state)
        t0 = time.perf_counter()
        self.posterior_, als = projected.fit(
            X, y, self.basis_, self.hp_, self.ranks, als_cfg, self.site, return_als=True
        )
        self.fit_time_ = time.perf_counter() - t0
        self.objective_trace_ = als.trace
        self.sweep_trace_ = als.sweep_trace
        self.n_sweeps_ = als.n_sweeps
        return self

    @property
    def tt_(self):
        return self.posterior_.projection_tt

    def _posterior(self, X):
        return projected.predict(self.posterior_, X)


class HilbertGPRegressor(_BasisRegressor):
    """Reduced-rank GP using the ``budget`` basis functions with the largest spectral weight."""

    def __init__(self, n_basis=10, budget=None, sigma_f_sq=1.0, length_scale=1.0,
                 sigma_y_sq=0.1, half_widths=None, boundary_factor=0.5,
                 max_basis=baseline.HILBERT_MAX_BASIS):
        self.n_basis = n_basis
        self.budget = budget
        self.sigma_f_sq = sigma_f_sq
        self.length_scale = length_scale
        self.sigma_y_sq = sigma_y_sq
        self.half_widths = half_widths
        self.boundary_factor = boundary_factor
        self.max_basis = max_basis

    def fit(self, X, y):
        X, y = self._setup(X, y)
        t0 = time.perf_counter()
        self.posterior_ = baseline.hilbert_gp_fit(
            X, y, self.basis_, self.hp_, self.budget, max_basis=self.max_basis
        )
        self.fit_time_ = time.perf_counter() - t0
        return self

    def _posterior(self, X):
        return baseline.hilbert_gp_posterior(self.posterior_, X)


class ExactGPRegressor(RegressorMixin, BaseEstimator):
    """Dense squared-exponential GP; cubic in the number of training points."""

    def __init__(self, sigma_f_sq=1.0, length_scale=1.0, sigma_y_sq=0.1,
                 max_n=baseline.FULL_GP_MAX_N):
        self.sigma_f_sq = sigma_f_sq
        self.length_scale = length_scale
        self.sigma_y_sq = sigma_y_sq
        self.max_n = max_n

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        hp = HyperParams(self.sigma_f_sq, self.length_scale, self.sigma_y_sq)
        t0 = time.perf_counter()
        self.state_ = baseline.full_gp_fit(X, y, hp, max_n=self.max_n)
        self.fit_time_ = time.perf_counter() - t0
        return self

    def predict(self, X, return_std=False, return_var=False):
        check_is_fitted(self, "state_")
        pred = baseline.full_gp_posterior(self.state_, check_array(X))
        if return_std:
            return pred.mean, pred.std
        if return_var:
            return pred.mean, pred.variance
        return pred.mean
