"""Bayesian inference on one TT-core in the subspace spanned by the other cores.

The model is ``y = Phi sqrt(Lambda) W w_d + eps`` with ``W`` the (fixed,
orthonormal-column) projection built from every core except ``d`` and a
standard-normal prior on ``w_d``. Everything is expressed through the projected
design ``A = Phi sqrt(Lambda) W``, which is assembled factor-wise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from .als import AlsConfig, als_fit
from .basis import BasisConfig, HyperParams, LambdaFactors, lambda_factors
from .exceptions import DomainError, FactorizationError, ShapeError, SizeError
from .structured import FeatureSet, gram_and_moment, project_features, project_test_rows
from .tt import MATERIALIZATION_CAP, TensorTrain, materialize_projection, contract_full

NEGATIVE_VARIANCE_TOL = 1e-10


@dataclass(frozen=True)
class Prediction:
    """Predictive mean and function variance (noise excluded unless requested)."""

    mean: np.ndarray
    variance: np.ndarray

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)


def spd_solve_factor(G: np.ndarray):
    """Cholesky factor of ``G`` with a jitter ladder ``0, 1e-10, 1e-8`` (times trace / K)."""
    K = G.shape[0]
    scale = np.trace(G) / K if K else 1.0
    for jitter in (0.0, 1e-10, 1e-8):
        try:
            Gj = G + jitter * scale * np.eye(K) if jitter else G
            return linalg.cho_factor(Gj, lower=True, check_finite=False)
        except linalg.LinAlgError:
            continue
    raise FactorizationError("matrix is not positive definite even after jitter")


def posterior_core(A, y, sigma_y_sq: float) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian posterior of a weight vector under a standard-normal prior.

    Returns ``(mean, cov)`` with ``cov = s2 (A.T A + s2 I)^{-1}`` and
    ``mean = cov A.T y / s2``.
    """
    if not sigma_y_sq > 0:
        raise DomainError(f"noise variance must be > 0, got {sigma_y_sq!r}")
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if A.ndim != 2:
        raise ShapeError("projected features must be a 2-D matrix")
    G, b = gram_and_moment(A, y)
    K = G.shape[0]
    G[np.diag_indices(K)] += sigma_y_sq
    factor = spd_solve_factor(G)
    mean = linalg.cho_solve(factor, b, check_finite=False)
    cov = sigma_y_sq * linalg.cho_solve(factor, np.eye(K), check_finite=False)
    cov = 0.5 * (cov + cov.T)
    return mean, cov


def quadratic_variance(Astar: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Row-wise ``a cov a.T``; tiny negatives from rounding are clipped to zero."""
    var = np.einsum("nk,nk->n", Astar @ cov, Astar)
    if np.any(var < -NEGATIVE_VARIANCE_TOL):
        raise FactorizationError(f"negative predictive variance {var.min():.3e}")
    return np.maximum(var, 0.0)


@dataclass(frozen=True)
class ProjectedPosterior:
    """Posterior over core ``site`` plus everything needed to predict."""

    site: int
    mean_core: np.ndarray
    cov_core: np.ndarray
    projection_tt: TensorTrain
    basis: BasisConfig
    lam: LambdaFactors
    hp: HyperParams

    def __post_init__(self):
        K = self.projection_tt.core_size(self.site)
        if self.mean_core.shape != (K,) or self.cov_core.shape != (K, K):
            raise ShapeError(f"posterior sizes do not match core {self.site} with {K} entries")
        if self.projection_tt.site != self.site:
            raise ShapeError("projection train must be canonical at the posterior site")

    @property
    def mean_tt(self) -> TensorTrain:
        """Posterior mean of the full weight vector as a tensor train."""
        return self.projection_tt.with_core(self.site, self.mean_core, site=self.site)


def fit(
    train_inputs,
    y,
    cfg: BasisConfig,
    hp: HyperParams,
    ranks,
    als_cfg: AlsConfig = AlsConfig(),
    site: Optional[int] = None,
    *,
    return_als: bool = False,
):
    """ALS for the projection, then the core posterior at ``site``.

    ``site`` defaults to the middle core ``ceil(D / 2)``.
    """
    X = np.atleast_2d(np.asarray(train_inputs, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if site is None:
        site = math.ceil(cfg.dims / 2)
    lf = lambda_factors(cfg, hp)
    fs = FeatureSet.from_inputs(X, cfg).scaled(lf)
    result = als_fit(fs, None, y, ranks, als_cfg, site=site, sigma_y_sq=hp.sigma_y_sq)
    tt = result.tt
    A = project_features(fs, None, tt, site)
    mean, cov = posterior_core(A, y, hp.sigma_y_sq)
    pp = ProjectedPosterior(site, mean, cov, tt, cfg, lf, hp)
    return (pp, result) if return_als else pp


def projected_design(pp: ProjectedPosterior, test_inputs) -> np.ndarray:
    X = np.atleast_2d(np.asarray(test_inputs, dtype=float))
    if X.shape[1] != pp.basis.dims:
        raise ShapeError(f"test inputs have {X.shape[1]} columns, expected {pp.basis.dims}")
    outside = np.abs(X) > np.asarray(pp.basis.half_widths)[None, :]
    if np.any(outside):
        warnings.warn(
            f"{int(outside.any(axis=1).sum())} test inputs lie outside the hyperbox",
            RuntimeWarning,
            stacklevel=3,
        )
    return project_test_rows(X, pp.basis, pp.lam, pp.projection_tt, pp.site)


def predict(pp: ProjectedPosterior, test_inputs, *, include_noise: bool = False) -> Prediction:
    """Predictive mean and variance at ``test_inputs``; cost linear in the test count."""
    Astar = projected_design(pp, test_inputs)
    mean = Astar @ pp.mean_core
    var = quadratic_variance(Astar, pp.cov_core)
    if include_noise:
        var = var + pp.hp.sigma_y_sq
    return Prediction(mean, var)


@dataclass(frozen=True)
class WeightPosterior:
    """Posterior of the full weight vector kept in factored form.

    The mean is a tensor train; the covariance is ``W cov_core W.T`` and is
    only materialized on request, below the cap.
    """

    mean_tt: TensorTrain
    projection_tt: TensorTrain
    site: int
    cov_core: np.ndarray

    def projection(self, cap: int = MATERIALIZATION_CAP) -> np.ndarray:
        return materialize_projection(self.projection_tt, self.site, cap=cap)

    def dense_mean(self, cap: int = MATERIALIZATION_CAP) -> np.ndarray:
        return contract_full(self.mean_tt, cap=cap)

    def dense_cov(self, cap: int = MATERIALIZATION_CAP) -> np.ndarray:
        M = math.prod(self.projection_tt.shape)
        if M * M > cap:
            raise SizeError(f"covariance of {M}x{M} exceeds materialization cap {cap}")
        W = self.projection(cap=cap)
        return W @ self.cov_core @ W.T


def project_posterior(pp: ProjectedPosterior) -> WeightPosterior:
    return WeightPosterior(pp.mean_tt, pp.projection_tt, pp.site, pp.cov_core)
