"""Reference regressors: the exact GP and the reduced-rank Hilbert-space GP."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .basis import BasisConfig, HyperParams, LambdaFactors, lambda_factors, se_kernel
from .exceptions import ConfigError, FactorizationError, ShapeError, SizeError
from .projected import Prediction, posterior_core, quadratic_variance
from .structured import FeatureSet

FULL_GP_MAX_N = 20000
HILBERT_MAX_BASIS = 10000


@dataclass(frozen=True)
class KernelMatrixBundle:
    K: np.ndarray
    k_star: np.ndarray
    k_star_star: np.ndarray


def kernel_bundle(train_inputs, test_inputs, hp: HyperParams) -> KernelMatrixBundle:
    X = np.atleast_2d(np.asarray(train_inputs, dtype=float))
    Xs = np.atleast_2d(np.asarray(test_inputs, dtype=float))
    return KernelMatrixBundle(
        se_kernel(X, X, hp), se_kernel(X, Xs, hp), np.full(Xs.shape[0], hp.sigma_f_sq)
    )


@dataclass(frozen=True)
class FullGPState:
    train_inputs: np.ndarray
    alpha: np.ndarray
    chol: np.ndarray
    hp: HyperParams


def full_gp_fit(train_inputs, y, hp: HyperParams, max_n: int = FULL_GP_MAX_N) -> FullGPState:
    X = np.atleast_2d(np.asarray(train_inputs, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise ShapeError(f"{X.shape[0]} inputs but {y.shape[0]} targets")
    if X.shape[0] > max_n:
        raise SizeError(f"full GP limited to {max_n} training points, got {X.shape[0]}")
    K = se_kernel(X, X, hp)
    K[np.diag_indices_from(K)] += hp.sigma_y_sq
    scale = np.trace(K) / K.shape[0]
    for jitter in (0.0, 1e-10, 1e-8):
        try:
            L = linalg.cholesky(K + jitter * scale * np.eye(K.shape[0]), lower=True)
            break
        except linalg.LinAlgError:
            continue
    else:
        raise FactorizationError("kernel matrix is not positive definite even after jitter")
    alpha = linalg.cho_solve((L, True), y)
    return FullGPState(X, alpha, L, hp)


def full_gp_posterior(state: FullGPState, test_inputs) -> Prediction:
    Xs = np.atleast_2d(np.asarray(test_inputs, dtype=float))
    ks = se_kernel(state.train_inputs, Xs, state.hp)
    mean = ks.T @ state.alpha
    v = linalg.solve_triangular(state.chol, ks, lower=True)
    var = state.hp.sigma_f_sq - np.sum(v * v, axis=0)
    return Prediction(mean, np.clip(var, 0.0, state.hp.sigma_f_sq))


def full_gp_predict(train_inputs, y, test_inputs, hp: HyperParams,
                    max_n: int = FULL_GP_MAX_N) -> Prediction:
    """Exact GP prediction with the squared-exponential kernel (O(N^3))."""
    return full_gp_posterior(full_gp_fit(train_inputs, y, hp, max_n=max_n), test_inputs)


def select_dominant_bases(lf: LambdaFactors, budget: int) -> np.ndarray:
    """The ``budget`` multi-indices (0-based) with the largest weight products.

    Best-first search over the index lattice: each per-dimension weight vector
    is non-increasing, so a child never outranks its parent and the heap pops
    indices in sorted order. Ties fall back to lexicographic order of the index.
    """
    diags = lf.diag_per_dim
    total = math.prod(len(v) for v in diags)
    if not 1 <= budget <= total:
        raise ConfigError(f"basis budget {budget} outside 1..{total}")
    logs = [np.log(v) for v in diags]
    if any(np.any(np.diff(v) > 0) for v in diags):
        # not monotone: fall back to an explicit sort
        grids = np.meshgrid(*[np.arange(len(v)) for v in diags], indexing="ij")
        idx = np.stack([g.ravel() for g in grids], axis=1)
        score = sum(lg[idx[:, d]] for d, lg in enumerate(logs))
        order = np.lexsort(tuple(idx[:, d] for d in reversed(range(len(diags)))) + (-score,))
        return idx[order[:budget]]

    def key(index):
        return -math.fsum(float(lg[i]) for lg, i in zip(logs, index))

    start = (0,) * len(diags)
    heap = [(key(start), start)]
    seen = {start}
    out = []
    while len(out) < budget:
        _, index = heapq.heappop(heap)
        out.append(index)
        for d in range(len(diags)):
            if index[d] + 1 < len(diags[d]):
                child = index[:d] + (index[d] + 1,) + index[d + 1:]
                if child not in seen:
                    seen.add(child)
                    heapq.heappush(heap, (key(child), child))
    return np.array(out, dtype=int).reshape(budget, len(diags))


def selected_design(factors, indices: np.ndarray) -> np.ndarray:
    """Columns ``prod_d F_d[:, idx_d]`` of the Khatri-Rao matrix for the given indices."""
    out = np.ones((factors[0].shape[0], indices.shape[0]))
    for d, F in enumerate(factors):
        out *= F[:, indices[:, d]]
    return out


@dataclass(frozen=True)
class HilbertPosterior:
    indices: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    basis: BasisConfig
    lam: LambdaFactors
    hp: HyperParams


def hilbert_gp_fit(train_inputs, y, cfg: BasisConfig, hp: HyperParams, budget: int | None = None,
                   max_basis: int = HILBERT_MAX_BASIS) -> HilbertPosterior:
    """Reduced-rank GP over the ``budget`` dominant basis functions.

    Uses the rescaled form (spectral weights folded into the features, identity
    prior on the weights), which is algebraically the same posterior.
    """
    total = cfg.total
    budget = total if budget is None else int(budget)
    if budget > max_basis:
        raise SizeError(f"basis budget {budget} exceeds cap {max_basis}")
    lf = lambda_factors(cfg, hp)
    indices = select_dominant_bases(lf, budget)
    fs = FeatureSet.from_inputs(train_inputs, cfg).scaled(lf)
    A = selected_design(fs.factors, indices)
    mean, cov = posterior_core(A, y, hp.sigma_y_sq)
    return HilbertPosterior(indices, mean, cov, cfg, lf, hp)


def hilbert_gp_posterior(post: HilbertPosterior, test_inputs) -> Prediction:
    fs = FeatureSet.from_inputs(test_inputs, post.basis).scaled(post.lam)
    Astar = selected_design(fs.factors, post.indices)
    return Prediction(Astar @ post.mean, quadratic_variance(Astar, post.cov))


def hilbert_gp_predict(train_inputs, y, test_inputs, cfg: BasisConfig, hp: HyperParams,
                       budget: int | None = None, max_basis: int = HILBERT_MAX_BASIS) -> Prediction:
    post = hilbert_gp_fit(train_inputs, y, cfg, hp, budget, max_basis=max_basis)
    return hilbert_gp_posterior(post, test_inputs)
