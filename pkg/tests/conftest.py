import itertools

import numpy as np
import pytest

from tngp.basis import BasisConfig, HyperParams, feature_factors, lambda_factors
from tngp.tt import materialize_projection


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def dense_features(X, cfg: BasisConfig) -> np.ndarray:
    """N x prod(M_d) feature matrix built entry by entry from the factor matrices."""
    factors = feature_factors(X, cfg)
    N = factors[0].shape[0]
    cols = []
    for idx in itertools.product(*[range(m) for m in cfg.m_per_dim]):
        col = np.ones(N)
        for d, i in enumerate(idx):
            col = col * factors[d][:, i]
        cols.append(col)
    return np.stack(cols, axis=1)


def dense_projected(X, cfg: BasisConfig, hp: HyperParams, tt, d) -> np.ndarray:
    """Phi @ diag(sqrt(Lambda)) @ W built from fully materialized pieces."""
    lam = lambda_factors(cfg, hp).kron_diagonal()
    return dense_features(X, cfg) @ np.diag(np.sqrt(lam)) @ materialize_projection(tt, d)


def bayes_linreg(A, y, s2):
    """Textbook posterior for y = A w + e, w ~ N(0, I), e ~ N(0, s2 I), via explicit inverses."""
    P = np.linalg.inv(A.T @ A / s2 + np.eye(A.shape[1]))
    return P @ A.T @ y / s2, P
