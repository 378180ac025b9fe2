import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dense_features, dense_projected
from tngp.basis import BasisConfig, HyperParams, feature_matrix, lambda_factors
from tngp.exceptions import ShapeError
from tngp.structured import FeatureSet, gram_and_moment, project_features, project_test_rows
from tngp.tt import materialize_projection, orthogonalize_site, tt_random

HP = HyperParams(1.0, 0.4, 0.1)


def instance(rng, dims, m, rank, n, site, seed=0):
    cfg = BasisConfig.uniform(dims, m, 1.4)
    X = rng.uniform(-1, 1, size=(n, dims))
    tt = orthogonalize_site(tt_random(cfg, rank, seed=seed), site)
    return cfg, X, tt


def test_feature_set_dense_matches_entrywise_oracle(rng):
    cfg = BasisConfig((2, 3), (1.0, 1.5))
    X = rng.uniform(-1, 1, (5, 2))
    np.testing.assert_allclose(FeatureSet.from_inputs(X, cfg).dense(), dense_features(X, cfg), rtol=1e-15)


def test_project_features_d1(rng):
    cfg = BasisConfig((5,), (1.2,))
    X = rng.uniform(-1, 1, (10, 1))
    tt = tt_random(cfg, 1, seed=0)
    lf = lambda_factors(cfg, HP)
    A = project_features(FeatureSet.from_inputs(X, cfg), lf, tt, 1)
    expected = feature_matrix(X, 1, cfg) @ np.diag(np.sqrt(lf.diag_per_dim[0]))
    np.testing.assert_allclose(A, expected, rtol=1e-14)


@pytest.mark.parametrize("dims, m, rank, n, site, width", [(2, 3, 2, 20, 2, None), (3, 4, 2, 50, 2, 16)])
def test_project_features_dense_oracle(rng, dims, m, rank, n, site, width):
    cfg, X, tt = instance(rng, dims, m, rank, n, site)
    A = project_features(FeatureSet.from_inputs(X, cfg), lambda_factors(cfg, HP), tt, site)
    B = dense_projected(X, cfg, HP, tt, site)
    assert np.linalg.norm(A - B) <= 1e-10 * np.linalg.norm(B)
    if width:
        assert A.shape == (n, width)


def test_prescaled_features_equivalent(rng):
    cfg, X, tt = instance(rng, 3, 3, 2, 15, 1)
    lf = lambda_factors(cfg, HP)
    fs = FeatureSet.from_inputs(X, cfg)
    np.testing.assert_array_equal(project_features(fs, lf, tt, 3), project_features(fs.scaled(lf), None, tt, 3))


def test_project_test_rows(rng):
    cfg, X, tt = instance(rng, 3, 3, 2, 12, 2)
    lf = lambda_factors(cfg, HP)
    A = project_features(FeatureSet.from_inputs(X, cfg), lf, tt, 2)
    np.testing.assert_array_equal(project_test_rows(X[4:5], cfg, lf, tt, 2), A[4:5])
    assert project_test_rows(X[:1], cfg, lf, tt, 2).shape == (1, tt.core_size(2))
    cfg2, X2, tt2 = instance(rng, 2, 4, 3, 9, 1)
    lf2 = lambda_factors(cfg2, HP)
    np.testing.assert_allclose(
        project_test_rows(X2, cfg2, lf2, tt2, 1), dense_projected(X2, cfg2, HP, tt2, 1), rtol=1e-10, atol=1e-14
    )


def test_shape_mismatch(rng):
    cfg, X, tt = instance(rng, 2, 3, 2, 5, 1)
    other = BasisConfig.uniform(2, 4, 1.4)
    with pytest.raises(ShapeError):
        project_features(FeatureSet.from_inputs(X, other), None, tt, 1)
    with pytest.raises(ShapeError):
        FeatureSet((np.ones((3, 2)), np.ones((4, 2))))


def test_gram_and_moment(rng):
    y = rng.standard_normal(6)
    G, b = gram_and_moment(np.eye(6), y)
    np.testing.assert_array_equal(G, np.eye(6))
    np.testing.assert_array_equal(b, y)
    A = rng.standard_normal((50, 8))
    _, b0 = gram_and_moment(A, np.zeros(50))
    assert np.all(b0 == 0)
    G, b = gram_and_moment(A, y.repeat(9)[:50])
    naive_G = np.array([[sum(A[n, i] * A[n, j] for n in range(50)) for j in range(8)] for i in range(8)])
    naive_b = np.array([sum(A[n, i] * y.repeat(9)[n] for n in range(50)) for i in range(8)])
    np.testing.assert_allclose(G, naive_G, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(b, naive_b, rtol=1e-12, atol=1e-12)
    np.testing.assert_array_equal(G, G.T)
    assert np.linalg.eigvalsh(G).min() > -1e-10
    with pytest.raises(ShapeError):
        gram_and_moment(A, np.zeros(49))


def test_column_orthogonality_transfer():
    # with Lambda = I the relevant Gram matrix is that of W itself
    tt = orthogonalize_site(tt_random((3, 3, 3), 2, seed=4), 3)
    W = materialize_projection(tt, 3)
    np.testing.assert_allclose(W.T @ W, np.eye(W.shape[1]), atol=1e-12)


@given(
    dims=st.integers(1, 4), m=st.integers(1, 5), rank=st.integers(1, 3),
    n=st.integers(1, 64), seed=st.integers(0, 10_000), data=st.data(),
)
@settings(max_examples=40, deadline=None)
def test_oracle_equivalence_property(dims, m, rank, n, seed, data):
    rng = np.random.default_rng(seed)
    site = data.draw(st.integers(1, dims))
    cfg, X, tt = instance(rng, dims, m, rank, n, site, seed=seed)
    A = project_features(FeatureSet.from_inputs(X, cfg), lambda_factors(cfg, HP), tt, site)
    B = dense_projected(X, cfg, HP, tt, site)
    assert np.linalg.norm(A - B) <= 1e-10 * max(np.linalg.norm(B), 1e-300)


def test_time_scales_linearly_in_n():
    cfg = BasisConfig.uniform(4, 8, 1.5)
    lf = lambda_factors(cfg, HP)
    tt = orthogonalize_site(tt_random(cfg, 3, seed=0), 2)
    rng = np.random.default_rng(0)

    def best(n):
        fs = FeatureSet.from_inputs(rng.uniform(-1, 1, (n, 4)), cfg)
        times = []
        for _ in range(5):
            t0 = time.perf_counter()
            project_features(fs, lf, tt, 2)
            times.append(time.perf_counter() - t0)
        return min(times)

    # four times the rows should cost well under the sixteen a quadratic method would
    assert best(40_000) / best(10_000) <= 6.0
