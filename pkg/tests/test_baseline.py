import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tngp.basis import BasisConfig, HyperParams, LambdaFactors, lambda_factors
from tngp.baseline import (
    full_gp_fit,
    full_gp_predict,
    hilbert_gp_fit,
    hilbert_gp_predict,
    kernel_bundle,
    select_dominant_bases,
)
from tngp.exceptions import ConfigError, SizeError
from tngp.metrics import rmse


def test_interpolation():
    X = np.array([[-0.5], [0.1], [0.7]])
    y = np.array([0.3, -1.0, 2.0])
    pred = full_gp_predict(X, y, X, HyperParams(1.0, 0.5, 1e-10))
    assert np.max(np.abs(pred.mean - y)) <= 1e-4
    assert np.max(pred.variance) <= 1e-4


def test_single_point():
    pred = full_gp_predict(np.array([[0.2]]), np.array([3.0]), np.array([[0.2]]), HyperParams(1.0, 0.7, 1.0))
    np.testing.assert_allclose(pred.mean, [1.5], rtol=1e-15)
    np.testing.assert_allclose(pred.variance, [0.5], rtol=1e-15)


def test_three_point_dense_oracle():
    X = np.array([[-0.8], [0.0], [0.9]])
    y = np.array([1.0, -0.5, 0.25])
    Xs = np.array([[-0.3], [0.4], [1.2]])
    hp = HyperParams(1.3, 0.6, 0.05)
    k = lambda a, b: hp.sigma_f_sq * np.exp(-((a - b) ** 2) / (2 * hp.length_scale**2))
    K = np.array([[k(a, b) for b in X[:, 0]] for a in X[:, 0]]) + hp.sigma_y_sq * np.eye(3)
    ks = np.array([[k(a, b) for b in Xs[:, 0]] for a in X[:, 0]])
    Kinv = np.linalg.inv(K)
    mean = ks.T @ Kinv @ y
    var = hp.sigma_f_sq - np.diag(ks.T @ Kinv @ ks)
    pred = full_gp_predict(X, y, Xs, hp)
    np.testing.assert_allclose(pred.mean, mean, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(pred.variance, var, rtol=1e-12, atol=1e-14)
    bundle = kernel_bundle(X, Xs, hp)
    np.testing.assert_allclose(bundle.K, K - hp.sigma_y_sq * np.eye(3), rtol=1e-15)


def test_full_gp_guard():
    with pytest.raises(SizeError):
        full_gp_fit(np.zeros((11, 1)), np.zeros(11), HyperParams(1, 1, 1), max_n=10)


def test_hilbert_matches_full_gp_1d(rng):
    hp = HyperParams(1.0, 0.3, 0.01)
    X = rng.uniform(-0.8, 0.8, (200, 1))
    y = np.sin(4 * X[:, 0]) + 0.1 * rng.standard_normal(200)
    Xs = np.linspace(-0.7, 0.7, 50)[:, None]
    cfg = BasisConfig((64,), (2.0,))
    h = hilbert_gp_predict(X, y, Xs, cfg, hp)
    f = full_gp_predict(X, y, Xs, hp)
    assert rmse(h.mean, f.mean) <= 1e-3


def test_hilbert_rmse_non_increasing_in_m(rng):
    hp = HyperParams(1.0, 0.3, 0.01)
    X = rng.uniform(-0.8, 0.8, (200, 1))
    y = np.sin(4 * X[:, 0]) + 0.1 * rng.standard_normal(200)
    Xs = np.linspace(-0.7, 0.7, 50)[:, None]
    f = full_gp_predict(X, y, Xs, hp)
    errs = [rmse(hilbert_gp_predict(X, y, Xs, BasisConfig((m,), (2.0,)), hp).mean, f.mean)
            for m in (8, 16, 32, 64)]
    assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))


def test_variance_bounds(rng):
    hp = HyperParams(0.8, 0.4, 0.05)
    X = rng.uniform(-1, 1, (50, 2))
    y = rng.standard_normal(50)
    Xs = rng.uniform(-1, 1, (40, 2))
    f = full_gp_predict(X, y, Xs, hp)
    assert np.all(f.variance >= 0) and np.all(f.variance <= hp.sigma_f_sq)
    h = hilbert_gp_predict(X, y, Xs, BasisConfig.uniform(2, 6, 1.5), hp, budget=20)
    assert np.all(h.variance >= 0)


def test_hilbert_budget_cap(rng):
    cfg = BasisConfig.uniform(2, 10, 1.5)
    with pytest.raises(SizeError):
        hilbert_gp_fit(np.zeros((3, 2)), np.zeros(3), cfg, HyperParams(1, 1, 1), budget=60, max_basis=50)


def brute_force_selection(diags, budget):
    idx = list(itertools.product(*[range(len(v)) for v in diags]))
    score = {i: np.prod([diags[d][k] for d, k in enumerate(i)]) for i in idx}
    return sorted(idx, key=lambda i: (-score[i], i))[:budget]


def test_select_dominant_examples():
    lf = lambda_factors(BasisConfig.uniform(2, 4, 1.5), HyperParams(1.0, 0.5, 1.0))
    assert select_dominant_bases(lf, 1).tolist() == [[0, 0]]
    picked = select_dominant_bases(lf, 3).tolist()
    assert picked[0] == [0, 0] and sorted(picked[1:]) == [[0, 1], [1, 0]]
    # equal weights are ordered lexicographically
    assert picked[1:] == [[0, 1], [1, 0]]
    with pytest.raises(ConfigError):
        select_dominant_bases(lf, 17)


@given(
    sizes=st.lists(st.integers(1, 5), min_size=1, max_size=3),
    seed=st.integers(0, 2**31 - 1),
    monotone=st.booleans(),
    data=st.data(),
)
@settings(max_examples=60, deadline=None)
def test_select_matches_brute_force(sizes, seed, monotone, data):
    rng = np.random.default_rng(seed)
    diags = [rng.choice([0.25, 0.5, 1.0, 2.0], size=m) for m in sizes]
    if monotone:
        diags = [np.sort(v)[::-1] for v in diags]
    budget = data.draw(st.integers(1, int(np.prod(sizes))))
    got = [tuple(r) for r in select_dominant_bases(LambdaFactors(tuple(diags)), budget).tolist()]
    assert got == brute_force_selection(diags, budget)
