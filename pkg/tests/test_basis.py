import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from tngp.basis import (
    BasisConfig,
    HyperParams,
    eigenfunction_value,
    eigenvalue,
    feature_matrix,
    lambda_factors,
    se_kernel,
    spectral_density,
)
from tngp.exceptions import DomainError, ShapeError


@pytest.mark.parametrize(
    "x, m, L, expected", [(-1.0, 3, 1.0, 0.0), (0.0, 1, 1.0, 1.0), (0.5, 2, 1.0, -1.0)]
)
def test_eigenfunction_examples(x, m, L, expected):
    assert eigenfunction_value(x, m, L) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("bad", [dict(m=0, L=1.0), dict(m=1, L=0.0), dict(m=1, L=-2.0)])
def test_eigenfunction_domain_errors(bad):
    with pytest.raises(DomainError):
        eigenfunction_value(0.1, **bad)
    with pytest.raises(DomainError):
        eigenvalue(**bad)


def test_eigenvalue_examples():
    assert eigenvalue(1, math.pi / 2) == pytest.approx(1.0, rel=1e-15)
    assert eigenvalue(2, 1.0) == pytest.approx(math.pi**2, rel=1e-15)
    # oracle: (3 pi / 4)^2 evaluated directly
    assert eigenvalue(3, 2.0) == pytest.approx((3 * math.pi / 4) ** 2, rel=1e-15)
    assert round(float(eigenvalue(3, 2.0)), 4) == 5.5517


def test_spectral_density_examples():
    assert spectral_density(0.0, HyperParams(1.0, 1.0, 1.0)) == pytest.approx(math.sqrt(2 * math.pi))
    assert spectral_density(0.0, HyperParams(2.0, 0.5, 1.0)) == pytest.approx(2.5066, abs=5e-5)
    s = spectral_density(2.0, HyperParams(1.0, 1.0, 1.0))
    assert s == pytest.approx(math.sqrt(2 * math.pi) * math.exp(-1.0), rel=1e-15)
    assert round(float(s), 4) == 0.9221
    with pytest.raises(DomainError):
        spectral_density(-0.1, HyperParams())


def test_hyperparams_must_be_positive():
    with pytest.raises(DomainError):
        HyperParams(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        HyperParams(1.0, 1.0, -1.0)


def test_basis_config_validation():
    with pytest.raises(DomainError):
        BasisConfig((3, 3), (1.0,))
    with pytest.raises(DomainError):
        BasisConfig((0,), (1.0,))
    with pytest.raises(DomainError):
        BasisConfig((2,), (0.0,))
    assert BasisConfig.uniform(3, 4, 1.5).total == 64


@given(m=st.integers(1, 200), L=st.floats(0.1, 10.0))
def test_dirichlet_boundary(m, L):
    assert abs(eigenfunction_value(L, m, L)) < 1e-12
    assert abs(eigenfunction_value(-L, m, L)) < 1e-12


@given(L=st.floats(0.1, 10.0), ell=st.floats(0.05, 3.0))
@settings(max_examples=50)
def test_lambda_monotone_and_positive(L, ell):
    cfg = BasisConfig((30,), (L,))
    # keep exp(-ell^2 lam / 2) clear of float underflow
    assume(0.5 * ell**2 * float(eigenvalue(30, L)) < 700)
    lam = eigenvalue(np.arange(1, 31), L)
    assert np.all(np.diff(lam) > 0)
    diag = lambda_factors(cfg, HyperParams(1.0, ell, 1.0)).diag_per_dim[0]
    assert np.all(diag > 0)
    assert np.all(np.diff(diag) <= 0)


def test_feature_matrix_entries_and_boundary():
    cfg = BasisConfig((2,), (1.0,))
    X = np.array([[-0.3], [0.7]])
    F = feature_matrix(X, 1, cfg)
    for n in range(2):
        for m in range(2):
            assert F[n, m] == eigenfunction_value(X[n, 0], m + 1, 1.0)
    assert np.all(feature_matrix(np.array([[-1.0]]), 1, cfg) == 0)
    with pytest.raises(ShapeError):
        feature_matrix(X, 2, cfg)


def test_feature_column_norm_bound(rng):
    L = 1.7
    cfg = BasisConfig((8,), (L,))
    X = rng.uniform(-L, L, size=(50, 1))
    F = feature_matrix(X, 1, cfg)
    norms = np.linalg.norm(F, axis=0)
    assert np.all(np.isfinite(norms))
    assert np.all(norms <= math.sqrt(50 / L) + 1e-12)


def test_lambda_factors_examples():
    lf = lambda_factors(BasisConfig((1,), (math.pi / 2,)), HyperParams(1.0, 1.0, 1.0))
    expected = math.sqrt(2 * math.pi) * math.exp(-0.5)
    assert lf.diag_per_dim[0][0] == pytest.approx(expected, rel=1e-15)
    assert round(expected, 4) == 1.5203

    cfg = BasisConfig((2, 2), (1.0, 1.3))
    lf = lambda_factors(cfg, HyperParams(1.0, 0.4, 1.0))
    a, b = lf.diag_per_dim
    brute = np.array([a[i] * b[j] for i in range(2) for j in range(2)])
    np.testing.assert_allclose(lf.kron_diagonal(), brute, rtol=1e-15)


def test_signal_variance_enters_kernel_once():
    # D-dimensional weights must reproduce sigma_f^2 * k_1(x1) * k_2(x2), not sigma_f^(2D)
    cfg = BasisConfig((1, 1), (1.0, 1.0))
    lf1 = lambda_factors(cfg, HyperParams(1.0, 0.5, 1.0)).kron_diagonal()
    lf3 = lambda_factors(cfg, HyperParams(3.0, 0.5, 1.0)).kron_diagonal()
    np.testing.assert_allclose(lf3, 3.0 * lf1, rtol=1e-14)


def test_kernel_approximation_1d(rng):
    hp = HyperParams(1.0, 0.3, 1.0)
    cfg = BasisConfig((64,), (2.0,))
    X = rng.uniform(-1, 1, size=(100, 1))
    F = feature_matrix(X, 1, cfg)
    approx = F @ np.diag(lambda_factors(cfg, hp).diag_per_dim[0]) @ F.T
    exact = se_kernel(X, X, hp)
    assert np.linalg.norm(approx - exact) / np.linalg.norm(exact) <= 1e-3
