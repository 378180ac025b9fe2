import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tngp.exceptions import DomainError, ShapeError
from tngp.metrics import evaluate, msll, rmse, sum_log_loss
from tngp.projected import Prediction


def test_rmse_examples():
    v = np.array([1.0, 2.0, 3.0])
    assert rmse(v, v) == 0.0
    assert rmse([0.0, 0.0], [1.0, -1.0]) == 1.0
    with pytest.raises(ShapeError):
        rmse([1.0], [1.0, 2.0])
    with pytest.raises(ShapeError):
        rmse([], [])


def test_msll_trivial_model_is_zero(rng):
    y_train = rng.standard_normal(30)
    y = rng.standard_normal(10)
    m0, v0 = y_train.mean(), y_train.var()
    s2 = 0.1
    assert msll(np.full(10, m0), np.full(10, v0 - s2), y, s2, y_train) == pytest.approx(0.0, abs=1e-14)


def test_msll_log_term_vanishes(rng):
    y_train = rng.standard_normal(30)
    y = rng.standard_normal(5)
    m0, v0 = y_train.mean(), y_train.var()
    trivial = np.mean(0.5 * ((y - m0) ** 2 / v0 + np.log(2 * np.pi * v0)))
    got = msll(y, np.full(5, 1 / (2 * np.pi) - 0.01), y, 0.01, y_train)
    assert got == pytest.approx(-trivial, abs=1e-12)


def naive_msll(mu, var, y, s2, y_train):
    m0 = sum(y_train) / len(y_train)
    v0 = sum((t - m0) ** 2 for t in y_train) / len(y_train)
    total = 0.0
    for a, b, c in zip(mu, var, y):
        v = b + s2
        total += 0.5 * (c - a) ** 2 / v + 0.5 * math.log(2 * math.pi * v)
        total -= 0.5 * (c - m0) ** 2 / v0 + 0.5 * math.log(2 * math.pi * v0)
    return total / len(y)


def test_msll_naive_oracle(rng):
    mu, y, y_train = rng.standard_normal(12), rng.standard_normal(12), rng.standard_normal(40)
    var = rng.uniform(0.01, 1.0, 12)
    assert msll(mu, var, y, 0.05, y_train) == pytest.approx(naive_msll(mu, var, y, 0.05, y_train), abs=1e-12)
    naive_sum = sum(0.5 * (c - a) ** 2 / (b + 0.05) + 0.5 * math.log(2 * math.pi * (b + 0.05))
                    for a, b, c in zip(mu, var, y))
    assert sum_log_loss(mu, var, y, 0.05) == pytest.approx(naive_sum, abs=1e-12)


def test_msll_errors():
    with pytest.raises(DomainError):
        msll([0.0], [-1.0], [0.0], 0.5, [0.0, 1.0])
    with pytest.raises(DomainError):
        msll([0.0], [1.0], [0.0], 0.5, [1.0, 1.0])


def test_evaluate_report(rng):
    y = rng.standard_normal(6)
    rep = evaluate(Prediction(y, np.full(6, 0.1)), y, 0.1, rng.standard_normal(20), fit_time=1.5)
    assert rep.rmse == 0.0 and rep.n_points == 6 and rep.wall_time_fit == 1.5
    assert set(rep.as_dict()) >= {"rmse", "msll", "n_points", "wall_time_fit", "wall_time_predict"}


@given(seed=st.integers(0, 2**31 - 1), n=st.integers(1, 30), c=st.floats(0.1, 10.0))
@settings(max_examples=50, deadline=None)
def test_rmse_properties(seed, n, c):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(n), rng.standard_normal(n)
    perm = rng.permutation(n)
    assert rmse(a[perm], b[perm]) == pytest.approx(rmse(a, b), rel=1e-12)
    assert rmse(c * a, c * b) == pytest.approx(c * rmse(a, b), rel=1e-12, abs=1e-300)
    assert rmse(a, b) >= 0


@given(seed=st.integers(0, 2**31 - 1), t=st.floats(0.0, 0.99))
@settings(max_examples=50, deadline=None)
def test_msll_decreases_toward_target(seed, t):
    rng = np.random.default_rng(seed)
    y, mu, var = rng.standard_normal(8), rng.standard_normal(8), rng.uniform(0.1, 1.0, 8)
    y_train = rng.standard_normal(20)
    closer = mu + (t + 0.01) * (y - mu)
    farther = mu + t * (y - mu)
    assert msll(closer, var, y, 0.1, y_train) <= msll(farther, var, y, 0.1, y_train) + 1e-12
