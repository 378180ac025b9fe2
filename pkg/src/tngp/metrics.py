"""Error metrics for regression benchmarks."""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .exceptions import DomainError, ShapeError


@dataclass
class EvalReport:
    rmse: float
    msll: float
    n_points: int
    wall_time_fit: float = float("nan")
    wall_time_predict: float = float("nan")
    sum_log_loss: float = float("nan")

    def as_dict(self) -> dict:
        return asdict(self)


def _pair(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.size == 0:
        raise ShapeError("metrics need at least one point")
    return a, b


def rmse(predicted, actual) -> float:
    predicted, actual = _pair(predicted, actual)
    return float(np.sqrt(np.mean((predicted - actual) ** 2)))


def _gaussian_nll(mu, var, y):
    return 0.5 * ((y - mu) ** 2 / var + np.log(2.0 * np.pi * var))


def _total_variance(pred_var, sigma_y_sq):
    total = np.asarray(pred_var, dtype=float).ravel() + sigma_y_sq
    if np.any(total <= 0):
        raise DomainError("predictive variance plus noise must be > 0")
    return total


def msll(pred_mean, pred_var, actual, sigma_y_sq: float, y_train) -> float:
    """Mean standardized log loss.

    Average Gaussian negative log density of ``actual`` under
    ``N(pred_mean, pred_var + sigma_y_sq)`` minus the same quantity under the
    trivial model ``N(mean(y_train), var(y_train))``. Negative is better.
    """
    mu, y = _pair(pred_mean, actual)
    total = _total_variance(pred_var, sigma_y_sq)
    if total.shape != y.shape:
        raise ShapeError("variance length does not match the targets")
    y_train = np.asarray(y_train, dtype=float).ravel()
    m0, v0 = float(np.mean(y_train)), float(np.var(y_train))
    if v0 <= 0:
        raise DomainError("training targets have zero variance; trivial model undefined")
    return float(np.mean(_gaussian_nll(mu, total, y) - _gaussian_nll(m0, v0, y)))


def sum_log_loss(pred_mean, pred_var, actual, sigma_y_sq: float) -> float:
    """Unstandardized Gaussian negative log density summed over points."""
    mu, y = _pair(pred_mean, actual)
    total = _total_variance(pred_var, sigma_y_sq)
    return float(np.sum(_gaussian_nll(mu, total, y)))


def evaluate(prediction, actual, sigma_y_sq: float, y_train,
             fit_time: Optional[float] = None, predict_time: Optional[float] = None) -> EvalReport:
    actual = np.asarray(actual, dtype=float).ravel()
    return EvalReport(
        rmse=rmse(prediction.mean, actual),
        msll=msll(prediction.mean, prediction.variance, actual, sigma_y_sq, y_train),
        n_points=int(actual.size),
        wall_time_fit=float("nan") if fit_time is None else fit_time,
        wall_time_predict=float("nan") if predict_time is None else predict_time,
        sum_log_loss=sum_log_loss(prediction.mean, prediction.variance, actual, sigma_y_sq),
    )
