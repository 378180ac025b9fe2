"""Regularized alternating linear scheme for the tensor-train weights."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from .basis import LambdaFactors
from .exceptions import ConfigError, ShapeError
from .structured import FeatureSet, InterfaceCache
from .tt import TensorTrain, expand_ranks, orthogonalize_site, shift_site, move_site, tt_random

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlsConfig:
    """Sweep budget, stopping tolerance, ridge weight and initialization seed.

    ``reg_lambda=None`` means "use the noise variance", which makes every core
    update the MAP estimate under a standard-normal prior on that core.
    """

    max_sweeps: int = 20
    rel_tol: float = 1e-6
    reg_lambda: Optional[float] = None
    seed: Optional[int] = 0

    def __post_init__(self):
        if int(self.max_sweeps) < 1:
            raise ConfigError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if not self.rel_tol >= 0:
            raise ConfigError(f"rel_tol must be >= 0, got {self.rel_tol}")
        if self.reg_lambda is not None and not self.reg_lambda >= 0:
            raise ConfigError(f"reg_lambda must be >= 0, got {self.reg_lambda}")


def core_update(A, y, reg_lambda: float) -> np.ndarray:
    """Ridge solution ``(A.T A + reg_lambda I)^{-1} A.T y``.

    With ``reg_lambda == 0`` and a singular Gram matrix the minimum-norm
    least-squares solution is returned and a ``RuntimeWarning`` is emitted.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if A.shape[0] != y.shape[0]:
        raise ShapeError(f"A has {A.shape[0]} rows but y has {y.shape[0]} entries")
    K = A.shape[1]
    G = A.T @ A
    G[np.diag_indices(K)] += reg_lambda
    b = A.T @ y
    if reg_lambda == 0 and (A.shape[0] < K or np.linalg.cond(G) > 1e12):
        warnings.warn(
            "singular normal matrix with zero regularization; using minimum-norm solution",
            RuntimeWarning,
            stacklevel=2,
        )
        return np.linalg.lstsq(A, y, rcond=None)[0]
    try:
        return linalg.cho_solve(linalg.cho_factor(G, lower=True, check_finite=False), b)
    except linalg.LinAlgError:
        warnings.warn(
            "normal matrix not positive definite; using minimum-norm solution",
            RuntimeWarning,
            stacklevel=2,
        )
        return np.linalg.lstsq(G, b, rcond=None)[0]


def objective(A, w, y, reg_lambda: float) -> float:
    r = y - A @ w
    return float(r @ r + reg_lambda * (w @ w))


def converged(trace, rel_tol: float) -> bool:
    """True when the last two sweep objectives differ by less than ``rel_tol`` relatively."""
    if len(trace) < 2:
        return False
    prev, last = float(trace[-2]), float(trace[-1])
    scale = max(abs(prev), np.finfo(float).tiny)
    return abs(prev - last) / scale < rel_tol


@dataclass
class AlsResult:
    tt: TensorTrain
    trace: np.ndarray
    sweep_trace: np.ndarray
    n_sweeps: int

    def __iter__(self):
        # unpacks as (tt, trace)
        return iter((self.tt, self.trace))


def als_fit(
    fs: FeatureSet,
    lf: Optional[LambdaFactors],
    y,
    ranks,
    cfg: AlsConfig = AlsConfig(),
    *,
    site: int = 1,
    sigma_y_sq: Optional[float] = None,
    init: Optional[TensorTrain] = None,
    callback: Optional[Callable[[int, TensorTrain], None]] = None,
) -> AlsResult:
    """Fit TT weights by minimizing ``|y - Phi sqrt(Lambda) w|^2 + lambda |w|^2``.

    One sweep updates cores ``1..D`` left to right, then ``D-1..1`` right to
    left, shifting the canonical center one core per update so the projection
    keeps orthonormal columns and ``|w| == |w^(d)|``. The returned train is in
    site-``site`` mixed-canonical format. ``trace`` holds the objective before
    the first update followed by its value after every core update.
    ``callback(d, tt)``, when given, sees the train just before core ``d`` is
    updated.
    """
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != fs.n:
        raise ShapeError(f"{fs.n} feature rows but {y.shape[0]} targets")
    if fs.n < 1:
        raise ShapeError("at least one data point is required")
    D = len(fs.factors)
    if not 1 <= site <= D:
        raise ConfigError(f"site {site} outside 1..{D}")
    reg = cfg.reg_lambda
    if reg is None:
        if sigma_y_sq is None:
            raise ConfigError("reg_lambda is unset and no noise variance was given")
        reg = float(sigma_y_sq)

    factors = fs.factors if lf is None else fs.scaled(lf).factors
    if init is None:
        ranks = expand_ranks(ranks, D)
        tt = tt_random(fs.shape, ranks, seed=cfg.seed)
    else:
        tt = init
    tt = orthogonalize_site(tt, 1)
    if reg == 0:
        for k in range(1, D + 1):
            if tt.core_size(k) > fs.n:
                raise ConfigError(
                    f"core {k} has {tt.core_size(k)} entries but only {fs.n} data points; "
                    "reg_lambda must be > 0"
                )

    cache = InterfaceCache(factors, tt)
    A = cache.projected(1)
    trace = [objective(A, tt.cores[0].ravel(), y, reg)]
    sweep_trace = [trace[0]]

    def update(tt: TensorTrain, d: int) -> TensorTrain:
        if callback is not None:
            callback(d, tt)
        A = cache.projected(d)
        w = core_update(A, y, reg)
        trace.append(objective(A, w, y, reg))
        return tt.with_core(d, w, site=d)

    n_sweeps = 0
    for n_sweeps in range(1, cfg.max_sweeps + 1):
        for d in range(1, D + 1):
            tt = update(tt, d)
            if d < D:
                tt = shift_site(tt, +1)
                cache.update_left(d, tt.cores[d - 1])
        for d in range(D - 1, 0, -1):
            tt = shift_site(tt, -1)
            cache.update_right(d + 1, tt.cores[d])
            tt = update(tt, d)
        sweep_trace.append(trace[-1])
        logger.debug("sweep %d objective %.12g", n_sweeps, trace[-1])
        if converged(sweep_trace, cfg.rel_tol):
            break

    tt = move_site(tt, site)
    return AlsResult(tt, np.asarray(trace), np.asarray(sweep_trace), n_sweeps)
