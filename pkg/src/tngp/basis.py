"""Laplace eigenfunctions on a hyperbox and the squared-exponential spectral density.

Features are kept factor-wise: one ``N x M_d`` matrix per input dimension. The
full ``N x prod(M_d)`` matrix is the row-wise Kronecker product of these factors
(dimension 1 varying slowest) and is never built outside of test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DomainError, ShapeError


@dataclass(frozen=True)
class HyperParams:
    """Signal variance, isotropic length scale and noise variance."""

    sigma_f_sq: float = 1.0
    length_scale: float = 1.0
    sigma_y_sq: float = 1.0

    def __post_init__(self):
        for name in ("sigma_f_sq", "length_scale", "sigma_y_sq"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class BasisConfig:
    """Basis functions per dimension and hyperbox half-widths."""

    m_per_dim: tuple[int, ...]
    half_widths: tuple[float, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.m_per_dim)
        L = tuple(float(v) for v in self.half_widths)
        object.__setattr__(self, "m_per_dim", m)
        object.__setattr__(self, "half_widths", L)
        if len(m) == 0:
            raise DomainError("at least one input dimension is required")
        if len(m) != len(L):
            raise DomainError(
                f"m_per_dim has {len(m)} entries but half_widths has {len(L)}"
            )
        if any(v < 1 for v in m):
            raise DomainError(f"every M_d must be >= 1, got {m}")
        if any(not (np.isfinite(v) and v > 0) for v in L):
            raise DomainError(f"every half-width must be > 0, got {L}")

    @classmethod
    def uniform(cls, dims: int, m: int, half_width: float) -> "BasisConfig":
        return cls((m,) * dims, (half_width,) * dims)

    @property
    def dims(self) -> int:
        return len(self.m_per_dim)

    @property
    def total(self) -> int:
        """Total number of multivariate basis functions, prod(M_d)."""
        return math.prod(self.m_per_dim)


@dataclass(frozen=True)
class LambdaFactors:
    """Per-dimension diagonals whose Kronecker product is the prior weight variance."""

    diag_per_dim: tuple[np.ndarray, ...]

    def __post_init__(self):
        diags = []
        for v in self.diag_per_dim:
            v = np.array(v, dtype=float).ravel()
            v.setflags(write=False)
            diags.append(v)
        object.__setattr__(self, "diag_per_dim", tuple(diags))

    @property
    def sqrt_per_dim(self) -> tuple[np.ndarray, ...]:
        return tuple(np.sqrt(v) for v in self.diag_per_dim)

    def kron_diagonal(self) -> np.ndarray:
        """Dense Kronecker diagonal (dimension 1 slowest); small instances only."""
        out = np.ones(1)
        for v in self.diag_per_dim:
            out = np.kron(out, v)
        return out


def _check_index_and_width(m, L):
    if not L > 0:
        raise DomainError(f"half-width must be > 0, got {L!r}")
    if np.any(np.asarray(m) < 1):
        raise DomainError(f"basis index must be >= 1, got {m!r}")


def eigenfunction_value(x, m, L):
    """Dirichlet eigenfunction ``sin(pi m (x + L) / 2L) / sqrt(L)``.

    Broadcasts over ``x`` and ``m``. Inputs outside ``[-L, L]`` are evaluated
    with the same formula.
    """
    _check_index_and_width(m, L)
    return np.sin(np.pi * np.asarray(m) * (np.asarray(x) + L) / (2.0 * L)) / np.sqrt(L)


def eigenvalue(m, L):
    """Laplacian eigenvalue ``(pi m / 2L)**2``."""
    _check_index_and_width(m, L)
    return (np.pi * np.asarray(m, dtype=float) / (2.0 * L)) ** 2


def spectral_density(lam, hp: HyperParams, sigma_f_sq: float | None = None):
    """One-dimensional squared-exponential spectral density at eigenvalue ``lam``.

    ``sigma_f_sq * sqrt(2 pi) * ell * exp(-ell**2 * lam / 2)``, where ``lam``
    is the eigenvalue itself (the squared frequency). ``sigma_f_sq`` overrides
    ``hp.sigma_f_sq``.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise DomainError("eigenvalue must be >= 0")
    amp = hp.sigma_f_sq if sigma_f_sq is None else sigma_f_sq
    ell = hp.length_scale
    return amp * math.sqrt(2.0 * math.pi) * ell * np.exp(-0.5 * ell**2 * lam)


def feature_matrix(inputs, d: int, cfg: BasisConfig) -> np.ndarray:
    """Basis evaluations for dimension ``d`` (1-based): an ``N x M_d`` matrix."""
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    if not 1 <= d <= cfg.dims:
        raise ShapeError(f"dimension index {d} outside 1..{cfg.dims}")
    if X.shape[1] != cfg.dims:
        raise ShapeError(f"inputs have {X.shape[1]} columns, expected {cfg.dims}")
    m = np.arange(1, cfg.m_per_dim[d - 1] + 1)
    return eigenfunction_value(X[:, d - 1, None], m[None, :], cfg.half_widths[d - 1])


def feature_factors(inputs, cfg: BasisConfig) -> list[np.ndarray]:
    return [feature_matrix(inputs, d, cfg) for d in range(1, cfg.dims + 1)]


def lambda_factors(cfg: BasisConfig, hp: HyperParams) -> LambdaFactors:
    """Spectral-density weights per dimension.

    The signal variance is split evenly as ``sigma_f_sq ** (1/D)`` per factor so
    that the Kronecker product carries ``sigma_f_sq`` exactly once, matching the
    D-dimensional squared-exponential kernel. For ``D == 1`` this is the plain
    one-dimensional density.
    """
    amp = hp.sigma_f_sq ** (1.0 / cfg.dims)
    diags = []
    for M_d, L_d in zip(cfg.m_per_dim, cfg.half_widths):
        lam = eigenvalue(np.arange(1, M_d + 1), L_d)
        diags.append(spectral_density(lam, hp, sigma_f_sq=amp))
    return LambdaFactors(tuple(diags))


def scaled_factors(factors: Sequence[np.ndarray], lf: LambdaFactors) -> list[np.ndarray]:
    """Fold the square-rooted spectral weights into the feature columns."""
    if len(factors) != len(lf.diag_per_dim):
        raise ShapeError("feature factors and lambda factors differ in dimension count")
    return [F * s[None, :] for F, s in zip(factors, lf.sqrt_per_dim)]


def se_kernel(X1, X2, hp: HyperParams) -> np.ndarray:
    """Squared-exponential kernel ``sigma_f^2 exp(-|x - x'|^2 / 2 ell^2)``."""
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    X2 = np.atleast_2d(np.asarray(X2, dtype=float))
    sq = (
        np.sum(X1**2, axis=1)[:, None]
        + np.sum(X2**2, axis=1)[None, :]
        - 2.0 * X1 @ X2.T
    )
    np.maximum(sq, 0.0, out=sq)
    return hp.sigma_f_sq * np.exp(-0.5 * sq / hp.length_scale**2)
