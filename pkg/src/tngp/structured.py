"""Products with the Khatri-Rao feature matrix computed one dimension at a time.

For data point ``n`` and site ``d`` the projected feature row is
``kron(left_n, phi_d(x_n), right_n)``, where ``left_n`` contracts the scaled
feature rows of dimensions ``1..d-1`` with their cores and ``right_n`` does the
same for ``d+1..D``. Nothing of size ``prod(M_d)`` is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .basis import BasisConfig, LambdaFactors, feature_factors, scaled_factors
from .exceptions import ShapeError
from .tt import TensorTrain


@dataclass(frozen=True)
class FeatureSet:
    """Per-dimension ``N x M_d`` basis evaluations sharing a row count."""

    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        factors = tuple(np.asarray(F, dtype=float) for F in self.factors)
        if not factors:
            raise ShapeError("a feature set needs at least one factor")
        n = factors[0].shape[0]
        for F in factors:
            if F.ndim != 2 or F.shape[0] != n:
                raise ShapeError("all feature factors must be 2-D with equal row counts")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_inputs(cls, inputs, cfg: BasisConfig) -> "FeatureSet":
        return cls(tuple(feature_factors(inputs, cfg)))

    @property
    def n(self) -> int:
        return self.factors[0].shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(F.shape[1] for F in self.factors)

    def scaled(self, lf: LambdaFactors) -> "FeatureSet":
        """Copy with column ``m`` of factor ``d`` scaled by ``sqrt(Lambda_d[m])``."""
        return FeatureSet(tuple(scaled_factors(self.factors, lf)))

    def dense(self) -> np.ndarray:
        """Row-wise Kronecker product (dimension 1 slowest). Oracle use only."""
        out = np.ones((self.n, 1))
        for F in self.factors:
            out = np.einsum("ni,nj->nij", out, F).reshape(self.n, -1)
        return out


def _check_compatible(factors: Sequence[np.ndarray], tt: TensorTrain):
    if len(factors) != tt.dims:
        raise ShapeError(f"{len(factors)} feature factors for a {tt.dims}-core train")
    for k, (F, core) in enumerate(zip(factors, tt.cores), start=1):
        if F.shape[1] != core.shape[1]:
            raise ShapeError(
                f"dimension {k}: {F.shape[1]} basis functions but core mode size {core.shape[1]}"
            )


def core_contraction(F: np.ndarray, core: np.ndarray) -> np.ndarray:
    """``Z[n] = sum_m F[n, m] core[:, m, :]`` as an ``N x R_k x R_{k+1}`` array."""
    return np.einsum("nm,amb->nab", F, core, optimize=True)


def assemble(left: np.ndarray, F: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Rows ``kron(left[n], F[n], right[n])`` stacked into an ``N x K`` matrix."""
    n = F.shape[0]
    return np.einsum("na,nm,nb->namb", left, F, right, optimize=True).reshape(n, -1)


class InterfaceCache:
    """Left and right partial contractions for every site of one train.

    ``left[k]`` (0-based) is the ``N x R_{k+1}`` interface of cores ``1..k``;
    ``right[k]`` is the ``N x R_{k+1}`` interface of cores ``k+1..D``. Only the
    entries that a given site needs are kept current; ``refresh`` after a core
    changes and its neighbour moves on.
    """

    def __init__(self, factors: Sequence[np.ndarray], tt: TensorTrain):
        _check_compatible(factors, tt)
        self.factors = list(factors)
        self.n = factors[0].shape[0]
        self.dims = tt.dims
        self.left: list[Optional[np.ndarray]] = [None] * (self.dims + 1)
        self.right: list[Optional[np.ndarray]] = [None] * (self.dims + 1)
        self.left[0] = np.ones((self.n, 1))
        self.right[self.dims] = np.ones((self.n, 1))
        for k in range(self.dims - 1, 0, -1):
            self.update_right(k + 1, tt.cores[k])

    def update_left(self, d: int, core: np.ndarray):
        """Extend the left interface across core ``d`` (1-based)."""
        Z = core_contraction(self.factors[d - 1], core)
        self.left[d] = np.einsum("na,nab->nb", self.left[d - 1], Z)

    def update_right(self, d: int, core: np.ndarray):
        """Extend the right interface across core ``d`` (1-based)."""
        Z = core_contraction(self.factors[d - 1], core)
        self.right[d - 1] = np.einsum("nab,nb->na", Z, self.right[d])

    def projected(self, d: int) -> np.ndarray:
        return assemble(self.left[d - 1], self.factors[d - 1], self.right[d])


def _interfaces(factors, tt: TensorTrain, d: int) -> tuple[np.ndarray, np.ndarray]:
    n = factors[0].shape[0]
    left = np.ones((n, 1))
    for k in range(d - 1):
        left = np.einsum("na,nab->nb", left, core_contraction(factors[k], tt.cores[k]))
    right = np.ones((n, 1))
    for k in range(tt.dims - 1, d - 1, -1):
        right = np.einsum("nab,nb->na", core_contraction(factors[k], tt.cores[k]), right)
    return left, right


def project_features(
    fs: FeatureSet, lf: Optional[LambdaFactors], tt: TensorTrain, d: int
) -> np.ndarray:
    """``Phi @ diag(sqrt(Lambda)) @ W`` for the projection ``W`` onto core ``d``.

    Pass ``lf=None`` when ``fs`` already carries the spectral scaling. Cost is
    ``O(N D R^2 M_d)`` and the result is ``N x (R_d M_d R_{d+1})``.
    """
    if not 1 <= d <= tt.dims:
        raise ShapeError(f"site {d} outside 1..{tt.dims}")
    factors = fs.factors if lf is None else scaled_factors(fs.factors, lf)
    _check_compatible(factors, tt)
    left, right = _interfaces(factors, tt, d)
    return assemble(left, factors[d - 1], right)


def project_test_rows(
    test_inputs, cfg: BasisConfig, lf: LambdaFactors, tt: TensorTrain, d: int
) -> np.ndarray:
    """Projected feature rows for new inputs; same algorithm as ``project_features``."""
    return project_features(FeatureSet.from_inputs(test_inputs, cfg), lf, tt, d)


def gram_and_moment(A, y) -> tuple[np.ndarray, np.ndarray]:
    """Normal-equation pieces ``(A.T @ A, A.T @ y)``."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != y.shape[0]:
        raise ShapeError(f"A has shape {A.shape} but y has length {y.shape[0]}")
    G = A.T @ A
    G = 0.5 * (G + G.T)
    return G, A.T @ y
