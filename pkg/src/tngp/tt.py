"""Tensor-train representation of the weight vector.

Core ``d`` has shape ``(R_d, M_d, R_{d+1})`` with ``R_1 = R_{D+1} = 1``. The
represented vector is the C-order flattening of the full tensor, so dimension 1
varies slowest, matching the Kronecker order of the feature rows. Core indices
are 1-based throughout the public API, as are sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import ConfigError, ShapeError, SizeError

MATERIALIZATION_CAP = 10**6


@dataclass(frozen=True)
class TensorTrain:
    """Immutable chain of three-way cores.

    ``site`` records the mixed-canonical center (1-based) or ``None`` when the
    train is not known to be in canonical format.
    """

    cores: tuple[np.ndarray, ...]
    site: Optional[int] = field(default=None)

    def __post_init__(self):
        cores = []
        for c in self.cores:
            c = np.array(c, dtype=float)
            if c.ndim != 3:
                raise ShapeError(f"TT-cores must be three-way, got shape {c.shape}")
            c.setflags(write=False)
            cores.append(c)
        object.__setattr__(self, "cores", tuple(cores))
        if not cores:
            raise ShapeError("a tensor train needs at least one core")
        if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
            raise ShapeError("boundary ranks R_1 and R_{D+1} must equal 1")
        for k in range(len(cores) - 1):
            if cores[k].shape[2] != cores[k + 1].shape[0]:
                raise ShapeError(
                    f"rank mismatch between cores {k + 1} and {k + 2}: "
                    f"{cores[k].shape} vs {cores[k + 1].shape}"
                )
        if self.site is not None and not 1 <= self.site <= len(cores):
            raise ShapeError(f"site {self.site} outside 1..{len(cores)}")

    @property
    def dims(self) -> int:
        return len(self.cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(c.shape[0] for c in self.cores) + (1,)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    def core_size(self, d: int) -> int:
        """Number of entries of core ``d``, i.e. ``R_d * M_d * R_{d+1}``."""
        return self.cores[d - 1].size

    def with_core(self, d: int, core, site: Optional[int] = None) -> "TensorTrain":
        core = np.asarray(core, dtype=float).reshape(self.cores[d - 1].shape)
        cores = list(self.cores)
        cores[d - 1] = core
        return TensorTrain(tuple(cores), site=site)


def check_rank_chain(ranks: Sequence[int], dims: int) -> tuple[int, ...]:
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != dims + 1:
        raise ConfigError(f"rank chain needs {dims + 1} entries, got {len(ranks)}")
    if ranks[0] != 1 or ranks[-1] != 1:
        raise ConfigError(f"boundary ranks must be 1, got {ranks}")
    if any(r < 1 for r in ranks):
        raise ConfigError(f"all ranks must be >= 1, got {ranks}")
    return ranks


def expand_ranks(ranks, dims: int) -> tuple[int, ...]:
    """Accept a uniform int, the D-1 interior ranks, or the full D+1 chain."""
    if np.isscalar(ranks):
        r = int(ranks)
        return check_rank_chain((1,) + (r,) * (dims - 1) + (1,), dims)
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) == dims - 1:
        ranks = (1,) + ranks + (1,)
    return check_rank_chain(ranks, dims)


def maximal_ranks(shape: Sequence[int]) -> tuple[int, ...]:
    """Largest ranks a train of this mode shape can carry without redundancy."""
    D = len(shape)
    return tuple(
        min(math.prod(shape[:k]), math.prod(shape[k:])) for k in range(D + 1)
    )


def tt_random(shape: Sequence[int], ranks, seed=None) -> TensorTrain:
    """Train with standard-normal entries drawn from ``np.random.default_rng(seed)``.

    ``shape`` is the sequence of mode sizes ``M_d`` (a ``BasisConfig`` is also
    accepted).
    """
    shape = tuple(getattr(shape, "m_per_dim", shape))
    ranks = expand_ranks(ranks, len(shape))
    rng = np.random.default_rng(seed)
    cores = tuple(
        rng.standard_normal((ranks[k], shape[k], ranks[k + 1]))
        for k in range(len(shape))
    )
    return TensorTrain(cores)


def contract_full(tt: TensorTrain, cap: int = MATERIALIZATION_CAP) -> np.ndarray:
    """Materialize the represented vector of length ``prod(M_d)``."""
    total = math.prod(tt.shape)
    if total > cap:
        raise SizeError(f"vector of {total} entries exceeds materialization cap {cap}")
    out = tt.cores[0].reshape(-1, tt.cores[0].shape[2])
    for core in tt.cores[1:]:
        r0 = core.shape[0]
        out = out @ core.reshape(r0, -1)
        out = out.reshape(-1, core.shape[2])
    return out.reshape(-1)


def left_matrix(tt: TensorTrain, d: int) -> np.ndarray:
    """Contraction of cores ``1..d-1`` as a ``(prod_{k<d} M_k) x R_d`` matrix."""
    out = np.ones((1, 1))
    for core in tt.cores[: d - 1]:
        out = (out @ core.reshape(core.shape[0], -1)).reshape(-1, core.shape[2])
    return out


def right_matrix(tt: TensorTrain, d: int) -> np.ndarray:
    """Contraction of cores ``d+1..D`` as an ``R_{d+1} x (prod_{k>d} M_k)`` matrix."""
    out = np.ones((1, 1))
    for core in reversed(tt.cores[d:]):
        out = (core.reshape(-1, core.shape[2]) @ out).reshape(core.shape[0], -1)
    return out


def materialize_projection(
    tt: TensorTrain, d: int, cap: int = MATERIALIZATION_CAP
) -> np.ndarray:
    """Dense matrix ``W`` with ``contract_full(tt) == W @ tt.cores[d-1].ravel()``.

    Intended as a test oracle; the column index runs over ``(r_d, m_d, r_{d+1})``
    in C order.
    """
    if not 1 <= d <= tt.dims:
        raise ShapeError(f"site {d} outside 1..{tt.dims}")
    rows = math.prod(tt.shape)
    cols = tt.core_size(d)
    if rows * cols > cap:
        raise SizeError(f"projection of {rows}x{cols} exceeds materialization cap {cap}")
    left = left_matrix(tt, d)
    right = right_matrix(tt, d)
    M_d = tt.shape[d - 1]
    # W[(i<, m, i>), (a, m', b)] = left[i<, a] * delta(m, m') * right[b, i>]
    W = np.einsum("ia,mn,bj->imjanb", left, np.eye(M_d), right)
    return W.reshape(rows, cols)


def _qr_pos(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR with a nonnegative diagonal in the triangular factor."""
    Q, R = np.linalg.qr(A, mode="reduced")
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs[None, :], R * signs[:, None]


def _left_orth_step(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Make ``a`` left-orthogonal and push the triangular factor into ``b``."""
    r0, m, _ = a.shape
    Q, R = _qr_pos(a.reshape(r0 * m, -1))
    new_a = Q.reshape(r0, m, Q.shape[1])
    new_b = np.tensordot(R, b, axes=(1, 0))
    return new_a, new_b


def _right_orth_step(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Make ``b`` right-orthogonal and push the triangular factor into ``a``."""
    _, m, r1 = b.shape
    Q, R = _qr_pos(b.reshape(b.shape[0], m * r1).T)
    new_b = Q.T.reshape(Q.shape[1], m, r1)
    new_a = np.tensordot(a, R.T, axes=(2, 0))
    return new_a, new_b


def shift_site(tt: TensorTrain, direction: int) -> TensorTrain:
    """Move the canonical center of ``tt`` one core left (-1) or right (+1)."""
    if tt.site is None:
        raise ShapeError("shift_site needs a train in mixed-canonical format")
    d = tt.site
    cores = list(tt.cores)
    if direction > 0:
        if d == tt.dims:
            raise ShapeError("cannot move the center past the last core")
        cores[d - 1], cores[d] = _left_orth_step(cores[d - 1], cores[d])
        return TensorTrain(tuple(cores), site=d + 1)
    if d == 1:
        raise ShapeError("cannot move the center before the first core")
    cores[d - 2], cores[d - 1] = _right_orth_step(cores[d - 2], cores[d - 1])
    return TensorTrain(tuple(cores), site=d - 1)


def orthogonalize_site(tt: TensorTrain, d: int) -> TensorTrain:
    """Bring ``tt`` into site-``d`` mixed-canonical format.

    Cores left of ``d`` become left-orthogonal and cores right of ``d``
    right-orthogonal, so the projection onto core ``d`` has orthonormal columns.
    Interior ranks can shrink when an unfolding has fewer rows than columns.
    """
    if not 1 <= d <= tt.dims:
        raise ShapeError(f"site {d} outside 1..{tt.dims}")
    cores = list(tt.cores)
    for k in range(d - 1):
        cores[k], cores[k + 1] = _left_orth_step(cores[k], cores[k + 1])
    for k in range(tt.dims - 1, d - 1, -1):
        cores[k - 1], cores[k] = _right_orth_step(cores[k - 1], cores[k])
    return TensorTrain(tuple(cores), site=d)


def move_site(tt: TensorTrain, d: int) -> TensorTrain:
    """Shift an already canonical train to center ``d`` one core at a time."""
    if tt.site is None:
        return orthogonalize_site(tt, d)
    while tt.site < d:
        tt = shift_site(tt, +1)
    while tt.site > d:
        tt = shift_site(tt, -1)
    return tt
