"""Synthetic data from the projected model, CSV ingestion and hyperbox scaling."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .basis import BasisConfig, HyperParams, lambda_factors
from .exceptions import ConfigError, DataError
from .structured import FeatureSet, project_features
from .tt import TensorTrain, expand_ranks, orthogonalize_site, tt_random


@dataclass(frozen=True)
class Scaling:
    """Per-dimension centers and hyperbox half-widths fitted on training inputs."""

    center: np.ndarray
    half_width: np.ndarray

    def transform(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) - self.center[None, :]

    def inverse_transform(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) + self.center[None, :]


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray
    scaling: Optional[Scaling] = None
    input_names: tuple[str, ...] = ()
    target_name: str = "y"
    noiseless: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.asarray(self.targets, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise DataError(f"{X.shape[0]} input rows but {y.shape[0]} targets")
        if X.shape[0] < 1:
            raise DataError("a dataset needs at least one row")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DataError("dataset contains non-finite values")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "targets", y)
        if not self.input_names:
            names = tuple(f"x{d + 1}" for d in range(X.shape[1]))
            object.__setattr__(self, "input_names", names)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def dims(self) -> int:
        return self.inputs.shape[1]


def fit_scaling(raw, boundary_factor: float = 0.5) -> Scaling:
    """Center each column and set ``L_d = (1 + boundary_factor) * max |centered|``.

    A constant column gets ``L_d = 1`` and a warning.
    """
    if not boundary_factor > 0:
        raise ConfigError(f"boundary_factor must be > 0, got {boundary_factor}")
    X = raw.inputs if isinstance(raw, Dataset) else np.atleast_2d(np.asarray(raw, dtype=float))
    center = X.mean(axis=0)
    spread = np.max(np.abs(X - center[None, :]), axis=0)
    half_width = (1.0 + boundary_factor) * spread
    constant = spread <= 0
    if np.any(constant):
        warnings.warn(
            f"constant input column(s) {np.flatnonzero(constant).tolist()}; half-width set to 1",
            RuntimeWarning,
            stacklevel=2,
        )
        half_width[constant] = 1.0
    return Scaling(center, half_width)


def apply_scaling(raw: Dataset, scaling: Scaling) -> Dataset:
    return replace(raw, inputs=scaling.transform(raw.inputs), scaling=scaling)


def invert_scaling(ds: Dataset, scaling: Scaling) -> Dataset:
    return replace(ds, inputs=scaling.inverse_transform(ds.inputs), scaling=None)


def load_csv(path, input_columns: Optional[Sequence[str]] = None,
             target_column: Optional[str] = None) -> Dataset:
    """Read a headered, comma-separated UTF-8 file.

    Without ``input_columns`` every column except the target is an input;
    without ``target_column`` the last column is the target. Row numbers in
    error messages count the header as row 1.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if target_column is None:
            target_column = header[-1]
        if target_column not in header:
            raise DataError(f"{path}: target column {target_column!r} not in header")
        if input_columns is None:
            input_columns = [h for h in header if h != target_column]
        missing = [c for c in input_columns if c not in header]
        if missing:
            raise DataError(f"{path}: input columns {missing} not in header")
        cols = [header.index(c) for c in input_columns]
        tcol = header.index(target_column)
        X, y = [], []
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {rowno} has {len(row)} fields, expected {len(header)}"
                )
            values = []
            for c in cols + [tcol]:
                try:
                    v = float(row[c])
                except ValueError:
                    raise DataError(
                        f"{path}: row {rowno}, column {header[c]!r}: not a number: {row[c]!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(
                        f"{path}: row {rowno}, column {header[c]!r}: non-finite value {row[c]!r}"
                    )
                values.append(v)
            X.append(values[:-1])
            y.append(values[-1])
    if not X:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(X), np.array(y), None, tuple(input_columns), target_column)


def write_csv(path, ds: Dataset, extra: Optional[dict] = None):
    """Write inputs, target and any extra named columns with full float precision."""
    names = list(ds.input_names) + [ds.target_name]
    cols = [ds.inputs[:, d] for d in range(ds.dims)] + [ds.targets]
    for k, v in (extra or {}).items():
        names.append(k)
        cols.append(np.asarray(v, dtype=float))
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*cols):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True)
class SyntheticSpec:
    """Setup for data drawn from ``y = Phi sqrt(Lambda) W w_d + eps``.

    ``box`` is the half-width of the region inputs are sampled from; the basis
    hyperbox is ``basis.half_widths``. ``layout="grid"`` places the training
    inputs on a regular grid and needs ``n_train`` to be a perfect D-th power.
    """

    basis: BasisConfig
    hp: HyperParams
    ranks: object = 1
    n_train: int = 4000
    n_test: int = 1000
    layout: str = "uniform"
    site: Optional[int] = None
    snr_db: float = 10.0
    box: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.layout not in ("grid", "uniform"):
            raise ConfigError(f"layout must be 'grid' or 'uniform', got {self.layout!r}")
        if self.n_train < 1 or self.n_test < 0:
            raise ConfigError("n_train must be >= 1 and n_test >= 0")
        if self.box <= 0:
            raise ConfigError("box must be > 0")
        site = self.site if self.site is not None else math.ceil(self.basis.dims / 2)
        if not 1 <= site <= self.basis.dims:
            raise ConfigError(f"site {site} outside 1..{self.basis.dims}")
        object.__setattr__(self, "site", site)
        expand_ranks(self.ranks, self.basis.dims)


@dataclass(frozen=True)
class GroundTruth:
    f_train: np.ndarray
    f_test: np.ndarray
    sigma_y_sq: float
    tt: TensorTrain
    core: np.ndarray


def _grid(n: int, dims: int, box: float) -> np.ndarray:
    per = round(n ** (1.0 / dims))
    if per**dims != n:
        raise ConfigError(f"grid layout needs n_train to be a perfect power of {dims}, got {n}")
    axis = np.linspace(-box, box, per)
    mesh = np.meshgrid(*([axis] * dims), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, Dataset, GroundTruth]:
    """Draw train/test data from a random orthogonalized projection.

    The noise variance is set from ``snr_db`` using the mean square of the
    noiseless training signal; ``spec.hp.sigma_y_sq`` is ignored.
    """
    dims = spec.basis.dims
    ss = np.random.SeedSequence(spec.seed)
    rng_x, rng_tt, rng_w, rng_eps = (np.random.default_rng(s) for s in ss.spawn(4))
    if spec.layout == "grid":
        X = _grid(spec.n_train, dims, spec.box)
    else:
        X = rng_x.uniform(-spec.box, spec.box, size=(spec.n_train, dims))
    Xs = rng_x.uniform(-spec.box, spec.box, size=(spec.n_test, dims))

    tt = tt_random(spec.basis, spec.ranks, seed=rng_tt)
    tt = orthogonalize_site(tt, spec.site)
    core = rng_w.standard_normal(tt.core_size(spec.site))
    tt = tt.with_core(spec.site, core, site=spec.site)

    lf = lambda_factors(spec.basis, spec.hp)
    f = project_features(FeatureSet.from_inputs(X, spec.basis), lf, tt, spec.site) @ core
    if spec.n_test:
        fs = project_features(FeatureSet.from_inputs(Xs, spec.basis), lf, tt, spec.site) @ core
    else:
        fs = np.zeros(0)
    power = float(np.mean(f**2))
    sigma_y_sq = power / 10.0 ** (spec.snr_db / 10.0)
    noise_sd = math.sqrt(sigma_y_sq)
    y = f + noise_sd * rng_eps.standard_normal(f.shape)
    ys = fs + noise_sd * rng_eps.standard_normal(fs.shape)
    train = Dataset(X, y, noiseless=f)
    test = Dataset(Xs, ys, noiseless=fs) if spec.n_test else None
    return train, test, GroundTruth(f, fs, sigma_y_sq, tt, core)
