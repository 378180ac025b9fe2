"""Flat ``key = value`` experiment configuration.

One setting per line, ``#`` starts a comment, lists are comma separated.
Unknown keys are rejected by name. Recognised keys:

==================  =========================================================
method              projected | hilbert-gp | full-gp
source              synthetic | csv
train_csv           training CSV (source = csv)
test_csv            test CSV (source = csv)
input_columns       comma list; default: every column but the target and ``f``
target_column       default ``y``
dims                input dimension D (synthetic)
n_train, n_test     synthetic sample counts
layout              uniform | grid (synthetic training inputs)
box                 synthetic inputs are drawn from [-box, box]^D
snr_db              synthetic signal-to-noise ratio in dB
data_ranks          TT-ranks used to generate synthetic data (default: ranks)
m_per_dim           basis functions per dimension (int or list)
half_widths         hyperbox half-widths; csv default derives them from data
boundary_factor     hyperbox margin for derived half-widths (default 0.5)
sigma_f_sq          signal variance
length_scale        length scale ell (or give length_scale_sq)
length_scale_sq     squared length scale
sigma_y_sq          noise variance (synthetic default: set from snr_db)
ranks               TT-rank: uniform int, interior list, or full chain
site                1-based Bayesian core (default ceil(D/2))
max_sweeps          ALS sweep limit
rel_tol             ALS relative objective tolerance
reg_lambda          ALS ridge weight (default sigma_y_sq)
budget              Hilbert-GP basis budget (default: projected core size)
max_basis           Hilbert-GP budget cap
full_max_n          full-GP training size guard
seed                base seed
seeds               comma list of seeds (compare)
rank_list           comma list of ranks (compare)
methods             comma list of methods (compare, bench)
out                 output path
threads             BLAS threads, 0 = automatic
==================  =========================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .exceptions import ConfigError

METHODS = ("projected", "hilbert-gp", "full-gp")

_INT = {"dims", "n_train", "n_test", "site", "max_sweeps", "budget", "max_basis",
        "full_max_n", "seed", "threads"}
_FLOAT = {"box", "snr_db", "boundary_factor", "sigma_f_sq", "length_scale",
          "length_scale_sq", "sigma_y_sq", "rel_tol", "reg_lambda"}
_STR = {"method", "source", "train_csv", "test_csv", "target_column", "layout", "out"}
_INT_LIST = {"data_ranks", "m_per_dim", "ranks", "seeds", "rank_list"}
_FLOAT_LIST = {"half_widths"}
_STR_LIST = {"input_columns", "methods"}
KEYS = _INT | _FLOAT | _STR | _INT_LIST | _FLOAT_LIST | _STR_LIST


@dataclass(frozen=True)
class ExperimentConfig:
    method: str = "projected"
    source: str = "synthetic"
    train_csv: Optional[str] = None
    test_csv: Optional[str] = None
    input_columns: Optional[tuple] = None
    target_column: str = "y"
    dims: Optional[int] = None
    n_train: int = 4000
    n_test: int = 1000
    layout: str = "uniform"
    box: float = 1.0
    snr_db: float = 10.0
    data_ranks: Optional[tuple] = None
    m_per_dim: tuple = (10,)
    half_widths: Optional[tuple] = None
    boundary_factor: float = 0.5
    sigma_f_sq: float = 1.0
    length_scale: Optional[float] = None
    length_scale_sq: Optional[float] = None
    sigma_y_sq: Optional[float] = None
    ranks: tuple = (5,)
    site: Optional[int] = None
    max_sweeps: int = 20
    rel_tol: float = 1e-6
    reg_lambda: Optional[float] = None
    budget: Optional[int] = None
    max_basis: int = 10000
    full_max_n: int = 20000
    seed: int = 0
    seeds: Optional[tuple] = None
    rank_list: Optional[tuple] = None
    methods: tuple = METHODS
    out: Optional[str] = None
    threads: int = 0
    path: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"key 'method': unknown method {self.method!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"key 'methods': unknown method {m!r}")
        if self.source not in ("synthetic", "csv"):
            raise ConfigError(f"key 'source': must be synthetic or csv, got {self.source!r}")
        if self.source == "csv":
            if not self.train_csv:
                raise ConfigError("key 'train_csv': required when source = csv")
            if self.dims is not None:
                raise ConfigError("key 'dims': only valid for source = synthetic")
        else:
            if self.train_csv or self.test_csv:
                raise ConfigError("key 'train_csv': only valid for source = csv")
            if self.dims is None:
                raise ConfigError("key 'dims': required when source = synthetic")
        if self.length_scale is not None and self.length_scale_sq is not None:
            raise ConfigError("key 'length_scale_sq': give length_scale or length_scale_sq, not both")

    @property
    def ell(self) -> float:
        if self.length_scale_sq is not None:
            return math.sqrt(self.length_scale_sq)
        return 1.0 if self.length_scale is None else self.length_scale

    def ranks_arg(self, ranks=None):
        r = self.ranks if ranks is None else ranks
        return r[0] if len(r) == 1 else tuple(r)

    def per_dim(self, name: str, dims: int) -> tuple:
        value = getattr(self, name)
        if len(value) == 1:
            return tuple(value) * dims
        if len(value) != dims:
            raise ConfigError(f"key {name!r}: {len(value)} entries for {dims} dimensions")
        return tuple(value)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def _convert(key: str, raw: str):
    try:
        if key in _INT:
            return int(raw)
        if key in _FLOAT:
            return float(raw)
        if key in _STR:
            return raw
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if key in _INT_LIST:
            return tuple(int(p) for p in parts)
        if key in _FLOAT_LIST:
            return tuple(float(p) for p in parts)
        return tuple(parts)
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse value {raw!r}") from None


def parse_config(text: str, path: Optional[str] = None) -> ExperimentConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw)
    if path is not None:
        base = Path(path).parent
        for k in ("train_csv", "test_csv"):
            if k in values and not Path(values[k]).is_absolute():
                values[k] = str(base / values[k])
    return ExperimentConfig(path=path, **values)


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text(encoding="utf-8"), str(p))
