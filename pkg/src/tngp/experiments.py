"""Experiment orchestration shared by the command-line verbs."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import baseline, projected
from .als import AlsConfig
from .basis import BasisConfig, HyperParams
from .config import ExperimentConfig
from .data import Dataset, GroundTruth, Scaling, SyntheticSpec, apply_scaling, fit_scaling, generate_synthetic, load_csv
from .exceptions import ConfigError
from .metrics import msll, rmse, sum_log_loss
from .modelio import FittedModel
from .tt import expand_ranks

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ("method", "rank", "seed", "n_train", "n_test", "basis_count",
                  "rmse", "rmse_f", "msll", "sum_log_loss", "time_fit", "time_predict")
PLOT_COLUMNS = ("method", "rank", "n_runs", "rmse_mean", "rmse_std", "rmse_f_mean", "rmse_f_std",
                "msll_mean", "msll_std", "time_fit_mean", "time_fit_std")


@dataclass
class Problem:
    train: Dataset
    test: Optional[Dataset]
    sigma_y_sq: float
    basis: BasisConfig
    scaling: Optional[Scaling]
    truth: Optional[GroundTruth] = None


def synthetic_spec(cfg: ExperimentConfig, seed: int, ranks=None) -> SyntheticSpec:
    dims = cfg.dims
    widths = cfg.per_dim("half_widths", dims) if cfg.half_widths else ((1.0 + cfg.boundary_factor) * cfg.box,) * dims
    basis = BasisConfig(cfg.per_dim("m_per_dim", dims), widths)
    data_ranks = cfg.data_ranks if cfg.data_ranks is not None else cfg.ranks
    if ranks is not None:
        data_ranks = (ranks,)
    return SyntheticSpec(
        basis=basis, hp=HyperParams(cfg.sigma_f_sq, cfg.ell, 1.0),
        ranks=cfg.ranks_arg(data_ranks), n_train=cfg.n_train, n_test=cfg.n_test,
        layout=cfg.layout, site=cfg.site, snr_db=cfg.snr_db, box=cfg.box, seed=seed,
    )


def load_problem(cfg: ExperimentConfig, seed: Optional[int] = None, ranks=None) -> Problem:
    """Build the train/test split and the basis configuration for one run."""
    seed = cfg.seed if seed is None else seed
    if cfg.source == "synthetic":
        spec = synthetic_spec(cfg, seed, ranks)
        train, test, truth = generate_synthetic(spec)
        s2 = truth.sigma_y_sq if cfg.sigma_y_sq is None else cfg.sigma_y_sq
        return Problem(train, test, s2, spec.basis, None, truth)

    cols = cfg.input_columns
    raw = load_csv(cfg.train_csv, _input_columns(cfg.train_csv, cols, cfg.target_column), cfg.target_column)
    test = None
    if cfg.test_csv:
        test = load_csv(cfg.test_csv, list(raw.input_names), cfg.target_column)
    if cfg.sigma_y_sq is None:
        raise ConfigError("key 'sigma_y_sq': required when source = csv")
    dims = raw.dims
    if cfg.half_widths:
        scaling = None
        widths = cfg.per_dim("half_widths", dims)
        train = raw
    else:
        scaling = fit_scaling(raw, cfg.boundary_factor)
        widths = tuple(scaling.half_width)
        train = apply_scaling(raw, scaling)
        if test is not None:
            test = apply_scaling(test, scaling)
    basis = BasisConfig(cfg.per_dim("m_per_dim", dims), widths)
    return Problem(train, test, cfg.sigma_y_sq, basis, scaling)


def _input_columns(path, cols, target):
    if cols:
        return list(cols)
    with open(path, encoding="utf-8") as fh:
        header = [h.strip() for h in fh.readline().split(",")]
    return [h for h in header if h not in (target, "f")]


def hyperparams(cfg: ExperimentConfig, problem: Problem) -> HyperParams:
    return HyperParams(cfg.sigma_f_sq, cfg.ell, problem.sigma_y_sq)


def core_size(basis: BasisConfig, ranks, site: int) -> int:
    chain = expand_ranks(ranks, basis.dims)
    return chain[site - 1] * basis.m_per_dim[site - 1] * chain[site]


def fit_method(method: str, cfg: ExperimentConfig, problem: Problem, ranks=None,
               seed: Optional[int] = None) -> tuple[FittedModel, dict]:
    """Fit one method on the (already scaled) training data and time it."""
    hp = hyperparams(cfg, problem)
    basis = problem.basis
    site = cfg.site if cfg.site is not None else math.ceil(basis.dims / 2)
    ranks = cfg.ranks_arg() if ranks is None else ranks
    X, y = problem.train.inputs, problem.train.targets
    info: dict = {"method": method}
    t0 = time.perf_counter()
    if method == "projected":
        als_cfg = AlsConfig(cfg.max_sweeps, cfg.rel_tol, cfg.reg_lambda,
                            cfg.seed if seed is None else seed)
        post, als = projected.fit(X, y, basis, hp, ranks, als_cfg, site, return_als=True)
        info.update(objective_trace=als.trace.tolist(), sweep_trace=als.sweep_trace.tolist(),
                    n_sweeps=als.n_sweeps, basis_count=post.mean_core.size)
    elif method == "hilbert-gp":
        budget = cfg.budget if cfg.budget is not None else core_size(basis, ranks, site)
        post = baseline.hilbert_gp_fit(X, y, basis, hp, budget, max_basis=cfg.max_basis)
        info.update(basis_count=int(budget))
    elif method == "full-gp":
        post = baseline.full_gp_fit(X, y, hp, max_n=cfg.full_max_n)
        info.update(basis_count=0)
    else:
        raise ConfigError(f"key 'method': unknown method {method!r}")
    info["time_fit"] = time.perf_counter() - t0
    return FittedModel(method, post, problem.scaling), info


def predict_scaled(model: FittedModel, X_scaled) -> projected.Prediction:
    """Predict on inputs that are already in hyperbox coordinates."""
    return FittedModel(model.method, model.posterior, None).predict(X_scaled)


def evaluate(model: FittedModel, problem: Problem) -> dict:
    test = problem.test
    t0 = time.perf_counter()
    pred = predict_scaled(model, test.inputs)
    t_pred = time.perf_counter() - t0
    s2 = problem.sigma_y_sq
    row = {
        "rmse": rmse(pred.mean, test.targets),
        "rmse_f": rmse(pred.mean, test.noiseless) if test.noiseless is not None else float("nan"),
        "msll": msll(pred.mean, pred.variance, test.targets, s2, problem.train.targets),
        "sum_log_loss": sum_log_loss(pred.mean, pred.variance, test.targets, s2),
        "time_predict": t_pred,
    }
    return row


def rank_sweep(cfg: ExperimentConfig) -> list[dict]:
    """Every method on identical synthetic splits for each rank and seed."""
    if cfg.source != "synthetic":
        raise ConfigError("key 'source': compare needs synthetic data")
    rank_list = cfg.rank_list or (1, 5, 10, 20)
    seeds = cfg.seeds or tuple(range(cfg.seed, cfg.seed + 10))
    rows = []
    for r in rank_list:
        for seed in seeds:
            problem = load_problem(cfg, seed=seed, ranks=r)
            for method in cfg.methods:
                model, info = fit_method(method, cfg, problem, ranks=r, seed=seed)
                row = {"method": method, "rank": r, "seed": seed, "n_train": problem.train.n,
                       "n_test": problem.test.n, "basis_count": info["basis_count"],
                       "time_fit": info["time_fit"]}
                row.update(evaluate(model, problem))
                logger.info("rank %s seed %s %s rmse_f %.4g", r, seed, method, row["rmse_f"])
                rows.append(row)
    return rows


def aggregate(rows: list[dict]) -> list[dict]:
    out = []
    keys = []
    for row in rows:
        k = (row["method"], row["rank"])
        if k not in keys:
            keys.append(k)
    for method, rank in keys:
        sel = [r for r in rows if r["method"] == method and r["rank"] == rank]
        agg = {"method": method, "rank": rank, "n_runs": len(sel)}
        for name in ("rmse", "rmse_f", "msll", "time_fit"):
            vals = np.array([r[name] for r in sel], dtype=float)
            agg[f"{name}_mean"] = float(np.mean(vals))
            agg[f"{name}_std"] = float(np.std(vals))
        out.append(agg)
    return out


def bench(cfg: ExperimentConfig, warmup_rows: int = 200) -> list[dict]:
    """Fit and evaluate each method once on the configured data.

    Each method is first run on the leading ``warmup_rows`` training points so
    that one-off costs (imports, BLAS initialization) stay out of the timings.
    """
    problem = load_problem(cfg)
    if problem.test is None:
        raise ConfigError("key 'test_csv': bench needs test data")
    rows = []
    for method in cfg.methods:
        n_warm = min(warmup_rows, problem.train.n)
        warm = Problem(Dataset(problem.train.inputs[:n_warm], problem.train.targets[:n_warm]),
                       None, problem.sigma_y_sq, problem.basis, problem.scaling)
        warm_cfg = cfg.with_overrides(max_sweeps=1)
        try:
            model, _ = fit_method(method, warm_cfg, warm)
            predict_scaled(model, problem.test.inputs[:n_warm])
        except Exception as exc:  # warm-up only; the real run reports errors
            logger.debug("warm-up for %s failed: %s", method, exc)
        model, info = fit_method(method, cfg, problem)
        row = {"method": method, "n_train": problem.train.n, "n_test": problem.test.n,
               "basis_count": info["basis_count"], "time_fit": info["time_fit"]}
        row.update(evaluate(model, problem))
        rows.append(row)
    return rows
