"""Binary model files.

Layout: the 4 bytes ``b"TNGP"``, a little-endian uint32 header length, a UTF-8
JSON header, then the arrays listed in ``header["arrays"]`` as contiguous
little-endian float64 data in row-major order. Hyperparameters and half-widths
are stored as JSON floats, which round-trip exactly.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import baseline, projected
from .basis import BasisConfig, HyperParams, lambda_factors
from .data import Scaling
from .exceptions import DataError
from .tt import TensorTrain

MAGIC = b"TNGP"
VERSION = 1

Posterior = Union[projected.ProjectedPosterior, baseline.HilbertPosterior, baseline.FullGPState]


@dataclass(frozen=True)
class FittedModel:
    """A fitted posterior plus the input scaling learned on the training data."""

    method: str
    posterior: Posterior
    scaling: Optional[Scaling] = None

    def predict(self, raw_inputs, include_noise: bool = False) -> projected.Prediction:
        X = np.atleast_2d(np.asarray(raw_inputs, dtype=float))
        if self.scaling is not None:
            X = self.scaling.transform(X)
        if self.method == "projected":
            pred = projected.predict(self.posterior, X)
        elif self.method == "hilbert-gp":
            pred = baseline.hilbert_gp_posterior(self.posterior, X)
        else:
            pred = baseline.full_gp_posterior(self.posterior, X)
        if include_noise:
            pred = projected.Prediction(pred.mean, pred.variance + self.posterior.hp.sigma_y_sq)
        return pred


def _hp_dict(hp: HyperParams) -> dict:
    return {"sigma_f_sq": hp.sigma_f_sq, "length_scale": hp.length_scale, "sigma_y_sq": hp.sigma_y_sq}


def save_model(path, model: FittedModel):
    post = model.posterior
    header = {"magic": MAGIC.decode(), "version": VERSION, "method": model.method,
              "hp": _hp_dict(post.hp)}
    arrays: list[tuple[str, np.ndarray]] = []
    if model.method in ("projected", "hilbert-gp"):
        header.update(D=post.basis.dims, m_per_dim=list(post.basis.m_per_dim),
                      half_widths=list(post.basis.half_widths))
    if model.method == "projected":
        tt = post.projection_tt
        header.update(ranks=list(tt.ranks), site=post.site)
        arrays += [(f"core{k + 1}", c) for k, c in enumerate(tt.cores)]
        arrays += [("mean_core", post.mean_core), ("cov_core", post.cov_core)]
    elif model.method == "hilbert-gp":
        arrays += [("indices", post.indices.astype(float)), ("mean", post.mean), ("cov", post.cov)]
    elif model.method == "full-gp":
        header.update(D=post.train_inputs.shape[1])
        arrays += [("train_inputs", post.train_inputs), ("alpha", post.alpha), ("chol", post.chol)]
    else:
        raise DataError(f"unknown model method {model.method!r}")
    if model.scaling is not None:
        arrays += [("scaling_center", model.scaling.center),
                   ("scaling_half_width", model.scaling.half_width)]
    header["arrays"] = [{"name": n, "shape": list(a.shape)} for n, a in arrays]
    blob = json.dumps(header).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_model(path) -> FittedModel:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise DataError(f"{path}: not a TNGP model file")
    if len(raw) < 8:
        raise DataError(f"{path}: truncated model file")
    (hlen,) = struct.unpack("<I", raw[4:8])
    try:
        header = json.loads(raw[8:8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise DataError(f"{path}: unreadable model header") from None
    if header.get("version") != VERSION:
        raise DataError(f"{path}: unsupported model version {header.get('version')}")
    offset = 8 + hlen
    arrays = {}
    for spec in header["arrays"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        if offset + 8 * count > len(raw):
            raise DataError(f"{path}: payload shorter than header declares")
        a = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape)
        arrays[spec["name"]] = a.astype(float)
        offset += 8 * count
    if offset != len(raw):
        raise DataError(f"{path}: payload length does not match header")
    hp = HyperParams(**header["hp"])
    method = header["method"]
    scaling = None
    if "scaling_center" in arrays:
        scaling = Scaling(arrays["scaling_center"], arrays["scaling_half_width"])
    if method in ("projected", "hilbert-gp"):
        basis = BasisConfig(tuple(header["m_per_dim"]), tuple(header["half_widths"]))
        lf = lambda_factors(basis, hp)
    if method == "projected":
        site = header["site"]
        cores = tuple(arrays[f"core{k + 1}"] for k in range(header["D"]))
        tt = TensorTrain(cores, site=site)
        post = projected.ProjectedPosterior(site, arrays["mean_core"], arrays["cov_core"],
                                            tt, basis, lf, hp)
    elif method == "hilbert-gp":
        post = baseline.HilbertPosterior(arrays["indices"].astype(int), arrays["mean"],
                                         arrays["cov"], basis, lf, hp)
    elif method == "full-gp":
        post = baseline.FullGPState(arrays["train_inputs"], arrays["alpha"], arrays["chol"], hp)
    else:
        raise DataError(f"{path}: unknown model method {method!r}")
    return FittedModel(method, post, scaling)
