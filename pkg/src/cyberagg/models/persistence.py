"""Trained-model container: JSON metadata plus a flat float64 payload.

Layout: 8-byte magic 'AGGRMDL1', little-endian uint64 metadata length, the
UTF-8 JSON metadata, then every named array appended as little-endian
float64 in the order listed under metadata['arrays'].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError
from ..preprocessing import Standardizer
from .logistic import SoftmaxRegression
from .network import AugmentedHeadClassifier, FeedForwardClassifier
from .svm import RBFKernelSVM

MAGIC = b"AGGRMDL1"

MODEL_TYPES = ("lr", "svm", "nn", "aug")


@dataclass
class TrainedModel:
    """A fitted estimator plus the preprocessing stats it was trained with."""

    model_type: str
    estimator: object
    standardizer: Standardizer
    target: str = ""
    blocks: tuple[str, ...] = ()
    seed: int | None = None
    metadata: dict = field(default_factory=dict)

    def predict(self, X):
        return self.estimator.predict(self.standardizer.transform(X))

    def predict_proba(self, X):
        return self.estimator.predict_proba(self.standardizer.transform(X))


def _collect_arrays(tm: TrainedModel) -> tuple[dict, dict[str, np.ndarray]]:
    est = tm.estimator
    arrays: dict[str, np.ndarray] = {
        "std_mean": tm.standardizer.mean_,
        "std_scale": tm.standardizer.scale_,
    }
    meta: dict = {
        "format_version": 1,
        "model_type": tm.model_type,
        "target": tm.target,
        "blocks": list(tm.blocks),
        "seed": tm.seed,
        "metadata": tm.metadata,
        "hyperparameters": est.get_params(),
    }
    if tm.model_type == "lr":
        arrays["weights"] = est.weights_
        arrays["biases"] = est.biases_
        meta["fit_info"] = {
            "n_iter": est.n_iter_,
            "converged": bool(est.converged_),
            "final_grad_norm": est.final_grad_norm_,
        }
    elif tm.model_type == "svm":
        meta["classes"] = [int(c) for c in est.classes_]
        meta["gamma_resolved"] = est.gamma_
        meta["fit_info"] = {
            "converged": bool(est.converged_),
            "kkt_violations": [float(v) for v in est.kkt_violations_],
        }
        for k in range(len(est.classes_)):
            arrays[f"sv_{k}"] = est.support_vectors_[k]
            arrays[f"dual_{k}"] = est.dual_coefs_[k]
            arrays[f"intercept_{k}"] = np.array([est.intercepts_[k]])
    elif tm.model_type in ("nn", "aug"):
        meta["fit_info"] = {
            "best_epoch": est.best_epoch_,
            "n_epochs_run": est.n_epochs_run_,
            "aborted": bool(est.aborted_),
        }
        meta["input_dim"] = est.input_dim_
        for i, p in enumerate(est.params_):
            arrays[f"param_{i}"] = p
    else:
        raise DataError(f"unknown model type {tm.model_type!r}")
    meta["arrays"] = [
        {"name": name, "shape": list(a.shape)} for name, a in arrays.items()
    ]
    return meta, arrays


def save_model(tm: TrainedModel, path) -> None:
    meta, arrays = _collect_arrays(tm)
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.uint64(len(blob)).tobytes())
        fh.write(blob)
        for spec in meta["arrays"]:
            fh.write(np.ascontiguousarray(arrays[spec["name"]], dtype="<f8").tobytes())


def load_model(path) -> TrainedModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise DataError(f"{path}: not a model container (bad magic {magic!r})")
        (meta_len,) = np.frombuffer(fh.read(8), dtype="<u8")
        meta = json.loads(fh.read(int(meta_len)).decode("utf-8"))
        arrays: dict[str, np.ndarray] = {}
        for spec in meta["arrays"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(8 * count)
            if len(buf) != 8 * count:
                raise DataError(f"{path}: truncated payload at array {spec['name']!r}")
            arrays[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()

    standardizer = Standardizer()
    standardizer.mean_ = arrays["std_mean"]
    standardizer.scale_ = arrays["std_scale"]

    model_type = meta["model_type"]
    hyper = meta["hyperparameters"]
    if model_type == "lr":
        est = SoftmaxRegression(**hyper)
        est.weights_ = arrays["weights"]
        est.biases_ = arrays["biases"]
        est.classes_ = np.array([-1, 0, 1])
        est.n_iter_ = meta["fit_info"]["n_iter"]
        est.converged_ = meta["fit_info"]["converged"]
        est.final_grad_norm_ = meta["fit_info"]["final_grad_norm"]
    elif model_type == "svm":
        est = RBFKernelSVM(**hyper)
        est.classes_ = np.array(meta["classes"])
        est.gamma_ = meta["gamma_resolved"]
        est.support_vectors_ = []
        est.dual_coefs_ = []
        est.intercepts_ = []
        for k in range(len(est.classes_)):
            est.support_vectors_.append(arrays[f"sv_{k}"])
            est.dual_coefs_.append(arrays[f"dual_{k}"])
            est.intercepts_.append(float(arrays[f"intercept_{k}"][0]))
        est.kkt_violations_ = meta["fit_info"]["kkt_violations"]
        est.converged_ = meta["fit_info"]["converged"]
    elif model_type in ("nn", "aug"):
        cls = AugmentedHeadClassifier if model_type == "aug" else FeedForwardClassifier
        if "hidden" in hyper:
            hyper = dict(hyper, hidden=tuple(hyper["hidden"]))
        est = cls(**hyper)
        n_arrays = sum(1 for name in arrays if name.startswith("param_"))
        est.params_ = [arrays[f"param_{i}"] for i in range(n_arrays)]
        est.classes_ = np.array([-1, 0, 1])
        est.input_dim_ = meta["input_dim"]
        est.best_epoch_ = meta["fit_info"]["best_epoch"]
        est.n_epochs_run_ = meta["fit_info"]["n_epochs_run"]
        est.aborted_ = meta["fit_info"]["aborted"]
    else:
        raise DataError(f"{path}: unknown model type {model_type!r}")

    return TrainedModel(
        model_type=model_type,
        estimator=est,
        standardizer=standardizer,
        target=meta.get("target", ""),
        blocks=tuple(meta.get("blocks", ())),
        seed=meta.get("seed"),
        metadata=meta.get("metadata", {}),
    )
