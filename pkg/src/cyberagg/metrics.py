"""Three-class evaluation metrics over the fixed label alphabet (-1, 0, +1).

macro-F1 is the unweighted mean of the three per-class F1 values (a class
with zero precision+recall contributes 0, and the divisor stays 3).
One-vs-rest AUC ranks each class's probability column against the rest with
midrank tie handling and macro-averages over classes that have at least one
positive and one negative row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CLASSES = (-1, 0, 1)


def _check_pair(y_true, y_pred) -> tuple[np.ndarray, np.ndarray]:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError(
            f"y_true and y_pred must be equal-length vectors, got "
            f"{y_true.shape} and {y_pred.shape}"
        )
    if y_true.shape[0] == 0:
        raise ValueError("empty label vectors")
    return y_true, y_pred


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = _check_pair(y_true, y_pred)
    return float(np.mean(y_true == y_pred))


@dataclass
class ConfusionMatrix:
    """3x3 counts; rows are true labels, columns predictions, order (-1, 0, +1)."""

    counts: np.ndarray

    @classmethod
    def from_labels(cls, y_true, y_pred) -> "ConfusionMatrix":
        y_true, y_pred = _check_pair(y_true, y_pred)
        counts = np.zeros((3, 3), dtype=np.int64)
        index = {c: i for i, c in enumerate(CLASSES)}
        for t, p in zip(y_true, y_pred):
            counts[index[int(t)], index[int(p)]] += 1
        return cls(counts=counts)

    def precision_recall(self, class_index: int) -> tuple[float, float]:
        tp = self.counts[class_index, class_index]
        predicted = self.counts[:, class_index].sum()
        actual = self.counts[class_index, :].sum()
        precision = tp / predicted if predicted > 0 else 0.0
        recall = tp / actual if actual > 0 else 0.0
        return float(precision), float(recall)


def per_class_f1(y_true, y_pred) -> dict[int, float]:
    cm = ConfusionMatrix.from_labels(y_true, y_pred)
    out = {}
    for i, c in enumerate(CLASSES):
        pr, re = cm.precision_recall(i)
        out[c] = 2 * pr * re / (pr + re) if pr + re > 0 else 0.0
    return out


def macro_f1(y_true, y_pred) -> float:
    f1 = per_class_f1(y_true, y_pred)
    return sum(f1[c] for c in CLASSES) / 3.0


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def binary_auc(y_is_positive: np.ndarray, scores: np.ndarray) -> float:
    """Rank-statistic AUC (Mann-Whitney) with midrank tie handling."""
    y_is_positive = np.asarray(y_is_positive, dtype=bool)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(y_is_positive.sum())
    n_neg = int((~y_is_positive).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined without both positives and negatives")
    ranks = _midranks(scores)
    rank_sum = ranks[y_is_positive].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def ovr_auc(y_true, proba) -> tuple[float, dict[int, float | None]]:
    """Macro one-vs-rest AUC plus per-class values.

    Classes lacking a positive or a negative row are excluded from the macro
    average and reported as None; if every class is degenerate the AUC is
    undefined and a ValueError is raised.
    """
    y_true = np.asarray(y_true)
    proba = np.asarray(proba, dtype=np.float64)
    if proba.ndim != 2 or proba.shape[1] != 3:
        raise ValueError(f"proba must be (n, 3), got {proba.shape}")
    if y_true.shape[0] != proba.shape[0]:
        raise ValueError("y_true and proba disagree on row count")
    if not np.allclose(proba.sum(axis=1), 1.0, atol=1e-6):
        raise ValueError("probability rows must sum to 1")
    per_class: dict[int, float | None] = {}
    valid: list[float] = []
    for i, c in enumerate(CLASSES):
        positives = y_true == c
        if positives.all() or not positives.any():
            per_class[c] = None
            continue
        auc = binary_auc(positives, proba[:, i])
        per_class[c] = auc
        valid.append(auc)
    if not valid:
        raise ValueError("AUC undefined: every one-vs-rest split is single-class")
    return float(np.mean(valid)), per_class
