"""Cross-validation protocol, permutation baseline, and report rendering.

The reference protocol is stratified k-fold (default k=5, seed 42) with the
standardizer and model fitted on each training fold only.  Headline metrics
come from the pooled out-of-fold predictions; per-fold values are kept for
dispersion.  A stratified holdout split is available as an alternative.

Row order never matters: when user ids are supplied, rows are canonicalized
by id before fold assignment and predictions are mapped back to the input
order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .metrics import CLASSES, accuracy, macro_f1, ovr_auc, per_class_f1
from .preprocessing import Standardizer
from .validation import check_labels, check_matrix

TARGET_DISPLAY = {
    "social_exclusion": "Social exclusion",
    "malicious_humour": "Malicious humour",
    "guilt_induction": "Guilt induction",
}
MODEL_DISPLAY = {"lr": "LR", "svm": "SVM", "nn": "NN", "aug": "AugHead"}
BLOCK_DISPLAY = {
    "basic": "Basic",
    "dynamic": "Dynamic",
    "content": "Content",
    "emotion": "Emotion",
    "transformer": "Embedding",
}


def feature_set_display(blocks: tuple[str, ...]) -> str:
    return " + ".join(BLOCK_DISPLAY.get(b, b) for b in blocks)


def stratified_folds(y: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Deal each class's shuffled members round-robin across k folds.

    Per-class fold counts differ by at most one.  k == n degenerates to
    leave-one-out and skips the per-class size check.
    """
    y = np.asarray(y)
    n = len(y)
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    if k > n:
        raise ValidationError(f"k={k} exceeds the {n} available rows")
    rng = np.random.default_rng(seed)
    if k == n:
        return [np.array([i]) for i in range(n)]
    for c in np.unique(y):
        count = int((y == c).sum())
        if count < k:
            raise ValidationError(
                f"class {c} has only {count} members, fewer than k={k}; "
                f"use a smaller k"
            )
    folds: list[list[int]] = [[] for _ in range(k)]
    cursor = 0
    for c in sorted(np.unique(y)):
        members = np.nonzero(y == c)[0]
        members = members[rng.permutation(len(members))]
        for idx in members:
            folds[cursor % k].append(int(idx))
            cursor += 1
    return [np.array(sorted(fold)) for fold in folds]


@dataclass
class FoldResult:
    test_index: np.ndarray
    y_pred: np.ndarray
    proba: np.ndarray


@dataclass
class CrossValidationResult:
    y_true: np.ndarray
    y_pred: np.ndarray      # pooled out-of-fold predictions, input row order
    proba: np.ndarray       # pooled out-of-fold probabilities, input row order
    folds: list[FoldResult]
    protocol: dict


def _proba_in_alphabet(estimator, X: np.ndarray) -> np.ndarray:
    """Map estimator probabilities onto the fixed (-1, 0, +1) columns."""
    raw = estimator.predict_proba(X)
    out = np.zeros((X.shape[0], len(CLASSES)))
    col = {int(c): i for i, c in enumerate(CLASSES)}
    for j, c in enumerate(estimator.classes_):
        out[:, col[int(c)]] = raw[:, j]
    return out


def cross_validate(
    X, y, make_estimator, k: int = 5, seed: int = 42, ids: list[str] | None = None
) -> CrossValidationResult:
    """Stratified k-fold out-of-fold evaluation of freshly built estimators."""
    X = check_matrix(X)
    y = check_labels(y, X.shape[0])
    if ids is not None:
        if len(ids) != len(y):
            raise ValidationError("ids and y disagree on length")
        canonical = np.argsort(np.asarray(ids, dtype=object), kind="stable")
    else:
        canonical = np.arange(len(y))
    X_c, y_c = X[canonical], y[canonical]

    folds = stratified_folds(y_c, k, seed)
    y_pred = np.zeros(len(y), dtype=np.int64)
    proba = np.zeros((len(y), len(CLASSES)))
    fold_results = []
    for test_idx in folds:
        train_mask = np.ones(len(y), dtype=bool)
        train_mask[test_idx] = False
        scaler = Standardizer().fit(X_c[train_mask])
        est = make_estimator()
        est.fit(scaler.transform(X_c[train_mask]), y_c[train_mask])
        X_test = scaler.transform(X_c[test_idx])
        fold_proba = _proba_in_alphabet(est, X_test)
        fold_pred = np.array(CLASSES)[np.argmax(fold_proba, axis=1)]
        original_rows = canonical[test_idx]
        y_pred[original_rows] = fold_pred
        proba[original_rows] = fold_proba
        fold_results.append(
            FoldResult(test_index=original_rows, y_pred=fold_pred, proba=fold_proba)
        )
    return CrossValidationResult(
        y_true=y,
        y_pred=y_pred,
        proba=proba,
        folds=fold_results,
        protocol={"method": "stratified-cv", "k": k, "seed": seed, "n": int(len(y))},
    )


def holdout_split(y: np.ndarray, test_fraction: float, seed: int) -> np.ndarray:
    """Indices of a stratified test split of roughly `test_fraction`."""
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError("test_fraction must be in (0, 1)")
    k = max(2, int(round(1.0 / test_fraction)))
    return stratified_folds(y, k, seed)[0]


def evaluate_holdout(X, y, make_estimator, test_fraction: float = 0.2, seed: int = 42,
                     ids: list[str] | None = None) -> CrossValidationResult:
    """Single stratified holdout; reported metrics cover the test rows only."""
    X = check_matrix(X)
    y = check_labels(y, X.shape[0])
    if ids is not None:
        canonical = np.argsort(np.asarray(ids, dtype=object), kind="stable")
    else:
        canonical = np.arange(len(y))
    X_c, y_c = X[canonical], y[canonical]
    test_idx = holdout_split(y_c, test_fraction, seed)
    train_mask = np.ones(len(y), dtype=bool)
    train_mask[test_idx] = False
    scaler = Standardizer().fit(X_c[train_mask])
    est = make_estimator()
    est.fit(scaler.transform(X_c[train_mask]), y_c[train_mask])
    fold_proba = _proba_in_alphabet(est, scaler.transform(X_c[test_idx]))
    fold_pred = np.array(CLASSES)[np.argmax(fold_proba, axis=1)]
    original_rows = canonical[test_idx]
    return CrossValidationResult(
        y_true=y[original_rows],
        y_pred=fold_pred,
        proba=fold_proba,
        folds=[FoldResult(test_index=original_rows, y_pred=fold_pred, proba=fold_proba)],
        protocol={
            "method": "holdout",
            "test_fraction": test_fraction,
            "seed": seed,
            "n": int(len(y)),
        },
    )


@dataclass
class EvalReport:
    target: str
    features_used: tuple[str, ...]
    model: str
    acc: float
    macro_f1: float
    ovr_auc: float
    per_class: dict = field(default_factory=dict)
    per_fold: list = field(default_factory=list)
    protocol: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "features_used": list(self.features_used),
            "model": self.model,
            "acc": self.acc,
            "macro_f1": self.macro_f1,
            "ovr_auc": self.ovr_auc,
            "per_class": self.per_class,
            "per_fold": self.per_fold,
            "protocol": self.protocol,
        }


def summarize(result: CrossValidationResult, target: str, blocks: tuple[str, ...],
              model_tag: str) -> EvalReport:
    """Pooled metrics plus per-fold dispersion for one evaluated model."""
    acc = accuracy(result.y_true, result.y_pred)
    f1 = macro_f1(result.y_true, result.y_pred)
    auc, per_class_auc = ovr_auc(result.y_true, result.proba)
    f1_per_class = per_class_f1(result.y_true, result.y_pred)
    per_fold = []
    if len(result.folds) > 1:
        y_by_row = result.y_true
        for fold in result.folds:
            fold_true = y_by_row[fold.test_index]
            entry = {"n": int(len(fold.test_index)),
                     "acc": accuracy(fold_true, fold.y_pred),
                     "macro_f1": macro_f1(fold_true, fold.y_pred)}
            try:
                entry["ovr_auc"] = ovr_auc(fold_true, fold.proba)[0]
            except ValueError:
                entry["ovr_auc"] = None
            per_fold.append(entry)
    return EvalReport(
        target=target,
        features_used=blocks,
        model=model_tag,
        acc=acc,
        macro_f1=f1,
        ovr_auc=auc,
        per_class={
            str(c): {
                "f1": f1_per_class[c],
                "auc": per_class_auc[c],
            }
            for c in CLASSES
        },
        per_fold=per_fold,
        protocol=result.protocol,
    )


def permutation_baseline(X, y, make_estimator, n_shuffles: int, k: int = 5,
                         seed: int = 42) -> list[dict]:
    """Metrics under label shuffling; sanity band for chance-level scores."""
    if n_shuffles < 0:
        raise ValidationError("n_shuffles must be >= 0")
    results = []
    rng = np.random.default_rng(seed)
    y = check_labels(y)
    for shuffle_no in range(n_shuffles):
        y_perm = rng.permutation(y)
        cv = cross_validate(X, y_perm, make_estimator, k=k, seed=seed)
        auc, _ = ovr_auc(cv.y_true, cv.proba)
        results.append(
            {
                "shuffle": shuffle_no,
                "acc": accuracy(cv.y_true, cv.y_pred),
                "macro_f1": macro_f1(cv.y_true, cv.y_pred),
                "ovr_auc": auc,
            }
        )
    return results


def render_report(reports: list[EvalReport]) -> tuple[str, dict]:
    """Rows of target x feature set x model with percentage metrics.

    Returns the text table and a machine-readable dict whose cell values
    (2-decimal percentages) match the table exactly.
    """
    headers = ["Prediction target", "Features", "Model", "ACC", "F1", "AUC"]
    rows = []
    json_rows = []
    for report in reports:
        display = [
            TARGET_DISPLAY.get(report.target, report.target),
            feature_set_display(report.features_used),
            MODEL_DISPLAY.get(report.model, report.model),
            f"{100.0 * report.acc:.2f}",
            f"{100.0 * report.macro_f1:.2f}",
            f"{100.0 * report.ovr_auc:.2f}",
        ]
        rows.append(display)
        json_rows.append(
            {
                "target": display[0],
                "features": display[1],
                "model": display[2],
                "acc_pct": display[3],
                "f1_pct": display[4],
                "auc_pct": display[5],
                "detail": report.to_dict(),
            }
        )
    widths = [
        max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
        for i, h in enumerate(headers)
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    text = "\n".join(lines) + "\n"
    return text, {"rows": json_rows}
