"""Multinomial (softmax) logistic regression trained by L-BFGS.

The objective is the mean cross-entropy plus an L2 penalty on the weights,
(1 / (2 C n)) * ||W||^2, so C keeps the familiar inverse-regularization
meaning while gradients stay O(1) in the sample count.  Biases are not
penalized.  The analytic gradient is exposed through `lr_loss_and_grad` so
it can be checked against finite differences.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, ClassifierMixin

from ..errors import NumericError
from ..validation import CLASSES, check_fitted, check_labels, check_matrix

N_CLASSES = len(CLASSES)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _split(params: np.ndarray, n_features: int) -> tuple[np.ndarray, np.ndarray]:
    w = params[: N_CLASSES * n_features].reshape(N_CLASSES, n_features)
    b = params[N_CLASSES * n_features :]
    return w, b


def lr_loss_and_grad(
    params: np.ndarray, X: np.ndarray, y_index: np.ndarray, C: float
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy + ||W||^2 / (2 C n) and its gradient.

    `params` is the flat concatenation of the K x D weight matrix and the
    K biases; `y_index` holds class indices 0..K-1.
    """
    n, d = X.shape
    w, b = _split(params, d)
    logits = X @ w.T + b
    log_probs = _log_softmax(logits)
    data_loss = -log_probs[np.arange(n), y_index].mean()
    loss = data_loss + (w * w).sum() / (2.0 * C * n)
    if not np.isfinite(loss):
        raise NumericError(
            f"non-finite logistic loss (data={data_loss!r}, |W|max="
            f"{np.abs(w).max()!r})"
        )
    probs = np.exp(log_probs)
    delta = probs
    delta[np.arange(n), y_index] -= 1.0
    grad_w = delta.T @ X / n + w / (C * n)
    grad_b = delta.mean(axis=0)
    return float(loss), np.concatenate([grad_w.ravel(), grad_b])


class SoftmaxRegression(BaseEstimator, ClassifierMixin):
    """Three-class softmax regression over the label alphabet (-1, 0, +1).

    Deterministic: starts from zero parameters and runs L-BFGS-B to a
    projected-gradient tolerance `tol` or `max_iter` iterations.
    """

    def __init__(self, C: float = 1.0, tol: float = 1e-6, max_iter: int = 1000):
        self.C = C
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        if self.C <= 0:
            raise ValueError("C must be positive")
        X = check_matrix(X)
        y = check_labels(y, X.shape[0])
        if len(np.unique(y)) < 2:
            raise ValueError("need at least two distinct classes in y")
        n, d = X.shape
        y_index = np.searchsorted(np.array(CLASSES), y)
        x0 = np.zeros(N_CLASSES * d + N_CLASSES)
        trajectory: list[float] = []

        def record(params):
            loss, _ = lr_loss_and_grad(params, X, y_index, self.C)
            trajectory.append(loss)

        result = minimize(
            lr_loss_and_grad,
            x0,
            args=(X, y_index, self.C),
            method="L-BFGS-B",
            jac=True,
            callback=record,
            options={"maxiter": self.max_iter, "gtol": self.tol, "ftol": 0.0},
        )
        w, b = _split(result.x, d)
        self.classes_ = np.array(CLASSES)
        self.weights_ = w
        self.biases_ = b
        self.n_iter_ = int(result.nit)
        _, grad = lr_loss_and_grad(result.x, X, y_index, self.C)
        self.final_grad_norm_ = float(np.abs(grad).max())
        self.converged_ = self.final_grad_norm_ <= self.tol
        self.loss_trajectory_ = trajectory
        return self

    def decision_function(self, X) -> np.ndarray:
        check_fitted(self, "weights_")
        X = check_matrix(X)
        if X.shape[1] != self.weights_.shape[1]:
            raise ValueError(
                f"X has {X.shape[1]} columns, model expects {self.weights_.shape[1]}"
            )
        return X @ self.weights_.T + self.biases_

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        # argmax takes the first maximum, i.e. ties break toward -1
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]
