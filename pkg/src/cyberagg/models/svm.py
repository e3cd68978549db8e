"""One-vs-rest RBF-kernel SVMs trained by sequential minimal optimization.

The binary solver is Platt-style SMO made fully deterministic: candidate
pairs are scanned in index order and the second-choice heuristic breaks ties
toward the lowest index, so training never consults a random source.  The
decision function is f(x) = sum_i alpha_i y_i K(x_i, x) + b.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..validation import check_fitted, check_labels, check_matrix

_SUPPORT_EPS = 1e-10


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||a - b||^2) for every row pair."""
    sq = (
        (A * A).sum(axis=1)[:, None]
        + (B * B).sum(axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


class _BinarySMO:
    """Soft-margin dual solver for labels in {-1, +1} on a precomputed
    kernel matrix."""

    def __init__(self, C: float, tol: float, max_passes: int):
        self.C = C
        self.tol = tol
        self.max_passes = max_passes

    def fit(self, K: np.ndarray, y: np.ndarray) -> "_BinarySMO":
        n = len(y)
        self.K = K
        self.y = y.astype(np.float64)
        self.alpha = np.zeros(n)
        self.b = 0.0
        self.errors = -self.y.copy()  # f = 0 initially, E_i = f_i - y_i

        num_changed = 0
        examine_all = True
        sweeps = 0
        while num_changed > 0 or examine_all:
            if sweeps >= self.max_passes:
                break
            sweeps += 1
            num_changed = 0
            if examine_all:
                candidates = range(n)
            else:
                candidates = np.nonzero(
                    (self.alpha > _SUPPORT_EPS) & (self.alpha < self.C - _SUPPORT_EPS)
                )[0]
            for i2 in candidates:
                num_changed += self._examine(int(i2))
            if examine_all:
                examine_all = False
            elif num_changed == 0:
                examine_all = True

        self.n_sweeps = sweeps
        self.kkt_violation = self._max_kkt_violation()
        self.converged = self.kkt_violation <= self.tol
        return self

    def _examine(self, i2: int) -> int:
        y2 = self.y[i2]
        alph2 = self.alpha[i2]
        e2 = self.errors[i2]
        r2 = e2 * y2
        violates = (r2 < -self.tol and alph2 < self.C) or (r2 > self.tol and alph2 > 0)
        if not violates:
            return 0
        non_bound = np.nonzero(
            (self.alpha > _SUPPORT_EPS) & (self.alpha < self.C - _SUPPORT_EPS)
        )[0]
        if len(non_bound) > 1:
            i1 = int(non_bound[np.argmax(np.abs(self.errors[non_bound] - e2))])
            if self._take_step(i1, i2):
                return 1
        for i1 in non_bound:
            if self._take_step(int(i1), i2):
                return 1
        for i1 in range(len(self.y)):
            if self._take_step(i1, i2):
                return 1
        return 0

    def _take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        alph1, alph2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        e1, e2 = self.errors[i1], self.errors[i2]
        s = y1 * y2
        if y1 != y2:
            low, high = max(0.0, alph2 - alph1), min(self.C, self.C + alph2 - alph1)
        else:
            low, high = max(0.0, alph1 + alph2 - self.C), min(self.C, alph1 + alph2)
        if low == high:
            return False
        k11 = self.K[i1, i1]
        k12 = self.K[i1, i2]
        k22 = self.K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2 = alph2 + y2 * (e1 - e2) / eta
            a2 = min(max(a2, low), high)
        else:
            # flat direction: compare the objective at both clip ends
            f1 = y1 * (e1 + self.b) - alph1 * k11 - s * alph2 * k12
            f2 = y2 * (e2 + self.b) - s * alph1 * k12 - alph2 * k22
            l1 = alph1 + s * (alph2 - low)
            h1 = alph1 + s * (alph2 - high)
            obj_low = (
                l1 * f1 + low * f2 + 0.5 * l1 * l1 * k11
                + 0.5 * low * low * k22 + s * low * l1 * k12
            )
            obj_high = (
                h1 * f1 + high * f2 + 0.5 * h1 * h1 * k11
                + 0.5 * high * high * k22 + s * high * h1 * k12
            )
            if obj_low < obj_high - 1e-12:
                a2 = low
            elif obj_low > obj_high + 1e-12:
                a2 = high
            else:
                return False
        if abs(a2 - alph2) < 1e-10 * (a2 + alph2 + 1e-10):
            return False
        a1 = alph1 + s * (alph2 - a2)

        d1 = y1 * (a1 - alph1)
        d2 = y2 * (a2 - alph2)
        b1 = self.b - e1 - d1 * k11 - d2 * k12
        b2 = self.b - e2 - d1 * k12 - d2 * k22
        if _SUPPORT_EPS < a1 < self.C - _SUPPORT_EPS:
            b_new = b1
        elif _SUPPORT_EPS < a2 < self.C - _SUPPORT_EPS:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0

        self.errors += d1 * self.K[i1] + d2 * self.K[i2] + (b_new - self.b)
        self.alpha[i1] = a1
        self.alpha[i2] = a2
        self.b = b_new
        return True

    def decision_values(self) -> np.ndarray:
        return (self.alpha * self.y) @ self.K + self.b

    def _max_kkt_violation(self) -> float:
        margins = self.y * self.decision_values()
        worst = 0.0
        for a, m in zip(self.alpha, margins):
            if a < _SUPPORT_EPS:
                violation = max(0.0, 1.0 - m)
            elif a > self.C - _SUPPORT_EPS:
                violation = max(0.0, m - 1.0)
            else:
                violation = abs(m - 1.0)
            worst = max(worst, violation)
        return worst

    def dual_objective(self) -> float:
        ay = self.alpha * self.y
        return float(self.alpha.sum() - 0.5 * ay @ self.K @ ay)


class RBFKernelSVM(BaseEstimator, ClassifierMixin):
    """One-vs-rest RBF SVM; gamma='scale' resolves to 1 / (D * Var(X)).

    predict_proba maps the per-class decision values through a softmax.
    That is a score-ranking surrogate, not a calibrated probability; it is
    sufficient for one-vs-rest ranking metrics.
    """

    def __init__(self, C: float = 1.0, gamma="scale", tol: float = 1e-3,
                 max_passes: int = 500):
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.max_passes = max_passes

    def _resolve_gamma(self, X: np.ndarray) -> float:
        if self.gamma == "scale":
            var = X.var()
            return 1.0 / (X.shape[1] * var) if var > 0 else 1.0
        gamma = float(self.gamma)
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return gamma

    def fit(self, X, y):
        if self.C <= 0:
            raise ValueError("C must be positive")
        X = check_matrix(X)
        y = check_labels(y, X.shape[0])
        classes = np.unique(y)
        if len(classes) < 2:
            raise ValueError("need at least two distinct classes in y")
        self.classes_ = classes
        self.gamma_ = self._resolve_gamma(X)
        K = rbf_kernel(X, X, self.gamma_)

        self.support_vectors_ = []
        self.dual_coefs_ = []  # alpha_i * y_i on the kept support vectors
        self.intercepts_ = []
        self.kkt_violations_ = []
        self.dual_objectives_ = []
        converged = True
        for c in classes:
            yb = np.where(y == c, 1.0, -1.0)
            solver = _BinarySMO(C=self.C, tol=self.tol, max_passes=self.max_passes)
            solver.fit(K, yb)
            keep = solver.alpha > _SUPPORT_EPS
            self.support_vectors_.append(X[keep])
            self.dual_coefs_.append(solver.alpha[keep] * yb[keep])
            self.intercepts_.append(solver.b)
            self.kkt_violations_.append(solver.kkt_violation)
            self.dual_objectives_.append(solver.dual_objective())
            converged = converged and solver.converged
        self.converged_ = converged
        if not converged:
            warnings.warn(
                "SMO did not reach the KKT tolerance on every subproblem; "
                f"worst violation {max(self.kkt_violations_):.3g} "
                "(best-effort model)",
                RuntimeWarning,
                stacklevel=2,
            )
        return self

    def decision_function(self, X) -> np.ndarray:
        check_fitted(self, "support_vectors_")
        X = check_matrix(X)
        columns = []
        for sv, dual, b in zip(self.support_vectors_, self.dual_coefs_, self.intercepts_):
            if len(sv) == 0:
                columns.append(np.full(X.shape[0], b))
            else:
                columns.append(rbf_kernel(X, sv, self.gamma_) @ dual + b)
        return np.column_stack(columns)

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        # first maximum wins, i.e. ties break toward the lower class
        return self.classes_[np.argmax(scores, axis=1)]

    def predict_proba(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        shifted = scores - scores.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        return exp / exp.sum(axis=1, keepdims=True)
