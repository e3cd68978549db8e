"""Column-wise z-scoring fitted on training rows only."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import check_fitted, check_matrix

SD_FLOOR = 1e-8


class Standardizer(BaseEstimator, TransformerMixin):
    """Per-column (x - mean) / sd with the sample SD (n-1 denominator).

    Columns whose SD falls below the floor are treated as constant and
    transform to exactly zero.
    """

    def fit(self, X, y=None):
        X = check_matrix(X)
        self.mean_ = X.mean(axis=0)
        if X.shape[0] > 1:
            sd = X.std(axis=0, ddof=1)
        else:
            sd = np.zeros(X.shape[1])
        self.scale_ = np.maximum(sd, SD_FLOOR)
        return self

    def transform(self, X) -> np.ndarray:
        check_fitted(self, "mean_")
        X = check_matrix(X)
        if X.shape[1] != self.mean_.shape[0]:
            raise ValueError(
                f"X has {X.shape[1]} columns, standardizer was fitted on "
                f"{self.mean_.shape[0]}"
            )
        return (X - self.mean_) / self.scale_
