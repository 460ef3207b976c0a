"""scikit-learn shaped wrappers around the classifiers and bound calculators.

The choice models themselves are generators rather than learners, so only
the pieces with a natural fit/predict or transform reading are wrapped.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import valuation
from .testkit import Verdict, classify_arrays


class QuadrantClassifier(ClassifierMixin, BaseEstimator):
    """Label frequency pairs ``X[:, 0] = rho_ab``, ``X[:, 1] = rho_cd`` as EU, CRE or RCRE.

    Nothing is learned; ``fit`` only validates input and records the labels.
    """

    def __init__(self, test: str = "strong", tol: float = 0.0):
        self.test = test
        self.tol = tol

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError("X must have two columns (rho_ab, rho_cd)")
        if self.test not in ("weak", "strong", "mnoss"):
            raise ValueError(f"unknown test {self.test!r}")
        self.classes_ = np.array([v.value for v in Verdict])
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        X = check_array(X, dtype=float)
        labels = classify_arrays(X[:, 0], X[:, 1], self.test, self.tol)
        return np.array([v.value for v in labels])


class MeanBoundTransformer(TransformerMixin, BaseEstimator):
    """Map a column of utility exponents to the (e_min, e_max) mean-bound corners."""

    def __init__(self, y: float = 30.0, p: float = 0.8):
        self.y = y
        self.p = p

    def fit(self, X, y=None):
        check_array(X, dtype=float)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        g = check_array(X, dtype=float)[:, 0]
        rects = [valuation.mean_bounds(float(v), self.y, self.p) for v in g]
        return np.array([[r.e_min, r.e_max] for r in rects])
