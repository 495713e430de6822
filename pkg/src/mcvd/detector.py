"""Threshold detectors with a scikit-learn style interface.

``fit`` chooses the threshold (analytically from the channel model, or
empirically from labelled counts) and ``predict`` turns absorbed counts into
decoded bits.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .ber import build_threshold_table, optimal_threshold
from .channel import SystemParams
from .exceptions import DomainError

__all__ = ["ThresholdDetector", "AdaptiveThresholdDetector"]


def _counts(X) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise DomainError("expected a single column of counts")
        X = X[:, 0]
    if X.ndim != 1:
        raise DomainError("counts must be one-dimensional")
    return X


class ThresholdDetector(ClassifierMixin, BaseEstimator):
    """Decode 1 when the count reaches ``eta_``.

    With ``eta`` set, ``fit`` just records it. Otherwise, given labelled
    counts it picks the threshold with the lowest empirical error; without
    data it scans the analytic error probability at distance ``rd``.
    """

    def __init__(self, params=None, rd=10.0, eta=None, method="analytic_no_isi", L=5, eta_max=None):
        self.params = params
        self.rd = rd
        self.eta = eta
        self.method = method
        self.L = L
        self.eta_max = eta_max

    def fit(self, X=None, y=None):
        self.classes_ = np.array([0, 1])
        if self.eta is not None:
            self.eta_ = int(self.eta)
            self.pe_ = None
        elif X is not None:
            if y is None:
                raise DomainError("empirical fitting needs the transmitted bits")
            counts = _counts(X)
            bits = np.asarray(y).astype(int)
            top = int(counts.max()) + 1 if self.eta_max is None else int(self.eta_max)
            etas = np.arange(top + 1)
            errors = np.array([np.mean((counts >= e).astype(int) != bits) for e in etas])
            self.eta_ = int(etas[np.argmin(errors)])
            self.pe_ = float(errors.min())
        else:
            p = self.params if self.params is not None else SystemParams()
            self.eta_, self.pe_ = optimal_threshold(
                self.rd, p, method=self.method, eta_max=self.eta_max, L=self.L
            )
        return self

    def predict(self, X):
        check_is_fitted(self, "eta_")
        return (_counts(X) >= self.eta_).astype(int)


class AdaptiveThresholdDetector(ClassifierMixin, BaseEstimator):
    """Distance-aware detector backed by a :class:`~mcvd.ber.ThresholdTable`.

    ``X`` for :meth:`predict` has two columns: count and tagged distance.
    """

    def __init__(self, params=None, b=4.1, c=10.0, step=0.1, eta_max=None):
        self.params = params
        self.b = b
        self.c = c
        self.step = step
        self.eta_max = eta_max

    def fit(self, X=None, y=None):
        p = self.params if self.params is not None else SystemParams()
        self.classes_ = np.array([0, 1])
        self.table_ = build_threshold_table(self.b, self.c, self.step, p, eta_max=self.eta_max)
        return self

    def predict(self, X):
        check_is_fitted(self, "table_")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise DomainError("X must have columns (count, rd)")
        return (X[:, 0] >= self.table_.lookup(X[:, 1])).astype(int)
