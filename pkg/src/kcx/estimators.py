"""Thin scikit-learn facade over circuit classification and explanation.

The circuit is the model, so fit() only validates inputs and freezes
metadata; there is no training. predict() evaluates the circuit row by
row and transform() marks explanation features, one 0/1 mask per row.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .explain import Instance, one_axp, one_cxp
from .queries import evaluate


def _check_binary_matrix(X, num_features):
    X = check_array(X, dtype=int)
    if X.shape[1] != num_features:
        raise ValueError("X has %d columns, circuit has %d features"
                         % (X.shape[1], num_features))
    if not np.isin(X, (0, 1)).all():
        raise ValueError("X must contain only 0/1 values")
    return X


class CircuitClassifier(BaseEstimator, ClassifierMixin):
    """Classify 0/1 feature rows with a fixed boolean circuit."""

    def __init__(self, circuit=None):
        self.circuit = circuit

    def fit(self, X, y=None):
        if self.circuit is None:
            raise ValueError("circuit must be set before fit")
        X = _check_binary_matrix(X, self.circuit.num_features)
        self.n_features_in_ = self.circuit.num_features
        self.classes_ = np.array([0, 1])
        return self

    def predict(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _check_binary_matrix(X, self.n_features_in_)
        return np.array([evaluate(self.circuit, tuple(row)) for row in X])

    def score(self, X, y):
        y = check_array(y, ensure_2d=False, dtype=int)
        return float(np.mean(self.predict(X) == y))


class CircuitExplainer(BaseEstimator, TransformerMixin):
    """Per-row explanation masks: 1 where a feature is in the explanation.

    kind selects the family ("axp" or "cxp"); order, when given, is the
    greedy deletion order as 1-based feature indices.
    """

    def __init__(self, circuit=None, kind="axp", order=None):
        self.circuit = circuit
        self.kind = kind
        self.order = order

    def fit(self, X, y=None):
        if self.circuit is None:
            raise ValueError("circuit must be set before fit")
        if self.kind not in ("axp", "cxp"):
            raise ValueError("kind must be 'axp' or 'cxp'")
        _check_binary_matrix(X, self.circuit.num_features)
        self.n_features_in_ = self.circuit.num_features
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = _check_binary_matrix(X, self.n_features_in_)
        explain = one_axp if self.kind == "axp" else one_cxp
        masks = np.zeros(X.shape, dtype=int)
        for i, row in enumerate(X):
            point = tuple(int(v) for v in row)
            instance = Instance(point, evaluate(self.circuit, point))
            for f in explain(self.circuit, instance, order=self.order):
                masks[i, f - 1] = 1
        return masks
