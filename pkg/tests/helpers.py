"""Stub classifiers with hand-controlled predictions."""
import numpy as np

from lpc.classifiers import BaseClassifier
from lpc.generating import GeneratingFunction


class ConstantClassifier(BaseClassifier):
    kind = "const"

    def __init__(self, label):
        super().__init__()
        self.label = label
        self.name = f"const{label}"

    def fit(self, X, y, num_labels=None):
        self.num_labels = int(num_labels or max(y) + 1)
        self.dim = np.asarray(X).shape[1]
        return self

    def _predict(self, X):
        return np.full(X.shape[0], self.label, dtype=np.int64)


class FixedClassifier(BaseClassifier):
    """Predicts ``int(x[col])``, to pin down predictions in tests."""

    kind = "fixed"

    def __init__(self, col):
        super().__init__()
        self.col = col
        self.name = f"fixed{col}"

    def fit(self, X, y, num_labels=None):
        self.num_labels = num_labels
        self.dim = np.asarray(X).shape[1]
        return self

    def _predict(self, X):
        return X[:, self.col].astype(np.int64)


def fixed_gf(k, L, dim=None):
    dim = dim or max(k, 1)
    gf = GeneratingFunction([FixedClassifier(j) for j in range(k)], L)
    return gf.fit(np.zeros((2, dim)), np.array([0, 1]))
