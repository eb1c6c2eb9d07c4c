"""Indicator generating function built from base-classifier predictions.

For labels ``Y = {0..L-1}`` and classifiers ``h_1..h_k`` the feature map sends
``(x, y)`` to the one-hot vector of length ``m = L**(k+1)`` whose hot component
is the lexicographic index of ``(y, h_1(x), ..., h_k(x))``. It depends on ``x``
only through the prediction tuple (the *pattern*), so every learning problem
can be written over the finite set of patterns instead of over features.
"""
from dataclasses import dataclass

import numpy as np

from .classifiers import classifier_from_dict, clone_classifier, make_classifier

FULL_ENUMERATION_LIMIT = 4096


def ind(tup, num_labels):
    """Zero-based lexicographic index of a label tuple (first entry most significant)."""
    index = 0
    for y in tup:
        y = int(y)
        if not 0 <= y < num_labels:
            raise ValueError(f"label {y} outside [0, {num_labels})")
        index = index * num_labels + y
    return index


def ind_decode(index, num_labels, length):
    """Inverse of :func:`ind` for tuples of the given length."""
    if not 0 <= index < num_labels ** length:
        raise ValueError(f"index {index} outside [0, {num_labels ** length})")
    digits = []
    for _ in range(length):
        index, y = divmod(index, num_labels)
        digits.append(y)
    return tuple(reversed(digits))


def _pattern_codes(patterns, num_labels):
    patterns = np.asarray(patterns, dtype=np.int64)
    k = patterns.shape[1]
    weights = num_labels ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return patterns @ weights if k else np.zeros(patterns.shape[0], dtype=np.int64)


@dataclass(frozen=True)
class PatternTable:
    """Distinct slices ``M_i`` of the feature map, one per pattern.

    ``columns[i, y]`` is the position of the single 1 in row ``y`` of ``M_i``.
    ``patterns`` holds the prediction tuples when the table comes from a
    generating function; it is ``None`` for tables built directly from columns.
    """

    num_labels: int
    m: int
    columns: np.ndarray
    patterns: np.ndarray = None

    def __post_init__(self):
        cols = np.ascontiguousarray(self.columns, dtype=np.int64)
        if cols.ndim != 2 or cols.shape[1] != self.num_labels or cols.shape[0] == 0:
            raise ValueError("columns must have shape (r, num_labels) with r >= 1")
        if cols.min() < 0 or cols.max() >= self.m:
            raise ValueError(f"column indices must lie in [0, {self.m})")
        object.__setattr__(self, "columns", cols)
        if self.patterns is not None:
            object.__setattr__(
                self, "patterns", np.asarray(self.patterns, dtype=np.int64).reshape(cols.shape[0], -1)
            )

    @property
    def r(self):
        return self.columns.shape[0]

    def matrix(self, i):
        """Dense ``L x m`` 0/1 matrix of pattern ``i``."""
        M = np.zeros((self.num_labels, self.m))
        M[np.arange(self.num_labels), self.columns[i]] = 1.0
        return M

    def phi_matrix(self):
        """Dense ``m x (r*L)`` matrix whose column ``i*L + y`` is the feature vector of (pattern i, y)."""
        Phi = np.zeros((self.m, self.r * self.num_labels))
        Phi[self.columns.ravel(), np.arange(self.r * self.num_labels)] = 1.0
        return Phi

    def scores(self, lam, gamma):
        """``M_i @ lam + gamma`` for every pattern, as an ``r x L`` array."""
        return np.asarray(lam, dtype=float)[self.columns] + gamma

    def expectation(self, p):
        """``Phi @ p`` for a distribution ``p`` given as an ``r x L`` array."""
        out = np.zeros(self.m)
        np.add.at(out, self.columns.ravel(), np.asarray(p, dtype=float).ravel())
        return out


class GeneratingFunction:
    """Indicator feature map of label and ``k`` classifier predictions.

    Parameters
    ----------
    classifiers : list
        Base classifiers or their short names (``"knn3"``, ``"qda"``, ...).
        An empty list gives the plain label indicator with ``m = num_labels``.
    num_labels : int
    """

    def __init__(self, classifiers, num_labels):
        if num_labels < 1:
            raise ValueError("num_labels must be >= 1")
        self.classifiers = [make_classifier(c) for c in classifiers]
        self.num_labels = int(num_labels)

    @property
    def k(self):
        return len(self.classifiers)

    @property
    def m(self):
        return self.num_labels ** (self.k + 1)

    @property
    def num_patterns(self):
        return self.num_labels ** self.k

    @property
    def range_c(self):
        # components never realized keep range 1 as well
        return np.ones(self.m)

    @property
    def fitted(self):
        return all(c.fitted for c in self.classifiers)

    def unfitted_copy(self):
        return GeneratingFunction([clone_classifier(c) for c in self.classifiers], self.num_labels)

    def fit(self, X, y):
        """Fit every base classifier on ``(X, y)``; returns ``self``."""
        for clf in self.classifiers:
            clf.fit(X, y, self.num_labels)
        return self

    def predict_patterns(self, X):
        """``n x k`` array of classifier predictions."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not self.classifiers:
            return np.zeros((X.shape[0], 0), dtype=np.int64)
        return np.column_stack([clf.predict(X) for clf in self.classifiers]).astype(np.int64)

    def pattern_codes(self, patterns):
        """Lexicographic index of each pattern among all ``L**k`` tuples."""
        return _pattern_codes(patterns, self.num_labels)

    def pattern_columns(self, patterns):
        """Hot component for every (pattern, label) pair, shape ``n x L``."""
        patterns = np.asarray(patterns, dtype=np.int64)
        if patterns.ndim < 2:
            patterns = patterns.reshape(1, self.k)
        codes = self.pattern_codes(patterns)
        return codes[:, None] + self.num_patterns * np.arange(self.num_labels)[None, :]

    def phi_indices(self, X, y):
        """Index of the hot component of the feature vector for each sample."""
        y = np.asarray(y, dtype=np.int64)
        if y.size and (y.min() < 0 or y.max() >= self.num_labels):
            raise ValueError(f"labels must lie in [0, {self.num_labels})")
        codes = self.pattern_codes(self.predict_patterns(X))
        return y * self.num_patterns + codes

    def phi_evaluate(self, x, y):
        """Dense one-hot feature vector of a single sample."""
        out = np.zeros(self.m)
        out[self.phi_indices(np.atleast_2d(x), [y])[0]] = 1.0
        return out

    def pattern_matrix(self, pattern):
        """Dense ``L x m`` matrix for one prediction tuple."""
        pattern = tuple(pattern)
        if len(pattern) != self.k:
            raise ValueError(f"pattern must have {self.k} entries")
        cols = [ind((y,) + pattern, self.num_labels) for y in range(self.num_labels)]
        M = np.zeros((self.num_labels, self.m))
        M[np.arange(self.num_labels), cols] = 1.0
        return M

    def enumerated_patterns(self):
        """Table over all ``L**k`` prediction tuples in lexicographic order."""
        codes = np.arange(self.num_patterns)
        patterns = np.array([ind_decode(c, self.num_labels, self.k) for c in codes],
                            dtype=np.int64).reshape(self.num_patterns, self.k)
        return PatternTable(self.num_labels, self.m, self.pattern_columns(patterns), patterns)

    def observed_patterns(self, X):
        """Table over the distinct prediction tuples of ``X``, in first-occurrence order."""
        preds = self.predict_patterns(X)
        codes = self.pattern_codes(preds)
        _, first = np.unique(codes, return_index=True)
        patterns = preds[np.sort(first)]
        return PatternTable(self.num_labels, self.m, self.pattern_columns(patterns), patterns)

    def pattern_table(self, X=None, mode="auto"):
        """Pattern table by full enumeration, from observed features, or automatically.

        ``auto`` enumerates when there are at most 4096 patterns.
        """
        if mode == "auto":
            mode = "enumerate" if self.num_patterns <= FULL_ENUMERATION_LIMIT or X is None else "observed"
        if mode == "enumerate":
            return self.enumerated_patterns()
        if mode == "observed":
            if X is None:
                raise ValueError("observed pattern mode needs features")
            return self.observed_patterns(X)
        raise ValueError(f"unknown pattern mode {mode!r}")

    def to_dict(self):
        return {"num_labels": self.num_labels, "classifiers": [c.to_dict() for c in self.classifiers]}

    @classmethod
    def from_dict(cls, state):
        return cls([classifier_from_dict(c) for c in state["classifiers"]], state["num_labels"])


def label_indicator(num_labels):
    """Generating function with no classifiers: ``phi(x, y) = e_y``."""
    return GeneratingFunction([], num_labels)

