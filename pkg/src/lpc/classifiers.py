"""Deterministic base classifiers whose predictions define the generating function.

Three kinds are available: brute-force Euclidean k-nearest neighbours,
quadratic discriminant analysis, and an axis-aligned CART tree with Gini
impurity. All of them serialize to plain dicts for the model file.
"""
import copy
import re

import numpy as np

from . import kernels
from .errors import DataError


def _check_fit_inputs(X, y, num_labels):
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("cannot fit a classifier on an empty dataset")
    if y.shape != (X.shape[0],):
        raise DataError("labels must be a vector with one entry per sample")
    if num_labels is None:
        num_labels = int(y.max()) + 1
    if y.min() < 0 or y.max() >= num_labels:
        raise DataError(f"labels must lie in [0, {num_labels})")
    return X, y, int(num_labels)


class BaseClassifier:
    kind = None

    def __init__(self):
        self.num_labels = None
        self.dim = None

    @property
    def fitted(self):
        return self.num_labels is not None

    def _check_predict_inputs(self, X):
        if not self.fitted:
            raise RuntimeError(f"{self.name} is not fitted")
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.dim:
            raise DataError(
                f"{self.name} was fitted on {self.dim} features, got {X.shape[1]}"
            )
        return np.ascontiguousarray(X), single

    def predict(self, X):
        """Labels for a batch of rows, or a single label for a 1-d input."""
        X, single = self._check_predict_inputs(X)
        out = self._predict(X)
        return int(out[0]) if single else out

    def to_dict(self):
        state = {"kind": self.kind, "name": self.name, "num_labels": self.num_labels,
                 "dim": self.dim}
        state.update(self._state())
        return state


class KNNClassifier(BaseClassifier):
    """Majority vote among the ``k`` nearest training points (Euclidean)."""

    kind = "knn"

    def __init__(self, k=5):
        super().__init__()
        if k < 1 or k % 2 == 0:
            raise ValueError(f"k must be a positive odd integer, got {k}")
        self.k = int(k)

    @property
    def name(self):
        return f"knn{self.k}"

    def fit(self, X, y, num_labels=None):
        X, y, self.num_labels = _check_fit_inputs(X, y, num_labels)
        self.X_, self.y_ = X, y
        self.dim = X.shape[1]
        return self

    def _predict(self, X):
        return kernels.knn_predict(self.X_, self.y_, X, self.k, self.num_labels)

    def _state(self):
        return {"k": self.k, "X": self.X_.tolist(), "y": self.y_.tolist()}

    @classmethod
    def _from_state(cls, state):
        clf = cls(state["k"])
        clf.num_labels, clf.dim = state["num_labels"], state["dim"]
        clf.X_ = np.ascontiguousarray(state["X"], dtype=float).reshape(-1, clf.dim)
        clf.y_ = np.ascontiguousarray(state["y"], dtype=np.int64)
        return clf


class QDAClassifier(BaseClassifier):
    """Gaussian class-conditional densities with per-class covariance.

    A ridge of ``1e-6 * trace / dim`` is added to every class covariance so
    that small folds still give an invertible matrix. Samples are sorted
    within each class before the moments are computed, which makes the fit
    independent of the training order.
    """

    kind = "qda"
    name = "qda"
    ridge = 1e-6

    def fit(self, X, y, num_labels=None):
        X, y, self.num_labels = _check_fit_inputs(X, y, num_labels)
        n, d = X.shape
        self.dim = d
        means, precisions, offsets = [], [], []
        for c in range(self.num_labels):
            Xc = X[y == c]
            if Xc.shape[0] < 2:
                raise DataError(
                    f"QDA needs at least 2 samples of every class; class {c} has {Xc.shape[0]}"
                )
            Xc = Xc[np.lexsort(Xc.T[::-1])]
            mu = Xc.mean(axis=0)
            centred = Xc - mu
            cov = centred.T @ centred / (Xc.shape[0] - 1)
            cov[np.diag_indices(d)] += self.ridge * np.trace(cov) / d
            try:
                chol = np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise DataError(
                    f"class {c} covariance is singular even after regularization"
                ) from None
            inv_chol = np.linalg.inv(chol)
            logdet = 2.0 * np.log(np.diag(chol)).sum()
            means.append(mu)
            precisions.append(inv_chol.T @ inv_chol)
            offsets.append(-0.5 * logdet + np.log(Xc.shape[0] / n))
        self.means_ = np.array(means)
        self.precisions_ = np.array(precisions)
        self.offsets_ = np.array(offsets)
        return self

    def decision_function(self, X):
        X, _ = self._check_predict_inputs(X)
        scores = np.empty((X.shape[0], self.num_labels))
        for c in range(self.num_labels):
            diff = X - self.means_[c]
            maha = np.einsum("ij,jk,ik->i", diff, self.precisions_[c], diff)
            scores[:, c] = self.offsets_[c] - 0.5 * maha
        return scores

    def _predict(self, X):
        return np.argmax(self.decision_function(X), axis=1).astype(np.int64)

    def _state(self):
        return {
            "means": self.means_.tolist(),
            "precisions": self.precisions_.tolist(),
            "offsets": self.offsets_.tolist(),
        }

    @classmethod
    def _from_state(cls, state):
        clf = cls()
        clf.num_labels, clf.dim = state["num_labels"], state["dim"]
        clf.means_ = np.array(state["means"], dtype=float)
        clf.precisions_ = np.array(state["precisions"], dtype=float)
        clf.offsets_ = np.array(state["offsets"], dtype=float)
        return clf


class DecisionTreeClassifier(BaseClassifier):
    """CART with Gini impurity and midpoint thresholds.

    ``max_depth=None`` grows the tree until leaves are pure or unsplittable.
    Nodes live in flat lists; a leaf has ``feature == -1``.
    """

    kind = "tree"

    def __init__(self, max_depth=10):
        super().__init__()
        if max_depth is not None and max_depth < 0:
            raise ValueError("max_depth must be nonnegative or None")
        self.max_depth = max_depth

    @property
    def name(self):
        return "tree:none" if self.max_depth is None else f"tree{self.max_depth}"

    def fit(self, X, y, num_labels=None):
        X, y, self.num_labels = _check_fit_inputs(X, y, num_labels)
        self.dim = X.shape[1]
        self.feature_, self.threshold_, self.left_, self.right_, self.value_ = [], [], [], [], []
        self._grow(X, y, 0)
        return self

    def _new_node(self, label):
        self.feature_.append(-1)
        self.threshold_.append(0.0)
        self.left_.append(-1)
        self.right_.append(-1)
        self.value_.append(int(label))
        return len(self.feature_) - 1

    def _grow(self, X, y, depth):
        counts = np.bincount(y, minlength=self.num_labels)
        node = self._new_node(np.argmax(counts))
        if counts.max() == y.size:
            return node
        if self.max_depth is not None and depth >= self.max_depth:
            return node
        split = self._best_split(X, y, counts)
        if split is None:
            return node
        f, thr = split
        go_left = X[:, f] <= thr
        self.feature_[node] = f
        self.threshold_[node] = thr
        self.left_[node] = self._grow(X[go_left], y[go_left], depth + 1)
        self.right_[node] = self._grow(X[~go_left], y[~go_left], depth + 1)
        return node

    def _best_split(self, X, y, counts):
        n = y.size
        parent = 1.0 - np.sum((counts / n) ** 2)
        # zero-gain splits are allowed (XOR-like nodes need them to become pure)
        best_gain, best = -np.inf, None
        onehot = np.eye(self.num_labels)[y]
        for f in range(X.shape[1]):
            order = np.argsort(X[:, f], kind="stable")
            xs = X[order, f]
            valid = np.flatnonzero(xs[1:] > xs[:-1])
            if valid.size == 0:
                continue
            left_counts = np.cumsum(onehot[order], axis=0)[valid]
            n_left = (valid + 1).astype(float)
            n_right = n - n_left
            right_counts = counts - left_counts
            gini_l = 1.0 - np.sum((left_counts / n_left[:, None]) ** 2, axis=1)
            gini_r = 1.0 - np.sum((right_counts / n_right[:, None]) ** 2, axis=1)
            gain = parent - (n_left * gini_l + n_right * gini_r) / n
            j = int(np.argmax(gain))
            if gain[j] > best_gain:
                best_gain = gain[j]
                best = (f, 0.5 * (xs[valid[j]] + xs[valid[j] + 1]))
        return best

    def _predict(self, X):
        feature = np.asarray(self.feature_)
        threshold = np.asarray(self.threshold_)
        left, right = np.asarray(self.left_), np.asarray(self.right_)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            goes_left = X[idx, feature[cur]] <= threshold[cur]
            node[idx] = np.where(goes_left, left[cur], right[cur])
            active = feature[node] >= 0
        return np.asarray(self.value_, dtype=np.int64)[node]

    def _state(self):
        return {
            "max_depth": self.max_depth,
            "feature": self.feature_,
            "threshold": self.threshold_,
            "left": self.left_,
            "right": self.right_,
            "value": self.value_,
        }

    @classmethod
    def _from_state(cls, state):
        clf = cls(state["max_depth"])
        clf.num_labels, clf.dim = state["num_labels"], state["dim"]
        clf.feature_ = list(state["feature"])
        clf.threshold_ = [float(t) for t in state["threshold"]]
        clf.left_ = list(state["left"])
        clf.right_ = list(state["right"])
        clf.value_ = list(state["value"])
        return clf


_KINDS = {cls.kind: cls for cls in (KNNClassifier, QDAClassifier, DecisionTreeClassifier)}


def make_classifier(spec):
    """Unfitted classifier from a short name.

    Accepted names: ``knn<k>`` (e.g. ``knn5``), ``qda``, ``tree`` (depth 10),
    ``tree<depth>`` and ``tree:none`` for an unbounded tree.
    """
    if isinstance(spec, BaseClassifier):
        return spec
    name = spec.strip().lower()
    if m := re.fullmatch(r"(?:knn|nn):?(\d+)", name):
        return KNNClassifier(int(m.group(1)))
    if name == "qda":
        return QDAClassifier()
    if name in ("tree", "dt"):
        return DecisionTreeClassifier()
    if m := re.fullmatch(r"(?:tree|dt):?(\d+|none)", name):
        depth = m.group(1)
        return DecisionTreeClassifier(None if depth == "none" else int(depth))
    raise ValueError(f"unknown classifier {spec!r}")


def clone_classifier(clf):
    """Fresh unfitted classifier with the same hyperparameters.

    Classifiers outside the built-in kinds are deep-copied and marked unfitted.
    """
    if _KINDS.get(clf.kind) is type(clf):
        return make_classifier(clf.name)
    fresh = copy.deepcopy(clf)
    fresh.num_labels = fresh.dim = None
    return fresh


def classifier_from_dict(state):
    try:
        cls = _KINDS[state["kind"]]
    except KeyError:
        raise ValueError(f"unknown classifier kind {state.get('kind')!r}") from None
    return cls._from_state(state)
