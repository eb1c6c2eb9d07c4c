"""Expectation estimates of the feature map and the intervals built around them."""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .data import stratified_kfold
from .errors import DataError


@dataclass(frozen=True)
class UncertaintyInterval:
    """Box ``a <= E[phi] <= b`` centred on the estimate ``tau_n``.

    ``a = tau_n - s / sqrt(n)`` and ``b = tau_n + s / sqrt(n)``; a point
    estimate has ``s = 0``.
    """

    tau_n: np.ndarray
    a: np.ndarray
    b: np.ndarray
    s: np.ndarray
    n: int
    delta: float = None

    def __post_init__(self):
        for name in ("tau_n", "a", "b", "s"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        if not (self.a.shape == self.b.shape == self.tau_n.shape == self.s.shape):
            raise ValueError("interval vectors must share one length")
        if np.any(self.a > self.b):
            raise ValueError("lower endpoint exceeds upper endpoint")

    @property
    def m(self):
        return self.tau_n.size

    @property
    def is_point(self):
        return bool(np.array_equal(self.a, self.b))

    @property
    def half_width(self):
        return (self.b - self.a) / 2

    def contains(self, tau, atol=0.0):
        tau = np.asarray(tau, dtype=float)
        return bool(np.all(self.a - atol <= tau) and np.all(tau <= self.b + atol))

    def to_dict(self):
        return {
            "tau_n": self.tau_n.tolist(),
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "s": self.s.tolist(),
            "delta": self.delta,
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["tau_n"], d["a"], d["b"], d["s"], d["n"], d.get("delta"))

    @classmethod
    def from_bounds(cls, a, b, n=1):
        """Interval from explicit endpoints; ``tau_n`` is the midpoint."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        tau = (a + b) / 2
        return cls(tau, a, b, (b - a) / 2 * math.sqrt(n), n)


def hoeffding_width(m, delta):
    """``sqrt((log m + log(2/delta)) / 2)``: per-unit-range half-width numerator."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if m < 1:
        raise ValueError("m must be >= 1")
    return math.sqrt((math.log(m) + math.log(2.0 / delta)) / 2.0)


def hoeffding_interval(tau_n, n, delta, c=None, s=None):
    """Simultaneous Hoeffding interval for all components of ``tau_n``.

    The half-width numerator is ``s = c * sqrt((log m + log(2/delta)) / 2)``
    (union bound over ``m`` components). Passing ``s`` directly overrides
    that formula, as a scalar or per-component vector.
    """
    tau_n = np.asarray(tau_n, dtype=float).ravel()
    if n < 1:
        raise ValueError("n must be >= 1")
    m = tau_n.size
    if s is None:
        c = np.ones(m) if c is None else np.broadcast_to(np.asarray(c, dtype=float), (m,))
        if np.any(c < 0):
            raise ValueError("ranges c must be nonnegative")
        s = c * hoeffding_width(m, delta)
    else:
        if delta is not None and not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        s = np.broadcast_to(np.asarray(s, dtype=float), (m,)).copy()
        if np.any(s < 0):
            raise ValueError("s must be nonnegative")
    half = s / math.sqrt(n)
    return UncertaintyInterval(tau_n, tau_n - half, tau_n + half, s, int(n), delta)


def point_interval(tau_n, n=1):
    """Degenerate interval ``a = b = tau_n``."""
    tau_n = np.asarray(tau_n, dtype=float).ravel()
    return UncertaintyInterval(tau_n, tau_n.copy(), tau_n.copy(), np.zeros_like(tau_n), int(n))


def empirical_expectation(gf, X, y):
    """Plain average of the feature vectors of ``(X, y)`` under a fitted ``gf``."""
    idx = gf.phi_indices(X, y)
    return np.bincount(idx, minlength=gf.m) / idx.size


@dataclass
class CvEstimate:
    gf: object
    tau_n: np.ndarray
    n: int
    folds: int
    folds_clamped: bool
    fold_ids: list


def estimate_expectation_cv(gf, dataset, folds=10, seed=0):
    """Cross-fitted estimate of ``E[phi]``.

    For each stratified fold the base classifiers are fitted on the remaining
    folds and the feature map is evaluated on the held-out samples at their
    true labels. ``tau_n`` averages all ``n`` held-out evaluations. The
    returned generating function is refitted on the whole dataset.

    ``gf`` may be fitted or not; it is never modified.
    """
    counts = dataset.class_counts()
    if counts.size != gf.num_labels:
        raise DataError(
            f"dataset has {counts.size} labels but the generating function expects {gf.num_labels}"
        )
    if counts.min() < 2:
        raise DataError("every class needs at least 2 samples for cross-fitting")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fold_ids = stratified_kfold(dataset, folds, seed)
    clamped = any("folds instead of" in str(w.message) for w in caught)
    if clamped:
        warnings.warn(f"cross-fitting with {len(fold_ids)} folds instead of {folds}", stacklevel=2)

    totals = np.zeros(gf.m)
    X, y = dataset.features, dataset.labels
    for held in fold_ids:
        train = np.ones(len(dataset), dtype=bool)
        train[held] = False
        fold_gf = gf.unfitted_copy().fit(X[train], y[train])
        totals += np.bincount(fold_gf.phi_indices(X[held], y[held]), minlength=gf.m)
    tau = totals / len(dataset)
    final = gf.unfitted_copy().fit(X, y)
    return CvEstimate(final, tau, len(dataset), len(fold_ids), clamped, fold_ids)


def build_interval(tau_n, n, mode="hoeffding", delta=0.05, s=None, c=None):
    """Interval for one of the CLI modes: ``hoeffding``, ``manual`` (needs ``s``) or ``point``."""
    if mode == "point":
        return point_interval(tau_n, n)
    if mode == "hoeffding":
        return hoeffding_interval(tau_n, n, delta, c=c)
    if mode == "manual":
        if s is None:
            raise ValueError("manual interval mode needs s")
        return hoeffding_interval(tau_n, n, delta, s=s)
    raise ValueError(f"unknown interval mode {mode!r}")
