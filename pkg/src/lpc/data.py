"""Datasets: the synthetic Gaussian-mixture task, CSV ingestion and stratified folds."""
import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import DataError


@dataclass(frozen=True)
class LabeledDataset:
    """Real feature rows with labels remapped to ``0..L-1``.

    ``label_names[j]`` is the original value of label ``j``.
    """

    features: np.ndarray
    labels: np.ndarray
    label_names: tuple = None

    def __post_init__(self):
        X = np.ascontiguousarray(self.features, dtype=float)
        y = np.ascontiguousarray(self.labels, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] < 1:
            raise DataError("features must be a 2-d array with at least one column")
        if y.shape != (X.shape[0],):
            raise DataError("need exactly one label per feature row")
        names = self.label_names
        if names is None:
            names = tuple(range(int(y.max()) + 1 if y.size else 0))
        names = tuple(names)
        if y.size and (y.min() < 0 or y.max() >= len(names)):
            raise DataError("labels must be contiguous integers starting at 0")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "label_names", names)

    def __len__(self):
        return self.labels.size

    @property
    def num_labels(self):
        return len(self.label_names)

    @property
    def dim(self):
        return self.features.shape[1]

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.num_labels)

    def subset(self, idx):
        return LabeledDataset(self.features[idx], self.labels[idx], self.label_names)


@dataclass(frozen=True)
class SyntheticSpec:
    """Per-class mixture of two isotropic Gaussians in four dimensions."""

    means: np.ndarray = field(default_factory=lambda: np.array([
        [[1, 1, 1, 1], [3, 3, 3, 3]],
        [[1, 2, 1, 2], [4, 3, 4, 3]],
        [[2, 2, 2, 2], [4, 4, 4, 4]],
    ], dtype=float))
    weights: tuple = (0.5, 0.5)
    std: float = 0.7
    priors: tuple = None

    @property
    def num_labels(self):
        return self.means.shape[0]

    @property
    def class_priors(self):
        if self.priors is None:
            return np.full(self.num_labels, 1.0 / self.num_labels)
        return np.asarray(self.priors, dtype=float)


# Monte-Carlo Bayes risk of the default SyntheticSpec: bayes_risk_mc(spec, 10**6, seed=0).
SYNTHETIC_BAYES_RISK = 0.242856
SYNTHETIC_BAYES_RISK_SE = 0.000429


def synth_generate(n, seed, spec=None):
    """Draw ``n`` labelled samples: class, then mixture component, then Gaussian noise."""
    if n < 1:
        raise ValueError("n must be >= 1")
    spec = spec or SyntheticSpec()
    rng = np.random.default_rng(seed)
    labels = rng.choice(spec.num_labels, size=n, p=spec.class_priors)
    comps = rng.choice(len(spec.weights), size=n, p=np.asarray(spec.weights, dtype=float))
    noise = rng.standard_normal((n, spec.means.shape[2]))
    X = spec.means[labels, comps] + spec.std * noise
    return LabeledDataset(X, labels)


def posterior_argmax(X, spec=None):
    """Bayes-optimal label for each row under ``spec``."""
    spec = spec or SyntheticSpec()
    X = np.asarray(X, dtype=float)
    log_w = np.log(np.asarray(spec.weights, dtype=float))
    scores = np.empty((X.shape[0], spec.num_labels))
    for c in range(spec.num_labels):
        sq = ((X[:, None, :] - spec.means[c][None, :, :]) ** 2).sum(axis=2)
        scores[:, c] = np.log(spec.class_priors[c]) + logsumexp(
            log_w[None, :] - sq / (2 * spec.std ** 2), axis=1
        )
    return np.argmax(scores, axis=1)


def bayes_risk_mc(spec=None, num_samples=10**6, seed=0, chunk=200_000):
    """Monte-Carlo error of the Bayes rule; returns ``(risk, standard_error)``."""
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    spec = spec or SyntheticSpec()
    data = synth_generate(num_samples, seed, spec)
    errors = 0
    for start in range(0, num_samples, chunk):
        sl = slice(start, start + chunk)
        errors += int(np.sum(posterior_argmax(data.features[sl], spec) != data.labels[sl]))
    risk = errors / num_samples
    return risk, float(np.sqrt(risk * (1 - risk) / num_samples))


def load_csv(path, label_column=-1, has_header=True):
    """Read a comma-separated file of numeric features plus one label column.

    ``label_column`` is a column name (requires a header) or an integer index,
    negative values counting from the end. Labels are remapped to ``0..L-1``
    in first-occurrence order.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    first_data_row = 1
    header = None
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
        first_data_row = 2
    rows = [(i, r) for i, r in enumerate(rows, start=first_data_row) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: no data rows")
    ncols = len(rows[0][1])
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None or label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not found in header")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not -ncols <= label_idx < ncols:
            raise DataError(f"{path}: label column {label_idx} out of range for {ncols} columns")
        label_idx %= ncols
    if ncols < 2:
        raise DataError(f"{path}: need at least one feature column and one label column")

    features, raw_labels = [], []
    for lineno, row in rows:
        if len(row) != ncols:
            raise DataError(f"{path}: row {lineno} has {len(row)} columns, expected {ncols}")
        values = []
        for j, cell in enumerate(row):
            cell = cell.strip()
            colname = header[j] if header else str(j)
            if cell == "" or cell.upper() in ("NA", "NAN", "?"):
                raise DataError(f"{path}: missing value at row {lineno}, column {colname}")
            if j == label_idx:
                raw_labels.append(cell)
                continue
            try:
                value = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric value {cell!r} at row {lineno}, column {colname}"
                ) from None
            if not np.isfinite(value):
                raise DataError(f"{path}: non-finite value at row {lineno}, column {colname}")
            values.append(value)
        features.append(values)

    names = list(dict.fromkeys(raw_labels))
    lookup = {name: i for i, name in enumerate(names)}
    labels = [lookup[v] for v in raw_labels]
    return LabeledDataset(np.array(features), np.array(labels), tuple(names))


def _canonical_order(X, idx):
    """Sort ``idx`` by feature row, so fold assignment ignores input order."""
    rows = X[idx]
    return idx[np.lexsort(rows.T[::-1])]


def stratified_kfold(dataset, k, seed):
    """Split sample indices into ``k`` class-balanced folds.

    Each class is shuffled and dealt round-robin, starting where the previous
    class stopped, so per-class fold sizes differ by at most one. When some
    class has fewer than ``k`` samples, ``k`` is reduced to that count and a
    warning is emitted.
    """
    labels = np.asarray(dataset.labels)
    if labels.size == 0:
        raise DataError("cannot split an empty dataset")
    counts = np.bincount(labels)
    present = counts[counts > 0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if present.min() < k:
        warnings.warn(
            f"smallest class has {present.min()} samples; using {present.min()} folds instead of {k}",
            stacklevel=2,
        )
        k = int(present.min())
    rng = np.random.default_rng(seed)
    assignment = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for c in range(counts.size):
        idx = np.flatnonzero(labels == c)
        if idx.size == 0:
            continue
        idx = _canonical_order(dataset.features, idx)
        idx = idx[rng.permutation(idx.size)]
        assignment[idx] = (offset + np.arange(idx.size)) % k
        offset = (offset + idx.size) % k
    return [np.flatnonzero(assignment == f) for f in range(k)]
