"""Mixed norms, positive part and label-subset enumeration."""
from dataclasses import dataclass

import numpy as np

MAX_LABELS_FOR_SUBSETS = 20


@dataclass(frozen=True)
class GroupedVector:
    """A flat vector viewed as ``group_count`` consecutive groups of ``group_size``.

    The outer index runs over feature patterns and the inner one over labels.
    """

    values: np.ndarray
    group_size: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")
        if values.size % self.group_size:
            raise ValueError(
                f"length {values.size} is not a multiple of group_size {self.group_size}"
            )
        object.__setattr__(self, "values", values)

    @property
    def group_count(self):
        return self.values.size // self.group_size

    def groups(self):
        return self.values.reshape(self.group_count, self.group_size)

    @classmethod
    def from_groups(cls, groups):
        arr = np.asarray(groups, dtype=float)
        if arr.ndim != 2:
            raise ValueError("groups must be a 2-d array")
        return cls(arr.ravel(), arr.shape[1])


def _as_grouped(v, group_size=None):
    if isinstance(v, GroupedVector):
        return v
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 2:
        return GroupedVector.from_groups(arr)
    if group_size is None:
        raise ValueError("group_size is required for a flat vector")
    return GroupedVector(arr, group_size)


def positive_part(v):
    """Componentwise ``max(v, 0)``."""
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def mixed_norm_1_inf(v, group_size=None):
    """Largest within-group L1 norm."""
    g = _as_grouped(v, group_size).groups()
    if g.size == 0:
        return 0.0
    return float(np.abs(g).sum(axis=1).max())


def mixed_norm_inf_1(v, group_size=None):
    """Sum over groups of the within-group max absolute value."""
    g = _as_grouped(v, group_size).groups()
    if g.size == 0:
        return 0.0
    return float(np.abs(g).max(axis=1).sum())


def dual_norm_witness(w, group_size=None):
    """Sign vector on the heaviest group of ``w``.

    The result ``u`` has ``mixed_norm_inf_1(u) <= 1`` and
    ``w @ u == mixed_norm_1_inf(w)``, which certifies that the two mixed norms
    are dual to each other.
    """
    gv = _as_grouped(w, group_size)
    g = gv.groups()
    u = np.zeros_like(g)
    top = int(np.argmax(np.abs(g).sum(axis=1)))
    u[top] = np.where(g[top] >= 0, 1.0, -1.0)
    return u.ravel()


def nonempty_label_subsets(num_labels):
    """All nonempty subsets of ``range(num_labels)``, ordered by bitmask.

    >>> nonempty_label_subsets(2)
    [[0], [1], [0, 1]]
    """
    if not 1 <= num_labels <= MAX_LABELS_FOR_SUBSETS:
        raise ValueError(
            f"num_labels must be in [1, {MAX_LABELS_FOR_SUBSETS}], got {num_labels}"
        )
    return [
        [j for j in range(num_labels) if mask >> j & 1]
        for mask in range(1, 1 << num_labels)
    ]


def subset_indicator_matrix(num_labels):
    """0/1 matrix with one row per nonempty subset (bitmask order) and one column per label."""
    if not 1 <= num_labels <= MAX_LABELS_FOR_SUBSETS:
        raise ValueError(
            f"num_labels must be in [1, {MAX_LABELS_FOR_SUBSETS}], got {num_labels}"
        )
    masks = np.arange(1, 1 << num_labels)[:, None]
    return ((masks >> np.arange(num_labels)[None, :]) & 1).astype(float)
