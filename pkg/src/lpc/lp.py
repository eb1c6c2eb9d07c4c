"""Dense two-phase simplex for ``max c.z  s.t.  A z <= b`` with optional sign constraints.

Free variables are split into a difference of nonnegative parts. The entering
column follows Dantzig's rule and switches to Bland's rule after every
degenerate pivot, which rules out cycling. The ratio test breaks ties by the
smallest basic variable index. The final vertex is recomputed from its basis
with a direct linear solve to remove accumulated pivoting error.
"""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .errors import NumericalError


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-9
    optimality: float = 1e-9
    pivot: float = 1e-9


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class LinearProgram:
    """maximize ``objective @ z`` subject to ``constraint_matrix @ z <= rhs``.

    Variables flagged in ``nonneg_mask`` are additionally constrained to be
    nonnegative; the others are free. By default every variable is nonnegative.
    """

    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    nonneg_mask: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        A = np.asarray(self.constraint_matrix, dtype=float)
        b = np.asarray(self.rhs, dtype=float).ravel()
        if A.ndim != 2:
            if A.size == 0:
                A = A.reshape(0, c.size)
            else:
                raise ValueError("constraint_matrix must be 2-d")
        mask = (
            np.ones(c.size, dtype=bool)
            if self.nonneg_mask is None
            else np.asarray(self.nonneg_mask, dtype=bool).ravel()
        )
        if c.size < 1:
            raise ValueError("a linear program needs at least one variable")
        if A.shape != (b.size, c.size):
            raise ValueError(
                f"constraint matrix shape {A.shape} does not match "
                f"{b.size} constraints x {c.size} variables"
            )
        if mask.size != c.size:
            raise ValueError("nonneg_mask length must equal the number of variables")
        for name, arr in (("objective", c), ("constraint_matrix", A), ("rhs", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains NaN or infinite entries")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraint_matrix", A)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "nonneg_mask", mask)

    @property
    def num_variables(self):
        return self.objective.size

    @property
    def num_constraints(self):
        return self.rhs.size

    def residual(self, z):
        """Largest violation of ``A z <= b`` and of the sign constraints (0 if feasible)."""
        z = np.asarray(z, dtype=float)
        worst = 0.0
        if self.rhs.size:
            worst = max(worst, float(np.max(self.constraint_matrix @ z - self.rhs)))
        if self.nonneg_mask.any():
            worst = max(worst, float(np.max(-z[self.nonneg_mask])))
        return max(worst, 0.0)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    point: np.ndarray = None
    value: float = None
    iterations: int = 0
    basis: tuple = field(default=None, repr=False)

    @property
    def optimal(self):
        return self.status is LpStatus.OPTIMAL


def _pivot(T, basis, row, col):
    T[row] = T[row] / T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    nz = np.flatnonzero(factors)
    T[nz] -= factors[nz, None] * T[row][None, :]
    basis[row] = col


def _canonical_objective(T, basis, cost):
    """Objective row ``[-cost | 0]`` with basic columns eliminated."""
    nrows = T.shape[0] - 1
    row = np.zeros(T.shape[1])
    row[: cost.size] = -cost
    for i in range(nrows):
        cb = cost[basis[i]] if basis[i] < cost.size else 0.0
        if cb != 0.0:
            row += cb * T[i]
    T[nrows] = row


def solve(lp, tol=DEFAULT_TOLERANCES, backend=None, max_iter=None):
    """Solve ``lp`` and return an :class:`LpSolution`.

    ``backend`` selects the pivoting kernel ("cython" or "python"); the
    import-time default is used otherwise.
    """
    impl = kernels.get_backend(backend)
    c, A, b, mask = lp.objective, lp.constraint_matrix, lp.rhs, lp.nonneg_mask
    m, d = A.shape
    free = np.flatnonzero(~mask)
    # structural columns: one per original variable, then the negative parts of free ones
    A_s = np.hstack([A, -A[:, free]])
    c_s = np.concatenate([c, -c[free]])
    n_s = A_s.shape[1]

    if m == 0:
        if np.any(c_s > tol.optimality):
            return LpSolution(LpStatus.UNBOUNDED)
        return LpSolution(LpStatus.OPTIMAL, np.zeros(d), 0.0, 0, ())

    neg = b < 0
    art_rows = np.flatnonzero(neg)
    n_art = art_rows.size
    ncols = n_s + m + n_art
    T = np.zeros((m + 1, ncols + 1))
    sign = np.where(neg, -1.0, 1.0)
    T[:m, :n_s] = A_s * sign[:, None]
    T[np.arange(m), n_s + np.arange(m)] = sign
    T[art_rows, n_s + m + np.arange(n_art)] = 1.0
    T[:m, -1] = b * sign
    basis = (n_s + np.arange(m)).astype(np.int64)
    basis[art_rows] = n_s + m + np.arange(n_art)

    if max_iter is None:
        max_iter = 50 * (m + ncols) + 1000
    total_iter = 0

    if n_art:
        cost1 = np.zeros(ncols)
        cost1[n_s + m:] = -1.0
        _canonical_objective(T, basis, cost1)
        status, it = impl.simplex_iterate(T, basis, max_iter, tol.optimality, tol.pivot)
        total_iter += it
        if status == 2:
            raise NumericalError("simplex iteration limit reached in phase 1")
        if T[m, -1] < -tol.feasibility * max(1.0, float(np.abs(b).max())):
            return LpSolution(LpStatus.INFEASIBLE, iterations=total_iter)
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] < n_s + m:
                continue
            row = np.abs(T[i, : n_s + m])
            j = int(np.argmax(row))
            if row[j] > tol.pivot:
                _pivot(T, basis, i, j)
            else:
                keep[i] = False
        rows = np.concatenate([np.flatnonzero(keep), [m]])
        T = np.ascontiguousarray(np.delete(T[rows], np.s_[n_s + m: ncols], axis=1))
        basis = np.ascontiguousarray(basis[keep])
        row_ids = np.flatnonzero(keep)
    else:
        row_ids = np.arange(m)

    cost2 = np.concatenate([c_s, np.zeros(m)])
    _canonical_objective(T, basis, cost2)
    status, it = impl.simplex_iterate(T, basis, max_iter, tol.optimality, tol.pivot)
    total_iter += it
    if status == 1:
        return LpSolution(LpStatus.UNBOUNDED, iterations=total_iter)
    if status == 2:
        raise NumericalError("simplex iteration limit reached in phase 2")

    nrows = T.shape[0] - 1
    x = np.zeros(n_s + m)
    x[basis] = T[:nrows, -1]
    x = _refine(A_s, b, row_ids, basis, x, tol)
    z = x[:d].copy()
    z[free] -= x[d:n_s]
    return LpSolution(
        LpStatus.OPTIMAL,
        z,
        float(c @ z),
        total_iter,
        tuple(int(j) for j in basis),
    )


def _refine(A_s, b, row_ids, basis, x, tol):
    """Recompute the basic solution from the original data when that is well posed."""
    m, n_s = A_s.shape
    E = np.hstack([A_s, np.eye(m)])[row_ids]
    B = E[:, basis]
    try:
        xb = np.linalg.solve(B, b[row_ids])
    except np.linalg.LinAlgError:
        return x
    if not np.all(np.isfinite(xb)) or np.any(xb < -1e3 * tol.feasibility):
        return x
    refined = np.zeros_like(x)
    refined[basis] = np.maximum(xb, 0.0)
    slack = b - A_s @ refined[:n_s]
    if slack.min(initial=0.0) < -tol.feasibility and slack.min() < (b - A_s @ x[:n_s]).min():
        return x
    return refined
