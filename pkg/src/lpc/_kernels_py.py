"""Pure numpy implementation of the compiled kernels in ``_kernels.pyx``."""
import numpy as np

_KNN_CHUNK_ELEMENTS = 4_000_000


def simplex_iterate(T, basis, max_iter, opt_tol, piv_tol):
    """Run primal simplex pivots on tableau ``T`` in place.

    Returns ``(status, iterations)`` with status 0 optimal, 1 unbounded,
    2 iteration limit.
    """
    nrows = T.shape[0] - 1
    ncols = T.shape[1] - 1
    obj = T[nrows, :ncols]
    rhs = T[:nrows, ncols]
    bland = False
    it = 0
    while it < max_iter:
        if bland:
            cand = np.flatnonzero(obj < -opt_tol)
            if cand.size == 0:
                return 0, it
            enter = int(cand[0])
        else:
            enter = int(np.argmin(obj))
            if not obj[enter] < -opt_tol:
                return 0, it

        col = T[:nrows, enter]
        rows = np.flatnonzero(col > piv_tol)
        if rows.size == 0:
            return 1, it
        ratios = rhs[rows] / col[rows]
        leave = -1
        best = np.inf
        for i, ratio in zip(rows.tolist(), ratios.tolist()):
            if leave < 0 or ratio < best - 1e-12:
                best, leave = ratio, i
            elif abs(ratio - best) <= 1e-12 and basis[i] < basis[leave]:
                best, leave = ratio, i

        bland = best <= piv_tol

        T[leave] = T[leave] / T[leave, enter]
        factors = T[:, enter].copy()
        factors[leave] = 0.0
        nz = np.flatnonzero(factors)
        if nz.size:
            T[nz] -= factors[nz, None] * T[leave][None, :]
        rhs[(rhs < 0.0) & (rhs > -piv_tol)] = 0.0
        basis[leave] = enter
        it += 1
    return 2, it


def knn_predict(X, y, Q, k, num_labels):
    """Majority vote of the ``k`` nearest training rows for every query.

    Distance ties go to the lower training index, vote ties to the lower label.
    """
    n, d = X.shape
    k = min(int(k), n)
    onehot = np.zeros((n, num_labels), dtype=np.int64)
    onehot[np.arange(n), y] = 1
    out = np.empty(Q.shape[0], dtype=np.int64)
    step = max(1, _KNN_CHUNK_ELEMENTS // max(n, 1))
    for start in range(0, Q.shape[0], step):
        q = Q[start:start + step]
        dist = np.zeros((q.shape[0], n))
        for f in range(d):
            diff = q[:, f, None] - X[None, :, f]
            dist += diff * diff
        kth = np.partition(dist, k - 1, axis=1)[:, k - 1, None]
        below = dist < kth
        at = dist == kth
        room = k - below.sum(axis=1, keepdims=True)
        chosen = below | (at & (np.cumsum(at, axis=1) <= room))
        votes = chosen.astype(np.int64) @ onehot
        out[start:start + step] = np.argmax(votes, axis=1)
    return out
