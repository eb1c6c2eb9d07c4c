# cython: language_level=3
"""Compiled inner loops: dense simplex pivoting and brute-force KNN voting.

Both functions mirror ``lpc._kernels_py`` operation for operation, so the two
backends walk the same pivot sequence and return the same labels.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs

cnp.import_array()


def simplex_iterate(double[:, ::1] T, long long[::1] basis, long long max_iter,
                    double opt_tol, double piv_tol):
    """Run primal simplex pivots on tableau ``T`` in place.

    Returns ``(status, iterations)`` with status 0 optimal, 1 unbounded,
    2 iteration limit.
    """
    cdef Py_ssize_t nrows = T.shape[0] - 1
    cdef Py_ssize_t ncols = T.shape[1] - 1
    cdef Py_ssize_t i, j, k, enter, leave
    cdef long long it = 0
    cdef bint bland = False
    cdef double best, val, ratio, piv, f

    while it < max_iter:
        enter = -1
        if bland:
            for j in range(ncols):
                if T[nrows, j] < -opt_tol:
                    enter = j
                    break
        else:
            best = -opt_tol
            for j in range(ncols):
                val = T[nrows, j]
                if val < best:
                    best = val
                    enter = j
        if enter < 0:
            return 0, it

        leave = -1
        best = INFINITY
        for i in range(nrows):
            piv = T[i, enter]
            if piv > piv_tol:
                ratio = T[i, ncols] / piv
                if leave < 0 or ratio < best - 1e-12:
                    best = ratio
                    leave = i
                elif fabs(ratio - best) <= 1e-12 and basis[i] < basis[leave]:
                    best = ratio
                    leave = i
        if leave < 0:
            return 1, it

        bland = best <= piv_tol

        piv = T[leave, enter]
        for k in range(ncols + 1):
            T[leave, k] = T[leave, k] / piv
        for i in range(nrows + 1):
            if i == leave:
                continue
            f = T[i, enter]
            if f != 0.0:
                for k in range(ncols + 1):
                    T[i, k] = T[i, k] - f * T[leave, k]
        for i in range(nrows):
            if T[i, ncols] < 0.0 and T[i, ncols] > -piv_tol:
                T[i, ncols] = 0.0
        basis[leave] = enter
        it += 1
    return 2, it


def knn_predict(double[:, ::1] X, long long[::1] y, double[:, ::1] Q,
                Py_ssize_t k, Py_ssize_t num_labels):
    """Majority vote of the ``k`` nearest training rows for every query.

    Distance ties go to the lower training index, vote ties to the lower label.
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t nq = Q.shape[0]
    cdef Py_ssize_t q, i, f, pos, filled, lab, best_lab
    cdef double dist, diff
    if k > n:
        k = n
    out = np.empty(nq, dtype=np.int64)
    cdef long long[::1] out_v = out
    best_d_arr = np.empty(k, dtype=np.float64)
    best_i_arr = np.empty(k, dtype=np.int64)
    votes_arr = np.empty(num_labels, dtype=np.int64)
    cdef double[::1] best_d = best_d_arr
    cdef long long[::1] best_i = best_i_arr
    cdef long long[::1] votes = votes_arr

    for q in range(nq):
        filled = 0
        for i in range(n):
            dist = 0.0
            for f in range(d):
                diff = Q[q, f] - X[i, f]
                dist = dist + diff * diff
            if filled == k and dist >= best_d[k - 1]:
                continue
            if filled < k:
                pos = filled
                filled += 1
            else:
                pos = k - 1
            while pos > 0 and best_d[pos - 1] > dist:
                best_d[pos] = best_d[pos - 1]
                best_i[pos] = best_i[pos - 1]
                pos -= 1
            best_d[pos] = dist
            best_i[pos] = i
        for lab in range(num_labels):
            votes[lab] = 0
        for pos in range(filled):
            votes[y[best_i[pos]]] += 1
        best_lab = 0
        for lab in range(1, num_labels):
            if votes[lab] > votes[best_lab]:
                best_lab = lab
        out_v[q] = best_lab
    return out
