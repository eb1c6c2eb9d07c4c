"""Expected-loss bounds over the uncertainty set and finite-sample deviation terms.

``kappa(q)`` is the value of

    maximize    a.alpha - b.beta + gamma
    subject to  M_i[y].(alpha - beta) + gamma <= q(i, y)   for every (i, y)
                alpha, beta >= 0

which by LP duality equals ``min_{p in U} p.q``. For any rule ``h`` and any
``p`` in the set, ``1 + kappa(-h) <= loss(h, p) <= 1 - kappa(h)``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyUncertaintySet, NumericalError
from .lp import DEFAULT_TOLERANCES, LinearProgram, LpStatus, solve
from .prediction import rule_table
from .uncertainty import hoeffding_width, point_interval


@dataclass(frozen=True)
class RiskSandwich:
    lower_L: float
    upper_R: float
    kappa_h: float
    kappa_neg_h: float


def _pointwise_rows(table):
    n = table.r * table.num_labels
    block = np.zeros((n, table.m))
    block[np.arange(n), table.columns.ravel()] = 1.0
    return block


def build_kappa_lp(table, interval, q):
    q = np.asarray(q, dtype=float)
    if q.shape != table.columns.shape:
        raise ValueError(f"q must have shape {table.columns.shape}, got {q.shape}")
    if interval.m != table.m:
        raise ValueError("interval and pattern table disagree on m")
    block = _pointwise_rows(table)
    A = np.hstack([block, -block, np.ones((block.shape[0], 1))])
    c = np.concatenate([interval.a, -interval.b, [1.0]])
    mask = np.concatenate([np.ones(2 * table.m, dtype=bool), [False]])
    return LinearProgram(c, A, q.ravel(), mask)


def kappa(table, interval, q, tol=DEFAULT_TOLERANCES, backend=None):
    """``min_{p in U} p.q`` computed through its dual LP."""
    sol = solve(build_kappa_lp(table, interval, q), tol=tol, backend=backend)
    if sol.status is LpStatus.UNBOUNDED:
        raise EmptyUncertaintySet("kappa LP is unbounded: the interval admits no distribution")
    if sol.status is LpStatus.INFEASIBLE:
        raise NumericalError("kappa LP reported infeasible although gamma = min q is feasible")
    return sol.value


def risk_sandwich(model, h=None, **kwargs):
    """Lower and upper expected-loss bounds of rule ``h`` (default: the model's own rule)."""
    h = rule_table(model) if h is None else np.asarray(h, dtype=float)
    k_h = kappa(model.table, model.interval, h, **kwargs)
    k_neg = kappa(model.table, model.interval, -h, **kwargs)
    return RiskSandwich(1.0 + k_neg, 1.0 - k_h, k_h, k_neg)


def lower_bound(model, **kwargs):
    """``L = 1 + kappa(-h)`` for the model's rule."""
    return 1.0 + kappa(model.table, model.interval, -rule_table(model), **kwargs)


def build_primal_lp(table, interval, q):
    """maximize ``-q.p`` over distributions ``p`` on (pattern, label) with ``a <= Phi p <= b``."""
    q = np.asarray(q, dtype=float).ravel()
    Phi = table.phi_matrix()
    ones = np.ones((1, Phi.shape[1]))
    A = np.vstack([ones, -ones, Phi, -Phi])
    rhs = np.concatenate([[1.0, -1.0], interval.b, -interval.a])
    return LinearProgram(-q, A, rhs)


def extreme_distribution(table, interval, q, tol=DEFAULT_TOLERANCES, backend=None):
    """A distribution in the uncertainty set minimizing ``p.q``, shape ``r x L``."""
    sol = solve(build_primal_lp(table, interval, q), tol=tol, backend=backend)
    if sol.status is LpStatus.INFEASIBLE:
        raise EmptyUncertaintySet("no distribution satisfies the interval constraints")
    if sol.status is LpStatus.UNBOUNDED:
        raise NumericalError("primal LP over a simplex cannot be unbounded")
    p = np.maximum(sol.point, 0.0)
    return p.reshape(table.columns.shape)


def worst_case_distribution(model, direction="max_loss", h=None, **kwargs):
    """Distribution in the set attaining the upper (``max_loss``) or lower (``min_loss``) bound."""
    h = rule_table(model) if h is None else np.asarray(h, dtype=float)
    if direction == "max_loss":
        q = h
    elif direction == "min_loss":
        q = -h
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return extreme_distribution(model.table, model.interval, q, **kwargs)


def deviation_term(m, n, delta, c_norm2, M):
    """``M * ||c||_2 * sqrt((log m + log(2/delta)) / (2 n))``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if c_norm2 < 0 or M < 0:
        raise ValueError("c_norm2 and M must be nonnegative")
    return M * c_norm2 * hoeffding_width(m, delta) / math.sqrt(n)


@dataclass(frozen=True)
class DeviationBound:
    """Finite-sample deviation terms for a generating function of dimension ``m``.

    ``M_estimate`` bounds the norm of dual solutions; when it comes from
    :func:`estimate_M_heuristic` it is only a lower bound on the true
    constant, so every bound below is optimistic.
    """

    m: int
    n: int
    delta: float
    c_norm2: float
    M_estimate: float
    M_is_lower_bound: bool = True

    @property
    def term(self):
        return deviation_term(self.m, self.n, self.delta, self.c_norm2, self.M_estimate)

    def interval_excess(self, R_inf):
        """Upper bound on ``R(a_n, b_n)`` given the infinite-sample minimax risk."""
        return R_inf + 2.0 * self.term

    def point_upper(self, R_point):
        """Upper bound on the risk of the point-estimate rule."""
        return R_point + self.term

    def point_lower(self, L_point):
        """Lower bound on the risk of the point-estimate rule."""
        return L_point - self.term

    def point_excess(self, R_inf, N):
        """Excess-risk bound with the diameter constant ``N`` in place of ``M``."""
        return R_inf + deviation_term(self.m, self.n, self.delta, self.c_norm2, N)


def estimate_M_heuristic(table, num_samples, seed, anchors=(), tol=DEFAULT_TOLERANCES, backend=None):
    """Largest ``||lam||_2`` over point-form solutions at sampled expectation vectors.

    The vectors are the ``anchors`` (e.g. the model's own estimate) followed
    by ``num_samples`` random convex combinations of the realizable feature
    vectors. This is a lower bound on the true constant, which maximizes over
    the whole convex hull.
    """
    from .learning import train

    rng = np.random.default_rng(seed)
    best = 0.0
    vectors = [np.asarray(a, dtype=float) for a in anchors]
    n_atoms = table.r * table.num_labels
    for _ in range(num_samples):
        weights = rng.dirichlet(np.ones(n_atoms)).reshape(table.columns.shape)
        vectors.append(table.expectation(weights))
    for a in vectors:
        model = train(table, point_interval(a), form="point", tol=tol, backend=backend)
        best = max(best, float(np.linalg.norm(model.lam)))
    return best
