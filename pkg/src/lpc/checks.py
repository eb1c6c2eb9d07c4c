"""Property suites that check the learning machinery against independent oracles.

The oracles solve the primal problems over distributions directly with
scipy's HiGHS solver, so they share no code with the dual LPs built by
:mod:`lpc.learning` and :mod:`lpc.bounds`. The suites back both the test
suite and the ``selfcheck`` command.
"""
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .bounds import kappa, risk_sandwich
from .data import synth_generate
from .generating import GeneratingFunction, PatternTable
from .learning import train
from .lp import DEFAULT_TOLERANCES
from .prediction import expected_loss, rule_table
from .uncertainty import UncertaintyInterval, empirical_expectation, hoeffding_interval, point_interval


# ---------------------------------------------------------------- instances

def random_table(rng, max_r=6, max_labels=3, max_m=9):
    """Pattern table with random one-hot rows (distinct columns within a pattern)."""
    L = int(rng.integers(2, max_labels + 1))
    m = int(rng.integers(L, max_m + 1))
    r_target = int(rng.integers(1, max_r + 1))
    seen, rows = set(), []
    for _ in range(50 * r_target):
        cols = tuple(int(c) for c in rng.choice(m, size=L, replace=False))
        if cols not in seen:
            seen.add(cols)
            rows.append(cols)
        if len(rows) == r_target:
            break
    return PatternTable(L, m, np.array(rows, dtype=np.int64))


def random_distribution(rng, table):
    """Random distribution on (pattern, label), shape ``r x L``."""
    return rng.dirichlet(np.ones(table.r * table.num_labels)).reshape(table.columns.shape)


def random_rule(rng, table):
    return rng.dirichlet(np.ones(table.num_labels), size=table.r)


def random_point_instance(rng, **kwargs):
    """``(table, interval, p0)`` with ``a = b = Phi p0`` for a random ``p0``."""
    table = random_table(rng, **kwargs)
    p0 = random_distribution(rng, table)
    return table, point_interval(table.expectation(p0)), p0


def random_interval_instance(rng, width=0.2, **kwargs):
    """Random box around ``Phi p0``; it always contains ``p0``."""
    table = random_table(rng, **kwargs)
    p0 = random_distribution(rng, table)
    tau = table.expectation(p0)
    lo = tau - width * rng.random(table.m)
    hi = tau + width * rng.random(table.m)
    return table, UncertaintyInterval(tau, lo, hi, (hi - lo) / 2, 1), p0


# ---------------------------------------------------------------- oracles

def _equality_rows(table, interval):
    Phi = table.phi_matrix()
    return Phi, interval.a, interval.b


def primal_min_norm(table, interval):
    """``min ||p||_{inf,1}`` over the uncertainty set, by HiGHS; ``None`` if the set is empty."""
    r, L = table.columns.shape
    Phi, a, b = _equality_rows(table, interval)
    n_p = r * L
    # variables: p (r*L), t (r) with t_i >= p_{i,y}
    c = np.concatenate([np.zeros(n_p), np.ones(r)])
    A_dom = np.zeros((n_p, n_p + r))
    A_dom[np.arange(n_p), np.arange(n_p)] = 1.0
    A_dom[np.arange(n_p), n_p + np.repeat(np.arange(r), L)] = -1.0
    A_ub = np.vstack([A_dom, np.hstack([Phi, np.zeros((table.m, r))]),
                      np.hstack([-Phi, np.zeros((table.m, r))])])
    b_ub = np.concatenate([np.zeros(n_p), b, -a])
    A_eq = np.concatenate([np.ones(n_p), np.zeros(r)])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status == 2:
        return None
    if res.status != 0:
        raise RuntimeError(f"oracle failed: {res.message}")
    return float(res.fun)


def primal_min_inner(table, interval, q):
    """``(min p.q, argmin p)`` over the uncertainty set, by HiGHS; ``None`` if empty."""
    Phi, a, b = _equality_rows(table, interval)
    q = np.asarray(q, dtype=float).ravel()
    res = linprog(q, A_ub=np.vstack([Phi, -Phi]), b_ub=np.concatenate([b, -a]),
                  A_eq=np.ones((1, q.size)), b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status == 2:
        return None
    if res.status != 0:
        raise RuntimeError(f"oracle failed: {res.message}")
    return float(res.fun), res.x.reshape(table.columns.shape)


def random_feasible_distribution(rng, table, interval, vertices=3):
    """Random convex combination of extreme points of the uncertainty set."""
    pts = []
    for _ in range(vertices):
        out = primal_min_inner(table, interval, rng.standard_normal(table.columns.shape))
        if out is None:
            return None
        pts.append(out[1])
    w = rng.dirichlet(np.ones(vertices))
    p = np.maximum(sum(wi * pi for wi, pi in zip(w, pts)), 0.0)
    return p / p.sum()


# ---------------------------------------------------------------- suites

@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list = field(default_factory=list)
    worst: float = 0.0
    seconds: float = 0.0

    @property
    def passed(self):
        return not self.failures

    def record(self, ok, gap, detail):
        self.checks += 1
        self.worst = max(self.worst, float(gap))
        if not ok:
            self.failures.append(detail)

    def summary(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "failures": len(self.failures),
            "first_failures": self.failures[:5],
            "worst_gap": self.worst,
            "seconds": round(self.seconds, 3),
        }


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        result.seconds = time.perf_counter() - start
        return result
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def duality_suite(seed=0, instances=100, tol=DEFAULT_TOLERANCES, atol=1e-6):
    """Dual learning value equals the primal minimum of ``||p||_{inf,1}``."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("duality")
    for i in range(instances):
        table, interval, _ = random_point_instance(rng)
        model = train(table, interval, tol=tol)
        primal = primal_min_norm(table, interval)
        gap = abs(model.value - primal)
        res.record(gap <= atol, gap, f"instance {i}: dual {model.value:.10f} primal {primal:.10f}")
    return res


@_timed
def minimax_suite(seed=0, instances=100, alternatives=20, tol=DEFAULT_TOLERANCES, atol=1e-6, slack=1e-8):
    """The trained rule's worst-case loss equals ``R``; no random rule does better."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("minimax")
    for i in range(instances):
        table, interval, _ = random_point_instance(rng)
        model = train(table, interval, tol=tol)
        h = rule_table(model)
        worst = 1.0 - primal_min_inner(table, interval, h)[0]
        gap = abs(worst - model.R)
        res.record(gap <= atol, gap, f"instance {i}: worst-case {worst:.10f} R {model.R:.10f}")
        for j in range(alternatives):
            alt = random_rule(rng, table)
            alt_worst = 1.0 - primal_min_inner(table, interval, alt)[0]
            short = model.R - alt_worst
            res.record(short <= slack, max(short, 0.0),
                       f"instance {i} rule {j}: worst-case {alt_worst:.10f} < R {model.R:.10f}")
    return res


@_timed
def sandwich_suite(seed=0, triples=200, tol=DEFAULT_TOLERANCES, slack=1e-8, atol_upper=1e-8):
    """``0 <= 1 + kappa(-h) <= loss(h, p) <= 1 - kappa(h) <= 1`` for feasible ``p``."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("sandwich")
    for i in range(triples):
        table, interval, p0 = random_interval_instance(rng)
        model = train(table, interval, tol=tol)
        p = random_feasible_distribution(rng, table, interval)
        if p is None:
            p = p0
        h = random_rule(rng, table)
        s = risk_sandwich(model, h, tol=tol)
        loss = expected_loss(h, p)
        chain = [0.0, s.lower_L, loss, s.upper_R, 1.0]
        worst = max(chain[k] - chain[k + 1] for k in range(4))
        res.record(worst <= slack, max(worst, 0.0),
                   f"triple {i}: chain {[round(v, 10) for v in chain]}")
        k_star = kappa(table, interval, rule_table(model), tol=tol)
        gap = abs(k_star - (1.0 - model.R))
        res.record(gap <= atol_upper, gap, f"triple {i}: kappa(h*) {k_star:.12f} vs 1-R {1 - model.R:.12f}")
    return res


@_timed
def rule_validity_suite(seed=0, instances=50, queries=1000, tol=DEFAULT_TOLERANCES, atol=1e-12):
    """Rule probabilities form distributions dominating the clipped scores."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("rule_validity")
    for i in range(instances):
        maker = random_interval_instance if i % 2 else random_point_instance
        table, interval, _ = maker(rng)
        model = train(table, interval, tol=tol)
        rows = rng.integers(0, table.r, size=queries)
        h = rule_table(model)[rows]
        floor = model.clipped_scores()[rows]
        err = max(float(np.abs(h.sum(axis=1) - 1).max()), float(-h.min()), float((floor - h).max()))
        res.record(err <= atol, max(err, 0.0), f"instance {i}: violation {err:.3e}")
    return res


def coverage_experiment(seed=0, resamples=200, n=200, delta=0.1, mc_samples=10**6, fit_size=300):
    """Fraction of resamples whose Hoeffding interval contains the Monte-Carlo expectation.

    The feature map uses KNN(3/5/7) fitted once on an independent sample, so
    it stays fixed across resamples.
    """
    fit = synth_generate(fit_size, [seed, 1])
    gf = GeneratingFunction(["knn3", "knn5", "knn7"], fit.num_labels).fit(fit.features, fit.labels)
    big = synth_generate(mc_samples, [seed, 2])
    tau_inf = empirical_expectation(gf, big.features, big.labels)
    hits = 0
    for rep in range(resamples):
        sample = synth_generate(n, [seed, 3, rep])
        tau_n = empirical_expectation(gf, sample.features, sample.labels)
        hits += hoeffding_interval(tau_n, n, delta, c=gf.range_c).contains(tau_inf)
    return hits / resamples


@_timed
def coverage_suite(seed=0, resamples=200, n=200, delta=0.1, mc_samples=10**6, slack=0.05):
    res = SuiteResult("coverage")
    freq = coverage_experiment(seed, resamples, n, delta, mc_samples)
    target = 1 - delta - slack
    res.record(freq >= target, max(target - freq, 0.0), f"coverage {freq:.3f} < {target:.3f}")
    return res


def run_selfcheck(seed=0, tol=DEFAULT_TOLERANCES, coverage=True, quick=False):
    """Run every suite; returns the list of :class:`SuiteResult`."""
    scale = 5 if quick else 1
    suites = [
        duality_suite(seed, instances=100 // scale, tol=tol),
        minimax_suite(seed, instances=100 // scale, tol=tol),
        sandwich_suite(seed, triples=200 // scale, tol=tol),
        rule_validity_suite(seed, instances=50 // scale, tol=tol),
    ]
    if coverage:
        suites.append(coverage_suite(seed, mc_samples=10**5 if quick else 10**6))
    return suites

