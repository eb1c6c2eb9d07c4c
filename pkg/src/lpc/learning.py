"""Minimax learning by linear programming.

The learning problem over patterns ``M_1..M_r`` is

    maximize    a.alpha - b.beta + gamma
    subject to  || (M_i (alpha - beta) + gamma)^+ ||_1 <= 1   for every i
                alpha, beta >= 0

and each norm constraint is expanded into one linear inequality per nonempty
label subset ``S``: ``sum_{y in S} M_i[y].(alpha - beta) + |S| gamma <= 1``.
The minimax expected loss is ``R = 1 - a.alpha + b.beta - gamma``. With a
point estimate (``a == b``) the variables collapse to ``lam = alpha - beta``.
"""
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import EmptyUncertaintySet, NumericalError
from .generating import FULL_ENUMERATION_LIMIT, GeneratingFunction, PatternTable
from .lp import DEFAULT_TOLERANCES, LinearProgram, LpStatus, solve
from .numeric import positive_part, subset_indicator_matrix
from .uncertainty import UncertaintyInterval, build_interval, estimate_expectation_cv


def _subset_rows(table):
    """Coefficient block ``sum_{y in S} M_i[y]`` for every (pattern, subset) row."""
    S = subset_indicator_matrix(table.num_labels)
    n_sub = S.shape[0]
    rows = np.arange(table.r * n_sub)
    block = np.zeros((table.r * n_sub, table.m))
    for y in range(table.num_labels):
        np.add.at(block, (rows, np.repeat(table.columns[:, y], n_sub)), np.tile(S[:, y], table.r))
    sizes = np.tile(S.sum(axis=1), table.r)
    return block, sizes


def _check_dims(table, vec, what):
    if vec.size != table.m:
        raise ValueError(f"{what} has length {vec.size}, pattern table expects m={table.m}")


def build_learning_lp(table, interval):
    """LP over ``(alpha, beta, gamma)`` with ``alpha, beta >= 0`` and ``gamma`` free."""
    _check_dims(table, interval.a, "interval")
    block, sizes = _subset_rows(table)
    A = np.hstack([block, -block, sizes[:, None]])
    c = np.concatenate([interval.a, -interval.b, [1.0]])
    mask = np.concatenate([np.ones(2 * table.m, dtype=bool), [False]])
    return LinearProgram(c, A, np.ones(A.shape[0]), mask)


def build_learning_lp_point(table, tau):
    """LP over ``(lam, gamma)``, all free, for a point estimate ``tau``."""
    tau = np.asarray(tau, dtype=float).ravel()
    _check_dims(table, tau, "tau")
    block, sizes = _subset_rows(table)
    A = np.hstack([block, sizes[:, None]])
    c = np.concatenate([tau, [1.0]])
    return LinearProgram(c, A, np.ones(A.shape[0]), np.zeros(table.m + 1, dtype=bool))


@dataclass
class LpcModel:
    """Dual solution of the learning problem and everything needed to predict with it."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: float
    R: float
    interval: UncertaintyInterval
    table: PatternTable
    gf: GeneratingFunction = None
    form: str = "interval"
    pattern_mode: str = "enumerate"
    label_names: tuple = None
    lp_rows: int = 0
    lp_iterations: int = 0
    lp_basis: tuple = field(default=None, repr=False)

    @property
    def lam(self):
        return self.alpha - self.beta

    @property
    def num_labels(self):
        return self.table.num_labels

    @property
    def m(self):
        return self.table.m

    @property
    def value(self):
        """Optimal LP value ``1 - R``."""
        return 1.0 - self.R

    def clipped_scores(self, columns=None):
        """``(M lam + gamma)^+`` for the given ``n x L`` column array (default: the table)."""
        cols = self.table.columns if columns is None else columns
        return positive_part(self.lam[cols] + self.gamma)

    def max_constraint_violation(self):
        """``max_i ||(M_i lam + gamma)^+||_1 - 1`` over the pattern table."""
        return float(self.clipped_scores().sum(axis=1).max() - 1.0)

    def upper_bound_identity_gap(self):
        """Difference between stored ``R`` and ``1 - a.alpha + b.beta - gamma``."""
        a, b = self.interval.a, self.interval.b
        return float(self.R - (1 - a @ self.alpha + b @ self.beta - self.gamma))

    def to_dict(self):
        return {
            "format": "lpc-model",
            "version": __version__,
            "num_labels": self.num_labels,
            "k": None if self.gf is None else self.gf.k,
            "m": self.m,
            "ind_order": "lexicographic",
            "form": self.form,
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "gamma": float(self.gamma),
            "R": float(self.R),
            "interval": self.interval.to_dict(),
            "pattern_mode": self.pattern_mode,
            "patterns": None if self.table.patterns is None else self.table.patterns.tolist(),
            "columns": self.table.columns.tolist(),
            "label_names": None if self.label_names is None else list(self.label_names),
            "classifiers": [] if self.gf is None else self.gf.to_dict()["classifiers"],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != "lpc-model":
            raise ValueError("not an LPC model file")
        num_labels = d["num_labels"]
        gf = None
        if d.get("k") is not None:
            gf = GeneratingFunction.from_dict({"num_labels": num_labels, "classifiers": d["classifiers"]})
        table = PatternTable(num_labels, d["m"], np.array(d["columns"], dtype=np.int64),
                             None if d.get("patterns") is None else np.array(d["patterns"], dtype=np.int64))
        names = d.get("label_names")
        return cls(
            alpha=np.array(d["alpha"], dtype=float),
            beta=np.array(d["beta"], dtype=float),
            gamma=float(d["gamma"]),
            R=float(d["R"]),
            interval=UncertaintyInterval.from_dict(d["interval"]),
            table=table,
            gf=gf,
            form=d.get("form", "interval"),
            pattern_mode=d.get("pattern_mode", "enumerate"),
            label_names=None if names is None else tuple(names),
        )


def save_model(model, path, metadata=None):
    """Write ``model`` as JSON; ``metadata`` is stored under ``"metadata"``."""
    d = model.to_dict()
    if metadata is not None:
        d["metadata"] = metadata
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(d, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return LpcModel.from_dict(json.load(fh))


def train(table, interval, form="auto", gf=None, tol=DEFAULT_TOLERANCES, backend=None, **extra):
    """Solve the learning LP and return an :class:`LpcModel`.

    ``form`` is ``"interval"``, ``"point"`` or ``"auto"``; auto uses the
    point form only when ``a == b`` exactly. Raises
    :class:`EmptyUncertaintySet` when no distribution satisfies the interval.
    """
    if form == "auto":
        form = "point" if interval.is_point else "interval"
    if form == "point":
        if not interval.is_point:
            raise ValueError("the point form needs a == b")
        lp = build_learning_lp_point(table, interval.a)
    elif form == "interval":
        lp = build_learning_lp(table, interval)
    else:
        raise ValueError(f"unknown form {form!r}")

    sol = solve(lp, tol=tol, backend=backend)
    if sol.status is LpStatus.UNBOUNDED:
        raise EmptyUncertaintySet("learning LP is unbounded: the interval admits no distribution")
    if sol.status is LpStatus.INFEASIBLE:
        raise NumericalError("learning LP reported infeasible although the origin is feasible")

    m = table.m
    z = sol.point
    if form == "point":
        lam, gamma = z[:m], float(z[m])
        alpha, beta = positive_part(lam), positive_part(-lam)
        R = 1.0 - sol.value
    else:
        alpha, beta, gamma = z[:m], z[m:2 * m], float(z[2 * m])
        R = 1.0 - (interval.a @ alpha - interval.b @ beta + gamma)
    return LpcModel(alpha, beta, gamma, float(R), interval, table, gf, form,
                    lp_rows=lp.num_constraints, lp_iterations=sol.iterations,
                    lp_basis=sol.basis, **extra)


def train_point(table, tau, gf=None, **kwargs):
    """Point-estimate learning: ``train`` with ``a = b = tau`` in the reduced form."""
    from .uncertainty import point_interval

    return train(table, point_interval(tau), form="point", gf=gf, **kwargs)


@dataclass
class FitReport:
    model: LpcModel
    cv_folds: int
    folds_clamped: bool
    wall_time: float


def fit_lpc(dataset, classifiers, interval_mode="hoeffding", delta=0.05, s=None,
            folds=10, seed=0, pattern_mode="auto", tol=DEFAULT_TOLERANCES, backend=None):
    """Full pipeline: cross-fitted expectation, interval, learning LP.

    ``pattern_mode`` is ``"enumerate"`` (constraints for every prediction
    tuple), ``"observed"`` (only tuples seen on the training features), or
    ``"auto"`` (enumerate up to 4096 tuples).
    """
    start = time.perf_counter()
    gf = GeneratingFunction(classifiers, dataset.num_labels)
    est = estimate_expectation_cv(gf, dataset, folds=folds, seed=seed)
    interval = build_interval(est.tau_n, est.n, interval_mode, delta=delta, s=s, c=est.gf.range_c)
    mode = pattern_mode
    if mode == "auto":
        mode = "enumerate" if est.gf.num_patterns <= FULL_ENUMERATION_LIMIT else "observed"
    table = est.gf.pattern_table(dataset.features, mode)
    model = train(table, interval, gf=est.gf, tol=tol, backend=backend,
                  pattern_mode=mode, label_names=dataset.label_names)
    return FitReport(model, est.folds, est.folds_clamped, time.perf_counter() - start)
