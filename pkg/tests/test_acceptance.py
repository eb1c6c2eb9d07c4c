"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line (shown in the "acceptance criteria"
section of the pytest summary) before asserting.
"""
import time
import warnings

import numpy as np
import pytest

from lpc.bounds import kappa, lower_bound
from lpc.checks import (
    coverage_experiment,
    duality_suite,
    minimax_suite,
    random_interval_instance,
    random_point_instance,
    rule_validity_suite,
    sandwich_suite,
)
from lpc.classifiers import make_classifier
from lpc.data import synth_generate
from lpc.experiments import learning_curve
from lpc.generating import label_indicator
from lpc.learning import fit_lpc, train, train_point
from lpc.prediction import empirical_error, rule_probabilities, rule_table
from lpc.uncertainty import UncertaintyInterval, point_interval

SEED = 2024


def test_c1_duality_oracle(acceptance):
    start = time.perf_counter()
    res = duality_suite(SEED, instances=100)
    elapsed = time.perf_counter() - start
    ok = res.passed and res.checks == 100 and elapsed < 10
    acceptance(1, "duality oracle", ok,
               f"{res.checks} instances, max |dual - primal| = {res.worst:.2e} (tol 1e-6), {elapsed:.2f}s (< 10s)")
    assert ok, res.failures[:3]


def test_c2_minimax_certificate(acceptance):
    res = minimax_suite(SEED, instances=100, alternatives=20)
    ok = res.passed and res.checks == 100 * 21
    acceptance(2, "minimax certificate", ok,
               f"100 instances x (1 + 20 rules), worst gap {res.worst:.2e}, failures {len(res.failures)}")
    assert ok, res.failures[:3]


def test_c3_sandwich(acceptance):
    res = sandwich_suite(SEED, triples=200)
    ok = res.passed and res.checks == 400
    acceptance(3, "risk sandwich", ok,
               f"200 triples, worst violation {res.worst:.2e} (slack 1e-8), kappa(h*) = 1 - R checked")
    assert ok, res.failures[:3]


def test_c4_closed_forms(acceptance):
    from lpc.checks import primal_min_norm

    gaps = []
    for L in (2, 3, 4):
        table = label_indicator(L).enumerated_patterns()
        iv = UncertaintyInterval.from_bounds(np.zeros(L), np.ones(L))
        R = train(table, iv).R
        gaps.append(abs(R - (1 - 1 / L)))
        gaps.append(abs((1 - primal_min_norm(table, iv)) - (1 - 1 / L)))
    table = label_indicator(2).enumerated_patterns()
    iv = point_interval([0.7, 0.3])
    model = train(table, iv)
    L_val = lower_bound(model)
    oracle_R = 1 - primal_min_norm(table, iv)
    gaps += [abs(model.R - 0.3), abs(L_val - 0.3), abs(oracle_R - 0.3)]
    worst = max(gaps)
    ok = worst <= 1e-9
    acceptance(4, "closed-form cases", ok,
               f"unconstrained R = 1 - 1/|Y| for |Y| in 2,3,4 and singleton (0.7,0.3) R = L = 0.3; "
               f"max error {worst:.1e} (tol 1e-9)")
    assert ok


def test_c5_point_interval_consistency(acceptance):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(50):
        table, iv, _ = random_point_instance(rng)
        worst = max(worst, abs(train(table, iv, form="interval").R - train_point(table, iv.a).R))
    ok = worst <= 1e-8
    acceptance(5, "point/interval consistency", ok, f"50 instances, max |R_interval - R_point| = {worst:.1e}")
    assert ok


def test_c6_monotonicity(acceptance):
    rng = np.random.default_rng(SEED)
    worst = -np.inf
    for _ in range(50):
        table, outer, p0 = random_interval_instance(rng)
        tau = table.expectation(p0)
        t = rng.random(table.m)
        inner = UncertaintyInterval.from_bounds(tau - t * (tau - outer.a), tau + t * (outer.b - tau))
        worst = max(worst, train(table, inner).R - train(table, outer).R)
    ok = worst <= 1e-9
    acceptance(6, "monotonicity", ok, f"50 nestings, max R(inner) - R(outer) = {worst:.2e}")
    assert ok


@pytest.mark.slow
def test_c7_figure1(acceptance):
    start = time.perf_counter()
    cells, contained, trend = 0, 0, []
    for seed in range(10):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rows = learning_curve(seed)
        cells += len(rows)
        contained += sum(r.contained for r in rows)
        trend.append(rows[-1].R < rows[0].R)
    elapsed = time.perf_counter() - start
    frac = contained / cells
    ok = frac >= 0.9 and all(trend) and elapsed < 300
    acceptance(7, "learning curve", ok,
               f"test error in [L, R] for {contained}/{cells} cells ({frac:.0%}, need 90%), "
               f"R(5000) < R(50) for {sum(trend)}/10 seeds, {elapsed:.0f}s (< 300s)")
    assert ok


@pytest.mark.slow
def test_c8_hoeffding_coverage(acceptance):
    freq = coverage_experiment(seed=SEED, resamples=200, n=200, delta=0.1, mc_samples=10**6)
    ok = freq >= 1 - 0.1 - 0.05
    acceptance(8, "Hoeffding coverage", ok, f"containment frequency {freq:.3f} over 200 resamples (need >= 0.85)")
    assert ok


def test_c9_rule_validity(acceptance):
    res = rule_validity_suite(SEED, instances=50, queries=1000)
    # also on a model trained end to end, through the feature-space path
    model = fit_lpc(synth_generate(500, SEED), ["knn3", "knn5", "knn7"], interval_mode="manual", s=0.25).model
    X = synth_generate(1000, SEED + 1).features
    h = rule_probabilities(model, X)
    floor = np.maximum(model.lam[model.gf.pattern_columns(model.gf.predict_patterns(X))] + model.gamma, 0)
    err = max(float(np.abs(h.sum(axis=1) - 1).max()), float(-h.min()), float((floor - h).max()))
    ok = res.passed and err <= 1e-12
    acceptance(9, "rule validity", ok,
               f"51 models x 1000 queries, max violation {max(res.worst, err):.1e} (tol 1e-12)")
    assert ok


def test_c10_lpc_vs_base_classifiers(acceptance):
    names = ["knn3", "knn5", "knn7"]
    margins = []
    for seed in range(5):
        train_set = synth_generate(1000, [seed, 1000])
        test_set = synth_generate(10_000, [seed, 0])
        model = fit_lpc(train_set, names, interval_mode="point", seed=seed).model
        lpc_err = empirical_error(model, test_set, "deterministic")
        base = min(
            float(np.mean(make_classifier(n).fit(train_set.features, train_set.labels)
                          .predict(test_set.features) != test_set.labels))
            for n in names
        )
        margins.append(lpc_err - base)
    ok = max(margins) <= 0.05
    acceptance(10, "LPC vs best base classifier", ok,
               f"argmax error minus best base error per seed: {', '.join(f'{m:+.4f}' for m in margins)} "
               f"(need <= 0.05)")
    assert ok


def test_kappa_identity_on_pipeline_model():
    # supporting check for criterion 3 on a model fitted end to end
    model = fit_lpc(synth_generate(400, SEED), ["knn3", "knn5", "knn7"], interval_mode="manual", s=0.25).model
    assert kappa(model.table, model.interval, rule_table(model)) == pytest.approx(1 - model.R, abs=1e-8)
