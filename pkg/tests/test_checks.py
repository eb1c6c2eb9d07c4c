import numpy as np
import pytest

from lpc.checks import (
    SuiteResult,
    duality_suite,
    primal_min_inner,
    primal_min_norm,
    random_feasible_distribution,
    random_interval_instance,
    random_table,
    run_selfcheck,
    sandwich_suite,
)
from lpc.generating import label_indicator
from lpc.lp import Tolerances
from lpc.uncertainty import UncertaintyInterval, point_interval


class TestGenerators:
    def test_table_shape_limits(self, rng):
        for _ in range(100):
            t = random_table(rng)
            assert 1 <= t.r <= 6 and 2 <= t.num_labels <= 3 and t.m <= 9
            assert all(len(set(row)) == t.num_labels for row in t.columns.tolist())
            assert len({tuple(row) for row in t.columns.tolist()}) == t.r

    def test_feasible_distribution(self, rng):
        for _ in range(20):
            table, iv, _ = random_interval_instance(rng)
            p = random_feasible_distribution(rng, table, iv)
            assert p.min() >= 0 and p.sum() == pytest.approx(1.0)
            assert iv.contains(table.expectation(p), atol=1e-9)


class TestOracles:
    def test_known_values(self):
        table = label_indicator(2).enumerated_patterns()
        assert primal_min_norm(table, point_interval([0.7, 0.3])) == pytest.approx(0.7)
        value, p = primal_min_inner(table, point_interval([0.7, 0.3]), np.array([[1.0, 0.0]]))
        assert value == pytest.approx(0.7)
        assert np.allclose(p, [[0.7, 0.3]])

    def test_empty(self):
        table = label_indicator(2).enumerated_patterns()
        iv = UncertaintyInterval.from_bounds([0.8, 0.8], [0.9, 0.9])
        assert primal_min_norm(table, iv) is None
        assert primal_min_inner(table, iv, np.zeros((1, 2))) is None


class TestSuites:
    def test_quick_selfcheck_passes(self):
        suites = run_selfcheck(seed=1, coverage=False, quick=True)
        assert [s.name for s in suites] == ["duality", "minimax", "sandwich", "rule_validity"]
        assert all(s.passed for s in suites), [s.summary() for s in suites if not s.passed]
        assert all(s.checks > 0 for s in suites)

    def test_corrupted_tolerance_is_caught(self):
        bad = Tolerances(optimality=0.5)
        res = duality_suite(seed=0, instances=20, tol=bad)
        assert not res.passed and res.failures[0].startswith("instance")
        assert not sandwich_suite(seed=0, triples=40, tol=bad).passed

    def test_summary(self):
        res = SuiteResult("x")
        res.record(True, 0.1, "fine")
        res.record(False, 0.5, "broken")
        s = res.summary()
        assert s["checks"] == 2 and s["failures"] == 1 and s["first_failures"] == ["broken"]
        assert not s["passed"] and s["worst_gap"] == 0.5
