import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import ConstantClassifier
from lpc.data import LabeledDataset, synth_generate
from lpc.errors import DataError
from lpc.generating import GeneratingFunction, ind
from lpc.uncertainty import (
    UncertaintyInterval,
    build_interval,
    empirical_expectation,
    estimate_expectation_cv,
    hoeffding_interval,
    hoeffding_width,
    point_interval,
)


class TestHoeffding:
    def test_theorem_formula(self):
        iv = hoeffding_interval([0.5, 0.5], 100, 0.05, c=[1, 1])
        s = math.sqrt((math.log(2) + math.log(40)) / 2)
        assert iv.s == pytest.approx([s, s], abs=1e-15)
        assert s == pytest.approx(1.4802, abs=1e-4)
        assert iv.half_width == pytest.approx([s / 10] * 2, abs=1e-15)

    def test_manual_override(self):
        iv = hoeffding_interval(np.full(4, 0.25), 100, None, s=0.25)
        assert iv.half_width == pytest.approx([0.025] * 4, abs=1e-15)
        assert iv.a == pytest.approx([0.225] * 4) and iv.b == pytest.approx([0.275] * 4)

    @given(st.integers(1, 10**6))
    def test_four_n_halves(self, n):
        tau = [0.2, 0.3, 0.5]
        w1 = hoeffding_interval(tau, n, 0.1).half_width
        w4 = hoeffding_interval(tau, 4 * n, 0.1).half_width
        assert np.allclose(w4, w1 / 2, rtol=1e-14)

    def test_zero_s_is_point(self):
        tau = [0.7, 0.3]
        a = hoeffding_interval(tau, 10, 0.05, s=0.0)
        b = point_interval(tau, 10)
        assert np.array_equal(a.a, b.a) and np.array_equal(a.b, b.b) and a.is_point

    @pytest.mark.parametrize("kwargs", [
        dict(delta=0.0), dict(delta=1.0), dict(n=0), dict(c=[-1.0, 1.0]), dict(s=-1.0),
    ])
    def test_invalid(self, kwargs):
        args = dict(tau_n=[0.5, 0.5], n=10, delta=0.05)
        args.update(kwargs)
        with pytest.raises(ValueError):
            hoeffding_interval(**args)

    def test_width_guard(self):
        with pytest.raises(ValueError):
            hoeffding_width(0, 0.1)


class TestPointInterval:
    def test_example(self):
        iv = point_interval([0.7, 0.3])
        assert iv.a.tolist() == [0.7, 0.3] and iv.b.tolist() == [0.7, 0.3]
        assert np.all(iv.b - iv.a == 0)

    def test_round_trip(self):
        iv = hoeffding_interval([0.1, 0.9], 50, 0.2)
        again = UncertaintyInterval.from_dict(iv.to_dict())
        assert np.array_equal(again.a, iv.a) and again.delta == 0.2 and again.n == 50

    def test_rejects_inverted(self):
        with pytest.raises(ValueError):
            UncertaintyInterval([0.5], [0.6], [0.4], [0.0], 1)

    def test_build_interval_modes(self):
        tau = [0.25] * 4
        assert build_interval(tau, 10, "point").is_point
        assert build_interval(tau, 100, "manual", s=0.25).half_width == pytest.approx([0.025] * 4)
        with pytest.raises(ValueError):
            build_interval(tau, 10, "manual")
        with pytest.raises(ValueError):
            build_interval(tau, 10, "bootstrap")


class TestCrossFit:
    def test_constant_classifier(self):
        y = np.array([0] * 12 + [1] * 8)
        data = LabeledDataset(np.arange(20.0)[:, None], y)
        gf = GeneratingFunction([ConstantClassifier(0)], 2)
        est = estimate_expectation_cv(gf, data, folds=4, seed=0)
        expected = np.zeros(4)
        expected[ind((0, 0), 2)] = 0.6
        expected[ind((1, 0), 2)] = 0.4
        assert est.tau_n == pytest.approx(expected, abs=1e-15)

    def test_predictable_data_mass_on_agreement(self):
        X = np.repeat(np.array([[0.0], [10.0], [20.0]]), 10, axis=0)
        y = np.repeat([0, 1, 2], 10)
        data = LabeledDataset(X, y)
        est = estimate_expectation_cv(GeneratingFunction(["knn1", "knn3"], 3), data, folds=5, seed=1)
        agree = [ind((c, c, c), 3) for c in range(3)]
        assert est.tau_n[agree].sum() == pytest.approx(1.0)

    @given(st.integers(0, 10**5))
    def test_is_distribution(self, seed):
        data = synth_generate(60, seed)
        est = estimate_expectation_cv(GeneratingFunction(["knn1", "knn3"], 3), data, folds=5, seed=seed)
        assert est.tau_n.sum() == pytest.approx(1.0, abs=1e-12) and est.tau_n.min() >= 0
        assert est.gf.fitted and est.n == 60

    def test_final_gf_refit_on_all(self):
        data = synth_generate(80, 2)
        est = estimate_expectation_cv(GeneratingFunction(["knn3"], 3), data, folds=5, seed=0)
        direct = GeneratingFunction(["knn3"], 3).fit(data.features, data.labels)
        assert np.array_equal(est.gf.predict_patterns(data.features), direct.predict_patterns(data.features))

    def test_reorder_invariance(self, rng):
        data = synth_generate(90, 3)
        perm = rng.permutation(90)
        gf = GeneratingFunction(["knn3", "knn5", "knn7"], 3)
        a = estimate_expectation_cv(gf, data, folds=10, seed=4)
        b = estimate_expectation_cv(gf, data.subset(perm), folds=10, seed=4)
        assert np.array_equal(a.tau_n, b.tau_n)

    def test_fold_clamping(self):
        data = LabeledDataset(np.arange(9.0)[:, None], np.array([0] * 6 + [1] * 3))
        with pytest.warns(UserWarning):
            est = estimate_expectation_cv(GeneratingFunction(["knn1"], 2), data, folds=10, seed=0)
        assert est.folds == 3 and est.folds_clamped

    def test_rejects_singleton_class(self):
        data = LabeledDataset(np.arange(5.0)[:, None], np.array([0, 0, 0, 0, 1]))
        with pytest.raises(DataError):
            estimate_expectation_cv(GeneratingFunction(["knn1"], 2), data)

    def test_rejects_label_mismatch(self):
        data = synth_generate(30, 0)
        with pytest.raises(DataError):
            estimate_expectation_cv(GeneratingFunction(["knn1"], 4), data)

    def test_empirical_expectation(self):
        data = synth_generate(40, 0)
        gf = GeneratingFunction(["knn1"], 3).fit(data.features, data.labels)
        tau = empirical_expectation(gf, data.features, data.labels)
        # knn1 on its own training set is always right
        assert tau[[ind((c, c), 3) for c in range(3)]] == pytest.approx(data.class_counts() / 40)
