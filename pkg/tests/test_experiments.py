from lpc.data import SYNTHETIC_BAYES_RISK
from lpc.experiments import CURVE_SIZES, learning_curve


def test_curve_rows():
    rows = learning_curve(seed=2, sizes=(60, 600), test_size=2000)
    assert [r.n for r in rows] == [60, 600]
    for r in rows:
        assert 0 <= r.L <= r.R <= 1
        assert 0 <= r.test_error <= 1 and 0 <= r.argmax_error <= 1
        assert r.bayes_risk == SYNTHETIC_BAYES_RISK
        assert set(r.as_dict()) == {"n", "R", "L", "test_error", "argmax_error", "bayes_risk"}
    assert rows[1].R < rows[0].R


def test_defaults():
    assert CURVE_SIZES == (50, 100, 500, 1000, 5000)


def test_deterministic():
    a = learning_curve(seed=3, sizes=(80,), test_size=500)
    b = learning_curve(seed=3, sizes=(80,), test_size=500)
    assert a == b
    assert learning_curve(seed=4, sizes=(80,), test_size=500) != a
