"""Learning-curve experiment on the synthetic task."""
from dataclasses import asdict, dataclass

from .bounds import lower_bound
from .data import SYNTHETIC_BAYES_RISK, synth_generate
from .learning import fit_lpc
from .prediction import empirical_error

CURVE_SIZES = (50, 100, 500, 1000, 5000)
CURVE_CLASSIFIERS = ("knn3", "knn5", "knn7")
TEST_SIZE = 10_000


@dataclass(frozen=True)
class CurveRow:
    n: int
    R: float
    L: float
    test_error: float
    argmax_error: float
    bayes_risk: float

    @property
    def contained(self):
        return self.L <= self.test_error <= self.R

    def as_dict(self):
        return asdict(self)


def training_seed(seed, n):
    return [seed, n]


def test_seed(seed):
    return [seed, 0]


def learning_curve(seed, sizes=CURVE_SIZES, s=0.25, classifiers=CURVE_CLASSIFIERS,
                   folds=10, test_size=TEST_SIZE, bayes_risk=SYNTHETIC_BAYES_RISK, backend=None):
    """Upper bound, lower bound and test error of the LPC for each training size.

    One test set of ``test_size`` samples is drawn per ``seed`` and shared by
    all sizes. Intervals use the fixed half-width numerator ``s``.
    """
    test = synth_generate(test_size, test_seed(seed))
    rows = []
    for n in sizes:
        train_set = synth_generate(n, training_seed(seed, n))
        model = fit_lpc(train_set, list(classifiers), interval_mode="manual", s=s,
                        folds=folds, seed=seed, backend=backend).model
        rows.append(CurveRow(
            n=n,
            R=model.R,
            L=lower_bound(model, backend=backend),
            test_error=empirical_error(model, test, "exact"),
            argmax_error=empirical_error(model, test, "deterministic"),
            bayes_risk=bayes_risk,
        ))
    return rows
