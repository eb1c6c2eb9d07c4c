"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Each row times one workload on both backends and checks that the outputs
are identical.
"""
import argparse
import json
import time

import numpy as np

from lpc.checks import random_interval_instance
from lpc.data import synth_generate
from lpc.generating import GeneratingFunction
from lpc.kernels import get_backend
from lpc.learning import build_learning_lp
from lpc.lp import solve
from lpc.uncertainty import estimate_expectation_cv, hoeffding_interval


def _best_of(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def knn_workload(n_train=5000, n_query=10000):
    train = synth_generate(n_train, 1)
    query = synth_generate(n_query, 2).features

    def run(name):
        return get_backend(name).knn_predict(train.features, train.labels, query, 7, 3)

    return f"knn7 {n_train} x {n_query}", run


def simplex_workload(instances=200):
    rng = np.random.default_rng(0)
    lps = [build_learning_lp(*random_interval_instance(rng)[:2]) for _ in range(instances)]

    def run(name):
        return [solve(lp, backend=name).value for lp in lps]

    return f"simplex, {instances} small learning LPs", run


def large_lp_workload():
    data = synth_generate(1000, 4)
    gf = GeneratingFunction(["knn3", "knn5", "knn7", "knn9"], 3)
    est = estimate_expectation_cv(gf, data, folds=5, seed=0)
    table = est.gf.enumerated_patterns()
    lp = build_learning_lp(table, hoeffding_interval(est.tau_n, est.n, None, s=0.25))

    def run(name):
        return solve(lp, backend=name).value

    return f"learning LP k=4 ({lp.num_constraints} rows x {lp.num_variables} vars)", run


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--json", default=None)
    args = parser.parse_args(argv)
    try:
        get_backend("cython")
    except ImportError:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    rows = []
    for make in (knn_workload, simplex_workload, large_lp_workload):
        label, run = make()
        t_c, out_c = _best_of(lambda: run("cython"), args.repeat)
        t_p, out_p = _best_of(lambda: run("python"), args.repeat)
        same = bool(np.array_equal(np.asarray(out_c), np.asarray(out_p)))
        rows.append({"workload": label, "cython_s": t_c, "python_s": t_p, "speedup": t_p / t_c,
                     "identical": same})
        print(f"{label:<48} cython {t_c:8.4f}s  python {t_p:8.4f}s  x{t_p / t_c:6.1f}  "
              f"{'identical' if same else 'DIFFERENT'}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
