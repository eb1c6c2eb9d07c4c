"""Command-line interface: ``lpc {train,predict,eval,bounds,curve,selfcheck}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical or LP error
(and failed self-checks). Errors are reported on stderr as a JSON object
``{"error": {"type", "message", "exit_code"}}``.
"""
import argparse
import csv
import json
import os
import sys
import time
import warnings

import numpy as np

from . import __version__
from .bounds import DeviationBound, estimate_M_heuristic, risk_sandwich
from .checks import run_selfcheck
from .classifiers import make_classifier
from .data import LabeledDataset, load_csv, stratified_kfold, synth_generate
from .errors import DataError, LpcError
from .experiments import CURVE_SIZES, TEST_SIZE, learning_curve
from .kernels import BACKEND
from .learning import fit_lpc, load_model, save_model
from .lp import Tolerances
from .prediction import empirical_error, rule_probabilities, sample_labels

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

SYNTHETIC_CLASSIFIERS = ("knn3", "knn5", "knn7", "knn9", "knn11", "knn13")
CSV_CLASSIFIERS = ("knn5", "qda", "tree", "knn3", "knn7", "knn9")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- config

def _parse_interval(text):
    if text in ("hoeffding", "point"):
        return text, None
    if text.startswith("manual:"):
        try:
            s = float(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad manual interval {text!r}; expected manual:<s>") from None
        if not np.isfinite(s) or s < 0:
            raise UsageError("manual s must be a nonnegative number")
        return "manual", s
    raise UsageError(f"--interval must be hoeffding, point or manual:<s>, got {text!r}")


def _resolve_classifiers(args, synthetic):
    if args.classifiers:
        names = [c.strip() for c in args.classifiers.split(",") if c.strip()]
        if args.k is not None and args.k != len(names):
            raise UsageError(f"--k {args.k} does not match {len(names)} classifiers")
    else:
        k = 3 if args.k is None else args.k
        defaults = SYNTHETIC_CLASSIFIERS if synthetic else CSV_CLASSIFIERS
        if not 1 <= k <= len(defaults):
            raise UsageError(f"--k must lie in [1, {len(defaults)}] without --classifiers")
        names = list(defaults[:k])
    for name in names:
        try:
            make_classifier(name)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return names


def _validate(args):
    if getattr(args, "delta", None) is not None and not 0 < args.delta < 1:
        raise UsageError("--delta must lie in (0, 1)")
    if getattr(args, "folds", None) is not None and args.folds < 2:
        raise UsageError("--folds must be >= 2")
    if getattr(args, "synthetic", None) is not None and args.synthetic < 2:
        raise UsageError("--synthetic needs at least 2 samples")
    if hasattr(args, "interval"):
        args.interval_mode, args.interval_s = _parse_interval(args.interval)


def _load_dataset(args, required=True):
    if args.data is not None and args.synthetic is not None:
        raise UsageError("use either --data or --synthetic, not both")
    if args.synthetic is not None:
        seed = args.seed if args.data_seed is None else args.data_seed
        return synth_generate(args.synthetic, seed), True
    if args.data is None:
        if required:
            raise UsageError("--data or --synthetic is required")
        return None, False
    try:
        return load_csv(args.data, _label_column(args.label_col), has_header=not args.no_header), False
    except OSError as exc:
        raise DataError(f"cannot read {args.data}: {exc.strerror or exc}") from None


def _label_column(text):
    try:
        return int(text)
    except ValueError:
        return text


def _metadata(args, start=None):
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",) and not k.startswith("_")}
    meta = {"command": args.command, "config": config, "version": __version__, "backend": BACKEND}
    if start is not None:
        meta["wall_time"] = round(time.perf_counter() - start, 6)
    return meta


def _emit_json(obj, path):
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_csv(header, rows, path, meta):
    """Write CSV to ``path`` (metadata in ``path.meta.json``) or to stdout (metadata on stderr)."""
    if path is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        sys.stderr.write(json.dumps({"metadata": meta}, sort_keys=True) + "\n")
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    _emit_json({"metadata": meta}, f"{path}.meta.json")


def _remap_labels(dataset, names):
    """Express ``dataset`` labels in the model's label indexing."""
    lookup = {str(n): i for i, n in enumerate(names)}
    try:
        mapped = [lookup[str(dataset.label_names[y])] for y in dataset.labels]
    except KeyError as exc:
        raise DataError(f"label {exc.args[0]} does not occur in the model") from None
    return LabeledDataset(dataset.features, np.array(mapped, dtype=np.int64), tuple(names))


def _tolerances(args):
    return Tolerances(optimality=0.5) if getattr(args, "corrupt_tolerance", False) else Tolerances()


def _fit(args, dataset, synthetic, seed=None):
    names = _resolve_classifiers(args, synthetic)
    mode = {"exact": "enumerate", "approx": "observed", "auto": "auto"}[args.mode]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = fit_lpc(dataset, names, interval_mode=args.interval_mode, delta=args.delta,
                         s=args.interval_s, folds=args.folds, seed=args.seed if seed is None else seed,
                         pattern_mode=mode)
    return report


# ---------------------------------------------------------------- commands

def cmd_train(args):
    start = time.perf_counter()
    dataset, synthetic = _load_dataset(args)
    report = _fit(args, dataset, synthetic)
    model = report.model
    sandwich = risk_sandwich(model)
    out = args.out or "model.json"
    save_model(model, out, metadata=_metadata(args))
    summary = {
        "R": model.R,
        "L": sandwich.lower_L,
        "n": len(dataset),
        "m": model.m,
        "r": model.table.r,
        "lp_rows": model.lp_rows,
        "lp_iterations": model.lp_iterations,
        "form": model.form,
        "pattern_mode": model.pattern_mode,
        "cv_folds": report.cv_folds,
        "folds_clamped": report.folds_clamped,
        "classifiers": [c.name for c in model.gf.classifiers],
        "model_path": out,
        "wall_time": round(report.wall_time, 6),
    }
    summary["metadata"] = _metadata(args, start)
    _emit_json(summary, args.report or f"{out}.report.json")
    _emit_json({k: summary[k] for k in ("R", "L", "n", "m", "r", "lp_rows", "wall_time")}, None)
    return EXIT_OK


def _label_text(names, idx):
    return [str(names[i]) for i in idx]


def cmd_predict(args):
    start = time.perf_counter()
    model = load_model(args.model)
    if args.synthetic is not None:
        dataset, _ = _load_dataset(args)
        X = dataset.features
    else:
        if args.data is None:
            raise UsageError("--data or --synthetic is required")
        if args.label_col.lower() == "none":
            X = _read_features(args.data, not args.no_header)
        else:
            X = _load_dataset(args)[0].features
    probs = rule_probabilities(model, X)
    sampled = sample_labels(probs, args.seed)
    argmax = np.argmax(probs, axis=1)
    names = model.label_names or tuple(range(model.num_labels))
    header = [f"p_{n}" for n in names] + ["sampled", "argmax"]
    rows = [[repr(float(v)) for v in p] + [s, a]
            for p, s, a in zip(probs, _label_text(names, sampled), _label_text(names, argmax))]
    _emit_csv(header, rows, args.out, _metadata(args, start))
    return EXIT_OK


def _read_features(path, has_header):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    if has_header:
        rows = rows[1:]
    try:
        X = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    if X.ndim != 2 or X.shape[0] == 0 or not np.all(np.isfinite(X)):
        raise DataError(f"{path}: expected a non-empty rectangular table of finite numbers")
    return X


def _error_block(model, dataset, seed):
    return {
        "exact_error": empirical_error(model, dataset, "exact"),
        "randomized_error": empirical_error(model, dataset, "randomized", seed),
        "argmax_error": empirical_error(model, dataset, "deterministic"),
    }


def cmd_eval(args):
    start = time.perf_counter()
    dataset, synthetic = _load_dataset(args)
    if args.model is not None:
        model = load_model(args.model)
        if model.label_names is not None:
            dataset = _remap_labels(dataset, model.label_names)
        errors = _error_block(model, dataset, args.seed)
        sandwich = risk_sandwich(model)
        out = dict(errors, R=model.R, L=sandwich.lower_L, n=len(dataset),
                   contained=bool(sandwich.lower_L <= errors["exact_error"] <= model.R))
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fold_ids = stratified_kfold(dataset, args.folds, args.seed)
        folds = []
        for f, held in enumerate(fold_ids):
            mask = np.ones(len(dataset), dtype=bool)
            mask[held] = False
            model = _fit(args, dataset.subset(np.flatnonzero(mask)), synthetic,
                         seed=[args.seed, f]).model
            row = _error_block(model, dataset.subset(held), args.seed)
            sandwich = risk_sandwich(model)
            row.update(fold=f, n_test=int(held.size), R=model.R, L=sandwich.lower_L)
            folds.append(row)
        out = {"folds": folds}
        for key in ("exact_error", "randomized_error", "argmax_error", "R", "L"):
            out[f"mean_{key}"] = float(np.mean([row[key] for row in folds]))
    out["metadata"] = _metadata(args, start)
    _emit_json(out, args.out)
    return EXIT_OK


def cmd_bounds(args):
    start = time.perf_counter()
    model = load_model(args.model)
    sandwich = risk_sandwich(model)
    out = {"R": model.R, "L": sandwich.lower_L, "kappa_h": sandwich.kappa_h,
           "kappa_neg_h": sandwich.kappa_neg_h}
    if args.estimate_M is not None:
        M = estimate_M_heuristic(model.table, args.estimate_M, args.seed, anchors=[model.interval.tau_n])
        delta = model.interval.delta if model.interval.delta is not None else args.delta
        c_norm2 = float(np.linalg.norm(model.gf.range_c)) if model.gf is not None else float(np.sqrt(model.m))
        dev = DeviationBound(model.m, model.interval.n, delta, c_norm2, M)
        out.update(deviation_term=dev.term, M_estimate=M, deviation_delta=delta, optimistic=True,
                   note="M is a Monte-Carlo lower bound, so the deviation term is optimistic")
    out["metadata"] = _metadata(args, start)
    _emit_json(out, args.out)
    return EXIT_OK


def cmd_curve(args):
    start = time.perf_counter()
    if args.data is not None:
        raise UsageError("curve runs on the synthetic task only")
    if args.interval_mode != "manual":
        raise UsageError("curve needs --interval manual:<s>")
    sizes = CURVE_SIZES if args.sizes is None else tuple(int(v) for v in args.sizes.split(","))
    if min(sizes) < 2 * 3:
        raise UsageError("curve sizes must be at least 6")
    names = _resolve_classifiers(args, True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rows = learning_curve(args.seed, sizes, s=args.interval_s, classifiers=names,
                              folds=args.folds, test_size=args.test_size)
    header = ["n", "R", "L", "test_error", "bayes_risk"]
    body = [[r.n, repr(r.R), repr(r.L), repr(r.test_error), repr(r.bayes_risk)] for r in rows]
    meta = _metadata(args, start)
    meta["contained"] = [r.contained for r in rows]
    meta["argmax_error"] = [r.argmax_error for r in rows]
    _emit_csv(header, body, args.out, meta)
    return EXIT_OK


def cmd_selfcheck(args):
    start = time.perf_counter()
    suites = run_selfcheck(args.seed, tol=_tolerances(args), coverage=not args.no_coverage,
                           quick=args.quick)
    passed = all(s.passed for s in suites)
    out = {"passed": passed, "suites": [s.summary() for s in suites],
           "failed_invariants": [s.name for s in suites if not s.passed]}
    out["metadata"] = _metadata(args, start)
    _emit_json(out, args.out)
    return EXIT_OK if passed else EXIT_NUMERICAL


# ---------------------------------------------------------------- parser

def _common(p, data=True, fit=True):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path (stdout when omitted, except train)")
    if data:
        p.add_argument("--data", default=None, help="CSV file with a header row")
        p.add_argument("--synthetic", type=int, default=None, metavar="N",
                       help="draw N samples from the synthetic Gaussian-mixture task")
        p.add_argument("--data-seed", type=int, default=None,
                       help="seed for --synthetic data (defaults to --seed)")
        p.add_argument("--label-col", default="-1", help="label column name or index (default: last)")
        p.add_argument("--no-header", action="store_true")
    if fit:
        p.add_argument("--k", type=int, default=None, help="number of base classifiers (default 3)")
        p.add_argument("--classifiers", default=None,
                       help="comma list, e.g. knn3,knn5,knn7 or knn5,qda,tree")
        p.add_argument("--delta", type=float, default=0.05)
        p.add_argument("--interval", default="hoeffding", help="hoeffding | point | manual:<s>")
        p.add_argument("--folds", type=int, default=10)
        p.add_argument("--mode", choices=("exact", "approx", "auto"), default="auto",
                       help="exact enumerates every prediction tuple, approx uses observed ones")


def build_parser():
    parser = _Parser(prog="lpc", description="Linear probabilistic classifiers.")
    parser.add_argument("--version", action="version", version=f"lpc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="fit a model and write it as JSON")
    _common(p)
    p.add_argument("--report", default=None, help="report path (default <out>.report.json)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="per-label probabilities and sampled labels as CSV")
    _common(p, fit=False)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="errors and risk bounds on test data, or cross-validated")
    _common(p)
    p.add_argument("--model", default=None, help="evaluate this model; omit for cross-validation")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bounds", help="upper and lower risk bounds of a model")
    _common(p, data=False, fit=False)
    p.add_argument("--model", required=True)
    p.add_argument("--delta", type=float, default=0.05,
                   help="confidence for the deviation term when the model has none")
    p.add_argument("--estimate-M", type=int, default=None, metavar="SAMPLES",
                   help="add an optimistic deviation term from a sampled M estimate")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("curve", help="learning curve on the synthetic task as CSV")
    _common(p)
    p.set_defaults(interval="manual:0.25")
    p.add_argument("--sizes", default=None, help="comma list of training sizes")
    p.add_argument("--test-size", type=int, default=TEST_SIZE)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("selfcheck", help="run the oracle property suites")
    _common(p, data=False, fit=False)
    p.add_argument("--quick", action="store_true", help="fewer instances")
    p.add_argument("--no-coverage", action="store_true", help="skip the Monte-Carlo coverage suite")
    p.add_argument("--corrupt-tolerance", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selfcheck)
    return parser


def _fail(exc, code):
    err = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
        return args.func(args)
    except UsageError as exc:
        return _fail(exc, EXIT_USAGE)
    except DataError as exc:
        return _fail(exc, EXIT_DATA)
    except (LpcError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail(exc, EXIT_NUMERICAL)
    except BrokenPipeError:
        # reader closed early (e.g. piped into head); not an error of ours
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except OSError as exc:
        return _fail(exc, EXIT_DATA)
    except ValueError as exc:
        return _fail(exc, EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
