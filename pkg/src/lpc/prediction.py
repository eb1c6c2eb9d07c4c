"""The randomized classification rule of a trained model and its losses.

For a feature ``x`` with pattern matrix ``M`` the rule assigns label ``y``
probability ``(M lam + gamma)^+_y + (1 - ||(M lam + gamma)^+||_1) / L``.
"""
import numpy as np

from .numeric import positive_part


def _distribution_from_scores(clipped):
    L = clipped.shape[-1]
    remainder = 1.0 - clipped.sum(axis=-1, keepdims=True)
    return clipped + remainder / L


def rule_table(model):
    """Rule probabilities for every pattern of the model's table, shape ``r x L``."""
    return _distribution_from_scores(model.clipped_scores())


def rule_probabilities(model, X):
    """Label distribution for each row of ``X`` (or for a single feature vector)."""
    if model.gf is None:
        raise ValueError("model has no generating function; use rule_table for pattern-level rules")
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    cols = model.gf.pattern_columns(model.gf.predict_patterns(np.atleast_2d(X)))
    probs = _distribution_from_scores(model.clipped_scores(cols))
    return probs[0] if single else probs


def sample_labels(probs, seed):
    """Inverse-CDF draw for each row of ``probs``; draw ``i`` uses the ``i``-th uniform."""
    probs = np.atleast_2d(probs)
    u = np.random.default_rng(seed).random(probs.shape[0])
    cdf = np.cumsum(probs, axis=1)
    labels = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(labels, probs.shape[1] - 1)


def predict(model, X, seed=0):
    """Randomized labels for the rows of ``X``, reproducible for a fixed ``seed``."""
    X = np.asarray(X, dtype=float)
    labels = sample_labels(rule_probabilities(model, np.atleast_2d(X)), seed)
    return int(labels[0]) if X.ndim == 1 else labels


def predict_deterministic(model, X):
    """Most probable label; ties go to the smallest label."""
    X = np.asarray(X, dtype=float)
    labels = np.argmax(np.atleast_2d(rule_probabilities(model, X)), axis=1)
    return int(labels[0]) if X.ndim == 1 else labels


def expected_loss(h, p):
    """``1 - sum p(x, y) h(x, y)`` for aligned arrays over (pattern, label)."""
    h = np.asarray(h, dtype=float)
    p = np.asarray(p, dtype=float)
    if h.shape != p.shape:
        raise ValueError(f"rule shape {h.shape} does not match distribution shape {p.shape}")
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("p must be a probability distribution")
    return float(1.0 - np.sum(p * h))


def empirical_error(model, dataset, mode="exact", seed=0):
    """Error rate of the model on ``dataset``.

    ``exact`` averages ``1 - h(x_i, y_i)`` (the expected error of the
    randomized rule, no sampling noise); ``randomized`` draws one label per
    sample; ``deterministic`` uses the argmax label.
    """
    probs = rule_probabilities(model, dataset.features)
    y = dataset.labels
    if mode == "exact":
        return float(np.mean(1.0 - probs[np.arange(y.size), y]))
    if mode == "randomized":
        return float(np.mean(sample_labels(probs, seed) != y))
    if mode == "deterministic":
        return float(np.mean(np.argmax(probs, axis=1) != y))
    raise ValueError(f"unknown mode {mode!r}")


def empirical_pattern_distribution(model, dataset):
    """Empirical distribution of ``dataset`` over the model's (pattern, label) grid.

    Returns an ``r x L`` array, or ``None`` when some sample falls on a
    pattern missing from the table.
    """
    gf, table = model.gf, model.table
    codes = gf.pattern_codes(gf.predict_patterns(dataset.features))
    table_codes = gf.pattern_codes(table.patterns)
    lookup = {int(c): i for i, c in enumerate(table_codes)}
    p = np.zeros((table.r, table.num_labels))
    for code, y in zip(codes.tolist(), dataset.labels.tolist()):
        row = lookup.get(code)
        if row is None:
            return None
        p[row, y] += 1
    return p / len(dataset)


def clipped_score_floor(model, X):
    """``(M lam + gamma)^+`` per row of ``X``: the lower envelope every valid rule must dominate."""
    cols = model.gf.pattern_columns(model.gf.predict_patterns(np.atleast_2d(X)))
    return positive_part(model.lam[cols] + model.gamma)
