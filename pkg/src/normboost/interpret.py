"""Feature importance over the mean-tree and variance-tree sets."""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .tree import tree_importance

SETS = ("mean", "variance")
KINDS = ("weight", "gain")


@dataclass(frozen=True)
class ImportanceTable:
    param_set: str
    feature_names: list
    weight: np.ndarray  # split count
    gain: np.ndarray  # average gain per split, 0 when unused
    total_gain: np.ndarray  # convenience column, sum of gains

    def values(self, kind):
        if kind not in KINDS:
            raise InvalidInputError(f"kind must be one of {KINDS}, got {kind!r}")
        return self.weight.astype(np.float64) if kind == "weight" else self.gain

    def ranking(self, kind="gain"):
        v = self.values(kind)
        # stable sort on -v keeps lower feature index first on ties
        return [int(j) for j in np.argsort(-v, kind="stable")]


def feature_importance(model, param_set="variance"):
    if param_set not in SETS:
        raise InvalidInputError(f"set must be one of {SETS}, got {param_set!r}")
    d = model.n_features
    count = np.zeros(d, dtype=np.int64)
    total = np.zeros(d)
    for rec in model.iterations:
        imp = tree_importance(rec.tree_mu if param_set == "mean" else rec.tree_psi, d)
        count += imp.split_count
        total += imp.total_gain
    avg = np.divide(total, count, out=np.zeros(d), where=count > 0)
    return ImportanceTable(param_set, list(model.feature_names), count, avg, total)


def _unit_sum(v):
    s = v.sum()
    return v / s if s > 0 else np.zeros_like(v)


def combine_scores(mean_values, variance_values, alpha=0.5):
    """alpha * normalized mean importance + (1 - alpha) * normalized variance
    importance; returns (order, scores)."""
    if not 0 <= alpha <= 1:
        raise InvalidInputError(f"alpha must be in [0, 1], got {alpha}")
    scores = (alpha * _unit_sum(np.asarray(mean_values, dtype=np.float64))
              + (1 - alpha) * _unit_sum(np.asarray(variance_values, dtype=np.float64)))
    order = [int(j) for j in np.argsort(-scores, kind="stable")]
    return order, scores


def combined_ranking(model, alpha=0.5, kind="gain"):
    """Features ordered by combined score, as (name, index, score) tuples."""
    mean_t = feature_importance(model, "mean")
    var_t = feature_importance(model, "variance")
    order, scores = combine_scores(mean_t.values(kind), var_t.values(kind), alpha)
    return [(model.feature_names[j], j, float(scores[j])) for j in order]
