"""Depth-limited regression trees fit on binned features.

Splits are chosen greedily by sum-of-squared-error reduction computed from
per-bin (count, sum) histograms. Ties go to the lowest feature index, then
the lowest bin, so fitting is deterministic.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

LEAF = -1


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 6
    min_samples_leaf: int = 20
    min_gain: float = 0.0

    def __post_init__(self):
        if not 1 <= self.max_depth <= 32:
            raise InvalidInputError(f"max_depth must be in [1, 32], got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise InvalidInputError("min_samples_leaf must be >= 1")
        if not self.min_gain >= 0:
            raise InvalidInputError("min_gain must be >= 0")


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Flat node arrays in preorder, root at index 0.

    Leaves have ``feature == -1``; their prediction is ``value``. Internal
    nodes send a row left iff ``row[feature] < threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray
    cover: np.ndarray

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def is_leaf(self):
        return self.feature == LEAF

    def depth(self):
        def rec(i):
            if self.feature[i] == LEAF:
                return 0
            return 1 + max(rec(self.left[i]), rec(self.right[i]))

        return rec(0)

    def structure(self):
        """Nested tuples, handy for equality checks in tests."""

        def rec(i):
            if self.feature[i] == LEAF:
                return ("leaf", float(self.value[i]), int(self.cover[i]))
            return (
                int(self.feature[i]),
                float(self.threshold[i]),
                rec(self.left[i]),
                rec(self.right[i]),
            )

        return rec(0)

    def to_nodes(self):
        nodes = []
        for i in range(self.n_nodes):
            if self.feature[i] == LEAF:
                nodes.append({"leaf_value": float(self.value[i]), "cover": int(self.cover[i])})
            else:
                nodes.append(
                    {
                        "feature": int(self.feature[i]),
                        "threshold": float(self.threshold[i]),
                        "left": int(self.left[i]),
                        "right": int(self.right[i]),
                        "gain": float(self.gain[i]),
                        "cover": int(self.cover[i]),
                    }
                )
        return nodes

    @classmethod
    def from_nodes(cls, nodes):
        builder = _Builder()
        for node in nodes:
            if "leaf_value" in node:
                builder.add(LEAF, 0.0, LEAF, LEAF, node["leaf_value"], 0.0, node["cover"])
            else:
                builder.add(
                    node["feature"], node["threshold"], node["left"], node["right"],
                    0.0, node["gain"], node["cover"],
                )
        return builder.build()

    def predict(self, X):
        return predict_tree(self, X)


class _Builder:
    def __init__(self):
        self.rows = []

    def add(self, feature, threshold, left, right, value, gain, cover):
        self.rows.append([feature, threshold, left, right, value, gain, cover])
        return len(self.rows) - 1

    def build(self):
        cols = list(zip(*self.rows))
        return RegressionTree(
            feature=np.array(cols[0], dtype=np.int32),
            threshold=np.array(cols[1], dtype=np.float64),
            left=np.array(cols[2], dtype=np.int32),
            right=np.array(cols[3], dtype=np.int32),
            value=np.array(cols[4], dtype=np.float64),
            gain=np.array(cols[5], dtype=np.float64),
            cover=np.array(cols[6], dtype=np.int64),
        )


def _feature_best_split(bins, n_bins, idx, t, total, min_leaf):
    """Best (gain, bin) for one feature at one node; bin k means
    'left = bins <= k'. Returns (-inf, -1) when nothing is admissible."""
    if n_bins < 2:
        return -np.inf, -1
    b = bins[idx]
    cnt = np.bincount(b, minlength=n_bins)[:-1]
    sums = np.bincount(b, weights=t, minlength=n_bins)[:-1]
    n = len(idx)
    n_left = np.cumsum(cnt)
    s_left = np.cumsum(sums)
    n_right = n - n_left
    s_right = total - s_left
    ok = (n_left >= min_leaf) & (n_right >= min_leaf)
    if not ok.any():
        return -np.inf, -1
    gain = np.full(len(ok), -np.inf)
    nl, nr = n_left[ok], n_right[ok]
    sl, sr = s_left[ok], s_right[ok]
    gain[ok] = sl * sl / nl + sr * sr / nr - total * total / n
    k = int(np.argmax(gain))
    return float(gain[k]), k


def fit_tree(binned, target, cfg=TreeConfig(), executor=None):
    """Greedy depth-wise regression tree on ``target``.

    ``executor`` (a concurrent.futures.Executor) spreads per-feature histogram
    scoring over workers; the reduction stays in feature order.
    """
    target = np.asarray(target, dtype=np.float64)
    n = binned.n_samples
    if target.shape != (n,):
        raise InvalidInputError(f"target has shape {target.shape}, expected ({n},)")
    if not np.all(np.isfinite(target)):
        raise InvalidInputError("target must be finite")

    builder = _Builder()
    d = binned.n_features
    n_bins = [binned.n_bins(j) for j in range(d)]

    def best_split(idx):
        t = target[idx]
        total = t.sum()

        def score(j):
            return _feature_best_split(
                binned.bins[j], n_bins[j], idx, t, total, cfg.min_samples_leaf
            )

        if executor is not None and d > 1:
            scored = list(executor.map(score, range(d)))
        else:
            scored = [score(j) for j in range(d)]
        best = (-np.inf, -1, -1)
        for j, (g, k) in enumerate(scored):
            if g > best[0]:
                best = (g, j, k)
        return best

    def grow(idx, depth):
        node = builder.add(LEAF, 0.0, LEAF, LEAF, 0.0, 0.0, len(idx))
        if depth < cfg.max_depth and len(idx) >= 2 * cfg.min_samples_leaf:
            gain, j, k = best_split(idx)
            if j >= 0 and gain > cfg.min_gain:
                go_left = binned.bins[j][idx] <= k
                row = builder.rows[node]
                row[0], row[1], row[5] = j, float(binned.thresholds[j][k]), gain
                row[2] = grow(idx[go_left], depth + 1)
                row[3] = grow(idx[~go_left], depth + 1)
                return node
        builder.rows[node][4] = float(np.mean(target[idx]))
        return node

    grow(np.arange(n), 0)
    return builder.build()


def predict_tree(tree, X):
    """Leaf values for each row of ``X`` (a single 1-d row also works)."""
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("rows must be finite")
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    while True:
        feat = tree.feature[node]
        internal = feat != LEAF
        if not internal.any():
            break
        fi = np.where(internal, feat, 0)
        go_left = X[rows, fi] < tree.threshold[node]
        nxt = np.where(go_left, tree.left[node], tree.right[node])
        node = np.where(internal, nxt, node)
    out = tree.value[node]
    return float(out[0]) if single else out


@dataclass(frozen=True)
class TreeImportance:
    split_count: np.ndarray
    total_gain: np.ndarray
    # samples passing through splits on each feature
    cover: np.ndarray


def tree_importance(tree, n_features):
    internal = ~tree.is_leaf
    f = tree.feature[internal]
    return TreeImportance(
        split_count=np.bincount(f, minlength=n_features).astype(np.int64),
        total_gain=np.bincount(f, weights=tree.gain[internal], minlength=n_features),
        cover=np.bincount(f, weights=tree.cover[internal], minlength=n_features).astype(np.int64),
    )
