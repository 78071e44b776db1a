"""Natural-gradient boosting of a per-sample Normal(mu, exp(psi)).

Each iteration fits one tree to the mu component and one to the psi
component of the natural gradient, picks a shared scaling rho by a halving
line search on the total NLL, and steps both parameters by eta * rho.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .binning import DEFAULT_MAX_BINS, Dataset, build_bins
from .dist_normal import NormalParams, clamp_psi, natural_gradient, nll_total
from .errors import InvalidInputError, ModelFormatError
from .tree import RegressionTree, TreeConfig, fit_tree, predict_tree

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
STD_FLOOR = 1e-3


@dataclass(frozen=True)
class BoostConfig:
    # eta 0.3, 300 rounds, depth 6
    iterations: int = 300
    learning_rate: float = 0.3
    tree: TreeConfig = field(default_factory=TreeConfig)
    max_bins: int = DEFAULT_MAX_BINS
    line_search_halvings: int = 20
    threads: int = 1
    # ablations for baselines: skip the psi trees and/or fix rho
    fit_psi: bool = True
    fixed_rho: float = None

    def __post_init__(self):
        if self.iterations < 1:
            raise InvalidInputError(f"iterations must be >= 1, got {self.iterations}")
        if not 0 < self.learning_rate <= 1:
            raise InvalidInputError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if self.line_search_halvings < 1:
            raise InvalidInputError("line_search_halvings must be >= 1")
        if self.threads < 1:
            raise InvalidInputError("threads must be >= 1")


@dataclass(frozen=True, eq=False)
class IterationRecord:
    rho: float
    tree_mu: RegressionTree
    tree_psi: RegressionTree


@dataclass(eq=False)
class BoostModel:
    init_mu: float
    init_psi: float
    eta: float
    iterations: list
    feature_names: list
    # "log" when the model was trained on ln(target)
    target_transform: str = "none"
    format_version: int = FORMAT_VERSION

    @property
    def n_features(self):
        return len(self.feature_names)

    def predict(self, X):
        return predict(self, X)


@dataclass
class TrainResult:
    model: BoostModel
    nll_trace: list  # mean training NLL after each iteration
    mu: np.ndarray  # final training-loop state (psi unclamped)
    psi: np.ndarray
    skipped_all: bool = False


def line_search(mu, psi, f_mu, f_psi, y, halvings=20):
    """Largest rho in {1, 1/2, ..., 2**-halvings} whose total NLL at
    (mu - rho f_mu, psi - rho f_psi) is strictly below the NLL at rho = 0.
    Returns 0.0 when no grid point improves."""
    base = nll_total(mu, psi, y)
    rho = 1.0
    for _ in range(halvings + 1):
        if nll_total(mu - rho * f_mu, psi - rho * f_psi, y) < base:
            return rho
        rho *= 0.5
    return 0.0


def shrink_step(mu, psi, f_mu, f_psi, y, rho, eta, halvings=20):
    """Keep halving ``rho`` until the shrunken step eta * rho also lowers the
    NLL. The line search checks the full step only, and the NLL is not convex
    in (mu, psi), so a shorter step can be worse."""
    base = nll_total(mu, psi, y)
    floor = 2.0 ** -halvings
    while rho > 0:
        new_mu, new_psi = _step(mu, psi, rho, eta, f_mu, f_psi)
        if nll_total(new_mu, new_psi, y) < base:
            return rho
        rho = rho * 0.5 if rho > floor else 0.0
    return 0.0


def _step(mu, psi, rho, eta, f_mu, f_psi):
    # same expression order in training and prediction keeps them bit-identical
    return mu - eta * (rho * f_mu), psi - eta * (rho * f_psi)


def _zero_tree(n):
    return RegressionTree.from_nodes([{"leaf_value": 0.0, "cover": n}])


def train(data, cfg=BoostConfig(), callback=None):
    """Fit a BoostModel. ``callback(m, info)`` is called after each
    iteration with a dict of the gradients, tree outputs and rho."""
    if not isinstance(data, Dataset):
        raise InvalidInputError("train expects a Dataset")
    n = data.n_samples
    need = max(2 * cfg.tree.min_samples_leaf, 10)
    if n < need:
        raise InvalidInputError(f"need at least {need} samples, got {n}")
    X, y = data.features, data.targets

    init_mu = float(np.mean(y))
    init_psi = float(np.log(max(float(np.std(y, ddof=1)), STD_FLOOR)))
    binned = build_bins(data, cfg.max_bins, threads=cfg.threads)

    mu = np.full(n, init_mu)
    psi = np.full(n, init_psi)
    eta = cfg.learning_rate
    records = []
    trace = []
    pool = ThreadPoolExecutor(2) if cfg.threads > 1 else None
    try:
        for m in range(1, cfg.iterations + 1):
            g = natural_gradient(NormalParams(mu, clamp_psi(psi)), y)
            if pool is not None and cfg.fit_psi:
                fut = pool.submit(fit_tree, binned, g.d_psi, cfg.tree)
                tree_mu = fit_tree(binned, g.d_mu, cfg.tree)
                tree_psi = fut.result()
            else:
                tree_mu = fit_tree(binned, g.d_mu, cfg.tree)
                tree_psi = fit_tree(binned, g.d_psi, cfg.tree) if cfg.fit_psi else _zero_tree(n)
            f_mu = predict_tree(tree_mu, X)
            f_psi = predict_tree(tree_psi, X)

            if cfg.fixed_rho is not None:
                rho = float(cfg.fixed_rho)
            else:
                rho = line_search(mu, psi, f_mu, f_psi, y, cfg.line_search_halvings)
                rho = shrink_step(mu, psi, f_mu, f_psi, y, rho, eta, cfg.line_search_halvings)

            mu, psi = _step(mu, psi, rho, eta, f_mu, f_psi)
            records.append(IterationRecord(rho, tree_mu, tree_psi))
            trace.append(nll_total(mu, psi, y) / n)
            if callback is not None:
                callback(m, {"grad_mu": g.d_mu, "grad_psi": g.d_psi, "f_mu": f_mu,
                             "f_psi": f_psi, "rho": rho, "mu": mu, "psi": psi})
    finally:
        if pool is not None:
            pool.shutdown()

    skipped_all = all(r.rho == 0 for r in records)
    if skipped_all:
        log.warning("every boosting iteration was skipped: no step reduced the NLL")
    model = BoostModel(init_mu, init_psi, eta, records, list(data.feature_names))
    return TrainResult(model, trace, mu, psi, skipped_all)


def predict(model, X):
    """Per-row NormalParams; psi is clamped to [PSI_MIN, PSI_MAX]."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise InvalidInputError(
            f"expected a matrix with {model.n_features} columns, got shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("features must be finite")
    n = X.shape[0]
    mu = np.full(n, model.init_mu)
    psi = np.full(n, model.init_psi)
    for rec in model.iterations:
        mu, psi = _step(mu, psi, rec.rho, model.eta,
                        predict_tree(rec.tree_mu, X), predict_tree(rec.tree_psi, X))
    return NormalParams(mu, clamp_psi(psi))


def model_to_dict(model):
    return {
        "format_version": model.format_version,
        "eta": model.eta,
        "init_mu": model.init_mu,
        "init_psi": model.init_psi,
        "feature_names": list(model.feature_names),
        "target_transform": model.target_transform,
        "iterations": [
            {"rho": r.rho, "tree_mu": r.tree_mu.to_nodes(), "tree_psi": r.tree_psi.to_nodes()}
            for r in model.iterations
        ],
    }


def save_model(model):
    """JSON text; floats use repr so reload is bit-exact."""
    return json.dumps(model_to_dict(model), indent=1, allow_nan=False) + "\n"


def _get(doc, key, path, kind):
    if not isinstance(doc, dict) or key not in doc:
        raise ModelFormatError(f"{path}.{key}" if path else key, "missing field")
    value = doc[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ModelFormatError(f"{path}.{key}" if path else key, f"expected {kind.__name__}")
    return value


def _load_tree(nodes, path, n_features):
    if not isinstance(nodes, list) or not nodes:
        raise ModelFormatError(path, "expected a non-empty node list")
    clean = []
    for i, node in enumerate(nodes):
        p = f"{path}[{i}]"
        if isinstance(node, dict) and "leaf_value" in node:
            clean.append({"leaf_value": _get(node, "leaf_value", p, float),
                          "cover": _get(node, "cover", p, int)})
            continue
        entry = {k: _get(node, k, p, int) for k in ("feature", "left", "right", "cover")}
        entry["threshold"] = _get(node, "threshold", p, float)
        entry["gain"] = _get(node, "gain", p, float)
        if not 0 <= entry["feature"] < n_features:
            raise ModelFormatError(f"{p}.feature", "feature index out of range")
        for k in ("left", "right"):
            if not i < entry[k] < len(nodes):
                raise ModelFormatError(f"{p}.{k}", "child index out of range")
        clean.append(entry)
    return RegressionTree.from_nodes(clean)


def load_model(document):
    """Inverse of save_model. Raises ModelFormatError naming the bad field."""
    try:
        doc = json.loads(document) if isinstance(document, (str, bytes)) else document
    except json.JSONDecodeError as e:
        raise ModelFormatError("<document>", f"malformed JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ModelFormatError("<document>", "expected a JSON object")
    version = _get(doc, "format_version", "", int)
    if version != FORMAT_VERSION:
        raise ModelFormatError("format_version", f"unsupported version {version}")
    names = _get(doc, "feature_names", "", list)
    if not all(isinstance(s, str) for s in names):
        raise ModelFormatError("feature_names", "expected strings")
    records = []
    for i, it in enumerate(_get(doc, "iterations", "", list)):
        p = f"iterations[{i}]"
        rho = _get(it, "rho", p, float)
        if rho < 0:
            raise ModelFormatError(f"{p}.rho", "must be non-negative")
        records.append(IterationRecord(
            rho,
            _load_tree(_get(it, "tree_mu", p, list), f"{p}.tree_mu", len(names)),
            _load_tree(_get(it, "tree_psi", p, list), f"{p}.tree_psi", len(names)),
        ))
    transform = doc.get("target_transform", "none")
    if transform not in ("none", "log"):
        raise ModelFormatError("target_transform", f"unknown transform {transform!r}")
    return BoostModel(
        init_mu=_get(doc, "init_mu", "", float),
        init_psi=_get(doc, "init_psi", "", float),
        eta=_get(doc, "eta", "", float),
        iterations=records,
        feature_names=names,
        target_transform=transform,
        format_version=version,
    )
