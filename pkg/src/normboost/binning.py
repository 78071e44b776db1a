"""Quantile discretization of feature columns for histogram tree fitting."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import IngestionError, InvalidInputError

DEFAULT_MAX_BINS = 64


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    targets: np.ndarray
    feature_names: list = field(default=None)

    def __post_init__(self):
        X = np.ascontiguousarray(self.features, dtype=np.float64)
        y = np.ascontiguousarray(self.targets, dtype=np.float64)
        if X.ndim != 2:
            raise InvalidInputError("features must be a 2-d matrix")
        n, d = X.shape
        if n < 2 or d < 1:
            raise InvalidInputError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
        if y.shape != (n,):
            raise InvalidInputError(f"targets length {y.shape} does not match {n} rows")
        names = self.feature_names
        if names is None:
            names = [f"x{j + 1}" for j in range(d)]
        names = list(names)
        if len(names) != d:
            raise InvalidInputError(f"{len(names)} feature names for {d} columns")
        bad = np.argwhere(~np.isfinite(X))
        if len(bad):
            i, j = bad[0]
            raise IngestionError("non-finite feature value", row=int(i), column=names[j])
        bad = np.flatnonzero(~np.isfinite(y))
        if len(bad):
            raise IngestionError("non-finite target value", row=int(bad[0]))
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class BinnedDataset:
    bins: list  # per feature, uint8/uint16 array of length n
    thresholds: list  # per feature, strictly increasing float array
    feature_names: list

    @property
    def n_samples(self):
        return self.bins[0].shape[0]

    @property
    def n_features(self):
        return len(self.bins)

    def n_bins(self, j):
        return len(self.thresholds[j]) + 1


def feature_thresholds(values, max_bins):
    """Cut points for one column.

    With u distinct values <= max_bins every gap between neighbours gets a
    cut. Otherwise the cut for quantile k/max_bins goes into the gap between
    distinct values whose cumulative count is closest to k*n/max_bins (lower
    gap on ties). Cuts sit at midpoints of the two neighbouring values.
    """
    distinct, counts = np.unique(values, return_counts=True)
    u = len(distinct)
    if u <= 1:
        return np.empty(0)
    mids = distinct[:-1] + (distinct[1:] - distinct[:-1]) / 2.0
    # adjacent floats: the midpoint can round down onto the left value
    mids = np.where(mids > distinct[:-1], mids, distinct[1:])
    if u <= max_bins:
        return mids
    # cum[j]: samples with value <= distinct[j], for the gaps j = 0..u-2
    cum = np.cumsum(counts)[:-1]
    n = len(values)
    chosen = []
    for k in range(1, max_bins):
        target = k * n / max_bins
        j = int(np.searchsorted(cum, target))
        if j == len(cum):
            j -= 1
        elif j > 0 and target - cum[j - 1] <= cum[j] - target:
            j -= 1
        chosen.append(j)
    return mids[np.unique(chosen)]


def bin_value(thresholds, v):
    """Bin index of ``v``: number of thresholds <= v. Works on arrays."""
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("cannot bin a non-finite value")
    idx = np.searchsorted(thresholds, v, side="right")
    return int(idx) if idx.ndim == 0 else idx


def _bin_column(column, max_bins):
    thr = feature_thresholds(column, max_bins)
    dtype = np.uint8 if len(thr) < 256 else np.uint16
    return np.searchsorted(thr, column, side="right").astype(dtype), thr


def build_bins(data, max_bins=DEFAULT_MAX_BINS, threads=1):
    if not 2 <= max_bins <= 256:
        raise InvalidInputError(f"max_bins must be in [2, 256], got {max_bins}")
    columns = [data.features[:, j] for j in range(data.n_features)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda c: _bin_column(c, max_bins), columns))
    else:
        results = [_bin_column(c, max_bins) for c in columns]
    return BinnedDataset(
        bins=[b for b, _ in results],
        thresholds=[t for _, t in results],
        feature_names=list(data.feature_names),
    )
