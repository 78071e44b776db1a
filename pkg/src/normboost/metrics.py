"""Point and distributional evaluation, plus the uncertainty-bucket report."""
from dataclasses import dataclass

import numpy as np

from .dist_normal import NormalParams, nll_point, point_prediction
from .errors import InvalidInputError


@dataclass(frozen=True)
class EvalInput:
    params: NormalParams
    y_model_scale: np.ndarray
    # present when the model was trained on ln(y); strictly positive
    y_original_scale: np.ndarray = None

    def __post_init__(self):
        y = np.asarray(self.y_model_scale, dtype=np.float64)
        object.__setattr__(self, "y_model_scale", y)
        n = len(y)
        if self.params.mu.shape != (n,) or self.params.psi.shape != (n,):
            raise InvalidInputError("params and targets differ in length")
        if self.y_original_scale is not None:
            yo = np.asarray(self.y_original_scale, dtype=np.float64)
            if yo.shape != (n,):
                raise InvalidInputError("original-scale targets differ in length")
            object.__setattr__(self, "y_original_scale", yo)

    def __len__(self):
        return len(self.y_model_scale)

    def subset(self, idx):
        yo = None if self.y_original_scale is None else self.y_original_scale[idx]
        return EvalInput(
            NormalParams(self.params.mu[idx], self.params.psi[idx]),
            self.y_model_scale[idx],
            yo,
        )


def _relative_errors(inp):
    yo = inp.y_original_scale
    if yo is None:
        raise InvalidInputError(
            "original-scale targets are required for MAPE/accuracy"
        )
    if not np.all(yo > 0):
        i = int(np.flatnonzero(~(yo > 0))[0])
        raise InvalidInputError(f"original-scale target at row {i} is not positive")
    return np.abs(point_prediction(inp.params) - yo) / yo


def mape(inp):
    return float(np.mean(_relative_errors(inp)))


def accuracy_within(inp, tol=0.3):
    """Share of samples whose relative point error is at most ``tol``."""
    return float(np.mean(_relative_errors(inp) <= tol))


def nll_mean(inp):
    return float(np.mean(nll_point(inp.params, inp.y_model_scale)))


@dataclass(frozen=True)
class Bucket:
    sigma_min: float
    sigma_max: float
    count: int
    mape: float
    accuracy: float
    nll: float


@dataclass(frozen=True)
class CalibrationReport:
    buckets: list

    @property
    def bucket_count(self):
        return len(self.buckets)

    def column(self, name):
        return np.array([getattr(b, name) for b in self.buckets])

    def rows(self):
        return [
            {"bucket": k + 1, "sigma_min": b.sigma_min, "sigma_max": b.sigma_max,
             "count": b.count, "mape": b.mape, "accuracy": b.accuracy, "nll": b.nll}
            for k, b in enumerate(self.buckets)
        ]


def bucket_sizes(n, k):
    base, extra = divmod(n, k)
    return [base + 1] * extra + [base] * (k - extra)


def calibration_report(inp, k=10, tol=0.3):
    """Sort samples by predicted sigma (ties by index) and cut them into
    ``k`` contiguous equal-count buckets."""
    n = len(inp)
    if not 2 <= k <= n:
        raise InvalidInputError(f"bucket count must be in [2, {n}], got {k}")
    _relative_errors(inp)
    sigma = np.exp(inp.params.psi)
    order = np.argsort(sigma, kind="stable")
    buckets = []
    start = 0
    for size in bucket_sizes(n, k):
        idx = order[start:start + size]
        start += size
        sub = inp.subset(idx)
        buckets.append(Bucket(
            sigma_min=float(sigma[idx[0]]),
            sigma_max=float(sigma[idx[-1]]),
            count=int(size),
            mape=mape(sub),
            accuracy=accuracy_within(sub, tol),
            nll=nll_mean(sub),
        ))
    return CalibrationReport(buckets)
