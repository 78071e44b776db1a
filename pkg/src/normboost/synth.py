"""Synthetic regression sets where the true noise scale is known.

hetero:    y = sin(2 pi x1) + eps,  eps ~ N(0, (0.1 + 0.9 x2)^2)
homo:      y = sin(2 pi x1) + eps,  eps ~ N(0, noise^2)
lognormal: y = exp(z), z ~ N(8 + 2 x1, (0.1 + 0.9 x2)^2)

Features are i.i.d. U(0, 1); x1 and x2 are the first two columns.
``sigma`` is the true standard deviation of y (of ln y for lognormal).
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

FAMILIES = ("hetero", "homo", "lognormal")


@dataclass(frozen=True)
class SynthData:
    X: np.ndarray
    y: np.ndarray
    sigma: np.ndarray
    feature_names: list


def true_sigma(X, family="hetero", noise=0.5):
    if family == "homo":
        return np.full(X.shape[0], float(noise))
    return 0.1 + 0.9 * X[:, 1]


def true_mean(X, family="hetero"):
    if family == "lognormal":
        return 8.0 + 2.0 * X[:, 0]
    return np.sin(2.0 * np.pi * X[:, 0])


def generate(n, d=5, family="hetero", seed=42, noise=0.5):
    if n < 10:
        raise InvalidInputError(f"n must be >= 10, got {n}")
    if d < 2:
        raise InvalidInputError(f"d must be >= 2, got {d}")
    if family not in FAMILIES:
        raise InvalidInputError(f"unknown family {family!r}; choose from {FAMILIES}")
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 1.0, size=(n, d))
    eps = rng.standard_normal(n)
    sigma = true_sigma(X, family, noise)
    z = true_mean(X, family) + sigma * eps
    y = np.exp(z) if family == "lognormal" else z
    return SynthData(X, y, sigma, [f"x{j + 1}" for j in range(d)])
