"""Normal distribution in (mu, psi = log sigma) coordinates.

Everything here is vectorized over numpy arrays; scalars work too and come
back as 0-d results (use ``float()`` on them).
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

PSI_MIN = -15.0
PSI_MAX = 15.0
SIGMA_FLOOR = 1e-6
HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)

# exp() overflows float64 just above 709.78
_EXP_LIMIT = 700.0


@dataclass(frozen=True)
class NormalParams:
    mu: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=np.float64))
        object.__setattr__(self, "psi", np.asarray(self.psi, dtype=np.float64))

    @property
    def sigma(self):
        return np.exp(self.psi)

    def clamped(self):
        return NormalParams(self.mu, clamp_psi(self.psi))

    def __len__(self):
        return self.mu.shape[0]


@dataclass(frozen=True)
class GradientPair:
    d_mu: np.ndarray
    d_psi: np.ndarray


def clamp_psi(psi):
    return np.clip(psi, PSI_MIN, PSI_MAX)


def _check_finite(name, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise InvalidInputError(f"{name} must be finite")


def nll_point(p, y):
    """Per-sample negative log density of ``y`` under N(mu, exp(psi)^2).

    psi is clamped to [PSI_MIN, PSI_MAX] and sigma floored at SIGMA_FLOOR
    before evaluation.
    """
    y = np.asarray(y, dtype=np.float64)
    _check_finite("y", y)
    log_sigma = np.maximum(clamp_psi(p.psi), np.log(SIGMA_FLOOR))
    z = (y - p.mu) * np.exp(-log_sigma)
    return HALF_LOG_2PI + log_sigma + 0.5 * z * z


def nll_total(mu, psi, y):
    return float(np.sum(nll_point(NormalParams(mu, psi), y)))


def ordinary_gradient(p, y):
    """Gradient of the per-sample NLL with respect to (mu, psi)."""
    resid = p.mu - np.asarray(y, dtype=np.float64)
    inv_var = np.exp(-2.0 * p.psi)
    return GradientPair(resid * inv_var, 1.0 - resid * resid * inv_var)


def fisher(p):
    """Fisher information, shape ``psi.shape + (2, 2)``, order (mu, psi)."""
    psi = np.asarray(p.psi, dtype=np.float64)
    m = np.zeros(psi.shape + (2, 2))
    m[..., 0, 0] = np.exp(-2.0 * psi)
    m[..., 1, 1] = 2.0
    return m


def natural_gradient(p, y):
    """Closed form of fisher^-1 @ ordinary_gradient.

    The mu component is the plain residual mu - y, the same quantity squared
    error boosting fits.
    """
    resid = p.mu - np.asarray(y, dtype=np.float64)
    return GradientPair(resid, 0.5 * (1.0 - resid * resid * np.exp(-2.0 * p.psi)))


def natural_gradient_solve(p, y):
    """Reference path: solve the 2x2 Fisher system explicitly per sample."""
    g = ordinary_gradient(p, y)
    f = fisher(p)
    rhs = np.stack(np.broadcast_arrays(g.d_mu, g.d_psi), axis=-1)
    f = np.broadcast_to(f, rhs.shape + (2,))
    det = f[..., 0, 0] * f[..., 1, 1] - f[..., 0, 1] * f[..., 1, 0]
    if np.any(det == 0) or not np.all(np.isfinite(det)):
        raise ArithmeticError("singular Fisher information")
    sol = np.linalg.solve(f, rhs[..., None])[..., 0]
    return GradientPair(sol[..., 0], sol[..., 1])


def relative_std(p):
    """Relative standard deviation sqrt(exp(sigma^2) - 1) of the log-normal
    variable exp(Y), Y ~ N(mu, sigma^2)."""
    sigma2 = np.exp(2.0 * np.asarray(p.psi, dtype=np.float64))
    if np.any(sigma2 > _EXP_LIMIT):
        raise OverflowError("sigma^2 > 700: relative standard deviation overflows")
    return np.sqrt(np.expm1(sigma2))


def point_prediction(p):
    """Median exp(mu) on the original scale of a log-transformed target."""
    mu = np.asarray(p.mu, dtype=np.float64)
    if np.any(mu > _EXP_LIMIT):
        raise OverflowError("mu > 700: exp(mu) overflows")
    return np.exp(mu)
