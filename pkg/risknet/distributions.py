"""
Standardized innovation laws for the marginal models.

Both families have zero mean and unit variance. The skew-t is the
Fernandez-Steel skewing of a unit-variance Student-t, re-centred and
re-scaled: with ``g`` the unit-variance t density and ``xi > 0``

    f*(z) = 2 / (xi + 1/xi) * g(z / xi)    z >= 0
    f*(z) = 2 / (xi + 1/xi) * g(z * xi)    z <  0

and ``eps = (z - m) / s`` where ``m`` and ``s`` are the mean and standard
deviation of ``f*``. ``xi = 1`` gives the symmetric standardized t.
"""
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats
from scipy.special import gammaln

from risknet.exceptions import DomainException

SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)
LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)

Family = Literal['normal', 'skewt']


def _t_density_at_zero(nu: float) -> float:
    return np.exp(gammaln((nu + 1) / 2) - gammaln(nu / 2) - 0.5 * np.log(nu * np.pi))


def _unit_t_scale(nu: float) -> float:
    """Scale c such that c * X ~ t_nu when X has the unit-variance t law."""
    return np.sqrt(nu / (nu - 2.0))


def _unit_t_abs_moment(nu: float) -> float:
    """E|X| for the unit-variance Student-t."""
    return 2.0 * np.sqrt(nu - 2.0) * np.exp(gammaln((nu + 1) / 2) - gammaln(nu / 2)) / ((nu - 1.0) * np.sqrt(np.pi))


def _unit_t_upper_partial_mean(b, nu: float):
    """Integral of u * g(u) over (b, inf) for the unit-variance t density g."""
    c = _unit_t_scale(nu)
    x = c * np.asarray(b, dtype=float)
    return (nu + x ** 2) / (nu - 1.0) * stats.t.pdf(x, nu) / c


@dataclass(frozen=True)
class InnovationDist:
    family: Family = 'skewt'
    shape: float = 8.0
    skew: float = 1.0

    def __post_init__(self):
        if self.family not in ('normal', 'skewt'):
            raise DomainException(detail=f"Unknown innovation family '{self.family}'")
        if self.family == 'skewt':
            if not np.isfinite(self.shape) or self.shape <= 2:
                raise DomainException(detail=f'Skew-t shape should be > 2 (got {self.shape})')
            if not np.isfinite(self.skew) or self.skew <= 0:
                raise DomainException(detail=f'Skew-t skew should be > 0 (got {self.skew})')

    @property
    def num_params(self) -> int:
        return 2 if self.family == 'skewt' else 0

    def params(self) -> np.ndarray:
        return np.array([self.shape, self.skew]) if self.family == 'skewt' else np.empty(0)

    def with_params(self, values) -> 'InnovationDist':
        if self.family == 'normal':
            return self
        shape, skew = values
        return InnovationDist(family='skewt', shape=float(shape), skew=float(skew))

    # Fernandez-Steel moments of the un-standardized skewed variable
    def _moments(self) -> tuple[float, float]:
        xi = self.skew
        m1 = _unit_t_abs_moment(self.shape)
        mean = m1 * (xi - 1.0 / xi)
        variance = (xi ** 2 + xi ** -2 - 1.0) - mean ** 2
        return mean, np.sqrt(variance)

    def _skewed_cdf(self, z):
        xi = self.skew
        c = _unit_t_scale(self.shape)
        z = np.asarray(z, dtype=float)
        lower = 2.0 / (xi ** 2 + 1.0) * stats.t.cdf(c * z * xi, self.shape)
        upper = 1.0 / (xi ** 2 + 1.0) + 2.0 * xi ** 2 / (xi ** 2 + 1.0) * (stats.t.cdf(c * z / xi, self.shape) - 0.5)
        return np.where(z < 0, lower, upper)

    def _skewed_ppf(self, p):
        xi = self.skew
        c = _unit_t_scale(self.shape)
        p = np.asarray(p, dtype=float)
        split = 1.0 / (xi ** 2 + 1.0)
        with np.errstate(invalid='ignore'):
            lower = stats.t.ppf(np.minimum(p, split) * (xi ** 2 + 1.0) / 2.0, self.shape) / (c * xi)
            upper_p = 0.5 + (np.maximum(p, split) - split) * (xi ** 2 + 1.0) / (2.0 * xi ** 2)
            upper = xi * stats.t.ppf(upper_p, self.shape) / c
        return np.where(p < split, lower, upper)

    def _skewed_partial_mean(self, a: float) -> float:
        """E[Z 1{Z < a}] for the un-standardized skewed variable."""
        xi = self.skew
        k = 2.0 / (xi + 1.0 / xi)
        nu = self.shape
        if a <= 0:
            return -k / xi ** 2 * float(_unit_t_upper_partial_mean(-a * xi, nu))
        tail_zero = float(_unit_t_upper_partial_mean(0.0, nu))
        return -k / xi ** 2 * tail_zero + k * xi ** 2 * (tail_zero - float(_unit_t_upper_partial_mean(a / xi, nu)))

    def logpdf(self, eps) -> np.ndarray:
        eps = np.asarray(eps, dtype=float)
        if self.family == 'normal':
            return -LOG_SQRT_2PI - 0.5 * eps ** 2
        mean, sd = self._moments()
        xi = self.skew
        nu = self.shape
        c = _unit_t_scale(nu)
        z = eps * sd + mean
        u = np.where(z < 0, z * xi, z / xi)
        log_g = np.log(c) + stats.t.logpdf(c * u, nu)
        return np.log(sd) + np.log(2.0 / (xi + 1.0 / xi)) + log_g

    def pdf(self, eps) -> np.ndarray:
        return np.exp(self.logpdf(eps))

    def cdf(self, eps) -> np.ndarray:
        eps = np.asarray(eps, dtype=float)
        if self.family == 'normal':
            return stats.norm.cdf(eps)
        mean, sd = self._moments()
        return self._skewed_cdf(eps * sd + mean)

    def ppf(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.family == 'normal':
            return stats.norm.ppf(p)
        mean, sd = self._moments()
        return (self._skewed_ppf(p) - mean) / sd

    def median(self) -> float:
        return float(self.ppf(0.5))

    def rvs(self, size, rng: np.random.Generator) -> np.ndarray:
        if self.family == 'normal':
            return rng.standard_normal(size)
        return self.ppf(rng.uniform(size=size))

    def abs_moment(self) -> float:
        """E|eps| under the standardized law."""
        if self.family == 'normal':
            return SQRT_2_OVER_PI
        mean, sd = self._moments()
        # E|Z - m| = 2 E[(m - Z)+] since E[Z] = m
        below = mean * float(self._skewed_cdf(mean)) - self._skewed_partial_mean(mean)
        return 2.0 * below / sd

    def describe(self) -> dict:
        if self.family == 'normal':
            return {'family': 'normal'}
        return {'family': 'skewt', 'shape': self.shape, 'skew': self.skew}


def skewt_absmoment(dist: InnovationDist) -> float:
    return dist.abs_moment()
