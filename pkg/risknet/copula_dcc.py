"""
Bivariate Student-t copula with DCC(m, n) conditional correlation.

The copula is fitted on probability integral transforms of the marginal
standardized residuals (two-step estimation). Shocks are Student-t quantiles
of the PITs scaled to unit variance; Q-bar is targeted to their sample second
moment matrix, so only (c, d, nu) are optimized.
"""
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np
from scipy import stats
from scipy.optimize import minimize
from scipy.signal import lfilter, lfiltic
from scipy.special import expit, gammaln, logit

from risknet._utils import dumps, loads, log_fit, numerical_gradient, standard_errors
from risknet.configs import CopulaConfig
from risknet.exceptions import AssemblyException, ConvergenceException, DataException, DomainException, FilterException

RHO_GUARD = 1e-12
SHARE_CEILING = 1.0 - 1e-10
INFEASIBLE = 1e6
EFFECTIVELY_GAUSSIAN_MARGIN = 0.5


@dataclass(frozen=True)
class DccParams:
    c: tuple[float, ...] = (0.0,)
    d: tuple[float, ...] = (0.0,)
    nu: float = 8.0

    def __post_init__(self):
        if any(v < 0 for v in (*self.c, *self.d)):
            raise DomainException(detail=f'DCC coefficients should be >= 0 (c={self.c}, d={self.d})')
        if sum(self.c) + sum(self.d) >= 1:
            raise DomainException(detail=f'DCC coefficients should satisfy sum(c) + sum(d) < 1 (c={self.c}, d={self.d})')
        if not self.nu > 2:
            raise DomainException(detail=f'Copula degrees of freedom should be > 2 (got {self.nu})')

    def to_vector(self) -> np.ndarray:
        return np.array([*self.c, *self.d, self.nu], dtype=float)

    def from_vector(self, vector) -> 'DccParams':
        m = len(self.c)
        values = [float(v) for v in vector]
        return DccParams(c=tuple(values[:m]), d=tuple(values[m:-1]), nu=values[-1])

    def names(self) -> list[str]:
        return [f'c[{j + 1}]' for j in range(len(self.c))] + [f'd[{j + 1}]' for j in range(len(self.d))] + ['nu']

    def to_dict(self) -> dict:
        return {'c': list(self.c), 'd': list(self.d), 'nu': self.nu}


@dataclass(frozen=True)
class DccFit:
    params: DccParams
    qbar: np.ndarray
    rho_path: np.ndarray
    loglik: float
    converged: bool = True
    iterations: int = 0
    gradient_norm: float = 0.0
    message: str = ''
    std_errors: np.ndarray = field(default_factory=lambda: np.empty(0))
    effectively_gaussian: bool = False
    fallback: bool = False

    @property
    def targeted_correlation(self) -> float:
        return float(self.qbar[0, 1] / np.sqrt(self.qbar[0, 0] * self.qbar[1, 1]))

    def to_dict(self) -> dict:
        return {
            'params': self.params.to_dict(),
            'names': self.params.names(),
            'qbar': self.qbar.tolist(),
            'std_errors': [None if not np.isfinite(v) else float(v) for v in self.std_errors],
            'loglik': self.loglik,
            'converged': self.converged,
            'iterations': self.iterations,
            'gradient_norm': self.gradient_norm,
            'message': self.message,
            'effectively_gaussian': self.effectively_gaussian,
            'fallback': self.fallback,
        }

    @classmethod
    def from_dict(cls, data: dict, pit_i, pit_j) -> 'DccFit':
        """Rebuild from a cached document; the path is re-filtered from the PITs."""
        params = DccParams(c=tuple(data['params']['c']), d=tuple(data['params']['d']), nu=data['params']['nu'])
        qbar = np.asarray(data['qbar'], dtype=float)
        if data['fallback']:
            rho_path = np.full(len(pit_i), qbar[0, 1] / np.sqrt(qbar[0, 0] * qbar[1, 1]))
        else:
            rho_path = dcc_filter(copula_shocks(np.column_stack([pit_i, pit_j]), params.nu), params, qbar)
        return cls(
            params=params,
            qbar=qbar,
            rho_path=rho_path,
            loglik=data['loglik'],
            converged=data['converged'],
            iterations=data['iterations'],
            gradient_norm=data['gradient_norm'],
            message=data['message'],
            std_errors=np.array([np.nan if v is None else v for v in data['std_errors']], dtype=float),
            effectively_gaussian=data['effectively_gaussian'],
            fallback=data['fallback'],
        )


def _unit_scale(nu: float) -> float:
    return np.sqrt(nu / (nu - 2.0))


def copula_shocks(pit_pair, nu: float) -> np.ndarray:
    """Unit-variance Student-t quantiles of a (T, 2) array of PITs."""
    if not nu > 2:
        raise DomainException(detail=f'Copula degrees of freedom should be > 2 (got {nu})')
    return stats.t.ppf(np.asarray(pit_pair, dtype=float), nu) / _unit_scale(nu)


def target_qbar(shocks: np.ndarray) -> np.ndarray:
    """Sample second moment matrix of the shocks, entry by entry so swapping columns swaps entries exactly."""
    x1, x2 = shocks[:, 0], shocks[:, 1]
    q11 = float(np.mean(x1 * x1))
    q22 = float(np.mean(x2 * x2))
    q12 = float(np.mean(x1 * x2))
    return np.array([[q11, q12], [q12, q22]])


def _recursion(inputs: np.ndarray, seed: float, params: DccParams) -> np.ndarray:
    """Q_t for one entry: Q_t = (1 - S) qbar + sum c_j P_{t-j} + sum d_j Q_{t-j}, pre-sample P and Q equal qbar."""
    c = np.asarray(params.c, dtype=float)
    d = np.asarray(params.d, dtype=float)
    m, n = len(c), len(d)
    size = len(inputs)
    extended = np.concatenate([np.full(m, seed), inputs])
    drive = np.full(size, (1.0 - c.sum() - d.sum()) * seed)
    for j in range(1, m + 1):
        drive += c[j - 1] * extended[m - j:m - j + size]
    a = np.concatenate([[1.0], -d])
    initial = lfiltic([1.0], a, y=np.full(n, seed))
    path, _ = lfilter([1.0], a, drive, zi=initial)
    return path


def dcc_filter(shocks, params: DccParams, qbar) -> np.ndarray:
    shocks = np.asarray(shocks, dtype=float)
    qbar = np.asarray(qbar, dtype=float)
    x1, x2 = shocks[:, 0], shocks[:, 1]
    q11 = _recursion(x1 * x1, qbar[0, 0], params)
    q22 = _recursion(x2 * x2, qbar[1, 1], params)
    q12 = _recursion(x1 * x2, qbar[0, 1], params)
    if not (np.all(q11 > 0) and np.all(q22 > 0)):
        raise FilterException(detail='DCC recursion produced a non-positive diagonal')
    rho = q12 / np.sqrt(q11 * q22)
    return np.clip(rho, -1.0 + RHO_GUARD, 1.0 - RHO_GUARD)


def t_copula_logdensity(x1, x2, rho, nu: float) -> np.ndarray:
    """ln c_nu for t quantiles x1, x2 (not unit-scaled) and correlation rho."""
    one_minus = 1.0 - rho * rho
    quadratic = (x1 * x1 + x2 * x2 - 2.0 * rho * (x1 * x2)) / (nu * one_minus)
    joint = gammaln((nu + 2) / 2) - gammaln(nu / 2) - np.log(nu * np.pi) - 0.5 * np.log(one_minus) \
        - (nu + 2) / 2 * np.log1p(quadratic)
    margin = gammaln((nu + 1) / 2) - gammaln(nu / 2) - 0.5 * np.log(nu * np.pi)
    marginals = 2.0 * margin - (nu + 1) / 2 * (np.log1p(x1 * x1 / nu) + np.log1p(x2 * x2 / nu))
    return joint - marginals


def loglik_tcopula_dcc(pit_pair, params: DccParams, qbar=None) -> float:
    pit_pair = np.asarray(pit_pair, dtype=float)
    shocks = copula_shocks(pit_pair, params.nu)
    if qbar is None:
        qbar = target_qbar(shocks)
    try:
        rho = dcc_filter(shocks, params, qbar)
    except FilterException:
        return -np.inf
    quantiles = shocks * _unit_scale(params.nu)
    value = float(np.sum(t_copula_logdensity(quantiles[:, 0], quantiles[:, 1], rho, params.nu)))
    return value if np.isfinite(value) else -np.inf


def loglik_gradient(pit_pair, params: DccParams) -> np.ndarray:
    """Gradient of loglik_tcopula_dcc (with targeting) with respect to (c, d, nu)."""
    return numerical_gradient(lambda v: loglik_tcopula_dcc(pit_pair, params.from_vector(v)), params.to_vector())


class _Transform:
    """(c, d) through a softmax with an implicit slack term, nu through a logistic onto its bounds."""

    def __init__(self, m: int, n: int, nu_lower: float, nu_upper: float):
        self.m, self.n = m, n
        self.nu_lower, self.nu_upper = nu_lower, nu_upper

    def to_params(self, u) -> DccParams:
        u = np.asarray(u, dtype=float)
        weights = np.exp(u[:-1] - max(0.0, u[:-1].max()))
        slack = np.exp(-max(0.0, u[:-1].max()))
        shares = weights / (slack + weights.sum())
        if (total := shares.sum()) > SHARE_CEILING:
            shares = shares * (SHARE_CEILING / total)
        nu = self.nu_lower + (self.nu_upper - self.nu_lower) * expit(u[-1])
        return DccParams(c=tuple(shares[:self.m]), d=tuple(shares[self.m:]), nu=float(nu))

    def to_unconstrained(self, params: DccParams) -> np.ndarray:
        shares = np.array([*params.c, *params.d])
        slack = 1.0 - shares.sum()
        nu_share = (params.nu - self.nu_lower) / (self.nu_upper - self.nu_lower)
        return np.append(np.log(shares / slack), logit(nu_share))


def _starting_params(pit_pair: np.ndarray, config: CopulaConfig) -> DccParams:
    """Best of a small grid, in the spirit of the usual DCC starting value search."""
    m, n = config.m, config.n
    candidates = []
    for c, persistence, nu in product((0.01, 0.03, 0.05), (0.90, 0.95, 0.98), (5.0, 8.0, 15.0)):
        params = DccParams(c=(c / m,) * m, d=((persistence - c) / n,) * n, nu=nu)
        candidates.append((loglik_tcopula_dcc(pit_pair, params), params))
    return max(candidates, key=lambda candidate: candidate[0])[1]


def fit_objective(pit_pair: np.ndarray, transform: _Transform):
    size = len(pit_pair)

    def objective(u):
        try:
            value = loglik_tcopula_dcc(pit_pair, transform.to_params(u))
        except DomainException:
            return INFEASIBLE
        return -value / size if np.isfinite(value) else INFEASIBLE
    return objective


@log_fit
def fit_pair(pit_i, pit_j, config: CopulaConfig = CopulaConfig()) -> DccFit:
    pit_i = np.asarray(pit_i, dtype=float)
    pit_j = np.asarray(pit_j, dtype=float)
    if pit_i.shape != pit_j.shape or pit_i.ndim != 1:
        raise DataException(detail=f'PIT series should be 1-d and of equal length ({pit_i.shape} vs {pit_j.shape})')
    pit_pair = np.column_stack([pit_i, pit_j])
    transform = _Transform(config.m, config.n, config.nu_lower, config.nu_upper)
    start = _starting_params(pit_pair, config)
    objective = fit_objective(pit_pair, transform)

    result = minimize(
        objective,
        transform.to_unconstrained(start),
        jac=lambda u: numerical_gradient(objective, u),
        method='BFGS',
        options={'gtol': config.optimizer.gtol, 'maxiter': config.optimizer.maxiter},
    )
    best = transform.to_params(result.x)
    gradient_norm = float(np.linalg.norm(result.jac)) if result.jac is not None else float('nan')
    diagnostics = {'iterations': int(result.nit), 'gradient_norm': gradient_norm, 'message': str(result.message)}
    if result.status == 1 or result.fun >= INFEASIBLE:
        raise ConvergenceException(detail=f'Copula fit failed: {result.message}', best=best, diagnostics=diagnostics)

    shocks = copula_shocks(pit_pair, best.nu)
    qbar = target_qbar(shocks)
    errors = standard_errors(lambda v: _safe_loglik(pit_pair, best, v), best.to_vector())
    return DccFit(
        params=best,
        qbar=qbar,
        rho_path=dcc_filter(shocks, best, qbar),
        loglik=loglik_tcopula_dcc(pit_pair, best, qbar),
        converged=bool(result.success),
        iterations=int(result.nit),
        gradient_norm=gradient_norm,
        message=str(result.message),
        std_errors=errors,
        effectively_gaussian=bool(best.nu >= config.nu_upper - EFFECTIVELY_GAUSSIAN_MARGIN),
    )


def _safe_loglik(pit_pair, template: DccParams, vector) -> float:
    try:
        return loglik_tcopula_dcc(pit_pair, template.from_vector(vector))
    except DomainException:
        return -np.inf


def fallback_fit(pit_i, pit_j, nu: float = 8.0, message: str = '') -> DccFit:
    """Constant path at the targeted correlation, used when a pair cannot be estimated."""
    pit_pair = np.column_stack([np.asarray(pit_i, dtype=float), np.asarray(pit_j, dtype=float)])
    params = DccParams(c=(0.0,), d=(0.0,), nu=nu)
    qbar = target_qbar(copula_shocks(pit_pair, nu))
    rho = dcc_filter(copula_shocks(pit_pair, nu), params, qbar)
    return DccFit(
        params=params,
        qbar=qbar,
        rho_path=rho,
        loglik=loglik_tcopula_dcc(pit_pair, params, qbar),
        converged=False,
        message=message,
        std_errors=np.full(3, np.nan),
        fallback=True,
    )


@dataclass(frozen=True)
class CorrelationCube:
    assets: tuple[str, ...]
    periods: tuple[str, ...]
    rho: np.ndarray

    @property
    def size(self) -> int:
        return len(self.assets)

    def slice(self, t: int) -> np.ndarray:
        return self.rho[t]

    def upper_triangle(self) -> np.ndarray:
        rows, columns = np.triu_indices(self.size, k=1)
        return self.rho[:, rows, columns]

    def to_dict(self) -> dict:
        rows, columns = np.triu_indices(self.size, k=1)
        return {
            'assets': list(self.assets),
            'periods': list(self.periods),
            'pairs': [[self.assets[i], self.assets[j]] for i, j in zip(rows, columns)],
            'rho': self.upper_triangle().tolist(),
        }

    def to_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_bytes(dumps(self.to_dict()))
        return path

    @classmethod
    def from_dict(cls, data: dict) -> 'CorrelationCube':
        assets = tuple(data['assets'])
        size = len(assets)
        upper = np.asarray(data['rho'], dtype=float).reshape(len(data['periods']), -1)
        rho = np.repeat(np.eye(size)[None, :, :], len(data['periods']), axis=0)
        rows, columns = np.triu_indices(size, k=1)
        rho[:, rows, columns] = upper
        rho[:, columns, rows] = upper
        return cls(assets=assets, periods=tuple(data['periods']), rho=rho)

    @classmethod
    def from_json(cls, path: str | Path) -> 'CorrelationCube':
        return cls.from_dict(loads(Path(path).read_bytes()))


def assemble_cube(fits: dict[tuple[str, str], DccFit], assets, periods) -> CorrelationCube:
    assets = tuple(assets)
    periods = tuple(periods)
    size = len(assets)
    missing = []
    rho = np.repeat(np.eye(size)[None, :, :], len(periods), axis=0)
    for i in range(size):
        for j in range(i + 1, size):
            fit = fits.get((assets[i], assets[j])) or fits.get((assets[j], assets[i]))
            if fit is None:
                missing.append((assets[i], assets[j]))
                continue
            if len(fit.rho_path) != len(periods):
                raise DataException(
                    detail=f'Pair ({assets[i]}, {assets[j]}) has {len(fit.rho_path)} periods, expected {len(periods)}'
                )
            rho[:, i, j] = fit.rho_path
            rho[:, j, i] = fit.rho_path
    if missing:
        raise AssemblyException(missing=missing)
    return CorrelationCube(assets=assets, periods=periods, rho=rho)


def simulate_dcc_copula(
        params: DccParams,
        qbar,
        size: int,
        rng: np.random.Generator,
        target_path=None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Draw PITs from a k-variate t-copula whose correlation follows DCC(1,1).
    ``target_path`` (T x k x k) replaces the constant ``qbar`` when the
    unconditional target changes over time. Returns (pits, correlation path).
    """
    if len(params.c) != 1 or len(params.d) != 1:
        raise DomainException(detail='The simulator supports DCC(1,1) only')
    qbar = np.asarray(qbar, dtype=float)
    k = qbar.shape[0]
    c, d, nu = params.c[0], params.d[0], params.nu
    scale = _unit_scale(nu)
    pits = np.empty((size, k))
    path = np.empty((size, k, k))
    q = qbar.copy() if target_path is None else np.asarray(target_path[0], dtype=float).copy()
    previous_outer = q.copy()
    for t in range(size):
        target = qbar if target_path is None else target_path[t]
        if t > 0:
            q = (1.0 - c - d) * target + c * previous_outer + d * q
        diagonal = np.sqrt(np.diag(q))
        correlation = q / np.outer(diagonal, diagonal)
        np.fill_diagonal(correlation, 1.0)
        path[t] = correlation
        normal = np.linalg.cholesky(correlation) @ rng.standard_normal(k)
        quantiles = normal / np.sqrt(rng.chisquare(nu) / nu)
        pits[t] = stats.t.cdf(quantiles, nu)
        shocks = quantiles / scale
        previous_outer = np.outer(shocks, shocks)
    return pits, path
