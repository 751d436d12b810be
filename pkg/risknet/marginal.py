"""
Univariate ARMA(p, q) mean with eGARCH(p_v, q_v) log-variance and
standardized innovations, estimated by maximum likelihood.

    r_t     = mu_t + y_t,        y_t = sqrt(h_t) * eps_t
    mu_t    = mu0 + sum phi_j r_{t-j} + sum theta_j y_{t-j}
    log h_t = omega + sum (alpha_j eps_{t-j} + gamma_j (|eps_{t-j}| - E|eps|)) + sum beta_j log h_{t-j}

Pre-sample values: eps and y are 0, r is the sample mean of the returns and
log h is the log of the sample variance of the mean-filtered series.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter
from scipy.special import expit, logit

from risknet._utils import log_fit, numerical_gradient, standard_errors
from risknet.configs import MarginalConfig
from risknet.distributions import InnovationDist, skewt_absmoment
from risknet.exceptions import ConvergenceException, DegenerateSeriesException, DomainException, FilterException
from risknet.logger import logger

NU_LOWER = 2.05
NU_UPPER = 100.0
LOG_VAR_CEILING = 700.0
MIN_OBSERVATIONS = 10
RECOMMENDED_OBSERVATIONS = 100
INFEASIBLE = 1e6
PIT_GUARD = np.finfo(float).eps
LOG_SKEW_BOUND = 30.0


@dataclass(frozen=True)
class ArmaParams:
    mu0: float = 0.0
    phi: tuple[float, ...] = (0.0,)
    theta: tuple[float, ...] = (0.0,)


@dataclass(frozen=True)
class EgarchParams:
    omega: float = 0.0
    alpha: tuple[float, ...] = (0.0, 0.0)
    gamma: tuple[float, ...] = (0.0, 0.0)
    beta: tuple[float, ...] = (0.0, 0.0)

    @property
    def persistence(self) -> float:
        return float(sum(self.beta))


@dataclass(frozen=True)
class MarginalParams:
    arma: ArmaParams
    egarch: EgarchParams
    dist: InnovationDist

    def names(self) -> list[str]:
        names = ['mu0']
        names += [f'phi[{j + 1}]' for j in range(len(self.arma.phi))]
        names += [f'theta[{j + 1}]' for j in range(len(self.arma.theta))]
        names += ['omega']
        names += [f'alpha[{j + 1}]' for j in range(len(self.egarch.alpha))]
        names += [f'gamma[{j + 1}]' for j in range(len(self.egarch.gamma))]
        names += [f'beta[{j + 1}]' for j in range(len(self.egarch.beta))]
        if self.dist.family == 'skewt':
            names += ['nu', 'xi']
        return names

    def to_vector(self) -> np.ndarray:
        return np.hstack([
            [self.arma.mu0], self.arma.phi, self.arma.theta,
            [self.egarch.omega], self.egarch.alpha, self.egarch.gamma, self.egarch.beta,
            self.dist.params(),
        ]).astype(float)

    def from_vector(self, vector) -> 'MarginalParams':
        """Rebuild a parameter set with this set's orders and family."""
        values = [float(v) for v in vector]
        p, q = len(self.arma.phi), len(self.arma.theta)
        p_v, q_v = len(self.egarch.alpha), len(self.egarch.beta)
        loc = 0

        def take(n):
            nonlocal loc
            chunk = tuple(values[loc:loc + n])
            loc += n
            return chunk

        (mu0,) = take(1)
        phi, theta = take(p), take(q)
        (omega,) = take(1)
        alpha, gamma, beta = take(p_v), take(p_v), take(q_v)
        dist = self.dist.with_params(take(self.dist.num_params))
        return MarginalParams(
            arma=ArmaParams(mu0=mu0, phi=phi, theta=theta),
            egarch=EgarchParams(omega=omega, alpha=alpha, gamma=gamma, beta=beta),
            dist=dist,
        )

    # Feasible region <-> unconstrained space:
    #   phi_j = tanh(u), sum(beta) = tanh(u), nu in (NU_LOWER, NU_UPPER) via logistic,
    #   xi = exp(u) with u clipped to +-LOG_SKEW_BOUND
    def to_unconstrained(self) -> np.ndarray:
        beta = np.asarray(self.egarch.beta, dtype=float)
        parts = [
            [self.arma.mu0], np.arctanh(self.arma.phi), self.arma.theta,
            [self.egarch.omega], self.egarch.alpha, self.egarch.gamma,
            [np.arctanh(beta.sum())], beta[1:],
        ]
        if self.dist.family == 'skewt':
            parts.append([logit((self.dist.shape - NU_LOWER) / (NU_UPPER - NU_LOWER)), np.log(self.dist.skew)])
        return np.hstack(parts).astype(float)

    def from_unconstrained(self, u) -> 'MarginalParams':
        u = np.asarray(u, dtype=float)
        p, q = len(self.arma.phi), len(self.arma.theta)
        p_v, q_v = len(self.egarch.alpha), len(self.egarch.beta)
        natural = u.copy()
        natural[1:1 + p] = np.tanh(u[1:1 + p])
        beta_start = 1 + p + q + 1 + 2 * p_v
        beta_tail = u[beta_start + 1:beta_start + q_v]
        natural[beta_start] = np.tanh(u[beta_start]) - beta_tail.sum()
        natural[beta_start + 1:beta_start + q_v] = beta_tail
        if self.dist.family == 'skewt':
            natural[-2] = NU_LOWER + (NU_UPPER - NU_LOWER) * expit(u[-2])
            natural[-1] = np.exp(np.clip(u[-1], -LOG_SKEW_BOUND, LOG_SKEW_BOUND))
        return self.from_vector(natural)

    def to_dict(self) -> dict:
        return {
            'mu0': self.arma.mu0,
            'phi': list(self.arma.phi),
            'theta': list(self.arma.theta),
            'omega': self.egarch.omega,
            'alpha': list(self.egarch.alpha),
            'gamma': list(self.egarch.gamma),
            'beta': list(self.egarch.beta),
            'dist': self.dist.describe(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'MarginalParams':
        dist = data['dist']
        return cls(
            arma=ArmaParams(mu0=data['mu0'], phi=tuple(data['phi']), theta=tuple(data['theta'])),
            egarch=EgarchParams(
                omega=data['omega'], alpha=tuple(data['alpha']), gamma=tuple(data['gamma']), beta=tuple(data['beta']),
            ),
            dist=InnovationDist(**dist),
        )


@dataclass(frozen=True)
class FilterResult:
    cond_mean: np.ndarray
    cond_var: np.ndarray
    std_resid: np.ndarray
    log_var: np.ndarray


@dataclass(frozen=True)
class MarginalFit:
    params: MarginalParams
    loglik: float
    cond_mean: np.ndarray
    cond_var: np.ndarray
    std_resid: np.ndarray
    pit: np.ndarray
    converged: bool = True
    iterations: int = 0
    gradient_norm: float = 0.0
    message: str = ''
    std_errors: np.ndarray = field(default_factory=lambda: np.empty(0))
    degenerate: bool = False

    @property
    def arma(self) -> ArmaParams:
        return self.params.arma

    @property
    def egarch(self) -> EgarchParams:
        return self.params.egarch

    @property
    def dist(self) -> InnovationDist:
        return self.params.dist

    @property
    def nobs(self) -> int:
        return len(self.std_resid)

    @property
    def aic(self) -> float:
        return 2.0 * len(self.params.names()) - 2.0 * self.loglik

    @property
    def bic(self) -> float:
        return len(self.params.names()) * np.log(self.nobs) - 2.0 * self.loglik

    def unconditional_variance(self) -> float:
        """exp of the stationary mean of log h (the news terms have zero mean)."""
        persistence = self.egarch.persistence
        return float(np.exp(self.egarch.omega / (1.0 - persistence)))

    def to_dict(self) -> dict:
        return {
            'params': self.params.to_dict(),
            'names': self.params.names(),
            'std_errors': [None if not np.isfinite(v) else float(v) for v in self.std_errors],
            'loglik': self.loglik,
            'aic': self.aic,
            'bic': self.bic,
            'nobs': self.nobs,
            'converged': self.converged,
            'iterations': self.iterations,
            'gradient_norm': self.gradient_norm,
            'message': self.message,
            'degenerate': self.degenerate,
        }

    @classmethod
    def from_params(cls, returns, params: MarginalParams, **diagnostics) -> 'MarginalFit':
        """Filter ``returns`` at fixed parameters; raises FilterException when they are infeasible."""
        filtered = filter_arma_egarch(returns, params.arma, params.egarch, params.dist)
        diagnostics.setdefault('loglik', loglik_marginal(returns, params))
        return cls(
            params=params,
            cond_mean=filtered.cond_mean,
            cond_var=filtered.cond_var,
            std_resid=filtered.std_resid,
            pit=_clamped_cdf(params.dist, filtered.std_resid),
            **diagnostics,
        )

    @classmethod
    def from_dict(cls, data: dict, returns) -> 'MarginalFit':
        """Rebuild a fit from its cached document by re-running the deterministic filter."""
        return cls.from_params(
            returns,
            MarginalParams.from_dict(data['params']),
            loglik=data['loglik'],
            converged=data['converged'],
            iterations=data['iterations'],
            gradient_norm=data['gradient_norm'],
            message=data['message'],
            std_errors=np.array([np.nan if v is None else v for v in data['std_errors']], dtype=float),
            degenerate=data['degenerate'],
        )


def default_params(config: MarginalConfig, dist: InnovationDist | None = None) -> MarginalParams:
    """A zero parameter set with the configured orders, used as a template."""
    return MarginalParams(
        arma=ArmaParams(mu0=0.0, phi=(0.0,) * config.p, theta=(0.0,) * config.q),
        egarch=EgarchParams(omega=0.0, alpha=(0.0,) * config.p_v, gamma=(0.0,) * config.p_v, beta=(0.0,) * config.q_v),
        dist=dist or InnovationDist(family=config.innovations),
    )


def starting_params(returns: np.ndarray, config: MarginalConfig) -> MarginalParams:
    """
    Fixed starting point: mu0 at the sample mean, phi 0.1, theta 0.05, alpha 0,
    gamma (0.1, 0), beta (0.8, 0.1), nu 8 and xi 1.

    omega starts at (1 - sum(beta)) * ln var(r), not 0.9 * ln var(r): the
    stationary log variance omega / (1 - sum(beta)) then equals ln var(r).
    With 0.9 * ln var(r) and sum(beta) = 0.9 it would sit at 9 * ln var(r),
    a variance many orders of magnitude below the data, and the first
    filtered residuals overflow the log-variance range.
    """
    variance = float(np.var(returns))
    beta = (0.8, 0.1) + (0.0,) * max(config.q_v - 2, 0) if config.q_v >= 2 else (0.9,)
    beta = beta[:config.q_v]
    gamma = (0.1,) + (0.0,) * (config.p_v - 1) if config.p_v else ()
    dist = InnovationDist(family=config.innovations, shape=8.0, skew=1.0)
    return MarginalParams(
        arma=ArmaParams(
            mu0=float(np.mean(returns)),
            phi=(0.1,) + (0.0,) * (config.p - 1) if config.p else (),
            theta=(0.05,) + (0.0,) * (config.q - 1) if config.q else (),
        ),
        egarch=EgarchParams(
            omega=(1.0 - sum(beta)) * np.log(variance),
            alpha=(0.0,) * config.p_v,
            gamma=gamma,
            beta=beta,
        ),
        dist=dist,
    )


def _mean_filter(returns: np.ndarray, arma: ArmaParams) -> np.ndarray:
    """Residuals y_t of the ARMA mean equation."""
    phi = np.asarray(arma.phi, dtype=float)
    theta = np.asarray(arma.theta, dtype=float)
    size = len(returns)
    presample = np.full(len(phi), returns.mean())
    extended = np.concatenate([presample, returns])
    x = returns - arma.mu0
    for j, coefficient in enumerate(phi, start=1):
        x = x - coefficient * extended[len(phi) - j:len(phi) - j + size]
    return lfilter([1.0], np.concatenate([[1.0], theta]), x)


def filter_arma_egarch(returns, arma: ArmaParams, egarch: EgarchParams, dist: InnovationDist) -> FilterResult:
    returns = np.asarray(returns, dtype=float)
    y = _mean_filter(returns, arma)
    backcast = float(np.log(max(float(np.var(y)), np.finfo(float).tiny)))
    expected_abs = skewt_absmoment(dist)

    omega = float(egarch.omega)
    alpha = [float(a) for a in egarch.alpha]
    gamma = [float(g) for g in egarch.gamma]
    beta = [float(b) for b in egarch.beta]
    size = len(returns)
    y_list = y.tolist()
    log_var = [0.0] * size
    eps = [0.0] * size
    for t in range(size):
        value = omega
        for j in range(len(alpha)):
            shock = eps[t - 1 - j] if t - 1 - j >= 0 else 0.0
            value += alpha[j] * shock + gamma[j] * (abs(shock) - expected_abs)
        for j in range(len(beta)):
            value += beta[j] * (log_var[t - 1 - j] if t - 1 - j >= 0 else backcast)
        if not math.isfinite(value) or abs(value) > LOG_VAR_CEILING:
            raise FilterException(detail=f'log-variance left the representable range at t={t} ({value})')
        log_var[t] = value
        eps[t] = y_list[t] * math.exp(-0.5 * value)

    log_var = np.asarray(log_var)
    std_resid = np.asarray(eps)
    if not np.all(np.isfinite(std_resid)):
        raise FilterException(detail='standardized residuals are not finite')
    return FilterResult(cond_mean=returns - y, cond_var=np.exp(log_var), std_resid=std_resid, log_var=log_var)


def loglik_marginal(returns, params: MarginalParams) -> float:
    try:
        filtered = filter_arma_egarch(returns, params.arma, params.egarch, params.dist)
    except FilterException:
        return -np.inf
    value = float(np.sum(params.dist.logpdf(filtered.std_resid) - 0.5 * filtered.log_var))
    return value if np.isfinite(value) else -np.inf


def loglik_gradient(returns, params: MarginalParams) -> np.ndarray:
    """Gradient of loglik_marginal with respect to the natural parameter vector."""
    return numerical_gradient(lambda v: loglik_marginal(returns, params.from_vector(v)), params.to_vector())


def _clamped_cdf(dist: InnovationDist, std_resid: np.ndarray) -> np.ndarray:
    return np.clip(dist.cdf(std_resid), PIT_GUARD, 1.0 - PIT_GUARD)


def pit_transform(fit: MarginalFit) -> np.ndarray:
    return _clamped_cdf(fit.dist, fit.std_resid)


def fit_objective(returns: np.ndarray, start: MarginalParams):
    """Mean negative log-likelihood over the unconstrained space; INFEASIBLE outside the domain."""
    size = len(returns)

    def objective(u):
        try:
            value = loglik_marginal(returns, start.from_unconstrained(u))
        except DomainException:
            return INFEASIBLE
        return -value / size if np.isfinite(value) else INFEASIBLE
    return objective


@log_fit
def fit_marginal(returns, config: MarginalConfig = MarginalConfig()) -> MarginalFit:
    returns = np.asarray(returns, dtype=float)
    size = len(returns)
    if size < MIN_OBSERVATIONS:
        raise DegenerateSeriesException(detail=f'Need at least {MIN_OBSERVATIONS} returns, got {size}')
    if not np.all(np.isfinite(returns)):
        raise DegenerateSeriesException(detail='Returns contain non-finite values')
    if np.var(returns) == 0:
        raise DegenerateSeriesException(detail='Returns are constant; the variance cannot be targeted')
    if size < RECOMMENDED_OBSERVATIONS:
        logger.warning(f'Fitting a marginal model on {size} observations (< {RECOMMENDED_OBSERVATIONS} recommended)')

    start = starting_params(returns, config)
    objective = fit_objective(returns, start)

    result = minimize(
        objective,
        start.to_unconstrained(),
        jac=lambda u: numerical_gradient(objective, u),
        method='BFGS',
        options={'gtol': config.optimizer.gtol, 'maxiter': config.optimizer.maxiter},
    )
    best = start.from_unconstrained(result.x)
    gradient_norm = float(np.linalg.norm(result.jac)) if result.jac is not None else float('nan')
    diagnostics = {'iterations': int(result.nit), 'gradient_norm': gradient_norm, 'message': str(result.message)}
    if result.status == 1 or result.fun >= INFEASIBLE:
        raise ConvergenceException(detail=f'Marginal fit failed: {result.message}', best=best, diagnostics=diagnostics)

    filtered = filter_arma_egarch(returns, best.arma, best.egarch, best.dist)
    loglik = loglik_marginal(returns, best)
    errors = standard_errors(lambda v: loglik_marginal(returns, best.from_vector(v)), best.to_vector())
    return MarginalFit(
        params=best,
        loglik=loglik,
        cond_mean=filtered.cond_mean,
        cond_var=filtered.cond_var,
        std_resid=filtered.std_resid,
        pit=_clamped_cdf(best.dist, filtered.std_resid),
        converged=bool(result.success),
        iterations=int(result.nit),
        gradient_norm=gradient_norm,
        message=str(result.message),
        std_errors=errors,
        degenerate=bool(abs(best.egarch.persistence) > 0.999),
    )


def simulate_marginal(params: MarginalParams, size: int, rng: np.random.Generator, burn: int = 500) -> np.ndarray:
    """Draw a return path from the model equations, discarding a burn-in."""
    eps = params.dist.rvs(size + burn, rng)
    return simulate_marginal_from_shocks(params, eps)[burn:]


def simulate_marginal_from_shocks(params: MarginalParams, eps: np.ndarray) -> np.ndarray:
    """Run the model forward on given standardized shocks; callers discard their own burn-in."""
    arma, egarch = params.arma, params.egarch
    expected_abs = skewt_absmoment(params.dist)
    persistence = egarch.persistence
    log_var_seed = egarch.omega / (1.0 - persistence)
    mean_seed = arma.mu0 / (1.0 - sum(arma.phi))
    size = len(eps)
    returns = np.empty(size)
    y = np.empty(size)
    log_var = np.empty(size)
    for t in range(size):
        value = egarch.omega
        for j, (a, g) in enumerate(zip(egarch.alpha, egarch.gamma)):
            shock = eps[t - 1 - j] if t - 1 - j >= 0 else 0.0
            value += a * shock + g * (abs(shock) - expected_abs)
        for j, b in enumerate(egarch.beta):
            value += b * (log_var[t - 1 - j] if t - 1 - j >= 0 else log_var_seed)
        log_var[t] = value
        y[t] = np.exp(0.5 * value) * eps[t]
        mean = arma.mu0
        for j, phi in enumerate(arma.phi):
            mean += phi * (returns[t - 1 - j] if t - 1 - j >= 0 else mean_seed)
        for j, theta in enumerate(arma.theta):
            mean += theta * (y[t - 1 - j] if t - 1 - j >= 0 else 0.0)
        returns[t] = mean + y[t]
    return returns
