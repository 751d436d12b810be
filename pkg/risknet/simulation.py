"""
Synthetic price panels drawn from the same model the pipeline estimates:
ARMA-eGARCH marginals with standardized innovations coupled by a k-variate
t-copula whose correlation follows DCC(1,1).

The DCC target switches regime. In calm periods assets load on a market
factor and on one sector factor each; inside the optional stress window every
asset loads on a single hub asset, which makes the spanning trees star-like.
"""
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError, validator

from risknet._utils import dumps
from risknet.copula_dcc import DccParams, simulate_dcc_copula
from risknet.distributions import InnovationDist
from risknet.exceptions import ConfigException
from risknet.ingest import PricePanel, ReturnPanel, cumulate_returns
from risknet.logger import logger
from risknet.marginal import PIT_GUARD, ArmaParams, EgarchParams, MarginalParams, simulate_marginal_from_shocks


class MarginalTruth(BaseModel):
    mu0: float = 0.001
    phi: tuple[float, ...] = (0.2,)
    theta: tuple[float, ...] = (-0.1,)
    omega: float = -0.7
    alpha: tuple[float, ...] = (-0.06, 0.02)
    gamma: tuple[float, ...] = (0.15, 0.05)
    beta: tuple[float, ...] = (0.75, 0.15)
    innovations: str = 'skewt'
    shape: float = 7.0
    skew: float = 1.1

    class Config:
        frozen = True

    @validator('beta')
    def _stationary(cls, value):  # NOQA: N805
        if not abs(sum(value)) < 1:
            raise ValueError('beta should satisfy |sum(beta)| < 1')
        return value

    @validator('phi')
    def _stationary_mean(cls, value):  # NOQA: N805
        if any(abs(v) >= 1 for v in value):
            raise ValueError('phi should satisfy |phi| < 1')
        return value

    def to_params(self) -> MarginalParams:
        return MarginalParams(
            arma=ArmaParams(mu0=self.mu0, phi=self.phi, theta=self.theta),
            egarch=EgarchParams(omega=self.omega, alpha=self.alpha, gamma=self.gamma, beta=self.beta),
            dist=InnovationDist(family=self.innovations, shape=self.shape, skew=self.skew),
        )


class SimulationSpec(BaseModel):
    assets: int = 28
    periods: int = 747
    sectors: int = 4
    market_loading: float = 0.45
    sector_loading: float = 0.5
    hub_loading: float = 0.85
    stress_window: tuple[float, float] | None = (0.55, 0.7)
    c: float = 0.05
    d: float = 0.9
    nu: float = 6.0
    marginal: MarginalTruth = MarginalTruth()
    burn: int = 500
    start: str = '2003-01-03'
    frequency: str = '7D'
    first_price: float = 100.0

    class Config:
        frozen = True

    @validator('assets')
    def _at_least_two_assets(cls, value):  # NOQA: N805
        if value < 2:
            raise ValueError('assets should be >= 2')
        return value

    @validator('periods')
    def _enough_periods(cls, value):  # NOQA: N805
        if value < 10:
            raise ValueError('periods should be >= 10')
        return value

    @validator('sectors')
    def _positive_sectors(cls, value):  # NOQA: N805
        if value < 1:
            raise ValueError('sectors should be >= 1')
        return value

    @validator('market_loading', 'sector_loading', 'hub_loading')
    def _loading_range(cls, value):  # NOQA: N805
        if not 0 <= value < 1:
            raise ValueError('loadings should be in [0, 1)')
        return value

    @validator('sector_loading')
    def _total_loading(cls, value, values):  # NOQA: N805
        if values.get('market_loading', 0) ** 2 + value ** 2 >= 1:
            raise ValueError('market_loading^2 + sector_loading^2 should be < 1')
        return value

    @validator('stress_window')
    def _window_order(cls, value):  # NOQA: N805
        if value is not None and not 0 <= value[0] < value[1] <= 1:
            raise ValueError('stress_window should be (start, end) fractions with 0 <= start < end <= 1')
        return value

    @validator('d')
    def _dcc_feasible(cls, value, values):  # NOQA: N805
        c = values.get('c', 0.0)
        if c < 0 or value < 0 or c + value >= 1:
            raise ValueError('DCC coefficients should satisfy c, d >= 0 and c + d < 1')
        return value

    @validator('nu')
    def _nu_above_two(cls, value):  # NOQA: N805
        if value <= 2:
            raise ValueError('nu should be > 2')
        return value

    @property
    def asset_names(self) -> list[str]:
        width = len(str(self.assets))
        return [f'A{i + 1:0{width}d}' for i in range(self.assets)]

    def stress_range(self) -> tuple[int, int] | None:
        """[start, end) in return periods."""
        if self.stress_window is None:
            return None
        return int(round(self.stress_window[0] * self.periods)), int(round(self.stress_window[1] * self.periods))


def build_simulation_spec(**kwargs) -> SimulationSpec:
    try:
        return SimulationSpec(**kwargs)
    except ValidationError as validation_error:
        error = {'.'.join(str(loc) for loc in e['loc']): e['msg'] for e in validation_error.errors()}
        raise ConfigException(detail=error)


SMOKE_SPEC = dict(assets=8, periods=200, sectors=2, burn=200)


def sector_of(spec: SimulationSpec) -> np.ndarray:
    return np.arange(spec.assets) % spec.sectors


def calm_correlation(spec: SimulationSpec) -> np.ndarray:
    sectors = sector_of(spec)
    loadings = np.zeros((spec.assets, 1 + spec.sectors))
    loadings[:, 0] = spec.market_loading
    loadings[np.arange(spec.assets), 1 + sectors] = spec.sector_loading
    correlation = loadings @ loadings.T
    np.fill_diagonal(correlation, 1.0)
    return correlation


def stress_correlation(spec: SimulationSpec) -> np.ndarray:
    """Asset 0 is the hub: corr(hub, i) = lambda and corr(i, j) = lambda^2."""
    loadings = np.full(spec.assets, spec.hub_loading)
    loadings[0] = 1.0
    correlation = np.outer(loadings, loadings)
    np.fill_diagonal(correlation, 1.0)
    return correlation


def target_path(spec: SimulationSpec) -> np.ndarray:
    """Per-period DCC target including the burn-in, which is always calm."""
    path = np.repeat(calm_correlation(spec)[None, :, :], spec.burn + spec.periods, axis=0)
    if (window := spec.stress_range()) is not None:
        path[spec.burn + window[0]:spec.burn + window[1]] = stress_correlation(spec)
    return path


def simulate_returns(spec: SimulationSpec, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """(T x k returns, T x k x k true copula correlation path) after the burn-in."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    targets = target_path(spec)
    params = DccParams(c=(spec.c,), d=(spec.d,), nu=spec.nu)
    pits, path = simulate_dcc_copula(params, targets[0], spec.burn + spec.periods, rng, target_path=targets)
    marginal = spec.marginal.to_params()
    returns = np.empty((spec.periods, spec.assets))
    for i in range(spec.assets):
        eps = marginal.dist.ppf(np.clip(pits[:, i], PIT_GUARD, 1.0 - PIT_GUARD))
        returns[:, i] = simulate_marginal_from_shocks(marginal, eps)[spec.burn:]
    return returns, path[spec.burn:]


def simulate_panel(spec: SimulationSpec, seed: int = 0) -> tuple[PricePanel, dict]:
    """Prices from exponentiated simulated returns, and the parameters they were drawn from."""
    returns, path = simulate_returns(spec, seed)
    dates = pd.date_range(spec.start, periods=spec.periods + 1, freq=spec.frequency).strftime('%Y-%m-%d')
    assets = spec.asset_names
    panel = cumulate_returns(
        ReturnPanel(assets=tuple(assets), periods=tuple(dates[1:]), returns=returns),
        first_prices=np.full(spec.assets, spec.first_price),
        first_period=dates[0],
    )

    window = spec.stress_range()
    rows, columns = np.triu_indices(spec.assets, k=1)
    truth = {
        'seed': seed,
        'spec': spec.dict(),
        'marginal': spec.marginal.to_params().to_dict(),
        'dcc': {'c': [spec.c], 'd': [spec.d], 'nu': spec.nu},
        'hub': assets[0],
        'sectors': {asset: int(sector) for asset, sector in zip(assets, sector_of(spec))},
        'stress': None if window is None else {
            'first': panel.periods[1 + window[0]],
            'last': panel.periods[window[1]],
            'start_index': window[0],
            'end_index': window[1],
        },
        'mean_correlation': path[:, rows, columns].mean(axis=1),
    }
    logger.debug(f'Simulated {spec.periods} periods x {spec.assets} assets (seed={seed})')
    return panel, truth


def write_panel(panel: PricePanel, truth: dict, path: str | Path) -> tuple[Path, Path]:
    """Write the prices CSV and its ground truth next to it as ``<csv>.truth.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    panel.to_csv(path)
    truth_path = path.with_name(path.name + '.truth.json')
    truth_path.write_bytes(dumps(truth))
    return path, truth_path
