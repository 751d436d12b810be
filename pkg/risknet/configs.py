from pathlib import Path
from typing import Literal, TypedDict

from pydantic import BaseModel, Field, validator

from risknet.exceptions import ConfigException

Innovations = Literal['normal', 'skewt']
ExportFormat = Literal['csv', 'json', 'dot', 'svg']


class Config(TypedDict):
    base_dir: Path
    cache_dir: Path | None
    log_fits: bool
    log_level: str


config: Config = {
    'base_dir': Path(),
    'cache_dir': None,
    'log_fits': False,
    'log_level': 'INFO',
}


class OptimizerConfig(BaseModel):
    gtol: float = 1e-6
    maxiter: int = 500

    class Config:
        frozen = True

    @validator('gtol')
    def _positive_gtol(cls, value):  # NOQA: N805
        if value <= 0:
            raise ValueError('gtol should be > 0')
        return value

    @validator('maxiter')
    def _positive_maxiter(cls, value):  # NOQA: N805
        if value < 1:
            raise ValueError('maxiter should be >= 1')
        return value


class MarginalConfig(BaseModel):
    p: int = 1
    q: int = 1
    p_v: int = 2
    q_v: int = 2
    innovations: Innovations = 'skewt'
    optimizer: OptimizerConfig = OptimizerConfig()

    class Config:
        frozen = True

    @validator('p', 'q', 'p_v', 'q_v')
    def _non_negative_order(cls, value):  # NOQA: N805
        if value < 0:
            raise ValueError('orders should be >= 0')
        return value

    @validator('q_v')
    def _variance_persistence(cls, value):  # NOQA: N805
        if value < 1:
            raise ValueError('q_v should be >= 1')
        return value


class CopulaConfig(BaseModel):
    m: int = 1
    n: int = 1
    nu_lower: float = 2.05
    nu_upper: float = 100.0
    optimizer: OptimizerConfig = OptimizerConfig()

    class Config:
        frozen = True

    @validator('m', 'n')
    def _positive_order(cls, value):  # NOQA: N805
        if value < 1:
            raise ValueError('DCC orders should be >= 1')
        return value

    @validator('nu_upper')
    def _nu_bounds(cls, value, values):  # NOQA: N805
        if value <= values.get('nu_lower', 2.05) or values.get('nu_lower', 2.05) <= 2:
            raise ValueError('nu bounds should satisfy 2 < nu_lower < nu_upper')
        return value


class RunConfig(BaseModel):
    input: Path | None = None
    out: Path = Path('risknet-out')
    seed: int = 0
    jobs: int = 1
    bootstrap: int = 1000
    marginal: MarginalConfig = MarginalConfig()
    copula: CopulaConfig = CopulaConfig()
    trees: list[str] = Field(default_factory=list)
    formats: list[ExportFormat] = Field(default_factory=lambda: ['csv', 'json', 'dot', 'svg'])
    labels: Path | None = None
    cache_dir: Path | None = None

    @validator('seed')
    def _unsigned_seed(cls, value):  # NOQA: N805
        if not 0 <= value < 2 ** 64:
            raise ValueError('seed should be an unsigned 64-bit integer')
        return value

    @validator('jobs')
    def _positive_jobs(cls, value):  # NOQA: N805
        if value < 1:
            raise ValueError('jobs should be >= 1')
        return value

    @validator('bootstrap')
    def _non_negative_bootstrap(cls, value):  # NOQA: N805
        if value < 0:
            raise ValueError('bootstrap should be >= 0')
        return value

    @property
    def resolved_cache_dir(self) -> Path:
        return self.cache_dir or config['cache_dir'] or self.out / 'cache'

    def estimation_dict(self) -> dict:
        """The part of the config that changes fitted numbers (keys the cache and the manifest)."""
        return {
            'marginal': self.marginal.dict(),
            'copula': self.copula.dict(),
            'bootstrap': self.bootstrap,
            'seed': self.seed,
        }


def build_run_config(**kwargs) -> RunConfig:
    from pydantic import ValidationError

    try:
        return RunConfig(**kwargs)
    except ValidationError as validation_error:
        error = {'.'.join(str(loc) for loc in e['loc']): e['msg'] for e in validation_error.errors()}
        raise ConfigException(detail=error)
