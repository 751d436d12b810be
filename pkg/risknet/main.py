from pathlib import Path
from runpy import run_path

from risknet.configs import RunConfig, build_run_config, config
from risknet.exceptions import ConfigException

""" The logger is imported inside the methods because it reads config['base_dir'], which load_configs() may change """


class RiskNet:
    """
    Reads an optional configs file, merges the overrides on top of it and
    runs one of the stages with the resulting RunConfig.
    """

    def __init__(self, configs: str | Path | None = None, **overrides):
        self.configs_path = Path(configs).resolve() if configs else None
        if self.configs_path:
            config['base_dir'] = self.configs_path.parent
        self.settings = {}
        self.load_configs(overrides)

    def load_configs(self, overrides: dict) -> None:
        from risknet.logger import logger
        from risknet.utils import resolve_cache_dir

        # Check & Read The Configs File
        self._check_configs()

        config['log_fits'] = bool(overrides.pop('log_fits', self.settings.get('LOG_FITS', config['log_fits'])))
        env_file = self.configs_path.parent / '.env' if self.configs_path else Path('.env')
        config['cache_dir'] = resolve_cache_dir(env_file)

        values = {
            'input': self.settings.get('INPUT'),
            'out': self.settings.get('OUT'),
            'seed': self.settings.get('SEED'),
            'jobs': self.settings.get('JOBS'),
            'bootstrap': self.settings.get('BOOTSTRAP'),
            'trees': self.settings.get('TREES'),
            'formats': self.settings.get('FORMATS'),
            'labels': self.settings.get('LABELS'),
        }
        values.update(overrides)
        values = {key: value for key, value in values.items() if value is not None}
        values['marginal'] = self._get_marginal(values.pop('innovations', None))
        values['copula'] = self._get_copula()
        self.run_config: RunConfig = build_run_config(**values)
        logger.debug(f'Configs loaded: {self.run_config}')

    def _check_configs(self) -> None:
        """Read the configs file and put it as dict in self.settings"""
        if self.configs_path is None:
            return
        try:
            self.settings = run_path(str(self.configs_path))
        except FileNotFoundError:
            raise ConfigException(detail=f'"{self.configs_path}" Not Found.')

    def _get_optimizer(self) -> dict:
        optimizer = {}
        if (gtol := self.settings.get('GTOL')) is not None:
            optimizer['gtol'] = gtol
        if (maxiter := self.settings.get('MAXITER')) is not None:
            optimizer['maxiter'] = maxiter
        return optimizer

    def _get_marginal(self, innovations: str | None) -> dict:
        marginal = {'optimizer': self._get_optimizer()}
        if innovations := innovations or self.settings.get('INNOVATIONS'):
            marginal['innovations'] = innovations
        return marginal

    def _get_copula(self) -> dict:
        return {'optimizer': self._get_optimizer()}

    def run(self):
        from risknet.pipeline import run_full
        return run_full(self.run_config)

    def indices(self, cube: str | Path):
        from risknet.pipeline import run_indices
        return run_indices(cube, self.run_config)

    def export(self, out_dir: str | Path):
        from risknet.pipeline import run_export
        return run_export(out_dir, self.run_config)
