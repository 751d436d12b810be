"""
The two-stage run.

Stage one turns prices into a correlation cube: log returns, one marginal fit
per asset, one copula-DCC fit per pair. Stage two turns the cube into one
spanning tree per period and the topology series of those trees.

Fits are cached by content, so a rerun with the same inputs and settings only
re-reads blobs. Everything that is written goes into the manifest together
with its sha256.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from time import perf_counter

import numpy as np

from risknet._utils import dumps, file_sha256, sha256
from risknet.caching import cache_key, get_cached, set_cache
from risknet.configs import RunConfig
from risknet.copula_dcc import CorrelationCube, DccFit, assemble_cube, fallback_fit, fit_pair
from risknet.exceptions import (
    ConfigException,
    ConvergenceException,
    DataException,
    DomainException,
    EstimationException,
)
from risknet.ingest import ReturnPanel, log_returns, parse_price_csv, read_labels
from risknet.logger import logger
from risknet.marginal import MarginalFit, fit_marginal
from risknet.network import SpanningTree, build_trees
from risknet.plots import export_plots
from risknet.status import EXIT_ESTIMATION_FAILURES, EXIT_OK
from risknet.topology import TopologySeries, compute_series, degree_distribution, shrinking_periods

MANIFEST = 'manifest.json'
CUBE = 'cube.json'
TOPOLOGY = 'topology.csv'
DEGREES = 'degree_distribution.json'


@dataclass
class RunManifest:
    config_hash: str
    stage: str = 'run'
    input_sha256: str | None = None
    dimensions: dict = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    marginals: dict[str, dict] = field(default_factory=dict)
    pairs: dict[str, dict] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)
    artifacts: dict[str, str] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_ESTIMATION_FAILURES if self.failures else EXIT_OK

    @property
    def content_hash(self) -> str:
        """Hash of everything but the timings; equal across reruns and across --jobs."""
        return sha256(self.config_hash, dumps(self.artifacts), dumps(self.failures))

    def add(self, path: Path, root: Path) -> None:
        self.artifacts[path.relative_to(root).as_posix()] = file_sha256(path)

    def to_dict(self) -> dict:
        return {
            'config_hash': self.config_hash,
            'stage': self.stage,
            'input_sha256': self.input_sha256,
            'dimensions': self.dimensions,
            'timings': self.timings,
            'marginals': self.marginals,
            'pairs': self.pairs,
            'summary': self.summary(),
            'failures': self.failures,
            'artifacts': self.artifacts,
            'content_hash': self.content_hash,
            'exit_code': self.exit_code,
        }

    def summary(self) -> dict:
        pairs = self.pairs.values()
        return {
            'marginal_fits': len(self.marginals),
            'marginals_converged': sum(1 for m in self.marginals.values() if m['converged']),
            'pair_fits': len(self.pairs),
            'pairs_converged': sum(1 for p in pairs if p['converged']),
            'pairs_fallback': sum(1 for p in pairs if p['fallback']),
            'pairs_effectively_gaussian': sum(1 for p in pairs if p['effectively_gaussian']),
            'pairs_cached': sum(1 for p in pairs if p['cached']),
        }

    def write(self, out: Path) -> Path:
        path = out / MANIFEST
        path.write_bytes(dumps(self.to_dict()))
        return path


class _Timer:
    def __init__(self, manifest: RunManifest, stage: str):
        self.manifest = manifest
        self.stage = stage

    def __enter__(self):
        logger.info(f'{self.stage} ...')
        self.start = perf_counter()
        return self

    def __exit__(self, *args):
        self.manifest.timings[self.stage] = round(perf_counter() - self.start, 3)


def config_hash(config: RunConfig) -> str:
    return sha256(dumps({**config.estimation_dict(), 'formats': sorted(config.formats), 'trees': config.trees}))


def _pool_map(func, tasks: list, jobs: int) -> list:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(func, tasks))
    return [func(task) for task in tasks]


def _failure(stage: str, kind: str, message: str, **where) -> dict:
    """
    One entry of manifest.failures. kind is one of
        failed         the optimizer gave up, the best point reached is used
        not_converged  the optimizer stopped early (e.g. precision loss), its fit is used
        fallback       the pair was replaced by its constant targeted correlation
        error          a period of the topology series could not be computed
    """
    return {'stage': stage, 'kind': kind, **where, 'message': message}


def _fit_marginal_task(task) -> tuple[str, dict | None, str]:
    asset, returns, marginal_config = task
    try:
        return asset, fit_marginal(returns, marginal_config).to_dict(), ''
    except ConvergenceException as e:
        if e.best is None:
            return asset, None, str(e.detail)
        try:
            fit = MarginalFit.from_params(returns, e.best, converged=False, message=str(e.detail), **{
                k: v for k, v in e.diagnostics.items() if k in ('iterations', 'gradient_norm')
            })
        except EstimationException:
            return asset, None, str(e.detail)
        return asset, {**fit.to_dict(), 'failed': True}, str(e.detail)
    except EstimationException as e:
        return asset, None, str(e.detail)


def _fit_pair_task(task) -> tuple[tuple[str, str], dict, str]:
    pair, pit_i, pit_j, copula_config = task
    try:
        return pair, fit_pair(pit_i, pit_j, copula_config).to_dict(), ''
    except (EstimationException, DomainException) as e:
        return pair, fallback_fit(pit_i, pit_j, message=str(e.detail)).to_dict(), str(e.detail)


def fit_marginals(returns: ReturnPanel, config: RunConfig, manifest: RunManifest) -> dict[str, MarginalFit]:
    cache_dir = config.resolved_cache_dir
    settings = config.marginal.dict()
    fits, keys, tasks = {}, {}, []
    for asset in returns.assets:
        series = returns.column(asset)
        if np.var(series) == 0:
            raise DataException(detail=f"Returns of '{asset}' are constant; its variance cannot be modelled")
        keys[asset] = cache_key('marginal', series, settings=settings)
        if cached := get_cached(cache_dir, keys[asset]):
            fits[asset] = MarginalFit.from_dict(cached.data, series)
            manifest.marginals[asset] = _marginal_summary(fits[asset], cached=True)
            if cached.data.get('failed'):
                manifest.failures.append(_failure('marginal', 'failed', fits[asset].message, asset=asset))
            elif not fits[asset].converged:
                manifest.failures.append(_failure('marginal', 'not_converged', fits[asset].message, asset=asset))
        else:
            tasks.append((asset, series, config.marginal))

    for asset, document, error in _pool_map(_fit_marginal_task, tasks, config.jobs):
        if document is None:
            manifest.failures.append(_failure('marginal', 'failed', error, asset=asset))
            raise EstimationException(detail=f"Marginal model for '{asset}' could not be estimated: {error}")
        set_cache(cache_dir, keys[asset], document)
        fits[asset] = MarginalFit.from_dict(document, returns.column(asset))
        manifest.marginals[asset] = _marginal_summary(fits[asset], cached=False)
        if error:
            logger.warning(f"Marginal model for '{asset}' did not converge, using the best point reached: {error}")
            manifest.failures.append(_failure('marginal', 'failed', error, asset=asset))
        elif not fits[asset].converged:
            logger.warning(f"Marginal model for '{asset}' stopped without converging: {fits[asset].message}")
            manifest.failures.append(_failure('marginal', 'not_converged', fits[asset].message, asset=asset))
    return {asset: fits[asset] for asset in returns.assets}


def _marginal_summary(fit: MarginalFit, cached: bool) -> dict:
    return {
        'converged': fit.converged,
        'degenerate': fit.degenerate,
        'loglik': fit.loglik,
        'iterations': fit.iterations,
        'cached': cached,
    }


def _pair_label(pair: tuple[str, str]) -> str:
    return f'{pair[0]}|{pair[1]}'


def fit_pairs(
        returns: ReturnPanel,
        marginals: dict[str, MarginalFit],
        config: RunConfig,
        manifest: RunManifest,
) -> dict[tuple[str, str], DccFit]:
    cache_dir = config.resolved_cache_dir
    settings = {'marginal': config.marginal.dict(), 'copula': config.copula.dict()}
    fits, keys, tasks = {}, {}, []
    for pair in combinations(returns.assets, 2):
        pit_i, pit_j = marginals[pair[0]].pit, marginals[pair[1]].pit
        keys[pair] = cache_key('pair', returns.column(pair[0]), returns.column(pair[1]), settings=settings)
        if cached := get_cached(cache_dir, keys[pair]):
            fits[pair] = DccFit.from_dict(cached.data, pit_i, pit_j)
            manifest.pairs[_pair_label(pair)] = _pair_summary(fits[pair], cached=True)
            if fits[pair].fallback:
                manifest.failures.append(_failure('pair', 'fallback', fits[pair].message, pair=list(pair)))
            elif not fits[pair].converged:
                manifest.failures.append(_failure('pair', 'not_converged', fits[pair].message, pair=list(pair)))
        else:
            tasks.append((pair, pit_i, pit_j, config.copula))

    for pair, document, error in _pool_map(_fit_pair_task, tasks, config.jobs):
        set_cache(cache_dir, keys[pair], document)
        fits[pair] = DccFit.from_dict(document, marginals[pair[0]].pit, marginals[pair[1]].pit)
        manifest.pairs[_pair_label(pair)] = _pair_summary(fits[pair], cached=False)
        if error:
            logger.warning(f'Pair ({pair[0]}, {pair[1]}) fell back to its targeted correlation: {error}')
            manifest.failures.append(_failure('pair', 'fallback', error, pair=list(pair)))
        elif not fits[pair].converged:
            logger.warning(f'Pair ({pair[0]}, {pair[1]}) stopped without converging: {fits[pair].message}')
            manifest.failures.append(_failure('pair', 'not_converged', fits[pair].message, pair=list(pair)))
    manifest.failures.sort(key=lambda f: (f['stage'], f.get('asset', ''), f.get('pair', [])))
    manifest.pairs = dict(sorted(manifest.pairs.items()))
    return fits


def _pair_summary(fit: DccFit, cached: bool) -> dict:
    return {
        'converged': fit.converged,
        'fallback': fit.fallback,
        'effectively_gaussian': fit.effectively_gaussian,
        'params': fit.params.to_dict(),
        'loglik': fit.loglik,
        'cached': cached,
    }


def _check_selection(config: RunConfig, periods) -> list[str]:
    unknown = [period for period in config.trees if period not in periods]
    if unknown:
        raise ConfigException(detail=f'Unknown periods for --trees: {", ".join(unknown)}')
    return list(config.trees)


def _write_stage_two(
        cube: CorrelationCube,
        config: RunConfig,
        manifest: RunManifest,
        series: TopologySeries | None = None,
) -> tuple[list[SpanningTree], TopologySeries]:
    out = config.out
    selected = _check_selection(config, cube.periods)
    labels = read_labels(config.labels)

    with _Timer(manifest, 'trees'):
        trees = build_trees(cube)
    if series is None:
        with _Timer(manifest, 'topology'):
            series = compute_series(trees, bootstrap=config.bootstrap, seed=config.seed, jobs=config.jobs)
        manifest.add(series.to_csv(out / TOPOLOGY), out)
    failed = [record for record in series.records if record.error]
    manifest.failures += [_failure('topology', 'error', r.error, period=r.period) for r in failed]
    manifest.dimensions.update({'trees': len(trees), 'assets': cube.size, 'periods': len(cube.periods)})

    with _Timer(manifest, 'export'):
        if 'csv' in config.formats:
            manifest.add(series.bc_mean_to_csv(out / 'bc_mean.csv'), out)
        if 'json' in config.formats:
            trees_path = out / 'trees.json'
            trees_path.write_bytes(dumps([tree.to_dict() for tree in trees]))
            manifest.add(trees_path, out)
            windows_path = out / 'shrinking_periods.json'
            windows_path.write_bytes(dumps([window.__dict__ for window in shrinking_periods(series)]))
            manifest.add(windows_path, out)
            degrees_path = out / DEGREES
            degrees_path.write_bytes(dumps({
                tree.period: [[k, p] for k, p in degree_distribution(tree.degrees()).items()] for tree in trees
            }))
            manifest.add(degrees_path, out)
        for path in export_plots(series, trees, out, selected=selected, labels=labels, formats=config.formats):
            manifest.add(path, out)
    return trees, series


def _prepare_out(config: RunConfig) -> Path:
    try:
        config.out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigException(detail=f'Cannot create output directory "{config.out}": {e}')
    return config.out


def run_full(config: RunConfig) -> RunManifest:
    if config.input is None:
        raise ConfigException(detail='An input CSV is required (--input)')
    out = _prepare_out(config)
    manifest = RunManifest(config_hash=config_hash(config))

    with _Timer(manifest, 'ingest'):
        returns = log_returns(parse_price_csv(config.input))
    manifest.input_sha256 = file_sha256(config.input)
    if len(returns.assets) < 2:
        raise DataException(detail='At least two assets are needed to build a network')
    if 'csv' in config.formats:
        manifest.add(returns.to_csv(out / 'returns.csv'), out)

    with _Timer(manifest, 'marginals'):
        marginals = fit_marginals(returns, config, manifest)
    with _Timer(manifest, 'pairs'):
        pairs = fit_pairs(returns, marginals, config, manifest)
    with _Timer(manifest, 'cube'):
        cube = assemble_cube(pairs, returns.assets, returns.periods)
    manifest.add(cube.to_json(out / CUBE), out)
    if 'json' in config.formats:
        marginals_path = out / 'marginals.json'
        marginals_path.write_bytes(dumps({asset: fit.to_dict() for asset, fit in marginals.items()}))
        manifest.add(marginals_path, out)
        pairs_path = out / 'pairs.json'
        pairs_path.write_bytes(dumps({_pair_label(pair): fit.to_dict() for pair, fit in sorted(pairs.items())}))
        manifest.add(pairs_path, out)
    manifest.dimensions['pair_fits'] = len(pairs)

    _write_stage_two(cube, config, manifest)
    manifest.write(out)
    logger.info(f'Run finished: {manifest.summary()} (exit code {manifest.exit_code})')
    return manifest


def run_indices(cube_path: str | Path, config: RunConfig) -> RunManifest:
    """Stage two only, from a cube written by an earlier run."""
    cube_path = Path(cube_path)
    if not cube_path.is_file():
        raise DataException(detail=f'"{cube_path}" is not a file')
    out = _prepare_out(config)
    manifest = RunManifest(config_hash=config_hash(config), stage='indices', input_sha256=file_sha256(cube_path))
    cube = CorrelationCube.from_json(cube_path)
    if cube_path.resolve() != (out / CUBE).resolve():
        manifest.add(cube.to_json(out / CUBE), out)
    else:
        manifest.add(out / CUBE, out)
    _write_stage_two(cube, config, manifest)
    manifest.write(out)
    return manifest


def run_export(out_dir: str | Path, config: RunConfig) -> RunManifest:
    """Re-render trees and charts from the cube and topology series of an earlier run."""
    out_dir = Path(out_dir)
    cube_path, topology_path = out_dir / CUBE, out_dir / TOPOLOGY
    for path in (cube_path, topology_path):
        if not path.is_file():
            raise DataException(detail=f'"{path}" is missing; run `risknet run` or `risknet indices` first')
    config = config.copy(update={'out': out_dir})
    manifest = RunManifest(config_hash=config_hash(config), stage='export', input_sha256=file_sha256(cube_path))
    cube = CorrelationCube.from_json(cube_path)
    series = TopologySeries.from_csv(topology_path)
    if series.periods != list(cube.periods):
        raise DataException(detail=f'"{topology_path}" does not belong to "{cube_path}"')
    manifest.add(cube_path, out_dir)
    manifest.add(topology_path, out_dir)
    _write_stage_two(cube, config, manifest, series=series)
    manifest.write(out_dir)
    return manifest


def window_medians(values: np.ndarray, mask: np.ndarray) -> tuple[float, float]:
    """Medians inside and outside a boolean window."""
    values = np.asarray(values, dtype=float)
    return float(np.median(values[mask])), float(np.median(values[~mask]))
