"""
Topological indices of the per-period spanning trees.

APL counts hops, not edge weights. Betweenness is the share of unordered
pairs of other nodes whose unique tree path runs through the node, normalized
by (k-1)(k-2)/2. The power-law exponent is the discrete maximum likelihood
estimate with x_min = 1 and its p-value comes from a parametric bootstrap of
the Kolmogorov-Smirnov distance.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats
from scipy.special import zeta

from risknet.exceptions import DataException
from risknet.ingest import FLOAT_FORMAT
from risknet.logger import logger
from risknet.network import SpanningTree

ALPHA_LOWER = 1.01
ALPHA_UPPER = 10.0
BISECTION_STEPS = 60
ZETA_STEP = 1e-6


def _subtree_sizes(tree: SpanningTree) -> tuple[list[int], list[int], list[list[int]]]:
    """Parent and subtree size of every node with node 0 as root."""
    neighbours = tree.adjacency()
    parent = [-1] * tree.size
    order = []
    seen = [False] * tree.size
    stack = [0]
    seen[0] = True
    while stack:
        node = stack.pop()
        order.append(node)
        for other in neighbours[node]:
            if not seen[other]:
                seen[other] = True
                parent[other] = node
                stack.append(other)
    if len(order) != tree.size:
        raise DataException(detail=f'Tree for period {tree.period!r} is not connected')
    sizes = [1] * tree.size
    for node in reversed(order):
        if parent[node] >= 0:
            sizes[parent[node]] += sizes[node]
    return parent, sizes, neighbours


def average_path_length(tree: SpanningTree) -> float:
    """Each edge lies on the path of s * (k - s) unordered pairs, s being the size of one side."""
    size = tree.size
    if size < 2:
        return 0.0
    parent, sizes, _ = _subtree_sizes(tree)
    total = sum(sizes[node] * (size - sizes[node]) for node in range(size) if parent[node] >= 0)
    return 2.0 * total / (size * (size - 1))


def max_degree(tree: SpanningTree) -> int:
    return int(tree.degrees().max())


def raw_betweenness(tree: SpanningTree) -> np.ndarray:
    """Number of unordered pairs {u, w} (u, w != v) whose path passes through v."""
    size = tree.size
    parent, sizes, neighbours = _subtree_sizes(tree)
    counts = np.zeros(size, dtype=np.int64)
    for node in range(size):
        components = [sizes[other] for other in neighbours[node] if parent[other] == node]
        if parent[node] >= 0:
            components.append(size - sizes[node])
        counts[node] = ((size - 1) ** 2 - sum(c * c for c in components)) // 2
    return counts


def betweenness_centrality(tree: SpanningTree) -> np.ndarray:
    size = tree.size
    if size < 3:
        return np.zeros(size)
    return raw_betweenness(tree) / ((size - 1) * (size - 2) / 2)


def degree_distribution(degrees) -> dict[int, float]:
    """P(k) = n_k / n."""
    degrees = np.asarray(degrees, dtype=int)
    values, counts = np.unique(degrees, return_counts=True)
    return {int(v): float(c) / len(degrees) for v, c in zip(values, counts)}


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    pvalue: float
    alpha_valid: bool
    n: int
    ks: float = float('nan')
    replicates: int = 0


def _expected_log(alpha):
    """E[ln X] under the zeta law, i.e. -zeta'(alpha) / zeta(alpha)."""
    alpha = np.asarray(alpha, dtype=float)
    h = ZETA_STEP * alpha
    derivative = (zeta(alpha + h, 1) - zeta(alpha - h, 1)) / (2.0 * h)
    return -derivative / zeta(alpha, 1)


def _solve_alpha(mean_logs) -> tuple[np.ndarray, np.ndarray]:
    """Bisection of the score equation on (ALPHA_LOWER, ALPHA_UPPER), vectorized over samples."""
    mean_logs = np.atleast_1d(np.asarray(mean_logs, dtype=float))
    lower = np.full_like(mean_logs, ALPHA_LOWER)
    upper = np.full_like(mean_logs, ALPHA_UPPER)
    bracketed = (_expected_log(lower) > mean_logs) & (_expected_log(upper) < mean_logs)
    for _ in range(BISECTION_STEPS):
        middle = 0.5 * (lower + upper)
        above = _expected_log(middle) > mean_logs
        lower = np.where(above, middle, lower)
        upper = np.where(above, upper, middle)
    return 0.5 * (lower + upper), bracketed


def _model_cdf(alpha: float, x: np.ndarray) -> np.ndarray:
    return 1.0 - zeta(alpha, x + 1.0) / zeta(alpha, 1)


def _ks_distance(sample: np.ndarray, alpha: float) -> float:
    """
    sup over integers x >= 1 of |S(x) - P(x)|. S is flat between observed
    values while P grows, so only the observed values and the integers just
    before them need checking.
    """
    values, counts = np.unique(sample, return_counts=True)
    empirical = np.cumsum(counts) / len(sample)
    distance = np.abs(empirical - _model_cdf(alpha, values.astype(float)))
    gaps = values[1:] - 1 > values[:-1]
    before = values[1:][gaps] - 1
    if before.size:
        distance = np.append(distance, np.abs(empirical[:-1][gaps] - _model_cdf(alpha, before.astype(float))))
    if values[0] > 1:
        distance = np.append(distance, _model_cdf(alpha, np.arange(1.0, values[0])).max())
    return float(distance.max())


def fit_power_law(degree_sequence, bootstrap: int = 1000, rng: np.random.Generator | None = None) -> PowerLawFit:
    degrees = np.asarray(degree_sequence, dtype=int)
    if degrees.size == 0:
        raise DataException(detail='Degree sequence is empty')
    if np.any(degrees < 1):
        raise DataException(detail='Degrees should be >= 1')
    size = len(degrees)
    if np.unique(degrees).size == 1:
        return PowerLawFit(alpha=float('nan'), pvalue=float('nan'), alpha_valid=False, n=size)

    alpha, bracketed = _solve_alpha(np.log(degrees).mean())
    if not bracketed[0]:
        return PowerLawFit(alpha=float('nan'), pvalue=float('nan'), alpha_valid=False, n=size)
    alpha = float(alpha[0])
    observed = _ks_distance(degrees, alpha)
    if bootstrap == 0:
        return PowerLawFit(alpha=alpha, pvalue=float('nan'), alpha_valid=True, n=size, ks=observed)

    rng = rng or np.random.default_rng()
    samples = stats.zipf.rvs(alpha, size=(bootstrap, size), random_state=rng)
    varied = np.array([np.unique(sample).size > 1 for sample in samples])
    fitted, ok = _solve_alpha(np.log(samples).mean(axis=1))
    usable = varied & ok
    if not usable.any():
        return PowerLawFit(alpha=alpha, pvalue=float('nan'), alpha_valid=False, n=size, ks=observed)
    distances = np.array([_ks_distance(sample, a) for sample, a in zip(samples[usable], fitted[usable])])
    pvalue = float(np.mean(distances >= observed))
    return PowerLawFit(alpha=alpha, pvalue=pvalue, alpha_valid=True, n=size, ks=observed, replicates=int(usable.sum()))


@dataclass(frozen=True)
class TopologyRecord:
    period: str
    apl: float
    max_degree: int
    bc: np.ndarray
    alpha: float
    pvalue: float
    alpha_valid: bool
    n: int = 0
    ks: float = float('nan')
    error: str = ''


@dataclass(frozen=True)
class TopologySeries:
    assets: tuple[str, ...]
    records: tuple[TopologyRecord, ...] = field(default_factory=tuple)

    @property
    def periods(self) -> list[str]:
        return [record.period for record in self.records]

    @property
    def bc_matrix(self) -> np.ndarray:
        return np.vstack([record.bc for record in self.records])

    @property
    def bc_mean(self) -> np.ndarray:
        return self.bc_matrix.mean(axis=0)

    @property
    def apl(self) -> np.ndarray:
        return np.array([record.apl for record in self.records])

    @property
    def max_degree(self) -> np.ndarray:
        return np.array([record.max_degree for record in self.records])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({
            'period': self.periods,
            'apl': self.apl,
            'max_degree': self.max_degree,
            'alpha': [record.alpha for record in self.records],
            'pvalue': [record.pvalue for record in self.records],
            'alpha_valid': [record.alpha_valid for record in self.records],
            'n': [record.n for record in self.records],
            'error': [record.error for record in self.records],
        })
        bc = pd.DataFrame(self.bc_matrix, columns=list(self.assets))
        return pd.concat([frame, bc], axis=1)

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        return path

    def bc_mean_to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        frame = pd.DataFrame({'asset': list(self.assets), 'mean_bc': self.bc_mean})
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        return path

    @classmethod
    def from_csv(cls, path: str | Path) -> 'TopologySeries':
        frame = pd.read_csv(path, dtype={'period': str, 'error': str})
        frame['error'] = frame['error'].fillna('')
        fixed = ['period', 'apl', 'max_degree', 'alpha', 'pvalue', 'alpha_valid', 'n', 'error']
        assets = tuple(c for c in frame.columns if c not in fixed)
        records = tuple(
            TopologyRecord(
                period=str(row['period']),
                apl=float(row['apl']),
                max_degree=int(row['max_degree']),
                bc=np.array([row[a] for a in assets], dtype=float),
                alpha=float(row['alpha']),
                pvalue=float(row['pvalue']),
                alpha_valid=bool(row['alpha_valid']),
                n=int(row['n']),
                error=str(row['error']),
            )
            for _, row in frame.iterrows()
        )
        return cls(assets=assets, records=records)


def period_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def compute_record(tree: SpanningTree, index: int, bootstrap: int = 1000, seed: int = 0) -> TopologyRecord:
    try:
        power_law = fit_power_law(tree.degrees(), bootstrap=bootstrap, rng=period_rng(seed, index))
        return TopologyRecord(
            period=tree.period,
            apl=average_path_length(tree),
            max_degree=max_degree(tree),
            bc=betweenness_centrality(tree),
            alpha=power_law.alpha,
            pvalue=power_law.pvalue,
            alpha_valid=power_law.alpha_valid,
            n=power_law.n,
            ks=power_law.ks,
        )
    except Exception as e:
        logger.warning(f'Topology of period {tree.period!r} failed: {e}')
        return TopologyRecord(
            period=tree.period,
            apl=float('nan'),
            max_degree=0,
            bc=np.full(tree.size, np.nan),
            alpha=float('nan'),
            pvalue=float('nan'),
            alpha_valid=False,
            n=tree.size,
            error=str(e),
        )


def _compute_record_task(args) -> TopologyRecord:
    return compute_record(*args)


def compute_series(trees: list[SpanningTree], bootstrap: int = 1000, seed: int = 0, jobs: int = 1) -> TopologySeries:
    if not trees:
        raise DataException(detail='No trees to compute indices on')
    tasks = [(tree, index, bootstrap, seed) for index, tree in enumerate(trees)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            records = list(executor.map(_compute_record_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        records = [_compute_record_task(task) for task in tasks]
    return TopologySeries(assets=trees[0].assets, records=tuple(records))


@dataclass(frozen=True)
class Window:
    start: str
    end: str
    length: int


def shrinking_periods(series: TopologySeries) -> list[Window]:
    """Runs of periods with APL below its mean while the max degree is above its mean."""
    apl = series.apl
    degree = series.max_degree.astype(float)
    mask = (apl < np.nanmean(apl)) & (degree > np.nanmean(degree))
    windows = []
    start = None
    for index, flagged in enumerate(mask):
        if flagged and start is None:
            start = index
        if start is not None and (not flagged or index == len(mask) - 1):
            end = index if flagged else index - 1
            windows.append(Window(start=series.periods[start], end=series.periods[end], length=end - start + 1))
            start = None
    return windows


def select_reference_assets(series: TopologySeries) -> list[str]:
    """The two highest and two lowest mean-BC assets plus the one closest to the average."""
    means = series.bc_mean
    order = list(np.argsort(-means, kind='stable'))
    chosen = order[:2] + order[-2:]
    remaining = [i for i in order if i not in chosen]
    if remaining:
        chosen.append(min(remaining, key=lambda i: (abs(means[i] - means.mean()), i)))
    picked = []
    for index in chosen:
        if series.assets[index] not in picked:
            picked.append(series.assets[index])
    return picked
