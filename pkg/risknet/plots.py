"""
Static charts of the topology series.

SVGs are written with a fixed hash salt and no date metadata so the same
series always produces the same bytes.
"""
from pathlib import Path

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # NOQA: E402
import numpy as np  # NOQA: E402

from risknet.exceptions import ExportException  # NOQA: E402
from risknet.network import SpanningTree  # NOQA: E402
from risknet.topology import TopologySeries, select_reference_assets  # NOQA: E402

plt.rcParams['svg.hashsalt'] = 'risknet'
plt.rcParams['svg.fonttype'] = 'none'
plt.rcParams['figure.figsize'] = (10, 4)

TICKS = 6


def _period_axis(ax, periods: list[str]) -> None:
    positions = np.unique(np.linspace(0, len(periods) - 1, min(TICKS, len(periods))).round().astype(int))
    ax.set_xticks(positions)
    ax.set_xticklabels([periods[i] for i in positions], rotation=30, ha='right')
    ax.set_xlim(-0.5, len(periods) - 0.5)


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    return path


def _line_with_mean(periods: list[str], values: np.ndarray, ylabel: str, path: Path) -> Path:
    fig, ax = plt.subplots()
    x = np.arange(len(periods))
    ax.plot(x, values, color='black', linewidth=0.8, marker='.' if len(periods) == 1 else None)
    ax.axhline(np.nanmean(values), color='black', linestyle=':', linewidth=1.0, label='mean')
    ax.set_ylabel(ylabel)
    ax.legend(loc='upper right', frameon=False)
    _period_axis(ax, periods)
    return _save(fig, path)


def plot_power_law(series: TopologySeries, path: Path) -> Path:
    fig, ax = plt.subplots()
    x = np.arange(len(series.records))
    alpha = np.array([r.alpha if r.alpha_valid else np.nan for r in series.records])
    pvalue = np.array([r.pvalue for r in series.records])
    ax.plot(x, alpha, color='black', linewidth=0.8, marker='.' if len(x) == 1 else None, label='alpha')
    ax.set_ylabel('alpha')
    twin = ax.twinx()
    twin.plot(x, pvalue, color='grey', linewidth=0.6, marker='.' if len(x) == 1 else None, label='p-value')
    twin.set_ylim(0, 1)
    twin.set_ylabel('p-value')
    _period_axis(ax, series.periods)
    return _save(fig, path)


def plot_bc_mean(series: TopologySeries, path: Path, labels: dict[str, str]) -> Path:
    means = series.bc_mean
    order = np.argsort(-means, kind='stable')
    fig, ax = plt.subplots()
    ax.bar(np.arange(len(order)), means[order], color='grey')
    ax.set_xticks(np.arange(len(order)))
    ax.set_xticklabels([labels.get(series.assets[i], series.assets[i]) for i in order], rotation=90)
    ax.set_ylabel('mean BC')
    return _save(fig, path)


def plot_bc_selected(series: TopologySeries, path: Path, labels: dict[str, str]) -> Path:
    fig, ax = plt.subplots()
    x = np.arange(len(series.records))
    bc = series.bc_matrix
    for asset in select_reference_assets(series):
        column = series.assets.index(asset)
        ax.plot(x, bc[:, column], linewidth=0.8, marker='.' if len(x) == 1 else None, label=labels.get(asset, asset))
    ax.set_ylabel('BC')
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc='upper right', frameon=False, fontsize='small')
    _period_axis(ax, series.periods)
    return _save(fig, path)


def write_dot_files(trees: list[SpanningTree], outdir: Path, selected=(), labels: dict[str, str] | None = None) -> list[Path]:
    by_period = {tree.period: tree for tree in trees}
    written = []
    if not selected:
        return written
    directory = Path(outdir) / 'trees'
    directory.mkdir(parents=True, exist_ok=True)
    for period in selected:
        path = directory / f'{period}.dot'
        path.write_text(by_period[period].to_dot(labels), encoding='utf-8')
        written.append(path)
    return written


def export_plots(
        series: TopologySeries,
        trees: list[SpanningTree],
        outdir: str | Path,
        selected=(),
        labels: dict[str, str] | None = None,
        formats=('dot', 'svg'),
) -> list[Path]:
    if not series.records:
        raise ExportException(detail='Nothing to plot: the topology series is empty')
    outdir = Path(outdir)
    labels = labels or {}
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        written = []
        if 'svg' in formats:
            written += [
                _line_with_mean(series.periods, series.apl, 'APL', outdir / 'apl.svg'),
                _line_with_mean(series.periods, series.max_degree.astype(float), 'max degree', outdir / 'max_degree.svg'),
                plot_power_law(series, outdir / 'power_law.svg'),
                plot_bc_mean(series, outdir / 'bc_mean.svg', labels),
                plot_bc_selected(series, outdir / 'bc_selected.svg', labels),
            ]
        if 'dot' in formats:
            written += write_dot_files(trees, outdir, selected, labels)
    except OSError as e:
        raise ExportException(detail=f'Could not write to "{outdir}": {e}')
    return written
