import networkx as nx
import numpy as np
import pytest

from risknet.copula_dcc import CorrelationCube
from risknet.exceptions import DataException
from risknet.network import SpanningTree, build_trees
from risknet.topology import (
    TopologySeries,
    _ks_distance,
    average_path_length,
    betweenness_centrality,
    compute_record,
    compute_series,
    degree_distribution,
    fit_power_law,
    max_degree,
    raw_betweenness,
    select_reference_assets,
    shrinking_periods,
)


def make_tree(edges, size: int, period: str = 'p') -> SpanningTree:
    return SpanningTree(
        assets=tuple(f'A{i:02d}' for i in range(size)),
        edges=tuple((i, j, 1.0) for i, j in edges),
        period=period,
    )


def star(size: int, center: int = 0, period: str = 'p') -> SpanningTree:
    return make_tree([(center, i) for i in range(size) if i != center], size, period)


def path(size: int, period: str = 'p') -> SpanningTree:
    return make_tree([(i, i + 1) for i in range(size - 1)], size, period)


def random_tree(size: int, rng) -> SpanningTree:
    return make_tree([(int(rng.integers(0, i)), i) for i in range(1, size)], size)


def to_graph(tree: SpanningTree) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(tree.size))
    graph.add_edges_from((i, j) for i, j, _ in tree.edges)
    return graph


def test_star_indices():
    tree = star(28)
    assert average_path_length(tree) == pytest.approx(54 / 28, abs=1e-12)
    assert max_degree(tree) == 27
    bc = betweenness_centrality(tree)
    assert bc[0] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(bc[1:], 0.0)


def test_path_indices():
    bc = betweenness_centrality(path(4))
    np.testing.assert_allclose(bc, [0.0, 2 / 3, 2 / 3, 0.0], atol=1e-12)
    assert average_path_length(path(3)) == pytest.approx(4 / 3, abs=1e-12)
    assert average_path_length(path(4)) == pytest.approx(20 / 12, abs=1e-12)


def test_small_trees():
    two = path(2)
    assert average_path_length(two) == 1.0
    np.testing.assert_array_equal(betweenness_centrality(two), [0.0, 0.0])
    assert max_degree(two) == 1


def test_disconnected_edge_list_is_rejected():
    with pytest.raises(DataException):
        average_path_length(make_tree([(0, 1), (0, 1), (2, 3)], 4))


def bfs_average_path_length(tree: SpanningTree) -> float:
    """Mean hop distance over all pairs, one breadth-first search per node."""
    neighbours = tree.adjacency()
    total = 0
    for source in range(tree.size):
        distance = {source: 0}
        frontier = [source]
        while frontier:
            following = []
            for v in frontier:
                for w in neighbours[v]:
                    if w not in distance:
                        distance[w] = distance[v] + 1
                        following.append(w)
            frontier = following
        total += sum(distance.values())
    return total / (tree.size * (tree.size - 1))


def test_random_trees_against_graph_oracles(rng):
    for _ in range(100):
        size = int(rng.integers(3, 30))
        tree = random_tree(size, rng)
        graph = to_graph(tree)
        apl = average_path_length(tree)
        assert apl == pytest.approx(bfs_average_path_length(tree), abs=1e-12)
        assert apl == pytest.approx(nx.average_shortest_path_length(graph), abs=1e-12)
        expected_bc = nx.betweenness_centrality(graph, normalized=True)
        np.testing.assert_allclose(betweenness_centrality(tree), [expected_bc[i] for i in range(size)], atol=1e-12)
        assert tree.degrees().sum() == 2 * (size - 1)


def test_betweenness_counts_path_interiors(rng):
    tree = random_tree(12, rng)
    lengths = dict(nx.all_pairs_shortest_path_length(to_graph(tree)))
    interiors = sum(lengths[u][w] - 1 for u in range(12) for w in range(u + 1, 12))
    assert raw_betweenness(tree).sum() == interiors


def test_degree_distribution():
    assert degree_distribution([1, 1, 2, 4]) == {1: 0.5, 2: 0.25, 4: 0.25}


def test_power_law_rejects_bad_input():
    with pytest.raises(DataException):
        fit_power_law([])
    with pytest.raises(DataException):
        fit_power_law([0, 1, 2])


def test_power_law_without_variation_is_flagged():
    fit = fit_power_law(np.ones(28, dtype=int), bootstrap=100, rng=np.random.default_rng(0))
    assert not fit.alpha_valid
    assert np.isnan(fit.alpha) and np.isnan(fit.pvalue)


def test_power_law_on_a_star():
    degrees = star(28).degrees()
    first = fit_power_law(degrees, bootstrap=200, rng=np.random.default_rng(4))
    second = fit_power_law(degrees, bootstrap=200, rng=np.random.default_rng(4))
    assert first == second
    assert first.alpha_valid
    assert 1.01 < first.alpha < 10.0
    assert 0.0 <= first.pvalue <= 1.0
    assert first.n == 28
    assert 0 < first.replicates <= 200


def test_power_law_skips_bootstrap_when_asked():
    fit = fit_power_law(path(10).degrees(), bootstrap=0)
    assert fit.alpha_valid
    assert np.isnan(fit.pvalue)


def test_power_law_recovers_exponent():
    sample = np.random.default_rng(21).zipf(2.5, 5000)
    fit = fit_power_law(sample, bootstrap=0)
    assert 2.4 < fit.alpha < 2.6


def test_ks_distance_against_dense_support(rng):
    from scipy.special import zeta

    for alpha in (1.5, 2.2, 3.0):
        sample = rng.zipf(alpha, 300)
        sample = sample[sample < 5000]
        support = np.arange(1, sample.max() + 1)
        empirical = np.cumsum(np.bincount(sample, minlength=support[-1] + 1)[1:]) / len(sample)
        model = 1.0 - zeta(alpha, support + 1) / zeta(alpha, 1)
        assert _ks_distance(sample, alpha) == pytest.approx(np.max(np.abs(empirical - model)), abs=1e-12)
    assert _ks_distance(np.array([3, 3, 5]), 2.0) == pytest.approx(1.25 / zeta(2.0, 1), abs=1e-12)


def test_record_and_series_on_known_trees():
    trees = [star(10, period='p1'), path(10, period='p2'), star(10, center=3, period='p3')]
    series = compute_series(trees, bootstrap=50, seed=9)
    assert series.periods == ['p1', 'p2', 'p3']
    np.testing.assert_allclose(series.apl, [18 / 10, 11 / 3, 18 / 10], atol=1e-12)
    np.testing.assert_array_equal(series.max_degree, [9, 2, 9])
    assert series.bc_matrix.shape == (3, 10)
    assert series.bc_mean[0] == pytest.approx(1 / 3 + series.bc_matrix[1, 0] / 3)
    again = compute_series(trees, bootstrap=50, seed=9)
    assert [r.pvalue for r in again.records] == [r.pvalue for r in series.records]


def test_series_is_the_same_for_any_worker_count():
    trees = [star(8, period='a'), path(8, period='b'), star(8, center=5, period='c')]
    single = compute_series(trees, bootstrap=30, seed=1, jobs=1)
    pooled = compute_series(trees, bootstrap=30, seed=1, jobs=2)
    assert [r.alpha for r in pooled.records] == [r.alpha for r in single.records]
    assert [r.pvalue for r in pooled.records] == [r.pvalue for r in single.records]
    np.testing.assert_array_equal(pooled.bc_matrix, single.bc_matrix)


def test_failing_period_is_flagged_not_fatal():
    broken = make_tree([(0, 1), (0, 1)], 3, period='bad')
    record = compute_record(broken, 0, bootstrap=10)
    assert record.error
    assert np.isnan(record.apl)
    with pytest.raises(DataException):
        compute_series([])


def test_series_csv(tmp_path):
    series = compute_series([star(5, period='2003-01-10'), path(5, period='2003-01-17')], bootstrap=20)
    again = TopologySeries.from_csv(series.to_csv(tmp_path / 'topology.csv'))
    assert again.assets == series.assets
    assert again.periods == series.periods
    np.testing.assert_array_equal(again.bc_matrix, series.bc_matrix)
    np.testing.assert_array_equal(again.apl, series.apl)
    header = (tmp_path / 'topology.csv').read_text().splitlines()[0]
    assert header == 'period,apl,max_degree,alpha,pvalue,alpha_valid,n,error,A00,A01,A02,A03,A04'
    assert all(record.error == '' for record in again.records)


def test_series_csv_keeps_error_flags(tmp_path):
    records = (
        compute_record(star(4, period='good'), 0, bootstrap=0),
        compute_record(make_tree([(0, 1), (0, 1), (2, 3)], 4, period='bad'), 1, bootstrap=0),
    )
    series = TopologySeries(assets=tuple(f'A{i:02d}' for i in range(4)), records=records)
    again = TopologySeries.from_csv(series.to_csv(tmp_path / 'topology.csv'))
    assert again.records[0].error == ''
    assert again.records[1].error == records[1].error != ''
    assert np.isnan(again.apl[1])


def test_shrinking_periods():
    trees = [path(6, 'p1'), path(6, 'p2'), star(6, period='p3'), star(6, period='p4'), path(6, 'p5'), star(6, period='p6')]
    windows = shrinking_periods(compute_series(trees, bootstrap=0))
    assert [(w.start, w.end, w.length) for w in windows] == [('p3', 'p4', 2), ('p6', 'p6', 1)]


def test_reference_assets():
    trees = [star(6, center=2, period='p1'), path(6, 'p2')]
    picked = select_reference_assets(compute_series(trees, bootstrap=0))
    assert picked[0] == 'A02'
    assert len(picked) == 5
    assert len(set(picked)) == 5


def test_golden_power_law_on_a_star(golden):
    fit = fit_power_law(star(28).degrees(), bootstrap=0)
    golden('star_power_law', {'alpha': fit.alpha, 'alpha_valid': fit.alpha_valid, 'ks': fit.ks, 'n': fit.n}, rel=1e-7)


def test_golden_series_on_closed_form_correlations(golden):
    size, length = 6, 50
    t = np.arange(length)[:, None, None]
    i = np.arange(size)[None, :, None]
    j = np.arange(size)[None, None, :]
    rho = 0.95 * np.sin(0.31 * (t + 1) * (i + 1) + 0.17 * (j + 1) ** 2 + 0.5 * i * j)
    upper = np.triu(np.ones((size, size), dtype=bool), k=1)
    rho = np.where(upper, rho, np.swapaxes(rho, 1, 2))
    rho[:, np.arange(size), np.arange(size)] = 1.0
    cube = CorrelationCube(
        assets=tuple(f'S{k}' for k in range(size)), periods=tuple(f'p{k:02d}' for k in range(length)), rho=rho,
    )
    series = compute_series(build_trees(cube), bootstrap=0)
    golden('topology_series', {
        'alpha': [r.alpha for r in series.records],
        'alpha_valid': [r.alpha_valid for r in series.records],
        'apl': series.apl.tolist(),
        'bc': series.bc_matrix.tolist(),
        'ks': [r.ks for r in series.records],
        'max_degree': series.max_degree.tolist(),
    }, rel=1e-7)


@pytest.mark.slow
def test_bootstrap_does_not_reject_a_true_power_law():
    accepted = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        fit = fit_power_law(rng.zipf(2.5, 5000), bootstrap=200, rng=rng)
        assert 2.4 < fit.alpha < 2.6
        accepted += fit.pvalue > 0.1
    assert accepted >= 45
