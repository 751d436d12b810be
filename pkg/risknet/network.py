from dataclasses import dataclass
from pathlib import Path

import numpy as np

from risknet._utils import dumps
from risknet.exceptions import DataException


@dataclass(frozen=True)
class DistanceMatrix:
    assets: tuple[str, ...]
    d: np.ndarray

    @property
    def size(self) -> int:
        return len(self.assets)


@dataclass(frozen=True)
class SpanningTree:
    assets: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]
    period: str = ''

    @property
    def size(self) -> int:
        return len(self.assets)

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def edge_set(self) -> set[tuple[int, int]]:
        return {(min(i, j), max(i, j)) for i, j, _ in self.edges}

    def degrees(self) -> np.ndarray:
        degrees = np.zeros(self.size, dtype=int)
        for i, j, _ in self.edges:
            degrees[i] += 1
            degrees[j] += 1
        return degrees

    def adjacency(self) -> list[list[int]]:
        neighbours = [[] for _ in range(self.size)]
        for i, j, _ in self.edges:
            neighbours[i].append(j)
            neighbours[j].append(i)
        return neighbours

    def to_dict(self) -> dict:
        return {
            'period': self.period,
            'nodes': list(self.assets),
            'edges': [{'a': self.assets[i], 'b': self.assets[j], 'w': w} for i, j, w in self.edges],
        }

    def to_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_bytes(dumps(self.to_dict()))
        return path

    def to_dot(self, labels: dict[str, str] | None = None) -> str:
        labels = labels or {}
        lines = [f'graph "{self.period or "mst"}" {{']
        for asset in self.assets:
            lines.append(f'  "{asset}" [label="{labels.get(asset, asset)}"];')
        for i, j, w in self.edges:
            lines.append(f'  "{self.assets[i]}" -- "{self.assets[j]}" [label="{w:.4f}"];')
        lines.append('}')
        return '\n'.join(lines) + '\n'


class UnionFind:
    """Disjoint sets with path compression and union by rank."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, node: int) -> int:
        root = node
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[node] != root:
            self.parent[node], node = root, self.parent[node]
        return root

    def union(self, a: int, b: int) -> bool:
        root_a, root_b = self.find(a), self.find(b)
        if root_a == root_b:
            return False
        if self.rank[root_a] < self.rank[root_b]:
            root_a, root_b = root_b, root_a
        self.parent[root_b] = root_a
        if self.rank[root_a] == self.rank[root_b]:
            self.rank[root_a] += 1
        return True


def to_distance(rho_slice, assets=None) -> DistanceMatrix:
    rho = np.asarray(rho_slice, dtype=float)
    size = rho.shape[0]
    assets = tuple(assets) if assets is not None else tuple(str(i) for i in range(size))
    if rho.shape != (size, size):
        raise DataException(detail=f'Correlation slice should be square, got {rho.shape}')
    outside = ~((rho >= -1.0) & (rho <= 1.0))
    np.fill_diagonal(outside, False)
    bad = np.argwhere(outside)
    if len(bad):
        i, j = bad[0]
        raise DataException(detail=f'Correlation out of [-1, 1] at ({assets[i]}, {assets[j]}): {rho[i, j]}')
    distance = np.sqrt(2.0 * (1.0 - rho))
    np.fill_diagonal(distance, 0.0)
    return DistanceMatrix(assets=assets, d=distance)


def kruskal_mst(dist: DistanceMatrix, period: str = '') -> SpanningTree:
    """Edges are taken in (weight, min index, max index) order; ties keep panel column order."""
    size = dist.size
    if size < 2:
        raise DataException(detail='A spanning tree needs at least two assets')
    rows, columns = np.triu_indices(size, k=1)
    weights = dist.d[rows, columns]
    order = np.lexsort((columns, rows, weights))
    forest = UnionFind(size)
    edges = []
    for index in order:
        i, j = int(rows[index]), int(columns[index])
        if forest.union(i, j):
            edges.append((i, j, float(weights[index])))
            if len(edges) == size - 1:
                break
    return SpanningTree(assets=dist.assets, edges=tuple(edges), period=period)


def build_trees(cube) -> list[SpanningTree]:
    return [
        kruskal_mst(to_distance(cube.slice(t), cube.assets), period=period)
        for t, period in enumerate(cube.periods)
    ]
