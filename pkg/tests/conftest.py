"""Shared fixtures and independent oracles for the test suite.

Oracles here deliberately avoid the code paths they check: connectivity uses
breadth-first search instead of the spectrum, eigenvalues come from LAPACK
instead of the package's Jacobi kernel, and quantiles come from mpmath.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from privform import (
    FormationSpec,
    NetworkScenario,
    NoiseModel,
    TopologyMask,
    WeightedGraph,
)
from privform.io import read_graph_json
from privform.seeding import generator

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def bfs_connected(n: int, edges) -> bool:
    """Combinatorial reachability check, independent of the spectral path."""
    if n <= 1:
        return True
    adj: dict[int, set[int]] = {i: set() for i in range(1, n + 1)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    seen = {1}
    frontier = [1]
    while frontier:
        node = frontier.pop()
        for nxt in adj[node]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return len(seen) == n


def random_connected_graph(
    rng: np.random.Generator,
    n: int | None = None,
    weight_range=(0.5, 2.0),
    extra_edge_prob: float = 0.3,
) -> WeightedGraph:
    """Random spanning tree plus extra edges; weights uniform in range."""
    if n is None:
        n = int(rng.integers(2, 11))
    edges = []
    order = rng.permutation(n) + 1
    for k in range(1, n):
        parent = order[rng.integers(0, k)]
        edges.append((int(order[k]), int(parent)))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if (i, j) in {tuple(sorted(e)) for e in edges}:
                continue
            if rng.random() < extra_edge_prob:
                edges.append((i, j))
    lo, hi = weight_range
    return WeightedGraph.from_edges(
        n, [(i, j, float(rng.uniform(lo, hi))) for i, j in edges]
    )


def random_scenario(case: int, seed: int = 20240) -> NetworkScenario:
    """Deterministic random connected scenario, one per case index.

    Uses gamma = 0.9 / d_max, privacy scales in [0, 3], process scales in
    [0, 1]; dimension 1 (the per-coordinate analysis is dimension-blind).
    """
    rng = generator(seed, 2, case)
    g = random_connected_graph(rng)
    n = g.n
    noise = NoiseModel(rng.uniform(0.0, 3.0, n), rng.uniform(0.0, 1.0, n))
    _, deg = _adjacency(g)
    gamma = 0.9 / float(deg.max())
    return NetworkScenario(
        graph=g,
        formation=FormationSpec.zero(n, 1),
        gamma=gamma,
        noise=noise,
        dimension=1,
    )


def _adjacency(g: WeightedGraph):
    n = g.n
    a = np.zeros((n, n))
    for (i, j), w in g.weights.items():
        a[i - 1, j - 1] = w
        a[j - 1, i - 1] = w
    return a, a.sum(axis=1)


@pytest.fixture(scope="session")
def ten_node_mask() -> TopologyMask:
    mask, _ = read_graph_json(CONFIGS / "ten_node.json")
    return mask


@pytest.fixture(scope="session")
def two_node_scenario() -> NetworkScenario:
    g = WeightedGraph.from_edges(2, [(1, 2, 1.0)])
    return NetworkScenario(
        graph=g,
        formation=FormationSpec.zero(2, 1),
        gamma=0.25,
        noise=NoiseModel([1.0, 1.0], [0.0, 0.0]),
        dimension=1,
    )
