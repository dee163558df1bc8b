"""Graph construction, Laplacian algebra, and spectral summaries."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privform import (
    TopologyMask,
    WeightedGraph,
    adjacency_and_degrees,
    is_connected,
    laplacian,
    spectral_summary,
)
from privform.graph import laplacian_spectrum

from conftest import bfs_connected, random_connected_graph


class TestConstruction:
    def test_self_edge_rejected(self):
        with pytest.raises(ValueError, match="self-edge"):
            TopologyMask(3, [(1, 1)])

    def test_out_of_range_index_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            TopologyMask(3, [(1, 4)])

    def test_mask_deduplicates_unordered_pairs(self):
        mask = TopologyMask(3, [(1, 2), (2, 1), (2, 3)])
        assert mask.edges == ((1, 2), (2, 3))

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError, match="negative weight"):
            WeightedGraph.from_edges(2, [(1, 2, -0.5)])

    def test_zero_weight_edges_are_removed_but_stay_in_mask(self):
        g = WeightedGraph.from_edges(3, [(1, 2, 1.0), (2, 3, 0.0)])
        assert g.edges == ((1, 2),)
        assert g.mask.edges == ((1, 2), (2, 3))

    def test_weight_outside_mask_rejected(self):
        mask = TopologyMask(3, [(1, 2)])
        with pytest.raises(ValueError, match="not in the topology mask"):
            WeightedGraph(mask, {(2, 3): 1.0})


class TestLaplacian:
    def test_single_edge(self):
        g = WeightedGraph.from_edges(2, [(1, 2, 1.0)])
        assert np.array_equal(laplacian(g), [[1.0, -1.0], [-1.0, 1.0]])

    def test_empty_graph_is_zero(self):
        g = WeightedGraph(TopologyMask(3, [(1, 2)]), {})
        assert np.array_equal(laplacian(g), np.zeros((3, 3)))

    def test_unit_path(self):
        g = WeightedGraph.from_edges(3, [(1, 2, 1.0), (2, 3, 1.0)])
        expected = [[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]
        lap = laplacian(g)
        assert np.array_equal(lap, expected)
        assert np.allclose(lap.sum(axis=1), 0.0, atol=1e-12)
        assert np.array_equal(lap, lap.T)

    def test_adjacency_and_degrees_single_edge(self):
        g = WeightedGraph.from_edges(2, [(1, 2, 2.0)])
        a, d = adjacency_and_degrees(g)
        assert np.array_equal(a, [[0.0, 2.0], [2.0, 0.0]])
        assert np.array_equal(d, [2.0, 2.0])

    def test_degrees_on_weighted_path(self):
        g = WeightedGraph.from_edges(3, [(1, 2, 1.0), (2, 3, 3.0)])
        _, d = adjacency_and_degrees(g)
        assert np.array_equal(d, [1.0, 4.0, 3.0])
        # brute force: sum of incident weights
        for i in range(1, 4):
            incident = sum(w for (a_, b_), w in g.weights.items() if i in (a_, b_))
            assert d[i - 1] == incident


class TestSpectralSummary:
    def test_complete_graph_spectrum(self):
        g = WeightedGraph.from_edges(
            4, [(i, j, 1.0) for i in range(1, 5) for j in range(i + 1, 5)]
        )
        summary = spectral_summary(g)
        # K_N has eigenvalues (0, N, ..., N); cross-checked against LAPACK
        assert np.allclose(summary.eigenvalues, [0.0, 4.0, 4.0, 4.0], atol=1e-12)
        assert np.allclose(
            summary.eigenvalues, np.linalg.eigvalsh(laplacian(g)), atol=1e-12
        )
        assert summary.degenerate_fiedler

    def test_unit_path_spectrum(self):
        g = WeightedGraph.from_edges(3, [(1, 2, 1.0), (2, 3, 1.0)])
        summary = spectral_summary(g)
        assert np.allclose(summary.eigenvalues, [0.0, 1.0, 3.0], atol=1e-12)
        assert summary.lambda2 == pytest.approx(1.0, abs=1e-12)
        assert summary.lambda_max == pytest.approx(3.0, abs=1e-12)
        assert not summary.degenerate_fiedler

    def test_disconnected_has_zero_lambda2(self):
        g = WeightedGraph.from_edges(4, [(1, 2, 1.0), (3, 4, 2.0)])
        summary = spectral_summary(g)
        assert abs(summary.lambda2) <= 1e-9
        assert abs(summary.fiedler_vector.sum()) <= 1e-9

    def test_fiedler_vector_properties(self):
        g = WeightedGraph.from_edges(3, [(1, 2, 1.0), (2, 3, 1.0)])
        v = spectral_summary(g).fiedler_vector
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
        assert abs(v.sum()) <= 1e-10
        lap = laplacian(g)
        assert np.allclose(lap @ v, 1.0 * v, atol=1e-9)


class TestConnectivity:
    def test_path_is_connected(self):
        g = WeightedGraph.from_edges(3, [(1, 2, 1.0), (2, 3, 1.0)])
        assert is_connected(g)

    def test_two_isolated_nodes(self):
        g = WeightedGraph(TopologyMask(2, [(1, 2)]), {})
        assert not is_connected(g)

    def test_ten_node_mask_with_unit_weights(self, ten_node_mask):
        g = WeightedGraph.uniform(ten_node_mask)
        assert is_connected(g)
        assert bfs_connected(g.n, g.edges)

    def test_nonpositive_tolerance_rejected(self):
        g = WeightedGraph.from_edges(2, [(1, 2, 1.0)])
        with pytest.raises(ValueError):
            is_connected(g, tol=0.0)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=120, deadline=None)
def test_spectral_connectivity_matches_bfs(case):
    """Dual implementation: lambda2 > tol must agree with BFS reachability."""
    rng = np.random.default_rng(case)
    n = int(rng.integers(2, 9))
    edges = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.random() < 0.35:
                edges.append((i, j, float(rng.uniform(0.5, 2.0))))
    g = WeightedGraph.from_edges(n, edges) if edges else WeightedGraph(
        TopologyMask(n, [(1, 2)]), {}
    )
    assert is_connected(g) == bfs_connected(g.n, g.edges)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=80, deadline=None)
def test_laplacian_invariants_on_random_graphs(case):
    rng = np.random.default_rng(case)
    g = random_connected_graph(rng)
    lap = laplacian(g)
    a, d = adjacency_and_degrees(g)
    assert np.max(np.abs(lap.sum(axis=1))) <= 1e-12
    assert np.max(np.abs(lap - (np.diag(d) - a))) <= 1e-12
    vals, vecs = laplacian_spectrum(g)
    assert vals[1] >= -1e-9
    lam_max = max(1.0, vals[-1])
    for k in range(g.n):
        assert np.linalg.norm(lap @ vecs[:, k] - vals[k] * vecs[:, k]) <= 1e-8 * lam_max
