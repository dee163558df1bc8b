"""Weighted undirected simple graphs and their Laplacian spectral quantities.

Graphs are stored edge-list-first with one entry per unordered pair; dense
matrices are materialized on demand (the networks here are small).  Node
indices are 1-based to match the usual agent labelling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .kernels import jacobi_eigh

Edge = tuple[int, int]

#: lambda2 above this counts as connected; also the eigenvalue-clustering
#: width used to detect a degenerate Fiedler value.
CONNECTIVITY_TOL = 1e-9


def _normalize_edge(i: int, j: int, n: int) -> Edge:
    if i == j:
        raise ValueError(f"self-edge ({i},{i}) is not allowed")
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"edge ({i},{j}) out of range for {n} agents")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class TopologyMask:
    """The set of edges a design is allowed to use, over ``n_agents`` nodes."""

    n_agents: int
    allowed_edges: frozenset[Edge]

    def __init__(self, n_agents: int, allowed_edges: Iterable[Iterable[int]]):
        if n_agents < 1:
            raise ValueError("n_agents must be positive")
        pairs = frozenset(
            _normalize_edge(int(i), int(j), n_agents) for i, j in allowed_edges
        )
        object.__setattr__(self, "n_agents", int(n_agents))
        object.__setattr__(self, "allowed_edges", pairs)

    @property
    def edges(self) -> tuple[Edge, ...]:
        """Allowed edges in sorted order."""
        return tuple(sorted(self.allowed_edges))


@dataclass(frozen=True)
class WeightedGraph:
    """A symmetrically weighted graph on a topology mask.

    All stored weights are strictly positive; passing a zero weight removes
    the entry (the edge stays available in the mask).
    """

    mask: TopologyMask
    weights: Mapping[Edge, float] = field(default_factory=dict)

    def __init__(self, mask: TopologyMask, weights: Mapping[Edge, float] | None = None):
        clean: dict[Edge, float] = {}
        n = mask.n_agents
        for (i, j), w in (weights or {}).items():
            edge = _normalize_edge(int(i), int(j), n)
            if edge not in mask.allowed_edges:
                raise ValueError(f"edge {edge} not in the topology mask")
            w = float(w)
            if w < 0.0:
                raise ValueError(f"edge {edge} has negative weight {w}")
            if w == 0.0:
                continue
            if edge in clean:
                raise ValueError(f"duplicate weight entry for edge {edge}")
            clean[edge] = w
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "weights", clean)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]]) -> "WeightedGraph":
        """Build mask and weights together from ``(i, j, w)`` triples."""
        triples = [(int(i), int(j), float(w)) for i, j, w in edges]
        mask = TopologyMask(n, [(i, j) for i, j, _ in triples])
        return cls(mask, {(i, j): w for i, j, w in triples if w != 0.0})

    @classmethod
    def uniform(cls, mask: TopologyMask, weight: float = 1.0) -> "WeightedGraph":
        return cls(mask, {e: weight for e in mask.allowed_edges})

    @property
    def n(self) -> int:
        return self.mask.n_agents

    @property
    def edges(self) -> tuple[Edge, ...]:
        """Weighted edges in sorted order."""
        return tuple(sorted(self.weights))

    def weight(self, i: int, j: int) -> float:
        return self.weights.get(_normalize_edge(i, j, self.n), 0.0)


@dataclass(frozen=True)
class SpectralSummary:
    """Sorted Laplacian spectrum plus the quantities consumers care about."""

    eigenvalues: np.ndarray
    fiedler_vector: np.ndarray
    lambda2: float
    lambda_max: float
    degenerate_fiedler: bool

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.fiedler_vector.setflags(write=False)


def adjacency_and_degrees(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Weighted adjacency matrix and weighted degree vector."""
    n = g.n
    a = np.zeros((n, n))
    for (i, j), w in g.weights.items():
        a[i - 1, j - 1] = w
        a[j - 1, i - 1] = w
    return a, a.sum(axis=1)


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Weighted Laplacian D - A; symmetric with zero row sums."""
    a, deg = adjacency_and_degrees(g)
    return np.diag(deg) - a


def max_degree(g: WeightedGraph) -> float:
    _, deg = adjacency_and_degrees(g)
    return float(deg.max()) if g.n > 0 else 0.0


def laplacian_spectrum(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvector columns of the Laplacian."""
    return jacobi_eigh(laplacian(g))


def fiedler_direction(vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Unit eigenvector for lambda2, orthogonalized against the ones vector.

    When lambda2 sits in the (numerically) zero eigenspace of a disconnected
    graph, the raw column can have a component along ones; project it out and
    fall back to later columns of the same cluster if it degenerates.
    """
    n = vecs.shape[0]
    ones = np.ones(n)
    cluster = [j for j in range(n) if abs(vals[j] - vals[1]) <= CONNECTIVITY_TOL]
    for j in sorted(cluster, key=lambda j: (j != 1, j)):
        u = vecs[:, j] - (ones @ vecs[:, j] / n) * ones
        norm = float(np.linalg.norm(u))
        if norm > 1e-6:
            u = u / norm
            k = int(np.argmax(np.abs(u)))
            if u[k] < 0.0:
                u = -u
            return u
    raise ValueError("could not isolate a Fiedler direction orthogonal to ones")


def spectral_summary(g: WeightedGraph) -> SpectralSummary:
    """Full symmetric eigendecomposition of the Laplacian, summarized."""
    if g.n < 2:
        raise ValueError("spectral summary needs at least 2 agents")
    vals, vecs = laplacian_spectrum(g)
    degenerate = bool(g.n > 2 and vals[2] - vals[1] < CONNECTIVITY_TOL)
    return SpectralSummary(
        eigenvalues=vals,
        fiedler_vector=fiedler_direction(vals, vecs),
        lambda2=float(vals[1]),
        lambda_max=float(vals[-1]),
        degenerate_fiedler=degenerate,
    )


def is_connected(g: WeightedGraph, tol: float = CONNECTIVITY_TOL) -> bool:
    """Connectivity via the algebraic-connectivity criterion lambda2 > tol."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if g.n == 1:
        return True
    return spectral_summary(g).lambda2 > tol
