"""Private formation-control protocol: stepping, simulation, and error metrics.

Each agent privatizes its own shifted state once per step and broadcasts the
same noisy value to all neighbors; receivers fold the noisy messages into the
consensus-style update.  Working in shifted coordinates (state minus the
agent's formation reference point) turns formation keeping into agreement on
a common point, so the network-level step is linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import DisconnectedGraphError, UnstableGammaError
from .graph import (
    CONNECTIVITY_TOL,
    Edge,
    TopologyMask,
    WeightedGraph,
    adjacency_and_degrees,
    laplacian,
    laplacian_spectrum,
    max_degree,
)
from .kernels import simulate_chain
from .privacy import NoiseModel
from .seeding import DOMAIN_SIMULATION, generator

if TYPE_CHECKING:
    from .scenario import NetworkScenario

#: transient is considered decayed once the contraction factor drops below
#: this; the default burn-in doubles that step count.
BURN_IN_DECAY = 1e-3

_BLOCK_STEPS = 4096


def check_stability(graph: WeightedGraph, gamma: float, allow_spectral: bool) -> None:
    """Raise UnstableGammaError when the step size is too large for the graph.

    The default precondition ``gamma * d_max < 1`` keeps the step matrix
    doubly stochastic; ``allow_spectral`` relaxes it to the spectral condition
    ``gamma * lambda_max < 2``.
    """
    dmax = max_degree(graph)
    if gamma * dmax < 1.0:
        return
    if allow_spectral:
        vals, _ = laplacian_spectrum(graph)
        lambda_max = float(vals[-1])
        if gamma * lambda_max < 2.0:
            return
        raise UnstableGammaError(
            f"gamma * lambda_max = {gamma * lambda_max:.6g} >= 2 "
            "(spectral stability violated)"
        )
    raise UnstableGammaError(
        f"gamma * d_max = {gamma * dmax:.6g} >= 1; reduce gamma or set "
        "allow_spectral_stability to fall back to gamma * lambda_max < 2"
    )


@dataclass(frozen=True)
class FormationSpec:
    """Desired relative offsets between neighbors, with a feasibility witness.

    ``reference_points`` is any concrete placement realizing the offsets
    (offset of edge (i, j) equals p_j - p_i); storing it makes consistency
    checkable at construction and pins the formation's translation for
    exports.
    """

    dimension: int
    offsets: dict[tuple[int, int], np.ndarray]
    reference_points: np.ndarray

    def __init__(
        self,
        dimension: int,
        offsets: dict[tuple[int, int], np.ndarray],
        reference_points,
    ):
        if dimension < 1:
            raise ValueError("dimension must be at least 1")
        points = np.asarray(reference_points, dtype=float).copy()
        if points.ndim != 2 or points.shape[1] != dimension:
            raise ValueError("reference points must have shape (N, dimension)")
        n = points.shape[0]
        clean: dict[tuple[int, int], np.ndarray] = {}
        for (i, j), delta in offsets.items():
            if not (1 <= i <= n and 1 <= j <= n) or i == j:
                raise ValueError(f"offset key ({i},{j}) out of range")
            vec = np.asarray(delta, dtype=float).copy()
            if vec.shape != (dimension,):
                raise ValueError(f"offset ({i},{j}) must be a length-{dimension} vector")
            vec.setflags(write=False)
            clean[(int(i), int(j))] = vec
        for (i, j), vec in clean.items():
            back = clean.get((j, i))
            if back is None or not np.allclose(vec, -back, atol=1e-12, rtol=0.0):
                raise ValueError(f"offsets must satisfy delta({i},{j}) = -delta({j},{i})")
            if not np.allclose(points[j - 1] - points[i - 1], vec, atol=1e-9, rtol=0.0):
                raise ValueError(
                    f"offset ({i},{j}) inconsistent with the reference placement"
                )
        points.setflags(write=False)
        object.__setattr__(self, "dimension", int(dimension))
        object.__setattr__(self, "offsets", clean)
        object.__setattr__(self, "reference_points", points)

    @classmethod
    def from_reference_points(
        cls, edges: Iterable[Edge] | TopologyMask, points
    ) -> "FormationSpec":
        """Derive edge offsets from a concrete placement (always consistent)."""
        if isinstance(edges, TopologyMask):
            edges = edges.edges
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("reference points must have shape (N, dimension)")
        offsets: dict[tuple[int, int], np.ndarray] = {}
        for i, j in edges:
            delta = pts[j - 1] - pts[i - 1]
            offsets[(i, j)] = delta
            offsets[(j, i)] = -delta
        return cls(pts.shape[1], offsets, pts)

    @classmethod
    def zero(cls, n: int, dimension: int) -> "FormationSpec":
        """Pure consensus: all offsets zero, reference points at the origin."""
        return cls(dimension, {}, np.zeros((n, dimension)))

    @property
    def n(self) -> int:
        return int(self.reference_points.shape[0])


@dataclass(frozen=True)
class NetworkState:
    """Network state at one time index, in both raw and shifted coordinates."""

    time_index: int
    states: np.ndarray
    shifted_states: np.ndarray

    def __post_init__(self):
        if self.time_index < 0:
            raise ValueError("time index must be nonnegative")
        if self.states.shape != self.shifted_states.shape or self.states.ndim != 2:
            raise ValueError("states and shifted states must be matching (N, d) arrays")
        self.states.setflags(write=False)
        self.shifted_states.setflags(write=False)

    @classmethod
    def from_states(cls, time_index: int, states, spec: FormationSpec) -> "NetworkState":
        x = np.asarray(states, dtype=float).copy()
        return cls(time_index, x, x - spec.reference_points)

    @classmethod
    def from_shifted(cls, time_index: int, shifted, spec: FormationSpec) -> "NetworkState":
        # Round-trip through raw coordinates so shifted == states - p exactly.
        x = np.asarray(shifted, dtype=float) + spec.reference_points
        return cls(time_index, x, x - spec.reference_points)


@dataclass(frozen=True)
class SimulationResult:
    """One simulated trajectory plus its tail-averaged mean square error."""

    horizon: int
    error_trajectory: np.ndarray  # (horizon + 1, d, N)
    shifted_trajectory: np.ndarray  # (horizon + 1, N, d)
    empirical_mse_tail: float
    seed: int
    burn_in: int

    def __post_init__(self):
        self.error_trajectory.setflags(write=False)
        self.shifted_trajectory.setflags(write=False)


def network_error(state) -> np.ndarray:
    """Per-dimension deviation from the would-be agreement point.

    Accepts a NetworkState or an (N, d) shifted-state array; returns a (d, N)
    array whose rows are each orthogonal to the all-ones vector.
    """
    xbar = state.shifted_states if isinstance(state, NetworkState) else np.asarray(state)
    return (xbar - xbar.mean(axis=0)).T


def _draw_step_noise(
    rng, n: int, d: int, sigma: np.ndarray, s: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(rng, np.random.Generator):
        v = rng.standard_normal((n, d)) * sigma[:, None]
        w = rng.standard_normal((n, d)) * s[:, None]
        return v, w
    gens: Sequence[np.random.Generator] = rng
    if len(gens) != n:
        raise ValueError("need one generator per agent")
    v = np.empty((n, d))
    w = np.empty((n, d))
    for i, gen in enumerate(gens):
        v[i] = gen.standard_normal(d) * sigma[i]
        w[i] = gen.standard_normal(d) * s[i]
    return v, w


def step_private(
    state: NetworkState,
    g: WeightedGraph,
    spec: FormationSpec,
    noise: NoiseModel,
    gamma: float,
    rng,
    *,
    allow_spectral_stability: bool = False,
) -> NetworkState:
    """One synchronous step of the private protocol.

    Each agent draws one privacy-noise vector for the step and all of its
    neighbors receive that same privatized value; process noise is added to
    every agent's own update.  ``rng`` is either a single generator (matrix
    draws) or a sequence of per-agent generators.
    """
    check_stability(g, gamma, allow_spectral_stability)
    n, d = state.shifted_states.shape
    if g.n != n or noise.n != n or spec.n != n or spec.dimension != d:
        raise ValueError("state, graph, formation, and noise dimensions disagree")
    a, deg = adjacency_and_degrees(g)
    v, w = _draw_step_noise(rng, n, d, noise.privacy_sigmas, noise.process_sigmas)
    xbar = state.shifted_states
    nxt = xbar + gamma * (a @ (xbar + v) - deg[:, None] * xbar) + w
    return NetworkState.from_shifted(state.time_index + 1, nxt, spec)


def contraction_factor(g: WeightedGraph, gamma: float) -> float:
    """Spectral radius of the error update: max |1 - gamma*lambda_i| over i>=2."""
    vals, _ = laplacian_spectrum(g)
    modes = np.clip(vals[1:], 0.0, None)
    return float(np.max(np.abs(1.0 - gamma * modes)))


def default_burn_in(g: WeightedGraph, gamma: float) -> int:
    """Twice the step count after which the transient has decayed to 1e-3."""
    rho = contraction_factor(g, gamma)
    if rho <= 0.0:
        return 2
    if rho >= 1.0:
        raise DisconnectedGraphError(
            "transient does not decay: graph disconnected or step size unstable"
        )
    k = max(1, math.ceil(math.log(BURN_IN_DECAY) / math.log(rho)))
    while rho**k >= BURN_IN_DECAY:
        k += 1
    return 2 * k


def simulate(
    scenario: "NetworkScenario",
    horizon: int,
    seed: int,
    burn_in: int | None = None,
    *,
    trial: int = 0,
    agent_keys: Sequence[int] | None = None,
    initial_spread: float = 0.5,
) -> SimulationResult:
    """Run one trajectory of the private protocol and measure its tail error.

    Noise for agent ``i`` comes from the dedicated stream
    ``(seed, DOMAIN_SIMULATION, trial, agent_keys[i])``, independent per
    trial and per agent, and tied to the agent's key rather than its index so
    relabeled scenarios replay the same noise.  The initial shifted state is
    drawn uniformly from ``[-initial_spread, initial_spread]`` per coordinate
    (the tail error is initial-condition independent; the spread only moves
    the transient).
    """
    g = scenario.graph
    n, d = g.n, scenario.dimension
    vals, _ = laplacian_spectrum(g)
    if vals[1] <= CONNECTIVITY_TOL:
        raise DisconnectedGraphError("simulate requires a connected graph")
    if burn_in is None:
        burn_in = default_burn_in(g, scenario.gamma)
    if horizon <= burn_in:
        raise ValueError(f"horizon {horizon} must exceed burn-in {burn_in}")

    if agent_keys is None:
        agent_keys = range(n)
    streams = [generator(seed, DOMAIN_SIMULATION, trial, int(k)) for k in agent_keys]

    xbar = np.empty((n, d))
    for i, stream in enumerate(streams):
        xbar[i] = stream.uniform(-initial_spread, initial_spread, d)

    mstep = np.eye(n) - scenario.gamma * laplacian(g)
    ga = scenario.gamma * adjacency_and_degrees(g)[0]
    sigma = scenario.noise.privacy_sigmas
    s = scenario.noise.process_sigmas

    traj = np.empty((horizon + 1, n, d))
    traj[0] = xbar
    done = 0
    vblk = np.empty((_BLOCK_STEPS, n, d))
    nblk = np.empty((_BLOCK_STEPS, n, d))
    while done < horizon:
        b = min(_BLOCK_STEPS, horizon - done)
        for i, stream in enumerate(streams):
            vblk[:b, i, :] = stream.standard_normal((b, d)) * sigma[i]
            nblk[:b, i, :] = stream.standard_normal((b, d)) * s[i]
        simulate_chain(mstep, ga, xbar, vblk[:b], nblk[:b], traj[done + 1 : done + 1 + b])
        done += b

    err = np.transpose(traj - traj.mean(axis=1, keepdims=True), (0, 2, 1))
    tail = err[burn_in:]
    mse = float((tail**2).sum(axis=2).mean()) * d / n
    return SimulationResult(
        horizon=horizon,
        error_trajectory=err,
        shifted_trajectory=traj,
        empirical_mse_tail=mse,
        seed=seed,
        burn_in=burn_in,
    )


@dataclass(frozen=True)
class TrialSummary:
    """Tail errors from independent simulation trials."""

    per_trial: np.ndarray
    mean: float
    burn_in: int
    horizon: int
    seed: int
    first_trial: SimulationResult

    def __post_init__(self):
        self.per_trial.setflags(write=False)


def simulate_trials(
    scenario: "NetworkScenario",
    horizon: int,
    seed: int,
    trials: int,
    burn_in: int | None = None,
    **kwargs,
) -> TrialSummary:
    """Average the tail error over independent seeded trials.

    Trials are independent by construction (disjoint spawn keys), so they can
    run in any order or in parallel; this sequential fold is the reference.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    values = np.empty(trials)
    first: SimulationResult | None = None
    for t in range(trials):
        result = simulate(scenario, horizon, seed, burn_in, trial=t, **kwargs)
        values[t] = result.empirical_mse_tail
        if t == 0:
            first = result
        burn_in = result.burn_in
    assert first is not None
    return TrialSummary(
        per_trial=values,
        mean=float(values.mean()),
        burn_in=first.burn_in,
        horizon=horizon,
        seed=seed,
        first_trial=first,
    )
