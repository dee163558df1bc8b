"""A complete network scenario: graph, formation, step size, and noise."""

from __future__ import annotations

from dataclasses import dataclass

from .formation import FormationSpec, check_stability
from .graph import WeightedGraph
from .privacy import NoiseModel


@dataclass(frozen=True)
class NetworkScenario:
    """Everything needed to run or analyze one private formation network.

    The default stability precondition is ``gamma * d_max < 1`` (which keeps
    the step matrix doubly stochastic); setting ``allow_spectral_stability``
    relaxes it to the spectral condition ``gamma * lambda_max < 2``.
    """

    graph: WeightedGraph
    formation: FormationSpec
    gamma: float
    noise: NoiseModel
    dimension: int
    allow_spectral_stability: bool = False

    def __post_init__(self):
        n = self.graph.n
        if self.formation.n != n or self.noise.n != n:
            raise ValueError("graph, formation, and noise must agree on the agent count")
        if self.dimension != self.formation.dimension:
            raise ValueError("scenario dimension must match the formation dimension")
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        check_stability(self.graph, self.gamma, self.allow_spectral_stability)
