"""Privacy-aware formation control toolkit.

Calibrates per-agent Gaussian privacy noise, computes exact and bounded
steady-state formation error over a weighted communication graph, and solves
the joint topology/privacy design program that trades privacy strength
against formation performance.
"""

from .analysis import (
    CovarianceReport,
    covariance_recursion,
    error_bound,
    error_bound_forms,
    m_matrix,
    sigma_z,
    steady_state,
)
from .codesign import (
    CodesignProblem,
    CodesignSolution,
    SolverOptions,
    constraint_values,
    objective,
    solve,
    validate_solution,
)
from .formation import (
    FormationSpec,
    NetworkState,
    SimulationResult,
    default_burn_in,
    network_error,
    simulate,
    simulate_trials,
    step_private,
)
from .graph import (
    SpectralSummary,
    TopologyMask,
    WeightedGraph,
    adjacency_and_degrees,
    is_connected,
    laplacian,
    spectral_summary,
)
from .privacy import (
    NoiseModel,
    PrivacySpec,
    check_adjacency,
    kappa,
    min_sigma,
    q_function,
    q_inverse,
    sample_privacy_noise,
)
from .scenario import NetworkScenario

__version__ = "0.1.0"

__all__ = [
    "CovarianceReport",
    "CodesignProblem",
    "CodesignSolution",
    "FormationSpec",
    "NetworkScenario",
    "NetworkState",
    "NoiseModel",
    "PrivacySpec",
    "SimulationResult",
    "SolverOptions",
    "SpectralSummary",
    "TopologyMask",
    "WeightedGraph",
    "adjacency_and_degrees",
    "check_adjacency",
    "constraint_values",
    "covariance_recursion",
    "default_burn_in",
    "error_bound",
    "error_bound_forms",
    "is_connected",
    "kappa",
    "laplacian",
    "m_matrix",
    "min_sigma",
    "network_error",
    "objective",
    "q_function",
    "q_inverse",
    "sample_privacy_noise",
    "sigma_z",
    "simulate",
    "simulate_trials",
    "solve",
    "spectral_summary",
    "steady_state",
    "step_private",
    "validate_solution",
    "__version__",
]
