"""Exact steady-state formation error and its scalar upper bound.

In each coordinate the deviation-from-agreement error evolves as
``e(k+1) = M e(k) + P z(k)`` with ``M = I - gamma*L - (1/N) 11^T`` and ``P``
the mean-removing projector, driven by step noise with covariance
``Sigma_z = gamma^2 A Sigma_v A + Sigma_n``.  Its stationary covariance is the
unique solution of the discrete Lyapunov equation ``S = Q + M S M`` with
``Q = P Sigma_z P``, and the steady-state mean square error is
``(d/N) * trace(S)``.  The scalar bound divides ``trace(Q)`` by
``1 - sigma_max(M)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConvergenceError, DisconnectedGraphError
from .graph import (
    CONNECTIVITY_TOL,
    WeightedGraph,
    adjacency_and_degrees,
    laplacian,
    laplacian_spectrum,
)
from .privacy import NoiseModel
from .scenario import NetworkScenario

__all__ = [
    "NetworkScenario",
    "CovarianceReport",
    "sigma_z",
    "m_matrix",
    "q_matrix",
    "covariance_recursion",
    "lyapunov_kron",
    "lyapunov_fixed_point",
    "lyapunov_partial_sum",
    "lyapunov_smith",
    "steady_state",
    "error_bound",
    "error_bound_forms",
    "trace_q_closed_form",
]

#: above this size the Kronecker solve (N^2 unknowns) gives way to Smith iteration
KRON_SIZE_LIMIT = 40


def sigma_z(g: WeightedGraph, gamma: float, noise: NoiseModel) -> np.ndarray:
    """Covariance of the per-step network noise, gamma^2 A Sigma_v A + Sigma_n."""
    a, _ = adjacency_and_degrees(g)
    sv = np.diag(noise.privacy_sigmas**2)
    return gamma * gamma * (a @ sv @ a) + np.diag(noise.process_sigmas**2)


def m_matrix(g: WeightedGraph, gamma: float) -> np.ndarray:
    """Error update matrix I - gamma*L - (1/N) 11^T (symmetric, annihilates ones)."""
    n = g.n
    return np.eye(n) - gamma * laplacian(g) - np.full((n, n), 1.0 / n)


def _projector(n: int) -> np.ndarray:
    return np.eye(n) - np.full((n, n), 1.0 / n)


def q_matrix(g: WeightedGraph, gamma: float, noise: NoiseModel) -> np.ndarray:
    """Projected step-noise covariance P Sigma_z P."""
    p = _projector(g.n)
    return p @ sigma_z(g, gamma, noise) @ p


def covariance_recursion(sigma_e: np.ndarray, m: np.ndarray, q: np.ndarray) -> np.ndarray:
    """One exact step of the error-covariance recursion: M S M + Q."""
    return m @ sigma_e @ m + q


def lyapunov_kron(m: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Direct solve of S = Q + M S M via Kronecker vectorization."""
    n = m.shape[0]
    lhs = np.eye(n * n) - np.kron(m, m)
    s = np.linalg.solve(lhs, q.reshape(-1)).reshape(n, n)
    return 0.5 * (s + s.T)


def lyapunov_fixed_point(
    m: np.ndarray,
    q: np.ndarray,
    tol: float = 1e-13,
    max_iter: int = 500_000,
) -> np.ndarray:
    """Iterate S <- M S M + Q from zero until the update stalls below tol."""
    s = np.zeros_like(q)
    scale = max(1.0, float(np.linalg.norm(q)))
    delta = np.inf
    for _ in range(max_iter):
        nxt = covariance_recursion(s, m, q)
        delta = float(np.linalg.norm(nxt - s))
        s = nxt
        if delta <= tol * max(scale, float(np.linalg.norm(s))):
            return s
    raise ConvergenceError("fixed-point Lyapunov iteration stalled", residual=delta)


def lyapunov_partial_sum(m: np.ndarray, q: np.ndarray, terms: int) -> np.ndarray:
    """Truncated series sum_{i<terms} M^i Q M^i, accumulated term by term."""
    if terms < 1:
        raise ValueError("need at least one term")
    total = q.copy()
    term = q
    for _ in range(terms - 1):
        term = m @ term @ m
        total += term
    return total


def lyapunov_smith(
    m: np.ndarray,
    q: np.ndarray,
    tol: float = 1e-14,
    max_iter: int = 200,
) -> np.ndarray:
    """Smith squaring iteration: S <- S + M_k S M_k with M_k <- M_k^2."""
    s = q.copy()
    mk = m.copy()
    scale = max(1.0, float(np.linalg.norm(q)))
    for _ in range(max_iter):
        nxt = s + mk @ s @ mk
        mk = mk @ mk
        delta = float(np.linalg.norm(nxt - s))
        s = nxt
        if delta <= tol * max(scale, float(np.linalg.norm(s))):
            return s
    raise ConvergenceError("Smith iteration stalled", residual=delta)


def trace_q_closed_form(g: WeightedGraph, gamma: float, noise: NoiseModel) -> float:
    """trace(Q) without forming matrices.

    Equals gamma^2 * sum_i (sum_j w_ij^2 - deg_i^2/N) sigma_i^2
    plus (1 - 1/N) * sum_i s_i^2.
    """
    a, deg = adjacency_and_degrees(g)
    n = g.n
    coeff = (a**2).sum(axis=1) - deg**2 / n
    privacy_term = gamma * gamma * float(coeff @ noise.privacy_sigmas**2)
    process_term = (1.0 - 1.0 / n) * float(np.sum(noise.process_sigmas**2))
    return privacy_term + process_term


def _sigma_max_m(eigenvalues: np.ndarray, gamma: float) -> float:
    """Max singular value of M from the Laplacian spectrum: max_i>=2 |1 - gamma*l_i|."""
    modes = np.clip(eigenvalues[1:], 0.0, None)
    return float(np.max(np.abs(1.0 - gamma * modes)))


def error_bound_forms(scenario: NetworkScenario) -> dict[str, float]:
    """Scalar bound on the steady-state error, in both algebraic forms.

    ``trace_form`` is (d/N) * trace(Q) / (1 - sigma_max(M)^2), the inequality
    the analysis actually certifies.  ``lambda2_form`` rewrites the
    denominator through lambda2 and drops a 1/gamma factor on the process
    noise term; it is reported for comparison only and can differ whenever
    gamma != 1 and process noise is present, or when the largest Laplacian
    mode dominates the contraction.
    """
    g = scenario.graph
    vals, _ = laplacian_spectrum(g)
    lam2 = float(vals[1])
    if lam2 <= CONNECTIVITY_TOL:
        raise DisconnectedGraphError("error bound requires a connected graph")
    n, d, gamma = g.n, scenario.dimension, scenario.gamma
    smax = _sigma_max_m(vals, gamma)
    denom = 1.0 - smax * smax
    if denom <= 0.0:
        raise ConvergenceError(
            "contraction factor is not below one; no stationary error exists",
            residual=smax,
        )
    trace_form = (d / n) * trace_q_closed_form(g, gamma, scenario.noise) / denom

    a, deg = adjacency_and_degrees(g)
    coeff = (a**2).sum(axis=1) - deg**2 / n
    numer = gamma * d * float(coeff @ scenario.noise.privacy_sigmas**2) + (
        1.0 - 1.0 / n
    ) * float(np.sum(scenario.noise.process_sigmas**2))
    lambda2_form = numer / (n * lam2 * (2.0 - gamma * lam2))
    return {"trace_form": trace_form, "lambda2_form": lambda2_form}


def error_bound(scenario: NetworkScenario) -> float:
    """The certified scalar bound (trace form) on the steady-state error."""
    return error_bound_forms(scenario)["trace_form"]


@dataclass(frozen=True)
class CovarianceReport:
    """Steady-state covariance, exact error, bound, and spectral diagnostics."""

    sigma_z: np.ndarray
    m: np.ndarray
    sigma_inf: np.ndarray
    e_ss_exact: float
    e_ss_bound: float
    e_ss_bound_lambda2_form: float
    sigma_max_m: float
    lambda2: float
    eigenvalues: np.ndarray
    degenerate_fiedler: bool
    lyapunov_residual: float
    method: str
    n: int
    dimension: int
    gamma: float
    extras: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.sigma_z, self.m, self.sigma_inf, self.eigenvalues):
            arr.setflags(write=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "dimension": self.dimension,
            "gamma": self.gamma,
            "e_ss_exact": self.e_ss_exact,
            "e_ss_bound": self.e_ss_bound,
            "e_ss_bound_lambda2_form": self.e_ss_bound_lambda2_form,
            "sigma_max_m": self.sigma_max_m,
            "lambda2": self.lambda2,
            "eigenvalues": self.eigenvalues.tolist(),
            "degenerate_fiedler": self.degenerate_fiedler,
            "lyapunov_residual": self.lyapunov_residual,
            "method": self.method,
            "sigma_z": self.sigma_z.tolist(),
            "m": self.m.tolist(),
            "sigma_inf": self.sigma_inf.tolist(),
        }


def steady_state(scenario: NetworkScenario, method: str = "auto") -> CovarianceReport:
    """Solve the stationary error covariance and package the diagnostics.

    ``method`` is "auto" (Kronecker direct solve up to N=40, Smith squaring
    beyond), or explicitly "kron", "smith", or "fixed_point".
    """
    g = scenario.graph
    n, d = g.n, scenario.dimension
    vals, _ = laplacian_spectrum(g)
    lam2 = float(vals[1])
    if lam2 <= CONNECTIVITY_TOL:
        raise DisconnectedGraphError(
            "steady-state covariance requires a connected graph"
        )
    m = m_matrix(g, scenario.gamma)
    sz = sigma_z(g, scenario.gamma, scenario.noise)
    p = _projector(n)
    q = p @ sz @ p

    if method == "auto":
        method = "kron" if n <= KRON_SIZE_LIMIT else "smith"
    if method == "kron":
        s_inf = lyapunov_kron(m, q)
    elif method == "smith":
        s_inf = lyapunov_smith(m, q)
    elif method == "fixed_point":
        s_inf = lyapunov_fixed_point(m, q)
    else:
        raise ValueError(f"unknown method {method!r}")

    residual = float(np.linalg.norm(s_inf - covariance_recursion(s_inf, m, q)))
    scale = max(1.0, float(np.linalg.norm(q)))
    if residual > 1e-10 * scale:
        raise ConvergenceError("Lyapunov solution residual too large", residual=residual)

    forms = error_bound_forms(scenario)
    degenerate = bool(n > 2 and vals[2] - vals[1] < CONNECTIVITY_TOL)
    return CovarianceReport(
        sigma_z=sz,
        m=m,
        sigma_inf=s_inf,
        e_ss_exact=(d / n) * float(np.trace(s_inf)),
        e_ss_bound=forms["trace_form"],
        e_ss_bound_lambda2_form=forms["lambda2_form"],
        sigma_max_m=_sigma_max_m(vals, scenario.gamma),
        lambda2=lam2,
        eigenvalues=vals.copy(),
        degenerate_fiedler=degenerate,
        lyapunov_residual=residual,
        method=method,
        n=n,
        dimension=d,
        gamma=scenario.gamma,
    )
