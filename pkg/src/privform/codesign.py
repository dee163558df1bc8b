"""Joint design of edge weights and per-agent privacy levels.

Minimizes ``trace(L) + vartheta * sum(epsilon_i^2)`` over the weights allowed
by a topology mask and the per-agent privacy levels, subject to the certified
steady-state error bound staying under a budget, a floor on algebraic
connectivity, and per-agent privacy caps.  The solver is an augmented
Lagrangian outer loop over the two nonlinear inequality constraints with a
projected quasi-Newton (L-BFGS-B) inner loop over the box
``{w_e >= 0} x {eps_floor <= eps_i <= eps_max_i}``; the connectivity and
bound gradients chain through the Fiedler vector of the weighted Laplacian.
Multi-start with deterministic seeding handles the nonconvexity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .analysis import steady_state
from .errors import DisconnectedGraphError
from .formation import FormationSpec
from .graph import (
    CONNECTIVITY_TOL,
    Edge,
    TopologyMask,
    WeightedGraph,
)
from .kernels import jacobi_eigh
from .privacy import NoiseModel, q_inverse
from .scenario import NetworkScenario
from .seeding import DOMAIN_CODESIGN, generator

_MACH_EPS = float(np.finfo(float).eps)
_DENOM_FLOOR = 1e-16


@dataclass(frozen=True)
class CodesignProblem:
    """One instance of the topology/privacy design program."""

    mask: TopologyMask
    error_budget: float
    lambda2_min: float
    privacy_weight: float
    epsilon_max: np.ndarray
    deltas: np.ndarray
    adjacency_bounds: np.ndarray
    process_sigmas: np.ndarray
    gamma: float
    dimension: int

    def __init__(
        self,
        mask: TopologyMask,
        error_budget: float,
        lambda2_min: float,
        privacy_weight: float,
        epsilon_max,
        deltas,
        adjacency_bounds,
        process_sigmas,
        gamma: float,
        dimension: int,
    ):
        n = mask.n_agents
        eps_max = np.asarray(epsilon_max, dtype=float).copy()
        dl = np.asarray(deltas, dtype=float).copy()
        b = np.asarray(adjacency_bounds, dtype=float).copy()
        s = np.asarray(process_sigmas, dtype=float).copy()
        for name, vec in (("epsilon_max", eps_max), ("deltas", dl),
                          ("adjacency_bounds", b), ("process_sigmas", s)):
            if vec.shape != (n,):
                raise ValueError(f"{name} must be a length-{n} vector")
        if not error_budget > 0.0:
            raise ValueError("error budget must be positive")
        if not lambda2_min > 0.0:
            raise ValueError("lambda2_min must be positive")
        # A negative weight would reward weak privacy; require it positive.
        if not privacy_weight > 0.0:
            raise ValueError("privacy_weight must be positive")
        if np.any(eps_max <= 0.0):
            raise ValueError("epsilon_max entries must be positive")
        if np.any((dl <= 0.0) | (dl >= 0.5)):
            raise ValueError("deltas must lie in (0, 1/2)")
        if np.any(b <= 0.0):
            raise ValueError("adjacency bounds must be positive")
        if np.any(s < 0.0):
            raise ValueError("process noise scales must be nonnegative")
        if not gamma > 0.0:
            raise ValueError("gamma must be positive")
        if dimension < 1:
            raise ValueError("dimension must be at least 1")
        if not mask.allowed_edges:
            raise ValueError("the topology mask has no edges to design over")
        for vec in (eps_max, dl, b, s):
            vec.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "error_budget", float(error_budget))
        object.__setattr__(self, "lambda2_min", float(lambda2_min))
        object.__setattr__(self, "privacy_weight", float(privacy_weight))
        object.__setattr__(self, "epsilon_max", eps_max)
        object.__setattr__(self, "deltas", dl)
        object.__setattr__(self, "adjacency_bounds", b)
        object.__setattr__(self, "process_sigmas", s)
        object.__setattr__(self, "gamma", float(gamma))
        object.__setattr__(self, "dimension", int(dimension))

    @property
    def n(self) -> int:
        return self.mask.n_agents

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.mask.edges


@dataclass(frozen=True)
class SolverOptions:
    multi_starts: int = 5
    max_outer: int = 30
    inner_maxiter: int = 600
    inner_gtol: float = 1e-11
    tol_feas: float = 1e-6
    feas_target: float = 1e-8
    stat_tol: float = 1e-3
    epsilon_floor: float = 1e-4
    prune_threshold: float = 1e-4
    penalty_init: float = 10.0
    penalty_growth: float = 5.0
    penalty_max: float = 1e12
    extra_starts: tuple = ()


@dataclass(frozen=True)
class ConstraintValues:
    """Signed constraint values at a candidate point (<= 0 means satisfied)."""

    g_err: float
    g_lambda: float
    g_eps: np.ndarray
    bound: float
    lambda2: float
    disconnected: bool
    unstable: bool

    def __post_init__(self):
        self.g_eps.setflags(write=False)


@dataclass
class CodesignSolution:
    graph: WeightedGraph
    epsilons: np.ndarray
    objective_value: float
    constraint_residuals: dict[str, Any]
    converged: bool
    iterations: int
    stationarity: float
    feasible: bool
    status: str
    start_index: int
    seed: int
    pruned_edges: tuple[Edge, ...]
    history: tuple[dict[str, Any], ...]
    degenerate_fiedler_evals: int
    message: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.graph.n,
            "edges": [
                {"i": i, "j": j, "w": self.graph.weights[(i, j)]}
                for (i, j) in self.graph.edges
            ],
            "epsilons": self.epsilons.tolist(),
            "objective_value": self.objective_value,
            "constraint_residuals": {
                k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in self.constraint_residuals.items()
            },
            "converged": self.converged,
            "iterations": self.iterations,
            "stationarity": self.stationarity,
            "feasible": self.feasible,
            "status": self.status,
            "start_index": self.start_index,
            "seed": self.seed,
            "pruned_edges": [list(e) for e in self.pruned_edges],
            "degenerate_fiedler_evals": self.degenerate_fiedler_evals,
            "message": self.message,
        }


def objective(weights, epsilons, privacy_weight: float) -> float:
    """trace(L) + vartheta * sum(eps^2); trace(L) is twice the total edge weight."""
    w = np.asarray(weights, dtype=float)
    e = np.asarray(epsilons, dtype=float)
    return 2.0 * float(w.sum()) + privacy_weight * float(e @ e)


def _soft_extreme_modes(
    vals: np.ndarray,
    vecs: np.ndarray,
    beta: float,
    rows: np.ndarray,
    cols: np.ndarray,
) -> tuple[float, np.ndarray, float, np.ndarray]:
    """Smooth soft-min and soft-max over the nonzero Laplacian modes.

    The hard extremes lambda2 = min_{k>=2} lambda_k and lambda_max are
    nonsmooth exactly where this design problem likes to live (the optimal
    graph clusters its low eigenvalues), and near a crossing the individual
    eigenvectors rotate chaotically, which wrecks quasi-Newton line searches.
    The log-sum-exp extremes

        soft_min = lambda2 - log(sum_k exp(-beta (lambda_k - lambda2))) / beta

    (and mirrored for the max) are smooth spectral functions whose exact
    gradients are the softmax-weighted eigen-gradients (v_k[i] - v_k[j])^2,
    stable through crossings because near-degenerate modes get near-equal
    weights.  soft_min <= lambda2 and soft_max >= lambda_max, so constraints
    written on the surrogates remain sufficient for the hard originals; the
    gap is at most log(N)/beta.

    Returns (soft_min, grad_min, soft_max, grad_max); per-edge gradients.
    """
    lam = vals[1:]
    lo, hi = float(lam[0]), float(lam[-1])
    w_min = np.exp(-beta * (lam - lo))
    w_max = np.exp(beta * (lam - hi))
    soft_min = lo - math.log(float(w_min.sum())) / beta
    soft_max = hi + math.log(float(w_max.sum())) / beta
    w_min = w_min / w_min.sum()
    w_max = w_max / w_max.sum()
    diffs = vecs[rows, 1:] - vecs[cols, 1:]  # (n_edges, n-1)
    grads = diffs * diffs
    return soft_min, grads @ w_min, soft_max, grads @ w_max


class _Workspace:
    """Per-solve precomputation and counters."""

    def __init__(self, problem: CodesignProblem, options: SolverOptions):
        self.problem = problem
        self.options = options
        self.n = problem.n
        self.edges = problem.edges
        self.n_edges = len(self.edges)
        self.rows = np.array([i - 1 for i, _ in self.edges])
        self.cols = np.array([j - 1 for _, j in self.edges])
        self.k_delta = np.array([q_inverse(d) for d in problem.deltas])
        self.b = problem.adjacency_bounds
        self.s2_term = (1.0 - 1.0 / self.n) * float(
            np.sum(problem.process_sigmas**2)
        )
        self.gamma = problem.gamma
        self.scale = problem.dimension / self.n
        self.degenerate_evals = 0
        # surrogate gap log(N)/beta stays one order below the feasibility tol
        self.beta = math.log(max(self.n, 2)) / (1e-7 * max(1.0, problem.lambda2_min))

    def sigma_of_eps(self, eps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Calibrated noise scales and their derivative in epsilon."""
        k = self.k_delta
        r = np.sqrt(k * k + 2.0 * eps)
        sigma = self.b * (k + r) / (2.0 * eps)
        dsigma = self.b * (-(k * k + r * k + eps) / (2.0 * eps * eps * r))
        return sigma, dsigma

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x[: self.n_edges], x[self.n_edges :]

    def adjacency(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        a = np.zeros((self.n, self.n))
        a[self.rows, self.cols] = w
        a[self.cols, self.rows] = w
        return a, a.sum(axis=1)

    def evaluate(self, x: np.ndarray) -> dict[str, Any]:
        """Constraint values and gradients at x = [weights, epsilons].

        The solver-facing values ("g", "grads") are built on the smooth
        soft-min/soft-max surrogates of the spectrum, which upper-bound the
        hard constraint values, so driving them to zero is sufficient for the
        true constraints.  Hard values are reported alongside for feasibility
        accounting.
        """
        problem = self.problem
        w, eps = self.split(x)
        n = self.n
        a, deg = self.adjacency(w)
        lap = np.diag(deg) - a
        vals, vecs = jacobi_eigh(lap)
        lam2_raw = float(vals[1])
        lam_top_raw = float(vals[-1])
        if n > 2 and vals[2] - vals[1] < CONNECTIVITY_TOL:
            self.degenerate_evals += 1
        lam_min, d_lam_min, lam_max, d_lam_max = _soft_extreme_modes(
            vals, vecs, self.beta, self.rows, self.cols
        )

        disconnected = lam2_raw <= CONNECTIVITY_TOL

        def contraction(lo: float, hi: float, d_lo, d_hi):
            m_lo = 1.0 - self.gamma * max(lo, _MACH_EPS)
            m_hi = 1.0 - self.gamma * max(hi, _MACH_EPS)
            if abs(m_lo) >= abs(m_hi):
                sign = 1.0 if m_lo >= 0.0 else -1.0
                return abs(m_lo), (-sign * self.gamma) * d_lo
            sign = 1.0 if m_hi >= 0.0 else -1.0
            return abs(m_hi), (-sign * self.gamma) * d_hi

        zeros = np.zeros(self.n_edges)
        smax, d_smax = contraction(lam_min, lam_max, d_lam_min, d_lam_max)
        smax_hard, _ = contraction(lam2_raw, lam_top_raw, zeros, zeros)
        denom = 1.0 - smax * smax
        unstable = denom <= _DENOM_FLOOR
        denom = max(denom, _DENOM_FLOOR)
        denom_hard = max(1.0 - smax_hard * smax_hard, _DENOM_FLOOR)

        sigma, dsigma = self.sigma_of_eps(eps)
        coeff = (a**2).sum(axis=1) - deg**2 / n
        g2 = self.gamma * self.gamma
        tr_q = g2 * float(coeff @ sigma**2) + self.s2_term
        bound = self.scale * tr_q / denom
        bound_hard = self.scale * tr_q / denom_hard

        ri, ci = self.rows, self.cols
        d_trq_w = g2 * (
            (2.0 * w - 2.0 * deg[ri] / n) * sigma[ri] ** 2
            + (2.0 * w - 2.0 * deg[ci] / n) * sigma[ci] ** 2
        )
        d_trq_eps = g2 * coeff * 2.0 * sigma * dsigma
        d_bound_w = self.scale * (
            d_trq_w / denom + tr_q * 2.0 * smax * d_smax / (denom * denom)
        )
        d_bound_eps = self.scale * d_trq_eps / denom

        grad_err = np.concatenate([d_bound_w, d_bound_eps])
        grad_lambda = np.concatenate([-d_lam_min, np.zeros(n)])
        return {
            "w": w,
            "eps": eps,
            "lambda2": lam2_raw,
            "bound": bound_hard,
            "g": np.array(
                [bound - problem.error_budget, problem.lambda2_min - lam_min]
            ),
            "g_hard": np.array(
                [bound_hard - problem.error_budget, problem.lambda2_min - lam2_raw]
            ),
            "grads": np.vstack([grad_err, grad_lambda]),
            "disconnected": disconnected,
            "unstable": unstable,
        }

    def objective_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        w, eps = self.split(x)
        f = objective(w, eps, self.problem.privacy_weight)
        grad = np.concatenate(
            [np.full(self.n_edges, 2.0), 2.0 * self.problem.privacy_weight * eps]
        )
        return f, grad

    def bounds(self) -> list[tuple[float, float | None]]:
        lo_eps = self.options.epsilon_floor
        return [(0.0, None)] * self.n_edges + [
            (min(lo_eps, emax), emax) for emax in self.problem.epsilon_max
        ]


def constraint_values(problem: CodesignProblem, weights, epsilons) -> ConstraintValues:
    """Signed constraint values at a candidate (weights on problem.edges order)."""
    ws = _Workspace(problem, SolverOptions())
    w = np.asarray(weights, dtype=float)
    eps = np.asarray(epsilons, dtype=float)
    if w.shape != (ws.n_edges,):
        raise ValueError(f"expected {ws.n_edges} edge weights, got shape {w.shape}")
    if eps.shape != (problem.n,):
        raise ValueError(f"expected {problem.n} epsilons, got shape {eps.shape}")
    ev = ws.evaluate(np.concatenate([w, eps]))
    return ConstraintValues(
        g_err=float(ev["g_hard"][0]),
        g_lambda=float(ev["g_hard"][1]),
        g_eps=eps - problem.epsilon_max,
        bound=float(ev["bound"]),
        lambda2=float(ev["lambda2"]),
        disconnected=bool(ev["disconnected"]),
        unstable=bool(ev["unstable"]),
    )


def _uniform_scan(ws: _Workspace) -> tuple[float, float, float] | None:
    """Best uniform edge-weight scale at eps = eps_max.

    Returns (alpha, bound(alpha), alpha_floor) where alpha minimizes the bound
    over uniform weights on every mask edge subject to the connectivity floor
    and alpha_floor is the smallest scale meeting that floor, or None when
    even that space is empty (mask disconnected, or connectivity collides
    with the stability ceiling).
    """
    problem = ws.problem
    unit = np.ones(ws.n_edges)
    a, deg = ws.adjacency(unit)
    vals, _ = jacobi_eigh(np.diag(deg) - a)
    lam2_unit = float(vals[1])
    lam_top_unit = float(vals[-1])
    if lam2_unit <= CONNECTIVITY_TOL:
        return None
    alpha_lo = problem.lambda2_min / lam2_unit
    alpha_hi = 1.999 / (ws.gamma * lam_top_unit)
    if alpha_lo >= alpha_hi:
        return None

    eps = problem.epsilon_max.copy()

    def bound_at(alpha: float) -> float:
        ev = ws.evaluate(np.concatenate([alpha * unit, eps]))
        return float(ev["bound"])

    grid = np.geomspace(alpha_lo, alpha_hi, 160)
    values = np.array([bound_at(a_) for a_ in grid])
    k = int(np.argmin(values))
    lo = grid[max(0, k - 1)]
    hi = grid[min(len(grid) - 1, k + 1)]
    res = minimize_scalar(bound_at, bounds=(lo, hi), method="bounded")
    if res.fun < values[k]:
        return float(res.x), float(res.fun), alpha_lo
    return float(grid[k]), float(values[k]), alpha_lo


def _projected_stationarity(
    grad: np.ndarray, x: np.ndarray, bounds: list[tuple[float, float | None]]
) -> float:
    resid = grad.copy()
    for i, (lo, hi) in enumerate(bounds):
        at_lo = x[i] <= lo + 1e-12
        at_hi = hi is not None and x[i] >= hi - 1e-12
        if at_lo and resid[i] > 0.0:
            resid[i] = 0.0
        elif at_hi and resid[i] < 0.0:
            resid[i] = 0.0
    return float(np.max(np.abs(resid)))


def _restore_feasibility(ws: _Workspace, x0: np.ndarray) -> np.ndarray:
    """Drive the squared constraint violation down before the main loop."""

    def fun(x):
        ev = ws.evaluate(x)
        pos = np.maximum(ev["g"], 0.0)
        grad = 2.0 * (pos @ ev["grads"])
        return float(pos @ pos), grad

    res = minimize(
        fun,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=ws.bounds(),
        options={"maxiter": 200, "ftol": 1e-18, "gtol": 1e-12},
    )
    return res.x


@dataclass
class _StartResult:
    x: np.ndarray
    objective: float
    violation: float
    stationarity: float
    converged: bool
    outer_iterations: int
    history: list[dict[str, Any]]
    start_index: int


def _boundary_start(ws: _Workspace, alpha: float) -> np.ndarray | None:
    """Start with uniform weights at scale alpha and privacy pushed to the
    error boundary.

    At the optimum both nonlinear constraints are typically active, so a point
    with lambda2 at its floor and the bound bisected onto the budget sits in
    the right basin.  Returns None when the bound already exceeds the budget
    at the weakest privacy (the scan point is then the better seed).
    """
    problem = ws.problem
    unit = np.full(ws.n_edges, alpha)
    eps_max = problem.epsilon_max
    floor = np.minimum(ws.options.epsilon_floor, eps_max)

    def bound_for(t: float) -> float:
        eps = np.maximum(floor, t * eps_max)
        return float(ws.evaluate(np.concatenate([unit, eps]))["g"][0])

    if bound_for(1.0) > 0.0:
        return None
    if bound_for(0.0) <= 0.0:
        # even the strongest privacy fits the budget; error constraint slack
        return np.concatenate([unit, floor])
    lo, hi = 0.0, 1.0  # bound_for(lo) > 0 >= bound_for(hi)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if bound_for(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return np.concatenate([unit, np.maximum(floor, hi * eps_max)])


def _subgradient_polish(ws: _Workspace, al_fun, x: np.ndarray) -> np.ndarray:
    """Backtracking projected subgradient steps for when the quasi-Newton
    inner loop stalls on a nonsmooth kink."""
    lb = np.array([b[0] for b in ws.bounds()])
    ub = np.array([b[1] if b[1] is not None else np.inf for b in ws.bounds()])
    val, grad = al_fun(x)
    step = 1e-2 / max(1.0, float(np.max(np.abs(grad))))
    for _ in range(25):
        cand = np.clip(x - step * grad, lb, ub)
        cand_val, cand_grad = al_fun(cand)
        if cand_val < val:
            x, val, grad = cand, cand_val, cand_grad
            step *= 1.5
        else:
            step *= 0.25
            if step < 1e-16:
                break
    return x


def _solve_single_start(ws: _Workspace, x0: np.ndarray, start_index: int) -> _StartResult:
    options = ws.options
    lb = np.array([b[0] for b in ws.bounds()])
    ub = np.array(
        [b[1] if b[1] is not None else np.inf for b in ws.bounds()]
    )
    x = np.clip(x0, lb, ub)

    ev = ws.evaluate(x)
    if float(np.max(np.maximum(ev["g"], 0.0))) > options.tol_feas:
        x = _restore_feasibility(ws, x)
        ev = ws.evaluate(x)

    f0, _ = ws.objective_and_grad(x)
    # Per-constraint penalties, scaled so that trading the whole constraint
    # away never pays for the objective gain it frees up (otherwise the first
    # subproblems collapse the weights and the iterate lands in the corner
    # where the eigen-gradients carry no useful information).
    g_scale = np.array(
        [
            max(ws.problem.error_budget, 1e-3),
            max(ws.problem.lambda2_min, 1e-3),
        ]
    )
    rho = options.penalty_init * max(1.0, abs(f0)) / g_scale**2
    mu = np.zeros(2)
    history: list[dict[str, Any]] = []
    incumbent: tuple[float, np.ndarray] | None = None  # (objective, x), feasible only
    if float(np.max(np.maximum(ev["g_hard"], 0.0))) <= options.tol_feas:
        incumbent = (f0, x.copy())
    prev_viol = np.full(2, math.inf)
    converged = False
    stat = math.inf
    outer_done = 0

    def al_fun(x_):
        f, df = ws.objective_and_grad(x_)
        ev_ = ws.evaluate(x_)
        active = np.maximum(mu + rho * ev_["g"], 0.0)
        val = f + float(np.sum((active**2 - mu**2) / (2.0 * rho)))
        grad = df + active @ ev_["grads"]
        return val, grad

    for outer in range(options.max_outer):
        x_before = x.copy()
        res = minimize(
            al_fun,
            x,
            jac=True,
            method="L-BFGS-B",
            bounds=ws.bounds(),
            options={
                "maxiter": options.inner_maxiter,
                "ftol": 1e-16,
                "gtol": options.inner_gtol,
                "maxcor": 20,
            },
        )
        x = res.x
        if float(np.max(np.abs(x - x_before))) < 1e-14:
            x = _subgradient_polish(ws, al_fun, x)
        ev = ws.evaluate(x)
        g = ev["g"]
        gpos = np.maximum(g, 0.0)
        viol = float(np.max(gpos))
        viol_hard = float(np.max(np.maximum(ev["g_hard"], 0.0)))
        mu_next = np.maximum(0.0, mu + rho * g)
        f, df = ws.objective_and_grad(x)
        lag_grad = df + mu_next @ ev["grads"]
        stat = _projected_stationarity(lag_grad, x, ws.bounds())

        accepted = False
        if viol_hard <= options.tol_feas:
            if incumbent is None or f < incumbent[0]:
                incumbent = (f, x.copy())
                accepted = True
        restoration = False
        if (
            incumbent is not None
            and viol > options.tol_feas
            and viol > 10.0 * float(np.max(np.minimum(prev_viol, 1e30)))
        ):
            # the iterate drifted far from feasibility; restart the next
            # subproblem from the best feasible point with stiffer penalties
            x = incumbent[1].copy()
            restoration = True
        history.append(
            {
                "outer": outer,
                "objective": f,
                "violation": viol,
                "stationarity": stat,
                "accepted": accepted,
                "restoration": restoration,
            }
        )
        outer_done = outer + 1

        if viol <= options.feas_target and stat <= options.stat_tol:
            converged = True
            break
        grow = gpos > 0.25 * np.minimum(prev_viol, 1e30)
        grow &= gpos > options.feas_target
        rho[grow] = np.minimum(rho[grow] * options.penalty_growth, options.penalty_max)
        mu = mu_next
        prev_viol = np.minimum(prev_viol, np.maximum(gpos, options.feas_target))

    if not converged and incumbent is not None:
        f_final, _ = ws.objective_and_grad(x)
        viol_final = float(np.max(np.maximum(ws.evaluate(x)["g_hard"], 0.0)))
        if viol_final > options.tol_feas or incumbent[0] < f_final:
            x = incumbent[1]
            ev = ws.evaluate(x)
            f, df = ws.objective_and_grad(x)
            mu_next = np.maximum(0.0, mu + rho * ev["g"])
            stat = _projected_stationarity(
                df + mu_next @ ev["grads"], x, ws.bounds()
            )

    f, _ = ws.objective_and_grad(x)
    viol = float(np.max(np.maximum(ws.evaluate(x)["g_hard"], 0.0)))
    return _StartResult(
        x=x,
        objective=f,
        violation=viol,
        stationarity=stat,
        converged=converged,
        outer_iterations=outer_done,
        history=history,
        start_index=start_index,
    )


def _build_starts(
    ws: _Workspace, seed: int, alpha_star: float, alpha_floor: float
) -> list[np.ndarray]:
    problem = ws.problem
    options = ws.options
    eps_floor_vec = np.minimum(options.epsilon_floor, problem.epsilon_max)
    starts: list[np.ndarray] = []
    starts.append(np.concatenate([np.ones(ws.n_edges), problem.epsilon_max]))
    boundary = _boundary_start(ws, alpha_floor)
    if boundary is None:
        boundary = _boundary_start(ws, alpha_star)
    if boundary is not None and len(starts) < options.multi_starts:
        starts.append(boundary)
    if len(starts) < options.multi_starts:
        starts.append(
            np.concatenate([np.full(ws.n_edges, alpha_star), problem.epsilon_max])
        )
    anchor = boundary if boundary is not None else starts[-1]
    k = 0
    while len(starts) < options.multi_starts:
        rng = generator(seed, DOMAIN_CODESIGN, k)
        w = anchor[: ws.n_edges] * np.exp(rng.normal(0.0, 0.4, ws.n_edges))
        frac = rng.uniform(0.5, 2.0, problem.n)
        eps = np.clip(
            anchor[ws.n_edges :] * frac, eps_floor_vec, problem.epsilon_max
        )
        starts.append(np.concatenate([w, eps]))
        k += 1
    for extra_w, extra_eps in options.extra_starts:
        w = np.asarray(extra_w, dtype=float)
        eps = np.asarray(extra_eps, dtype=float)
        if w.shape == (ws.n_edges,) and eps.shape == (problem.n,):
            starts.append(np.concatenate([w, eps]))
    return starts


def _prune(
    ws: _Workspace, w: np.ndarray, eps: np.ndarray
) -> tuple[np.ndarray, list[Edge], list[Edge]]:
    """Zero out sub-threshold weights; roll back (largest first) if that breaks
    a constraint that held before pruning."""
    options = ws.options
    removable = [
        k for k in range(ws.n_edges) if 0.0 < w[k] < options.prune_threshold
    ]
    if not removable:
        return w, [], []
    original = w.copy()
    pruned = w.copy()
    pruned[removable] = 0.0

    def violated(wvec) -> bool:
        ev = ws.evaluate(np.concatenate([wvec, eps]))
        return bool(np.max(ev["g_hard"]) > options.tol_feas)

    rolled_back: list[Edge] = []
    if violated(pruned) and not violated(original):
        for k in sorted(removable, key=lambda k: -original[k]):
            pruned[k] = original[k]
            rolled_back.append(ws.edges[k])
            if not violated(pruned):
                break
    removed = [
        ws.edges[k] for k in removable if pruned[k] == 0.0
    ]
    return pruned, removed, rolled_back


def _infeasible_solution(
    problem: CodesignProblem, seed: int, message: str
) -> CodesignSolution:
    n_edges = len(problem.edges)
    graph = WeightedGraph(problem.mask, {})
    eps = problem.epsilon_max.copy()
    return CodesignSolution(
        graph=graph,
        epsilons=eps,
        objective_value=objective(np.zeros(n_edges), eps, problem.privacy_weight),
        constraint_residuals={"infeasible": True},
        converged=False,
        iterations=0,
        stationarity=math.inf,
        feasible=False,
        status="infeasible",
        start_index=-1,
        seed=seed,
        pruned_edges=(),
        history=(),
        degenerate_fiedler_evals=0,
        message=message,
    )


def solve(
    problem: CodesignProblem,
    options: SolverOptions | None = None,
    seed: int = 0,
) -> CodesignSolution:
    """Run the multi-start augmented-Lagrangian co-design solver.

    Returns a solution whose ``status`` is "converged", "max_iterations", or
    "infeasible"; identical problem, options, and seed give an identical
    solution.
    """
    options = options or SolverOptions()
    ws = _Workspace(problem, options)

    # Hard floor: even noiseless-privacy designs carry the process-noise term.
    noise_floor = ws.scale * ws.s2_term
    if noise_floor > problem.error_budget:
        return _infeasible_solution(
            problem,
            seed,
            "error budget below the process-noise floor "
            f"({noise_floor:.6g} > {problem.error_budget:.6g}); "
            "binding constraint: error bound",
        )

    scan = _uniform_scan(ws)
    if scan is None:
        return _infeasible_solution(
            problem,
            seed,
            "no uniform weighting of the mask meets the connectivity floor "
            "within the stable step-size range; binding constraint: connectivity",
        )
    alpha_star, best_bound, alpha_floor = scan
    if best_bound > problem.error_budget:
        return _infeasible_solution(
            problem,
            seed,
            "even the weakest allowed privacy cannot meet the error budget on "
            f"this mask (best uniform bound {best_bound:.6g} > "
            f"{problem.error_budget:.6g}); binding constraint: error bound",
        )

    results = [
        _solve_single_start(ws, x0, idx)
        for idx, x0 in enumerate(_build_starts(ws, seed, alpha_star, alpha_floor))
    ]
    feasible = [r for r in results if r.violation <= options.tol_feas]
    if feasible:
        winner = min(feasible, key=lambda r: (r.objective, r.start_index))
    else:
        winner = min(results, key=lambda r: (r.violation, r.start_index))

    w, eps = ws.split(winner.x)
    w_pruned, removed, rolled_back = _prune(ws, w, eps)
    graph = WeightedGraph(
        problem.mask,
        {edge: w_pruned[k] for k, edge in enumerate(ws.edges) if w_pruned[k] > 0.0},
    )
    cv = constraint_values(problem, w_pruned, eps)
    feasible_final = (
        cv.g_err <= options.tol_feas
        and cv.g_lambda <= options.tol_feas
        and bool(np.all(cv.g_eps <= options.tol_feas))
    )
    status = "converged" if (winner.converged and feasible_final) else "max_iterations"
    message = ""
    if rolled_back:
        message = f"pruning rolled back {len(rolled_back)} edge(s)"
    return CodesignSolution(
        graph=graph,
        epsilons=eps.copy(),
        objective_value=objective(w_pruned, eps, problem.privacy_weight),
        constraint_residuals={
            "error_bound_slack": cv.g_err,
            "lambda2_slack": cv.g_lambda,
            "eps_slacks": np.asarray(cv.g_eps).copy(),
        },
        converged=status == "converged",
        iterations=winner.outer_iterations,
        stationarity=winner.stationarity,
        feasible=feasible_final,
        status=status,
        start_index=winner.start_index,
        seed=seed,
        pruned_edges=tuple(removed),
        history=tuple(winner.history),
        degenerate_fiedler_evals=ws.degenerate_evals,
        message=message,
    )


@dataclass(frozen=True)
class SolutionValidation:
    feasible: bool
    checks: dict[str, bool]
    e_ss_exact: float
    bound: float
    lambda2: float
    g_err: float
    g_lambda: float
    eps_slack_max: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "feasible": self.feasible,
            "checks": dict(self.checks),
            "e_ss_exact": self.e_ss_exact,
            "bound": self.bound,
            "lambda2": self.lambda2,
            "g_err": self.g_err,
            "g_lambda": self.g_lambda,
            "eps_slack_max": self.eps_slack_max,
        }


def validate_solution(
    problem: CodesignProblem,
    solution: CodesignSolution,
    tol_feas: float = 1e-6,
) -> SolutionValidation:
    """Recompute every constraint from scratch at the returned point.

    Also solves the exact steady-state error and confirms it sits under the
    budget (the bound constraint is sufficient, so this must hold for any
    feasible point).
    """
    edges = problem.edges
    w = np.array([solution.graph.weights.get(e, 0.0) for e in edges])
    eps = np.asarray(solution.epsilons, dtype=float)
    cv = constraint_values(problem, w, eps)
    checks = {
        "error_bound": cv.g_err <= tol_feas,
        "connectivity": cv.g_lambda <= tol_feas,
        "privacy_caps": bool(np.all(cv.g_eps <= tol_feas)),
        "epsilons_positive": bool(np.all(eps > 0.0)),
        "objective_consistent": abs(
            objective(w, eps, problem.privacy_weight) - solution.objective_value
        )
        <= 1e-9 * max(1.0, abs(solution.objective_value)),
    }
    e_ss_exact = math.inf
    if not cv.disconnected and not cv.unstable:
        sigma = _Workspace(problem, SolverOptions()).sigma_of_eps(eps)[0]
        scenario = NetworkScenario(
            graph=solution.graph,
            formation=FormationSpec.zero(problem.n, problem.dimension),
            gamma=problem.gamma,
            noise=NoiseModel(sigma, problem.process_sigmas),
            dimension=problem.dimension,
            allow_spectral_stability=True,
        )
        try:
            report = steady_state(scenario)
            e_ss_exact = report.e_ss_exact
        except DisconnectedGraphError:
            pass
    checks["exact_error_within_budget"] = e_ss_exact <= problem.error_budget + tol_feas
    checks["exact_error_below_bound"] = e_ss_exact <= cv.bound + 1e-9
    return SolutionValidation(
        feasible=all(checks.values()),
        checks=checks,
        e_ss_exact=e_ss_exact,
        bound=cv.bound,
        lambda2=cv.lambda2,
        g_err=cv.g_err,
        g_lambda=cv.g_lambda,
        eps_slack_max=float(np.max(cv.g_eps)),
    )
