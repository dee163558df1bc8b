"""Acceptance suite: one test per shipped criterion, at stated tolerances.

Each test prints a PASS line on success (run with ``pytest -s`` to see them
on passing runs).  The random-scenario battery is generated once per session
and shared between the Lyapunov-agreement and bound-dominance criteria.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest

from privform import (
    CodesignProblem,
    FormationSpec,
    NetworkScenario,
    NoiseModel,
    SolverOptions,
    WeightedGraph,
    cli,
    kappa,
    min_sigma,
    PrivacySpec,
    q_inverse,
    simulate,
    solve,
    steady_state,
    validate_solution,
)
from privform.analysis import (
    lyapunov_fixed_point,
    lyapunov_kron,
    lyapunov_partial_sum,
    m_matrix,
    q_matrix,
)
from privform.formation import contraction_factor, default_burn_in
from privform.graph import laplacian, max_degree
from privform.seeding import generator

from conftest import random_connected_graph

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
N_SCENARIOS = 1000


def _battery_case(idx: int):
    """Random connected scenario: N in 2..10, weights in [0.5, 2],
    sigma_i in [0, 3], s_i in [0, 1], gamma = 0.9 / d_max."""
    rng = generator(777, 2, idx)
    g = random_connected_graph(rng)
    n = g.n
    noise = NoiseModel(rng.uniform(0.0, 3.0, n), rng.uniform(0.0, 1.0, n))
    gamma = 0.9 / max_degree(g)
    return g, gamma, noise


@pytest.fixture(scope="module")
def battery():
    return [_battery_case(i) for i in range(N_SCENARIOS)]


def _scenario(g, gamma, noise, d=1):
    return NetworkScenario(
        graph=g,
        formation=FormationSpec.zero(g.n, d),
        gamma=gamma,
        noise=noise,
        dimension=d,
    )


def test_criterion_1_lyapunov_solver_agreement(battery):
    worst = 0.0
    for g, gamma, noise in battery:
        m = m_matrix(g, gamma)
        q = q_matrix(g, gamma, noise)
        direct = lyapunov_kron(m, q)
        fixed = lyapunov_fixed_point(m, q)
        truncated = lyapunov_partial_sum(m, q, 10 * default_burn_in(g, gamma))
        worst = max(
            worst,
            float(np.linalg.norm(direct - fixed)),
            float(np.linalg.norm(direct - truncated)),
        )
        assert np.linalg.norm(direct - fixed) <= 1e-8
        assert np.linalg.norm(direct - truncated) <= 1e-8
    print(
        f"\nACCEPTANCE 1 Lyapunov agreement: PASS "
        f"({N_SCENARIOS} scenarios, worst Frobenius gap {worst:.2e})"
    )


def test_criterion_2_bound_dominates_exact_error(battery):
    # two-agent scenarios are exact ties, so dominance is checked at the
    # report invariant's tolerance (rounding can put a tie a few ulps over)
    violations = 0
    for g, gamma, noise in battery:
        report = steady_state(_scenario(g, gamma, noise))
        if report.e_ss_exact > report.e_ss_bound + 1e-9:
            violations += 1
    assert violations == 0

    worst_gap = 0.0
    for idx in range(50):
        rng = generator(778, 2, idx)
        g = WeightedGraph.from_edges(2, [(1, 2, float(rng.uniform(0.5, 2.0)))])
        noise = NoiseModel(rng.uniform(0.0, 3.0, 2), rng.uniform(0.0, 1.0, 2))
        report = steady_state(_scenario(g, 0.9 / max_degree(g), noise))
        gap = abs(report.e_ss_bound - report.e_ss_exact)
        worst_gap = max(worst_gap, gap / max(1.0, report.e_ss_bound))
        assert gap <= 1e-12 * max(1.0, report.e_ss_bound)
    print(
        f"\nACCEPTANCE 2 bound dominance: PASS "
        f"({N_SCENARIOS} scenarios, 0 violations; two-agent tightness {worst_gap:.2e})"
    )


def test_criterion_3_simulator_matches_analysis(ten_node_mask):
    fixtures = []
    g2 = WeightedGraph.from_edges(2, [(1, 2, 1.0)])
    fixtures.append(("N=2", _scenario(g2, 0.25, NoiseModel([1.0, 1.0], [0.0, 0.0])), 11))
    g3 = WeightedGraph.from_edges(3, [(1, 2, 1.0), (2, 3, 2.0)])
    fixtures.append(
        ("N=3", _scenario(g3, 0.2, NoiseModel([1.0, 0.5, 2.0], [0.2, 0.0, 0.5]), d=2), 12)
    )
    g5 = WeightedGraph.from_edges(
        5, [(1, 2, 1.0), (2, 3, 1.5), (3, 4, 0.8), (4, 5, 1.2), (1, 4, 0.5)]
    )
    fixtures.append(
        ("N=5", _scenario(g5, 0.25, NoiseModel([1.0, 0.3, 2.0, 0.7, 1.4], [0.1] * 5)), 13)
    )
    g10 = WeightedGraph.uniform(ten_node_mask)
    sig10 = [min_sigma(PrivacySpec(e, 0.05, 1.0)) for e in
             (0.4, 0.9, 0.55, 0.35, 0.8, 0.45, 0.7, 0.5, 0.52, 0.58)]
    fixtures.append(
        ("N=10", _scenario(g10, 0.05, NoiseModel(sig10, [0.1] * 10), d=2), 14)
    )

    lines = []
    for name, scenario, seed in fixtures:
        report = steady_state(scenario)
        burn = default_burn_in(scenario.graph, scenario.gamma)
        result = simulate(scenario, horizon=burn + 100_000, seed=seed, burn_in=burn)
        rel = abs(result.empirical_mse_tail - report.e_ss_exact) / report.e_ss_exact
        assert rel <= 0.05, (name, result.empirical_mse_tail, report.e_ss_exact)
        if name == "N=2":
            assert report.e_ss_exact == pytest.approx(1 / 24, abs=1e-14)
        lines.append(f"{name} rel={rel:.3%}")
    print("\nACCEPTANCE 3 simulator vs analysis: PASS (" + ", ".join(lines) + ")")


def test_criterion_4_mechanism_calibration():
    with mp.workdps(50):
        for delta in (0.01, 0.05, 0.1):
            oracle = float(mp.sqrt(2) * mp.erfinv(1 - 2 * mp.mpf(delta)))
            assert abs(q_inverse(delta) - oracle) <= 1e-8
        k_oracle = float(mp.sqrt(2) * mp.erfinv(1 - 2 * mp.mpf(0.05)))
    expected = (k_oracle + np.sqrt(k_oracle**2 + 2.0)) / 2.0
    assert abs(kappa(0.05, 1.0) * 1.0 - expected) <= 1e-4

    grid = np.geomspace(0.01, 10.0, 100)
    sigmas = [min_sigma(PrivacySpec(float(e), 0.05, 1.0)) for e in grid]
    assert all(b < a for a, b in zip(sigmas, sigmas[1:]))
    print("\nACCEPTANCE 4 mechanism calibration: PASS")


def test_criterion_5_contraction_identity(ten_node_mask):
    graphs = [WeightedGraph.from_edges(2, [(1, 2, 1.0)]),
              WeightedGraph.uniform(ten_node_mask)]
    for idx in range(50):
        rng = generator(779, 2, idx)
        graphs.append(random_connected_graph(rng))
    worst = 0.0
    for g in graphs:
        gamma = 0.45 / max_degree(g)
        assert gamma * max_degree(g) < 1.0
        m = m_matrix(g, gamma)
        smax = float(np.linalg.svd(m, compute_uv=False).max())
        lam2 = float(np.linalg.eigvalsh(laplacian(g))[1])
        gap = abs(smax - (1.0 - gamma * lam2))
        worst = max(worst, gap)
        assert gap <= 1e-9

    # noiseless error contracts at least this fast, step by step
    for g in graphs[:10]:
        gamma = 0.45 / max_degree(g)
        n = g.n
        scenario = _scenario(g, gamma, NoiseModel(np.zeros(n), np.zeros(n)))
        rho = contraction_factor(g, gamma)
        result = simulate(scenario, horizon=60, seed=15, burn_in=1)
        norms = np.linalg.norm(result.error_trajectory, axis=(1, 2))
        for k in range(40):
            if norms[k] < 1e-9:
                break
            assert norms[k + 1] <= rho * norms[k] * (1 + 1e-9) + 1e-13
    print(f"\nACCEPTANCE 5 contraction identity: PASS (worst gap {worst:.2e})")


def _ten_node_problem(mask, **overrides) -> CodesignProblem:
    fields = dict(
        mask=mask,
        error_budget=2.0,
        lambda2_min=0.2,
        privacy_weight=10.0,
        epsilon_max=np.array([0.4, 0.9, 0.55, 0.35, 0.8, 0.45, 0.7, 0.5, 0.52, 0.58]),
        deltas=np.full(10, 0.05),
        adjacency_bounds=np.ones(10),
        process_sigmas=np.zeros(10),
        gamma=0.05,
        dimension=1,
    )
    fields.update(overrides)
    return CodesignProblem(**fields)


def test_criterion_6_codesign_solutions_validate(ten_node_mask):
    checked = 0
    for seed, overrides in ((0, {}), (1, {"error_budget": 8.0}), (2, {"lambda2_min": 0.5})):
        problem = _ten_node_problem(ten_node_mask, **overrides)
        solution = solve(problem, SolverOptions(multi_starts=5), seed=seed)
        assert solution.converged, (seed, solution.status)
        report = validate_solution(problem, solution, tol_feas=1e-6)
        assert report.feasible, (seed, report.checks)
        assert report.e_ss_exact <= problem.error_budget + 1e-6
        checked += 1
    print(f"\nACCEPTANCE 6 codesign feasibility: PASS ({checked} converged solves validated)")


def _sweep(problems, seed=0):
    solutions = []
    options = SolverOptions(multi_starts=5)
    previous = None
    for problem in problems:
        opts = options
        if previous is not None and previous.feasible:
            warm_w = tuple(previous.graph.weights.get(e, 0.0) for e in problem.edges)
            opts = dataclasses.replace(
                options, extra_starts=((warm_w, tuple(previous.epsilons)),)
            )
        solution = solve(problem, opts, seed=seed)
        assert solution.converged, solution.status
        solutions.append(solution)
        previous = solution
    return solutions


def test_criterion_7_design_trends(ten_node_mask):
    tol = 1e-6

    budgets = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
    sols = _sweep([_ten_node_problem(ten_node_mask, error_budget=b) for b in budgets])
    for a, b in zip(sols, sols[1:]):
        assert np.all(b.epsilons <= a.epsilons + tol), "epsilon nonincreasing in e_R"

    floors = (0.1, 0.5, 1.0)
    sols = _sweep(
        [
            _ten_node_problem(ten_node_mask, error_budget=1.0, lambda2_min=l)
            for l in floors
        ]
    )
    traces = [2.0 * sum(s.graph.weights.values()) for s in sols]
    assert all(b >= a - tol for a, b in zip(traces, traces[1:])), "Tr(L) nondecreasing"

    weights = (1.0, 100.0, 1000.0)
    sols = _sweep(
        [
            _ten_node_problem(ten_node_mask, error_budget=1.0, privacy_weight=v)
            for v in weights
        ]
    )
    privacy_terms = [float(s.epsilons @ s.epsilons) for s in sols]
    assert all(
        b <= a + tol for a, b in zip(privacy_terms, privacy_terms[1:])
    ), "sum eps^2 nonincreasing in vartheta"
    print(
        "\nACCEPTANCE 7 design trends: PASS "
        f"(e_R sweep {budgets}, lambda2 sweep {floors}, weight sweep {weights})"
    )


def test_criterion_8_byte_identical_reruns(tmp_path):
    problem_cfg = tmp_path / "problem.toml"
    problem_cfg.write_text(
        """
[problem]
graph = { n = 4, edges = [{i=1,j=2}, {i=2,j=3}, {i=3,j=4}, {i=1,j=4}, {i=1,j=3}] }
error_budget = 0.5
lambda2_min = 0.3
privacy_weight = 10.0
gamma = 0.1
dimension = 2
epsilon_max = 0.8
deltas = 0.05
adjacency_bounds = 1.0
process_sigmas = 0.1

[solver]
multi_starts = 2

[sweep]
parameter = "e_R"
values = [0.5, 1.0]
"""
    )
    sim_cfg = CONFIGS / "two_node.toml"
    artifacts = {
        "analyze": (["analyze", "--config", str(sim_cfg)], ["covariance_report.json"]),
        "simulate": (
            ["simulate", "--config", str(sim_cfg), "--horizon", "3000"],
            ["trajectory.csv", "comparison.json"],
        ),
        "codesign": (
            ["codesign", "--config", str(problem_cfg)],
            ["solution.json", "solution.dot"],
        ),
        "sweep": (
            ["sweep", "--config", str(problem_cfg)],
            ["sweep_summary.csv", "solution_e_R_0.5.json", "solution_e_R_1.dot"],
        ),
    }
    compared = 0
    for mode, (args, files) in artifacts.items():
        out_a = tmp_path / f"{mode}_a"
        out_b = tmp_path / f"{mode}_b"
        assert cli.main(args + ["--out", str(out_a), "--seed", "9"]) == 0
        assert cli.main(args + ["--out", str(out_b), "--seed", "9"]) == 0
        for name in files:
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), (mode, name)
            compared += 1
    print(f"\nACCEPTANCE 8 determinism: PASS ({compared} artifacts byte-identical)")
