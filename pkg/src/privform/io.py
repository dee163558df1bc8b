"""Config parsing and artifact writers for the command-line front end.

Configs are TOML (key/value plus nested tables); graphs travel as JSON with
1-based node indices: ``{"n": int, "edges": [{"i": int, "j": int, "w": float?}]}``
where an edge without ``w`` is mask-only.  All file writes go through a
write-temp-then-rename so partial artifacts never appear, and all output is
byte-deterministic for fixed inputs.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .codesign import CodesignProblem, SolverOptions
from .errors import ConfigError
from .formation import FormationSpec, SimulationResult
from .graph import TopologyMask, WeightedGraph
from .privacy import NoiseModel, PrivacySpec
from .scenario import NetworkScenario

SWEEP_AXES = ("e_R", "eps_max_uniform", "lambda2_min", "vartheta")


def load_toml(path: Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"could not parse {path}: {exc}") from exc


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        return val if np.isfinite(val) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path: Path, payload: dict[str, Any]) -> None:
    _atomic_write_text(path, json.dumps(_jsonify(payload), indent=2) + "\n")


def read_graph_json(path: Path) -> tuple[TopologyMask, dict]:
    """Load a graph file into a mask plus the weights it carries (maybe empty)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"graph file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"could not parse {path}: {exc}") from exc
    return graph_from_table(payload, path.parent)


def graph_from_table(table: dict[str, Any], base: Path) -> tuple[TopologyMask, dict]:
    """Graph from an inline table ({"n", "edges"}) or a {"path": ...} reference."""
    if "path" in table:
        return read_graph_json(base / str(table["path"]))
    try:
        n = int(table["n"])
        raw_edges = table["edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"graph table needs 'n' and 'edges': {exc}") from exc
    pairs = []
    weights = {}
    try:
        for entry in raw_edges:
            i, j = int(entry["i"]), int(entry["j"])
            pairs.append((i, j))
            if "w" in entry:
                weights[(i, j)] = float(entry["w"])
        mask = TopologyMask(n, pairs)
        if weights:
            WeightedGraph(mask, weights)  # validates weight domain
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad graph description: {exc}") from exc
    return mask, weights


def graph_to_table(mask: TopologyMask, weights: dict) -> dict[str, Any]:
    edges = []
    for i, j in mask.edges:
        entry: dict[str, Any] = {"i": i, "j": j}
        if (i, j) in weights:
            entry["w"] = float(weights[(i, j)])
        edges.append(entry)
    return {"n": mask.n_agents, "edges": edges}


def write_graph_json(path: Path, mask: TopologyMask, weights: dict) -> None:
    write_json(path, graph_to_table(mask, weights))


def broadcast(value, n: int, name: str) -> np.ndarray:
    """Accept a scalar or a length-n list for a per-agent parameter."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape == (n,):
        return arr.copy()
    raise ConfigError(f"{name} must be a scalar or a length-{n} list")


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"missing '{key}' in [{where}]")
    return table[key]


def scenario_from_config(cfg: dict[str, Any], base: Path) -> tuple[NetworkScenario, dict]:
    """Build a NetworkScenario from a parsed config; returns ([scenario], [simulate] table)."""
    if "graph" not in cfg:
        raise ConfigError("missing [graph] section")
    mask, weights = graph_from_table(cfg["graph"], base)
    if not weights:
        raise ConfigError("scenario graphs need weighted edges ('w' on each edge)")
    try:
        graph = WeightedGraph(mask, weights)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    sc = cfg.get("scenario", {})
    gamma = float(_require(sc, "gamma", "scenario"))
    dimension = int(sc.get("dimension", 1))
    n = mask.n_agents

    priv = cfg.get("privacy", {})
    specs = None
    try:
        if "sigmas" in priv:
            sigmas = broadcast(priv["sigmas"], n, "privacy.sigmas")
        elif "epsilons" in priv:
            eps = broadcast(priv["epsilons"], n, "privacy.epsilons")
            deltas = broadcast(_require(priv, "deltas", "privacy"), n, "privacy.deltas")
            bounds = broadcast(
                _require(priv, "adjacency_bounds", "privacy"), n,
                "privacy.adjacency_bounds",
            )
            specs = [PrivacySpec(e, d, b) for e, d, b in zip(eps, deltas, bounds)]
            sigmas = None
        else:
            raise ConfigError("[privacy] needs either 'sigmas' or 'epsilons'")
        process = broadcast(cfg.get("process", {}).get("sigmas", 0.0), n, "process.sigmas")
        if specs is not None:
            noise = NoiseModel.from_specs(specs, process)
        else:
            noise = NoiseModel(sigmas, process)

        form_tbl = cfg.get("formation", {})
        if "reference_points" in form_tbl:
            points = np.asarray(form_tbl["reference_points"], dtype=float)
        else:
            points = np.zeros((n, dimension))
        formation = FormationSpec.from_reference_points(mask, points)

        scenario = NetworkScenario(
            graph=graph,
            formation=formation,
            gamma=gamma,
            noise=noise,
            dimension=dimension,
            allow_spectral_stability=bool(sc.get("allow_spectral_stability", False)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return scenario, cfg.get("simulate", {})


def problem_from_config(
    cfg: dict[str, Any], base: Path
) -> tuple[CodesignProblem, SolverOptions, dict | None]:
    """Build a CodesignProblem plus solver options and the optional sweep spec."""
    tbl = cfg.get("problem")
    if tbl is None:
        raise ConfigError("missing [problem] section")
    if "graph" not in tbl:
        raise ConfigError("missing 'graph' in [problem]")
    graph_ref = tbl["graph"]
    if isinstance(graph_ref, str):
        mask, _ = read_graph_json(base / graph_ref)
    else:
        mask, _ = graph_from_table(graph_ref, base)
    n = mask.n_agents
    try:
        problem = CodesignProblem(
            mask=mask,
            error_budget=float(_require(tbl, "error_budget", "problem")),
            lambda2_min=float(_require(tbl, "lambda2_min", "problem")),
            privacy_weight=float(_require(tbl, "privacy_weight", "problem")),
            epsilon_max=broadcast(
                _require(tbl, "epsilon_max", "problem"), n, "problem.epsilon_max"
            ),
            deltas=broadcast(_require(tbl, "deltas", "problem"), n, "problem.deltas"),
            adjacency_bounds=broadcast(
                _require(tbl, "adjacency_bounds", "problem"), n,
                "problem.adjacency_bounds",
            ),
            process_sigmas=broadcast(
                tbl.get("process_sigmas", 0.0), n, "problem.process_sigmas"
            ),
            gamma=float(_require(tbl, "gamma", "problem")),
            dimension=int(tbl.get("dimension", 1)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    solver_tbl = dict(cfg.get("solver", {}))
    try:
        if "extra_starts" in solver_tbl:
            raise ConfigError("solver.extra_starts is not a config option")
        options = SolverOptions(**solver_tbl)
    except TypeError as exc:
        raise ConfigError(f"bad [solver] option: {exc}") from exc

    sweep = cfg.get("sweep")
    if sweep is not None:
        axis = sweep.get("parameter")
        if axis not in SWEEP_AXES:
            raise ConfigError(
                f"sweep parameter must be one of {SWEEP_AXES}, got {axis!r}"
            )
        values = sweep.get("values")
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep.values must be a nonempty list")
        sweep = {"parameter": axis, "values": [float(v) for v in values]}
    return problem, options, sweep


def export_dot(g: WeightedGraph, epsilons, path: Path) -> None:
    """Graphviz export: edge penwidth proportional to weight, node size shrinking
    as the agent's privacy strengthens (smaller epsilon, smaller node)."""
    eps = np.asarray(epsilons, dtype=float)
    if eps.shape != (g.n,):
        raise ValueError(f"need one epsilon per agent, got shape {eps.shape}")
    if np.any(eps <= 0.0):
        raise ValueError("epsilons must be positive")
    wmax = max(g.weights.values(), default=1.0)
    emin = float(eps.min())
    lines = ["graph formation {", "  node [shape=circle, fixedsize=true];"]
    for i in range(1, g.n + 1):
        width = 0.25 + 0.75 * emin / float(eps[i - 1])
        lines.append(f'  {i} [width={width:.4f}, label="{i}"];')
    for i, j in g.edges:
        pen = 4.0 * g.weights[(i, j)] / wmax
        lines.append(f"  {i} -- {j} [penwidth={pen:.4f}];")
    lines.append("}")
    _atomic_write_text(path, "\n".join(lines) + "\n")


def write_trajectory_csv(
    path: Path, result: SimulationResult, formation: FormationSpec
) -> None:
    """Per-step per-agent per-dimension trajectory rows: k, agent, dim, x, xbar, e."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "agent", "dim", "x", "xbar", "e"])
    traj = result.shifted_trajectory
    err = result.error_trajectory
    p = formation.reference_points
    steps, n, d = traj.shape
    for k in range(steps):
        for i in range(n):
            for l in range(d):
                xbar = float(traj[k, i, l])
                writer.writerow(
                    [
                        k,
                        i + 1,
                        l + 1,
                        repr(xbar + float(p[i, l])),
                        repr(xbar),
                        repr(float(err[k, l, i])),
                    ]
                )
    _atomic_write_text(path, buf.getvalue())


def write_sweep_csv(path: Path, rows: list[dict[str, Any]]) -> None:
    """One row per (sweep value, agent): epsilon, degree, lambda2, bound, objective."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["parameter", "value", "agent", "epsilon", "degree", "lambda2", "bound", "objective"]
    )
    for row in rows:
        writer.writerow(
            [
                row["parameter"],
                repr(float(row["value"])),
                row["agent"],
                repr(float(row["epsilon"])),
                repr(float(row["degree"])),
                repr(float(row["lambda2"])),
                repr(float(row["bound"])),
                repr(float(row["objective"])),
            ]
        )
    _atomic_write_text(path, buf.getvalue())
