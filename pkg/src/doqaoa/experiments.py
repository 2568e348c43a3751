"""Seeded experiment suites that write plot-ready CSV files.

An experiment is described by a JSON config. Keys not listed in the defaults
for its kind are rejected, and every output file starts with ``#`` header
lines carrying the fully resolved config so a run can be repeated exactly.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .graphs import Graph, GraphEnsembleSpec, derive_seed, generate, load_graph, top_hotspots
from .ising import (IsingHamiltonian, ParameterError, brute_force_ground, enumerate_subproblems, graph_hamiltonian)
from .landscape import GridSpec, compare, replica_overlap_experiment
from .exact import P1Kernel
from .optimize import Evaluator, InitStrategy, OptimizerConfig, evals_to_threshold, optimize
from .pipeline import PipelineConfig, UndefinedARGError, arg, run_pipeline
from .qaoa import NoiseSpec, circuit_cost

__all__ = [
    "DEFAULTS",
    "KINDS",
    "ConfigError",
    "resolve_config",
    "run_experiment",
    "phase_transition",
    "landscape_verify",
    "benchmark",
    "convergence_study",
    "depth_ablation",
    "benchmark_suite",
]


class ConfigError(ValueError):
    """Unknown key, wrong type or missing file in an experiment config."""


_GRID = {"gamma_range": [-math.pi, math.pi], "beta_range": [-math.pi / 2, math.pi / 2], "resolution": [32, 32]}
_ENSEMBLE = {"kind": "erdos_renyi", "n": 10, "count": 10, "attach": 2, "d": 3, "p": 0.5, "s": 1.0,
             "periodic": False}
_OPTIMIZER = {"max_evals": 1000, "shots_per_eval": 8192, "tolerance": 1e-6, "mode": "exact", "simplex_step": 0.2}
_NOISE = {"depolarizing2q": 0.0, "readout_flip": 0.0}
_PIPELINE = {"bias_threshold": 0.3, "warmstart_epochs": 10, "rep_max_evals": None, "final_eval_shots": 8192,
             "representative_policy": "all_plus", "p": 1, "cluster_threshold": None}

DEFAULTS = {
    "phase-transition": {
        "L": [50, 100, 200], "s": [round(0.2 * k, 1) for k in range(1, 11)], "graphs_per_point": 10,
        "replicas": 8, "m_frozen": 3, "frozen_fraction": 0.1, "periodic": False,
        "grid": dict(_GRID, resolution=[16, 16]),
    },
    "landscape-verify": {
        "ensemble": dict(_ENSEMBLE), "m": [1, 2, 3], "coupling_scale": 0.5, "grid": dict(_GRID),
    },
    "benchmark": {
        "suite": "ensemble", "ensemble": dict(_ENSEMBLE, kind="regular", count=50), "graphs": [],
        "m": [1, 2, 3], "methods": ["doqaoa", "frozen", "plain"], "coupling_scale": 0.5,
        "optimizer": dict(_OPTIMIZER), "pipeline": dict(_PIPELINE), "noise": dict(_NOISE),
    },
    "convergence": {
        "ensemble": dict(_ENSEMBLE, count=20), "strategies": ["random", "median", "shortcut"], "m": [0],
        "p": [1, 2, 3], "coupling_scale": 0.5, "threshold": 0.01, "grid_resolution": 64,
        "random_gamma_range": [0.0, 2 * math.pi], "random_beta_range": [0.0, math.pi],
        "median_table": None, "optimizer": dict(_OPTIMIZER, max_evals=300), "traces": True,
    },
    "depth-ablation": {
        "ensemble": dict(_ENSEMBLE, kind="regular", count=20), "p": [1, 2, 3], "coupling_scale": 0.5,
        "noise": dict(_NOISE, depolarizing2q=0.01), "optimizer": dict(_OPTIMIZER, max_evals=300),
    },
}
KINDS = tuple(DEFAULTS)


def _merge(defaults: dict, given: dict, where: str) -> dict:
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key '{where}{key}'")
        if isinstance(defaults[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key '{where}{key}' must be an object")
            out[key] = _merge(defaults[key], val, f"{where}{key}.")
        else:
            out[key] = val
    return out


def resolve_config(doc: dict) -> dict:
    """Defaults filled in for the experiment named by ``doc["experiment"]``."""
    doc = dict(doc)
    kind = doc.pop("experiment", None)
    if kind not in DEFAULTS:
        raise ConfigError(f"experiment must be one of {KINDS}, got {kind!r}")
    seed = doc.pop("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    out = {"experiment": kind, "seed": seed}
    out.update(_merge(DEFAULTS[kind], doc, ""))
    return out


def _grid(d: dict) -> GridSpec:
    try:
        return GridSpec(tuple(d["gamma_range"]), tuple(d["beta_range"]), tuple(d["resolution"]))
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _optimizer(d: dict, seed: int, noise: dict | None = None) -> OptimizerConfig:
    return OptimizerConfig(int(d["max_evals"]), int(d["shots_per_eval"]), float(d["tolerance"]), seed,
                           d["mode"], NoiseSpec(**noise) if noise else NoiseSpec(), float(d["simplex_step"]))


def _ensemble_graphs(d: dict, seed: int) -> list[tuple[int, Graph]]:
    out = []
    for k in range(int(d["count"])):
        gseed = derive_seed(seed, k)
        spec = GraphEnsembleSpec(d["kind"], int(d["n"]), gseed, int(d["attach"]), int(d["d"]), float(d["p"]),
                                 float(d["s"]), bool(d["periodic"]))
        out.append((gseed, generate(spec)))
    return out


# Synthetic stand-ins for the small-graph benchmark families (4 to 11 nodes).
_SUITES = {
    "aids": ("power_law", {"attach": 1}, (4, 10)),
    "linux": ("erdos_renyi", {"p": 0.3}, (4, 10)),
    "imdb": ("erdos_renyi", {"p": 0.7}, (4, 11)),
}


def benchmark_suite(name: str, count: int, seed: int) -> list[tuple[int, Graph]]:
    """``count`` graphs shaped like one of the aids / linux / imdb families."""
    if name not in _SUITES:
        raise ConfigError(f"unknown benchmark suite {name!r}")
    kind, extra, (lo, hi) = _SUITES[name]
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        gseed = derive_seed(seed, k)
        n = int(rng.integers(lo, hi + 1))
        out.append((gseed, generate(GraphEnsembleSpec(kind, n, gseed, **extra))))
    return out


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _header(cfg: dict) -> str:
    return "# doqaoa experiment\n# config: " + json.dumps(cfg, sort_keys=True) + "\n"


def _write_csv(path: Path, cfg: dict, header, rows) -> Path:
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".partial")
    tmp.write_text(buf.getvalue())
    os.replace(tmp, path)
    return path


# ---------------------------------------------------------------- phase transition

def _phase_point(args):
    L, s, cfg = args
    res = replica_overlap_experiment(L, s, int(cfg["replicas"]), int(cfg["m_frozen"]), int(cfg["graphs_per_point"]),
                                     _grid(cfg["grid"]), derive_seed(cfg["seed"], L),
                                     cfg["frozen_fraction"], bool(cfg["periodic"]))
    return [(L, s, gs, q) for gs, q in zip(res.graph_seeds, res.q_values)]


def phase_transition(cfg: dict, threads: int = 1) -> list[tuple]:
    """Rows ``(L, s, graph_seed, q)``. Graph seeds depend on ``(seed, L, index)`` only, shared across s."""
    points = [(int(L), float(s), cfg) for L in cfg["L"] for s in cfg["s"]]
    return [row for rows in _map(_phase_point, points, threads) for row in rows]


def phase_summary(rows) -> dict[int, list[tuple[float, float]]]:
    """Ensemble mean q per L, as ``{L: [(s, mean_q), ...]}`` sorted by s."""
    acc: dict[tuple[int, float], list[float]] = {}
    for L, s, _, q in rows:
        acc.setdefault((L, s), []).append(q)
    out: dict[int, list[tuple[float, float]]] = {}
    for (L, s), qs in sorted(acc.items()):
        out.setdefault(L, []).append((s, float(np.mean(qs))))
    return out


def crossing_point(curve_a, curve_b) -> float | None:
    """First s where ``curve_a - curve_b`` changes sign, by linear interpolation."""
    s = np.array([x for x, _ in curve_a])
    d = np.array([a for _, a in curve_a]) - np.array([b for _, b in curve_b])
    for k in range(len(d) - 1):
        if d[k] == 0:
            return float(s[k])
        if d[k] * d[k + 1] < 0:
            return float(s[k] + (s[k + 1] - s[k]) * d[k] / (d[k] - d[k + 1]))
    return None


# ---------------------------------------------------------------- landscape verification


def _verify_graph(args):
    g, ms, scale, spec = args
    H = graph_hamiltonian(g, scale)
    out = []
    for m in ms:
        subs = enumerate_subproblems(H, top_hotspots(g, m))
        kern = P1Kernel.from_hamiltonian(subs[0].hamiltonian, spec.gammas)
        with_c = [kern.landscape(sp.hamiltonian.h, spec.betas) for sp in subs]
        no_c = [kern.landscape(np.zeros(sp.hamiltonian.n), spec.betas) for sp in subs]
        for cond, grids in (("coeffs", with_c), ("no_coeffs", no_c)):
            stats = [compare(grids[a], grids[b]) for a in range(len(grids)) for b in range(a + 1, len(grids))]
            out.append((m, cond, float(np.mean([c.mse_raw for c in stats])),
                        float(np.mean([c.linf for c in stats])), float(np.mean([c.pearson_r for c in stats]))))
    return out


def landscape_verify(cfg: dict, threads: int = 1) -> list[tuple]:
    """Rows ``(m, condition, mse, linf, correlation)`` averaged over graphs and sub-problem pairs.

    ``coeffs`` keeps the induced fields; ``no_coeffs`` zeroes them so every
    sub-problem shares one Hamiltonian. Grids are offset-free.
    """
    spec = _grid(cfg["grid"])
    graphs = [g for _, g in _ensemble_graphs(cfg["ensemble"], cfg["seed"])]
    per_graph = _map(_verify_graph, [(g, cfg["m"], float(cfg["coupling_scale"]), spec) for g in graphs], threads)
    acc: dict[tuple[int, str], list[tuple[float, float, float]]] = {}
    for rows in per_graph:
        for m, cond, mse, linf, r in rows:
            acc.setdefault((m, cond), []).append((mse, linf, r))
    return [(m, cond, *np.mean(acc[(m, cond)], axis=0)) for m in cfg["m"] for cond in ("coeffs", "no_coeffs")]


# ---------------------------------------------------------------- benchmark

def _bench_graph(args):
    idx, gseed, g, cfg = args
    H = graph_hamiltonian(g, float(cfg["coupling_scale"]))
    oc = _optimizer(cfg["optimizer"], derive_seed(cfg["seed"], idx), cfg["noise"])
    pc = cfg["pipeline"]
    rows = []
    for method in cfg["methods"]:
        for m in ([0] if method == "plain" else cfg["m"]):
            if m > g.n:
                continue
            pcfg = PipelineConfig(m, float(pc["bias_threshold"]), int(pc["warmstart_epochs"]), oc,
                                  pc["rep_max_evals"], int(pc["final_eval_shots"]), pc["representative_policy"],
                                  method, int(pc["p"]), cluster_threshold=pc["cluster_threshold"])
            rep = run_pipeline(H, top_hotspots(g, m), pcfg)
            rows.append((idx, gseed, g.n, method, m, "" if rep.arg is None else rep.arg, rep.arg_status,
                         rep.ledger.total_shots, rep.cnots, rep.depth, rep.K, rep.global_energy,
                         "" if rep.e_min is None else rep.e_min))
    return rows


BENCH_HEADER = ("instance", "graph_seed", "n", "method", "m", "arg", "arg_status", "total_shots", "cnots", "depth",
                "K", "global_energy", "e_min")


def benchmark(cfg: dict, threads: int = 1) -> list[tuple]:
    if cfg["graphs"]:
        graphs = []
        for k, path in enumerate(cfg["graphs"]):
            p = Path(path)
            if not p.is_file():
                raise ConfigError(f"graph file {path!r} does not exist")
            graphs.append((k, load_graph(p.read_text())))
    elif cfg["suite"] == "ensemble":
        graphs = _ensemble_graphs(cfg["ensemble"], cfg["seed"])
    else:
        graphs = benchmark_suite(cfg["suite"], int(cfg["ensemble"]["count"]), cfg["seed"])
    items = [(k, gs, g, cfg) for k, (gs, g) in enumerate(graphs)]
    return [row for rows in _map(_bench_graph, items, threads) for row in rows]


# ---------------------------------------------------------------- convergence

def _strategy(name: str, cfg: dict) -> InitStrategy:
    if name == "random":
        return InitStrategy.random(tuple(cfg["random_gamma_range"]), tuple(cfg["random_beta_range"]))
    if name == "median":
        table = cfg["median_table"]
        if table is None:
            return InitStrategy.median()
        return InitStrategy.median({int(k): (tuple(v[0]), tuple(v[1])) for k, v in table.items()})
    if name == "shortcut":
        return InitStrategy.shortcut()
    raise ConfigError(f"unknown init strategy {name!r}")


def grid_optimum(H: IsingHamiltonian, resolution: int = 64) -> float:
    """Minimum p=1 energy on a ``resolution``-square grid over one full period of both angles."""
    spec = GridSpec((-math.pi, math.pi), (-math.pi / 2, math.pi / 2), (resolution, resolution))
    return float(P1Kernel.from_hamiltonian(H, spec.gammas).landscape(H.h, spec.betas, H.constant).min())


def _convergence_graph(args):
    idx, g, cfg = args
    H = graph_hamiltonian(g, float(cfg["coupling_scale"]))
    rows, traces = [], []
    for m in cfg["m"]:
        sub = enumerate_subproblems(H, top_hotspots(g, m))[0].hamiltonian
        e_min = brute_force_ground(sub)[0]
        runs = {}
        for p in cfg["p"]:
            for name in cfg["strategies"]:
                oc = _optimizer(cfg["optimizer"], derive_seed(derive_seed(cfg["seed"], idx), p))
                try:
                    runs[(name, p)] = optimize(sub, oc, _strategy(name, cfg), p, evaluator=Evaluator(sub, oc.mode))
                except ParameterError:
                    continue  # e.g. no median-table entry at this depth
        for p in cfg["p"]:
            done = [r for (name, pp), r in runs.items() if pp == p]
            if not done:
                continue
            target = grid_optimum(sub, int(cfg["grid_resolution"])) if p == 1 else min(r.best_energy for r in done)
            for name in cfg["strategies"]:
                res = runs.get((name, p))
                if res is None:
                    continue
                hit = evals_to_threshold(res, target, float(cfg["threshold"]))
                try:
                    final_arg = arg(e_min, res.best_energy)
                except UndefinedARGError:
                    final_arg = ""
                rows.append((idx, name, m, p, "" if hit is None else hit, res.evals_used, target, res.best_energy,
                             final_arg))
                if cfg["traces"]:
                    best = math.inf
                    for k, (_, e) in enumerate(res.trace, start=1):
                        best = min(best, e)
                        traces.append((idx, name, m, p, k, e, arg(e_min, best) if e_min else ""))
    return rows, traces


CONV_HEADER = ("instance", "strategy", "m", "p", "evals_to_threshold", "evals_used", "target", "best_energy",
               "final_arg")
TRACE_HEADER = ("instance", "strategy", "m", "p", "eval", "energy", "best_arg")


def convergence_study(cfg: dict, threads: int = 1) -> tuple[list[tuple], list[tuple]]:
    """Evaluations needed by each init strategy to get within ``threshold`` of the reference optimum.

    The reference is the dense grid optimum at p=1 and the best energy reached
    by any strategy at larger p.
    """
    graphs = _ensemble_graphs(cfg["ensemble"], cfg["seed"])
    out = _map(_convergence_graph, [(k, g, cfg) for k, (_, g) in enumerate(graphs)], threads)
    return [r for rows, _ in out for r in rows], [t for _, tr in out for t in tr]


# ---------------------------------------------------------------- depth ablation

def _depth_graph(args):
    idx, g, cfg = args
    H = graph_hamiltonian(g, float(cfg["coupling_scale"]))
    e_min = brute_force_ground(H)[0]
    rows = []
    for p in cfg["p"]:
        oc = _optimizer(cfg["optimizer"], derive_seed(cfg["seed"], idx), cfg["noise"])
        res = optimize(H, oc, InitStrategy.shortcut(), int(p))
        cnots, depth = circuit_cost(H, int(p))
        rows.append((idx, int(p), cnots, depth, res.best_energy, arg(e_min, res.best_energy)))
    return rows


DEPTH_HEADER = ("instance", "p", "cnots", "depth", "energy", "arg")


def depth_ablation(cfg: dict, threads: int = 1) -> list[tuple]:
    """Optimized noisy energy and ARG at each depth; the objective includes the noise channel."""
    graphs = _ensemble_graphs(cfg["ensemble"], cfg["seed"])
    return [r for rows in _map(_depth_graph, [(k, g, cfg) for k, (_, g) in enumerate(graphs)], threads)
            for r in rows]


def mean_by(rows, key_col: int, val_col: int) -> dict:
    acc: dict = {}
    for r in rows:
        acc.setdefault(r[key_col], []).append(r[val_col])
    return {k: float(np.mean(v)) for k, v in sorted(acc.items())}


# ---------------------------------------------------------------- dispatch

def run_experiment(cfg: dict, out_dir, threads: int = 1) -> list[Path]:
    """Run a resolved config and write its CSV files under ``out_dir``."""
    out = Path(out_dir)
    kind = cfg["experiment"]
    if kind == "phase-transition":
        rows = phase_transition(cfg, threads)
        return [_write_csv(out / "phase_transition.csv", cfg, ("L", "s", "graph_seed", "q"), rows)]
    if kind == "landscape-verify":
        rows = landscape_verify(cfg, threads)
        return [_write_csv(out / "landscape_verify.csv", cfg, ("m", "condition", "mse", "linf", "correlation"),
                           rows)]
    if kind == "benchmark":
        return [_write_csv(out / "benchmark.csv", cfg, BENCH_HEADER, benchmark(cfg, threads))]
    if kind == "convergence":
        rows, traces = convergence_study(cfg, threads)
        paths = [_write_csv(out / "convergence.csv", cfg, CONV_HEADER, rows)]
        if cfg["traces"]:
            paths.append(_write_csv(out / "convergence_traces.csv", cfg, TRACE_HEADER, traces))
        return paths
    if kind == "depth-ablation":
        return [_write_csv(out / "depth_ablation.csv", cfg, DEPTH_HEADER, depth_ablation(cfg, threads))]
    raise ConfigError(f"unknown experiment {kind!r}")
