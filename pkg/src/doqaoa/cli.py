"""Command-line front end: ``doqaoa <subcommand> [--config FILE] [--seed N] [--out DIR] [--threads N]``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .experiments import ConfigError, DEFAULTS, resolve_config, run_experiment
from .graphs import GraphEnsembleSpec, GraphError, generate, load_graph, serialize, top_hotspots
from .ising import FrozenConfig, ParameterError, ResourceError, freeze, graph_hamiltonian
from .landscape import GridSpec, evaluate_grid, overlap_q
from .optimize import InitStrategy, OptimizerConfig
from .pipeline import PipelineConfig, run_pipeline
from .qaoa import NoiseSpec

EXPERIMENT_OF = {
    "phase": "phase-transition",
    "landscape": "landscape-verify",
    "bench": "benchmark",
    "convergence": "convergence",
    "depth": "depth-ablation",
}


def _load_config(path: str | None, kind: str, seed: int | None) -> dict:
    doc = {}
    if path:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {path!r} does not exist")
        try:
            doc = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    given = doc.get("experiment", kind)
    if given != kind:
        raise ConfigError(f"config is for {given!r}, not {kind!r}")
    doc["experiment"] = kind
    if seed is not None:
        doc["seed"] = seed
    return resolve_config(doc)


def _graph_from(path: str):
    p = Path(path)
    if not p.is_file():
        raise GraphError(f"graph file {path!r} does not exist")
    return load_graph(p.read_text())


def _write(out: str | None, name: str, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text)
    print(d / name)


def cmd_generate(a) -> None:
    spec = GraphEnsembleSpec(a.kind, a.n, a.seed or 0, a.attach, a.d, a.p, a.s, a.periodic)
    g = generate(spec)
    _write(a.out, f"graph.{'json' if a.format == 'json' else 'txt'}", serialize(g, a.format))


def cmd_overlap(a) -> None:
    grids = []
    for path in a.grids:
        data = np.genfromtxt(path, delimiter=",", names=True, comments="#")
        gam, bet = np.unique(data["gamma"]), np.unique(data["beta"])
        grids.append(data["energy"].reshape(gam.size, bet.size))
    report = overlap_q(grids)
    _write(a.out, "overlap.json", report.to_json() + "\n")


def cmd_landscape_single(a) -> None:
    g = _graph_from(a.graph)
    H = graph_hamiltonian(g, a.scale)
    if a.freeze:
        nodes = top_hotspots(g, len(a.freeze))
        H = freeze(H, FrozenConfig(nodes, tuple(a.freeze))).hamiltonian
    spec = GridSpec(resolution=(a.resolution, a.resolution))
    grid = evaluate_grid(H, spec, a.mode, seed=a.seed)
    _write(a.out, "landscape.csv", grid.to_csv())


def cmd_pipeline(a) -> None:
    g = _graph_from(a.graph)
    H = graph_hamiltonian(g, a.scale)
    oc = OptimizerConfig(a.max_evals, a.shots, seed=a.seed or 0, mode=a.eval_mode,
                         noise=NoiseSpec(a.depolarizing2q, a.readout_flip))
    cfg = PipelineConfig(m=a.m, bias_threshold=a.bias_threshold, warmstart_epochs=a.epochs, optimizer=oc,
                         rep_max_evals=a.rep_max_evals, final_eval_shots=a.shots, mode=a.mode, p=a.p,
                         init=InitStrategy(a.init), cluster_threshold=a.cluster_threshold)
    report = run_pipeline(H, top_hotspots(g, a.m), cfg)
    _write(a.out, "report.json", report.to_json() + "\n")
    if a.out is not None:
        _write(a.out, "summary.csv", report.to_csv())


def cmd_experiment(a) -> None:
    cfg = _load_config(a.config, EXPERIMENT_OF[a.command], a.seed)
    for path in run_experiment(cfg, a.out or "results", a.threads):
        print(path)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker processes")

    ap = argparse.ArgumentParser(prog="doqaoa", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="draw a random graph")
    g.add_argument("--kind", default="erdos_renyi", choices=["power_law", "regular", "sk", "erdos_renyi", "lrp"])
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--attach", type=int, default=2)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--p", type=float, default=0.5)
    g.add_argument("--s", type=float, default=1.0)
    g.add_argument("--periodic", action="store_true")
    g.add_argument("--format", default="edgelist", choices=["edgelist", "json"])
    g.set_defaults(func=cmd_generate)

    ls = sub.add_parser("landscape", parents=[common],
                        help="landscape-verify experiment, or one grid with --graph")
    ls.add_argument("--graph", help="edge-list or JSON graph; writes a single gamma,beta,energy grid")
    ls.add_argument("--freeze", type=int, nargs="*", help="values (+1/-1) for the top-degree nodes")
    ls.add_argument("--scale", type=float, default=1.0, help="coupling per unit edge weight")
    ls.add_argument("--resolution", type=int, default=32)
    ls.add_argument("--mode", default="exact-p1", choices=["exact-p1", "statevector", "sampled"])
    ls.set_defaults(func=lambda a: cmd_landscape_single(a) if a.graph else cmd_experiment(a))

    ov = sub.add_parser("overlap", parents=[common], help="overlap q of grid CSV files")
    ov.add_argument("grids", nargs="+")
    ov.set_defaults(func=cmd_overlap)

    pl = sub.add_parser("pipeline", parents=[common], help="run DO-QAOA, the frozen baseline or plain QAOA")
    pl.add_argument("--graph", required=True)
    pl.add_argument("--m", type=int, default=1)
    pl.add_argument("--mode", default="doqaoa", choices=["doqaoa", "frozen", "plain"])
    pl.add_argument("--eval-mode", default="exact", choices=["exact", "statevector", "sampled"])
    pl.add_argument("--scale", type=float, default=0.5)
    pl.add_argument("--p", type=int, default=1)
    pl.add_argument("--max-evals", type=int, default=1000)
    pl.add_argument("--rep-max-evals", type=int)
    pl.add_argument("--shots", type=int, default=8192)
    pl.add_argument("--epochs", type=int, default=10)
    pl.add_argument("--bias-threshold", type=float, default=0.3)
    pl.add_argument("--init", default="shortcut", choices=["shortcut", "median", "random"])
    pl.add_argument("--cluster-threshold", type=float)
    pl.add_argument("--depolarizing2q", type=float, default=0.0)
    pl.add_argument("--readout-flip", type=float, default=0.0)
    pl.set_defaults(func=cmd_pipeline)

    for name, kind in (("phase", "phase-transition"), ("bench", "benchmark"), ("convergence", "convergence"),
                       ("depth", "depth-ablation")):
        sp = sub.add_parser(name, parents=[common], help=f"{kind} experiment")
        sp.set_defaults(func=cmd_experiment)

    dc = sub.add_parser("defaults", help="print the default config of an experiment")
    dc.add_argument("experiment", choices=sorted(DEFAULTS))
    dc.set_defaults(func=lambda a: print(json.dumps(resolve_config({"experiment": a.experiment}), indent=2)))
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        a.func(a)
    except (ConfigError, GraphError, ParameterError, ResourceError, OSError) as exc:
        print(f"doqaoa {a.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
