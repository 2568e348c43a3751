"""Divide-and-optimize QAOA: freezing, landscape transfer and exact p=1 energies."""
from .graphs import Graph, GraphEnsembleSpec, GraphError, generate, load_graph, serialize, top_hotspots
from .ising import (FrozenConfig, IsingHamiltonian, ParameterError, ResourceError, SubProblem,
                    brute_force_ground, classical_energy, enumerate_subproblems, freeze, graph_hamiltonian,
                    maxcut_hamiltonian)
from .qaoa import NoiseSpec, QaoaParams, ShotLedger, expectation, prepare_state, sample
from .exact import expectation_p1_exact, p1_landscape
from .landscape import GridSpec, LandscapeGrid, compare, cosine_similarity, evaluate_grid, overlap_q, standardize
from .optimize import InitStrategy, OptimizerConfig, fine_tune, initial_params, optimize
from .pipeline import PipelineConfig, arg, run_doqaoa, run_frozen_baseline, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "GraphEnsembleSpec",
    "GraphError",
    "generate",
    "load_graph",
    "serialize",
    "top_hotspots",
    "FrozenConfig",
    "IsingHamiltonian",
    "ParameterError",
    "ResourceError",
    "SubProblem",
    "brute_force_ground",
    "classical_energy",
    "enumerate_subproblems",
    "freeze",
    "graph_hamiltonian",
    "maxcut_hamiltonian",
    "NoiseSpec",
    "QaoaParams",
    "ShotLedger",
    "expectation",
    "prepare_state",
    "sample",
    "expectation_p1_exact",
    "p1_landscape",
    "GridSpec",
    "LandscapeGrid",
    "compare",
    "cosine_similarity",
    "evaluate_grid",
    "overlap_q",
    "standardize",
    "InitStrategy",
    "OptimizerConfig",
    "fine_tune",
    "initial_params",
    "optimize",
    "PipelineConfig",
    "arg",
    "run_doqaoa",
    "run_frozen_baseline",
    "run_pipeline",
]
