"""Freeze, train one representative, transfer its angles, and recombine.

Three modes share the same enumeration, final evaluation and aggregation:
``doqaoa`` trains only representatives and transfers parameters with the
bias-aware rule, ``frozen`` trains every sub-problem independently, and
``plain`` runs QAOA on the whole problem.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .graphs import derive_seed
from .ising import (BRUTE_FORCE_CAP, SUBPROBLEM_CAP, FrozenConfig, IsingHamiltonian, ParameterError, SubProblem,
                    brute_force_ground, classical_energy, enumerate_subproblems, mean_bias_magnitude,
                    spins_to_bitstring)
from .landscape import GridSpec, cluster_landscapes
from .exact import P1Kernel
from .optimize import Evaluator, InitStrategy, OptimizerConfig, fine_tune, optimize
from .qaoa import QaoaParams, ShotLedger, circuit_cost

__all__ = [
    "PipelineConfig",
    "TransferDecision",
    "SubproblemRecord",
    "PipelineReport",
    "UndefinedARGError",
    "select_representative",
    "transfer_decision",
    "run_pipeline",
    "run_doqaoa",
    "run_frozen_baseline",
    "run_plain_qaoa",
    "arg",
    "reconstruct_global",
    "POLICIES",
    "PIPELINE_MODES",
]

POLICIES = ("all_plus", "min_bias")
PIPELINE_MODES = ("doqaoa", "frozen", "plain")


class UndefinedARGError(ValueError):
    """ARG divides by E_min, so it has no value when E_min is zero."""


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of a pipeline run.

    ``rep_max_evals`` caps training of each representative; ``None`` means the
    optimizer's full ``max_evals``. ``cluster_threshold`` switches on landscape
    clustering with one representative per cluster.
    """

    m: int = 1
    bias_threshold: float = 0.3
    warmstart_epochs: int = 10
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    rep_max_evals: int | None = None
    final_eval_shots: int = 8192
    representative_policy: str = "all_plus"
    mode: str = "doqaoa"
    p: int = 1
    init: InitStrategy = field(default_factory=InitStrategy.shortcut)
    cluster_threshold: float | None = None
    cluster_grid: GridSpec = field(default_factory=lambda: GridSpec(resolution=(16, 16)))

    def __post_init__(self):
        if self.m < 0:
            raise ParameterError("m must be nonnegative")
        if self.bias_threshold < 0:
            raise ParameterError("bias threshold must be nonnegative")
        if self.warmstart_epochs < 0:
            raise ParameterError("warm-start epochs must be nonnegative")
        if self.rep_max_evals is not None and self.rep_max_evals < 1:
            raise ParameterError("rep_max_evals must be positive")
        if self.final_eval_shots < 1:
            raise ParameterError("final_eval_shots must be positive")
        if self.representative_policy not in POLICIES:
            raise ParameterError(f"unknown representative policy {self.representative_policy!r}")
        if self.mode not in PIPELINE_MODES:
            raise ParameterError(f"unknown pipeline mode {self.mode!r}")
        if self.p < 1:
            raise ParameterError("p must be >= 1")


@dataclass(frozen=True)
class TransferDecision:
    kind: str
    delta_b: float

    def to_dict(self) -> dict:
        return {"kind": self.kind, "delta_b": self.delta_b}


@dataclass
class SubproblemRecord:
    index: int
    frozen: FrozenConfig
    role: str
    params: QaoaParams | None
    decision: TransferDecision | None
    expectation: float
    best_bitstring: str
    best_energy: float
    cluster: int = 0

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "frozen": {"nodes": list(self.frozen.nodes), "values": list(self.frozen.values)},
            "role": self.role,
            "params": None if self.params is None else {"gammas": list(self.params.gammas),
                                                        "betas": list(self.params.betas)},
            "decision": None if self.decision is None else self.decision.to_dict(),
            "expectation": self.expectation,
            "best_bitstring": self.best_bitstring,
            "best_energy": self.best_energy,
            "cluster": self.cluster,
        }


@dataclass
class PipelineReport:
    mode: str
    m: int
    records: list[SubproblemRecord]
    global_spins: np.ndarray
    global_energy: float
    expectation: float
    e_min: float | None
    arg: float | None
    arg_status: str
    ledger: ShotLedger
    K: int
    cnots: int
    depth: int

    @property
    def global_bitstring(self) -> str:
        return spins_to_bitstring(self.global_spins)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "m": self.m,
            "K": self.K,
            "records": [r.to_dict() for r in self.records],
            "global": {"bitstring": self.global_bitstring, "spins": [int(s) for s in self.global_spins],
                       "energy": self.global_energy},
            "expectation": self.expectation,
            "e_min": self.e_min,
            "arg": self.arg,
            "arg_status": self.arg_status,
            "ledger": self.ledger.as_dict(),
            "cnots": self.cnots,
            "depth": self.depth,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    CSV_HEADER = ("mode", "m", "arg", "total_shots", "cnots", "depth")

    def csv_row(self) -> list:
        return [self.mode, self.m, "" if self.arg is None else repr(self.arg), self.ledger.total_shots,
                self.cnots, self.depth]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_HEADER)
        w.writerow(self.csv_row())
        return buf.getvalue()


def arg(e_min: float, e: float) -> float:
    """Approximation ratio gap in percent, 100 |(E_min - E) / E_min|."""
    if e_min == 0:
        raise UndefinedARGError("ARG is undefined for a zero ground-state energy")
    return 100.0 * abs((e_min - e) / e_min)


def select_representative(subproblems, policy: str = "all_plus") -> int:
    """Index of the sub-problem to train; ``subproblems`` are in lexicographic configuration order."""
    subproblems = list(subproblems)
    if not subproblems:
        raise ParameterError("no sub-problems to choose from")
    if policy == "all_plus":
        for k, sp in enumerate(subproblems):
            if all(z == 1 for z in sp.frozen.values):
                return k
        raise ParameterError("no all-plus configuration among the sub-problems")
    if policy == "min_bias":
        biases = [_bias(sp) for sp in subproblems]
        return int(np.argmin(biases))
    raise ParameterError(f"unknown representative policy {policy!r}")


def _bias(sp) -> float:
    H = sp.hamiltonian if isinstance(sp, SubProblem) else sp
    return mean_bias_magnitude(H) if H.n else 0.0


def transfer_decision(rep: SubProblem, target: SubProblem, threshold: float = 0.3) -> TransferDecision:
    """Direct copy when the mean-bias gap is at most ``threshold``, otherwise a warm start."""
    if rep.active_map != target.active_map:
        raise ParameterError("representative and target have different active sets")
    delta = abs(_bias(target) - _bias(rep))
    return TransferDecision("warmstart" if delta > threshold else "direct", delta)


def reconstruct_global(active_bits, cfg: FrozenConfig, active_map, n: int | None = None) -> np.ndarray:
    """Full spin vector from active spins (or their bitstring) and the frozen values."""
    if isinstance(active_bits, str):
        active = [1 if b == "0" else -1 for b in active_bits]
    else:
        active = [int(s) for s in active_bits]
    active_map = tuple(active_map)
    if len(active) != len(active_map):
        raise ParameterError("active spins and active map differ in length")
    total = len(active_map) + len(cfg.nodes) if n is None else n
    if set(active_map) & set(cfg.nodes):
        raise ParameterError("a node is both active and frozen")
    out = np.zeros(total, dtype=np.int8)
    for v, s in zip(active_map, active):
        out[v] = s
    for v, z in zip(cfg.nodes, cfg.values):
        out[v] = z
    if np.any(out == 0):
        raise ParameterError("active and frozen nodes do not cover every spin")
    return out


def _sub_seed(cfg: PipelineConfig, index: int, salt: int) -> int:
    return derive_seed(derive_seed(cfg.optimizer.seed, index), salt)


class _Runner:
    def __init__(self, H: IsingHamiltonian, subs: list[SubProblem], cfg: PipelineConfig):
        self.H, self.subs, self.cfg = H, subs, cfg
        self.ledger = ShotLedger()
        oc = cfg.optimizer
        self.sampled = oc.mode == "sampled"
        self.evaluators = [Evaluator(sp.hamiltonian, oc.mode, oc.noise, oc.shots_per_eval) for sp in subs]

    def train(self, k: int, max_evals: int):
        sp = self.subs[k]
        oc = replace(self.cfg.optimizer, max_evals=max_evals, seed=_sub_seed(self.cfg, k, 0))
        return optimize(sp.hamiltonian, oc, self.cfg.init, self.cfg.p, self.ledger, "training", self.evaluators[k])

    def warm(self, k: int, start: QaoaParams):
        oc = replace(self.cfg.optimizer, seed=_sub_seed(self.cfg, k, 1))
        return fine_tune(self.subs[k].hamiltonian, start, self.cfg.warmstart_epochs, oc, self.ledger,
                         self.evaluators[k])

    def final(self, k: int, params: QaoaParams, counts=None):
        """(expectation, counts) for sub-problem ``k`` at ``params``.

        Sampled mode reuses ``counts`` from training when given, otherwise spends
        one charged evaluation; exact modes draw uncharged bitstrings from the
        exact output distribution.
        """
        ev = self.evaluators[k]
        rng = np.random.default_rng(_sub_seed(self.cfg, k, 2))
        if self.sampled:
            if counts is None:
                e, counts = ev.with_shots(self.cfg.final_eval_shots).energy(params, rng)
                self.ledger.charge("evaluation", self.cfg.final_eval_shots)
                return e, counts
            return ev.counts_energy(counts), counts
        e, _ = ev.energy(params)
        n = ev.H.n
        probs = ev.distribution(params)
        draws = rng.multinomial(self.cfg.final_eval_shots, probs / probs.sum())
        counts = {format(int(i), f"0{n}b") if n else "": int(c) for i, c in enumerate(draws) if c}
        return e, counts

    def record(self, k: int, role: str, params, decision, counts, expectation, cluster=0) -> SubproblemRecord:
        sp = self.subs[k]
        ev = self.evaluators[k]
        best_bits, best_e = None, math.inf
        for bits in sorted(counts):
            e = float(ev.diagonal[int(bits, 2) if bits else 0])
            if e < best_e - 1e-12:
                best_bits, best_e = bits, e
        return SubproblemRecord(k, sp.frozen, role, params, decision, float(expectation), best_bits, best_e, cluster)

    def trivial(self, k: int) -> SubproblemRecord:
        # every spin frozen: no circuit to run
        c = self.subs[k].hamiltonian.constant
        return SubproblemRecord(k, self.subs[k].frozen, "classical", None, None, c, "", c)


def _clusters(subs, cfg: PipelineConfig) -> tuple[list[int], list[int]]:
    """(assignment, representative per cluster)."""
    if cfg.cluster_threshold is None or len(subs) == 1:
        return [0] * len(subs), [select_representative(subs, cfg.representative_policy)]
    spec = cfg.cluster_grid
    kern = P1Kernel.from_hamiltonian(subs[0].hamiltonian, spec.gammas)
    grids = [kern.landscape(sp.hamiltonian.h, spec.betas) for sp in subs]
    cl = cluster_landscapes(grids, cfg.cluster_threshold)
    return cl.assignment, cl.representatives


def _finish(H: IsingHamiltonian, subs, records: list[SubproblemRecord], runner: _Runner, cfg: PipelineConfig,
            mode: str, K: int) -> PipelineReport:
    best = None
    for rec, sp in zip(records, subs):
        spins = reconstruct_global(rec.best_bitstring, sp.frozen, sp.active_map, H.n)
        key = (rec.best_energy, spins_to_bitstring(spins))
        if best is None or key < best[0]:
            best = (key, spins)
    spins = best[1]
    energy = classical_energy(H, spins)
    expectation = min(r.expectation for r in records)
    e_min, value, status = None, None, "skipped"
    if H.n <= BRUTE_FORCE_CAP:
        e_min = brute_force_ground(H)[0]
        try:
            value, status = arg(e_min, expectation), "ok"
        except UndefinedARGError:
            status = "undefined"
    costs = [circuit_cost(sp.hamiltonian, cfg.p) for sp in subs]
    return PipelineReport(mode, len(subs[0].frozen.nodes), records, spins, energy, expectation, e_min, value,
                          status, runner.ledger, K, max(c[0] for c in costs), max(c[1] for c in costs))


def _check(H: IsingHamiltonian, S) -> tuple[int, ...]:
    S = tuple(int(v) for v in S)
    if len(S) > SUBPROBLEM_CAP:
        raise ParameterError(f"{len(S)} frozen nodes exceeds cap {SUBPROBLEM_CAP}")
    if len(set(S)) != len(S) or any(not 0 <= v < H.n for v in S):
        raise ParameterError("frozen set must hold distinct node ids of the problem")
    return S


def run_doqaoa(H: IsingHamiltonian, S, cfg: PipelineConfig) -> PipelineReport:
    S = _check(H, S)
    subs = enumerate_subproblems(H, S)
    runner = _Runner(H, subs, cfg)
    if subs[0].hamiltonian.n == 0:
        return _finish(H, subs, [runner.trivial(k) for k in range(len(subs))], runner, cfg, "doqaoa", 1)
    assignment, reps = _clusters(subs, cfg)
    budget = cfg.rep_max_evals or cfg.optimizer.max_evals
    records: list[SubproblemRecord | None] = [None] * len(subs)
    rep_params = {}
    for c, r in enumerate(reps):
        res = runner.train(r, budget)
        rep_params[c] = res.best_params
        e, counts = runner.final(r, res.best_params, res.best_counts)
        records[r] = runner.record(r, "representative", res.best_params, None, counts, e, c)
    for k, sp in enumerate(subs):
        if records[k] is not None:
            continue
        c = assignment[k]
        r = reps[c]
        dec = transfer_decision(subs[r], sp, cfg.bias_threshold)
        if dec.kind == "warmstart" and cfg.warmstart_epochs > 0:
            res = runner.warm(k, rep_params[c])
            params = res.best_params
            e, counts = runner.final(k, params, res.best_counts)
        else:
            params = rep_params[c]
            e, counts = runner.final(k, params)
        records[k] = runner.record(k, dec.kind, params, dec, counts, e, c)
    return _finish(H, subs, records, runner, cfg, "doqaoa", len(reps))


def run_frozen_baseline(H: IsingHamiltonian, S, cfg: PipelineConfig) -> PipelineReport:
    """Every sub-problem optimized independently with the full budget."""
    S = _check(H, S)
    subs = enumerate_subproblems(H, S)
    runner = _Runner(H, subs, cfg)
    records = []
    for k, sp in enumerate(subs):
        if sp.hamiltonian.n == 0:
            records.append(runner.trivial(k))
            continue
        res = runner.train(k, cfg.optimizer.max_evals)
        e, counts = runner.final(k, res.best_params, res.best_counts)
        records.append(runner.record(k, "independent", res.best_params, None, counts, e))
    return _finish(H, subs, records, runner, cfg, "frozen" if S else "plain", len(subs))


def run_plain_qaoa(H: IsingHamiltonian, cfg: PipelineConfig) -> PipelineReport:
    return run_frozen_baseline(H, (), cfg)


def run_pipeline(H: IsingHamiltonian, S, cfg: PipelineConfig) -> PipelineReport:
    if cfg.mode == "plain":
        return run_plain_qaoa(H, cfg)
    if cfg.mode == "frozen":
        return run_frozen_baseline(H, S, cfg)
    return run_doqaoa(H, S, cfg)
