"""Nelder-Mead training of QAOA angles with budgeted evaluations and warm starts."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from scipy.optimize import minimize

from .exact import P1Kernel
from .ising import IsingHamiltonian, ParameterError, energy_diagonal
from .qaoa import (NOISELESS, STATEVECTOR_CAP, NoiseSpec, QaoaParams, ShotLedger, circuit_cost,
                   noisy_expectation, output_probabilities, prepare_state, sample, split_moments)

__all__ = [
    "InitStrategy",
    "OptimizerConfig",
    "OptResult",
    "Evaluator",
    "SHORTCUT_GAMMA",
    "SHORTCUT_BETA",
    "DEFAULT_MEDIAN_TABLE",
    "EVAL_MODES",
    "initial_params",
    "optimize",
    "fine_tune",
    "evals_to_threshold",
    "load_median_table",
    "dump_median_table",
]

SHORTCUT_GAMMA = -math.pi / 6
SHORTCUT_BETA = -math.pi / 8
DEFAULT_MEDIAN_TABLE = {1: ((SHORTCUT_GAMMA,), (SHORTCUT_BETA,))}
EVAL_MODES = ("exact", "statevector", "sampled")


def load_median_table(text: str) -> dict[int, tuple[tuple[float, ...], tuple[float, ...]]]:
    """Parse ``{depth: [[gamma...], [beta...]]}``."""
    out = {}
    for key, (g, b) in json.loads(text).items():
        p = int(key)
        if len(g) != p or len(b) != p:
            raise ParameterError(f"median table entry for p={p} has wrong length")
        out[p] = (tuple(map(float, g)), tuple(map(float, b)))
    return out


def dump_median_table(table: Mapping[int, tuple]) -> str:
    return json.dumps({str(p): [list(g), list(b)] for p, (g, b) in sorted(table.items())})


@dataclass(frozen=True)
class InitStrategy:
    """Where the simplex starts: ``random`` (uniform box), ``median`` (table lookup) or ``shortcut``."""

    kind: str = "shortcut"
    gamma_range: tuple[float, float] = (0.0, 2 * math.pi)
    beta_range: tuple[float, float] = (0.0, math.pi)
    table: Mapping[int, tuple] = field(default_factory=lambda: dict(DEFAULT_MEDIAN_TABLE))

    def __post_init__(self):
        if self.kind not in ("random", "median", "shortcut"):
            raise ParameterError(f"unknown init strategy {self.kind!r}")
        for lo, hi in (self.gamma_range, self.beta_range):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ParameterError("random init ranges must be finite and nonempty")

    @classmethod
    def random(cls, gamma_range=(0.0, 2 * math.pi), beta_range=(0.0, math.pi)) -> "InitStrategy":
        return cls("random", tuple(gamma_range), tuple(beta_range))

    @classmethod
    def median(cls, table=None) -> "InitStrategy":
        return cls("median", table=dict(table if table is not None else DEFAULT_MEDIAN_TABLE))

    @classmethod
    def shortcut(cls) -> "InitStrategy":
        return cls("shortcut")


def initial_params(strategy: InitStrategy, p: int, seed=None) -> QaoaParams:
    if p < 1:
        raise ParameterError("p must be >= 1")
    if strategy.kind == "shortcut":
        return QaoaParams((SHORTCUT_GAMMA,) * p, (SHORTCUT_BETA,) * p)
    if strategy.kind == "median":
        if p not in strategy.table:
            raise ParameterError(f"median table has no entry for p={p}")
        g, b = strategy.table[p]
        return QaoaParams(tuple(g), tuple(b))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return QaoaParams(tuple(rng.uniform(*strategy.gamma_range, size=p)),
                      tuple(rng.uniform(*strategy.beta_range, size=p)))


@dataclass(frozen=True)
class OptimizerConfig:
    """``max_evals`` is N_iter and ``shots_per_eval`` N_shots; shots are only spent in sampled mode.

    Exact modes stop at ``tolerance`` or the budget. A sampled objective cannot
    certify convergence, so sampled runs always spend the full budget.
    """

    max_evals: int = 1000
    shots_per_eval: int = 8192
    tolerance: float = 1e-6
    seed: int = 0
    mode: str = "exact"
    noise: NoiseSpec = NOISELESS
    simplex_step: float = 0.2

    def __post_init__(self):
        if self.max_evals < 1:
            raise ParameterError("max_evals must be positive")
        if self.shots_per_eval < 1:
            raise ParameterError("shots_per_eval must be positive")
        if not self.tolerance > 0:
            raise ParameterError("tolerance must be positive")
        if self.mode not in EVAL_MODES:
            raise ParameterError(f"unknown evaluation mode {self.mode!r}")
        if not self.simplex_step > 0:
            raise ParameterError("simplex_step must be positive")


@dataclass
class OptResult:
    best_params: QaoaParams
    best_energy: float
    trace: list[tuple[np.ndarray, float]]
    evals_used: int
    shots_used: int
    best_counts: dict[str, int] | None = None

    def trace_csv(self) -> str:
        p = self.best_params.p
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eval"] + [f"gamma{k + 1}" for k in range(p)] + [f"beta{k + 1}" for k in range(p)] + ["energy"])
        for k, (x, e) in enumerate(self.trace, start=1):
            w.writerow([k] + [repr(float(v)) for v in x] + [repr(float(e))])
        return buf.getvalue()


class Evaluator:
    """Energy of ``H`` at given angles in one of the evaluation modes.

    ``exact`` uses the closed form at p=1 and the statevector otherwise; with
    noise both exact modes apply the analytic channel. ``sampled`` estimates
    the energy from ``shots`` measurements and also returns the counts.
    """

    def __init__(self, H: IsingHamiltonian, mode: str = "exact", noise: NoiseSpec = NOISELESS,
                 shots: int = 8192, cap: int = STATEVECTOR_CAP):
        if mode not in EVAL_MODES:
            raise ParameterError(f"unknown evaluation mode {mode!r}")
        self.H, self.mode, self.noise, self.shots, self.cap = H, mode, noise, shots, cap
        self._diag = None
        self._cost: dict[int, int] = {}

    @property
    def diagonal(self) -> np.ndarray:
        if self._diag is None:
            self._diag = energy_diagonal(self.H, cap=self.cap)
        return self._diag

    def cnots(self, p: int) -> int:
        if p not in self._cost:
            self._cost[p] = circuit_cost(self.H, p)[0]
        return self._cost[p]

    def _state(self, params: QaoaParams) -> np.ndarray:
        return prepare_state(self.H, params, cap=self.cap, diagonal=self.diagonal)

    def energy(self, params: QaoaParams, rng: np.random.Generator | None = None
               ) -> tuple[float, dict[str, int] | None]:
        H = self.H
        if self.mode == "sampled":
            counts = sample(self._state(params), self.shots, self.noise, rng, self.cnots(params.p))
            return self.counts_energy(counts), counts
        if self.mode == "exact" and params.p == 1:
            kern = P1Kernel.from_hamiltonian(H, params.gammas)
            z, zz = (float(v[0, 0]) for v in kern.moments(H.h, params.betas))
        elif self.noise.is_noiseless:
            psi = self._state(params)
            return float(np.dot(np.abs(psi) ** 2, self.diagonal)), None
        else:
            z, zz = split_moments(self._state(params), H)
        return noisy_expectation(H, z, zz, self.noise, self.cnots(params.p)), None

    def with_shots(self, shots: int) -> "Evaluator":
        """Same problem and mode with a different shot count; caches are shared."""
        ev = Evaluator(self.H, self.mode, self.noise, shots, self.cap)
        ev._diag, ev._cost = self._diag, self._cost
        return ev

    def counts_energy(self, counts: Mapping[str, int]) -> float:
        idx = np.array([int(b, 2) if b else 0 for b in counts], dtype=np.int64)
        c = np.array(list(counts.values()), dtype=float)
        return float(c @ self.diagonal[idx] / c.sum())

    def distribution(self, params: QaoaParams) -> np.ndarray:
        """Noisy measurement distribution including readout flips, for exact-mode bitstring draws."""
        probs = output_probabilities(self._state(params), self.noise, self.cnots(params.p))
        f = self.noise.readout_flip
        if f:
            n = self.H.n
            t = probs.reshape((2,) * n) if n else probs
            flip = np.array([[1 - f, f], [f, 1 - f]])
            for q in range(n):
                t = np.moveaxis(np.tensordot(flip, t, axes=([1], [q])), 0, q)
            probs = t.reshape(-1)
        return probs


class _BudgetExhausted(Exception):
    pass


def _run(H: IsingHamiltonian, x0: np.ndarray, cfg: OptimizerConfig, budget: int, ledger: ShotLedger | None,
         phase: str, evaluator: Evaluator | None = None) -> OptResult:
    ev = evaluator or Evaluator(H, cfg.mode, cfg.noise, cfg.shots_per_eval)
    rng = np.random.default_rng(cfg.seed)
    sampled = cfg.mode == "sampled"
    trace: list[tuple[np.ndarray, float]] = []
    best = {"e": math.inf, "x": x0.copy(), "counts": None}

    def objective(x):
        if len(trace) >= budget:
            raise _BudgetExhausted
        params = QaoaParams.from_vector(x)
        e, counts = ev.energy(params, rng)
        if ledger is not None:
            ledger.charge(phase, cfg.shots_per_eval if sampled else 0)
        trace.append((np.array(x, dtype=float), e))
        if e < best["e"]:
            best.update(e=e, x=np.array(x, dtype=float), counts=counts)
        return e

    dim = x0.size
    start = x0
    try:
        while True:
            simplex = np.vstack([start, start + cfg.simplex_step * np.eye(dim)])
            minimize(objective, start, method="Nelder-Mead",
                     options={"initial_simplex": simplex, "maxfev": budget, "maxiter": 10 * budget + 100,
                              "xatol": cfg.tolerance, "fatol": cfg.tolerance})
            # shot noise can make a simplex look converged; sampled runs restart until the budget is spent
            if not sampled or len(trace) >= budget:
                break
            start = best["x"]
    except _BudgetExhausted:
        pass
    n = len(trace)
    return OptResult(QaoaParams.from_vector(best["x"]), float(best["e"]), trace, n,
                     n * cfg.shots_per_eval if sampled else 0, best["counts"])


def optimize(H: IsingHamiltonian, cfg: OptimizerConfig, init: InitStrategy | QaoaParams, p: int = 1,
             ledger: ShotLedger | None = None, phase: str = "training",
             evaluator: Evaluator | None = None) -> OptResult:
    """Minimize the QAOA energy with at most ``cfg.max_evals`` objective evaluations."""
    if isinstance(init, QaoaParams):
        start = init
    else:
        start = initial_params(init, p, np.random.default_rng([cfg.seed, 1]))
    return _run(H, start.to_vector(), cfg, cfg.max_evals, ledger, phase, evaluator)


def fine_tune(H: IsingHamiltonian, start: QaoaParams, epochs: int, cfg: OptimizerConfig,
              ledger: ShotLedger | None = None, evaluator: Evaluator | None = None) -> OptResult:
    """Warm-start optimization limited to ``epochs`` evaluations; one epoch is one evaluation."""
    if epochs < 0:
        raise ParameterError("epochs must be nonnegative")
    if epochs == 0:
        return OptResult(start, math.nan, [], 0, 0)
    return _run(H, start.to_vector(), replace(cfg, max_evals=epochs), epochs, ledger, "fine_tune", evaluator)


def evals_to_threshold(result: OptResult, target: float, rel: float = 0.01) -> int | None:
    """First evaluation (1-based) whose energy is within ``rel * |target|`` of ``target``."""
    bar = target + rel * abs(target)
    for k, (_, e) in enumerate(result.trace, start=1):
        if e <= bar:
            return k
    return None
