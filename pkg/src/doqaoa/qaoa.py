"""Depth-p QAOA simulation, shot sampling, a simple noise channel and circuit cost."""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .ising import (IsingHamiltonian, ParameterError, ResourceError, bitstring_to_spins, spins_of_index,
                    classical_energy, energy_diagonal)

__all__ = [
    "QaoaParams",
    "NoiseSpec",
    "ShotLedger",
    "STATEVECTOR_CAP",
    "prepare_state",
    "expectation",
    "noisy_expectation",
    "split_moments",
    "PHASES",
    "NOISELESS",
    "output_probabilities",
    "sample",
    "energy_from_counts",
    "circuit_cost",
    "counts_to_json",
    "counts_from_json",
]

STATEVECTOR_CAP = 20


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(x) for x in np.atleast_1d(self.gammas))
        b = tuple(float(x) for x in np.atleast_1d(self.betas))
        if len(g) != len(b) or not g:
            raise ParameterError("need p >= 1 gammas and the same number of betas")
        if not np.all(np.isfinite(g + b)):
            raise ParameterError("non-finite QAOA angle")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    @property
    def p(self) -> int:
        return len(self.gammas)

    def to_vector(self) -> np.ndarray:
        return np.array(self.gammas + self.betas)

    @classmethod
    def from_vector(cls, x) -> "QaoaParams":
        x = np.asarray(x, dtype=float)
        p = x.size // 2
        return cls(tuple(x[:p]), tuple(x[p:]))


@dataclass(frozen=True)
class NoiseSpec:
    """Global depolarizing per two-qubit gate plus independent readout flips."""

    depolarizing2q: float = 0.0
    readout_flip: float = 0.0

    def __post_init__(self):
        for name in ("depolarizing2q", "readout_flip"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ParameterError(f"{name}={val} outside [0, 1]")

    @property
    def is_noiseless(self) -> bool:
        return self.depolarizing2q == 0.0 and self.readout_flip == 0.0

    def depolarizing_weight(self, cnots: int) -> float:
        """lambda = 1 - (1 - p2q)^cnots, the weight of the maximally mixed state."""
        return 1.0 - (1.0 - self.depolarizing2q) ** cnots


NOISELESS = NoiseSpec()

PHASES = ("training", "fine_tune", "evaluation")


class ShotLedger:
    """Shots and objective evaluations charged per pipeline phase."""

    def __init__(self):
        self._lock = threading.Lock()
        self.shots = {ph: 0 for ph in PHASES}
        self.evals = {ph: 0 for ph in PHASES}

    def charge(self, phase: str, shots: int, evals: int = 1) -> None:
        if phase not in PHASES:
            raise ParameterError(f"unknown ledger phase {phase!r}")
        if shots < 0 or evals < 0:
            raise ParameterError("ledger charges must be nonnegative")
        with self._lock:
            self.shots[phase] += int(shots)
            self.evals[phase] += int(evals)

    def merge(self, other: "ShotLedger") -> None:
        for ph in PHASES:
            self.charge(ph, other.shots[ph], other.evals[ph])

    @property
    def total_shots(self) -> int:
        return sum(self.shots.values())

    @property
    def total_evals(self) -> int:
        return sum(self.evals.values())

    def as_dict(self) -> dict:
        return {"shots": dict(self.shots), "evals": dict(self.evals),
                "total_shots": self.total_shots, "total_evals": self.total_evals}

    def __repr__(self):
        return f"ShotLedger({self.as_dict()})"


def _apply_mixer(psi: np.ndarray, n: int, beta: float) -> np.ndarray:
    c, s = np.cos(beta), -1j * np.sin(beta)
    for q in range(n):
        v = psi.reshape(1 << q, 2, 1 << (n - q - 1))
        a0 = v[:, 0, :].copy()
        a1 = v[:, 1, :]
        v[:, 0, :] = c * a0 + s * a1
        v[:, 1, :] = s * a0 + c * a1
    return psi


def prepare_state(H: IsingHamiltonian, params: QaoaParams, cap: int = STATEVECTOR_CAP,
                  diagonal: np.ndarray | None = None) -> np.ndarray:
    """Amplitudes of prod_k exp(-i beta_k sum X) exp(-i gamma_k H) |+>^n."""
    if H.n > cap:
        raise ResourceError(f"{H.n} qubits exceeds statevector cap {cap}")
    diag = energy_diagonal(H) if diagonal is None else diagonal
    # constant offset only contributes a global phase
    diag = diag - H.constant
    psi = np.full(1 << H.n, 2.0 ** (-H.n / 2), dtype=complex)
    for gamma, beta in zip(params.gammas, params.betas):
        psi *= np.exp(-1j * gamma * diag)
        _apply_mixer(psi, H.n, beta)
    return psi


def expectation(state: np.ndarray, H: IsingHamiltonian, diagonal: np.ndarray | None = None) -> float:
    if state.shape != (1 << H.n,):
        raise ParameterError(f"state of length {state.size} does not match {H.n} qubits")
    diag = energy_diagonal(H) if diagonal is None else diagonal
    return float(np.dot(np.abs(state) ** 2, diag))


def split_moments(state: np.ndarray, H: IsingHamiltonian) -> tuple[float, float]:
    """(sum h_i <Z_i>, sum J_ij <Z_i Z_j>) of a statevector."""
    probs = np.abs(state) ** 2
    if H.n == 0:
        return 0.0, 0.0
    spins = spins_of_index(H.n, np.arange(probs.size)).astype(float)
    z = probs @ spins
    i, j, w = H.edge_arrays
    zz = float(np.sum(w * (probs @ (spins[:, i] * spins[:, j])))) if w.size else 0.0
    return float(H.h @ z), zz


def noisy_expectation(H: IsingHamiltonian, z_moment: float, zz_moment: float,
                      noise: NoiseSpec, cnots: int) -> float:
    """Expected energy under the noise channel, from the noiseless field and coupling moments.

    Depolarizing mixes in the maximally mixed state, which carries no Z
    moments; each readout flip shrinks a single Z moment by ``1 - 2 flip``.
    """
    lam = noise.depolarizing_weight(cnots)
    f = 1.0 - 2.0 * noise.readout_flip
    return H.constant + (1.0 - lam) * (f * z_moment + f * f * zz_moment)


def output_probabilities(state: np.ndarray, noise: NoiseSpec = NOISELESS, cnots: int = 0) -> np.ndarray:
    """Measurement distribution after depolarizing mixing (readout flips excluded)."""
    probs = np.abs(state) ** 2
    probs /= probs.sum()
    lam = noise.depolarizing_weight(cnots)
    if lam:
        probs = (1.0 - lam) * probs + lam / probs.size
    return probs


def sample(state: np.ndarray, shots: int, noise: NoiseSpec = NOISELESS, seed=None,
           cnots: int = 0) -> dict[str, int]:
    """Draw ``shots`` measurements; keys are bitstrings with qubit 0 first."""
    if shots < 0:
        raise ParameterError("shots must be nonnegative")
    n = int(round(np.log2(state.size)))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    probs = output_probabilities(state, noise, cnots)
    counts = rng.multinomial(shots, probs)
    idx = np.repeat(np.flatnonzero(counts), counts[counts > 0])
    if noise.readout_flip > 0 and n > 0 and idx.size:
        flips = rng.random((idx.size, n)) < noise.readout_flip
        weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
        idx = idx ^ (flips.astype(np.int64) @ weights)
    keys, vals = np.unique(idx, return_counts=True)
    return {format(int(k), f"0{n}b") if n else "": int(c) for k, c in zip(keys, vals)}


def energy_from_counts(counts: Mapping[str, int], H: IsingHamiltonian) -> float:
    total = sum(counts.values())
    if not counts or total <= 0:
        raise ParameterError("empty counts")
    acc = 0.0
    for bits, c in counts.items():
        acc += c * classical_energy(H, bitstring_to_spins(bits))
    return acc / total


def circuit_cost(H: IsingHamiltonian, p: int) -> tuple[int, int]:
    """(CNOT count, depth estimate): two CNOTs per ZZ term per layer, p * (max degree + 1) depth."""
    if p < 1:
        raise ParameterError("p must be >= 1")
    deg = H.degrees()
    max_deg = int(deg.max()) if deg.size else 0
    return 2 * len(H.couplings) * p, p * (max_deg + 1)


def counts_to_json(counts: Mapping[str, int]) -> str:
    return json.dumps(dict(sorted(counts.items())))


def counts_from_json(text: str) -> dict[str, int]:
    return {str(k): int(v) for k, v in json.loads(text).items()}
