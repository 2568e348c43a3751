"""Ising Hamiltonians, exact enumeration and qubit freezing.

Conventions used throughout the package: spin ``+1`` is bit ``0`` and spin
``-1`` is bit ``1``; basis index ``k`` of an ``n``-spin register stores qubit
``0`` in its most significant bit.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .graphs import Graph

__all__ = [
    "IsingHamiltonian",
    "FrozenConfig",
    "SubProblem",
    "ParameterError",
    "ResourceError",
    "maxcut_hamiltonian",
    "graph_hamiltonian",
    "spins_of_index",
    "bitstring_to_spins",
    "spins_to_bitstring",
    "energy_diagonal",
    "classical_energy",
    "brute_force_ground",
    "freeze",
    "enumerate_subproblems",
    "mean_bias_magnitude",
    "stability_bound",
]

BRUTE_FORCE_CAP = 24
SUBPROBLEM_CAP = 12


class ParameterError(ValueError):
    """Invalid argument for an Ising operation."""


class ResourceError(RuntimeError):
    """A size cap (enumeration, statevector, ...) would be exceeded."""


@dataclass(frozen=True, eq=False)
class IsingHamiltonian:
    """H(s) = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + C."""

    n: int
    couplings: Mapping[tuple[int, int], float] = field(default_factory=dict)
    fields: tuple[float, ...] | None = None
    constant: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise ParameterError("negative spin count")
        J = {}
        for (i, j), val in dict(self.couplings).items():
            i, j, val = int(i), int(j), float(val)
            if i == j:
                raise ParameterError(f"diagonal coupling on spin {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ParameterError(f"coupling ({i}, {j}) out of range for n={self.n}")
            if not math.isfinite(val):
                raise ParameterError("non-finite coupling")
            key = (min(i, j), max(i, j))
            J[key] = J.get(key, 0.0) + val
        object.__setattr__(self, "couplings", J)
        h = tuple(float(x) for x in (self.fields if self.fields is not None else [0.0] * self.n))
        if len(h) != self.n:
            raise ParameterError(f"expected {self.n} fields, got {len(h)}")
        if not all(math.isfinite(x) for x in h):
            raise ParameterError("non-finite field")
        object.__setattr__(self, "fields", h)
        if not math.isfinite(self.constant):
            raise ParameterError("non-finite constant")
        object.__setattr__(self, "constant", float(self.constant))

    def __eq__(self, other):
        if not isinstance(other, IsingHamiltonian):
            return NotImplemented
        return (self.n, self.couplings, self.fields, self.constant) == (
            other.n, other.couplings, other.fields, other.constant)

    @cached_property
    def h(self) -> np.ndarray:
        return np.asarray(self.fields, dtype=float)

    @cached_property
    def J(self) -> np.ndarray:
        """Dense symmetric coupling matrix with zero diagonal."""
        mat = np.zeros((self.n, self.n))
        for (i, j), val in self.couplings.items():
            mat[i, j] = mat[j, i] = val
        return mat

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coupling list as ``(i, j, J_ij)`` arrays in sorted key order."""
        keys = sorted(self.couplings)
        i = np.array([k[0] for k in keys], dtype=int)
        j = np.array([k[1] for k in keys], dtype=int)
        w = np.array([self.couplings[k] for k in keys], dtype=float)
        return i, j, w

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.couplings:
            deg[i] += 1
            deg[j] += 1
        return deg

    def with_fields(self, fields: Sequence[float], constant: float | None = None) -> "IsingHamiltonian":
        return IsingHamiltonian(self.n, self.couplings, tuple(fields),
                                self.constant if constant is None else constant)

    def to_json(self) -> str:
        doc = {"n": self.n, "J": [[i, j, v] for (i, j), v in sorted(self.couplings.items())],
               "h": list(self.fields), "c": self.constant}
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "IsingHamiltonian":
        doc = json.loads(text)
        try:
            return cls(int(doc["n"]), {(int(i), int(j)): float(v) for i, j, v in doc["J"]},
                       tuple(doc.get("h") or [0.0] * int(doc["n"])), float(doc.get("c", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed Hamiltonian JSON: {exc}") from exc


@dataclass(frozen=True)
class FrozenConfig:
    """Classical values ``z_k`` assigned to frozen nodes ``k``."""

    nodes: tuple[int, ...] = ()
    values: tuple[int, ...] = ()

    def __post_init__(self):
        nodes = tuple(int(k) for k in self.nodes)
        values = tuple(int(z) for z in self.values)
        if len(nodes) != len(values):
            raise ParameterError("frozen nodes and values differ in length")
        if len(set(nodes)) != len(nodes):
            raise ParameterError("frozen nodes must be distinct")
        if any(z not in (1, -1) for z in values):
            raise ParameterError("frozen values must be +1 or -1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    def to_json(self) -> str:
        return json.dumps({"nodes": list(self.nodes), "values": list(self.values)})

    @classmethod
    def from_json(cls, text: str) -> "FrozenConfig":
        doc = json.loads(text)
        return cls(tuple(doc["nodes"]), tuple(doc["values"]))


@dataclass(frozen=True, eq=False)
class SubProblem:
    """Decimated Hamiltonian on the active spins of a parent problem.

    ``active_map[a]`` is the parent node id of active spin ``a``.
    """

    hamiltonian: IsingHamiltonian
    active_map: tuple[int, ...]
    frozen: FrozenConfig
    parent_n: int
    parent_id: str | None = None


def maxcut_hamiltonian(g: Graph) -> IsingHamiltonian:
    """Diagonal ZZ part of the MaxCut cost: J_ij = w_ij / 2, no fields, no offset."""
    return IsingHamiltonian(g.n, {(u, v): 0.5 * w for u, v, w in g.edges})


def graph_hamiltonian(g: Graph, scale: float = 1.0) -> IsingHamiltonian:
    """J_ij = scale * w_ij on every edge; the unit-coupling convention when ``scale == 1``."""
    return IsingHamiltonian(g.n, {(u, v): scale * w for u, v, w in g.edges})


def spins_of_index(n: int, index) -> np.ndarray:
    """Spins for basis index/indices; returns shape ``index.shape + (n,)``."""
    index = np.asarray(index, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    bits = (index[..., None] >> shifts) & 1
    return (1 - 2 * bits).astype(np.int8)


def bitstring_to_spins(bits: str) -> np.ndarray:
    return np.array([1 if b == "0" else -1 for b in bits], dtype=np.int8)


def spins_to_bitstring(spins) -> str:
    return "".join("0" if s > 0 else "1" for s in spins)


def _diagonal_chunk(H: IsingHamiltonian, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.full(idx.size, H.constant)
    spin = [None] * H.n
    for q in range(H.n):
        spin[q] = (1 - 2 * ((idx >> (H.n - 1 - q)) & 1)).astype(np.float64)
        if H.fields[q]:
            out += H.fields[q] * spin[q]
    for (i, j), val in H.couplings.items():
        out += val * (spin[i] * spin[j])
    return out


def energy_diagonal(H: IsingHamiltonian, cap: int = BRUTE_FORCE_CAP) -> np.ndarray:
    """Classical energy of every basis state, indexed by basis index."""
    if H.n > cap:
        raise ResourceError(f"{H.n} spins exceeds enumeration cap {cap}")
    return _diagonal_chunk(H, 0, 1 << H.n)


def classical_energy(H: IsingHamiltonian, spins) -> float:
    s = np.asarray(spins, dtype=float)
    if s.shape != (H.n,):
        raise ParameterError(f"expected {H.n} spins, got shape {s.shape}")
    if H.n == 0:
        return H.constant
    i, j, w = H.edge_arrays
    return float(H.constant + H.h @ s + (np.sum(w * s[i] * s[j]) if w.size else 0.0))


def brute_force_ground(H: IsingHamiltonian, cap: int = BRUTE_FORCE_CAP,
                       atol: float = 1e-9) -> tuple[float, list[str]]:
    """Exact minimum energy and every minimizing bitstring (ascending order)."""
    if H.n > cap:
        raise ResourceError(f"{H.n} spins exceeds brute-force cap {cap}")
    total = 1 << H.n
    chunk = 1 << 20
    best = math.inf
    winners: list[int] = []
    for start in range(0, total, chunk):
        e = _diagonal_chunk(H, start, min(total, start + chunk))
        emin = float(e.min())
        if emin < best - atol:
            best = emin
            winners = []
        if emin <= best + atol:
            best = min(best, emin)
            winners.extend(int(k) + start for k in np.flatnonzero(e <= best + atol))
    if H.n == 0:
        return H.constant, [""]
    return best, [format(k, f"0{H.n}b") for k in sorted(winners)]


def freeze(H: IsingHamiltonian, cfg: FrozenConfig, parent_id: str | None = None) -> SubProblem:
    """Fix spins in ``cfg`` and fold their couplings into fields and the constant."""
    z = dict(zip(cfg.nodes, cfg.values))
    for k in z:
        if not 0 <= k < H.n:
            raise ParameterError(f"frozen node {k} out of range for n={H.n}")
    active = [v for v in range(H.n) if v not in z]
    pos = {v: a for a, v in enumerate(active)}
    fields = [H.fields[v] for v in active]
    const = H.constant + sum(H.fields[k] * zk for k, zk in z.items())
    couplings = {}
    for (i, j), val in H.couplings.items():
        if i in pos and j in pos:
            couplings[(pos[i], pos[j])] = val
        elif i in pos:
            fields[pos[i]] += val * z[j]
        elif j in pos:
            fields[pos[j]] += val * z[i]
        else:
            const += val * z[i] * z[j]
    sub = IsingHamiltonian(len(active), couplings, tuple(fields), const)
    return SubProblem(sub, tuple(active), cfg, H.n, parent_id)


def enumerate_subproblems(H: IsingHamiltonian, nodes: Sequence[int],
                          cap: int = SUBPROBLEM_CAP) -> list[SubProblem]:
    """All ``2^|nodes|`` decimations, ordered lexicographically with +1 before -1."""
    nodes = tuple(int(k) for k in nodes)
    if len(nodes) > cap:
        raise ResourceError(f"{len(nodes)} frozen nodes exceeds cap {cap} ({2 ** len(nodes)} sub-problems)")
    return [freeze(H, FrozenConfig(nodes, values))
            for values in itertools.product((1, -1), repeat=len(nodes))]


def mean_bias_magnitude(H: IsingHamiltonian) -> float:
    """Mean |h_i| over the spins of ``H``."""
    if H.n == 0:
        raise ParameterError("mean bias of an empty Hamiltonian is undefined")
    return float(np.mean(np.abs(H.h)))


def stability_bound(a: SubProblem, b: SubProblem) -> float:
    """Operator norm of the field difference, sum |h_a - h_b|.

    This bounds the gap between two offset-free landscapes only where both
    sub-problems prepare the same state (for instance gamma = 0). Elsewhere
    the fields also enter the phase separator and the gap can exceed it.
    """
    if a.active_map != b.active_map:
        raise ParameterError("sub-problems have different active sets")
    return float(np.sum(np.abs(a.hamiltonian.h - b.hamiltonian.h)))
