"""Energy landscapes over (gamma, beta) grids and their similarity measures."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exact import P1Kernel
from .graphs import GraphEnsembleSpec, derive_seed, generate, top_hotspots
from .ising import (FrozenConfig, IsingHamiltonian, ParameterError, ResourceError, energy_diagonal, freeze,
                    graph_hamiltonian)
from .qaoa import NOISELESS, NoiseSpec, QaoaParams, STATEVECTOR_CAP, circuit_cost, energy_from_counts, \
    prepare_state, sample

__all__ = [
    "GridSpec",
    "LandscapeGrid",
    "OverlapReport",
    "Comparison",
    "Clustering",
    "DegenerateLandscapeError",
    "evaluate_grid",
    "standardize",
    "cosine_similarity",
    "overlap_q",
    "compare",
    "replica_overlap_experiment",
    "ReplicaResult",
    "cluster_landscapes",
    "MODES",
]

MODES = ("exact-p1", "statevector", "sampled")


class DegenerateLandscapeError(ValueError):
    """A constant landscape has no shape to standardize or correlate."""


@dataclass(frozen=True)
class GridSpec:
    """Half-open parameter box sampled at ``resolution`` points per axis (endpoint excluded)."""

    gamma_range: tuple[float, float] = (-math.pi, math.pi)
    beta_range: tuple[float, float] = (-math.pi / 2, math.pi / 2)
    resolution: tuple[int, int] = (32, 32)

    def __post_init__(self):
        for lo, hi in (self.gamma_range, self.beta_range):
            if not lo < hi:
                raise ParameterError(f"empty range [{lo}, {hi})")
        if min(self.resolution) < 2:
            raise ParameterError("resolution must be at least 2 per axis")
        object.__setattr__(self, "gamma_range", tuple(map(float, self.gamma_range)))
        object.__setattr__(self, "beta_range", tuple(map(float, self.beta_range)))
        object.__setattr__(self, "resolution", tuple(map(int, self.resolution)))

    @property
    def gammas(self) -> np.ndarray:
        return np.linspace(*self.gamma_range, self.resolution[0], endpoint=False)

    @property
    def betas(self) -> np.ndarray:
        return np.linspace(*self.beta_range, self.resolution[1], endpoint=False)

    def as_dict(self) -> dict:
        return {"gamma_range": list(self.gamma_range), "beta_range": list(self.beta_range),
                "resolution": list(self.resolution)}


@dataclass(frozen=True, eq=False)
class LandscapeGrid:
    spec: GridSpec
    values: np.ndarray
    source: str = "exact-p1"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.spec.resolution:
            raise ParameterError(f"values shape {vals.shape} does not match resolution {self.spec.resolution}")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("landscape contains non-finite values")
        object.__setattr__(self, "values", vals)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gamma", "beta", "energy"])
        for a, g in enumerate(self.spec.gammas):
            for b, bt in enumerate(self.spec.betas):
                w.writerow([repr(float(g)), repr(float(bt)), repr(float(self.values[a, b]))])
        return buf.getvalue()

    def argmin(self) -> tuple[float, float]:
        a, b = np.unravel_index(np.argmin(self.values), self.values.shape)
        return float(self.spec.gammas[a]), float(self.spec.betas[b])


def evaluate_grid(H: IsingHamiltonian, spec: GridSpec, mode: str = "exact-p1", *, shots: int = 8192,
                  noise: NoiseSpec = NOISELESS, seed=None, cap: int = STATEVECTOR_CAP) -> LandscapeGrid:
    """p=1 energy at every grid point; rows are gamma values, columns beta values."""
    if mode == "exact-p1":
        return LandscapeGrid(spec, P1Kernel.from_hamiltonian(H, spec.gammas).landscape(H.h, spec.betas, H.constant),
                             mode)
    if mode not in MODES:
        raise ParameterError(f"unknown landscape mode {mode!r}")
    if H.n > cap:
        raise ResourceError(f"{H.n} qubits exceeds statevector cap {cap}")
    diag = energy_diagonal(H)
    rng = np.random.default_rng(seed)
    cnots = circuit_cost(H, 1)[0]
    vals = np.empty(spec.resolution)
    for a, g in enumerate(spec.gammas):
        for b, bt in enumerate(spec.betas):
            psi = prepare_state(H, QaoaParams((g,), (bt,)), diagonal=diag)
            if mode == "statevector":
                vals[a, b] = float(np.dot(np.abs(psi) ** 2, diag))
            else:
                vals[a, b] = energy_from_counts(sample(psi, shots, noise, rng, cnots), H)
    return LandscapeGrid(spec, vals, mode)


def _values(grid) -> np.ndarray:
    return grid.values if isinstance(grid, LandscapeGrid) else np.asarray(grid, dtype=float)


def standardize(grid):
    """Zero mean, unit population standard deviation over all grid points."""
    v = _values(grid)
    mu = v.mean()
    sigma = v.std()
    if sigma <= 1e-12 * max(1.0, abs(mu)):
        raise DegenerateLandscapeError("landscape is constant")
    out = (v - mu) / sigma
    if isinstance(grid, LandscapeGrid):
        return LandscapeGrid(grid.spec, out, grid.source)
    return out


def _check_same_spec(a, b):
    if isinstance(a, LandscapeGrid) and isinstance(b, LandscapeGrid) and a.spec != b.spec:
        raise ParameterError("landscapes were evaluated on different grids")
    if _values(a).shape != _values(b).shape:
        raise ParameterError("landscape shapes differ")


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between the standardized, flattened landscapes."""
    _check_same_spec(a, b)
    x = _values(standardize(a)).ravel()
    y = _values(standardize(b)).ravel()
    return float(np.clip(x @ y / (np.linalg.norm(x) * np.linalg.norm(y)), -1.0, 1.0))


@dataclass
class OverlapReport:
    similarity: np.ndarray
    q: float
    pairs: list[tuple[int, int, float]] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"q": self.q, "S": self.similarity.tolist(),
                           "pairs": [list(p) for p in self.pairs]})


def _similarity_matrix(grids) -> np.ndarray:
    Z = np.stack([_values(standardize(g)).ravel() for g in grids])
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    S = np.clip(Z @ Z.T, -1.0, 1.0)
    S = 0.5 * (S + S.T)
    np.fill_diagonal(S, 1.0)
    return S


def overlap_q(grids) -> OverlapReport:
    """Mean pairwise cosine similarity among ``M >= 2`` landscapes."""
    grids = list(grids)
    if len(grids) < 2:
        raise ParameterError("overlap needs at least two landscapes")
    for g in grids[1:]:
        _check_same_spec(grids[0], g)
    S = _similarity_matrix(grids)
    pairs = [(k, l, float(S[k, l])) for k, l in itertools.combinations(range(len(grids)), 2)]
    q = float(np.mean([p[2] for p in pairs]))
    return OverlapReport(S, q, pairs)


@dataclass(frozen=True)
class Comparison:
    pearson_r: float
    mse_raw: float
    linf: float


def compare(a, b) -> Comparison:
    """Pearson r of the two surfaces plus raw-value MSE and max-abs distance."""
    _check_same_spec(a, b)
    x, y = _values(a).ravel(), _values(b).ravel()
    dx, dy = x - x.mean(), y - y.mean()
    den = math.sqrt(float(dx @ dx)) * math.sqrt(float(dy @ dy))
    if den == 0.0:
        raise DegenerateLandscapeError("correlation undefined for a constant landscape")
    diff = x - y
    return Comparison(float(np.clip(dx @ dy / den, -1.0, 1.0)), float(np.mean(diff ** 2)),
                      float(np.max(np.abs(diff))))


@dataclass
class ReplicaResult:
    L: int
    s: float
    q_values: list[float]
    graph_seeds: list[int]
    m_frozen: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.q_values))


def _replica_configs(m: int, M: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    if M > 2 ** m:
        raise ParameterError(f"cannot draw {M} distinct configurations of {m} frozen spins")
    if m <= 20 and M * 4 >= 2 ** m:
        picks = np.sort(rng.choice(2 ** m, size=M, replace=False))
        return [tuple(1 - 2 * ((int(k) >> (m - 1 - b)) & 1) for b in range(m)) for k in picks]
    seen: set[tuple[int, ...]] = set()
    out = []
    while len(out) < M:
        cfg = tuple(int(v) for v in rng.choice((1, -1), size=m))
        if cfg not in seen:
            seen.add(cfg)
            out.append(cfg)
    return out


def replica_overlap_experiment(L: int, s: float, M: int = 8, m_frozen: int = 3, n_graphs: int = 10,
                               spec: GridSpec | None = None, seed: int = 0,
                               frozen_fraction: float | None = None,
                               periodic: bool = False) -> ReplicaResult:
    """Landscape overlap q over frozen replicas of LRP graphs.

    Each graph gets unit couplings; its top-degree nodes are frozen into ``M``
    distinct random configurations and q is taken over the exact p=1 grids.
    With ``frozen_fraction`` the frozen count is ``round(fraction * L)``.
    Graph ``k`` uses seed ``derive_seed(seed, k)`` for every ``s``, so curves
    at different ``s`` share their random numbers and LRP graphs are nested.
    """
    spec = spec or GridSpec(resolution=(16, 16))
    m = max(1, int(round(frozen_fraction * L))) if frozen_fraction is not None else int(m_frozen)
    if m > L:
        raise ParameterError(f"cannot freeze {m} of {L} nodes")
    if M > 2 ** m:
        raise ParameterError(f"M={M} replicas need at least {math.ceil(math.log2(M))} frozen nodes")
    qs, seeds = [], []
    for k in range(n_graphs):
        gseed = derive_seed(seed, k)
        g = generate(GraphEnsembleSpec("lrp", L, seed=gseed, s=s, periodic=periodic))
        H = graph_hamiltonian(g)
        nodes = tuple(top_hotspots(g, m))
        rng = np.random.default_rng(derive_seed(gseed, 1))
        subs = [freeze(H, FrozenConfig(nodes, z)).hamiltonian for z in _replica_configs(m, M, rng)]
        kern = P1Kernel.from_hamiltonian(subs[0], spec.gammas)
        grids = [kern.landscape(sub.h, spec.betas, sub.constant) for sub in subs]
        try:
            qs.append(overlap_q(grids).q)
        except DegenerateLandscapeError:
            # an edgeless, field-free replica has a flat landscape; nothing to compare
            continue
        seeds.append(gseed)
    return ReplicaResult(L, float(s), qs, seeds, m)


@dataclass
class Clustering:
    K: int
    representatives: list[int]
    assignment: list[int]


def cluster_landscapes(grids, threshold: float = 0.9) -> Clustering:
    """Single-linkage groups of landscapes whose pairwise similarity reaches ``threshold``.

    Each cluster is represented by its medoid (highest mean within-cluster
    similarity, lowest index on ties). Clusters are numbered by their
    smallest member.
    """
    grids = list(grids)
    if not grids:
        raise ParameterError("no landscapes to cluster")
    if not -1.0 < threshold <= 1.0:
        raise ParameterError("threshold must lie in (-1, 1]")
    M = len(grids)
    S = _similarity_matrix(grids) if M > 1 else np.ones((1, 1))
    parent = list(range(M))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k, l in itertools.combinations(range(M), 2):
        if S[k, l] >= threshold - 1e-12:
            rk, rl = find(k), find(l)
            if rk != rl:
                parent[max(rk, rl)] = min(rk, rl)
    roots = sorted({find(k) for k in range(M)})
    label = {r: c for c, r in enumerate(roots)}
    assignment = [label[find(k)] for k in range(M)]
    reps = []
    for c in range(len(roots)):
        members = [k for k in range(M) if assignment[k] == c]
        scores = [S[k, members].mean() for k in members]
        reps.append(members[int(np.argmax(scores))])
    return Clustering(len(roots), reps, assignment)
