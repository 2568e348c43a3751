"""Interaction graphs: representation, random ensembles, hotspots and I/O."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np

__all__ = [
    "Graph",
    "GraphEnsembleSpec",
    "GraphError",
    "UNBOUNDED",
    "derive_seed",
    "generate",
    "top_hotspots",
    "diameter",
    "load_graph",
    "serialize",
    "lrp_connection_probability",
]

#: Returned by :func:`diameter` for disconnected graphs.
UNBOUNDED = math.inf

ENSEMBLE_KINDS = ("power_law", "regular", "sk", "erdos_renyi", "lrp")


class GraphError(ValueError):
    """Invalid graph, ensemble parameters or graph text."""


@dataclass(frozen=True)
class Graph:
    """Undirected weighted simple graph on nodes ``0..n-1``.

    Edges are stored with ``u < v`` in insertion order.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 0:
            raise GraphError(f"negative node count {self.n}")
        canon = []
        seen = set()
        for e in self.edges:
            u, v, w = int(e[0]), int(e[1]), float(e[2])
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={self.n}")
            if not math.isfinite(w):
                raise GraphError(f"non-finite weight on edge ({u}, {v})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
            canon.append((key[0], key[1], w))
        object.__setattr__(self, "edges", tuple(canon))
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.n:
                raise GraphError("labels must have one entry per node")
            object.__setattr__(self, "labels", labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def neighbors(self, node: int) -> list[int]:
        return sorted([v for u, v, _ in self.edges if u == node] + [u for u, v, _ in self.edges if v == node])

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from(self.edges)
        return g

    @classmethod
    def from_networkx(cls, g: nx.Graph, weight: str = "weight") -> "Graph":
        nodes = sorted(g.nodes())
        index = {v: i for i, v in enumerate(nodes)}
        edges = [(index[u], index[v], float(d.get(weight, 1.0))) for u, v, d in g.edges(data=True)]
        return cls(len(nodes), tuple(edges))


@dataclass(frozen=True)
class GraphEnsembleSpec:
    """Parameters of a random graph ensemble.

    ``kind`` is one of ``power_law`` (Barabasi-Albert with ``attach`` edges per
    new node), ``regular`` (degree ``d``), ``sk`` (complete graph, +-1 weights),
    ``erdos_renyi`` (edge probability ``p``) or ``lrp`` (long-range percolation
    on a 1-D lattice with decay exponent ``s``).
    """

    kind: str
    n: int
    seed: int = 0
    attach: int = 2
    d: int = 3
    p: float = 0.5
    s: float = 1.0
    periodic: bool = False

    def validate(self) -> None:
        if self.kind not in ENSEMBLE_KINDS:
            raise GraphError(f"unknown ensemble kind {self.kind!r}; expected one of {ENSEMBLE_KINDS}")
        if self.n < 0:
            raise GraphError("n must be nonnegative")
        if self.kind == "regular":
            if self.d < 0 or self.d >= max(self.n, 1) or (self.n * self.d) % 2:
                raise GraphError(f"no {self.d}-regular graph on {self.n} nodes (need d < n and n*d even)")
        if self.kind == "erdos_renyi" and not 0.0 <= self.p <= 1.0:
            raise GraphError(f"edge probability {self.p} outside [0, 1]")
        if self.kind == "lrp" and not self.s > 0:
            raise GraphError("LRP decay exponent s must be positive")
        if self.kind == "power_law" and not 1 <= self.attach < max(self.n, 2):
            raise GraphError(f"attach={self.attach} requires 1 <= attach < n")


def derive_seed(seed: int, index: int) -> int:
    """Per-instance seed that depends only on ``(seed, index)``."""
    return int(np.random.SeedSequence([int(seed) & (2**64 - 1), int(index)]).generate_state(1, np.uint64)[0])


def lrp_connection_probability(r, s: float):
    """p(r) = 1 - exp(-r^-s)."""
    r = np.asarray(r, dtype=float)
    return -np.expm1(-(r ** -s))


def _lrp(n: int, s: float, rng: np.random.Generator, periodic: bool) -> Graph:
    if n < 2:
        return Graph(n)
    iu, ju = np.triu_indices(n, k=1)
    r = (ju - iu).astype(float)
    if periodic:
        r = np.minimum(r, n - r)
    keep = rng.random(r.size) < lrp_connection_probability(r, s)
    return Graph(n, tuple((int(u), int(v), 1.0) for u, v in zip(iu[keep], ju[keep])))


def generate(spec: GraphEnsembleSpec) -> Graph:
    """Draw one graph from ``spec``; a pure function of its fields, seed included."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    if spec.kind == "lrp":
        return _lrp(n, spec.s, rng, spec.periodic)
    if spec.kind == "sk":
        iu, ju = np.triu_indices(n, k=1)
        w = rng.choice([-1.0, 1.0], size=iu.size)
        return Graph(n, tuple((int(u), int(v), float(x)) for u, v, x in zip(iu, ju, w)))
    nx_seed = int(rng.integers(2**31 - 1))
    if spec.kind == "erdos_renyi":
        g = nx.gnp_random_graph(n, spec.p, seed=nx_seed)
    elif spec.kind == "regular":
        g = nx.random_regular_graph(spec.d, n, seed=nx_seed)
    else:
        g = nx.barabasi_albert_graph(n, spec.attach, seed=nx_seed)
    edges = sorted((min(u, v), max(u, v)) for u, v in g.edges())
    return Graph(n, tuple((u, v, 1.0) for u, v in edges))


def top_hotspots(g: Graph, m: int) -> list[int]:
    """The ``m`` highest-degree nodes; equal degrees go to the lower node id."""
    if not 0 <= m <= g.n:
        raise GraphError(f"cannot pick {m} hotspots from {g.n} nodes")
    deg = g.degrees()
    return sorted(range(g.n), key=lambda v: (-deg[v], v))[:m]


def diameter(g: Graph):
    """Largest unweighted geodesic distance, or :data:`UNBOUNDED` if disconnected."""
    if g.n <= 1:
        return 0
    ng = g.to_networkx()
    if not nx.is_connected(ng):
        return UNBOUNDED
    return int(nx.diameter(ng))


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GraphError(f"line {lineno}: expected integer node id, got {tok!r}") from None


def load_graph(text: str, n: int | None = None) -> Graph:
    """Parse an edge list (``u v [w]`` per line, optional ``n <count>`` header) or graph JSON.

    Without a known node count, non-dense ids are remapped to ``0..k-1`` in
    ascending order and the original ids are kept as labels.
    """
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
            edges = [(int(u), int(v), float(w)) for u, v, w in doc["edges"]]
            return Graph(int(doc["n"]), tuple(edges), tuple(doc["labels"]) if doc.get("labels") else None)
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"malformed graph JSON: {exc}") from exc

    raw: list[tuple[int, int, float, int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "n":
            if len(toks) != 2 or raw:
                raise GraphError(f"line {lineno}: malformed header")
            n = _parse_int(toks[1], lineno)
            continue
        if len(toks) not in (2, 3):
            raise GraphError(f"line {lineno}: expected 'u v w', got {line!r}")
        u, v = _parse_int(toks[0], lineno), _parse_int(toks[1], lineno)
        try:
            w = float(toks[2]) if len(toks) == 3 else 1.0
        except ValueError:
            raise GraphError(f"line {lineno}: bad weight {toks[2]!r}") from None
        if not math.isfinite(w):
            raise GraphError(f"line {lineno}: non-finite weight")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop on node {u}")
        if u < 0 or v < 0:
            raise GraphError(f"line {lineno}: negative node id")
        raw.append((u, v, w, lineno))

    labels = None
    if n is None:
        ids = sorted({x for u, v, _, _ in raw for x in (u, v)})
        if ids == list(range(len(ids))):
            remap = {i: i for i in ids}
        else:
            remap = {x: i for i, x in enumerate(ids)}
            labels = tuple(str(x) for x in ids)
        n = len(ids)
    else:
        remap = None

    seen = set()
    edges = []
    for u, v, w, lineno in raw:
        if remap is not None:
            u, v = remap[u], remap[v]
        elif u >= n or v >= n:
            raise GraphError(f"line {lineno}: node id out of range for n={n}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"line {lineno}: duplicate edge {key}")
        seen.add(key)
        edges.append((u, v, w))
    return Graph(n, tuple(edges), labels)


def serialize(g: Graph, fmt: str = "edgelist") -> str:
    """Inverse of :func:`load_graph`; floats are written with ``repr`` so values round-trip exactly."""
    if fmt == "json":
        doc = {"n": g.n, "edges": [[u, v, w] for u, v, w in g.edges], "labels": list(g.labels) if g.labels else []}
        return json.dumps(doc)
    if fmt != "edgelist":
        raise GraphError(f"unknown graph format {fmt!r}")
    lines = [f"n {g.n}"] + [f"{u} {v} {w!r}" for u, v, w in g.edges]
    return "\n".join(lines) + "\n"
