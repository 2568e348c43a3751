import math

import numpy as np
import pytest

from doqaoa.graphs import (UNBOUNDED, Graph, GraphEnsembleSpec, GraphError, derive_seed, diameter, generate,
                           load_graph, lrp_connection_probability, serialize, top_hotspots)


def test_graph_canonicalizes_edges():
    g = Graph(3, ((2, 0, 1.5), (1, 2, 1.0)))
    assert g.edges == ((0, 2, 1.5), (1, 2, 1.0))
    assert list(g.degrees()) == [1, 1, 2]
    assert g.neighbors(2) == [0, 1]


@pytest.mark.parametrize("edges", [((0, 0, 1.0),), ((0, 5, 1.0),), ((0, 1, 1.0), (1, 0, 2.0)),
                                   ((0, 1, math.nan),)])
def test_graph_rejects_bad_edges(edges):
    with pytest.raises(GraphError):
        Graph(3, edges)


def test_networkx_round_trip():
    g = generate(GraphEnsembleSpec("erdos_renyi", 9, seed=4))
    assert Graph.from_networkx(g.to_networkx()) == g


def test_generate_is_pure_function_of_spec():
    spec = GraphEnsembleSpec("power_law", 30, seed=11)
    assert generate(spec) == generate(spec)
    assert generate(spec) != generate(GraphEnsembleSpec("power_law", 30, seed=12))


@pytest.mark.parametrize("d,n", [(3, 10), (4, 9), (2, 6)])
def test_regular_graphs_are_regular(d, n):
    g = generate(GraphEnsembleSpec("regular", n, seed=1, d=d))
    assert set(g.degrees()) == {d}


def test_regular_rejects_impossible():
    with pytest.raises(GraphError):
        generate(GraphEnsembleSpec("regular", 7, d=3))
    with pytest.raises(GraphError):
        generate(GraphEnsembleSpec("regular", 4, d=4))


def test_sk_is_complete_with_signed_weights():
    g = generate(GraphEnsembleSpec("sk", 8, seed=2))
    assert g.num_edges == 28
    assert {w for _, _, w in g.edges} <= {-1.0, 1.0}


def test_power_law_edge_count():
    g = generate(GraphEnsembleSpec("power_law", 20, seed=0, attach=2))
    assert g.num_edges == 2 * (20 - 2)


def test_lrp_probability_formula():
    assert lrp_connection_probability(1.0, 1.0) == pytest.approx(1 - math.exp(-1))
    r = np.array([1.0, 2.0, 10.0])
    assert np.allclose(lrp_connection_probability(r, 2.0), 1 - np.exp(-r ** -2.0))


def test_lrp_nearest_neighbour_rate():
    hits = sum(generate(GraphEnsembleSpec("lrp", 2, seed=k, s=1.3)).num_edges for k in range(4000))
    assert abs(hits / 4000 - (1 - math.exp(-1))) < 0.03


def test_lrp_periodic_uses_ring_distance():
    # with a huge exponent only distance-1 pairs survive; the ring closes 0 -- n-1
    g = generate(GraphEnsembleSpec("lrp", 6, seed=0, s=60.0, periodic=True))
    for u, v, _ in g.edges:
        assert min(v - u, 6 - (v - u)) == 1


def test_lrp_rejects_nonpositive_s():
    with pytest.raises(GraphError):
        generate(GraphEnsembleSpec("lrp", 5, s=0.0))


def test_unknown_kind():
    with pytest.raises(GraphError):
        generate(GraphEnsembleSpec("smallworld", 5))


def test_top_hotspots_tie_break():
    g = Graph(5, ((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)))
    assert top_hotspots(g, 2) == [1, 2]
    assert top_hotspots(g, 0) == []
    with pytest.raises(GraphError):
        top_hotspots(g, 6)


def test_diameter():
    path = Graph(4, ((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)))
    assert diameter(path) == 3
    assert diameter(Graph(1)) == 0
    assert diameter(Graph(3, ((0, 1, 1.0),))) == UNBOUNDED


def test_edge_list_round_trip_preserves_weights():
    g = Graph(4, ((0, 1, 0.1), (2, 3, -1.0 / 3.0)))
    assert load_graph(serialize(g)) == g
    assert load_graph(serialize(g, "json")) == g


def test_edge_list_with_comments_and_sparse_ids():
    g = load_graph("# a comment\n10 20\n20 30 2.5  # trailing\n\n")
    assert g.n == 3
    assert g.labels == ("10", "20", "30")
    assert g.edges == ((0, 1, 1.0), (1, 2, 2.5))


def test_edge_list_header_keeps_isolated_nodes():
    g = load_graph("n 5\n0 1\n")
    assert g.n == 5 and g.num_edges == 1


@pytest.mark.parametrize("text,line", [("0 1\n1 x\n", 2), ("0 1\n0 1\n", 2), ("0 1 2 3\n", 1), ("3 3\n", 1),
                                       ("n 2\n0 5\n", 2)])
def test_edge_list_errors_name_the_line(text, line):
    with pytest.raises(GraphError, match=f"line {line}"):
        load_graph(text)


def test_derive_seed_is_stable():
    assert derive_seed(5, 3) == derive_seed(5, 3)
    assert derive_seed(5, 3) != derive_seed(5, 4)
