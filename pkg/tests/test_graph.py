from __future__ import annotations

import itertools
import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sentlu.graph import (
    GraphError,
    LabeledGraph,
    canonical_certificate,
    connected_components,
    degree,
    dump_graphs,
    is_planar,
    iter_records,
    load_graphs,
)


def star(k: int) -> LabeledGraph:
    return LabeledGraph.unlabeled(k + 1, [(0, i) for i in range(1, k + 1)])


def complete(n: int) -> LabeledGraph:
    return LabeledGraph.unlabeled(n, itertools.combinations(range(n), 2))


def random_graph(rng, n_max=8, labels="AB", edge_labels="xy"):
    n = int(rng.integers(1, n_max + 1))
    p = rng.random()
    nl = [labels[int(rng.integers(len(labels)))] for _ in range(n)]
    edges = [(u, v, edge_labels[int(rng.integers(len(edge_labels)))])
             for u, v in itertools.combinations(range(n), 2) if rng.random() < p]
    return LabeledGraph.build(nl, edges, tuple(sorted(set(labels))), tuple(sorted(set(edge_labels))))


def brute_isomorphic(g: LabeledGraph, h: LabeledGraph) -> bool:
    if g.n != h.n or g.m != h.m:
        return False
    target = {(u, v): b for u, v, b in h.labeled_edges()}
    for perm in itertools.permutations(range(g.n)):
        if any(g.node_label(v) != h.node_label(perm[v]) for v in range(g.n)):
            continue
        if all(target.get(tuple(sorted((perm[u], perm[v])))) == b for u, v, b in g.labeled_edges()):
            return True
    return False


@st.composite
def graphs(draw, n_max=9):
    n = draw(st.integers(1, n_max))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    nl = draw(st.lists(st.sampled_from("CNO"), min_size=n, max_size=n))
    el = draw(st.lists(st.sampled_from(["single", "double"]), min_size=len(chosen), max_size=len(chosen)))
    return LabeledGraph.build(nl, [(u, v, b) for (u, v), b in zip(chosen, el)])


# --- construction -----------------------------------------------------------

def test_rejects_self_loop_and_duplicates():
    with pytest.raises(GraphError):
        LabeledGraph.unlabeled(2, [(1, 1)])
    with pytest.raises(GraphError):
        LabeledGraph.unlabeled(2, [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        LabeledGraph.unlabeled(2, [(0, 2)])


def test_edges_are_normalized_and_labels_resolved():
    g = LabeledGraph.build(["C", "O"], [(1, 0, "double")])
    assert g.labeled_edges() == [(0, 1, "double")]
    assert g.edge_label(1, 0) == "double"
    assert g.node_label(1) == "O"


# --- degree -----------------------------------------------------------------

def test_degree_examples():
    s3 = star(3)
    assert degree(s3, 0) == 3
    assert all(degree(s3, v) == 1 for v in (1, 2, 3))
    assert degree(LabeledGraph.unlabeled(1, []), 0) == 0
    with pytest.raises((IndexError, ValueError)):
        degree(s3, 4)


@given(graphs())
def test_degree_sum_is_twice_edge_count(g):
    assert sum(degree(g, v) for v in range(g.n)) == 2 * g.m


# --- components -------------------------------------------------------------

def test_connected_components_examples():
    assert connected_components(LabeledGraph.unlabeled(3, [(0, 1), (1, 2)])) == [[0, 1, 2]]
    assert len(connected_components(LabeledGraph.unlabeled(4, [(0, 1), (2, 3)]))) == 2
    assert connected_components(LabeledGraph.unlabeled(3, [])) == [[0], [1], [2]]


@given(graphs())
def test_components_partition_nodes(g):
    comps = connected_components(g)
    assert sorted(v for c in comps for v in c) == list(range(g.n))
    assert len(comps) == nx.number_connected_components(g.to_networkx())


# --- canonical certificates -------------------------------------------------

def test_certificate_examples():
    p = LabeledGraph.unlabeled(3, [(0, 1), (1, 2)])
    p_rev = p.relabel([2, 1, 0])
    tri = complete(3)
    assert canonical_certificate(p) == canonical_certificate(p_rev)
    assert canonical_certificate(p) != canonical_certificate(tri)


def test_certificate_matches_brute_force_isomorphism():
    rng = np.random.default_rng(1)
    pairs = 0
    while pairs < 200:
        g = random_graph(rng)
        # half the time compare against a relabeled copy, else an independent graph
        if rng.random() < 0.5:
            h = g.relabel([int(v) for v in rng.permutation(g.n)])
        else:
            h = random_graph(rng, n_max=g.n)
            if h.n != g.n:
                continue
        pairs += 1
        assert (canonical_certificate(g) == canonical_certificate(h)) == brute_isomorphic(g, h)


def test_certificate_separates_regular_cospectral_cases():
    # two 3-regular graphs on 6 nodes: prism vs K3,3; refinement alone cannot split them
    prism = LabeledGraph.unlabeled(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5),
                                       (0, 3), (1, 4), (2, 5)])
    k33 = LabeledGraph.unlabeled(6, [(a, b) for a in range(3) for b in range(3, 6)])
    assert canonical_certificate(prism) != canonical_certificate(k33)
    assert brute_isomorphic(prism, k33) is False


@settings(max_examples=300)
@given(graphs(n_max=10), st.randoms(use_true_random=False))
def test_certificate_permutation_invariant(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    assert canonical_certificate(g) == canonical_certificate(g.relabel(perm))


def test_certificate_respects_labels():
    a = LabeledGraph.build(["C", "O"], [(0, 1, "single")])
    b = LabeledGraph.build(["C", "O"], [(0, 1, "double")])
    c = LabeledGraph.build(["C", "N"], [(0, 1, "single")])
    certs = {canonical_certificate(x) for x in (a, b, c)}
    assert len(certs) == 3


# --- planarity --------------------------------------------------------------

def test_planarity_examples():
    assert is_planar(complete(4))
    assert not is_planar(complete(5))
    assert not is_planar(LabeledGraph.unlabeled(6, [(a, b) for a in range(3) for b in range(3, 6)]))


@given(graphs(n_max=9))
def test_planarity_respects_euler_bound(g):
    if g.n >= 3 and g.m > 3 * g.n - 6:
        assert not is_planar(g)
    assert is_planar(g) == nx.check_planarity(g.to_networkx())[0]


# --- JSONL ------------------------------------------------------------------

def test_jsonl_roundtrip(tmp_path):
    gs = [LabeledGraph.build(["C", "H"], [(0, 1, "single")]), LabeledGraph.unlabeled(3, [(0, 2)])]
    path = tmp_path / "g.jsonl"
    dump_graphs(gs, path, [{"id": "a"}, {"id": "b", "stable": True}])
    assert load_graphs(path) == gs
    recs = list(iter_records(path))
    assert [r[0] for r in recs] == ["a", "b"]
    assert recs[1][2] == {"stable": True}


@pytest.mark.parametrize("edge,msg", [([1, 1, "e"], "self-loop"), ([1, 0, "e"], "smaller"),
                                      ([0, 1, "e"], "duplicate")])
def test_loader_errors_are_line_numbered(tmp_path, edge, msg):
    path = tmp_path / "bad.jsonl"
    good = {"node_labels": ["X", "X"], "edges": [[0, 1, "e"]]}
    bad = {"node_labels": ["X", "X"], "edges": [[0, 1, "e"], edge] if msg == "duplicate" else [edge]}
    path.write_text(json.dumps(good) + "\n" + json.dumps(bad) + "\n")
    with pytest.raises(GraphError, match=rf":2: .*{msg}"):
        load_graphs(path)
