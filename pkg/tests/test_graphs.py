import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from wallx.graphs import (
    GraphError,
    MarkedGraph,
    VineTriple,
    automorphisms,
    canonical_form,
    contractions_to,
    enumerate_stable_graphs,
    induced_genus,
    subdivide,
    trivial_graph,
)


def brute_key(G):
    """Isomorphism invariant by minimising over all vertex orders."""
    best = None
    for perm in itertools.permutations(range(G.num_vertices)):
        genera = [0] * G.num_vertices
        legs = [None] * G.num_vertices
        for v in range(G.num_vertices):
            genera[perm[v]] = G.genera[v]
            legs[perm[v]] = tuple(sorted(G.legs[v]))
        edges = sorted(tuple(sorted((perm[u], perm[v]))) for u, v in G.edges)
        key = (tuple(genera), tuple(legs), tuple(edges))
        if best is None or key < best:
            best = key
    return best


def naive_stable_graphs(g, n, max_edges):
    """All stable graphs by brute force over vertex data and edge multisets."""
    found = set()
    for m in range(max_edges + 1):
        for k in range(1, m + 2):
            b1 = m - k + 1
            if b1 > g:
                continue
            pairs = [(u, v) for u in range(k) for v in range(u, k)]
            for genera in itertools.product(range(g - b1 + 1), repeat=k):
                if sum(genera) + b1 != g:
                    continue
                for owner in itertools.product(range(k), repeat=n):
                    legs = [[j + 1 for j in range(n) if owner[j] == v] for v in range(k)]
                    for edges in itertools.combinations_with_replacement(pairs, m):
                        try:
                            G = MarkedGraph(genera, legs, edges, n=n)
                        except GraphError:
                            continue
                        found.add(brute_key(G))
    return found


@pytest.mark.parametrize("g,n,R", [(2, 1, 3), (2, 2, 3), (3, 1, 3), (1, 2, 3), (3, 2, 2)])
def test_enumeration_matches_naive_oracle(g, n, R):
    mine = enumerate_stable_graphs(g, n, R)
    keys = [brute_key(G) for G in mine]
    assert len(set(keys)) == len(keys)
    assert set(keys) == naive_stable_graphs(g, n, R)


def test_small_enumeration_counts():
    assert enumerate_stable_graphs(2, 1, 0) == [trivial_graph(2, 1).canonical()]
    one_edge = [G for G in enumerate_stable_graphs(2, 1, 1) if G.num_edges == 1]
    # a self-node on a genus-1 vertex and the split into genus 1 + genus 1
    assert len(one_edge) == 2
    with pytest.raises(GraphError):
        enumerate_stable_graphs(2, 0, 1)
    with pytest.raises(GraphError):
        enumerate_stable_graphs(0, 2, 1)


def test_automorphism_orders():
    assert len(automorphisms(trivial_graph(3, 1))) == 1
    for t in (1, 2, 3):
        G = VineTriple(1, t, frozenset({1})).graph(t + 1, 1)
        assert len(automorphisms(G)) == math.factorial(t)
    # two genus-1 vertices joined by two edges, no legs on either side distinguishing them
    G = MarkedGraph([1, 1], [[1, 2], []], [(0, 1), (0, 1)], n=2, check_stable=False)
    assert len(automorphisms(G)) == 2
    H = MarkedGraph([1, 1], [[], []], [(0, 1), (0, 1)], n=0)
    assert len(automorphisms(H)) == 4
    loop = MarkedGraph([1], [[1]], [(0, 0)], n=1)
    assert len(automorphisms(loop)) == 2  # the loop flip


def test_contractions():
    G = VineTriple(1, 2, frozenset({1})).graph(3, 1)
    assert len(contractions_to(G, G)) == len(automorphisms(G))
    assert contractions_to(trivial_graph(3, 1), G) == []
    # triangle with the marked genus-0 vertex and two genus-1 vertices... use the
    # one-pointed genus 3 triangle: each contraction of one edge gives G(1,2,{1})
    T = MarkedGraph([1, 0, 1], [[], [1], []], [(0, 1), (1, 2), (0, 2)], n=1).canonical()
    target = G.canonical()
    maps = contractions_to(T, target)
    classes = {frozenset(f.contracted_edges) for f in maps}
    assert len(classes) == 2


def test_contraction_rank_and_functoriality():
    graphs = enumerate_stable_graphs(2, 1, 3)
    for G in graphs:
        for H in graphs:
            for f in contractions_to(G, H):
                assert len(f.contracted_edges) == G.num_edges - H.num_edges
    G = [x for x in graphs if x.num_edges == 3][0]
    for H in graphs:
        for K in graphs:
            maps_GK = {f.core for f in contractions_to(G, K)}
            for f in contractions_to(G, H):
                for h in contractions_to(H, K):
                    assert f.then(h).core in maps_GK


def test_subdivide():
    G = MarkedGraph([1], [[1]], [(0, 0)], n=1)
    assert subdivide(G, [])[0] == G
    H, tags = subdivide(G, [0])
    assert H.num_vertices == 2 and H.num_edges == 2
    assert sorted(H.edges) == [(0, 1), (0, 1)]
    assert tags == {0: 1}
    V = VineTriple(1, 3, frozenset({1})).graph(4, 1)
    K, tags = subdivide(V, [0, 2])
    assert K.num_vertices == V.num_vertices + 2 and K.num_edges == V.num_edges + 2
    assert K.g == V.g


def test_induced_genus():
    G = MarkedGraph([1, 1], [[1], []], [(0, 1)] * 3, n=1)
    assert induced_genus(G, [0]) == 1
    assert induced_genus(G, [0, 1]) == G.g == 4
    with pytest.raises(GraphError):
        induced_genus(MarkedGraph([1, 0, 1], [[], [1], []], [(0, 1), (1, 2)], n=1), [0, 2])


def test_json_roundtrip():
    for G in enumerate_stable_graphs(2, 2, 2):
        assert MarkedGraph.from_json(G.to_json()) == G


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_canonical_form_is_a_relabelling_invariant(data):
    graphs = enumerate_stable_graphs(3, 1, 3)
    G = data.draw(st.sampled_from(graphs))
    perm = data.draw(st.permutations(range(G.num_vertices)))
    edge_order = data.draw(st.permutations(range(G.num_edges)))
    H = G.relabel(perm)
    H = MarkedGraph(H.genera, H.legs, [H.edges[i] for i in edge_order], n=H.n)
    assert H.canonical() == G.canonical()
    assert H.canonical().canonical() == H.canonical()
    assert brute_key(H) == brute_key(G)
    C, _, _ = canonical_form(H)
    assert C == G.canonical()
