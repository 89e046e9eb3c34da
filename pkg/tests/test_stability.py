import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from wallx.graphs import MarkedGraph, VineTriple, automorphisms, enumerate_stable_graphs, trivial_graph
from wallx.stability import (
    PerturbedRational as PR,
    Pseudodivisor,
    StabilityCondition,
    StabilityError,
    Wall,
    bn_closure_regime,
    divisorial_keys,
    generic_point,
    is_quasistable,
    is_semistable,
    is_stable,
    opposite_pair,
    phi_value,
    scan_polarization,
    scan_stability,
    stable_divisors,
    unpruned_check,
    walls_coincide,
    walls_in_window,
)


def random_point(g, n, d, rng, den=7):
    xd = {k: Fraction(rng.randint(-3 * den, 3 * den), den) for k in divisorial_keys(g, n)}
    xp = [Fraction(rng.randint(-3 * den, 3 * den), den) for _ in range(n)]
    return StabilityCondition(g, n, d, xd, xp)


def displayed_coordinate(g, d, i, t, S, xp):
    # x_{i,t,S} for t >= 2 written directly from the coordinate change
    inside = sum(xp[j - 1] for j in S)
    outside = sum(xp[j - 1] for j in range(1, len(xp) + 1) if j not in S)
    return Fraction(2 * g - 2 * i - t, 2 * g - 2) * inside + Fraction(2 * i - 2 + t, 2 * g - 2) * (d - outside)


def test_perturbed_rational_order():
    assert PR(1, -5) < PR(1) < PR(1, 1) < PR(Fraction(3, 2), -9)
    assert PR(1, 2) + PR(2, -1) == PR(3, 1)
    assert (PR(1, 1) * 3) == PR(3, 3)
    assert PR(0, 1).sign() == 1 and PR(0, -1).sign() == -1 and PR().sign() == 0


def test_phi_on_vines_and_totals():
    rng = random.Random(1)
    g, n, d = 3, 2, 1
    phi = random_point(g, n, d, rng)
    for T in [VineTriple(1, 1, frozenset({1})), VineTriple(2, 1, frozenset({1, 2}))]:
        G = T.graph(g, n)
        assert phi_value(phi, G, [0]) == phi.x_div[(T.i, T.S)]
    for i, t, S in [(0, 2, {1}), (1, 2, {1, 2}), (0, 3, {1}), (1, 3, {1})]:
        G = VineTriple(i, t, frozenset(S)).graph(g, n)
        want = displayed_coordinate(g, d, i, t, S, [x.base for x in phi.x_pts])
        assert phi_value(phi, G, [0]) == PR(want)
    for G in enumerate_stable_graphs(g, n, 3):
        assert phi_value(phi, G, G.vertices) == PR(d)
        for r in range(1, G.num_vertices):
            for V in itertools.combinations(G.vertices, r):
                Vc = [v for v in G.vertices if v not in V]
                assert phi_value(phi, G, V) + phi_value(phi, G, Vc) == PR(d)


def test_trivial_graph_always_stable():
    rng = random.Random(2)
    phi = random_point(2, 1, 1, rng)
    assert is_stable(phi, trivial_graph(2, 1), (1,))


def test_even_vine_semistable_not_stable():
    g, n, d = 3, 1, 0
    W = Wall(1, 2, frozenset({1}), 0)  # x_{1,2,{1}} = 0
    phi = generic_point(W, g, n, d)
    G = VineTriple(1, 2, frozenset({1})).graph(g, n)
    assert phi_value(phi, G, [0]) == PR(0)
    D = (1, -1)  # beta of the first vertex: -1 + 0 + 1 = 0
    assert is_semistable(phi, G, D)
    assert not is_stable(phi, G, D)


def test_opposite_pair_orientation_and_degeneracy():
    g, n, d = 3, 1, 1
    for rep, _ in walls_in_window(g, n, d, default=(-1, 1)):
        phi = generic_point(rep, g, n, d)
        pp, pm = opposite_pair(rep, phi)
        T = rep.triple
        assert pp.coordinate(T) > pm.coordinate(T)
        assert pp.coordinate(T).base == pm.coordinate(T).base
        G = T.graph(g, n)
        semis = stable_divisors(phi, G, mode="semi")
        assert any(not is_stable(phi, G, pd) for pd in semis)
        for side in (pp, pm):
            assert all(is_stable(side, G, pd) for pd in stable_divisors(side, G, mode="semi"))


def test_non_generic_point_rejected():
    g, n, d = 2, 2, 0
    W = Wall(1, 1, frozenset({1}), 0)
    xd = {k: Fraction(1, 2) for k in divisorial_keys(g, n)}  # on several walls at once
    phi = StabilityCondition(g, n, d, xd, [Fraction(1, 3), Fraction(1, 5)])
    with pytest.raises(StabilityError, match="not a generic wall point"):
        opposite_pair(W, phi)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_pruned_checks_match_unpruned(seed):
    rng = random.Random(seed)
    g, n = rng.choice([(2, 1), (2, 2), (3, 1)])
    d = rng.randint(-2, g - 1)
    phi = random_point(g, n, d, rng, den=rng.choice([3, 5, 7]))
    graphs = enumerate_stable_graphs(g, n, 3)
    G = rng.choice(graphs)
    D = [rng.randint(-2, 2) for _ in G.vertices]
    D[-1] = d - sum(D[:-1])
    assert is_stable(phi, G, D) == unpruned_check(phi, G, D, "stable")
    assert is_semistable(phi, G, D) == unpruned_check(phi, G, D, "semi")
    v0 = rng.randrange(G.num_vertices)
    assert is_quasistable(phi, G, D, v0) == unpruned_check(phi, G, D, "quasi", v0)


def test_degenerate_iff_strictly_semistable():
    rng = random.Random(5)
    g, n, d = 2, 1, 0
    graphs = enumerate_stable_graphs(g, n, 4)
    generic = random_point(g, n, d, rng, den=11)
    for G in graphs:
        for pd in stable_divisors(generic, G, mode="semi"):
            assert is_stable(generic, G, pd)
    W = Wall(1, 1, frozenset({1}), 0)
    phi0 = generic_point(W, g, n, d)
    G = W.triple.graph(g, n)
    assert any(not is_stable(phi0, G, pd) for pd in stable_divisors(phi0, G, mode="semi"))


def test_quasistable_pseudodivisors_are_simple():
    rng = random.Random(3)
    g, n, d = 2, 1, 1
    phi = random_point(g, n, d, rng, den=13)
    for G in enumerate_stable_graphs(g, n, 3):
        for r in range(1, G.num_edges + 1):
            for E in itertools.combinations(range(G.num_edges), r):
                for pd in stable_divisors(phi, G, E, mode="semi"):
                    if any(is_quasistable(phi, G, pd, v) for v in G.vertices):
                        assert pd.is_simple(G)


def test_stable_counts_are_aut_invariant():
    rng = random.Random(4)
    g, n, d = 3, 1, 1
    phi = random_point(g, n, d, rng, den=13)
    for G in enumerate_stable_graphs(g, n, 3):
        stable = {pd.D for pd in stable_divisors(phi, G)}
        for s in automorphisms(G):
            img = set()
            for D in stable:
                E = [0] * len(D)
                for v, x in enumerate(D):
                    E[s.vertex_map[v]] = x
                img.add(tuple(E))
            assert img == stable


def test_scan_polarization():
    G = trivial_graph(3, 1)
    assert scan_polarization(G, 4) == [Fraction(4)]
    tail = MarkedGraph([2, 0], [[], [1, 2]], [(0, 1)], n=2)
    assert scan_polarization(tail, 3)[1] == 0
    two = MarkedGraph([1, 1], [[1], []], [(0, 1), (0, 1)], n=1)
    assert scan_polarization(two, 4) == [Fraction(2), Fraction(2)]
    with pytest.raises(StabilityError):
        scan_polarization(MarkedGraph([1], [[1]], [], n=1), 1)


def test_scan_stability_sums_to_degree():
    phi = scan_stability(3, 2, 2)
    for G in enumerate_stable_graphs(3, 2, 2):
        assert phi_value(phi, G, G.vertices) == PR(2)


def test_wall_window_examples():
    walls = walls_in_window(2, 1, 1, default=(-2, 2))
    div = [W for W, _ in walls if W.t == 1]
    assert sorted(W.level for W in div) == [Fraction(-3, 2), Fraction(-1, 2), Fraction(1, 2), Fraction(3, 2)]
    assert walls_in_window(2, 1, 1, default=(Fraction(1, 10), Fraction(4, 10))) == []
    assert walls_in_window(2, 1, 1, default=(1, 0)) == []


def test_wall_coincidence_rules():
    g, n = 3, 2
    S1, S2 = frozenset({1}), frozenset({1, 2})
    assert not walls_coincide(Wall(1, 2, S1, 0), Wall(1, 2, S2, 0), g, n, 0)
    assert not walls_coincide(Wall(1, 1, S1, 0), Wall(2, 1, S1, 0), g, n, 0)
    assert walls_coincide(Wall(1, 1, S1, 0), Wall(1, 1, S1, 0), g, n, 0)
    # d = 0, S = [n]: the walls through sum(x_j) = g - 1
    full = frozenset({1, 2})
    family = [Wall(i, t, full, g - i - (t + 1) // 2) for i, t in [(0, 2), (1, 2), (0, 3), (0, 4)]]
    for A, B in itertools.combinations(family, 2):
        assert walls_coincide(A, B, g, n, 0)
    assert not walls_coincide(family[0], Wall(0, 2, full, g - 2), g, n, 0)


def test_bn_regime_examples():
    g, n = 3, 1
    keys = divisorial_keys(g, n)
    inside = StabilityCondition(g, n, 2, {k: Fraction(k[0]) - Fraction(1, 2) for k in keys}, [Fraction(1)])
    assert bn_closure_regime(2, inside).holds
    out = StabilityCondition(g, n, 2, {k: Fraction(k[0]) + Fraction(1, 2) for k in keys}, [Fraction(1)])
    assert not bn_closure_regime(2, out).holds
    far = StabilityCondition(6, 1, 1, {k: Fraction(0) for k in divisorial_keys(6, 1)}, [Fraction(1)])
    res = bn_closure_regime(1, far)
    assert not res.holds and res.label == "never"
    neg = StabilityCondition(g, n, -1, {k: Fraction(1) for k in keys}, [Fraction(-1, 2)])
    assert not bn_closure_regime(-1, neg).holds
