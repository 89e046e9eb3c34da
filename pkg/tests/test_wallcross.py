import itertools
import json
import random
from collections import defaultdict
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from wallx.blowup import _is_base_label, _label_edges, _leg_side, _unwrap_object, iterated_blowup, iterated_psi_push
from wallx.graphs import MarkedGraph
from wallx.stability import Wall
from wallx.suite import desk_walls, low_codim_expected
from wallx.wallcross import (
    ChernFactor,
    ForestData,
    StrataClassExpr,
    WallCrossError,
    _compositions,
    _edge_monomial_key,
    _push_term,
    binom,
    coeff_alpha,
    coeff_b,
    crossing_data,
    disjoint_wallcross,
    inclusion_exclusion_expand,
    is_disjoint_wall,
    main_wallcross_resolved,
    psi_comparison,
    push_resolved,
    pushforward_psi_monomial,
    sum_tree,
    twist_total_chern,
    wallcross_on_jbar,
)

S1 = frozenset([1])


def test_binom_conventions():
    assert binom(5, 2) == 10
    assert binom(-1, 2) == 1  # generalised upper argument
    assert binom(3, -1) == 0
    assert binom(2, 3) == 0


def test_coeff_b_single_element():
    V = frozenset([0])
    # the sum over V' >= V is V itself: top = k + rk + 1 - (j + k + 1) = rk - j
    assert coeff_b(V, {V: 0}, {V: 0}, {V: 3}) == -3
    assert coeff_b(V, {V: 1}, {V: 1}, {V: 4}) == -binom(3, 2)
    with pytest.raises(WallCrossError):
        coeff_b(frozenset([5]), {V: 0}, {V: 0}, {V: 1})


def test_coeff_b_chain_counts_elements_above():
    V1, V2 = frozenset([0]), frozenset([0, 1])
    j = {V1: 0, V2: 1}
    k = {V1: 1, V2: 0}
    rk = {V1: 6, V2: 3}
    assert coeff_b(V2, j, k, rk) == -binom(0 + 3 + 1 - 2, 1)
    assert coeff_b(V1, j, k, rk) == -binom(1 + 6 + 1 - (2 + 2), 2)


@pytest.mark.parametrize("g,n,d", [(2, 1, 1), (3, 1, 2), (2, 1, 0), (3, 2, 1), (2, 2, 0)])
def test_low_codimension_tables(g, n, d):
    for W in desk_walls(g, n, d):
        assert wallcross_on_jbar(g, n, d, W) == low_codim_expected(g, n, d, W)


def test_compact_type_self_intersection_term():
    g, n, d = 2, 1, 0
    W = Wall(1, 1, S1, 0)
    got = wallcross_on_jbar(g, n, d, W)
    double = [t for t in got.terms if t.graph.num_vertices == 3]
    assert len(double) == 1
    assert double[0].coeff == Fraction(-1, 2) and len(double[0].forest) == 2
    assert not is_disjoint_wall(g, n, d, W)
    with pytest.raises(WallCrossError):
        disjoint_wallcross(g, n, d, W)
    assert disjoint_wallcross(g, n, d, W, force=True) != got


@pytest.mark.parametrize("g,n,d", [(2, 1, 1), (2, 2, 0), (3, 1, 1), (3, 2, 2), (3, 2, 1)])
def test_disjoint_formula_on_disjoint_walls(g, n, d):
    seen = 0
    for W in desk_walls(g, n, d):
        if is_disjoint_wall(g, n, d, W):
            seen += 1
            assert disjoint_wallcross(g, n, d, W) == wallcross_on_jbar(g, n, d, W)
    assert seen


@pytest.mark.parametrize("g,n,d,W", [
    (2, 1, 0, Wall(1, 1, S1, 0)),
    (3, 1, 0, Wall(1, 1, S1, 0)),
    (2, 2, 0, Wall(0, 2, S1, 0)),
    (3, 1, -1, Wall(0, 2, S1, 2)),
])
def test_resolved_formula_pushes_to_base(g, n, d, W):
    assert push_resolved(main_wallcross_resolved(g, n, d, W)) == wallcross_on_jbar(g, n, d, W)


def _label_vertices(G, lab):
    while lab[0] == "b":
        lab = lab[1]
    return _leg_side(G, frozenset(_label_edges(x) for x in lab[2]))


@pytest.mark.parametrize("g,n,d,W", [
    (2, 1, 0, Wall(1, 1, S1, 0)),
    (3, 1, 0, Wall(1, 1, S1, 0)),
    (3, 1, -1, Wall(0, 2, S1, 2)),
])
def test_pushforward_matches_iterated_blowdowns(g, n, d, W):
    pp, pm, _ = crossing_data(g, n, d, W)
    cats = iterated_blowup(pp, pm, g - d)
    C = cats[-1]
    checked = 0
    for obj in C.objects:
        labs = C.labels(obj)
        if not labs or any(_is_base_label(l) for l in labs):
            continue
        (G, D), _ = _unwrap_object(C, obj)
        sets = {l: _label_vertices(G, l) for l in labs}
        for ex in itertools.product(range(3), repeat=len(labs)):
            if C.rank(obj) + sum(ex) > g - d:
                continue
            down = defaultdict(Fraction)
            for ((H, DH), mono), c in iterated_psi_push(cats, obj, dict(zip(labs, ex))).items():
                e = [0] * H.num_edges
                for name, x in mono:
                    e[int(name.split(",")[1].strip(" )"))] = x
                down[_edge_monomial_key(H, DH, tuple(e))] += c
            down = {k: v for k, v in down.items() if v}
            forest = [tuple(sorted(V)) for V in sets.values()]
            gV = {tuple(sorted(sets[l])): x for l, x in zip(labs, ex)}
            assert down == pushforward_psi_monomial(g, n, d, W, G, D, forest, gV)
            checked += 1
    assert checked


# -- synthetic forests ---------------------------------------------------------


class _Term:
    def __init__(self, chern, psi, coeff):
        self.chern, self.psi, self.coeff = chern, psi, coeff


def _synthetic_push(G, D, sets):
    """Push the resolved formula of ``(G, D, sets)`` and all its partial
    contractions onto ``(G, D, sets)``."""
    fd = ForestData(G, D, sets)
    N = G.g - sum(D)
    out = StrataClassExpr(G.g, G.n, sum(D), N, psi_on="edges")
    for r in range(1, len(fd.sets) + 1):
        for U in itertools.combinations(fd.sets, r):
            m = len(U)
            for tup in _compositions(N - m, 1 + 2 * m):
                s, j, k = tup[0], dict(zip(U, tup[1:1 + m])), dict(zip(U, tup[1 + m:]))
                c = -1
                for V in U:
                    c *= coeff_b(V, j, k, {W: fd.rkF[W] for W in U})
                if not c:
                    continue
                chern = [ChernFactor("FX", (), s)] if s else []
                chern += [ChernFactor("HV", tuple(sorted(V)), j[V]) for V in U if j[V]]
                psi = [(tuple(sorted(V)), k[V]) for V in U if k[V]]
                _push_term(out, fd, U, _Term(chern, psi, Fraction(c)), [{V: V for V in U}], 1)
    return out


def _synthetic_base(G, D, sets, printed):
    fd = ForestData(G, D, sets)
    N = G.g - sum(D)
    m = len(fd.sets)
    out = StrataClassExpr(G.g, G.n, sum(D), N, psi_on="edges")
    for tup in _compositions(N - G.num_edges, 1 + m + G.num_edges):
        s, j, ge = tup[0], dict(zip(fd.sets, tup[1:1 + m])), list(tup[1 + m:])
        a = coeff_alpha(G, D, fd.sets, s, j, ge, printed=printed, data=fd)
        chern = [ChernFactor("FXplus", (), s)] if s else []
        chern += [ChernFactor("HVplus", tuple(sorted(V)), j[V]) for V in fd.sets if j[V]]
        psi = [(e, x) for e, x in enumerate(ge) if x]
        out.add(G, D, [tuple(sorted(V)) for V in fd.sets], chern, psi, Fraction(-a), 1)
    return out


CHAIN2 = ([(0, 1), (0, 2), (1, 2)], [frozenset([0]), frozenset([0, 1])])
CHAIN3 = ([(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)],
          [frozenset([0]), frozenset([0, 1]), frozenset([0, 1, 2])])
BRANCH = ([(0, 1), (0, 2)], [frozenset([0, 1]), frozenset([0, 2])])


def _synthetic(genera, divisor, shape):
    edges, sets = shape
    legs = [[1]] + [[] for _ in genera[1:]]
    return MarkedGraph(genera, legs, edges, n=1, check_stable=False), tuple(divisor), sets


def test_alpha_regression_chain_ranks_6_3():
    # a two-element chain with rank F = (6, 3) in degree 3: only the
    # reconciled coefficient matches the pushforward
    G, D, sets = _synthetic([0, 3, 4], [5, 0, 0], CHAIN2)
    fd = ForestData(G, D, sets)
    assert [fd.rkF[V] for V in fd.sets] == [6, 3]
    assert coeff_alpha(G, D, sets, 0, {V: 0 for V in fd.sets}, [0, 0, 0]) == 13
    assert coeff_alpha(G, D, sets, 0, {V: 0 for V in fd.sets}, [0, 0, 0], printed=True) == 11
    push = _synthetic_push(G, D, sets)
    assert push == _synthetic_base(G, D, sets, printed=False)
    assert push != _synthetic_base(G, D, sets, printed=True)


@pytest.mark.parametrize("shape,count,nmax", [(CHAIN2, 60, 6), (CHAIN3, 15, 6), (BRANCH, 30, 5)])
def test_alpha_matches_pushforward_on_synthetic_forests(shape, count, nmax):
    rng = random.Random(7)
    printed_failures = 0
    for _ in range(count):
        k = len(shape[1]) if shape is not BRANCH else 2
        genera = [0] + [rng.randint(1, 4) for _ in range(k)]
        degs = [rng.randint(-1, 1) for _ in range(k)]
        G, _, sets = _synthetic(genera, [0] + degs, shape)
        N = rng.randint(G.num_edges, nmax)
        D = (G.g - N - sum(degs), *degs)
        push = _synthetic_push(G, D, sets)
        assert push == _synthetic_base(G, D, sets, printed=False)
        printed_failures += push != _synthetic_base(G, D, sets, printed=True)
    if shape is not BRANCH:
        assert printed_failures


# -- lemmas --------------------------------------------------------------------


def _random_forest(rng, size):
    parent = [None] + [rng.choice([None] + list(range(k))) for k in range(1, size)]
    # parent sits below its child; down-sets are chains
    def ancestors(v):
        out = []
        while parent[v] is not None:
            v = parent[v]
            out.append(v)
        return out
    anc = [set(ancestors(v)) for v in range(size)]
    return list(range(size)), (lambda a, b: a in anc[b])


def _chains(elements, less):
    for r in range(1, len(elements) + 1):
        for c in itertools.combinations(elements, r):
            if all(less(a, b) or less(b, a) for a, b in itertools.combinations(c, 2)):
                yield c


def test_sum_tree_matches_brute_force():
    rng = random.Random(11)
    done = 0
    while done < 500:
        size = rng.randint(1, 8)
        elements, less = _random_forest(rng, size)
        chains = list(_chains(elements, less))
        S = list(rng.choice(chains)) if rng.random() < 0.8 else []
        want = defaultdict(int)
        for l in chains:
            if set(S) <= set(l):
                top = next(v for v in l if all(v == w or less(w, v) for w in l))
                want[top] += (-1) ** (len(S) + len(l))
        want = {k: v for k, v in want.items() if v}
        got = {k: v for k, v in sum_tree(elements, less, S).items() if v}
        assert got == want, (size, S)
        done += 1


def test_sum_tree_rejects_non_chain():
    elements = [0, 1, 2]
    less = lambda a, b: a == 0 and b in (1, 2)
    with pytest.raises(WallCrossError):
        sum_tree(elements, less, [1, 2])


def test_inclusion_exclusion_matches_subset_lattice():
    rng = random.Random(5)
    for _ in range(60):
        m = rng.randint(1, 5)
        comps = [f"D{i}" for i in range(m)]
        table = {}
        for r in range(1, m + 1):
            for I in itertools.combinations(comps, r):
                table[frozenset(I)] = [f"s{rng.randint(0, 6)}" for _ in range(rng.randint(0, 2))]
        strata_of = lambda I: table[I]
        want = defaultdict(int)
        for I, sts in table.items():
            for s in sts:
                want[s] += (-1) ** (len(I) + 1)
        want = {k: v for k, v in want.items() if v}
        got = {k: v for k, v in inclusion_exclusion_expand(comps, strata_of).items() if v}
        assert got == want


@pytest.mark.parametrize("rank", range(0, 7))
def test_twist_total_chern_matches_roots(rank):
    xs = sympy.symbols(f"x0:{rank}") if rank else ()
    ell = sympy.Symbol("l")
    t = sympy.Symbol("t")
    cF = sympy.Poly(sympy.prod([1 + x * t for x in xs]), t)
    chern = [cF.coeff_monomial(t ** i) for i in range(rank + 1)]
    tw = sympy.Poly(sympy.expand(sympy.prod([1 + (x + ell) * t for x in xs])), t)
    for j in range(0, 7):
        want = tw.coeff_monomial(t ** j)
        assert sympy.expand(twist_total_chern(rank, chern, ell, j) - want) == 0
    with pytest.raises(WallCrossError):
        twist_total_chern(rank, chern, ell, -1)


@given(st.integers(0, 5), st.integers(0, 3), st.integers(0, 3))
def test_psi_rule_roundtrip(k, other, delta):
    rule = psi_comparison(MarkedGraph([1, 1], [[1], []], [(0, 1)]), (0, 0), 0)
    mono = {rule.lhs: k, ("PsiJ", 7): other}
    if delta:
        mono[("Delta", 0)] = delta
    mono = {s: x for s, x in mono.items() if x}
    expanded = rule.apply(mono)
    assert sum(expanded.values()) == 2 ** k
    assert rule.reverse(expanded) == {tuple(sorted(mono.items())): 1}


def test_psi_rule_edge_range():
    G = MarkedGraph([1, 1], [[1], []], [(0, 1)])
    with pytest.raises(WallCrossError):
        psi_comparison(G, (0, 0), 3)
    assert psi_comparison(G, (0, 0), 0).to_json() == {"lhs": ["PsiJ", 0], "rhs": [["PsiM", 0], ["Delta", 0]]}


# -- expressions ---------------------------------------------------------------


@pytest.mark.parametrize("g,n,d,W", [(2, 1, 0, Wall(1, 1, S1, 0)), (3, 1, -1, Wall(0, 2, S1, 2))])
def test_expression_json_roundtrip_and_degree(g, n, d, W):
    for expr in (wallcross_on_jbar(g, n, d, W), main_wallcross_resolved(g, n, d, W)):
        data = json.loads(json.dumps(expr.to_json()))
        assert StrataClassExpr.from_json(data) == expr
        assert all(t.degree == g - d for t in expr.terms)


def test_relabelling_does_not_change_terms():
    G = MarkedGraph([0, 1, 1], [[1], [], []], [(0, 1), (0, 2), (1, 2)], n=1)
    H = MarkedGraph([1, 1, 0], [[], [], [1]], [(2, 1), (2, 0), (1, 0)], n=1)
    a = StrataClassExpr(3, 1, 0, 5, psi_on="edges")
    b = StrataClassExpr(3, 1, 0, 5, psi_on="edges")
    a.add(G, (0, 0, 0), [(0,)], [ChernFactor("HVplus", (0,), 1)], [(0, 1)], Fraction(3, 2))
    # edge 1 of H is the edge from the marked vertex to the first genus-1 vertex
    b.add(H, (0, 0, 0), [(2,)], [ChernFactor("HVplus", (2,), 1)], [(1, 1)], Fraction(3, 2))
    assert a == b
    bad = StrataClassExpr(3, 1, 0, 5, psi_on="edges")
    with pytest.raises(WallCrossError):
        bad.add(G, (0, 0, 0), [(0,)], [], [], 1)


def test_chern_factor_validation():
    with pytest.raises(WallCrossError):
        ChernFactor("FZ", (), 1)
    with pytest.raises(WallCrossError):
        ChernFactor("HVplus", (), 1)
    with pytest.raises(WallCrossError):
        ChernFactor("FXplus", (), -1)
    c = ChernFactor("HVplus", (0, 2), 3)
    assert ChernFactor.from_json(c.to_json()) == c


def test_budget_beyond_class_degree_raises():
    G = MarkedGraph([1, 1], [[1], []], [(0, 1)])
    with pytest.raises(WallCrossError):
        coeff_alpha(G, (1, 0), [frozenset([0])], 5, {frozenset([0]): 0}, [0])
