"""The desk-scale instance list and the property suites run by ``verify``.

Each suite returns a :class:`SuiteReport` with per-property pass counts and
the first counterexample found, serialised as plain JSON data.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .blowup import (
    GraphCategory,
    blowup_partial_order,
    check_axiom_sf,
    check_bijection_parts,
    extremal_vine_strata,
    iterated_blowup,
    linear_extensions,
    order_independence_check,
)
from .extremal import (
    forest_to_vine_function,
    full_forests,
    law_violations,
    vine_function_to_forest,
    vine_functions,
)
from .graphs import induced_genus
from .stability import Pseudodivisor, walls_in_window
from .wallcross import (
    ChernFactor,
    StrataClassExpr,
    binom,
    coeff_b,
    crossing_data,
    disjoint_wallcross,
    is_disjoint_wall,
    main_wallcross_resolved,
    push_resolved,
    wallcross_on_jbar,
)

__all__ = [
    "DESK_SUITE",
    "DEFAULT_WINDOW",
    "SUITES",
    "SuiteReport",
    "desk_walls",
    "low_codim_expected",
    "run_suite",
    "thread_count",
]

# (g, n, d) triples grouped by the class degree g - d.
DESK_SUITE = (
    (2, 1, 1), (2, 2, 1), (2, 3, 1), (3, 1, 2), (3, 2, 2), (3, 3, 2), (4, 1, 3), (4, 2, 3),
    (2, 1, 0), (2, 2, 0), (3, 1, 1), (3, 2, 1), (4, 1, 2), (4, 2, 2),
    (2, 1, -1), (3, 1, 0), (3, 2, 0), (4, 1, 1),
    (2, 1, -2), (3, 1, -1), (4, 1, 0),
)

DEFAULT_WINDOW = (-1, 1)


def thread_count() -> int:
    """Worker cap from ``WALLX_THREADS`` (default 1)."""
    raw = os.environ.get("WALLX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def desk_walls(g, n, d, window=DEFAULT_WINDOW):
    """Representatives of the distinct walls meeting the window."""
    return [rep for rep, _ in walls_in_window(g, n, d, default=window)]


def desk_instances(max_degree=None, triples=DESK_SUITE):
    for g, n, d in triples:
        if max_degree is not None and g - d > max_degree:
            continue
        for W in desk_walls(g, n, d):
            yield g, n, d, W


@dataclass
class SuiteReport:
    name: str
    passes: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    counterexample: object = None

    def record(self, prop, ok, witness=None):
        bucket = self.passes if ok else self.failures
        bucket[prop] = bucket.get(prop, 0) + 1
        if not ok and self.counterexample is None:
            self.counterexample = {"property": prop, "witness": witness}

    @property
    def ok(self):
        return not self.failures

    def merge(self, other: "SuiteReport"):
        for k, v in other.passes.items():
            self.passes[k] = self.passes.get(k, 0) + v
        for k, v in other.failures.items():
            self.failures[k] = self.failures.get(k, 0) + v
        if self.counterexample is None:
            self.counterexample = other.counterexample

    def to_json(self):
        return {
            "suite": self.name,
            "ok": self.ok,
            "passes": dict(sorted(self.passes.items())),
            "failures": dict(sorted(self.failures.items())),
            "counterexample": self.counterexample,
        }


def _tag(g, n, d, W):
    return {"g": g, "n": n, "d": d, "wall": W.to_json()}


def _map(fn, items):
    items = list(items)
    k = thread_count()
    if k == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


def suite_posets(max_degree=None, triples=DESK_SUITE):
    rep = SuiteReport("posets")

    def one(inst):
        g, n, d, W = inst
        r = SuiteReport("posets")
        pp, pm, objs = crossing_data(g, n, d, W)
        good = W.S if W.is_good(n) else None
        for ob in objs:
            bad = law_violations(ob.graph, Pseudodivisor.line_bundle(ob.divisor), pp, pm, good)
            witness = {**_tag(g, n, d, W), "graph": ob.graph.to_json(), "divisor": list(ob.divisor)}
            r.record("extremal_laws", not bad, {**witness, "laws": [b[0] for b in bad]})
        return r

    for r in _map(one, desk_instances(max_degree, triples)):
        rep.merge(r)
    return rep


def suite_forests(max_degree=None, triples=DESK_SUITE):
    rep = SuiteReport("forests")

    def one(inst):
        g, n, d, W = inst
        r = SuiteReport("forests")
        _, _, objs = crossing_data(g, n, d, W)
        for ob in objs:
            P = ob.poset
            forests = full_forests(P) if P.elements else []
            vfs = vine_functions(P, full_only=True) if P.elements else []
            witness = {**_tag(g, n, d, W), "graph": ob.graph.to_json(), "divisor": list(ob.divisor)}
            r.record("counts_equal", len(forests) == len(vfs), witness)
            fkeys = {F.key() for F in forests}
            vkeys = {v.key() for v in vfs}
            r.record("forest_roundtrip", all(
                vine_function_to_forest(forest_to_vine_function(F), P).key() == F.key()
                for F in forests), witness)
            r.record("function_roundtrip", all(
                forest_to_vine_function(vine_function_to_forest(v, P)).key() == v.key()
                for v in vfs), witness)
            r.record("image_is_forests", {
                vine_function_to_forest(v, P).key() for v in vfs} == fkeys, witness)
            r.record("image_is_functions", {
                forest_to_vine_function(F).key() for F in forests} == vkeys, witness)
        return r

    for r in _map(one, desk_instances(max_degree, triples)):
        rep.merge(r)
    return rep


def suite_categories(max_degree=None):
    """Axiom checks on the graph category, every divisor category and every
    iterated blow-up at the desk-suite walls."""
    rep = SuiteReport("categories")
    for g, n, R in ((2, 1, 3), (3, 1, 3), (2, 2, 3)):
        C = GraphCategory(g, n, R)
        ok, w = check_axiom_sf(C)
        rep.record("axiom_graphs", ok, {"g": g, "n": n, "witness": repr(w)})
        ok, w = check_bijection_parts(C)
        rep.record("bijection_parts_graphs", ok, {"g": g, "n": n, "witness": repr(w)})
    for g, n, d, W in desk_instances(max_degree):
        pp, pm, _ = crossing_data(g, n, d, W)
        R = g - d
        cats = iterated_blowup(pp, pm, R)
        ok, w = check_axiom_sf(cats[0])
        rep.record("axiom_divisors", ok, {**_tag(g, n, d, W), "witness": repr(w)})
        for level, B in enumerate(cats[1:], 1):
            ok, w = check_axiom_sf(B)
            rep.record("axiom_blowups", ok, {**_tag(g, n, d, W), "level": level, "witness": repr(w)})
    for g, n, d, W in desk_instances():
        pp, pm, _ = crossing_data(g, n, d, W)
        strata = extremal_vine_strata(pp, pm, g - d)
        rel, _ = blowup_partial_order(strata)
        incomparable = any(
            not rel[a][b] and not rel[b][a]
            for a, b in itertools.combinations(range(len(strata)), 2)
        )
        if incomparable:
            exts = linear_extensions(strata, limit=2)
            ok = order_independence_check(pp, pm, g - d, exts[0], exts[1])
            rep.record("order_independence", ok, _tag(g, n, d, W))
    return rep


def low_codim_expected(g, n, d, W, double_locus=True):
    """Closed forms of the crossing term in degree 1 and 2.

    Vine objects carry the compact-type and two-edge displays.  With
    ``double_locus`` the self-intersection of a compact-type divisor (two
    incomparable forest elements, one edge each) contributes
    ``-rank F_1 · rank F_2`` on its stratum.
    """
    N = g - d
    if N not in (1, 2):
        raise ValueError("closed forms are only tabulated in degree 1 and 2")
    _, _, objs = crossing_data(g, n, d, W)
    want = StrataClassExpr(g, n, d, N, W, psi_on="edges")
    for ob in objs:
        G, D = ob.graph, ob.divisor
        if G.num_edges == 0 or not ob.forests or G.num_edges > N:
            continue
        if G.num_vertices != 2:
            if not double_locus:
                continue
            for F in ob.forests:
                if len(F) != 2 or any(A <= B for A in F for B in F if A != B):
                    raise ValueError("unexpected codimension-two object")
                ranks = [induced_genus(G, set(G.vertices) - V) - 1 - sum(D[v] for v in G.vertices if v not in V)
                         for V in F]
                want.add(G, D, [tuple(sorted(V)) for V in F], [], [], Fraction(-ranks[0] * ranks[1], ob.aut), ob.aut)
            continue
        v1 = G.leg_vertex(1)
        gY, dY = G.genera[1 - v1], D[1 - v1]
        V = [(v1,)]
        t = G.num_edges
        if N == 1:
            want.add(G, D, V, [], [], Fraction(gY - dY - 1), ob.aut)
        elif t == 1:
            want.add(G, D, V, [ChernFactor("FXplus", (), 1)], [], Fraction(binom(gY - dY - 1, N - 1)), ob.aut)
            want.add(G, D, V, [ChernFactor("HVplus", (v1,), 1)], [], Fraction(binom(gY - dY - 2, N - 1)), ob.aut)
            want.add(G, D, V, [], [(0, 1)], Fraction(binom(gY - dY - 1, N)), ob.aut)
        else:
            # coefficient of f_*(1); the image class is f_*(1)/t!
            want.add(G, D, V, [], [], Fraction(binom(gY - dY - 1, N), math.factorial(t)), ob.aut)
    return want


def _codim_tables_ok(g, n, d, W):
    return wallcross_on_jbar(g, n, d, W) == low_codim_expected(g, n, d, W)


def suite_coefficients():
    rep = SuiteReport("coefficients")
    for g, n, d in DESK_SUITE:
        if g - d > 2:
            continue
        for W in desk_walls(g, n, d):
            rep.record("codim_table", _codim_tables_ok(g, n, d, W), _tag(g, n, d, W))
    for j in range(7):
        for k in range(7):
            for gap in range(-2, 8):
                V = frozenset([0])
                got = coeff_b(V, {V: j}, {V: k}, {V: gap})
                # singleton forest: rank F = g_Y - d_Y - 1
                rep.record("b_singleton", got == -binom(gap - j, k + 1), {"j": j, "k": k, "rank": gap})
    return rep


def suite_oracles(max_degree=None, triples=DESK_SUITE):
    rep = SuiteReport("oracles")

    def one(inst):
        g, n, d, W = inst
        r = SuiteReport("oracles")
        base = wallcross_on_jbar(g, n, d, W)
        pushed = push_resolved(main_wallcross_resolved(g, n, d, W))
        r.record("push_equals_base", pushed == base, _tag(g, n, d, W))
        if is_disjoint_wall(g, n, d, W):
            r.record("disjoint_equals_base", disjoint_wallcross(g, n, d, W) == base, _tag(g, n, d, W))
        return r

    for r in _map(one, desk_instances(max_degree, triples)):
        rep.merge(r)
    return rep


SUITES = {
    "posets": suite_posets,
    "forests": suite_forests,
    "categories": suite_categories,
    "coefficients": suite_coefficients,
    "oracles": suite_oracles,
}


def run_suite(name):
    """Run one named suite, or every suite for ``"all"``."""
    if name == "all":
        rep = SuiteReport("all")
        for key in SUITES:
            rep.merge(SUITES[key]())
        return rep
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name]()
