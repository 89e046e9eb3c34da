"""Extremal sets across a wall, full forests and vine functions.

Given a graph ``G``, a divisor ``D`` stable for ``phi_plus`` and the
opposite perturbation ``phi_minus``, a vertex set ``V`` is extremal when
its beta value is positive on the plus side and negative on the minus side.
The poset ``ext(G, D)`` collects the connected extremal sets with connected
complement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .graphs import MarkedGraph, subdivide
from .stability import (
    PR,
    Pseudodivisor,
    StabilityError,
    _Setup,
    _as_pd,
    is_stable,
)

__all__ = [
    "ExtremalError",
    "ExtPoset",
    "FullForest",
    "VineFunction",
    "beta",
    "ext_poset",
    "full_forests",
    "full_forests_naive",
    "vine_functions",
    "forest_to_vine_function",
    "vine_function_to_forest",
    "graph_is_stable_given_forest",
    "is_forest",
    "law_violations",
]


class ExtremalError(ValueError):
    """Raised on invalid extremal-poset inputs."""


def _mask(V):
    m = 0
    for v in V:
        m |= 1 << v
    return m


def _unmask(m):
    out = []
    v = 0
    while m:
        if m & 1:
            out.append(v)
        m >>= 1
        v += 1
    return frozenset(out)


def beta(G, D, phi, V) -> PR:
    """``-deg D|_V + phi(V) + |E(V,V^c)|/2`` (on ``G^E`` for pseudodivisors)."""
    s = _Setup(phi, G, _as_pd(G, D))
    b, e = s.beta(_mask(V))
    return PR(Fraction(b, s.den), Fraction(e, s.den))


def _set_key(V):
    return (len(V), tuple(sorted(V)))


@dataclass
class ExtPoset:
    """The poset of connected extremal sets with connected complement.

    ``graph`` is the graph the sets live on (the subdivision ``G^E`` when
    the pseudodivisor has exceptional edges); ``base_graph`` is ``G``.
    """

    graph: MarkedGraph
    base_graph: MarkedGraph
    divisor: Pseudodivisor
    elements: tuple
    extremal_sets: tuple = ()

    def __post_init__(self):
        self.elements = tuple(sorted(self.elements, key=_set_key))
        self.index = {V: k for k, V in enumerate(self.elements)}
        m = len(self.elements)
        self.order = tuple(
            tuple(self.elements[a] <= self.elements[b] for b in range(m)) for a in range(m)
        )

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def maximal(self):
        return [V for V in self.elements if not any(V < W for W in self.elements)]

    def minimal(self):
        return [V for V in self.elements if not any(W < V for W in self.elements)]

    def is_lower_set(self, L) -> bool:
        L = set(L)
        return all(W in L for V in L for W in self.elements if W <= V)


def ext_poset(G: MarkedGraph, D, phi_plus, phi_minus, check_stable=True) -> ExtPoset:
    """Compute ``ext(G, D)`` for the pair ``(phi_plus, phi_minus)``."""
    pd = _as_pd(G, D)
    if check_stable and not is_stable(phi_plus, G, pd):
        raise ExtremalError("divisor is not stable for phi_plus")
    sp = _Setup(phi_plus, G, pd)
    sm = _Setup(phi_minus, G, pd)
    H = sp.H
    full = (1 << H.num_vertices) - 1
    plus = {m: (b, e) for m, b, e in sp.scan()}
    minus = {m: (b, e) for m, b, e in sm.scan()}
    leg1 = H.leg_vertex(1) if H.n >= 1 else None
    extremal = []
    elements = []
    for m in plus:
        if m == full:
            continue
        if plus[m] > (0, 0) and minus[m] < (0, 0):
            extremal.append(_unmask(m))
            if (full & ~m) in plus:
                if leg1 is None or not m >> leg1 & 1:
                    raise ExtremalError(
                        "extremal set without marking 1: swap the sides of the wall"
                    )
                elements.append(_unmask(m))
    return ExtPoset(H, G, pd, tuple(elements), tuple(sorted(extremal, key=_set_key)))


def all_extremal_sets(G, D, phi_plus, phi_minus):
    """Every extremal vertex set (connected or not), by exhaustive search."""
    pd = _as_pd(G, D)
    sp = _Setup(phi_plus, G, pd)
    sm = _Setup(phi_minus, G, pd)
    full = (1 << sp.nv) - 1
    out = []
    for m in range(1, full):
        if sp.beta(m) > (0, 0) and sm.beta(m) < (0, 0):
            out.append(_unmask(m))
    return sorted(out, key=_set_key)


# ---------------------------------------------------------------------------
# Forests
# ---------------------------------------------------------------------------


def is_forest(sets) -> bool:
    """Every down-set is a chain."""
    sets = list(sets)
    for V in sets:
        below = [W for W in sets if W <= V]
        for A, B in itertools.combinations(below, 2):
            if not (A <= B or B <= A):
                return False
    return True


@dataclass
class FullForest:
    """A full forest with its next-set and close/far edge partition."""

    poset: ExtPoset
    sets: tuple
    nex: dict = field(default_factory=dict)
    cu: dict = field(default_factory=dict)
    fu: dict = field(default_factory=dict)

    @classmethod
    def build(cls, poset: ExtPoset, sets, check=True) -> "FullForest":
        H = poset.graph
        sets = tuple(sorted({frozenset(V) for V in sets}, key=_set_key))
        allv = frozenset(H.vertices)
        if check:
            missing = [V for V in sets if V not in poset.index]
            if missing:
                raise ExtremalError(f"{sorted(missing[0])} is not in ext(G,D)")
            if not is_forest(sets):
                raise ExtremalError("sets do not form a forest")
            if any(V not in sets for V in poset.maximal()):
                raise ExtremalError("a maximal element of ext(G,D) is missing")
            covered = set()
            for V in sets:
                covered |= set(H.boundary_edges(V))
            if covered != set(range(H.num_edges)):
                raise ExtremalError("boundary edges do not cover E(G)")
        nex, cu, fu = {}, {}, {}
        for V in sets:
            N = next_set(sets, V, allv)
            nex[V] = N
            cu[V] = frozenset(H.edges_between(V, N - V))
            fu[V] = frozenset(H.edges_between(V, allv - N))
        return cls(poset, sets, nex, cu, fu)

    @property
    def graph(self) -> MarkedGraph:
        return self.poset.graph

    def __len__(self):
        return len(self.sets)

    def covers_of(self, V):
        """Elements immediately above ``V``."""
        ups = [W for W in self.sets if V < W]
        return [W for W in ups if not any(V < X < W for X in ups)]

    def minimal(self):
        return [V for V in self.sets if not any(W < V for W in self.sets)]

    def above(self, V):
        return [W for W in self.sets if V <= W]

    def close_owner(self):
        """Edge -> the unique element whose close edges contain it."""
        out = {}
        for V in self.sets:
            for e in self.cu[V]:
                out[e] = V
        return out

    def far_owners(self):
        """Edge -> elements whose far edges contain it."""
        out = {e: [] for e in range(self.graph.num_edges)}
        for V in self.sets:
            for e in sorted(self.fu[V]):
                out[e].append(V)
        return out

    def key(self):
        return tuple(tuple(sorted(V)) for V in self.sets)

    def to_json(self):
        return [sorted(V) for V in self.sets]


def next_set(sets, V, allv):
    N = frozenset(allv)
    for W in sets:
        if V < W:
            N = N & W
    return N


def full_forests(P: ExtPoset):
    """All full forests of ``P`` in a deterministic order."""
    H = P.graph
    alledges = set(range(H.num_edges))
    maxima = P.maximal()
    if not is_forest(maxima):
        return []
    rest = [V for V in P.elements if V not in maxima]
    bd = {V: set(H.boundary_edges(V)) for V in P.elements}
    # edges that some element could still cover, suffix-wise
    reach = [set() for _ in range(len(rest) + 1)]
    for k in range(len(rest) - 1, -1, -1):
        reach[k] = reach[k + 1] | bd[rest[k]]
    out = []

    def rec(k, chosen, covered):
        if not (alledges - covered) <= reach[k]:
            return
        if k == len(rest):
            if covered == alledges:
                out.append(FullForest.build(P, chosen, check=False))
            return
        V = rest[k]
        # include V when the forest property survives
        cand = chosen + [V]
        if _forest_ok_with(cand, V):
            rec(k + 1, cand, covered | bd[V])
        rec(k + 1, chosen, covered)

    covered0 = set()
    for V in maxima:
        covered0 |= bd[V]
    rec(0, list(maxima), covered0)
    out.sort(key=lambda F: (len(F), F.key()))
    return out


def _forest_ok_with(sets, V):
    """Forest test after adding ``V`` (only chains through ``V`` can break)."""
    for W in sets:
        if W <= V or V <= W:
            top = W if V <= W else V
            below = [X for X in sets if X <= top]
            for A, B in itertools.combinations(below, 2):
                if not (A <= B or B <= A):
                    return False
    return True


def full_forests_naive(P: ExtPoset):
    """Reference enumeration over the full power set of ``P``."""
    H = P.graph
    out = []
    els = list(P.elements)
    maxima = set(P.maximal())
    for r in range(len(els) + 1):
        for sub in itertools.combinations(els, r):
            if not maxima <= set(sub):
                continue
            if not is_forest(sub):
                continue
            cov = set()
            for V in sub:
                cov |= set(H.boundary_edges(V))
            if cov == set(range(H.num_edges)):
                out.append(FullForest.build(P, sub, check=False))
    out.sort(key=lambda F: (len(F), F.key()))
    return out


# ---------------------------------------------------------------------------
# Vine functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VineFunction:
    """``alpha`` on a lower set of ``ext(G, D)``, stored as sorted pairs."""

    domain: tuple
    alpha: tuple  # pairs (V, frozenset of edges), aligned with ``domain``

    def __getitem__(self, V):
        for W, a in self.alpha:
            if W == V:
                return a
        raise KeyError(V)

    @property
    def support(self) -> frozenset:
        out = set()
        for _, a in self.alpha:
            out |= a
        return frozenset(out)

    def is_full(self, P: ExtPoset) -> bool:
        return set(self.domain) == set(P.elements) and self.support == frozenset(
            range(P.graph.num_edges)
        )

    def key(self):
        return tuple((tuple(sorted(V)), tuple(sorted(a))) for V, a in self.alpha)


def make_vine_function(P: ExtPoset, mapping) -> VineFunction:
    dom = tuple(sorted(mapping, key=_set_key))
    return VineFunction(dom, tuple((V, frozenset(mapping[V])) for V in dom))


def check_vine_function(P: ExtPoset, vf: VineFunction) -> bool:
    H = P.graph
    L = set(vf.domain)
    if not L <= set(P.elements) or not P.is_lower_set(L):
        return False
    for V in vf.domain:
        a = vf[V]
        bd = set(H.boundary_edges(V))
        if not a <= bd:
            return False
        hit = any(W < V and W in L and (vf[W] & bd) for W in P.elements)
        if (not a) != hit:
            return False
    return True


def vine_functions(P: ExtPoset, lower_set=None, full_only=False):
    """All vine functions on ``lower_set`` (default: all of ``ext``)."""
    H = P.graph
    L = list(P.elements) if lower_set is None else sorted(lower_set, key=_set_key)
    if not P.is_lower_set(L):
        raise ExtremalError("domain is not a lower set")
    bd = {V: sorted(H.boundary_edges(V)) for V in L}
    out = []

    def rec(k, current):
        if k == len(L):
            vf = make_vine_function(P, current)
            if not full_only or vf.is_full(P):
                out.append(vf)
            return
        V = L[k]
        bset = set(bd[V])
        forced = any(W < V and (current[W] & bset) for W in current)
        if forced:
            current[V] = frozenset()
            rec(k + 1, current)
        else:
            edges = bd[V]
            for r in range(1, len(edges) + 1):
                for sub in itertools.combinations(edges, r):
                    current[V] = frozenset(sub)
                    rec(k + 1, current)
        del current[V]

    rec(0, {})
    out.sort(key=VineFunction.key)
    return out


def forest_to_vine_function(F: FullForest) -> VineFunction:
    P = F.poset
    mapping = {V: (F.cu[V] if V in F.nex else frozenset()) for V in P.elements}
    vf = make_vine_function(P, mapping)
    if not vf.is_full(P) or not check_vine_function(P, vf):
        raise ExtremalError("forest does not give a full vine function")
    return vf


def vine_function_to_forest(vf: VineFunction, P: ExtPoset) -> FullForest:
    if not vf.is_full(P) or not check_vine_function(P, vf):
        raise ExtremalError("vine function is not full")
    return FullForest.build(P, [V for V, a in vf.alpha if a])


def graph_is_stable_given_forest(poset: ExtPoset, sets) -> bool:
    """Stability of the graph carrying a full forest.

    Every genuine full forest lives on a stable graph, so a subdivided graph
    with exceptional vertices returns ``False``: such a forest is a
    contradiction with the divisor being stable.
    """
    H = poset.graph
    covered = set()
    for V in sets:
        covered |= set(H.boundary_edges(V))
    if covered != set(range(H.num_edges)):
        raise ExtremalError("the given sets do not cover the edges")
    return H.is_stable()


# ---------------------------------------------------------------------------
# Structural laws
# ---------------------------------------------------------------------------


def law_violations(G, D, phi_plus, phi_minus, good_legs=None):
    """Check the lattice laws of extremal sets and of full forests.

    Returns a list of ``(law, witness)`` pairs; an empty list means every
    law holds.  ``good_legs``, when given, is the marking set of a good wall:
    every extremal set must then carry exactly those markings and the poset
    has at most one element.
    """
    P = ext_poset(G, D, phi_plus, phi_minus)
    H = P.graph
    allv = frozenset(H.vertices)
    ext_all = all_extremal_sets(G, D, phi_plus, phi_minus)
    ext_set = set(ext_all)
    elems = set(P.elements)
    bad = []

    for V1, V2 in itertools.combinations_with_replacement(ext_all, 2):
        for X in (V1 & V2, V1 | V2):
            if X and X != allv and X not in ext_set:
                bad.append(("cap_cup", (sorted(V1), sorted(V2))))
        if H.edges_between(V1 - V2, V2 - V1):
            bad.append(("cap_cup_edges", (sorted(V1), sorted(V2))))
    for V in ext_all:
        parts = H.components(V)
        if len(parts) > 1 and any(frozenset(c) not in ext_set for c in parts):
            bad.append(("disconnected", sorted(V)))
        rest = H.components(allv - V)
        if len(rest) > 1 and any(allv - frozenset(c) not in ext_set for c in rest):
            bad.append(("disconnected_complement", sorted(V)))
    for V1, V2 in itertools.combinations(P.elements, 2):
        U = V1 | V2
        if U != allv and not any(U <= W for W in P.elements):
            bad.append(("union", (sorted(V1), sorted(V2))))
        if any(V1 <= W and V2 <= W for W in P.elements) and (V1 & V2) not in elems:
            bad.append(("intersection", (sorted(V1), sorted(V2))))
    if good_legs is not None:
        legs = frozenset(good_legs)
        if len(P) > 1:
            bad.append(("at_most_one", len(P)))
        for V in ext_all:
            if H.legs_of(V) != legs:
                bad.append(("leg_set", sorted(V)))

    for F in full_forests(P):
        bad.extend(_forest_law_violations(P, F))
        if not graph_is_stable_given_forest(P, F.sets):
            bad.append(("noE", F.key()))
    return bad


def _forest_law_violations(P: ExtPoset, F: FullForest):
    H = P.graph
    allv = frozenset(H.vertices)
    sets = set(F.sets)
    bad = []
    for V1, V2 in itertools.combinations(F.sets, 2):
        if not (V1 <= V2 or V2 <= V1):
            if V1 | V2 != allv or H.edges_between(allv - V1, allv - V2):
                bad.append(("incomparable", (sorted(V1), sorted(V2))))
    maximal = set(P.maximal())
    for Vp in P.elements:
        if Vp in maximal:
            continue
        ups = [W for W in F.sets if Vp < W]
        mins = [W for W in ups if not any(X < W for X in ups)]
        N = next_set(F.sets, Vp, allv)
        tag = (F.key(), sorted(Vp))
        if any(not H.edges_between(N - Vp, allv - W) for W in mins):
            bad.append(("next_1", tag))
        if N == Vp:
            bad.append(("next_2", tag))
        if not H.is_connected_subset(N):
            bad.append(("next_3", tag))
        if Vp in sets and H.internal_edges(N - Vp):
            bad.append(("next_4", tag))
        for V in P.elements:
            if N <= V and not any(W <= V for W in mins):
                bad.append(("next_5", tag))
    for V in P.minimal():
        if V not in sets:
            bad.append(("next_6", (F.key(), sorted(V))))
    seen = []
    for V in F.sets:
        seen.extend(H.edges_between(V, F.nex[V] - V))
    if sorted(seen) != list(range(H.num_edges)):
        bad.append(("next_7", F.key()))
    return bad
