"""Finite stratification categories, their blowups, and the resolution of a
wall crossing.

A category here is a ranked finite category whose morphisms are epi.  Each
object carries a set of codimension-one labels ``S_a`` and each morphism
``f: a -> b`` an injective pullback ``f^*: S_b -> S_a``; the labels of ``a``
not pulled back are the labels contracted by ``f``.
"""

from __future__ import annotations

import functools
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .graphs import (
    MarkedGraph,
    VineTriple,
    automorphisms,
    contractions_to,
    enumerate_stable_graphs,
    isomorphisms,
    vine_triples,
)
from .stability import (
    Pseudodivisor,
    StabilityError,
    Wall,
    generic_point,
    opposite_pair,
    stable_divisors,
)
from .extremal import (
    ExtPoset,
    FullForest,
    ext_poset,
    full_forests,
    make_vine_function,
    vine_functions,
)

__all__ = [
    "Arrow",
    "StratCategory",
    "GraphCategory",
    "DivisorCategory",
    "BlowupCategory",
    "BlowupError",
    "VineStratum",
    "EObject",
    "check_axiom_sf",
    "check_bijection_parts",
    "check_transversal",
    "blowup_category",
    "extremal_vine_strata",
    "blowup_partial_order",
    "linear_extensions",
    "ExplicitCategory",
    "alpha_key",
    "blowup_alpha_objects",
    "canonical_monomial",
    "tilde_E_objects",
    "tilde_objects",
    "iterated_blowup",
    "blowup_E_objects",
    "order_independence_check",
    "blowdown_psi_push",
    "iterated_psi_push",
    "canonical_divisor",
    "divisor_automorphisms",
    "forest_key",
]


class BlowupError(ValueError):
    """Raised when a blowup centre is not admissible."""


def _rk(x):
    return repr(x)


@dataclass(frozen=True, eq=False)
class Arrow:
    src: object
    tgt: object
    data: object

    # arrows are mostly compared inside one hom-set, so the endpoints are
    # left out of the hash and compared last
    def __hash__(self):
        return hash(self.data)

    def __eq__(self, other):
        if not isinstance(other, Arrow):
            return NotImplemented
        return self.data == other.data and self.src == other.src and self.tgt == other.tgt


class StratCategory:
    """Interface and generic algorithms for finite stratification categories.

    Subclasses provide ``objects``, ``rank``, ``terminal``, ``_hom``,
    ``compose``, ``labels`` and ``pull``.
    """

    def __init__(self):
        self._homcache = {}
        self._classcache = {}

    # -- interface ----------------------------------------------------------

    objects: list
    terminal: object

    def rank(self, a) -> int:
        raise NotImplementedError

    def _hom(self, a, b):
        raise NotImplementedError

    def compose(self, f: Arrow, g: Arrow) -> Arrow:
        """``g o f`` for ``f: a -> b`` and ``g: b -> c``."""
        raise NotImplementedError

    def labels(self, a):
        raise NotImplementedError

    def pull(self, f: Arrow) -> dict:
        raise NotImplementedError

    # -- derived ------------------------------------------------------------

    def hom(self, a, b):
        key = (a, b)
        if key not in self._homcache:
            self._homcache[key] = tuple(self._hom(a, b))
        return self._homcache[key]

    def aut(self, a):
        return self.hom(a, a)

    def identity(self, a) -> Arrow:
        for f in self.aut(a):
            p = self.pull(f)
            if all(p[x] == x for x in p) and self._is_identity(f):
                return f
        raise RuntimeError("no identity morphism")

    def _is_identity(self, f):
        return True

    def contracted(self, f: Arrow) -> frozenset:
        """``S_f``: labels of the source not pulled back from the target."""
        return frozenset(self.labels(f.src)) - frozenset(self.pull(f).values())

    def coset(self, g: Arrow):
        """The left coset ``Aut(target)·g`` as a frozenset."""
        return frozenset(self.compose(g, a) for a in self.aut(g.tgt))

    def classes(self, a, b):
        """``Mor‾(a, b)`` as a list of ``(pulled-back label set, representative)``."""
        key = (a, b)
        if key not in self._classcache:
            self._classcache[key] = self._classes(a, b)
        return self._classcache[key]

    def _classes(self, a, b):
        seen = {}
        for f in self.hom(a, b):
            P = frozenset(self.pull(f).values())
            c = self.coset(f)
            if c in seen:
                continue
            seen[c] = (P, f)
        return list(seen.values())

    def __len__(self):
        return len(self.objects)


# ---------------------------------------------------------------------------
# Graph-based categories
# ---------------------------------------------------------------------------


def _graph_compose(f, g):
    vm = tuple(g[0][x] for x in f[0])
    em = []
    for x in f[1]:
        if x is None:
            em.append(None)
            continue
        y = g[1][x[0]]
        em.append(None if y is None else (y[0], x[1] ^ y[1]))
    return (vm, tuple(em))


def _graph_pull(data):
    return {("e", x[0]): ("e", i) for i, x in enumerate(data[1]) if x is not None}


class GraphCategory(StratCategory):
    """Stable ``n``-pointed genus-``g`` graphs with at most ``max_edges`` edges."""

    def __init__(self, g, n, max_edges):
        super().__init__()
        self.g, self.n, self.max_edges = g, n, max_edges
        self.objects = enumerate_stable_graphs(g, n, max_edges)
        self.terminal = self.objects[0]

    def rank(self, a):
        return a.num_edges

    def _hom(self, a, b):
        return [Arrow(a, b, (m.vertex_map, m.edge_map)) for m in contractions_to(a, b)]

    def compose(self, f, g):
        return Arrow(f.src, g.tgt, _graph_compose(f.data, g.data))

    def labels(self, a):
        return [("e", i) for i in range(a.num_edges)]

    def pull(self, f):
        return _graph_pull(f.data)

    def _is_identity(self, f):
        return f.data[0] == tuple(range(len(f.data[0]))) and all(
            x == (i, 0) for i, x in enumerate(f.data[1])
        )


def divisor_automorphisms(G: MarkedGraph, D):
    """Automorphisms of ``G`` fixing the divisor ``D`` (vertex-indexed)."""
    D = tuple(D)
    return [s for s in automorphisms(G) if all(D[s.vertex_map[v]] == D[v] for v in G.vertices)]


def canonical_divisor(G: MarkedGraph, D):
    """Lexicographically least divisor in the ``Aut(G)``-orbit of ``D``."""
    best = None
    for s in automorphisms(G):
        E = [0] * G.num_vertices
        for v in G.vertices:
            E[s.vertex_map[v]] = D[v]
        E = tuple(E)
        if best is None or E < best:
            best = E
    return best


class DivisorCategory(StratCategory):
    """Pairs ``(G, D)`` with ``D`` a stable line-bundle divisor on ``G``.

    Objects are ``(G, D)`` tuples with ``G`` canonical and ``D`` least in its
    ``Aut(G)``-orbit.  Only pseudodivisors with empty exceptional set are
    included; the resolution never involves the others.
    """

    def __init__(self, phi, max_edges, graphs=None):
        super().__init__()
        self.phi = phi
        self.max_edges = max_edges
        objs = []
        for G in graphs if graphs is not None else enumerate_stable_graphs(phi.g, phi.n, max_edges):
            reps = sorted({canonical_divisor(G, pd.D) for pd in stable_divisors(phi, G)})
            objs.extend((G, D) for D in reps)
        self.objects = sorted(objs, key=lambda o: (o[0].num_edges, o[0].structure(), o[1]))
        self.terminal = self.objects[0]

    def rank(self, a):
        return a[0].num_edges

    def _hom(self, a, b):
        return [Arrow(a, b, data) for data in _divisor_contractions(a, b)]

    def compose(self, f, g):
        return Arrow(f.src, g.tgt, _graph_compose(f.data, g.data))

    def labels(self, a):
        return [("e", i) for i in range(a[0].num_edges)]

    def pull(self, f):
        return _graph_pull(f.data)

    def _is_identity(self, f):
        return f.data[0] == tuple(range(len(f.data[0]))) and all(
            x == (i, 0) for i, x in enumerate(f.data[1])
        )


@functools.lru_cache(maxsize=None)
def _divisor_contractions(a, b):
    """Morphism data ``(G, D) -> (H, E)``; shared by every divisor category,
    since it does not depend on the stability condition."""
    return tuple(
        (m.vertex_map, m.edge_map)
        for m in contractions_to(a[0], b[0], list(a[1]), list(b[1]))
    )


class ExplicitCategory(StratCategory):
    """A category given by explicit tables (used for small examples).

    ``homs[(a, b)]`` lists morphism names; ``comp[(f, g)]`` gives ``g o f``;
    ``labels[a]`` lists labels; ``pulls[f]`` maps target labels to source
    labels.
    """

    def __init__(self, objects, ranks, terminal, homs, comp, labels, pulls):
        super().__init__()
        self.objects = list(objects)
        self._ranks = dict(ranks)
        self.terminal = terminal
        self._homs = {k: list(v) for k, v in homs.items()}
        self._comp = dict(comp)
        self._labels = dict(labels)
        self._pulls = dict(pulls)

    def rank(self, a):
        return self._ranks[a]

    def _hom(self, a, b):
        return [Arrow(a, b, name) for name in self._homs.get((a, b), [])]

    def compose(self, f, g):
        return Arrow(f.src, g.tgt, self._comp[(f.data, g.data)])

    def labels(self, a):
        return list(self._labels[a])

    def pull(self, f):
        return dict(self._pulls[f.data])


# ---------------------------------------------------------------------------
# Axiom checks
# ---------------------------------------------------------------------------


def _completions(C: StratCategory, f: Arrow, k):
    """Pairs ``(b', Aut(b')g)`` with ``g: src -> b'``, ``i: b' -> tgt`` of
    codimension ``k`` and ``f = i o g``."""
    a, b = f.src, f.tgt
    out = []
    for bp in C.objects:
        if C.rank(bp) != C.rank(b) + k:
            continue
        seen = set()
        for g in C.hom(a, bp):
            c = C.coset(g)
            if c in seen:
                continue
            if any(C.compose(g, i) == f for i in C.hom(bp, b)):
                seen.add(c)
                out.append((bp, g))
    return out


def check_axiom_sf(C: StratCategory, max_rank=None):
    """Verify the exact-count axiom on every morphism.

    Returns ``(True, None)`` or ``(False, witness)`` where the witness names
    the morphism and the number of rank-one completions found.
    """
    objs = [a for a in C.objects if max_rank is None or C.rank(a) <= max_rank]
    by_rank = defaultdict(list)
    for a in objs:
        by_rank[C.rank(a)].append(a)
    for a in objs:
        for b in objs:
            homs = C.hom(a, b)
            if not homs:
                continue
            need = C.rank(a) - C.rank(b)
            # a class Aut(b')g factors f exactly when f = i o g for some i,
            # since i o (s o g) = (i o s) o g runs over the same composites
            found = dict.fromkeys(homs, 0)
            for bp in by_rank[C.rank(b) + 1]:
                down = C.hom(bp, b)
                if not down:
                    continue
                for _, g in C.classes(a, bp):
                    for f in {C.compose(g, i) for i in down}:
                        found[f] += 1
            for f in homs:
                if found[f] != need:
                    return False, {"morphism": f, "expected": need, "found": found[f]}
    return True, None


def check_bijection_parts(C: StratCategory, max_rank=None):
    """For every ``f`` and ``k``: the codimension-``k`` factorisations number
    ``binom(codim f, k)`` and ``(b', g) -> g^*(S_i)`` is a bijection onto the
    ``k``-subsets of ``S_f``."""
    objs = [a for a in C.objects if max_rank is None or C.rank(a) <= max_rank]
    for a in objs:
        for b in objs:
            for f in C.hom(a, b):
                c = C.rank(a) - C.rank(b)
                Sf = C.contracted(f)
                for k in range(c + 1):
                    pairs = _completions(C, f, k)
                    if len(pairs) != comb(c, k):
                        return False, {"morphism": f, "k": k, "found": len(pairs)}
                    images = set()
                    for bp, g in pairs:
                        i = next(i for i in C.hom(bp, b) if C.compose(g, i) == f)
                        Si = C.contracted(i)
                        pg = C.pull(g)
                        img = frozenset(pg[x] for x in Si)
                        if len(img) != k or not img <= Sf:
                            return False, {"morphism": f, "k": k, "bad_image": img}
                        images.add(img)
                    if len(images) != comb(c, k):
                        return False, {"morphism": f, "k": k, "images": len(images)}
    return True, None


def check_transversal(C: StratCategory, delta):
    """Raise :class:`BlowupError` unless ``delta`` has transversal
    self-intersection; returns the classes ``Mor‾(gamma, delta)`` per object."""
    out = {}
    for gam in C.objects:
        homs = C.hom(gam, delta)
        sets = {}
        for f in homs:
            sets.setdefault(frozenset(C.pull(f).values()), f)
        items = list(sets.items())
        for (P1, f1), (P2, f2) in itertools.combinations(items, 2):
            if P1 & P2:
                raise BlowupError(
                    f"centre lacks transversal self-intersection: morphisms {f1.data} and "
                    f"{f2.data} from {gam} pull back overlapping label sets"
                )
        # equal pulled-back sets must come from the same class
        for P, f in items:
            cos = C.coset(f)
            for g in homs:
                if frozenset(C.pull(g).values()) == P and g not in cos:
                    raise BlowupError("equal pulled-back label sets from distinct classes")
        out[gam] = [P for P, _ in items]
    return out


# ---------------------------------------------------------------------------
# Blowup
# ---------------------------------------------------------------------------


def _sorted_labels(xs):
    return tuple(sorted(xs, key=_rk))


class BlowupCategory(StratCategory):
    """The blowup of ``C`` at an object ``delta`` with transversal
    self-intersection.

    Objects are ``(gamma, m)`` with ``m`` a frozenset of pairs ``(P, M)``:
    ``P`` the label set pulled back along one class of morphisms to
    ``delta`` and ``M`` a nonempty subset of ``P``.
    """

    def __init__(self, C: StratCategory, delta, level=1, max_rank=None):
        super().__init__()
        self._rankcache = {}
        self.base = C
        self.delta = delta
        self.level = level
        if C.rank(delta) == 0:
            raise BlowupError("the centre must have positive codimension")
        self.centre_classes = check_transversal(C, delta)
        objs = []
        for gam in C.objects:
            Ps = self.centre_classes[gam]
            choices = [
                [(P, frozenset(M)) for r in range(1, len(P) + 1) for M in itertools.combinations(_sorted_labels(P), r)]
                for P in Ps
            ]
            reps = set()
            for combo in itertools.product(*choices):
                reps.add(self.canonical(gam, frozenset(combo)))
            objs.extend(reps)
        if max_rank is not None:
            objs = [o for o in objs if self.rank(o) <= max_rank]
        self.objects = sorted(objs, key=lambda o: (self.rank(o), C.objects.index(o[0]), _rk(sorted(o[1], key=_rk))))
        self.terminal = (C.terminal, frozenset())

    def canonical(self, gam, m):
        best = None
        for s in self.base.aut(gam):
            p = self.base.pull(s)
            mm = frozenset((frozenset(p[x] for x in P), frozenset(p[x] for x in M)) for P, M in m)
            enc = _rk(sorted((_sorted_labels(P), _sorted_labels(M)) for P, M in mm))
            if best is None or enc < best[0]:
                best = (enc, mm)
        return (gam, best[1])

    def rank(self, a):
        r = self._rankcache.get(a)
        if r is None:
            gam, m = a
            r = self._rankcache[a] = self.base.rank(gam) - sum(len(M) for _, M in m) + len(m)
        return r

    def admissible(self, a, f_under, b):
        """Whether the base morphism ``f_under`` lifts to ``a -> b``."""
        p = self.base.pull(f_under)
        image = set(p.values())
        for P1, M1 in a[1]:
            ok = False
            for P2, M2 in b[1]:
                if frozenset(p[x] for x in P2) == P1 and M1 <= frozenset(p[x] for x in M2):
                    ok = True
                    break
            if not ok and not (M1 & image):
                ok = True
            if not ok:
                return False
        return True

    def _hom(self, a, b):
        return [Arrow(a, b, f) for f in self.base.hom(a[0], b[0]) if self.admissible(a, f, b)]

    def compose(self, f, g):
        return Arrow(f.src, g.tgt, self.base.compose(f.data, g.data))

    def labels(self, a):
        gam, m = a
        used = set()
        for _, M in m:
            used |= M
        out = [("b", e) for e in self.base.labels(gam) if e not in used]
        out += [("x", self.level, _sorted_labels(P)) for P, _ in m]
        return sorted(out, key=_rk)

    def pull(self, f):
        p = self.base.pull(f.data)
        out = {}
        for lab in self.labels(f.tgt):
            if lab[0] == "b":
                out[lab] = ("b", p[lab[1]])
            else:
                out[lab] = ("x", lab[1], _sorted_labels(p[x] for x in lab[2]))
        return out

    def _index(self, raw):
        """Object of the skeleton isomorphic to the raw pair ``raw``."""
        return self.canonical(*raw)


def blowup_category(C: StratCategory, delta, level=1, max_rank=None) -> BlowupCategory:
    return BlowupCategory(C, delta, level=level, max_rank=max_rank)


# ---------------------------------------------------------------------------
# Vine strata and their order
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VineStratum:
    """A vine curve with a divisor whose marking-1 vertex is extremal."""

    triple: VineTriple
    bidegree: tuple  # (degree on the marking-1 vertex, degree on the other)

    def graph(self, g, n):
        return self.triple.graph(g, n)

    def order_key(self):
        return (self.triple.i, self.triple.t, tuple(sorted(self.triple.S)), self.bidegree)


def extremal_vine_strata(phi_plus, phi_minus, max_edges=None):
    """Vine strata ``(G(i,t,S), D)`` with ``D`` plus-stable and the
    marking-1 vertex extremal."""
    g, n = phi_plus.g, phi_plus.n
    out = []
    for T in vine_triples(g, n):
        if max_edges is not None and T.t > max_edges:
            continue
        G = T.graph(g, n).canonical()
        for pd in stable_divisors(phi_plus, G):
            P = ext_poset(G, pd, phi_plus, phi_minus)
            v1 = G.leg_vertex(1)
            if frozenset([v1]) in P.index:
                out.append(VineStratum(T, (pd.D[v1], pd.D[1 - v1])))
    return sorted(out, key=VineStratum.order_key)


def _stratum_leq(a: VineStratum, b: VineStratum) -> bool:
    A, B = a.triple, b.triple
    return A.S <= B.S and A.i <= B.i and A.i + A.t <= B.i + B.t


def blowup_partial_order(strata):
    """Order relation matrix and the lexicographic linear extension."""
    strata = list(strata)
    m = len(strata)
    rel = [[_stratum_leq(strata[a], strata[b]) for b in range(m)] for a in range(m)]
    remaining = list(range(m))
    ext = []
    while remaining:
        mins = [a for a in remaining if not any(rel[b][a] and b != a and not rel[a][b] for b in remaining)]
        if not mins:
            raise BlowupError("vine strata order has a cycle")
        pick = min(mins, key=lambda a: strata[a].order_key())
        ext.append(strata[pick])
        remaining.remove(pick)
    return rel, ext


def linear_extensions(strata, limit=24):
    """Up to ``limit`` linear extensions of the vine-strata order."""
    strata = list(strata)
    rel, _ = blowup_partial_order(strata)
    out = []
    for perm in itertools.permutations(range(len(strata))):
        pos = {a: k for k, a in enumerate(perm)}
        if all(pos[a] <= pos[b] for a in range(len(strata)) for b in range(len(strata)) if rel[a][b] and not rel[b][a]):
            out.append([strata[a] for a in perm])
            if len(out) >= limit:
                break
    return out


# ---------------------------------------------------------------------------
# Objects of the resolution
# ---------------------------------------------------------------------------


def forest_key(G, D, sets):
    """Canonical key of ``(G, D, sets)`` under ``Aut(G, D)``."""
    best = None
    for s in divisor_automorphisms(G, D):
        img = tuple(sorted(tuple(sorted(s.vertex_map[v] for v in V)) for V in sets))
        if best is None or img < best:
            best = img
    return (G.structure(), tuple(D), best)


@dataclass
class EObject:
    """An object ``(G, D, V•)`` of the exceptional part of the resolution."""

    graph: MarkedGraph
    divisor: Pseudodivisor
    forest: FullForest
    aut: int

    @property
    def key(self):
        return forest_key(self.graph, self.divisor.D, self.forest.sets)

    @property
    def is_terminal(self):
        return self.graph.num_edges == 0

    def to_json(self):
        return {
            "graph": self.graph.to_json(),
            "divisor": list(self.divisor.D),
            "forest": self.forest.to_json(),
            "aut": self.aut,
        }


def _stabiliser(G, D, sets):
    sets = set(frozenset(V) for V in sets)
    n = 0
    for s in divisor_automorphisms(G, D):
        if {frozenset(s.vertex_map[v] for v in V) for V in sets} == sets:
            n += 1
    return n


def tilde_E_objects(phi_plus, phi_minus, max_edges, graphs=None):
    """Isomorphism classes of ``(G, D, V•)`` with ``D`` plus-stable and
    ``V•`` a full forest of ``ext(G, D)``, at most ``max_edges`` edges.

    The terminal object (trivial graph, empty forest) comes first.
    """
    out = []
    for G in graphs if graphs is not None else enumerate_stable_graphs(phi_plus.g, phi_plus.n, max_edges):
        reps = sorted({canonical_divisor(G, pd.D) for pd in stable_divisors(phi_plus, G)})
        for D in reps:
            pd = Pseudodivisor.line_bundle(D)
            P = ext_poset(G, pd, phi_plus, phi_minus)
            seen = set()
            for F in full_forests(P):
                k = forest_key(G, D, F.sets)
                if k in seen:
                    continue
                seen.add(k)
                out.append(EObject(G, pd, F, _stabiliser(G, D, F.sets)))
    out.sort(key=lambda o: (o.graph.num_edges, len(o.forest), _rk(o.key)))
    return out


def tilde_objects(phi_plus, phi_minus, max_edges):
    """Isomorphism classes of ``(G, D, alpha)`` with ``alpha`` a vine function
    on all of ``ext(G, D)``."""
    out = []
    for G in enumerate_stable_graphs(phi_plus.g, phi_plus.n, max_edges):
        reps = sorted({canonical_divisor(G, pd.D) for pd in stable_divisors(phi_plus, G)})
        for D in reps:
            pd = Pseudodivisor.line_bundle(D)
            P = ext_poset(G, pd, phi_plus, phi_minus)
            seen = set()
            for vf in vine_functions(P):
                k = alpha_key(G, D, {V: a for V, a in vf.alpha})
                if k not in seen:
                    seen.add(k)
                    out.append((G, pd, vf))
    return out


def alpha_key(G, D, alpha):
    """Canonical key of ``(G, D, alpha)`` under ``Aut(G, D)``."""
    best = None
    for s in divisor_automorphisms(G, D):
        img = []
        for V, a in alpha.items():
            img.append(
                (
                    tuple(sorted(s.vertex_map[v] for v in V)),
                    tuple(sorted(s.edge_map[e][0] for e in a)),
                )
            )
        img = tuple(sorted(img))
        if best is None or img < best:
            best = img
    return (G.structure(), tuple(D), best)


# ---------------------------------------------------------------------------
# Iterated blowup
# ---------------------------------------------------------------------------


def _stratum_object(C0: DivisorCategory, s: VineStratum):
    g, n = C0.phi.g, C0.phi.n
    G = s.graph(g, n).canonical()
    v1 = G.leg_vertex(1)
    D = [0, 0]
    D[v1] = s.bidegree[0]
    D[1 - v1] = s.bidegree[1]
    key = (G, canonical_divisor(G, D))
    if key not in C0.objects:
        raise BlowupError(f"vine stratum {s} is not an object of the base category")
    return key


def _lift(C, key):
    """Strict transform of a base object in an iterated blowup ``C``."""
    chain = []
    c = C
    while isinstance(c, BlowupCategory):
        chain.append(c)
        c = c.base
    obj = key
    for bl in reversed(chain):
        cands = [o for o in bl.objects if o[0] == obj]
        if len(cands) != 1:
            raise BlowupError("strict transform of a centre is not unique")
        obj = cands[0]
    return obj


def iterated_blowup(phi_plus, phi_minus, max_edges, order=None):
    """Blow up the extremal vine strata one after another.

    Returns the list of categories ``[C0, C1, ..., Cm]`` starting from the
    divisor category.
    """
    C0 = DivisorCategory(phi_plus, max_edges)
    strata = extremal_vine_strata(phi_plus, phi_minus, max_edges)
    if order is None:
        _, order = blowup_partial_order(strata)
    cats = [C0]
    for lvl, s in enumerate(order, start=1):
        base_key = _stratum_object(C0, s)
        C = cats[-1]
        centre = _lift(C, base_key)
        cats.append(BlowupCategory(C, centre, level=lvl))
    return cats


def _unwrap_object(C, obj):
    """Peel an iterated-blowup object down to ``((G, D), [m_1, ..., m_k])``."""
    ms = []
    c = C
    while isinstance(c, BlowupCategory):
        obj, m = obj
        ms.append(m)
        c = c.base
    return obj, list(reversed(ms))


def _label_edges(lab):
    """Edge index of a (possibly nested) base label."""
    while lab[0] == "b":
        lab = lab[1]
    if lab[0] != "e":
        raise BlowupError("label does not descend to an edge")
    return lab[1]


def _exceptional_edge_sets(C, obj):
    """Edge sets ``P`` and chosen subsets ``M`` of every exceptional class."""
    out = []
    c = C
    o = obj
    while isinstance(c, BlowupCategory):
        gam, m = o
        for P, M in m:
            out.append((frozenset(_label_edges(x) for x in P), frozenset(_label_edges(x) for x in M)))
        o = gam
        c = c.base
    return out


def _leg_side(G: MarkedGraph, cut):
    keep = [e for i, e in enumerate(G.edges) if i not in cut]
    start = G.leg_vertex(1)
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for u, v in keep:
            for a, b in ((u, v), (v, u)):
                if a == x and b not in seen:
                    seen.add(b)
                    stack.append(b)
    return frozenset(seen)


def blowup_E_objects(C):
    """Objects of an iterated blowup all of whose labels are exceptional,
    translated to ``(G, D, V•)`` keys with automorphism counts."""
    out = {}
    for obj in C.objects:
        labs = C.labels(obj)
        if any(_is_base_label(l) for l in labs):
            continue
        (G, D), _ = _unwrap_object(C, obj)
        sets = [_leg_side(G, P) for P, _ in _exceptional_edge_sets(C, obj)]
        key = forest_key(G, D, sets)
        out[key] = len(C.aut(obj))
    return out


def blowup_alpha_objects(C, posets):
    """All objects of an iterated blowup as ``(G, D, alpha)`` keys."""
    out = {}
    for obj in C.objects:
        (G, D), _ = _unwrap_object(C, obj)
        P = posets[(G, D)]
        alpha = {V: frozenset() for V in P.elements}
        for Pe, M in _exceptional_edge_sets(C, obj):
            alpha[_leg_side(G, Pe)] = M
        out[alpha_key(G, D, alpha)] = len(C.aut(obj))
    return out


def _is_base_label(l):
    while l[0] == "b":
        l = l[1]
    return l[0] == "e"


def order_independence_check(phi_plus, phi_minus, max_edges, order1, order2) -> bool:
    """The exceptional objects of both iterated blowups agree."""
    a = blowup_E_objects(iterated_blowup(phi_plus, phi_minus, max_edges, order1)[-1])
    b = blowup_E_objects(iterated_blowup(phi_plus, phi_minus, max_edges, order2)[-1])
    return a == b


# ---------------------------------------------------------------------------
# Pushing psi monomials through a blowdown
# ---------------------------------------------------------------------------


def _gbinom(a, b):
    if b < 0:
        return 0
    num = 1
    for k in range(b):
        num *= a - k
    return num // math.factorial(b)


def canonical_monomial(C: StratCategory, obj, mono: dict):
    """Least relabelling of a label -> exponent map under ``Aut(obj)``."""
    best = None
    for s in C.aut(obj):
        p = C.pull(s)
        img = tuple(sorted(((_rk(p[l]), e) for l, e in mono.items() if e), key=lambda x: x))
        if best is None or img < best:
            best = img
    return best


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if total < 0:
        return
    for x in range(total + 1):
        for rest in _compositions(total - x, parts - 1):
            yield (x,) + rest


def blowdown_psi_push(Bl: BlowupCategory, obj, exps: dict):
    """Pushforward of ``f_{obj*}(prod Psi^exps)`` to the base.

    ``exps`` maps labels of ``obj`` to nonnegative exponents.  Returns a
    dict ``(gamma, canonical monomial) -> coefficient`` meaning
    ``coefficient · f_{gamma*}(monomial)``.
    """
    C = Bl.base
    out = defaultdict(Fraction)
    target_rank = Bl.rank(obj) + sum(exps.values())
    for gam in C.objects:
        if C.rank(gam) > target_rank:
            continue
        Ps = Bl.centre_classes[gam]
        Sg = C.labels(gam)
        choices = [
            [frozenset(M) for r in range(1, len(P) + 1) for M in itertools.combinations(_sorted_labels(P), r)]
            for P in Ps
        ]
        autg = len(C.aut(gam))
        for combo in itertools.product(*choices):
            src = (gam, frozenset(zip(Ps, combo)))
            # every morphism, not classes modulo Aut(obj): summing over the
            # classes depends on the representative when the exponents are
            # not Aut(obj)-invariant, while the full sum divided by
            # |Aut(obj)| does not
            reps = Bl._hom(src, obj)
            if not reps:
                continue
            cu = set()
            for M in combo:
                cu |= M
            fu = set()
            for P, M in zip(Ps, combo):
                fu |= P - M
            for h in reps:
                p = Bl.pull(h)
                gp = {l: -1 for l in Bl.labels(src)}
                for l in Bl.labels(obj):
                    gp[p[l]] = exps.get(l, 0)
                for mono, coef in _h_delta_terms(Bl, gam, Ps, combo, gp, Sg, cu, fu):
                    key = (gam, canonical_monomial(C, gam, mono))
                    out[key] += Fraction(coef, autg)
    return {k: v for k, v in out.items() if v}


def _h_delta_terms(Bl, gam, Ps, combo, gp, Sg, cu, fu):
    """Monomials of the blowdown formula for one source ``(gam, n)`` and ``h``."""
    lvl = Bl.level
    fixed = {}
    for e in Sg:
        if e in cu:
            continue
        v = gp.get(("b", e), -1)
        if v < 0:
            return
        fixed[e] = v
    fu_list = sorted(fu, key=_rk)
    ranges = [range(fixed[e] + 1) for e in fu_list]
    for avals in itertools.product(*ranges):
        a = dict(zip(fu_list, avals))
        per_class = []
        ok = True
        for P, M in zip(Ps, combo):
            gpj = gp[("x", lvl, _sorted_labels(P))]
            total = gpj + 1 + sum(a[e] for e in P - M)
            Ml = _sorted_labels(M)
            t = total - len(Ml)
            if t < 0:
                ok = False
                break
            per_class.append([dict(zip(Ml, c)) for c in _compositions(t, len(Ml))])
        if not ok:
            continue
        for pick in itertools.product(*per_class):
            ge = dict(fixed)
            for d in pick:
                ge.update(d)
            coef = 1
            mono = {}
            for e, gval in ge.items():
                ae = a.get(e, 0)
                coef *= (-1) ** ae * _gbinom(gval, ae)
                if gval - ae:
                    mono[e] = gval - ae
            if coef:
                yield mono, coef


def iterated_psi_push(cats, obj, exps):
    """Push ``f_{obj*}(prod Psi^exps)/|Aut(obj)|`` from the last category of
    ``cats`` down to the first.  Returns ``(object, monomial) -> coeff``
    where the coefficient multiplies ``f_*(monomial)``."""
    C = cats[-1]
    current = {(obj, canonical_monomial(C, obj, exps)): Fraction(1, len(C.aut(obj)))}
    for lvl in range(len(cats) - 1, 0, -1):
        Bl = cats[lvl]
        nxt = defaultdict(Fraction)
        for (o, mono), c in current.items():
            ex = {}
            labs = {_rk(l): l for l in Bl.labels(o)}
            for name, e in mono:
                ex[labs[name]] = e
            res = blowdown_psi_push(Bl, o, ex)
            for k, v in res.items():
                nxt[k] += c * v
        current = {k: v for k, v in nxt.items() if v}
    return current
