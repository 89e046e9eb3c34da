"""Formal boundary classes and the wall-crossing formulas.

Two expressions are produced for a wall:

* on the resolution, a sum over the exceptional objects ``(G, D, V•)`` of
  Chern classes of ``F~^X`` and ``H~_V`` and powers of the exceptional
  psi classes ``Psi_V``;
* on the compactified Jacobian of the plus side, a sum over ``(G, D)``
  with full forests of Chern classes of ``F^X_+`` and ``H^+_V`` and powers
  of the edge psi classes.

:func:`push_resolved` carries the first to the second term by term; the
two computations share no coefficient code.
"""

from __future__ import annotations

import functools
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .graphs import MarkedGraph, automorphisms, canonical_form, enumerate_stable_graphs, induced_genus
from .stability import (
    Pseudodivisor,
    StabilityError,
    Wall,
    format_rational,
    generic_point,
    opposite_pair,
    parse_rational,
    stable_divisors,
)
from .extremal import ext_poset, full_forests

__all__ = [
    "WallCrossError",
    "binom",
    "ChernFactor",
    "StrataTerm",
    "StrataClassExpr",
    "ForestData",
    "coeff_b",
    "coeff_alpha",
    "crossing_data",
    "main_wallcross_resolved",
    "wallcross_on_jbar",
    "disjoint_wallcross",
    "is_disjoint_wall",
    "push_polynomial",
    "pushforward_psi_monomial",
    "push_resolved",
    "complete_homogeneous",
    "sum_tree",
    "twist_total_chern",
    "inclusion_exclusion_expand",
    "PsiRule",
    "psi_comparison",
]


class WallCrossError(ValueError):
    """Raised for invalid inputs or inapplicable methods."""


def binom(a: int, b: int) -> int:
    """Binomial coefficient with arbitrary integer top; zero for ``b < 0``."""
    if b < 0:
        return 0
    num = 1
    for k in range(b):
        num *= a - k
    return num // math.factorial(b)


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


def _bounded_tuples(parts, bound):
    """Nonnegative tuples of length ``parts`` with sum at most ``bound``."""
    if bound < 0:
        return
    for total in range(bound + 1):
        yield from _compositions(total, parts)


# ---------------------------------------------------------------------------
# Formal terms
# ---------------------------------------------------------------------------

KINDS = ("FX", "FV", "HV", "FXplus", "FVplus", "HVplus")
_PER_ELEMENT = ("FV", "HV", "FVplus", "HVplus")


@dataclass(frozen=True, order=True)
class ChernFactor:
    """``c_degree`` of a tautological K-theory symbol."""

    kind: str
    V: tuple = ()  # forest element (sorted vertices) for per-element kinds
    degree: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise WallCrossError(f"unknown Chern symbol {self.kind!r}")
        if (self.kind in _PER_ELEMENT) != bool(self.V):
            raise WallCrossError("per-element symbols need a forest element, others must not carry one")
        if self.degree < 0:
            raise WallCrossError("negative Chern degree")

    def to_json(self):
        out = {"kind": self.kind, "deg": self.degree}
        if self.V:
            out["V"] = list(self.V)
        return out

    @classmethod
    def from_json(cls, data):
        return cls(data["kind"], tuple(data.get("V", ())), int(data["deg"]))


@functools.lru_cache(maxsize=None)
def _auts(G: MarkedGraph):
    """Vertex and edge permutations of the automorphisms of ``G`` (with
    multiplicity: loop flips give repeated entries)."""
    return tuple((s.vertex_map, tuple(x[0] for x in s.edge_map)) for s in automorphisms(G))


def _encode(vm, em, D, forest, chern, psi, psi_on):
    Dn = [0] * len(D)
    for v, x in enumerate(D):
        Dn[vm[v]] = x
    fmap = lambda V: tuple(sorted(vm[v] for v in V))
    fs = tuple(sorted(fmap(V) for V in forest))
    ch = tuple(sorted(ChernFactor(c.kind, fmap(c.V) if c.V else (), c.degree) for c in chern))
    if psi_on == "edges":
        ps = tuple(sorted((em[e], x) for e, x in psi if x))
    else:
        ps = tuple(sorted((fmap(V), x) for V, x in psi if x))
    return (tuple(Dn), fs, ch, ps)


def canonical_term(G: MarkedGraph, D, forest, chern, psi, psi_on):
    """Relabel a decorated stratum to its canonical form.

    ``forest`` is an iterable of vertex sets, ``chern`` one of
    :class:`ChernFactor`, ``psi`` pairs ``(edge, exp)`` or ``(V, exp)``.
    Returns ``(H, encoding)`` with ``H`` canonical and the encoding least
    over ``Aut(H)``.
    """
    H, vperm, eperm = canonical_form(G)
    enc0 = _encode(vperm, eperm, D, forest, chern, psi, psi_on)
    D0, f0, c0, p0 = enc0
    best = None
    for vm, em in _auts(H):
        enc = _encode(vm, em, D0, f0, c0, p0, psi_on)
        if best is None or enc < best:
            best = enc
    return H, best


@dataclass
class StrataTerm:
    """A decorated stratum class ``coeff · f_*(chern · psi)``."""

    graph: MarkedGraph
    divisor: tuple
    forest: tuple
    chern: tuple
    psi: tuple
    coeff: Fraction
    aut: int
    psi_on: str = "edges"  # or "forest" on the resolution

    @property
    def key(self):
        return (repr(self.graph.structure()), self.divisor, self.forest, self.chern, self.psi)

    @property
    def codim(self) -> int:
        return self.graph.num_edges if self.psi_on == "edges" else len(self.forest)

    @property
    def degree(self) -> int:
        return self.codim + sum(x for _, x in self.psi) + sum(c.degree for c in self.chern)

    def chern_rank(self, c: ChernFactor):
        """Rank of the symbol under ``c`` (``None`` for the ``X`` symbols)."""
        if not c.V:
            return None
        fd = ForestData(self.graph, self.divisor, [frozenset(V) for V in self.forest])
        V = frozenset(c.V)
        return fd.rkF[V] if c.kind.startswith("FV") else fd.rkH[V]

    def to_json(self):
        chern = []
        for c in self.chern:
            item = c.to_json()
            r = self.chern_rank(c)
            if r is not None and c.degree > r:
                item["beyond_rank"] = True
            chern.append(item)
        out = {
            "graph": self.graph.to_json(),
            "divisor": list(self.divisor),
            "forest": [list(V) for V in self.forest],
            "chern": chern,
            "coeff": format_rational(self.coeff),
            "aut": self.aut,
        }
        if self.psi_on == "edges":
            out["psi"] = {str(e): x for e, x in self.psi}
        else:
            out["psi_forest"] = [[list(V), x] for V, x in self.psi]
        return out


class StrataClassExpr:
    """A formal sum of decorated strata, canonical and zero-free."""

    def __init__(self, g, n, d, degree, wall=None, psi_on="edges"):
        self.g, self.n, self.d = g, n, d
        self.degree = degree
        self.wall = wall
        self.psi_on = psi_on
        self._terms = {}

    def add(self, G, D, forest, chern, psi, coeff, aut=None):
        """Add ``coeff · f_*(...)`` for an arbitrary labelling of ``G``."""
        if not coeff:
            return
        H, (D0, f0, c0, p0) = canonical_term(G, D, forest, chern, psi, self.psi_on)
        t = StrataTerm(H, D0, f0, c0, p0, Fraction(coeff), 0, self.psi_on)
        if t.degree != self.degree:
            raise WallCrossError(f"term of degree {t.degree} in an expression of degree {self.degree}")
        k = t.key
        if k in self._terms:
            self._terms[k].coeff += t.coeff
            if not self._terms[k].coeff:
                del self._terms[k]
        else:
            t.aut = aut if aut is not None else _stabiliser_size(H, D0, f0, self.psi_on)
            self._terms[k] = t

    def merge(self, other: "StrataClassExpr", scale=1):
        for t in other.terms:
            self.add(t.graph, t.divisor, t.forest, t.chern, t.psi, t.coeff * scale, t.aut)

    @property
    def terms(self):
        return [self._terms[k] for k in sorted(self._terms, key=_sort_key)]

    def coefficients(self) -> dict:
        return {k: t.coeff for k, t in self._terms.items()}

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        return (
            isinstance(other, StrataClassExpr)
            and self.degree == other.degree
            and self.coefficients() == other.coefficients()
        )

    def difference(self, other):
        """Keys whose coefficients differ, with both values."""
        a, b = self.coefficients(), other.coefficients()
        return {k: (a.get(k, 0), b.get(k, 0)) for k in set(a) | set(b) if a.get(k, 0) != b.get(k, 0)}

    def to_json(self):
        out = {"g": self.g, "n": self.n, "d": self.d}
        if self.wall is not None:
            out["wall"] = self.wall.to_json()
        out["degree"] = self.degree
        out["psi_on"] = self.psi_on
        out["terms"] = [t.to_json() for t in self.terms]
        return out

    @classmethod
    def from_json(cls, data):
        wall = Wall.from_json(data["wall"]) if "wall" in data else None
        e = cls(data["g"], data["n"], data["d"], data["degree"], wall, data.get("psi_on", "edges"))
        for t in data["terms"]:
            G = MarkedGraph.from_json(t["graph"])
            chern = [ChernFactor.from_json(c) for c in t["chern"]]
            if e.psi_on == "edges":
                psi = [(int(k), v) for k, v in t.get("psi", {}).items()]
            else:
                psi = [(tuple(V), x) for V, x in t.get("psi_forest", [])]
            forest = [tuple(V) for V in t["forest"]]
            e.add(G, tuple(t["divisor"]), forest, chern, psi, parse_rational(t["coeff"]), t.get("aut"))
        return e


def _sort_key(k):
    return (len(k[2]), k[0], k[1], k[2], repr(k[3]), k[4])


def _stabiliser_size(H, D, forest, psi_on):
    sets = {frozenset(V) for V in forest}
    n = 0
    for vm, em in _auts(H):
        if any(D[vm[v]] != D[v] for v in range(len(D))):
            continue
        if psi_on == "forest" and {frozenset(vm[v] for v in V) for V in sets} != sets:
            continue
        n += 1
    return n


# ---------------------------------------------------------------------------
# Forest combinatorics
# ---------------------------------------------------------------------------


class ForestData:
    """Next sets, close and far edges, ranks and regions of a forest on
    ``(G, D)``."""

    def __init__(self, G: MarkedGraph, D, sets):
        self.G = G
        self.D = tuple(D)
        self.sets = tuple(sorted({frozenset(V) for V in sets}, key=lambda V: (len(V), sorted(V))))
        allv = frozenset(G.vertices)
        self.all = allv
        self.nex, self.cu, self.fu = {}, {}, {}
        for V in self.sets:
            N = allv
            for W in self.sets:
                if V < W:
                    N = N & W
            self.nex[V] = N
            self.cu[V] = tuple(sorted(G.edges_between(V, N - V)))
            self.fu[V] = tuple(sorted(G.edges_between(V, allv - N)))
        self.owner = {}
        for V in self.sets:
            for e in self.cu[V]:
                self.owner[e] = V
        self.far = {e: [V for V in self.sets if e in self.fu[V]] for e in range(G.num_edges)}
        self.covers = {
            V: [W for W in self.sets if V < W and not any(V < X < W for X in self.sets)] for V in self.sets
        }
        self.rkF = {}
        for V in self.sets:
            Vc = allv - V
            self.rkF[V] = induced_genus(G, Vc) - 1 - sum(self.D[v] for v in Vc)
        self.rkH = {V: self.rkF[V] - sum(self.rkF[W] for W in self.covers[V]) for V in self.sets}
        self.region = {V: self.nex[V] - V for V in self.sets}
        self.cap = allv
        for V in self.sets:
            self.cap = self.cap & V

    def upper_crossing(self, V):
        """Edges crossing the boundary of some element strictly above ``V``."""
        out = set()
        for W in self.sets:
            if V < W:
                out |= set(self.G.edges_between(W, self.all - W))
        return tuple(sorted(out))

    def next_boundary(self, V):
        N = self.nex[V]
        return tuple(sorted(self.G.edges_between(N, self.all - N)))

    def far_order(self):
        """Elements ordered so that every far edge of an element is close to
        a later one."""
        arcs = {V: set() for V in self.sets}
        for V in self.sets:
            for e in self.fu[V]:
                if e not in self.owner:
                    raise WallCrossError("far edge without a close owner")
                arcs[V].add(self.owner[e])
        order, done = [], set()
        indeg = {V: 0 for V in self.sets}
        for V in self.sets:
            for W in arcs[V]:
                indeg[W] += 1
        ready = [V for V in self.sets if indeg[V] == 0]
        while ready:
            V = ready.pop(0)
            order.append(V)
            for W in sorted(arcs[V], key=self.sets.index):
                indeg[W] -= 1
                if indeg[W] == 0:
                    ready.append(W)
        if len(order) != len(self.sets):
            raise WallCrossError("far/close dependencies are cyclic")
        return order


def coeff_b(V, j, k, rank_F):
    """``b_V`` for a forest given by the keys of ``rank_F`` (``V -> rank F_V``)."""
    V = frozenset(V)
    if V not in rank_F:
        raise WallCrossError("V is not an element of the forest")
    up = sum(j[W] + k[W] + 1 for W in rank_F if V <= W)
    return -binom(k[V] + rank_F[V] + 1 - up, k[V] + 1)


def coeff_alpha(G, D, sets, s, j, ge, printed=False, data=None):
    """The coefficient of ``c_s(F^X_+) prod c_j(H^+_V) prod Psi_e^{g_e}``.

    ``j`` maps forest elements to degrees, ``ge`` lists edge exponents.
    ``printed=True`` evaluates the unreconciled form (global sign
    ``(-1)^{|V•|}``, next-set boundary in place of the upper crossing
    edges, no sign on positive bottoms).
    """
    fd = data if data is not None else ForestData(G, D, sets)
    g, d = G.g, sum(D)
    if s + sum(j[V] for V in fd.sets) + sum(ge) != g - d - G.num_edges:
        raise WallCrossError("degree constraint violated")
    F = fd.sets
    CN = {V: (fd.next_boundary(V) if printed else fd.upper_crossing(V)) for V in F}
    order = fd.far_order()
    topj = {V: sum(fd.rkH[X] - j[X] for X in F if V <= X) for V in F}
    total = 0

    def close_sum(V, a):
        return sum(ge[e] + 1 for e in fd.cu[V]) + sum(a[(e, W)] for e in fd.cu[V] for W in fd.far[e])

    def evaluate(a):
        c = (-1) ** len(F) if printed else 1
        for e in range(G.num_edges):
            for W in fd.far[e]:
                c *= (-1) ** a[(e, W)] * binom(ge[e] + sum(a[(e, W2)] for W2 in fd.far[e] if W2 <= W), a[(e, W)])
                if not c:
                    return 0
        for W in F:
            top = topj[W] - sum(
                ge[e] + 1 + sum(a.get((e, W2), 0) for W2 in F if W2 <= W and e in fd.fu[W2]) for e in CN[W]
            )
            bot = close_sum(W, a) - sum(a[(e, W)] for e in fd.fu[W])
            if bot < 0:
                return 0
            c *= binom(top, bot)
            if not printed and bot > 0:
                c = -c
            if not c:
                return 0
        return c

    def rec(idx, a):
        nonlocal total
        if idx == len(order):
            total += evaluate(a)
            return
        W = order[idx]
        fus = fd.fu[W]
        bound = close_sum(W, a)
        for vals in _bounded_tuples(len(fus), bound):
            for e, x in zip(fus, vals):
                a[(e, W)] = x
            rec(idx + 1, a)
        for e in fus:
            a.pop((e, W), None)

    rec(0, {})
    return total


# ---------------------------------------------------------------------------
# Enumeration shared by the formulas
# ---------------------------------------------------------------------------


@dataclass
class CrossingObject:
    graph: MarkedGraph
    divisor: tuple
    poset: object
    forests: list
    aut: int  # |Aut(G, D)|


def _canonical_divisor(G, D):
    best = None
    for vm, _ in _auts(G):
        E = [0] * len(D)
        for v, x in enumerate(D):
            E[vm[v]] = x
        E = tuple(E)
        if best is None or E < best:
            best = E
    return best


@functools.lru_cache(maxsize=64)
def crossing_data(g, n, d, wall: Wall, max_edges=None):
    """Plus/minus sides of a generic wall point and every plus-stable
    ``(G, D)`` with its extremal poset and full forests."""
    if d >= g:
        raise WallCrossError("the formulas require d < g")
    R = g - d if max_edges is None else max_edges
    phi = generic_point(wall, g, n, d)
    pp, pm = opposite_pair(wall, phi)
    objs = []
    for G in enumerate_stable_graphs(g, n, R):
        reps = sorted({_canonical_divisor(G, pd.D) for pd in stable_divisors(pp, G)})
        for D in reps:
            P = ext_poset(G, Pseudodivisor.line_bundle(D), pp, pm)
            forests = [F.sets for F in full_forests(P)] if P.elements else []
            aut = sum(1 for vm, _ in _auts(G) if all(D[vm[v]] == D[v] for v in range(len(D))))
            objs.append(CrossingObject(G, D, P, forests, aut))
    return pp, pm, tuple(objs)


def _orbit_reps(G, D, forests):
    """One labelled forest per ``Aut(G, D)``-orbit with its stabiliser size."""
    seen = {}
    for F in forests:
        sets = frozenset(frozenset(V) for V in F)
        best = None
        for vm, _ in _auts(G):
            if any(D[vm[v]] != D[v] for v in range(len(D))):
                continue
            img = tuple(sorted(tuple(sorted(vm[v] for v in V)) for V in sets))
            if best is None or img < best:
                best = img
        seen.setdefault(best, F)
    out = []
    for F in seen.values():
        out.append((F, _stabiliser_size(G, D, [tuple(sorted(V)) for V in F], "forest")))
    return out


# ---------------------------------------------------------------------------
# The formula on the resolution
# ---------------------------------------------------------------------------


def main_wallcross_resolved(g, n, d, wall: Wall, max_edges=None) -> StrataClassExpr:
    """Degree ``g - d`` part of the Chern class difference on the
    resolution, as a sum over exceptional objects ``(G, D, V•)``."""
    N = g - d
    pp, pm, objs = crossing_data(g, n, d, wall, max_edges)
    expr = StrataClassExpr(g, n, d, N, wall, psi_on="forest")
    for ob in objs:
        if ob.graph.num_edges == 0:
            continue
        for F, aut in _orbit_reps(ob.graph, ob.divisor, ob.forests):
            fd = ForestData(ob.graph, ob.divisor, F)
            sets = fd.sets
            budget = N - len(sets)
            m = len(sets)
            for tup in _compositions(budget, 1 + 2 * m) if budget >= 0 else ():
                s = tup[0]
                j = dict(zip(sets, tup[1 : 1 + m]))
                k = dict(zip(sets, tup[1 + m :]))
                c = -1
                for V in sets:
                    c *= coeff_b(V, j, k, fd.rkF)
                    if not c:
                        break
                if not c:
                    continue
                chern = []
                if s:
                    chern.append(ChernFactor("FX", (), s))
                for V in sets:
                    if j[V]:
                        chern.append(ChernFactor("HV", tuple(sorted(V)), j[V]))
                psi = [(tuple(sorted(V)), k[V]) for V in sets if k[V]]
                expr.add(ob.graph, ob.divisor, [tuple(sorted(V)) for V in sets], chern, psi, Fraction(c, aut), aut)
    return expr


# ---------------------------------------------------------------------------
# The formula on the plus-side compactified Jacobian
# ---------------------------------------------------------------------------


def wallcross_on_jbar(g, n, d, wall: Wall, max_edges=None, printed=False) -> StrataClassExpr:
    """Difference of the Brill--Noether classes on the plus side as a sum
    over ``(G, D)`` with full forests, psi exponents recorded per edge."""
    N = g - d
    pp, pm, objs = crossing_data(g, n, d, wall, max_edges)
    expr = StrataClassExpr(g, n, d, N, wall, psi_on="edges")
    for ob in objs:
        G, D = ob.graph, ob.divisor
        budget = N - G.num_edges
        if budget < 0 or G.num_edges == 0:
            continue
        for F in ob.forests:
            fd = ForestData(G, D, F)
            sets = fd.sets
            m = len(sets)
            for tup in _compositions(budget, 1 + m + G.num_edges):
                s = tup[0]
                j = dict(zip(sets, tup[1 : 1 + m]))
                ge = list(tup[1 + m :])
                a = coeff_alpha(G, D, sets, s, j, ge, printed=printed, data=fd)
                if not a:
                    continue
                chern = []
                if s:
                    chern.append(ChernFactor("FXplus", (), s))
                for V in sets:
                    if j[V]:
                        chern.append(ChernFactor("HVplus", tuple(sorted(V)), j[V]))
                psi = [(e, x) for e, x in enumerate(ge) if x]
                expr.add(G, D, [tuple(sorted(V)) for V in sets], chern, psi, Fraction(-a, ob.aut), ob.aut)
    return expr


# ---------------------------------------------------------------------------
# Disjoint centres
# ---------------------------------------------------------------------------


def complete_homogeneous(lam, t):
    """Exponent vectors of ``h_lam`` in ``t`` variables (all coefficient 1)."""
    return list(_compositions(lam, t))


def is_disjoint_wall(g, n, d, wall: Wall, max_edges=None) -> bool:
    """Whether every exceptional object is a vine curve with a singleton
    forest, i.e. the extremal vine strata are pairwise disjoint."""
    if not (wall.divisorial or wall.is_good(n)):
        return False
    _, _, objs = crossing_data(g, n, d, wall, max_edges)
    for ob in objs:
        for F in ob.forests:
            if ob.graph.num_edges and (len(F) != 1 or ob.graph.num_vertices != 2):
                return False
    return True


def disjoint_wallcross(g, n, d, wall: Wall, max_edges=None, force=False) -> StrataClassExpr:
    """The simplified formula when the extremal vine strata are disjoint.

    ``force=True`` evaluates the vine-curve sum even when the centres meet
    (it then omits the contributions of their intersections).
    """
    if not force and not is_disjoint_wall(g, n, d, wall, max_edges):
        raise WallCrossError("centres are not disjoint: use general formula")
    N = g - d
    _, _, objs = crossing_data(g, n, d, wall, max_edges)
    expr = StrataClassExpr(g, n, d, N, wall, psi_on="edges")
    for ob in objs:
        G, D = ob.graph, ob.divisor
        if G.num_edges == 0 or not ob.forests or G.num_vertices != 2:
            continue
        t = G.num_edges
        v1 = G.leg_vertex(1)
        y = 1 - v1
        gY, dY = G.genera[y], D[y]
        V = (v1,)
        for s, j, lam in _compositions(N - t, 3) if N >= t else ():
            c = Fraction(binom(gY - dY - j - 1, N - j - s), math.factorial(t))
            if not c:
                continue
            chern = []
            if s:
                chern.append(ChernFactor("FXplus", (), s))
            if j:
                chern.append(ChernFactor("HVplus", V, j))
            for mono in complete_homogeneous(lam, t):
                psi = [(e, x) for e, x in enumerate(mono) if x]
                expr.add(G, D, [V], chern, psi, c, ob.aut)
    return expr


# ---------------------------------------------------------------------------
# Pushforward from the resolution
# ---------------------------------------------------------------------------


def push_polynomial(fd: ForestData, gV: dict) -> dict:
    """The polynomial ``c_{(G,D,V•)}`` in the edge psi classes.

    ``gV`` maps each forest element to an exponent ``>= -1`` (``-1`` marks
    elements not pulled back).  Returns ``edge exponent tuple -> coeff``.
    """
    G = fd.G
    F = fd.sets
    order = list(reversed(fd.far_order()))  # owners of far edges come first
    out = defaultdict(int)

    def finish(a, gek):
        coeff = 1
        expo = []
        for e in range(G.num_edges):
            S = fd.far[e]
            for V in S:
                coeff *= (-1) ** a[(e, V)] * binom(gek[e] - sum(a[(e, W)] for W in S if V < W), a[(e, V)])
                if not coeff:
                    return
            expo.append(gek[e] - sum(a[(e, V)] for V in S))
        if min(expo, default=0) < 0:
            raise WallCrossError("negative edge exponent in pushforward")
        out[tuple(expo)] += coeff

    def rec(idx, a, gek):
        if idx == len(order):
            finish(a, gek)
            return
        V = order[idx]
        fus = fd.fu[V]
        ranges = [range(gek[e] + 1) for e in fus]
        for vals in itertools.product(*ranges):
            for e, x in zip(fus, vals):
                a[(e, V)] = x
            target = gV[V] + 1 + sum(vals) - len(fd.cu[V])
            if target >= 0:
                for comp in _compositions(target, len(fd.cu[V])):
                    for e, x in zip(fd.cu[V], comp):
                        gek[e] = x
                    rec(idx + 1, a, gek)
                    for e in fd.cu[V]:
                        gek.pop(e, None)
        for e in fus:
            a.pop((e, V), None)

    rec(0, {}, {})
    return {k: v for k, v in out.items() if v}


def _contract_forest(G, D, sets, U):
    """Contract the edges crossing no element of ``U``; returns the graph,
    divisor, vertex map and images of ``U``."""
    cross = set()
    for V in U:
        cross |= set(G.edges_between(V, frozenset(G.vertices) - V))
    C = [e for e in range(G.num_edges) if e not in cross]
    K, vmap, emap = G.contract(C)
    DK = [0] * K.num_vertices
    for v, w in enumerate(vmap):
        DK[w] += D[v]
    images = {V: frozenset(vmap[v] for v in V) for V in U}
    return K, tuple(DK), vmap, images


def pushforward_psi_monomial(g, n, d, wall, graph, divisor, forest, gV, max_edges=None) -> dict:
    """Pushforward of ``f_*(prod Psi_V^{g_V}) / |Aut|`` from the exceptional
    object ``(graph, divisor, forest)`` to the plus side.

    Returns ``(canonical graph, divisor, edge exponents) -> coefficient``.
    """
    _, _, objs = crossing_data(g, n, d, wall, max_edges)
    target = _forest_canonical(graph, divisor, [frozenset(V) for V in forest])
    gV = {frozenset(V): x for V, x in gV.items()}
    out = defaultdict(Fraction)
    for ob in objs:
        G, D = ob.graph, ob.divisor
        for F in ob.forests:
            fd = ForestData(G, D, F)
            for r in range(1, len(fd.sets) + 1):
                for U in itertools.combinations(fd.sets, r):
                    K, DK, vmap, images = _contract_forest(G, D, fd.sets, U)
                    isos = _isos_to(K, DK, images, target)
                    if not isos:
                        continue
                    acc = defaultdict(Fraction)
                    for phi in isos:
                        gg = {W: -1 for W in fd.sets}
                        for V in U:
                            gg[V] = gV[phi[V]]
                        for ex, c in push_polynomial(fd, gg).items():
                            acc[ex] += c
                    for ex, c in acc.items():
                        key = _edge_monomial_key(G, D, ex)
                        out[key] += Fraction(c, len(isos) * ob.aut)
    return {k: v for k, v in out.items() if v}


def _edge_monomial_key(G, D, ex):
    H, enc = canonical_term(G, D, (), (), [(e, x) for e, x in enumerate(ex) if x], "edges")
    return (repr(H.structure()), enc[0], enc[3])


def _forest_canonical(G, D, sets):
    """Canonical labelling data of ``(G, D, sets)``: ``(H, D', sets')``."""
    H, vperm, _ = canonical_form(G)
    Dn = [0] * len(D)
    for v, x in enumerate(D):
        Dn[vperm[v]] = x
    return H, tuple(Dn), [frozenset(vperm[v] for v in V) for V in sets]


def _isos_to(K, DK, images, target):
    """Vertex-level isomorphisms from the contracted object onto the
    target's forest, as maps ``U element -> target element`` (one per
    graph isomorphism)."""
    H, DH, setsH = target
    H2, vperm, _ = canonical_form(K)
    if H2.structure() != H.structure():
        return []
    Dn = [0] * len(DK)
    for v, x in enumerate(DK):
        Dn[vperm[v]] = x
    setsH = set(setsH)
    out = []
    for vm, _ in _auts(H):
        if any(DH[vm[v]] != Dn[v] for v in range(len(Dn))):
            continue
        mp = {}
        ok = True
        for V, img in images.items():
            W = frozenset(vm[vperm[v]] for v in img)
            if W not in setsH:
                ok = False
                break
            mp[V] = W
        if ok and len(set(mp.values())) == len(setsH) == len(mp):
            out.append(mp)
    return out


def push_resolved(resolved: StrataClassExpr, max_edges=None) -> StrataClassExpr:
    """Push the resolution-side expression to the plus side term by term."""
    g, n, d, wall = resolved.g, resolved.n, resolved.d, resolved.wall
    N = resolved.degree
    _, _, objs = crossing_data(g, n, d, wall, max_edges)
    groups = defaultdict(list)
    for t in resolved.terms:
        groups[(repr(t.graph.structure()), t.divisor, t.forest)].append(t)
    out = StrataClassExpr(g, n, d, N, wall, psi_on="edges")
    for ob in objs:
        G, D = ob.graph, ob.divisor
        if G.num_edges > N:
            continue
        for F in ob.forests:
            fd = ForestData(G, D, F)
            for r in range(1, len(fd.sets) + 1):
                for U in itertools.combinations(fd.sets, r):
                    K, DK, vmap, images = _contract_forest(G, D, fd.sets, U)
                    H2, vperm, _ = canonical_form(K)
                    Dn = [0] * len(DK)
                    for v, x in enumerate(DK):
                        Dn[vperm[v]] = x
                    for key, terms in groups.items():
                        if key[0] != repr(H2.structure()):
                            continue
                        t0 = terms[0]
                        target = (t0.graph, t0.divisor, [frozenset(V) for V in t0.forest])
                        isos = _isos_to(K, DK, images, target)
                        if not isos:
                            continue
                        for t in terms:
                            _push_term(out, fd, U, t, isos, ob.aut)
    return out


def _push_term(out, fd: ForestData, U, t: StrataTerm, isos, aut_plus):
    G, D = fd.G, fd.D
    k_of = {frozenset(V): x for V, x in t.psi}
    s = 0
    j_of = {}
    for c in t.chern:
        if c.kind == "FX":
            s = c.degree
        elif c.kind == "HV":
            j_of[frozenset(c.V)] = c.degree
        else:
            raise WallCrossError(f"unexpected symbol {c.kind} on the resolution")
    capU = fd.all
    for V in U:
        capU = capU & V
    pieces_X = [W for W in fd.sets if fd.region[W] and fd.region[W] <= capU]
    pieces = {}
    for V in U:
        N = fd.all
        for W in U:
            if V < W:
                N = N & W
        reg = N - V
        pieces[V] = [W for W in fd.sets if W != V and fd.region[W] and fd.region[W] <= reg]
    # the summed term stands for its whole orbit, so every isomorphism onto
    # the exceptional object contributes with the full weight
    weight = t.coeff / aut_plus
    for phi in isos:
        gg = {W: -1 for W in fd.sets}
        groups = [(s, ["X"] + pieces_X)]
        for V in U:
            W = phi[V]
            gg[V] = k_of.get(W, 0)
            groups.append((j_of.get(W, 0), [V] + pieces[V]))
        poly = push_polynomial(fd, gg)
        if not poly:
            continue
        for split in _splits(groups):
            chern = []
            if split.get("X"):
                chern.append(ChernFactor("FXplus", (), split["X"]))
            for W in fd.sets:
                if split.get(W):
                    chern.append(ChernFactor("HVplus", tuple(sorted(W)), split[W]))
            for ex, c in poly.items():
                psi = [(e, x) for e, x in enumerate(ex) if x]
                out.add(G, D, [tuple(sorted(W)) for W in fd.sets], chern, psi, weight * c)


def _splits(groups):
    if not groups:
        yield {}
        return
    tot, names = groups[0]
    for comp in _compositions(tot, len(names)):
        for rest in _splits(groups[1:]):
            d = dict(rest)
            for nm, x in zip(names, comp):
                d[nm] = d.get(nm, 0) + x
            yield d


# ---------------------------------------------------------------------------
# Lemmas used in the derivation
# ---------------------------------------------------------------------------


def _is_chain(S, less):
    S = list(S)
    return all(less(a, b) or less(b, a) for a, b in itertools.combinations(S, 2))


def sum_tree(elements, less, S):
    """Closed form of ``sum over chains l ⊇ S of (-1)^{|S|+|l|} x_{max l}``.

    ``less(a, b)`` is the strict order of a forest whose down-sets are
    chains.  Returns ``element -> integer coefficient``.
    """
    S = list(S)
    if not _is_chain(S, less):
        raise WallCrossError("S is not a chain")
    if not S:
        mins = [V for V in elements if not any(less(W, V) for W in elements)]
        return {V: -1 for V in mins}
    top = next(V for V in S if all(V == W or less(W, V) for W in S))
    for V in elements:
        if V not in S and less(V, top) and _is_chain(S + [V], less):
            return {}
    out = {top: 1}
    for V in elements:
        if less(top, V) and not any(less(top, X) and less(X, V) for X in elements):
            out[V] = out.get(V, 0) - 1
    return out


def twist_total_chern(rank, chern, ell, j):
    """``c_j(F ⊗ I)`` from the Chern classes ``chern = (c_0, c_1, ...)`` of
    ``F`` (of the given rank) and ``ell = c_1(I)``."""
    if j < 0:
        raise WallCrossError("negative degree")
    total = 0
    for i in range(j + 1):
        ci = chern[i] if i < len(chern) else 0
        b = binom(rank - i, j - i)
        if b:
            total = total + b * ci * ell ** (j - i)
    return total


def inclusion_exclusion_expand(components, strata_of):
    """Expand the restriction to a simple normal crossing divisor.

    ``components`` is a sequence of names; ``strata_of(frozenset)`` returns
    the strata (connected pieces) of the intersection of those components,
    empty if it is empty.  The expansion peels one component at a time:
    ``L|_{D_1 + R} = L|_{D_1} + L|_R - L|_{D_1 ∩ R}``.
    """
    def expand(sets):
        # sets: list of frozensets of component names (each an intersection)
        if not sets:
            return defaultdict(int)
        first, rest = sets[0], sets[1:]
        res = defaultdict(int)
        res[first] += 1
        for k, v in expand(rest).items():
            res[k] += v
        for k, v in expand([first | r for r in rest]).items():
            res[k] -= v
        return res

    raw = expand([frozenset([c]) for c in components])
    out = defaultdict(int)
    for I, c in raw.items():
        for st in strata_of(I):
            out[st] += c
    return {k: v for k, v in out.items() if v}


@dataclass(frozen=True)
class PsiRule:
    """``Psi_{(G,D,e)} = f^* Psi_{G,e} + Delta_{(G,D,e)}``."""

    edge: int

    @property
    def lhs(self):
        return ("PsiJ", self.edge)

    @property
    def rhs(self):
        return (("PsiM", self.edge), ("Delta", self.edge))

    def apply(self, monomial: dict) -> dict:
        """Expand ``PsiJ_e^k`` in a monomial ``symbol -> exponent``."""
        k = monomial.get(self.lhs, 0)
        rest = {s: x for s, x in monomial.items() if s != self.lhs}
        out = {}
        for a in range(k + 1):
            m = dict(rest)
            if a:
                m[("PsiM", self.edge)] = m.get(("PsiM", self.edge), 0) + a
            if k - a:
                m[("Delta", self.edge)] = m.get(("Delta", self.edge), 0) + k - a
            key = tuple(sorted(m.items()))
            out[key] = out.get(key, 0) + binom(k, a)
        return out

    def reverse(self, poly: dict) -> dict:
        """Substitute ``PsiM_e = PsiJ_e - Delta_e`` back."""
        out = defaultdict(int)
        for key, c in poly.items():
            m = dict(key)
            a = m.pop(("PsiM", self.edge), 0)
            for b in range(a + 1):
                mm = dict(m)
                if b:
                    mm[self.lhs] = mm.get(self.lhs, 0) + b
                dl = a - b
                if dl:
                    mm[("Delta", self.edge)] = mm.get(("Delta", self.edge), 0) + dl
                out[tuple(sorted(mm.items()))] += c * binom(a, b) * (-1) ** dl
        return {k: v for k, v in out.items() if v}

    def to_json(self):
        return {"lhs": list(self.lhs), "rhs": [list(x) for x in self.rhs]}


def psi_comparison(G: MarkedGraph, D, e: int) -> PsiRule:
    """Rewrite rule relating the Jacobian psi class of edge ``e`` to the
    pulled-back psi class of the curve stratum."""
    if not 0 <= e < G.num_edges:
        raise WallCrossError("edge out of range")
    return PsiRule(e)
