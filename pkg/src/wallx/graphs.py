"""Stable marked dual graphs: representation, canonical forms, enumeration
and the morphism calculus (edge contraction followed by an isomorphism).

A graph is stored with plain integer vertex indices and an ordered edge
tuple, each edge being a pair ``(u, v)`` with ``u <= v`` (``u == v`` is a
loop).  Every edge has two half-edges, numbered 0 (at ``u``) and 1 (at
``v``); a morphism records where each surviving half-edge goes, which is
what distinguishes e.g. the two ways of flipping a loop.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "MarkedGraph",
    "GraphMorphism",
    "VineTriple",
    "GraphError",
    "canonical_form",
    "enumerate_stable_graphs",
    "contractions_to",
    "automorphisms",
    "isomorphisms",
    "subdivide",
    "induced_genus",
    "vine_triples",
    "trivial_graph",
]


class GraphError(ValueError):
    """Raised on malformed graphs or invalid graph operations."""


def _dsu_find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


class MarkedGraph:
    """An n-pointed genus-g graph with a genus function and legs.

    Parameters
    ----------
    genera : sequence of int
        Genus of each vertex.
    legs : sequence of iterables of int
        Markings carried by each vertex (markings are ``1..n``).
    edges : sequence of pairs
        Edge endpoints; multi-edges and loops are allowed.
    n : int, optional
        Number of markings; inferred from ``legs`` when omitted.
    check_stable : bool
        Reject graphs violating vertex stability.  Subdivisions turn this
        off for their exceptional vertices.
    """

    __slots__ = ("genera", "legs", "edges", "n", "_canon", "_hash", "_struct")

    def __init__(self, genera, legs, edges, n=None, check_stable=True):
        self.genera = tuple(int(x) for x in genera)
        self.legs = tuple(frozenset(int(j) for j in L) for L in legs)
        if len(self.legs) != len(self.genera):
            raise GraphError("legs and genera must have the same length")
        es = []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u > v:
                u, v = v, u
            es.append((u, v))
        self.edges = tuple(es)
        allm = [j for L in self.legs for j in L]
        if n is None:
            n = max(allm) if allm else 0
        self.n = int(n)
        self._canon = None
        self._hash = None
        self._struct = None
        self._validate(check_stable)

    # -- validation -----------------------------------------------------

    def _validate(self, check_stable):
        nv = len(self.genera)
        if nv == 0:
            raise GraphError("graph has no vertices")
        if any(x < 0 for x in self.genera):
            raise GraphError("negative vertex genus")
        for u, v in self.edges:
            if not (0 <= u < nv and 0 <= v < nv):
                raise GraphError(f"edge ({u},{v}) out of range")
        allm = sorted(j for L in self.legs for j in L)
        if allm != list(range(1, self.n + 1)):
            raise GraphError("every marking 1..n must appear exactly once")
        if not self.is_connected_subset(range(nv)):
            raise GraphError("graph is not connected")
        if check_stable:
            for v in range(nv):
                if not self.vertex_is_stable(v):
                    raise GraphError(f"vertex {v} is not stable")

    # -- basic data -----------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self.genera)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def b1(self) -> int:
        return self.num_edges - self.num_vertices + 1

    @property
    def g(self) -> int:
        return sum(self.genera) + self.b1

    @property
    def vertices(self):
        return range(len(self.genera))

    def valence(self, v) -> int:
        """Number of half-edges at ``v`` (a loop counts twice)."""
        return sum((a == v) + (b == v) for a, b in self.edges)

    def vertex_is_stable(self, v) -> bool:
        return 2 * self.genera[v] - 2 + self.valence(v) + len(self.legs[v]) > 0

    def is_stable(self) -> bool:
        return all(self.vertex_is_stable(v) for v in self.vertices)

    def leg_vertex(self, j) -> int:
        for v, L in enumerate(self.legs):
            if j in L:
                return v
        raise GraphError(f"no marking {j}")

    def loops(self):
        return [i for i, (u, v) in enumerate(self.edges) if u == v]

    def legs_of(self, V) -> frozenset:
        out = set()
        for v in V:
            out |= self.legs[v]
        return frozenset(out)

    def complement(self, V) -> frozenset:
        V = set(V)
        return frozenset(v for v in self.vertices if v not in V)

    def edges_between(self, A, B) -> tuple:
        """Indices of edges joining ``A`` to ``B``.

        A loop at ``v`` is included only when ``v`` lies in both sets.
        """
        A, B = set(A), set(B)
        out = []
        for i, (u, v) in enumerate(self.edges):
            if u == v:
                if u in A and u in B:
                    out.append(i)
            elif (u in A and v in B) or (v in A and u in B):
                out.append(i)
        return tuple(out)

    def boundary_edges(self, V) -> tuple:
        """E(V, V^c)."""
        return self.edges_between(V, self.complement(V))

    def internal_edges(self, V) -> tuple:
        """E(V, V), loops included."""
        V = set(V)
        return tuple(i for i, (u, v) in enumerate(self.edges) if u in V and v in V)

    def is_connected_subset(self, V) -> bool:
        V = set(V)
        if not V:
            return False
        start = next(iter(V))
        seen = {start}
        stack = [start]
        adj = self.adjacency()
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in V and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen == V

    def adjacency(self):
        adj = [set() for _ in self.vertices]
        for u, v in self.edges:
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        return adj

    def components(self, V) -> list:
        """Connected components of the induced subgraph on ``V``."""
        V = set(V)
        adj = self.adjacency()
        comps = []
        seen = set()
        for s in sorted(V):
            if s in seen:
                continue
            comp = {s}
            stack = [s]
            seen.add(s)
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y in V and y not in seen:
                        seen.add(y)
                        comp.add(y)
                        stack.append(y)
            comps.append(frozenset(comp))
        return comps

    def multiplicity_matrix(self):
        nv = self.num_vertices
        M = [[0] * nv for _ in range(nv)]
        for u, v in self.edges:
            M[u][v] += 1
            if u != v:
                M[v][u] += 1
        return M

    # -- structural identity ---------------------------------------------

    def structure(self):
        """Labelled structure: equal iff the graphs are equal as labelled objects."""
        if self._struct is None:
            self._struct = (
                self.n,
                self.genera,
                tuple(tuple(sorted(L)) for L in self.legs),
                tuple(sorted(self.edges)),
            )
        return self._struct

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, MarkedGraph) and self.structure() == other.structure()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.structure())
        return self._hash

    def __repr__(self):
        vs = ", ".join(
            f"{gv}" + (f"{sorted(L)}" if L else "") for gv, L in zip(self.genera, self.legs)
        )
        return f"MarkedGraph(g={self.g}, n={self.n}, V=[{vs}], E={list(self.edges)})"

    # -- canonical form ---------------------------------------------------

    def canonical(self) -> "MarkedGraph":
        """The canonical representative of the isomorphism class."""
        if self._canon is None:
            cg, _, _ = canonical_form(self)
            self._canon = cg
        return self._canon

    def is_isomorphic(self, other) -> bool:
        return self.canonical() == other.canonical()

    # -- operations -------------------------------------------------------

    def contract(self, C):
        """Contract the edge set ``C``.

        Returns ``(H, vertex_map, edge_map)`` where ``edge_map[i]`` is
        ``None`` for contracted edges and ``(j, flip)`` otherwise.
        """
        C = set(C)
        nv = self.num_vertices
        parent = list(range(nv))
        for i in C:
            u, v = self.edges[i]
            ru, rv = _dsu_find(parent, u), _dsu_find(parent, v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
        roots = sorted({_dsu_find(parent, x) for x in range(nv)})
        newidx = {r: k for k, r in enumerate(roots)}
        vmap = tuple(newidx[_dsu_find(parent, x)] for x in range(nv))
        k = len(roots)
        genera = [0] * k
        legs = [set() for _ in range(k)]
        counts_v = [0] * k
        counts_e = [0] * k
        for x in range(nv):
            genera[vmap[x]] += self.genera[x]
            legs[vmap[x]] |= self.legs[x]
            counts_v[vmap[x]] += 1
        for i in C:
            counts_e[vmap[self.edges[i][0]]] += 1
        for w in range(k):
            genera[w] += counts_e[w] - counts_v[w] + 1
        new_edges = []
        emap = []
        for i, (u, v) in enumerate(self.edges):
            if i in C:
                emap.append(None)
                continue
            a, b = vmap[u], vmap[v]
            flip = 0
            if a > b:
                a, b = b, a
                flip = 1
            emap.append((len(new_edges), flip))
            new_edges.append((a, b))
        H = MarkedGraph(genera, legs, new_edges, n=self.n, check_stable=False)
        return H, vmap, tuple(emap)

    def relabel(self, perm):
        """Graph with vertex ``v`` renamed ``perm[v]``; edges keep their order."""
        nv = self.num_vertices
        genera = [0] * nv
        legs = [None] * nv
        for v in range(nv):
            genera[perm[v]] = self.genera[v]
            legs[perm[v]] = self.legs[v]
        edges = [(perm[u], perm[v]) for u, v in self.edges]
        return MarkedGraph(genera, legs, edges, n=self.n, check_stable=False)

    def to_json(self) -> dict:
        return {
            "genus_total": self.g,
            "n": self.n,
            "vertices": [
                {"genus": gv, "legs": sorted(L)} for gv, L in zip(self.genera, self.legs)
            ],
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_json(cls, data, canonicalize=True) -> "MarkedGraph":
        if isinstance(data, str):
            data = json.loads(data)
        G = cls(
            [v["genus"] for v in data["vertices"]],
            [v["legs"] for v in data["vertices"]],
            [tuple(e) for e in data["edges"]],
            n=data["n"],
        )
        if "genus_total" in data and data["genus_total"] != G.g:
            raise GraphError("genus_total does not match the graph")
        return G.canonical() if canonicalize else G


def trivial_graph(g, n) -> MarkedGraph:
    return MarkedGraph([g], [range(1, n + 1)], [], n=n)


# ---------------------------------------------------------------------------
# Morphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GraphMorphism:
    """A contraction followed by an isomorphism.

    ``vertex_map[v]`` is the image vertex; ``edge_map[i]`` is ``None`` when
    source edge ``i`` is contracted, else ``(j, flip)`` meaning half-edge
    ``h`` of edge ``i`` goes to half-edge ``h ^ flip`` of target edge ``j``.
    """

    source: MarkedGraph
    target: MarkedGraph
    vertex_map: tuple
    edge_map: tuple

    @property
    def contracted_edges(self) -> frozenset:
        return frozenset(i for i, x in enumerate(self.edge_map) if x is None)

    @property
    def core(self):
        """Hashable data identifying the morphism between fixed endpoints."""
        return (self.vertex_map, self.edge_map)

    def then(self, other: "GraphMorphism") -> "GraphMorphism":
        """Composite ``other o self``."""
        vm = tuple(other.vertex_map[x] for x in self.vertex_map)
        em = []
        for x in self.edge_map:
            if x is None:
                em.append(None)
                continue
            j, fl = x
            y = other.edge_map[j]
            em.append(None if y is None else (y[0], fl ^ y[1]))
        return GraphMorphism(self.source, other.target, vm, tuple(em))

    def edge_pullback(self) -> dict:
        """Target edge index -> source edge index."""
        return {x[0]: i for i, x in enumerate(self.edge_map) if x is not None}

    def preimage(self, W) -> frozenset:
        W = set(W)
        return frozenset(v for v, w in enumerate(self.vertex_map) if w in W)

    def __eq__(self, other):
        return (
            isinstance(other, GraphMorphism)
            and self.source == other.source
            and self.target == other.target
            and self.core == other.core
        )

    def __hash__(self):
        return hash(self.core)


def _refine(G: MarkedGraph, colors):
    """Colour refinement by neighbour multisets; returns integer colours."""
    M = G.multiplicity_matrix()
    nv = G.num_vertices
    cur = list(colors)
    while True:
        sig = []
        for v in range(nv):
            nb = tuple(sorted((cur[w], M[v][w]) for w in range(nv) if w != v and M[v][w]))
            sig.append((cur[v], nb))
        order = sorted(set(sig))
        idx = {s: k for k, s in enumerate(order)}
        new = [idx[s] for s in sig]
        if len(set(new)) == len(set(cur)):
            return new
        cur = new


def _initial_colors(G: MarkedGraph, extra=None):
    M = G.multiplicity_matrix()
    raw = []
    for v in G.vertices:
        raw.append(
            (
                G.genera[v],
                tuple(sorted(G.legs[v])),
                M[v][v],
                G.valence(v),
                None if extra is None else extra[v],
            )
        )
    order = sorted(set(raw), key=repr)
    idx = {s: k for k, s in enumerate(order)}
    return [idx[s] for s in raw], raw


def _encode(G: MarkedGraph, order, raw):
    """Encoding of G under the vertex ordering ``order`` (new -> old)."""
    pos = {old: new for new, old in enumerate(order)}
    labels = tuple(raw[old] for old in order)
    edges = tuple(sorted(tuple(sorted((pos[u], pos[v]))) for u, v in G.edges))
    return (repr(labels), edges)


def _leaf_orders(G: MarkedGraph, colors):
    """Individualisation-refinement search tree leaves (vertex orderings)."""
    colors = _refine(G, colors)
    cells = {}
    for v, c in enumerate(colors):
        cells.setdefault(c, []).append(v)
    if all(len(c) == 1 for c in cells.values()):
        yield [cells[c][0] for c in sorted(cells)]
        return
    target = min((c for c in cells if len(cells[c]) > 1), key=lambda c: (len(cells[c]), c))
    for v in cells[target]:
        # individualise v: give it a colour strictly below the rest of its cell
        newc = [2 * c for c in colors]
        for u in cells[target]:
            if u != v:
                newc[u] += 1
        yield from _leaf_orders(G, newc)


def canonical_form(G: MarkedGraph, extra=None):
    """Canonical labelling of ``G``.

    ``extra`` optionally gives an additional hashable colour per vertex
    (used for divisors).

    Returns ``(H, vperm, eperm)`` with ``H`` the canonical graph, ``vperm[v]``
    the new index of vertex ``v`` and ``eperm[i]`` the new index of edge
    ``i``.  Edges of ``H`` are sorted.
    """
    colors, raw = _initial_colors(G, extra)
    best = None
    best_order = None
    for order in _leaf_orders(G, colors):
        enc = _encode(G, order, raw)
        if best is None or enc < best:
            best = enc
            best_order = order
    vperm = [0] * G.num_vertices
    for new, old in enumerate(best_order):
        vperm[old] = new
    relabelled = [
        (tuple(sorted((vperm[u], vperm[v]))), i) for i, (u, v) in enumerate(G.edges)
    ]
    relabelled.sort()
    eperm = [0] * G.num_edges
    for new, (_, old) in enumerate(relabelled):
        eperm[old] = new
    genera = [0] * G.num_vertices
    legs = [None] * G.num_vertices
    for v in G.vertices:
        genera[vperm[v]] = G.genera[v]
        legs[vperm[v]] = G.legs[v]
    H = MarkedGraph(genera, legs, [e for e, _ in relabelled], n=G.n, check_stable=False)
    H._canon = H
    return H, tuple(vperm), tuple(eperm)


def _vertex_bijections(A: MarkedGraph, B: MarkedGraph, colA, colB):
    """All vertex bijections A -> B preserving colours and multiplicities."""
    nv = A.num_vertices
    if nv != B.num_vertices:
        return
    MA, MB = A.multiplicity_matrix(), B.multiplicity_matrix()
    order = sorted(range(nv), key=lambda v: (sum(1 for c in colA if c == colA[v]), v))
    image = [None] * nv
    used = [False] * nv

    def rec(k):
        if k == nv:
            yield tuple(image)
            return
        v = order[k]
        for w in range(nv):
            if used[w] or colB[w] != colA[v]:
                continue
            ok = MA[v][v] == MB[w][w]
            if ok:
                for u in order[:k]:
                    if MA[v][u] != MB[w][image[u]]:
                        ok = False
                        break
            if not ok:
                continue
            image[v] = w
            used[w] = True
            yield from rec(k + 1)
            used[w] = False
            image[v] = None

    yield from rec(0)


def _edge_bijections(A: MarkedGraph, B: MarkedGraph, vmap):
    """All half-edge-level edge bijections compatible with ``vmap``."""
    groupsA = {}
    for i, (u, v) in enumerate(A.edges):
        groupsA.setdefault(tuple(sorted((vmap[u], vmap[v]))), []).append(i)
    groupsB = {}
    for j, e in enumerate(B.edges):
        groupsB.setdefault(e, []).append(j)
    choices = []
    for key, ia in sorted(groupsA.items()):
        jb = groupsB.get(key, [])
        if len(jb) != len(ia):
            return
        per_group = []
        for perm in itertools.permutations(jb):
            if key[0] == key[1]:
                for flips in itertools.product((0, 1), repeat=len(ia)):
                    per_group.append(tuple((i, (j, f)) for i, j, f in zip(ia, perm, flips)))
            else:
                assign = []
                for i, j in zip(ia, perm):
                    u, _ = A.edges[i]
                    f = 0 if vmap[u] == B.edges[j][0] else 1
                    assign.append((i, (j, f)))
                per_group.append(tuple(assign))
        choices.append(per_group)
    for combo in itertools.product(*choices):
        em = [None] * A.num_edges
        for part in combo:
            for i, x in part:
                em[i] = x
        yield tuple(em)


def isomorphisms(A: MarkedGraph, B: MarkedGraph, extraA=None, extraB=None):
    """All isomorphisms ``A -> B`` (as :class:`GraphMorphism`)."""
    if A.num_vertices != B.num_vertices or A.num_edges != B.num_edges or A.n != B.n:
        return []
    ca, rawA = _initial_colors(A, extraA)
    cb, rawB = _initial_colors(B, extraB)
    # colours must be comparable across graphs: use the raw invariants
    keyA = [repr(r) for r in rawA]
    keyB = [repr(r) for r in rawB]
    out = []
    for vmap in _vertex_bijections(A, B, keyA, keyB):
        for em in _edge_bijections(A, B, vmap):
            out.append(GraphMorphism(A, B, vmap, em))
    return out


def automorphisms(G: MarkedGraph, extra=None):
    """The full automorphism group of ``G`` (vertex and half-edge level)."""
    return isomorphisms(G, G, extra, extra)


@functools.lru_cache(maxsize=None)
def _contractions_of(G: MarkedGraph, k):
    """``G.contract(C)`` for every ``k``-subset ``C`` of edges."""
    return tuple(G.contract(C) for C in itertools.combinations(range(G.num_edges), k))


def contractions_to(G: MarkedGraph, H: MarkedGraph, extraG=None, extraH=None):
    """All morphisms ``G -> H`` (not taken modulo automorphisms).

    ``extraG``/``extraH`` are optional vertex decorations (e.g. divisors)
    which must push forward: the decoration of a target vertex is the sum
    of the decorations of its preimages.
    """
    k = G.num_edges - H.num_edges
    if k < 0 or G.g != H.g or G.n != H.n:
        return []
    out = []
    target = H.canonical()
    for K, vmap, emap in _contractions_of(G, k):
        if K.num_vertices != H.num_vertices or K.canonical() != target:
            continue
        extraK = None
        if extraG is not None:
            extraK = [0] * K.num_vertices
            for v, w in enumerate(vmap):
                extraK[w] += extraG[v]
        if (extraK is None) != (extraH is None):
            raise GraphError("decorations must be given on both sides")
        c = GraphMorphism(G, K, vmap, emap)
        for iso in isomorphisms(K, H, extraK, extraH):
            m = c.then(iso)
            out.append(GraphMorphism(G, H, m.vertex_map, m.edge_map))
    return out


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _splittings(H: MarkedGraph):
    """Graphs with one more edge that contract onto ``H`` (possibly unstable)."""
    yield from _add_loops(H)
    for v in H.vertices:
        inc = [i for i, (a, b) in enumerate(H.edges) if a == v or b == v]
        loops = [i for i in inc if H.edges[i][0] == H.edges[i][1]]
        plain = [i for i in inc if H.edges[i][0] != H.edges[i][1]]
        legs = sorted(H.legs[v])
        nv = H.num_vertices
        for g1 in range(H.genera[v] + 1):
            g2 = H.genera[v] - g1
            for legmask in range(1 << len(legs)):
                L1 = {legs[k] for k in range(len(legs)) if legmask >> k & 1}
                L2 = set(legs) - L1
                for side in itertools.product((0, 1), repeat=len(plain)):
                    for lside in itertools.product((0, 1, 2), repeat=len(loops)):
                        genera = list(H.genera) + [g2]
                        genera[v] = g1
                        legsl = [set(L) for L in H.legs] + [L2]
                        legsl[v] = L1
                        edges = []
                        new = nv
                        for i, (a, b) in enumerate(H.edges):
                            if i in plain:
                                s = side[plain.index(i)]
                                w = v if s == 0 else new
                                other = b if a == v else a
                                edges.append((w, other))
                            elif i in loops:
                                s = lside[loops.index(i)]
                                if s == 0:
                                    edges.append((v, v))
                                elif s == 1:
                                    edges.append((new, new))
                                else:
                                    edges.append((v, new))
                            else:
                                edges.append((a, b))
                        edges.append((v, new))
                        try:
                            K = MarkedGraph(genera, legsl, edges, n=H.n, check_stable=True)
                        except GraphError:
                            continue
                        yield K


def _add_loops(H: MarkedGraph):
    for v in H.vertices:
        if H.genera[v] >= 1:
            genera = list(H.genera)
            genera[v] -= 1
            try:
                yield MarkedGraph(genera, H.legs, list(H.edges) + [(v, v)], n=H.n)
            except GraphError:
                continue


def enumerate_stable_graphs(g: int, n: int, max_edges: int):
    """One canonical representative per isomorphism class of stable
    genus-``g`` ``n``-pointed graphs with at most ``max_edges`` edges.

    Output is sorted by (number of edges, canonical structure).
    """
    if n < 1:
        raise GraphError("at least one marking is required")
    if g < 0 or 2 * g - 2 + n <= 0:
        raise GraphError("the trivial graph is not stable for these (g, n)")
    if max_edges < 0:
        raise GraphError("max_edges must be nonnegative")
    level = {trivial_graph(g, n).canonical()}
    result = list(level)
    for _ in range(max_edges):
        nxt = set()
        for H in level:
            for K in _splittings(H):
                nxt.add(K.canonical())
        nxt = sorted(nxt, key=lambda G: G.structure())
        result.extend(nxt)
        level = set(nxt)
        if not level:
            break
    return sorted(result, key=lambda G: (G.num_edges, G.structure()))


# ---------------------------------------------------------------------------
# Subdivision, genus of subsets, vine curves
# ---------------------------------------------------------------------------


def subdivide(G: MarkedGraph, E: Iterable[int]):
    """Insert a genus-0 vertex in the middle of each edge of ``E``.

    Returns ``(G^E, tags)`` where ``tags[e]`` is the exceptional vertex of
    edge ``e``.  Exceptional vertices are appended in the order of ``E``.
    """
    E = sorted(set(E))
    for e in E:
        if not 0 <= e < G.num_edges:
            raise GraphError(f"edge {e} out of range")
    genera = list(G.genera)
    legs = [set(L) for L in G.legs]
    edges = []
    tags = {}
    for i, (u, v) in enumerate(G.edges):
        if i in E:
            w = len(genera)
            genera.append(0)
            legs.append(set())
            tags[i] = w
            edges.append((u, w))
            edges.append((w, v))
        else:
            edges.append((u, v))
    return MarkedGraph(genera, legs, edges, n=G.n, check_stable=False), tags


def induced_genus(G: MarkedGraph, V) -> int:
    """Genus of the complete subgraph on ``V``."""
    V = set(V)
    if not V:
        raise GraphError("empty vertex set")
    if not G.is_connected_subset(V):
        raise GraphError("vertex set does not induce a connected subgraph")
    return sum(G.genera[v] for v in V) + len(G.internal_edges(V)) - len(V) + 1


@dataclass(frozen=True, order=True)
class VineTriple:
    """Two-vertex graph data: genus ``i`` on the vertex carrying ``S``,
    ``t`` joining edges.  The other vertex has genus ``g - i - t + 1``."""

    i: int
    t: int
    S: frozenset

    def __post_init__(self):
        object.__setattr__(self, "S", frozenset(self.S))

    def check(self, g, n):
        i, t, S = self.i, self.t, self.S
        if not (0 <= i <= g and t >= 1 and i + t <= g + 1):
            raise GraphError(f"invalid vine genus data (i={i}, t={t}) for g={g}")
        if 1 not in S or not S <= set(range(1, n + 1)):
            raise GraphError("S must be a subset of [n] containing 1")
        Sc = n - len(S)
        if (i, t) == (0, 1) and len(S) < 2:
            raise GraphError("(0,1) requires |S| >= 2")
        if (i, t) == (0, 2) and len(S) < 1:
            raise GraphError("(0,2) requires |S| >= 1")
        if (i, t) == (g, 1) and Sc < 2:
            raise GraphError("(g,1) requires |S^c| >= 2")
        if (i, t) == (g - 1, 2) and Sc < 1:
            raise GraphError("(g-1,2) requires |S^c| >= 1")
        return self

    def graph(self, g, n) -> MarkedGraph:
        self.check(g, n)
        other = frozenset(range(1, n + 1)) - self.S
        return MarkedGraph(
            [self.i, g - self.i - self.t + 1], [self.S, other], [(0, 1)] * self.t, n=n
        )

    def sort_key(self):
        return (self.i, self.t, tuple(sorted(self.S)))

    def __repr__(self):
        return f"VineTriple(i={self.i}, t={self.t}, S={sorted(self.S)})"


def vine_triples(g, n, t=None):
    """All valid vine triples, optionally with a fixed edge count."""
    out = []
    rest = list(range(2, n + 1))
    ts = range(1, g + 2) if t is None else [t]
    for tt in ts:
        for i in range(0, g + 2 - tt):
            for r in range(len(rest) + 1):
                for extra in itertools.combinations(rest, r):
                    T = VineTriple(i, tt, frozenset((1,) + extra))
                    try:
                        T.check(g, n)
                    except GraphError:
                        continue
                    out.append(T)
    return sorted(out, key=VineTriple.sort_key)


def vine_triple_of(G: MarkedGraph, V) -> VineTriple:
    """The vine triple obtained by contracting ``G`` onto the split ``V | V^c``.

    ``V`` and its complement must both be connected; ``V`` is taken as
    the side carrying marking 1 after possibly swapping.
    """
    V = frozenset(V)
    Vc = G.complement(V)
    if 1 not in G.legs_of(V):
        V, Vc = Vc, V
    return VineTriple(induced_genus(G, V), len(G.boundary_edges(V)), G.legs_of(V))
