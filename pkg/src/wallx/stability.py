"""Universal stability conditions in vine-curve coordinates, the wall
arrangement, and stability tests for pseudodivisors.

All arithmetic is exact.  Points just off a wall are represented with a
formal infinitesimal: every coordinate is a :class:`PerturbedRational`
``base + eps * ε`` compared lexicographically.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .graphs import (
    GraphError,
    MarkedGraph,
    VineTriple,
    induced_genus,
    subdivide,
    vine_triples,
)
from . import _scan

__all__ = [
    "PerturbedRational",
    "StabilityCondition",
    "Wall",
    "Pseudodivisor",
    "StabilityError",
    "phi_value",
    "vertex_phi",
    "beta_value",
    "is_semistable",
    "is_stable",
    "is_quasistable",
    "unpruned_check",
    "stable_divisors",
    "walls_in_window",
    "walls_coincide",
    "wall_functional",
    "opposite_pair",
    "generic_point",
    "coinciding_walls",
    "wall_direction",
    "vine_coordinate",
    "coordinate_functional",
    "component_phi",
    "divisorial_keys",
    "scan_polarization",
    "scan_stability",
    "bn_closure_regime",
    "RegimeResult",
    "parse_rational",
    "format_rational",
]


class StabilityError(ValueError):
    """Raised for invalid stability data or non-generic wall points."""


def parse_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise StabilityError(f"cannot read {x!r} as an exact rational")


def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@functools.total_ordering
class PerturbedRational:
    """``base + eps·ε`` with ε a positive infinitesimal."""

    __slots__ = ("base", "eps")

    def __init__(self, base=0, eps=0):
        self.base = parse_rational(base) if not isinstance(base, Fraction) else base
        self.eps = parse_rational(eps) if not isinstance(eps, Fraction) else eps

    @staticmethod
    def lift(x) -> "PerturbedRational":
        if isinstance(x, PerturbedRational):
            return x
        return PerturbedRational(Fraction(x), Fraction(0))

    def __add__(self, other):
        o = PerturbedRational.lift(other)
        return PerturbedRational(self.base + o.base, self.eps + o.eps)

    __radd__ = __add__

    def __neg__(self):
        return PerturbedRational(-self.base, -self.eps)

    def __sub__(self, other):
        return self + (-PerturbedRational.lift(other))

    def __rsub__(self, other):
        return PerturbedRational.lift(other) - self

    def __mul__(self, c):
        if isinstance(c, PerturbedRational):
            if c.eps and self.eps:
                raise TypeError("product of two perturbed values is not linear")
            if c.eps:
                return c * self.base
            c = c.base
        c = Fraction(c)
        return PerturbedRational(self.base * c, self.eps * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = Fraction(c)
        return PerturbedRational(self.base / c, self.eps / c)

    def _key(self):
        return (self.base, self.eps)

    def __eq__(self, other):
        try:
            o = PerturbedRational.lift(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self._key() == o._key()

    def __lt__(self, other):
        o = PerturbedRational.lift(other)
        return self._key() < o._key()

    def __hash__(self):
        return hash(self._key())

    def sign(self) -> int:
        if self.base:
            return 1 if self.base > 0 else -1
        if self.eps:
            return 1 if self.eps > 0 else -1
        return 0

    def __repr__(self):
        if not self.eps:
            return f"PR({format_rational(self.base)})"
        return f"PR({format_rational(self.base)} {'+' if self.eps > 0 else '-'} {format_rational(abs(self.eps))}ε)"


PR = PerturbedRational


@dataclass(frozen=True)
class Wall:
    """The hyperplane on which the vine coordinate ``x_{i,t,S}`` equals
    ``k`` (even ``t``) or ``k + 1/2`` (odd ``t``)."""

    i: int
    t: int
    S: frozenset
    k: int

    def __post_init__(self):
        object.__setattr__(self, "S", frozenset(self.S))

    @property
    def triple(self) -> VineTriple:
        return VineTriple(self.i, self.t, self.S)

    @property
    def level(self) -> Fraction:
        """Value of ``x_{i,t,S}`` on the wall."""
        return Fraction(self.k) + Fraction(self.t % 2, 2)

    @property
    def divisorial(self) -> bool:
        return self.t == 1

    def is_good(self, n) -> bool:
        return self.t >= 2 and self.S != frozenset(range(1, n + 1))

    def to_json(self) -> dict:
        return {"i": self.i, "t": self.t, "S": sorted(self.S), "k": self.k}

    @classmethod
    def from_json(cls, data) -> "Wall":
        return cls(int(data["i"]), int(data["t"]), frozenset(data["S"]), int(data["k"]))

    @classmethod
    def parse(cls, text: str) -> "Wall":
        """Read ``"i,t,S,k"`` with ``S`` written as ``1+2+3`` or ``{1;2}``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise StabilityError("wall must be given as i,t,S,k")
        raw = parts[2].strip("{}[]")
        S = frozenset(int(x) for x in raw.replace(";", "+").replace(" ", "+").split("+") if x)
        return cls(int(parts[0]), int(parts[1]), S, int(parts[3]))


def divisorial_keys(g, n):
    return [(T.i, T.S) for T in vine_triples(g, n, t=1)]


class StabilityCondition:
    """A point of the universal stability space.

    Parameters
    ----------
    g, n, d : int
    x_div : mapping ``(i, S) -> value`` for every divisorial triple ``(i, 1, S)``
    x_pts : sequence of ``n`` values, the point coordinates ``x_1..x_n``
    """

    def __init__(self, g, n, d, x_div: Mapping, x_pts):
        if g < 2:
            raise StabilityError("genus at least 2 is required")
        if n < 1:
            raise StabilityError("at least one marking is required")
        self.g, self.n, self.d = int(g), int(n), int(d)
        keys = divisorial_keys(g, n)
        xd = {}
        for (i, S), v in x_div.items():
            xd[(int(i), frozenset(S))] = PR.lift(v if not isinstance(v, str) else parse_rational(v))
        missing = [k for k in keys if k not in xd]
        extra = [k for k in xd if k not in set(keys)]
        if missing:
            raise StabilityError(f"missing divisorial coordinates: {missing[:3]}")
        if extra:
            raise StabilityError(f"unknown divisorial coordinates: {extra[:3]}")
        self.x_div = {k: xd[k] for k in keys}
        pts = [PR.lift(v if not isinstance(v, str) else parse_rational(v)) for v in x_pts]
        if len(pts) != n:
            raise StabilityError("x_pts must have one entry per marking")
        self.x_pts = tuple(pts)
        self._vcache = {}

    # -- coordinates ------------------------------------------------------

    def coordinate(self, T: VineTriple) -> PR:
        """``x_{i,t,S}`` for any valid triple."""
        if T.t == 1:
            try:
                return self.x_div[(T.i, T.S)]
            except KeyError:
                raise StabilityError(f"invalid divisorial triple {T}") from None
        return vine_coordinate(self.g, self.d, T, self.x_pts)

    def base(self) -> "StabilityCondition":
        return StabilityCondition(
            self.g,
            self.n,
            self.d,
            {k: PR(v.base) for k, v in self.x_div.items()},
            [PR(v.base) for v in self.x_pts],
        )

    def shifted(self, div_dir=None, pts_dir=None, scale=1) -> "StabilityCondition":
        """Add ``scale·ε·direction`` (directions given as dicts / sequences)."""
        scale = Fraction(scale)
        xd = dict(self.x_div)
        for k, c in (div_dir or {}).items():
            xd[k] = xd[k] + PR(0, Fraction(c) * scale)
        xp = list(self.x_pts)
        if pts_dir is not None:
            xp = [x + PR(0, Fraction(c) * scale) for x, c in zip(xp, pts_dir)]
        return StabilityCondition(self.g, self.n, self.d, xd, xp)

    @property
    def is_perturbed(self) -> bool:
        return any(v.eps for v in self.x_div.values()) or any(v.eps for v in self.x_pts)

    # -- vertex values ----------------------------------------------------

    def vertex_values(self, G: MarkedGraph):
        key = G.structure()
        if key not in self._vcache:
            self._vcache[key] = tuple(vertex_phi(self, G))
        return self._vcache[key]

    def __eq__(self, other):
        return (
            isinstance(other, StabilityCondition)
            and (self.g, self.n, self.d) == (other.g, other.n, other.d)
            and self.x_div == other.x_div
            and self.x_pts == other.x_pts
        )

    def __repr__(self):
        return f"StabilityCondition(g={self.g}, n={self.n}, d={self.d})"

    # -- JSON ---------------------------------------------------------------

    def to_json(self) -> dict:
        def pt(v):
            if v.eps:
                return {"val": format_rational(v.base), "eps": format_rational(v.eps)}
            return format_rational(v.base)

        return {
            "g": self.g,
            "n": self.n,
            "d": self.d,
            "x_div": [
                {
                    "i": i,
                    "S": sorted(S),
                    "val": format_rational(v.base),
                    "eps": format_rational(v.eps),
                }
                for (i, S), v in self.x_div.items()
            ],
            "x_pts": [pt(v) for v in self.x_pts],
        }

    @classmethod
    def from_json(cls, data) -> "StabilityCondition":
        xd = {}
        for rec in data["x_div"]:
            xd[(int(rec["i"]), frozenset(rec["S"]))] = PR(
                parse_rational(rec["val"]), parse_rational(rec.get("eps", "0"))
            )
        pts = []
        for v in data["x_pts"]:
            if isinstance(v, dict):
                pts.append(PR(parse_rational(v["val"]), parse_rational(v.get("eps", "0"))))
            else:
                pts.append(PR(parse_rational(v)))
        return cls(data["g"], data["n"], data["d"], xd, pts)


def vine_coordinate(g, d, T: VineTriple, x_pts) -> PR:
    """Vine coordinate of a triple with ``t >= 2`` from the point coordinates."""
    n = len(x_pts)
    inside = sum((x_pts[j - 1] for j in T.S), PR())
    outside = sum((x_pts[j - 1] for j in range(1, n + 1) if j not in T.S), PR())
    a = Fraction(2 * g - 2 * T.i - T.t, 2 * g - 2)
    b = Fraction(2 * T.i - 2 + T.t, 2 * g - 2)
    return inside * a + (PR(d) - outside) * b


def coordinate_functional(g, n, d, T: VineTriple):
    """``x_{i,t,S}`` as an affine function: ``(coeffs, constant)`` where
    coefficients are keyed by ``('div', i, S)`` and ``('pt', j)``."""
    if T.t == 1:
        return {("div", T.i, T.S): Fraction(1)}, Fraction(0)
    a = Fraction(2 * g - 2 * T.i - T.t, 2 * g - 2)
    b = Fraction(2 * T.i - 2 + T.t, 2 * g - 2)
    coeffs = {}
    for j in range(1, n + 1):
        c = a if j in T.S else -b
        if c:
            coeffs[("pt", j)] = c
    return coeffs, b * d


def _coord_sort_key(c):
    if c[0] == "div":
        return (0, c[1], tuple(sorted(c[2])))
    return (1, c[1], ())


def wall_functional(W: Wall, g, n, d):
    """Normalised affine functional vanishing exactly on ``W``.

    Returned as a tuple of ``(coordinate, coefficient)`` pairs followed by
    the constant, scaled so that the leading coefficient is 1.
    """
    W.triple.check(g, n)
    coeffs, const = coordinate_functional(g, n, d, W.triple)
    const = const - W.level
    keys = sorted(coeffs, key=_coord_sort_key)
    if not keys:
        raise StabilityError("constant vine coordinate")
    lead = coeffs[keys[0]]
    return tuple((k, coeffs[k] / lead) for k in keys) + (const / lead,)


def walls_coincide(W1: Wall, W2: Wall, g, n, d) -> bool:
    """Whether two walls are the same hyperplane."""
    return wall_functional(W1, g, n, d) == wall_functional(W2, g, n, d)


# ---------------------------------------------------------------------------
# phi on graphs
# ---------------------------------------------------------------------------


def vertex_phi(phi: StabilityCondition, G: MarkedGraph):
    """Values of ``phi`` on the vertices of ``G``.

    For each vertex ``v`` every connected component ``C`` of ``G - v``
    contracts, together with its complement, onto a vine curve; the value
    on ``C`` is read off from that vine coordinate and ``v`` receives the
    remainder.
    """
    if (G.g, G.n) != (phi.g, phi.n):
        raise StabilityError("graph and stability condition have different (g, n)")
    d = phi.d
    out = []
    allv = set(G.vertices)
    for v in G.vertices:
        total = PR(d)
        for C in G.components(allv - {v}):
            total = total - component_phi(phi, G, C)
        out.append(total)
    return out


def component_phi(phi, G, C) -> PR:
    """phi of ``C`` when ``C`` and its complement are both connected."""
    t = len(G.boundary_edges(C))
    if 1 in G.legs_of(C):
        T = VineTriple(induced_genus(G, C), t, G.legs_of(C))
        return phi.coordinate(T)
    Cc = G.complement(C)
    T = VineTriple(induced_genus(G, Cc), t, G.legs_of(Cc))
    return PR(phi.d) - phi.coordinate(T)


def phi_value(phi: StabilityCondition, G: MarkedGraph, V) -> PR:
    vals = phi.vertex_values(G)
    return sum((vals[v] for v in V), PR())


# ---------------------------------------------------------------------------
# Pseudodivisors and stability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pseudodivisor:
    """Edge set ``E`` of ``G`` and a divisor ``D`` on the subdivision ``G^E``.

    ``D`` is indexed like the vertices of :func:`subdivide` (original
    vertices first, then one exceptional vertex per edge of ``E`` in
    increasing edge order).
    """

    E: frozenset
    D: tuple

    def __post_init__(self):
        object.__setattr__(self, "E", frozenset(self.E))
        object.__setattr__(self, "D", tuple(int(x) for x in self.D))

    @classmethod
    def line_bundle(cls, D) -> "Pseudodivisor":
        return cls(frozenset(), tuple(D))

    @property
    def degree(self) -> int:
        return sum(self.D)

    def validate(self, G: MarkedGraph):
        for e in self.E:
            if not 0 <= e < G.num_edges:
                raise StabilityError(f"edge {e} out of range")
        if len(self.D) != G.num_vertices + len(self.E):
            raise StabilityError("divisor length does not match the subdivision")
        if any(x != 1 for x in self.D[G.num_vertices:]):
            raise StabilityError("exceptional vertices must have degree 1")
        return self

    def is_simple(self, G: MarkedGraph) -> bool:
        """Whether removing ``E`` leaves ``G`` connected."""
        keep = [e for i, e in enumerate(G.edges) if i not in self.E]
        try:
            MarkedGraph(G.genera, G.legs, keep, n=G.n, check_stable=False)
        except GraphError:
            return False
        return True

    def to_json(self):
        return {"E": sorted(self.E), "D": list(self.D)}

    @classmethod
    def from_json(cls, data):
        if isinstance(data, list):
            return cls(frozenset(), tuple(data))
        return cls(frozenset(data.get("E", [])), tuple(data["D"]))


class _Setup:
    """Integer-scaled data for scanning vertex subsets of ``G^E``."""

    def __init__(self, phi, G, pd: Pseudodivisor):
        pd.validate(G)
        if pd.degree != phi.d:
            raise StabilityError("divisor degree differs from the stability degree")
        H, tags = subdivide(G, pd.E)
        self.H = H
        self.nv = H.num_vertices
        self.exceptional_mask = 0
        for w in tags.values():
            self.exceptional_mask |= 1 << w
        vals = list(phi.vertex_values(G)) + [PR()] * len(tags)
        den = 2
        for v in vals:
            den = den * v.base.denominator // math.gcd(den, v.base.denominator)
            den = den * v.eps.denominator // math.gcd(den, v.eps.denominator)
        self.den = den
        # beta(V) * den = sum_v (phi(v) - D(v)) * den + |E(V,V^c)| * den / 2
        self.wb = [int((v.base - dv) * den) for v, dv in zip(vals, pd.D)]
        self.we = [int(v.eps * den) for v in vals]
        self.half = den // 2
        self.edges = [(u, v) for u, v in H.edges if u != v]
        self.adj = [0] * self.nv
        for u, v in self.edges:
            self.adj[u] |= 1 << v
            self.adj[v] |= 1 << u

    def scan(self):
        return _scan.connected_betas(self.nv, self.adj, self.edges, self.wb, self.we, self.half)

    def beta(self, mask):
        b = sum(self.wb[v] for v in range(self.nv) if mask >> v & 1)
        e = sum(self.we[v] for v in range(self.nv) if mask >> v & 1)
        cut = sum(1 for u, v in self.edges if (mask >> u & 1) != (mask >> v & 1))
        return b + cut * self.half, e


def _as_pd(G, D) -> Pseudodivisor:
    if isinstance(D, Pseudodivisor):
        return D
    return Pseudodivisor.line_bundle(D)


def beta_value(phi, G, D, V) -> PR:
    """``-deg D|_V + phi(V) + |E(V,V^c)|/2`` for ``V`` in ``G^E``."""
    s = _Setup(phi, G, _as_pd(G, D))
    mask = 0
    for v in V:
        mask |= 1 << v
    b, e = s.beta(mask)
    return PR(Fraction(b, s.den), Fraction(e, s.den))


def _check(phi, G, D, mode, v0=None):
    s = _Setup(phi, G, _as_pd(G, D))
    full = (1 << s.nv) - 1
    for mask, b, e in s.scan():
        if (b, e) < (0, 0):
            return False
        if mode == "semi" or (b, e) > (0, 0) or mask == full:
            continue
        if mode == "stable" and mask & ~s.exceptional_mask:
            return False
        if mode == "quasi" and mask >> v0 & 1:
            return False
    return True


def is_semistable(phi, G, D) -> bool:
    return _check(phi, G, D, "semi")


def is_stable(phi, G, D) -> bool:
    return _check(phi, G, D, "stable")


def is_quasistable(phi, G, D, v0) -> bool:
    if not 0 <= v0 < G.num_vertices:
        raise StabilityError("v0 must be a vertex of G")
    return _check(phi, G, D, "quasi", v0)


def unpruned_check(phi, G, D, mode="stable", v0=None) -> bool:
    """Exhaustive test over every vertex subset (slow reference)."""
    s = _Setup(phi, G, _as_pd(G, D))
    full = (1 << s.nv) - 1
    for mask in range(1, full + 1):
        b, e = s.beta(mask)
        if (b, e) < (0, 0):
            return False
        if mode == "semi" or (b, e) > (0, 0) or mask == full:
            continue
        if mode == "stable" and mask & ~s.exceptional_mask:
            return False
        if mode == "quasi" and mask >> v0 & 1:
            return False
    return True


def stable_divisors(phi, G: MarkedGraph, E=(), mode="stable"):
    """All pseudodivisors ``(E, D)`` on ``G`` passing the given test.

    ``mode`` is ``"stable"`` or ``"semi"``.
    """
    E = frozenset(E)
    H, tags = subdivide(G, E)
    vals = list(phi.vertex_values(G))
    nv = G.num_vertices
    ranges = []
    for v in range(nv):
        # beta({v}) >= 0 and beta of the complement >= 0 bound D(v)
        cut = len(H.boundary_edges([v]))
        lo = vals[v].base - Fraction(cut, 2)
        hi = vals[v].base + Fraction(cut, 2)
        ranges.append(range(math.floor(lo), math.ceil(hi) + 1))
    rest = phi.d - len(E)
    test = is_stable if mode == "stable" else is_semistable
    out = []
    for D in itertools.product(*ranges[:-1]):
        last = rest - sum(D)
        if last not in ranges[-1]:
            continue
        pd = Pseudodivisor(E, tuple(D) + (last,) + (1,) * len(E))
        if test(phi, G, pd):
            out.append(pd)
    return out


# ---------------------------------------------------------------------------
# Walls
# ---------------------------------------------------------------------------


def _coordinate_range(coeffs, const, box, default):
    lo = hi = const
    for c, a in coeffs.items():
        lo_c, hi_c = box.get(c, default) if box is not None else default
        lo_c, hi_c = Fraction(lo_c), Fraction(hi_c)
        if a > 0:
            lo += a * lo_c
            hi += a * hi_c
        else:
            lo += a * hi_c
            hi += a * lo_c
    return lo, hi


def walls_in_window(g, n, d, box=None, default=None, triples=None):
    """Walls meeting a closed box of coordinates.

    ``box`` maps coordinates ``('div', i, S)`` / ``('pt', j)`` to closed
    intervals; coordinates missing from ``box`` use ``default``.  The result
    is a list of ``(representative, [coinciding walls])`` pairs, one per
    distinct hyperplane, in a deterministic order.
    """
    if default is None and (box is None or len(box) < len(divisorial_keys(g, n)) + n):
        raise StabilityError("the window must bound every coordinate")
    if default is not None:
        default = (Fraction(default[0]), Fraction(default[1]))
        if default[0] > default[1]:
            return []
    groups = {}
    for T in triples if triples is not None else vine_triples(g, n):
        coeffs, const = coordinate_functional(g, n, d, T)
        lo, hi = _coordinate_range(coeffs, const, box, default)
        shift = Fraction(T.t % 2, 2)
        for k in range(math.ceil(lo - shift), math.floor(hi - shift) + 1):
            W = Wall(T.i, T.t, T.S, k)
            groups.setdefault(wall_functional(W, g, n, d), []).append(W)
    out = []
    for key in sorted(groups, key=repr):
        ws = sorted(groups[key], key=lambda W: (W.t, W.i, sorted(W.S), W.k))
        out.append((ws[0], ws))
    out.sort(key=lambda p: (p[0].t, p[0].i, sorted(p[0].S), p[0].k))
    return out


def coinciding_walls(W: Wall, g, n, d):
    """Every wall (over all triples) equal to ``W`` as a hyperplane."""
    target = wall_functional(W, g, n, d)
    out = []
    for T in vine_triples(g, n):
        coeffs, const = coordinate_functional(g, n, d, T)
        # level of x_T on W, when x_T is constant along W
        for k in _candidate_levels(T, coeffs, const, W, g, n, d):
            V = Wall(T.i, T.t, T.S, k)
            if wall_functional(V, g, n, d) == target:
                out.append(V)
    return sorted(out, key=lambda V: (V.t, V.i, sorted(V.S), V.k))


def _candidate_levels(T, coeffs, const, W, g, n, d):
    wc, wconst = coordinate_functional(g, n, d, W.triple)
    keys = sorted(set(coeffs) | set(wc), key=_coord_sort_key)
    ratio = None
    for k in keys:
        a, b = coeffs.get(k, Fraction(0)), wc.get(k, Fraction(0))
        if (a == 0) != (b == 0):
            return []
        if a:
            r = a / b
            if ratio is None:
                ratio = r
            elif r != ratio:
                return []
    if ratio is None:
        return []
    # x_T = ratio * x_W + (const - ratio * wconst); on W, x_W = level
    value = ratio * W.level + const - ratio * wconst
    k = value - Fraction(T.t % 2, 2)
    return [int(k)] if k.denominator == 1 else []


def wall_direction(W: Wall, g, n):
    """Direction crossing ``W`` that increases ``x_{i,t,S}``."""
    if W.t == 1:
        return {(W.i, W.S): 1}, None
    return {}, [1 if j in W.S else -1 for j in range(1, n + 1)]


def opposite_pair(W: Wall, base_point: StabilityCondition):
    """The two infinitesimal perturbations of a generic point of ``W``.

    Returns ``(phi_plus, phi_minus)`` with ``x_{i,t,S}`` larger on the plus
    side, so extremal sets contain the vertex carrying marking 1.
    """
    g, n, d = base_point.g, base_point.n, base_point.d
    W.triple.check(g, n)
    if base_point.is_perturbed:
        raise StabilityError("base point must not carry infinitesimal parts")
    if base_point.coordinate(W.triple) != PR(W.level):
        raise StabilityError("base point does not lie on the wall")
    own = wall_functional(W, g, n, d)
    for T in vine_triples(g, n):
        x = base_point.coordinate(T).base
        k = x - Fraction(T.t % 2, 2)
        if k.denominator != 1:
            continue
        V = Wall(T.i, T.t, T.S, int(k))
        if wall_functional(V, g, n, d) != own:
            raise StabilityError(f"not a generic wall point (also on {V})")
    dd, dp = wall_direction(W, g, n)
    plus = base_point.shifted(dd, dp, 1)
    minus = base_point.shifted(dd, dp, -1)
    return plus, minus


def generic_point(W: Wall, g, n, d, search=6):
    """A deterministic generic rational point on ``W``.

    Coordinates not fixed by the wall are chosen from a sequence of
    rationals with large, pairwise different denominators; the first
    choice passing the genericity test is returned.
    """
    W.triple.check(g, n)
    keys = divisorial_keys(g, n)
    for attempt in range(search * 8):
        primes = [101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179]
        def val(idx):
            p = primes[(idx + attempt) % len(primes)]
            return Fraction(idx * 7 + 3 + attempt, p)
        xd = {k: val(m) for m, k in enumerate(keys)}
        xp = [val(len(keys) + j) for j in range(n)]
        if W.t == 1:
            xd[(W.i, W.S)] = W.level
        else:
            # solve for one point coordinate so that x_{i,t,S} = level
            coeffs, const = coordinate_functional(g, n, d, W.triple)
            j0 = min(j for (_, j) in coeffs)
            rest = const + sum(c * xp[j - 1] for (_, j), c in coeffs.items() if j != j0)
            xp[j0 - 1] = (W.level - rest) / coeffs[("pt", j0)]
        phi = StabilityCondition(g, n, d, xd, xp)
        try:
            opposite_pair(W, phi)
        except StabilityError:
            continue
        return phi
    raise StabilityError("no generic point found on the wall")


# ---------------------------------------------------------------------------
# Stabilised canonical polarisation
# ---------------------------------------------------------------------------


def _rational_tail_vertices(G: MarkedGraph):
    """Vertices and edges lying in some rational tail (attaching edge included)."""
    verts, edges = set(), set()
    for idx, (u, v) in enumerate(G.edges):
        if u == v:
            continue
        keep = [e for j, e in enumerate(G.edges) if j != idx]
        sides = _components_without(G, keep)
        if len(sides) != 2:
            continue
        for side in sides:
            if induced_genus(G, side) == 0:
                verts |= side
                edges |= set(G.internal_edges(side))
                edges.add(idx)
    return verts, edges


def _components_without(G, edges):
    parent = list(G.vertices)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        parent[find(u)] = find(v)
    comps = {}
    for x in G.vertices:
        comps.setdefault(find(x), set()).add(x)
    return [frozenset(c) for c in comps.values()]


def scan_polarization(G: MarkedGraph, d):
    """Vertex values ``d·K^s(v)/(2g-2)`` of the stabilised canonical polarisation."""
    g = G.g
    if g <= 1:
        raise StabilityError("genus at least 2 is required")
    tv, te = _rational_tail_vertices(G)
    out = []
    for v in G.vertices:
        if v in tv:
            out.append(Fraction(0))
            continue
        val = sum((a == v) + (b == v) for i, (a, b) in enumerate(G.edges) if i not in te)
        out.append(Fraction(d * (2 * G.genera[v] - 2 + val), 2 * g - 2))
    return out


def scan_stability(g, n, d) -> StabilityCondition:
    """The stabilised canonical polarisation in vine coordinates."""
    xd = {}
    for i, S in divisorial_keys(g, n):
        G = VineTriple(i, 1, S).graph(g, n)
        xd[(i, S)] = scan_polarization(G, d)[0]
    xp = []
    for j in range(1, n + 1):
        G = MarkedGraph([0, g - 1], [[j], [m for m in range(1, n + 1) if m != j]], [(0, 1), (0, 1)], n=n)
        xp.append(scan_polarization(G, d)[0])
    return StabilityCondition(g, n, d, xd, xp)


# ---------------------------------------------------------------------------
# Regime classifier
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegimeResult:
    holds: bool
    label: str
    boundary: bool = False

    def __bool__(self):
        return self.holds


def bn_closure_regime(d, phi: StabilityCondition) -> RegimeResult:
    """Coordinate-interval test for the Brill-Noether class to equal the
    class of the closure of its restriction to smooth curves.

    ``boundary`` is set whenever some coordinate sits exactly on one of the
    bounds (up to infinitesimals), since strictness there is delicate.
    """
    g, n = phi.g, phi.n
    if d != phi.d:
        raise StabilityError("degree mismatch")
    if d >= g:
        raise StabilityError("degree must be below the genus")
    checks = []  # (value, lo, hi)
    half = Fraction(1, 2)
    if d == g - 1 and d != 0:
        label = "d=g-1"
        for (i, S), x in phi.x_div.items():
            checks.append((x, i - 3 * half, i + half))
    elif d == 0:
        label = "d=0"
        for (i, S), x in phi.x_div.items():
            if i >= 1:
                checks.append((x, -half, half))
            else:
                checks.append((x, -3 * half, half))
        for T in vine_triples(g, n):
            if T.t >= 2:
                checks.append((phi.coordinate(T), Fraction(d - 1), Fraction(1)))
    elif d == g - 2:
        label = "d=g-2"
        for (i, S), x in phi.x_div.items():
            if i >= 1:
                checks.append((x, i - 3 * half, i - half))
            else:
                checks.append((x, -3 * half, half))
        for T in vine_triples(g, n):
            if T.t >= 2:
                checks.append((phi.coordinate(T), Fraction(T.i - 2), Fraction(T.i + 1)))
    elif 0 < d <= g - 3:
        return RegimeResult(False, "never")
    else:
        label = "d<0"
        for (i, S), x in phi.x_div.items():
            checks.append((x, d - half, half))
        for T in vine_triples(g, n):
            if T.t >= 2:
                checks.append((phi.coordinate(T), Fraction(d - 1), Fraction(1)))
    holds = all(PR.lift(lo) < x < PR.lift(hi) for x, lo, hi in checks)
    boundary = any(x.base in (lo, hi) for x, lo, hi in checks)
    return RegimeResult(holds, label, boundary)
