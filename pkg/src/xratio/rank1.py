"""Rank-one models: the hyperbolic disc and finite metric trees with ends."""

from __future__ import annotations

import cmath
import itertools
import math
import numbers
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .crossratio import Admissibility, CrValue, classify_pattern, convention_value
from .errors import CoincidentPoints, Degenerate, Inadmissible, NotExtendable, NotMoebius, SameEnd

TAU = 2.0 * math.pi


# ---------------------------------------------------------------------------
# hyperbolic disc


@dataclass(frozen=True)
class DiscBoundaryPoint:
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % TAU)

    @property
    def z(self) -> complex:
        return cmath.exp(1j * self.angle)

    def rotate(self, phi: float) -> "DiscBoundaryPoint":
        return DiscBoundaryPoint(self.angle + phi)


def chord(x: DiscBoundaryPoint, y: DiscBoundaryPoint) -> float:
    """|x - y| on the unit circle, computed as 2 |sin((a - b)/2)| to keep precision for close points."""
    return 2.0 * abs(math.sin(0.5 * (x.angle - y.angle)))


def h2_opposite(x: DiscBoundaryPoint, y: DiscBoundaryPoint) -> bool:
    return chord(x, y) > 0.0


def h2_gromov(x: DiscBoundaryPoint, y: DiscBoundaryPoint) -> float:
    """Gromov product at the disc centre: -log(|x - y| / 2)."""
    c = chord(x, y)
    if c == 0.0:
        raise CoincidentPoints("boundary points coincide")
    return -math.log(0.5 * c) + 0.0


def h2_cr(x, y, z, w) -> float:
    """Additive cross ratio log(|x - y||z - w| / (|x - w||z - y|))."""
    c = [chord(x, y), chord(z, w), chord(x, w), chord(z, y)]
    if min(c) == 0.0:
        raise Degenerate("cross ratio needs the four pairs to be distinct")
    return math.log(c[0] * c[1] / (c[2] * c[3]))


def h2_cr_mult(x, y, z, w) -> float:
    """Multiplicative cross ratio (x - y)(z - w) / ((x - w)(z - y)); real for concyclic points."""
    num = (x.z - y.z) * (z.z - w.z)
    den = (x.z - w.z) * (z.z - y.z)
    if den == 0 or num == 0:
        raise Degenerate("cross ratio needs the four pairs to be distinct")
    return (num / den).real


def h2_cr_value(x, y, z, w) -> CrValue:
    """Cross ratio with the infinite conventions for coincident pairs."""
    adm = classify_pattern(h2_opposite(x, y), h2_opposite(z, w), h2_opposite(x, w), h2_opposite(z, y))
    if adm is not Admissibility.ALL_OPPOSITE:
        return convention_value(adm)
    return CrValue.finite(h2_cr(x, y, z, w))


# ---------------------------------------------------------------------------
# trees


@dataclass(frozen=True, eq=False)
class EndedTree:
    """A finite metric tree whose ends are rays attached at vertices.

    Edge lengths may be ints, floats or Fractions; Fractions keep all
    derived quantities exact.
    """

    vertices: tuple
    edges: tuple
    ends: dict
    _dist: dict = field(init=False, repr=False)
    _adj: dict = field(init=False, repr=False)

    def __post_init__(self):
        verts = tuple(self.vertices)
        edges = tuple((u, v, ln) for u, v, ln in self.edges)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "ends", dict(self.ends))
        vs = set(verts)
        if len(vs) != len(verts):
            raise ValueError("duplicate vertex ids")
        adj = defaultdict(list)
        for u, v, ln in edges:
            if u not in vs or v not in vs:
                raise ValueError(f"edge ({u}, {v}) uses an unknown vertex")
            if not ln > 0:
                raise ValueError(f"edge ({u}, {v}) has non-positive length")
            adj[u].append((v, ln))
            adj[v].append((u, ln))
        if len(edges) != len(verts) - 1:
            raise ValueError("a tree needs exactly |V| - 1 edges")
        if len(self.ends) < 3:
            raise ValueError("a thick tree needs at least three ends")
        for e, v in self.ends.items():
            if v not in vs:
                raise ValueError(f"end {e} is attached at unknown vertex {v}")
        dist = {}
        for s in verts:
            d = {s: 0}
            stack = [s]
            while stack:
                u = stack.pop()
                for v, ln in adj[u]:
                    if v not in d:
                        d[v] = d[u] + ln
                        stack.append(v)
            if len(d) != len(verts):
                raise ValueError("tree is not connected")
            dist[s] = d
        object.__setattr__(self, "_dist", dist)
        object.__setattr__(self, "_adj", dict(adj))

    def d(self, u, v):
        return self._dist[u][v]

    def attach(self, end):
        return self.ends[end]

    def neighbours(self, v):
        return self._adj.get(v, [])

    def scaled(self, factor) -> "EndedTree":
        return EndedTree(self.vertices, tuple((u, v, ln * factor) for u, v, ln in self.edges), self.ends)

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [[u, v, float(ln)] for u, v, ln in self.edges],
            "ends": [[e, v] for e, v in self.ends.items()],
        }

    @classmethod
    def from_json(cls, rec) -> "EndedTree":
        return cls(tuple(rec["vertices"]), tuple((u, v, ln) for u, v, ln in rec["edges"]),
                   {e: v for e, v in rec["ends"]})


def _half(v):
    return v * Fraction(1, 2) if isinstance(v, numbers.Rational) else v / 2


def _vertex_gromov(tree: EndedTree, a, b, o):
    return _half(tree.d(o, a) + tree.d(o, b) - tree.d(a, b))


def tree_gromov(tree: EndedTree, z, w, o):
    """(z|w)_o: the distance from o to the line joining the ends z and w."""
    if z == w:
        raise SameEnd(f"ends coincide: {z}")
    return _vertex_gromov(tree, tree.attach(z), tree.attach(w), o)


def tree_busemann(tree: EndedTree, z, o, p):
    """b_z(o, p) along the ray to the end z."""
    a = tree.attach(z)
    return tree.d(o, a) - tree.d(p, a)


def tree_cr(tree: EndedTree, z1, w1, z2, w2, o=None) -> CrValue:
    """cr(z1, w1, z2, w2) = -(z1|w1) - (z2|w2) + (z1|w2) + (z2|w1), infinite conventions included.

    Raises Inadmissible outside the domain of definition.
    """
    adm = classify_pattern(z1 != w1, z2 != w2, z1 != w2, z2 != w1)
    if adm is not Admissibility.ALL_OPPOSITE:
        return convention_value(adm)
    o = tree.vertices[0] if o is None else o
    g = lambda a, b: tree_gromov(tree, a, b, o)  # noqa: E731
    return CrValue.finite(-g(z1, w1) - g(z2, w2) + g(z1, w2) + g(z2, w1))


def _cr(tree, a, b, c, d):
    return tree_cr(tree, a, b, c, d).scalar


def median(tree: EndedTree, a, b, c):
    """The vertex where the three lines between the ends a, b, c meet."""
    va, vb, vc = (tree.attach(e) for e in (a, b, c))
    scale = max(1, tree.d(va, vb) + tree.d(vb, vc) + tree.d(va, vc))
    tol = 0 if _exact(tree) else 1e-12 * scale
    for v in tree.vertices:
        if all(abs(tree.d(p, v) + tree.d(v, q) - tree.d(p, q)) <= tol for p, q in ((va, vb), (vb, vc), (va, vc))):
            return v
    raise NotExtendable("no median vertex found")  # impossible in a tree


def _exact(tree: EndedTree) -> bool:
    return all(isinstance(ln, (int, Fraction)) for _, _, ln in tree.edges)


def gromov_at_median(tree: EndedTree, triple, x, y):
    """(x|y) based at the median of ``triple``, computed from cross ratios alone."""
    a, b, c = triple
    base = set(triple)
    if x == y:
        raise SameEnd(f"ends coincide: {x}")
    if x in base and y in base:
        return 0
    if x in base:
        x, y = y, x
    if y in base:
        # x is outside the triple: (x|y) is the largest of (x|p) - (x|r) = cr(x, r, s, p)
        others = [e for e in triple if e != y]
        diffs = [_cr(tree, x, r, s, y) for r, s in (others, others[::-1])]
        return max(0, *diffs)
    return gromov_at_median(tree, triple, x, b) + gromov_at_median(tree, triple, a, y) - _cr(tree, x, y, a, b)


def median_distance_from_cr(tree: EndedTree, t1, t2):
    """d(m(t1), m(t2)) predicted from cross ratios: the largest Gromov product of a pair of t2 at m(t1)."""
    return max(gromov_at_median(tree, t1, p, q) for p, q in itertools.combinations(t2, 2))


def cr_deviation(t1: EndedTree, t2: EndedTree, f: dict) -> float:
    """Largest |cr_{t1}(q) - cr_{t2}(f q)| over all finite ordered quadruples of ends."""
    ends = list(t1.ends)
    o1, o2 = t1.vertices[0], t2.vertices[0]
    g1 = {(a, b): tree_gromov(t1, a, b, o1) for a, b in itertools.permutations(ends, 2)}
    g2 = {(a, b): tree_gromov(t2, f[a], f[b], o2) for a, b in itertools.permutations(ends, 2)}
    worst = 0.0
    for x, y, z, w in itertools.product(ends, repeat=4):
        if x == y or z == w or x == w or z == y:
            continue
        c1 = -g1[x, y] - g1[z, w] + g1[x, w] + g1[z, y]
        c2 = -g2[x, y] - g2[z, w] + g2[x, w] + g2[z, y]
        worst = max(worst, abs(float(c1 - c2)))
    return worst


@dataclass
class TreeIsometry:
    """Vertex map on medians, plus the edges of the median subtree with their lengths in both trees."""

    vertex_map: dict
    edges: list
    max_distance_error: float

    def to_json(self) -> dict:
        return {
            "vertex_map": dict(sorted(self.vertex_map.items())),
            "edges": [[u, v, float(a), float(b)] for u, v, a, b in self.edges],
            "max_distance_error": self.max_distance_error,
        }


def tree_moebius_extend(t1: EndedTree, t2: EndedTree, f: dict, tol: float = 1e-9) -> TreeIsometry:
    """Extend a cross-ratio preserving bijection of ends to an isometry of median subtrees.

    Medians of end triples go to medians of the image triples; distances
    between medians are predicted from cross ratios and checked against the
    target metric.
    """
    if set(f) != set(t1.ends) or set(f.values()) != set(t2.ends) or len(set(f.values())) != len(f):
        raise ValueError("f must be a bijection between the end sets")
    dev = cr_deviation(t1, t2, f)
    if dev > tol:
        raise NotMoebius(f"cross ratios differ by up to {dev:.3g}", max_deviation=dev)
    triples = list(itertools.combinations(sorted(t1.ends), 3))
    vmap, rep = {}, {}
    for tri in triples:
        m1 = median(t1, *tri)
        m2 = median(t2, *(f[e] for e in tri))
        if vmap.setdefault(m1, m2) != m2:
            raise NotExtendable(f"median {m1} has two candidate images")
        rep.setdefault(m1, tri)
    if len(set(vmap.values())) != len(vmap):
        raise NotExtendable("two medians share an image")
    worst = 0.0
    meds = sorted(vmap)
    for u, v in itertools.combinations(meds, 2):
        predicted = median_distance_from_cr(t1, rep[u], rep[v])
        worst = max(worst, abs(float(predicted - t2.d(vmap[u], vmap[v]))), abs(float(predicted - t1.d(u, v))))
    if worst > tol:
        raise NotExtendable(f"median distances disagree by {worst:.3g}")
    edges = []
    slack = 0 if _exact(t1) else 1e-12 * max(1, max((ln for _, _, ln in t1.edges), default=1))
    for u, v in itertools.combinations(meds, 2):
        duv = t1.d(u, v)
        if not any(w not in (u, v) and abs(t1.d(u, w) + t1.d(w, v) - duv) <= slack for w in meds):
            edges.append((u, v, duv, t2.d(vmap[u], vmap[v])))
    return TreeIsometry(vmap, edges, worst)


def branch_distance(tree: EndedTree, pair_p, pair_q):
    """d(p, q) recovered as cr(z1, w2, z2, w1) for ends z1, w1 through p and z2, w2 through q."""
    z1, w1 = pair_p
    z2, w2 = pair_q
    value = tree_cr(tree, z1, w2, z2, w1)
    if not value.is_finite:
        raise Inadmissible("branch configuration needs four distinct ends")
    return value.scalar
