"""Products of model spaces with weighted types.

A boundary point of a product is a tuple of factor boundary points; a type
is a tuple of factor types together with weights mu_i >= 0, sum mu_i^2 = 1.
Gromov products and cross ratios are the mu-weighted sums of the factor
values. Factors with mu_i = 0 are inactive and ignored.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .cartan import TypeVector, embed, involute
from .crossratio import Admissibility, CrValue, PLUS_INF, Quadruple, classify_pattern, convention_value
from .crossratio import cr_scalar, gromov_closed
from .errors import Ambiguous, ArityMismatch, Inconsistent, TypeMismatch
from .flags import Flag, is_opposite, make_flag
from .rank1 import DiscBoundaryPoint, EndedTree, h2_cr, h2_gromov, h2_opposite, tree_cr, tree_gromov
from .spdspace import SpdPoint

WEIGHT_TOL = 1e-12


# ---------------------------------------------------------------------------
# factor models; every factor carries a metric scale (cr of alpha M is alpha cr of M)


@dataclass(frozen=True)
class SpdFactor:
    n: int
    scale: float = 1.0
    kind: str = field(default="spd", init=False)

    def opposite(self, a: Flag, b: Flag) -> bool:
        return is_opposite(a, b)

    def gromov(self, a: Flag, b: Flag, t: TypeVector, o=None) -> float:
        return self.scale * gromov_closed(a, b, t, o).scalar

    def cr(self, x, y, z, w, t: TypeVector) -> float:
        return self.scale * cr_scalar(Quadruple(x, y, z, w), t).scalar

    def to_json(self) -> dict:
        return {"kind": "spd", "n": self.n, "scale": self.scale}


@dataclass(frozen=True)
class H2Factor:
    """The hyperbolic disc; the basepoint is always the centre."""

    scale: float = 1.0
    kind: str = field(default="h2", init=False)

    def opposite(self, a: DiscBoundaryPoint, b: DiscBoundaryPoint) -> bool:
        return h2_opposite(a, b)

    def gromov(self, a, b, t=None, o=None) -> float:
        return self.scale * h2_gromov(a, b)

    def cr(self, x, y, z, w, t=None) -> float:
        return self.scale * h2_cr(x, y, z, w)

    def to_json(self) -> dict:
        return {"kind": "h2", "scale": self.scale}


@dataclass(frozen=True, eq=False)
class TreeFactor:
    tree: EndedTree
    scale: float = 1.0
    kind: str = field(default="tree", init=False)

    def opposite(self, a, b) -> bool:
        return a != b

    def gromov(self, a, b, t=None, o=None) -> float:
        o = self.tree.vertices[0] if o is None else o
        return self.scale * tree_gromov(self.tree, a, b, o)

    def cr(self, x, y, z, w, t=None) -> float:
        return self.scale * tree_cr(self.tree, x, y, z, w).scalar

    def to_json(self) -> dict:
        return {"kind": "tree", "tree": self.tree.to_json(), "scale": self.scale}


@dataclass(frozen=True)
class FlatFactor:
    """Euclidean space; boundary points are unit vectors, opposite when antipodal."""

    dim: int
    scale: float = 1.0
    kind: str = field(default="flat", init=False)

    def opposite(self, a, b) -> bool:
        return bool(np.allclose(np.asarray(a), -np.asarray(b), atol=1e-12))

    def gromov(self, a, b, t=None, o=None) -> float:
        # rays o + t a and o + t b end up exactly 2t apart when antipodal
        return 0.0

    def cr(self, x, y, z, w, t=None) -> float:
        return 0.0

    def to_json(self) -> dict:
        return {"kind": "flat", "dim": self.dim, "scale": self.scale}


def factor_from_json(rec):
    kind = rec["kind"]
    scale = float(rec.get("scale", 1.0))
    if kind == "spd":
        return SpdFactor(int(rec["n"]), scale)
    if kind == "h2":
        return H2Factor(scale)
    if kind == "tree":
        return TreeFactor(EndedTree.from_json(rec["tree"]), scale)
    if kind == "flat":
        return FlatFactor(int(rec["dim"]), scale)
    raise ValueError(f"unknown factor kind {kind!r}")


@dataclass(frozen=True)
class ProductType:
    """Factor types (a TypeVector for SL(n) factors, None for rank-one factors) and weights."""

    factor_types: tuple
    weights: tuple

    def __post_init__(self):
        w = tuple(float(m) for m in self.weights)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "factor_types", tuple(self.factor_types))
        if len(w) != len(self.factor_types):
            raise ArityMismatch("one weight per factor is required")
        if any(m < 0 for m in w) or abs(sum(m * m for m in w) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights {w} must be non-negative with unit square sum")

    @property
    def active(self) -> tuple[bool, ...]:
        return tuple(m > 0 for m in self.weights)

    def involute(self) -> "ProductType":
        return ProductType(tuple(involute(t) if isinstance(t, TypeVector) else t for t in self.factor_types),
                           self.weights)

    @classmethod
    def angle(cls, alpha: float, factor_types=(None, None)) -> "ProductType":
        return cls(tuple(factor_types), (math.cos(alpha), math.sin(alpha)))


@dataclass(frozen=True, eq=False)
class ProductSpace:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def to_json(self, pt: ProductType | None = None) -> dict:
        rec = {"factors": [f.to_json() for f in self.factors]}
        if pt is not None:
            rec["weights"] = list(pt.weights)
        return rec

    @classmethod
    def from_json(cls, rec) -> "ProductSpace":
        return cls(tuple(factor_from_json(f) for f in rec["factors"]))


def _check_arity(space: ProductSpace, pt: ProductType, *points):
    k = len(space.factors)
    if len(pt.weights) != k or any(len(p) != k for p in points):
        raise ArityMismatch(f"expected {k} factors")


def product_opposite(space: ProductSpace, pt: ProductType, a, b) -> bool:
    return all(f.opposite(ai, bi) for f, ai, bi, on in zip(space.factors, a, b, pt.active) if on)


def product_gromov(x, y, space: ProductSpace, pt: ProductType, o=None) -> CrValue:
    """sum mu_i (x_i|y_i)_{o_i}; +inf as soon as an active factor pair is not opposite."""
    _check_arity(space, pt, x, y)
    o = (None,) * len(space.factors) if o is None else tuple(o)
    if not product_opposite(space, pt, x, y):
        return PLUS_INF
    total = 0.0
    for f, t, mu, xi, yi, oi in zip(space.factors, pt.factor_types, pt.weights, x, y, o):
        if mu > 0:
            total += mu * f.gromov(xi, yi, t, oi)
    return CrValue.finite(total)


def product_classify(q, space: ProductSpace, pt: ProductType) -> Admissibility:
    x, y, z, w = q
    opp = lambda a, b: product_opposite(space, pt, a, b)  # noqa: E731
    return classify_pattern(opp(x, y), opp(z, w), opp(x, w), opp(z, y))


def product_cr(q, space: ProductSpace, pt: ProductType, o=None) -> CrValue:
    """Cross ratio of a product quadruple (x, y, z, w).

    Without basepoints the factor cross ratios are summed; with basepoints
    the four product Gromov products are combined instead.
    """
    x, y, z, w = q
    _check_arity(space, pt, x, y, z, w)
    adm = product_classify(q, space, pt)
    if adm is not Admissibility.ALL_OPPOSITE:
        return convention_value(adm)
    if o is not None:
        g = [product_gromov(a, b, space, pt, o).scalar for a, b in ((x, y), (z, w), (x, w), (z, y))]
        return CrValue.finite(-g[0] - g[1] + g[2] + g[3])
    total = 0.0
    for i, (f, t, mu) in enumerate(zip(space.factors, pt.factor_types, pt.weights)):
        if mu > 0:
            total += mu * f.cr(x[i], y[i], z[i], w[i], t)
    return CrValue.finite(total)


# ---------------------------------------------------------------------------
# block-diagonal embedding of products of SL(n_i) spaces


def block_point(points) -> SpdPoint:
    """diag(A_1, ..., A_k) for unimodular SPD blocks."""
    mats = [p.mat for p in points]
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n))
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return SpdPoint.normalized(out)


def block_flag(flags, types, weights, tol: float = 1e-12) -> tuple[Flag, TypeVector]:
    """Boundary point of the block-diagonal subspace as a flag and type of the big space.

    Each block contributes its orthonormal columns with eigen-directions
    mu_i * embed(type_i); sorting these values in decreasing order gives the
    flag, and grouping equal values gives its multiplicities. The resulting
    type is unit because sum mu_i^2 = 1.
    """
    ns = [f.n for f in flags]
    n = sum(ns)
    cols, vals = [], []
    offset = 0
    for f, t, mu in zip(flags, types, weights):
        if t.signature != f.signature:
            raise TypeMismatch("block type must match its flag")
        lam = embed(t)
        for j in range(f.n):
            col = np.zeros(n)
            col[offset:offset + f.n] = f.basis[:, j]
            cols.append(col)
            vals.append(mu * lam[j])
        offset += f.n
    order = sorted(range(n), key=lambda j: -vals[j])
    basis = np.array([cols[j] for j in order]).T
    sorted_vals = [vals[j] for j in order]
    groups = [[sorted_vals[0]]]
    for v in sorted_vals[1:]:
        if groups[-1][-1] - v <= tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    mults = [len(g) for g in groups]
    values = [float(np.mean(g)) for g in groups]
    t = TypeVector(n, tuple(values), tuple(mults))
    return make_flag(n, t.signature, basis), t


def block_scales(ns) -> tuple[float, ...]:
    """Metric scale of each block inside the big space: c_N / c_{n_i} = N / n_i."""
    total = sum(ns)
    return tuple(total / n for n in ns)


# ---------------------------------------------------------------------------
# isolating factors and recovering factor rescalings


def flip(point_quad):
    """(x, y, z, w) -> (z, y, x, w), which negates the cross ratio."""
    x, y, z, w = point_quad
    return (z, y, x, w)


def isolate_factor(space: ProductSpace, pt: ProductType, i: int, factor_quad, reference) -> float:
    """mu_i cr_i(factor_quad), read off from two product cross ratios.

    ``reference`` is a per-factor list of all-opposite quadruples. Factor i is
    replaced by ``factor_quad`` and the product cross ratio is evaluated with
    the remaining factors as given and with their sign flipped; the average
    cancels every other factor.
    """
    k = len(space.factors)
    plain = [factor_quad if j == i else reference[j] for j in range(k)]
    flipped = [factor_quad if j == i else flip(reference[j]) for j in range(k)]
    values = []
    for quads in (plain, flipped):
        q = tuple(tuple(quads[j][slot] for j in range(k)) for slot in range(4))
        v = product_cr(q, space, pt)
        if not v.is_finite:
            raise Inconsistent("isolation needs all-opposite product quadruples")
        values.append(v.scalar)
    return 0.5 * (values[0] + values[1])


@dataclass(frozen=True)
class SplitRecovery:
    """Factor permutation and per-factor ratios cr_image / cr_domain (the metric rescalings)."""

    permutation: tuple[int, ...]
    ratios: tuple[float, ...]
    residual: float

    def to_json(self) -> dict:
        return {"permutation": list(self.permutation), "ratios": list(self.ratios), "residual": self.residual}


def factor_split_recover(domain, image, permutations=None, tol: float = 1e-8) -> SplitRecovery:
    """Recover how a product map permutes factors and rescales each one.

    ``domain[s][i]`` is the factor-i cross ratio of sample s and ``image[s][j]``
    the factor-j cross ratio of its image. For the right permutation p,
    image[:, p(i)] = r_i * domain[:, i] with r_i > 0 for every factor.
    """
    d = np.asarray(domain, dtype=float)
    m = np.asarray(image, dtype=float)
    if d.shape != m.shape or d.ndim != 2:
        raise ArityMismatch("domain and image samples must have the same shape")
    k = d.shape[1]
    for i in range(k):
        if np.count_nonzero(np.abs(d[:, i]) > tol) < 2:
            raise Ambiguous(f"factor {i} needs at least two samples with non-zero cross ratio")
    candidates = list(itertools.permutations(range(k))) if permutations is None else [tuple(p) for p in permutations]
    fits = []
    for perm in candidates:
        ratios, worst = [], 0.0
        for i in range(k):
            a, b = d[:, i], m[:, perm[i]]
            r = float(a @ b / (a @ a))
            ratios.append(r)
            worst = max(worst, float(np.max(np.abs(b - r * a))))
        if worst <= tol * max(1.0, float(np.max(np.abs(m)))) and all(r > 0 for r in ratios):
            fits.append(SplitRecovery(tuple(perm), tuple(ratios), worst))
    if not fits:
        raise Inconsistent("no candidate permutation fits the samples")
    if len(fits) > 1:
        raise Ambiguous(f"{len(fits)} permutations fit the samples")
    return fits[0]


def regular_weights(k: int) -> tuple[float, ...]:
    return tuple([1.0 / math.sqrt(k)] * k)


def normalize_weights(w) -> tuple[float, ...]:
    w = np.asarray(w, dtype=float)
    return tuple(w / np.linalg.norm(w))


def block_cr_direct(quads, types, weights, basepoints=None) -> CrValue:
    """Cross ratio of block-embedded quadruples, computed in the big space.

    ``quads[i]`` is the (x, y, z, w) flag quadruple of block i with x-type ``types[i]``.
    """
    itypes = [involute(t) for t in types]
    x, tx = block_flag([q[0] for q in quads], types, weights)
    y, _ = block_flag([q[1] for q in quads], itypes, weights)
    z, _ = block_flag([q[2] for q in quads], types, weights)
    w, _ = block_flag([q[3] for q in quads], itypes, weights)
    o = None if basepoints is None else block_point(basepoints)
    return cr_scalar(Quadruple(x, y, z, w), tx, o)


def factor_cr_table(space: ProductSpace, pt: ProductType, samples, reference) -> np.ndarray:
    """Per-factor cross ratios cr_i of product quadruples, read off product cross ratios only.

    ``samples`` are product quadruples (x, y, z, w) of per-factor points.
    Each entry is isolate_factor(...) / mu_i, so only active factors are allowed.
    """
    k = len(space.factors)
    if not all(pt.active):
        raise Ambiguous("inactive factors cannot be observed through the product cross ratio")
    out = np.zeros((len(samples), k))
    for s, q in enumerate(samples):
        for i in range(k):
            fq = tuple(q[slot][i] for slot in range(4))
            out[s, i] = isolate_factor(space, pt, i, fq, reference) / pt.weights[i]
    return out


def apply_pointwise(f, q):
    """Image of a product quadruple under a map of product boundary points."""
    return tuple(f(p) for p in q)
