"""Auditing boundary maps for cross-ratio and opposition preservation.

All checks return reports instead of raising on failure. Samples are full
(or sufficiently fine) flags; each one may occupy any slot of a quadruple,
so cross ratios are assembled from tables of wedge determinants.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import matnum
from .cartan import FaceSignature, TypeVector, embed
from .crossratio import Admissibility, CrValue, Kind, Quadruple, classify_pattern, cr_scalar
from .errors import CannotSeparate, DimensionMismatch
from .flags import OPPOSITE_TOL, Flag, act, is_opposite, make_flag

MOEBIUS_THRESHOLD = 1e-7
EXHAUSTIVE_LIMIT = 8
DEFAULT_BUDGET = 2000


@dataclass(frozen=True, eq=False)
class SampledMap:
    """A boundary map known on finitely many flags.

    ``codomain_scale`` is the factor by which the codomain metric is
    scaled; image cross ratios are multiplied by it.
    """

    domain: tuple
    images: tuple
    provenance: str = "explicit table"
    codomain_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.domain) != len(self.images):
            raise DimensionMismatch("domain and image samples must be aligned")

    def __len__(self) -> int:
        return len(self.domain)

    @classmethod
    def from_matrix(cls, g, domain) -> "SampledMap":
        return cls(tuple(domain), tuple(act(g, x) for x in domain), "matrix-induced")

    @classmethod
    def from_permutation(cls, perm, domain) -> "SampledMap":
        domain = tuple(domain)
        return cls(domain, tuple(domain[p] for p in perm), "permutation")

    def to_json(self) -> dict:
        return {
            "domain": [x.to_json() for x in self.domain],
            "images": [y.to_json() for y in self.images],
            "provenance": self.provenance,
            "codomain_scale": self.codomain_scale,
        }

    @classmethod
    def from_json(cls, rec) -> "SampledMap":
        return cls(tuple(Flag.from_json(r) for r in rec["domain"]), tuple(Flag.from_json(r) for r in rec["images"]),
                   rec.get("provenance", "explicit table"), float(rec.get("codomain_scale", 1.0)))


class _WedgeTable:
    """log|det(a_i[:, :m] | a_j[:, :n-m])| for every ordered pair and every step m of a face."""

    def __init__(self, flags, t: TypeVector):
        n = t.n
        self.steps = t.signature.steps
        lam = embed(t)
        self.gaps = np.array([lam[m - 1] - lam[m] for m in self.steps])
        self.n = n
        k = len(flags)
        self.logs = np.zeros((k, k, len(self.steps)))
        self.opp = np.zeros((k, k), dtype=bool)
        for i, j in itertools.product(range(k), repeat=2):
            dets = [abs(matnum.det(np.hstack([flags[i].basis[:, :m], flags[j].basis[:, :n - m]])))
                    for m in self.steps]
            self.opp[i, j] = all(d > OPPOSITE_TOL for d in dets)
            self.logs[i, j] = [math.log(d) if d > 0 else -math.inf for d in dets]

    def classify(self, x, y, z, w) -> Admissibility:
        o = self.opp
        return classify_pattern(o[x, y], o[z, w], o[x, w], o[z, y])

    def cr(self, x, y, z, w) -> float:
        lg = self.logs
        return self.n * float(self.gaps @ (lg[x, y] + lg[z, w] - lg[x, w] - lg[z, y]))


def _quadruples(k: int, budget: int, rng):
    if k <= EXHAUSTIVE_LIMIT:
        return list(itertools.permutations(range(k), 4)), True
    picks = [tuple(int(i) for i in rng.choice(k, size=4, replace=False)) for _ in range(budget)]
    return picks, False


@dataclass
class MoebiusReport:
    max_deviation: float
    quadruples: int
    mismatches: int
    verdict: str
    seed: int
    exhaustive: bool
    threshold: float
    worst: tuple | None = field(default=None)

    @property
    def is_moebius(self) -> bool:
        return self.verdict == "moebius"

    def to_json(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "quadruples": self.quadruples,
            "mismatches": self.mismatches,
            "verdict": self.verdict,
            "seed": self.seed,
            "exhaustive": self.exhaustive,
            "threshold": self.threshold,
            "worst": None if self.worst is None else list(self.worst),
        }


def check_moebius(f: SampledMap, t: TypeVector, budget: int = DEFAULT_BUDGET, seed: int = 42,
                  threshold: float = MOEBIUS_THRESHOLD, t_image: TypeVector | None = None) -> MoebiusReport:
    """Compare cr_t on sampled quadruples with cr on their images.

    Quadruples of distinct samples are enumerated exhaustively up to eight
    samples and drawn at random (seeded) beyond that. A quadruple whose
    admissibility class changes under f counts as a mismatch; for
    quadruples that are finite on both sides the deviation is
    |cr(q) - scale * cr(f q)|. Inadmissible quadruples on both sides are skipped.
    """
    t_image = t if t_image is None else t_image
    rng = np.random.default_rng(seed)
    dom = _WedgeTable(f.domain, t)
    img = _WedgeTable(f.images, t_image)
    quads, exhaustive = _quadruples(len(f), budget, rng)
    worst, worst_q, mismatches, counted = 0.0, None, 0, 0
    for q in quads:
        a, b = dom.classify(*q), img.classify(*q)
        if a is not b:
            mismatches += 1
            continue
        counted += 1
        if a is Admissibility.ALL_OPPOSITE:
            dev = abs(dom.cr(*q) - f.codomain_scale * img.cr(*q))
            if dev > worst:
                worst, worst_q = dev, q
    verdict = "moebius" if worst <= threshold and mismatches == 0 else "not_moebius"
    return MoebiusReport(worst, counted + mismatches, mismatches, verdict, seed, exhaustive, threshold, worst_q)


@dataclass
class OppositionReport:
    violations: list
    pairs: int

    @property
    def preserving(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"violations": [list(v) for v in self.violations], "pairs": self.pairs, "preserving": self.preserving}


def check_opposition_preserving(f: SampledMap, face: FaceSignature | None = None) -> OppositionReport:
    """Ordered sample pairs (i, j) where x_i op x_j and f(x_i) op f(x_j) disagree."""
    face = f.domain[0].signature if face is None else face
    iface = face.involute()
    violations = []
    k = len(f)
    for i, j in itertools.permutations(range(k), 2):
        before = is_opposite(f.domain[i].truncate(face), f.domain[j].truncate(iface))
        after = is_opposite(f.images[i].truncate(face), f.images[j].truncate(iface))
        if before != after:
            violations.append((i, j))
    return OppositionReport(violations, k * (k - 1))


def common_apartment(x: Flag, y: Flag, tol: float = 1e-10) -> tuple[np.ndarray, tuple[int, ...]]:
    """A basis B with x the flag of B and y the flag of B with columns reordered.

    Returns (B, order) with y = flag of B[:, order]. Computed by a Bruhat
    elimination of the y-basis written in x-coordinates: upper-triangular
    row operations keep x fixed, upper-triangular column operations keep y fixed.
    """
    n = x.n
    xb = x.completion().basis
    m = matnum.solve(xb, y.completion().basis)
    e = np.eye(n)
    used = []
    order = []
    scale = max(1.0, float(np.max(np.abs(m))))
    for j in range(n):
        col = m[:, j]
        rows = [i for i in range(n) if i not in used and abs(col[i]) > tol * scale]
        if not rows:
            raise DimensionMismatch("flag basis is singular")
        p = rows[-1]
        for i in range(p):
            if col[i] != 0.0:
                c = col[i] / col[p]
                m[i, :] -= c * m[p, :]
                e[i, :] -= c * e[p, :]
        for k in range(j + 1, n):
            m[:, k] -= (m[p, k] / m[p, j]) * m[:, j]
        used.append(p)
        order.append(p)
    return xb @ matnum.inv(e), tuple(order)


@dataclass
class InjectivityWitness:
    """Flags a, z, w with cr(x, a, z, w) finite and cr(y, a, z, w) = -inf.

    If f(x) = f(y), the images of these two quadruples coincide, so f
    cannot preserve both values.
    """

    a: Flag
    z: Flag
    w: Flag
    quad_x: Quadruple
    quad_y: Quadruple
    value_x: CrValue
    value_y: CrValue

    def to_json(self) -> dict:
        return {
            "a": self.a.to_json(), "z": self.z.to_json(), "w": self.w.to_json(),
            "value_x": self.value_x.to_json(), "value_y": self.value_y.to_json(),
        }


def _witness_from(x, y, a, z, w, t):
    face, iface = t.signature, t.signature.involute()
    qx = Quadruple(x.truncate(face), a.truncate(iface), z.truncate(face), w.truncate(iface))
    qy = Quadruple(y.truncate(face), a.truncate(iface), z.truncate(face), w.truncate(iface))
    vx, vy = cr_scalar(qx, t), cr_scalar(qy, t)
    if vx.is_finite and vy.kind is Kind.MINUS_INF:
        return InjectivityWitness(a, z, w, qx, qy, vx, vy)
    return None


def _separates(x, y, a, z, w, face) -> bool:
    iface = face.involute()
    op = lambda p, q: is_opposite(p.truncate(face), q.truncate(iface))  # noqa: E731
    return op(x, a) and not op(y, a) and op(z, a) and op(z, w) and op(x, w) and op(y, w)


def injectivity_witness(x: Flag, y: Flag, t: TypeVector, f: SampledMap | None = None, construct: bool = True,
                        seed: int = 42, attempts: int = 100) -> InjectivityWitness:
    """Separate two distinct flags by cross ratios.

    a is opposite x but not y, z is opposite a and w, and w is opposite x
    and y. With ``construct`` the flag a is read off a common apartment of
    x and y and z, w are drawn at random; otherwise all three are searched
    for among the samples of ``f``.
    """
    face = t.signature
    if x.truncate(face).same_as(y.truncate(face)):
        raise ValueError("x and y must be distinct flags of the given type")
    if f is not None:
        ix = [i for i, d in enumerate(f.domain) if d.truncate(face).same_as(x.truncate(face))]
        iy = [i for i, d in enumerate(f.domain) if d.truncate(face).same_as(y.truncate(face))]
        if ix and iy and not f.images[ix[0]].truncate(face).same_as(f.images[iy[0]].truncate(face)):
            raise ValueError("f does not identify x and y")
    if not construct:
        pool = [] if f is None else list(f.domain)
        for a, z, w in itertools.permutations(pool, 3):
            if _separates(x, y, a, z, w, face):
                wit = _witness_from(x, y, a, z, w, t)
                if wit is not None:
                    return wit
        raise CannotSeparate("no flags in the sample realize the separating configuration; "
                             "add a flag opposite x but not y and two generic flags")
    basis, _ = common_apartment(x, y)
    n = x.n
    a = make_flag(n, FaceSignature.full(n), basis[:, ::-1])
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        z = make_flag(n, FaceSignature.full(n), rng.normal(size=(n, n)))
        w = make_flag(n, FaceSignature.full(n), rng.normal(size=(n, n)))
        if _separates(x, y, a, z, w, face):
            wit = _witness_from(x, y, a, z, w, t)
            if wit is not None:
                return wit
    raise CannotSeparate(f"no generic z, w found in {attempts} attempts")
