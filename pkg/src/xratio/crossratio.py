"""Gromov products and cross ratios of flags, scalar and vector valued.

Two independent evaluation routes exist for the scalar cross ratio:

* ``method="gromov"`` sums four closed-form Gromov products at a basepoint;
* ``method="wedge"`` uses projective wedge ratios and needs no basepoint.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import matnum
from .cartan import (
    FaceSignature,
    TypeVector,
    a_inner,
    corner,
    dual_basis,
    embed,
    involute_vector,
    project_to_face,
)
from .errors import BasepointNotInFlat, Inadmissible, NotGeneric, NotRegular, SignatureMismatch, TypeMismatch
from .flags import Flag, act, act_linear, is_opposite, make_flag, ortho_opposite
from .spdspace import (
    FlatPoint,
    IdealPoint,
    SpdPoint,
    busemann,
    c_metric,
    factors,
    retract,
    retract_flat,
    translated_frame,
)


class Kind(str, Enum):
    FINITE = "finite"
    PLUS_INF = "plus_inf"
    MINUS_INF = "minus_inf"


class Admissibility(str, Enum):
    ALL_OPPOSITE = "all_opposite"
    ADMISSIBLE_MINUS = "admissible_minus"
    ADMISSIBLE_PLUS = "admissible_plus"
    INADMISSIBLE = "inadmissible"


@dataclass(frozen=True, eq=False)
class CrValue:
    """An extended-real (or extended-vector) value."""

    kind: Kind
    scalar: float | None = None
    vector: np.ndarray | None = None

    @property
    def is_finite(self) -> bool:
        return self.kind is Kind.FINITE

    @classmethod
    def finite(cls, value) -> "CrValue":
        if isinstance(value, numbers.Rational):
            return cls(Kind.FINITE, scalar=value)  # exact tree arithmetic stays exact
        if np.ndim(value) == 0:
            return cls(Kind.FINITE, scalar=float(value))
        return cls(Kind.FINITE, vector=np.asarray(value, dtype=float))

    def to_json(self) -> dict:
        if self.kind is not Kind.FINITE:
            return {"kind": self.kind.value}
        if self.vector is not None:
            return {"kind": "finite", "vector": [float(v) for v in self.vector]}
        return {"kind": "finite", "scalar": float(self.scalar)}

    @classmethod
    def from_json(cls, rec) -> "CrValue":
        kind = Kind(rec["kind"])
        if kind is not Kind.FINITE:
            return cls(kind)
        if "vector" in rec:
            return cls.finite(np.array(rec["vector"], dtype=float))
        return cls.finite(float(rec["scalar"]))


PLUS_INF = CrValue(Kind.PLUS_INF)
MINUS_INF = CrValue(Kind.MINUS_INF)


@dataclass(frozen=True, eq=False)
class Quadruple:
    """(x, y, z, w) with x, z of one type and y, w of the opposite type."""

    x: Flag
    y: Flag
    z: Flag
    w: Flag

    def __post_init__(self):
        if self.x.signature != self.z.signature or self.y.signature != self.w.signature:
            raise SignatureMismatch("x, z and y, w must share signatures")
        if self.y.signature != self.x.signature.involute():
            raise SignatureMismatch("y, w must have the opposite signature of x, z")

    @property
    def n(self) -> int:
        return self.x.n

    @property
    def face(self) -> FaceSignature:
        return self.x.signature

    def truncate(self, face: FaceSignature) -> "Quadruple":
        iface = face.involute()
        return Quadruple(self.x.truncate(face), self.y.truncate(iface), self.z.truncate(face), self.w.truncate(iface))

    def act(self, g) -> "Quadruple":
        return Quadruple(*(act(g, f) for f in (self.x, self.y, self.z, self.w)))

    def to_json(self) -> dict:
        return {k: getattr(self, k).to_json() for k in "xyzw"}

    @classmethod
    def from_json(cls, rec) -> "Quadruple":
        return cls(*(Flag.from_json(rec[k]) for k in "xyzw"))


def _check_type(x: Flag, y: Flag, t: TypeVector):
    if t.n != x.n or not t.signature.is_face_of(x.signature):
        raise TypeMismatch(f"type signature {t.signature.dims} is not a face of {x.signature.dims}")
    if not t.signature.involute().is_face_of(y.signature):
        raise TypeMismatch(f"opposite type does not fit flag {y.signature.dims}")


def _log_abs_det(cols) -> float:
    d = abs(matnum.det(cols))
    return math.log(d) if d > 0 else -math.inf


def gromov_closed(x: Flag, y: Flag, t: TypeVector, o: SpdPoint | None = None) -> CrValue:
    """(x|y)_{o,t} from the determinant formula with orthonormal representatives.

    A general basepoint is handled by translating o to the identity with
    o^{-1/2} and re-orthonormalizing both flags.
    """
    _check_type(x, y, t)
    face = t.signature
    if not is_opposite(x.truncate(face), y.truncate(face.involute())):
        return PLUS_INF
    n = x.n
    if o is None:
        kx, ky = x.basis, y.basis
    else:
        kx, ky = translated_frame(o, x), translated_frame(o, y)
    lam = embed(t)
    total = 0.0
    for m in face.steps:
        total += (lam[m] - lam[m - 1]) * _log_abs_det(np.hstack([kx[:, :m], ky[:, :n - m]]))
    return CrValue.finite(n * total)


def classify_pattern(xy: bool, zw: bool, xw: bool, zy: bool) -> Admissibility:
    if xy and zw and xw and zy:
        return Admissibility.ALL_OPPOSITE
    if xw and zy:
        return Admissibility.ADMISSIBLE_MINUS
    if xy and zw:
        return Admissibility.ADMISSIBLE_PLUS
    return Admissibility.INADMISSIBLE


def opposition_pattern(q: Quadruple) -> tuple[bool, bool, bool, bool]:
    return is_opposite(q.x, q.y), is_opposite(q.z, q.w), is_opposite(q.x, q.w), is_opposite(q.z, q.y)


def classify(q: Quadruple) -> Admissibility:
    return classify_pattern(*opposition_pattern(q))


def convention_value(adm: Admissibility) -> CrValue:
    """The value assigned to a quadruple that is not all-opposite."""
    if adm is Admissibility.ADMISSIBLE_MINUS:
        return MINUS_INF
    if adm is Admissibility.ADMISSIBLE_PLUS:
        return PLUS_INF
    raise Inadmissible("quadruple is outside the domain of the cross ratio")


def _wedge(a: Flag, b: Flag, m: int) -> float:
    n = a.n
    return matnum.det(np.hstack([a.basis[:, :m], b.basis[:, :n - m]]))


def cr_wedge(q: Quadruple, t: TypeVector) -> float:
    """Cross ratio of an all-opposite quadruple from projective wedge ratios."""
    lam = embed(t)
    total = 0.0
    for m in t.signature.steps:
        ratio = (_wedge(q.x, q.y, m) * _wedge(q.z, q.w, m)) / (_wedge(q.x, q.w, m) * _wedge(q.z, q.y, m))
        total += (lam[m - 1] - lam[m]) * math.log(abs(ratio))
    return q.n * total


def cr_gromov(q: Quadruple, t: TypeVector, o: SpdPoint | None = None) -> float:
    """Cross ratio of an all-opposite quadruple as the alternating sum of Gromov products."""
    g = [gromov_closed(a, b, t, o).scalar for a, b in ((q.x, q.y), (q.z, q.w), (q.x, q.w), (q.z, q.y))]
    return -g[0] - g[1] + g[2] + g[3]


def cr_scalar(q: Quadruple, t: TypeVector, o: SpdPoint | None = None, method: str | None = None) -> CrValue:
    """cr_t(x, y, z, w) = -(x|y) - (z|w) + (x|w) + (z|y), with the infinite conventions.

    ``method`` defaults to ``"wedge"`` without a basepoint and ``"gromov"`` with one.
    """
    _check_type(q.x, q.y, t)
    adm = classify(q.truncate(t.signature))
    if adm is not Admissibility.ALL_OPPOSITE:
        return convention_value(adm)
    method = method or ("wedge" if o is None else "gromov")
    if method == "wedge":
        return CrValue.finite(cr_wedge(q, t))
    if method == "gromov":
        return CrValue.finite(cr_gromov(q, t, o))
    raise ValueError(f"unknown method {method!r}")


def cr_vector(q: Quadruple, face: FaceSignature | None = None, o: SpdPoint | None = None,
              method: str | None = None) -> CrValue:
    """Vector cross ratio: sum over corners xi_i of the face of cr_{xi_i} alpha_i."""
    face = q.face if face is None else face
    if not face.is_face_of(q.face):
        raise SignatureMismatch(f"{face.dims} is not a face of {q.face.dims}")
    sub = q.truncate(face)
    adm = classify(sub)
    if adm is not Admissibility.ALL_OPPOSITE:
        return convention_value(adm)
    out = np.zeros(q.n)
    for j, alpha in dual_basis(face).items():
        out += cr_scalar(sub, corner(q.n, j), o, method).scalar * alpha
    return CrValue.finite(out)


def cr_project(v: CrValue, face: FaceSignature, q: Quadruple | None = None) -> CrValue:
    """Orthogonal projection of a chamber-valued cross ratio onto a face subspace.

    With ``q`` given, the infinite conventions of the face-truncated quadruple
    are applied first.
    """
    if q is not None:
        adm = classify(q.truncate(face))
        if adm is not Admissibility.ALL_OPPOSITE:
            return convention_value(adm)
    if not v.is_finite:
        return v
    return CrValue.finite(project_to_face(v.vector, face))


def eigenflags(g) -> tuple[Flag, Flag, np.ndarray]:
    """Attracting and repelling full flags of a regular hyperbolic g, and log|eigenvalues| descending."""
    gm = matnum.as_matrix(g)
    n = gm.shape[0]
    vals, vecs = np.linalg.eig(gm)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.max(np.abs(vals.imag)) > 1e-9 * scale or np.max(np.abs(vecs.imag)) > 1e-9:
        raise NotRegular("g has non-real eigenvalues")
    mods = np.abs(vals.real)
    order = np.argsort(-mods)
    logs = np.log(mods[order])
    if np.min(-np.diff(logs)) < 1e-9:
        raise NotRegular("eigenvalue moduli are not distinct")
    basis = vecs.real[:, order]
    full = FaceSignature.full(n)
    return make_flag(n, full, basis), make_flag(n, full, basis[:, ::-1]), logs


def period(g, x: Flag) -> tuple[CrValue, np.ndarray]:
    """cr(g^-, g x, g^+, x) and the translation vector of g in calibrated coordinates.

    The translation vector is c * 2 log|eig| (descending), the displacement of
    g along its axis measured in the same units as cross ratios.
    """
    gplus, gminus, logs = eigenflags(g)
    if not x.signature.is_full():
        raise SignatureMismatch("period needs a full flag x")
    if not (is_opposite(gplus, x) and is_opposite(gminus, x)):
        raise NotGeneric("x is not opposite to both eigenflags of g")
    q = Quadruple(gminus, act(g, x), gplus, x)
    ell = c_metric(x.n) * 2.0 * logs
    return cr_vector(q), ell


def symmetrized_translation(ell) -> np.ndarray:
    return 0.5 * (np.asarray(ell) + involute_vector(ell))


def flat_frame(x: Flag, y: Flag, o: SpdPoint, tol: float = 1e-8) -> np.ndarray:
    """Basis B with o = B B^T whose columns are adapted to both chambers x and y.

    Raises BasepointNotInFlat unless o lies on the flat joining x and y.
    """
    if not (x.signature.is_full() and y.signature.is_full()):
        raise SignatureMismatch("flat coordinates need full flags")
    opp = ortho_opposite(x, o)
    n = x.n
    residual = 0.0
    for d in range(1, n):
        a = opp.basis[:, :d]
        b = y.basis[:, :d]
        residual = max(residual, float(np.max(np.abs(b - a @ (a.T @ b)))))
    if residual > tol:
        raise BasepointNotInFlat(f"basepoint is off the flat (residual {residual:.3g})")
    g, b = factors(o)
    if o.is_factored:
        return g @ matnum.spd_sqrt(b) @ translated_frame(b, act_linear(matnum.inv(g), x))
    return matnum.spd_sqrt(o.mat) @ translated_frame(o, x)


def flat_coordinates(p: SpdPoint, frame: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Calibrated coordinates of a point of the flat, relative to the frame's basepoint."""
    g, b = factors(p)
    w = matnum.solve(frame, g)
    d = w @ b @ w.T
    off = d - np.diag(np.diag(d))
    if np.max(np.abs(off)) > tol * np.max(np.abs(np.diag(d))):
        raise BasepointNotInFlat(f"point is off the flat (residual {np.max(np.abs(off)):.3g})")
    return c_metric(p.n) * np.log(np.diag(d))


def _retract_word_flat(q: Quadruple, p: FlatPoint) -> FlatPoint:
    p = retract_flat(p, q.y, q.z)
    p = retract_flat(p, q.z, q.w)
    p = retract_flat(p, q.w, q.x)
    return retract_flat(p, q.x, q.y)


def retract_word(q: Quadruple, o: SpdPoint) -> SpdPoint:
    """rho_x rho_w rho_z rho_y (o): retract around the four flats of the quadruple."""
    return _retract_word_flat(q, FlatPoint.from_spd(o)).to_spd()


def geom_interp(q: Quadruple, o: SpdPoint | None = None) -> np.ndarray:
    """Flat displacement of the retract word; equals twice the vector cross ratio.

    Without a basepoint, the retraction of the identity onto the flat of
    (x, y) is used. Points stay in log-diagonal form on each flat, so far
    excursions of the word cost no precision.
    """
    if classify(q) is not Admissibility.ALL_OPPOSITE:
        raise Inadmissible("geometric interpretation needs an all-opposite quadruple")
    if o is None:
        start = retract_flat(FlatPoint.from_spd(SpdPoint.identity(q.n)), q.x, q.y)
    else:
        flat_frame(q.x, q.y, o)  # raises unless o lies on the flat
        start = retract_flat(FlatPoint.from_spd(o), q.x, q.y)
    end = _retract_word_flat(q, start)
    return c_metric(q.n) * (end.logd - start.logd)


def gromov_via_busemann(x: Flag, y: Flag, t: TypeVector, o: SpdPoint) -> float:
    """(1/2) b_{x_t}(o, rho_{c_y, c_x}(o)) with the stored chambers completing x and y."""
    _check_type(x, y, t)
    cx, cy = x.completion(), y.completion()
    p = retract(o, cy, cx)
    return 0.5 * busemann(IdealPoint(x.truncate(t.signature), t), o, p)


def face_coefficients(t: TypeVector) -> dict[int, float]:
    """Coefficients a_i with embed(t) = sum a_i embed(xi_i) over the corners of t's face."""
    return {j: a_inner(embed(t), alpha) for j, alpha in dual_basis(t.signature).items()}

