"""Cartan data for SL(n): types, the opposition involution, corners and dual vectors.

The Cartan subspace is modelled by traceless coordinate n-vectors with the
Euclidean dot product, so a type vector is exactly a unit vector with
non-increasing coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import matnum
from .errors import BadMultiplicities, DimensionMismatch, NotDecreasing, SingularGram

CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class FaceSignature:
    """Dimension steps i_1 < ... < i_l = n of flags of a given face type."""

    n: int
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims or dims[-1] != self.n:
            raise BadMultiplicities(f"signature {dims} must end with n={self.n}")
        if any(a >= b for a, b in zip(dims, dims[1:])) or dims[0] < 1:
            raise BadMultiplicities(f"signature {dims} must be strictly increasing and positive")

    @classmethod
    def full(cls, n: int) -> "FaceSignature":
        return cls(n, tuple(range(1, n + 1)))

    @property
    def steps(self) -> tuple[int, ...]:
        """The proper Grassmannian steps, i.e. the index set J of the face."""
        return self.dims[:-1]

    @property
    def mults(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip((0,) + self.dims, self.dims))

    def involute(self) -> "FaceSignature":
        return FaceSignature(self.n, tuple(self.n - i for i in reversed(self.steps)) + (self.n,))

    def is_full(self) -> bool:
        return len(self.dims) == self.n

    def is_face_of(self, other: "FaceSignature") -> bool:
        """True if every step of self is a step of other."""
        return self.n == other.n and set(self.steps) <= set(other.steps)

    @classmethod
    def from_mults(cls, n: int, mults) -> "FaceSignature":
        return cls(n, tuple(int(x) for x in np.cumsum(mults)))

    def to_json(self) -> dict:
        return {"n": self.n, "dims": list(self.dims)}

    @classmethod
    def from_json(cls, rec) -> "FaceSignature":
        return cls(int(rec["n"]), tuple(rec["dims"]))


@dataclass(frozen=True)
class TypeVector:
    """A type: strictly decreasing values with multiplicities, unit weighted norm, zero weighted sum."""

    n: int
    values: tuple[float, ...]
    mults: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "mults", tuple(int(m) for m in self.mults))
        _validate(self.n, self.values, self.mults)

    @property
    def signature(self) -> FaceSignature:
        return FaceSignature.from_mults(self.n, self.mults)

    def embed(self) -> np.ndarray:
        return embed(self)

    def to_json(self) -> dict:
        return {"n": self.n, "values": list(self.values), "mults": list(self.mults)}

    @classmethod
    def from_json(cls, rec) -> "TypeVector":
        return cls(int(rec["n"]), tuple(rec["values"]), tuple(rec["mults"]))


def _validate(n, values, mults):
    if len(values) != len(mults) or not values:
        raise BadMultiplicities("values and mults must have the same positive length")
    if any(m < 1 for m in mults) or sum(mults) != n:
        raise BadMultiplicities(f"multiplicities {mults} must be positive and sum to n={n}")
    if any(a <= b for a, b in zip(values, values[1:])):
        raise NotDecreasing(f"values {values} are not strictly decreasing")
    if len(values) < 2:
        raise BadMultiplicities("a type needs at least two distinct values")
    s1 = sum(m * v for m, v in zip(mults, values))
    s2 = sum(m * v * v for m, v in zip(mults, values))
    if abs(s1) > CONSTRAINT_TOL or abs(s2 - 1.0) > CONSTRAINT_TOL:
        raise BadMultiplicities(f"type constraints violated: sum={s1:.3e}, square sum={s2:.15f}")


def make_type(n: int, values, mults=None, normalize: bool = False) -> TypeVector:
    """Build a validated type.

    With ``normalize=True`` the values are first projected onto the constraint
    set: the weighted mean is subtracted and the result rescaled to unit
    weighted square sum.
    """
    vals = [float(v) for v in values]
    ms = [1] * len(vals) if mults is None else [int(m) for m in mults]
    if any(a <= b for a, b in zip(vals, vals[1:])):
        raise NotDecreasing(f"values {tuple(vals)} are not strictly decreasing")
    if normalize:
        if len(vals) != len(ms) or sum(ms) != n or any(m < 1 for m in ms):
            raise BadMultiplicities(f"multiplicities {ms} must be positive and sum to n={n}")
        mean = sum(m * v for m, v in zip(ms, vals)) / n
        vals = [v - mean for v in vals]
        norm = math.sqrt(sum(m * v * v for m, v in zip(ms, vals)))
        if norm == 0.0:
            raise NotDecreasing("cannot normalize a constant type")
        vals = [v / norm for v in vals]
    return TypeVector(n, tuple(vals), tuple(ms))


def involute(t: TypeVector) -> TypeVector:
    return TypeVector(t.n, tuple(-v for v in reversed(t.values)), tuple(reversed(t.mults)))


def embed(t: TypeVector) -> np.ndarray:
    """Coordinate n-vector repeating each value by its multiplicity."""
    return np.repeat(np.array(t.values), t.mults)


def involute_vector(v) -> np.ndarray:
    """The opposition involution on coordinate vectors: reverse and negate."""
    return -np.asarray(v, dtype=float)[::-1]


@lru_cache(maxsize=None)
def corner(n: int, j: int) -> TypeVector:
    """The corner type with multiplicities (j, n - j)."""
    if not 1 <= j < n:
        raise BadMultiplicities(f"corner index {j} out of range for n={n}")
    hi = math.sqrt((n - j) / (j * n))
    lo = -math.sqrt(j / ((n - j) * n))
    return TypeVector(n, (hi, lo), (j, n - j))


def corner_types(n: int) -> list[TypeVector]:
    if n < 2:
        raise BadMultiplicities("need n >= 2")
    return [corner(n, j) for j in range(1, n)]


def a_inner(u, v) -> float:
    a = np.asarray(u, dtype=float)
    b = np.asarray(v, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(a @ b)


def dual_basis(face: FaceSignature) -> dict[int, np.ndarray]:
    """Vectors alpha_j in the span of the face corners with <alpha_j, xi_i> = delta_ij.

    Keyed by the Grassmannian step j.
    """
    steps = face.steps
    if not steps:
        return {}
    xi = np.array([embed(corner(face.n, j)) for j in steps])
    gram = xi @ xi.T
    try:
        coef = matnum.inv(gram)
    except Exception as exc:  # cannot happen for a valid face
        raise SingularGram(str(exc)) from exc
    alphas = coef @ xi
    return {j: alphas[k] for k, j in enumerate(steps)}


def project_to_face(v, face: FaceSignature) -> np.ndarray:
    """Orthogonal projection of a coordinate vector onto the span of the face corners."""
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    for j, alpha in dual_basis(face).items():
        out += a_inner(v, embed(corner(face.n, j))) * alpha
    return out


def face_type(face: FaceSignature, weights=None) -> TypeVector:
    """An interior type of a face: a positive combination of its corners, normalized.

    Without weights, all corners are weighted equally.
    """
    steps = face.steps
    w = np.ones(len(steps)) if weights is None else np.asarray(weights, dtype=float)
    v = sum(wi * embed(corner(face.n, j)) for wi, j in zip(w, steps))
    v = v / np.linalg.norm(v)
    return type_from_vector(v, face.mults)


def type_from_vector(v, mults) -> TypeVector:
    """Collapse a coordinate vector that is constant on multiplicity blocks."""
    v = np.asarray(v, dtype=float)
    n = len(v)
    bounds = np.cumsum((0,) + tuple(mults))
    values = tuple(float(np.mean(v[a:b])) for a, b in zip(bounds, bounds[1:]))
    return TypeVector(n, values, tuple(mults))


def regular_type(n: int) -> TypeVector:
    """The normalized type (n-1, n-3, ..., 1-n), interior to the chamber."""
    return make_type(n, [n - 1 - 2 * i for i in range(n)], normalize=True)
