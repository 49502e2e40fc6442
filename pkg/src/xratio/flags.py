"""Partial flags in R^n: construction, action, opposition and unipotent transporters."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import matnum
from .cartan import FaceSignature
from .errors import NotOpposite, NotUnimodular, SignatureMismatch

OPPOSITE_TOL = 1e-9
DEGENERATE_BAND = 1e-6


class NearDegenerateWarning(UserWarning):
    """Raised through ``warnings`` when a transversality determinant is close to the threshold."""


@dataclass(frozen=True, eq=False)
class Flag:
    """A flag V_{i_1} < ... < V_{i_l} = R^n stored by an orthonormal basis.

    The first ``i_j`` columns of ``basis`` span ``V_{i_j}``.
    """

    n: int
    signature: FaceSignature
    basis: np.ndarray

    def __post_init__(self):
        self.basis.setflags(write=False)

    def subspace(self, dim: int) -> np.ndarray:
        if dim not in self.signature.dims and dim != 0:
            raise SignatureMismatch(f"dimension {dim} is not a step of {self.signature.dims}")
        return self.basis[:, :dim]

    def truncate(self, face: FaceSignature) -> "Flag":
        """Forget the steps that are not in ``face``."""
        if not face.is_face_of(self.signature):
            raise SignatureMismatch(f"{face.dims} is not a face of {self.signature.dims}")
        return Flag(self.n, face, self.basis)

    def completion(self) -> "Flag":
        """A full flag (chamber) containing this flag, read off the stored basis."""
        return Flag(self.n, FaceSignature.full(self.n), self.basis)

    def same_as(self, other: "Flag", tol: float = 1e-8) -> bool:
        if self.signature != other.signature:
            return False
        for d in self.signature.steps:
            a = self.basis[:, :d]
            b = other.basis[:, :d]
            if np.max(np.abs(b - a @ (a.T @ b))) > tol:
                return False
        return True

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "signature": list(self.signature.dims),
            "basis": [list(map(float, col)) for col in self.basis.T],
        }

    @classmethod
    def from_json(cls, rec) -> "Flag":
        n = int(rec["n"])
        basis = np.array(rec["basis"], dtype=float).T
        return make_flag(n, FaceSignature(n, tuple(rec["signature"])), basis)


def make_flag(n: int, signature, basis) -> Flag:
    """Canonical orthonormal representative of the flag spanned by ``basis``."""
    sig = signature if isinstance(signature, FaceSignature) else FaceSignature(n, tuple(signature))
    b = matnum.as_matrix(basis)
    if b.shape != (n, n):
        raise SignatureMismatch(f"basis must be {n}x{n}, got {b.shape}")
    return Flag(n, sig, matnum.gram_schmidt(b))


def standard_pair(n: int, signature=None) -> tuple[Flag, Flag]:
    """The standard flag of a signature and its standard opposite (trailing coordinate spans)."""
    sig = FaceSignature.full(n) if signature is None else signature
    if not isinstance(sig, FaceSignature):
        sig = FaceSignature(n, tuple(sig))
    eye = np.eye(n)
    return make_flag(n, sig, eye), make_flag(n, sig.involute(), eye[:, ::-1])


def longest_element(n: int) -> np.ndarray:
    """Anti-diagonal matrix in SO(n) (top-right entry -1 when the reversal is odd)."""
    k = np.fliplr(np.eye(n))
    if matnum.det(k) < 0:
        k[0, n - 1] = -1.0
    return k


def transversality(x: Flag, y: Flag) -> list[float]:
    """|det(first i_j columns of x | first n - i_j columns of y)| at every proper step of x."""
    if x.n != y.n or y.signature != x.signature.involute():
        raise SignatureMismatch(
            f"signatures {x.signature.dims} and {y.signature.dims} are not opposite types"
        )
    n = x.n
    return [abs(matnum.det(np.hstack([x.basis[:, :i], y.basis[:, :n - i]]))) for i in x.signature.steps]


def is_opposite(x: Flag, y: Flag) -> bool:
    dets = transversality(x, y)
    if any(OPPOSITE_TOL < d < DEGENERATE_BAND for d in dets):
        warnings.warn(f"near-degenerate opposition test (min det {min(dets):.2e})", NearDegenerateWarning)
    return all(d > OPPOSITE_TOL for d in dets)


def act(g, x: Flag, tol: float = 1e-8) -> Flag:
    """g . F: the flag spanned by g times the columns, for det g = 1."""
    gm = matnum.as_matrix(g)
    if abs(matnum.det(gm) - 1.0) > tol:
        raise NotUnimodular(f"det g = {matnum.det(gm):.12g}")
    return make_flag(x.n, x.signature, gm @ x.basis)


def act_linear(g, x: Flag) -> Flag:
    """Action of any invertible matrix on flags (projective, so no determinant condition)."""
    return make_flag(x.n, x.signature, matnum.as_matrix(g) @ x.basis)


def ortho_opposite(x: Flag, o=None) -> Flag:
    """The flag of successive complements of x under <u, v>_o = u^T o^{-1} v."""
    n = x.n
    if getattr(o, "action", None) is not None:
        # equivariance: the complements of x at g . b are g times those of g^{-1} x at b
        g = o.action
        inner = ortho_opposite(act_linear(matnum.inv(g), x), o.base)
        return act_linear(g, inner)
    omat = np.eye(n) if o is None else _mat(o)
    # the columns of o^{-1/2}-translated x, orthonormalized, are an o^{-1}-orthonormal basis
    ob = matnum.gram_schmidt(x.basis, matnum.inv(omat))
    return make_flag(n, x.signature.involute(), ob[:, ::-1])


def _mat(o) -> np.ndarray:
    return o.mat if hasattr(o, "mat") else matnum.as_matrix(o)


def _ul_unipotent(z_cols: np.ndarray) -> np.ndarray:
    """Upper unitriangular N with flag(N applied to the reversed identity basis) = flag(z_cols).

    Equivalent to an LU factorization without pivoting of the matrix flipped
    in both directions; fails exactly when the flag is not opposite to the
    standard flag.
    """
    n = z_cols.shape[0]
    # Z = N J B with B upper triangular; flipping gives J Z = (J N J)(B J J), an LU split
    m = z_cols[::-1, :].copy()
    lower = np.eye(n)
    for k in range(n):
        pivot = m[k, k]
        if abs(pivot) <= 1e-12 * max(np.max(np.abs(m[k:, k:])), 1e-300):
            raise NotOpposite("flag is not opposite to the reference chamber")
        for i in range(k + 1, n):
            f = m[i, k] / pivot
            lower[i, k] = f
            m[i, k:] -= f * m[k, k:]
    return lower[::-1, ::-1]


def unipotent_transporter(x: Flag, z: Flag, y: Flag) -> np.ndarray:
    """The element of the unipotent radical of the stabilizer of x taking z to y.

    All three flags must be full, with ``z`` and ``y`` opposite to ``x``.
    """
    if not (x.signature.is_full() and z.signature.is_full() and y.signature.is_full()):
        raise SignatureMismatch("unipotent_transporter needs full flags")
    xb = x.basis
    xinv = xb.T  # orthonormal representative
    try:
        nz = _ul_unipotent(xinv @ z.basis)
        ny = _ul_unipotent(xinv @ y.basis)
    except NotOpposite as exc:
        raise NotOpposite("z or y is not opposite to x") from exc
    u = ny @ matnum.inv(nz)
    return xb @ u @ xinv
