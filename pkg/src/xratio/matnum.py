"""Dense linear algebra for small matrices.

numpy arrays are used for storage and elementwise arithmetic only; the
factorizations below (LU, cyclic Jacobi, Gram-Schmidt) are implemented here.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DependentColumns, NotSpd, NotSymmetric, SingularMatrix

TOL = 1e-10


class SymEig(NamedTuple):
    """Eigenvalues in descending order and matching orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def lu(m) -> tuple[np.ndarray, np.ndarray, int]:
    """LU factorization with partial pivoting.

    Returns the packed factors (unit lower part below the diagonal, U on and
    above it), the row permutation, and the permutation sign. Singular
    columns are left in place with a zero pivot.
    """
    a = as_matrix(m).copy()
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("lu needs a square matrix")
    perm = np.arange(n)
    sign = 1
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if p != k:
            a[[k, p]] = a[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        pivot = a[k, k]
        if pivot == 0.0:
            continue
        a[k + 1:, k] /= pivot
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return a, perm, sign


def det(m) -> float:
    """Determinant via LU with partial pivoting; exactly 0 for a zero pivot."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError("det needs a square matrix")
    packed, _, sign = lu(a)
    return float(sign * np.prod(np.diag(packed)))


def solve(m, b) -> np.ndarray:
    """Solve m x = b (b may be a vector or a matrix of right-hand sides)."""
    packed, perm, _ = lu(m)
    n = packed.shape[0]
    diag = np.diag(packed)
    scale = np.max(np.abs(diag)) if n else 0.0
    if scale == 0.0 or np.min(np.abs(diag)) <= 1e-14 * scale:
        raise SingularMatrix("matrix is numerically singular")
    rhs = np.array(b, dtype=float)
    vector = rhs.ndim == 1
    y = rhs.reshape(n, -1)[perm].copy()
    for i in range(n):
        y[i] -= packed[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - packed[i, i + 1:] @ y[i + 1:]) / packed[i, i]
    return y[:, 0] if vector else y


def inv(m) -> np.ndarray:
    a = as_matrix(m)
    return solve(a, np.eye(a.shape[0]))


def sym_eig(s, sym_tol: float = 1e-12) -> SymEig:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps until the off-diagonal Frobenius mass is at most 1e-14 times the
    Frobenius norm of the input. Eigenvalues come back in descending order.
    """
    a = as_matrix(s)
    n = a.shape[0]
    if a.shape[1] != n:
        raise NotSymmetric("matrix is not square")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > sym_tol * scale:
        raise NotSymmetric("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    target = 1e-14 * np.linalg.norm(a)
    for _ in range(100):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta  # theta^2 would overflow
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - sn * aq
                a[:, q] = sn * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - sn * aq
                a[q, :] = sn * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - sn * vq
                v[:, q] = sn * vp + c * vq
    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")
    return SymEig(vals[order], v[:, order])


def gram_schmidt(basis, g=None) -> np.ndarray:
    """Orthonormalize columns with respect to the inner product u^T g v.

    Column j of the output lies in the span of input columns 1..j, so the
    flag spanned by the columns is preserved. Two passes of modified
    Gram-Schmidt keep orthogonality at working precision.
    """
    b = as_matrix(basis)
    n, k = b.shape
    gm = np.eye(n) if g is None else as_matrix(g)
    gram = b.T @ gm @ b
    if abs(det(gram)) <= 1e-12 * max(1.0, float(np.prod(np.diag(gram)))):
        raise DependentColumns("columns are (numerically) dependent")
    out = np.zeros((n, k))
    for j in range(k):
        v = b[:, j].copy()
        for _ in range(2):
            for i in range(j):
                v -= (out[:, i] @ gm @ v) * out[:, i]
        norm2 = v @ gm @ v
        if norm2 <= 0.0 or norm2 <= 1e-24 * (b[:, j] @ gm @ b[:, j]):
            raise DependentColumns(f"column {j} is dependent on the previous ones")
        out[:, j] = v / np.sqrt(norm2)
    return out


def spd_function(s, fn) -> np.ndarray:
    """Apply a scalar function to the eigenvalues of an SPD matrix."""
    vals, vecs = sym_eig(s)
    if vals[-1] <= 0.0:
        raise NotSpd("matrix has a non-positive eigenvalue")
    out = (vecs * fn(vals)) @ vecs.T
    return 0.5 * (out + out.T)


def spd_sqrt(s) -> np.ndarray:
    return spd_function(s, np.sqrt)


def spd_inv_sqrt(s) -> np.ndarray:
    return spd_function(s, lambda x: 1.0 / np.sqrt(x))


def spd_log(s) -> np.ndarray:
    return spd_function(s, np.log)


def sym_exp(s) -> np.ndarray:
    """Exponential of a symmetric matrix."""
    vals, vecs = sym_eig(s)
    out = (vecs * np.exp(vals)) @ vecs.T
    return 0.5 * (out + out.T)
