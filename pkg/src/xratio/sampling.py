"""Random generators for flags, types, points and group elements.

Everything takes an explicit ``numpy.random.Generator`` so runs are reproducible.
"""

from __future__ import annotations

import numpy as np

from . import matnum
from .cartan import FaceSignature, TypeVector, make_type
from .flags import Flag, make_flag


def random_flag(n: int, signature=None, rng=None) -> Flag:
    rng = np.random.default_rng() if rng is None else rng
    sig = FaceSignature.full(n) if signature is None else signature
    return make_flag(n, sig, rng.normal(size=(n, n)))


def random_type(n: int, rng=None, mults=None) -> TypeVector:
    """A random type with the given multiplicities (full chamber by default)."""
    rng = np.random.default_rng() if rng is None else rng
    ms = [1] * n if mults is None else list(mults)
    gaps = rng.uniform(0.2, 1.0, size=len(ms))
    values = np.cumsum(gaps)[::-1]
    return make_type(n, values, ms, normalize=True)


def random_orthogonal(n: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng() if rng is None else rng
    return matnum.gram_schmidt(rng.normal(size=(n, n)))


def random_unimodular(n: int, rng=None, max_log_sv: float = 1.5) -> np.ndarray:
    """k1 diag(e^s) k2 with traceless s; condition number at most e^{2 max_log_sv}."""
    rng = np.random.default_rng() if rng is None else rng
    s = rng.uniform(-max_log_sv, max_log_sv, size=n)
    s -= s.mean()
    k1 = random_orthogonal(n, rng)
    k2 = random_orthogonal(n, rng)
    if matnum.det(k1) * matnum.det(k2) < 0:
        k2[:, 0] = -k2[:, 0]
    return (k1 * np.exp(s)) @ k2


def random_spd(n: int, rng=None, max_log_sv: float = 1.5):
    """A random basepoint g g^T."""
    from .spdspace import SpdPoint

    g = random_unimodular(n, rng, max_log_sv)
    return SpdPoint.normalized(g @ g.T)


def random_hyperbolic(n: int, rng=None) -> np.ndarray:
    """A regular hyperbolic element h diag(e^s) h^{-1} with distinct eigenvalue moduli."""
    rng = np.random.default_rng() if rng is None else rng
    s = np.sort(rng.uniform(-1.5, 1.5, size=n))[::-1]
    s += np.linspace(0.3 * n, 0.0, n)  # keep the gaps away from zero
    s -= s.mean()
    signs = rng.choice([-1.0, 1.0], size=n)
    if np.prod(signs) < 0:
        signs[0] = -signs[0]
    h = random_unimodular(n, rng, 0.7)
    return h @ np.diag(signs * np.exp(s)) @ matnum.inv(h)


def random_ended_tree(n_ends: int, rng=None, n_vertices: int | None = None, exact: bool = True):
    """A random tree with rational (or float) edge lengths and ends hung at random vertices.

    Every leaf carries at least one end, so no finite branch dangles.
    """
    from fractions import Fraction

    from .rank1 import EndedTree

    rng = np.random.default_rng() if rng is None else rng
    nv = int(rng.integers(2, max(3, n_ends))) if n_vertices is None else n_vertices
    edges = []
    for v in range(1, nv):
        u = int(rng.integers(0, v))
        ln = Fraction(int(rng.integers(1, 13)), int(rng.integers(1, 5))) if exact else float(rng.uniform(0.2, 3.0))
        edges.append((u, v, ln))
    degree = [0] * nv
    for u, v, _ in edges:
        degree[u] += 1
        degree[v] += 1
    leaves = [v for v in range(nv) if degree[v] <= 1]
    if len(leaves) > n_ends:
        raise ValueError("more leaves than ends")
    hosts = leaves + [int(v) for v in rng.integers(0, nv, size=n_ends - len(leaves))]
    ends = {f"e{i}": hosts[i] for i in range(n_ends)}
    return EndedTree(tuple(range(nv)), tuple(edges), ends)
