"""Geometry of the space of unimodular SPD matrices.

Points are SPD matrices of determinant one, acted on by g.A = g A g^T.
The metric is d(a, b) = c * ||log eig(a^{-1} b)||_2 with c = n, the value
under which the determinant formulas for Busemann functions and Gromov
products hold with unit-norm types (see :func:`calibrate`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import matnum
from .cartan import TypeVector, embed, involute
from .errors import CalibrationFailed, DimensionMismatch, NonOpposite, NotSpd, TypeMismatch
from .flags import Flag, _ul_unipotent, ortho_opposite, unipotent_transporter

ORACLE_T = 1e4
DIVERGENCE_JUMP = 0.1
# minors of orthonormal blocks below this are exact zeros polluted by rounding
MINOR_FLOOR = 1e-12


def c_metric(n: int) -> float:
    return float(n)


@dataclass(frozen=True, eq=False)
class SpdPoint:
    """A unimodular SPD matrix.

    Points far from the identity are badly conditioned as matrices. A point
    built as g . base keeps the factors (``action`` g and ``base`` matrix);
    Busemann functions, retractions and flat coordinates use them instead
    of the product, which would lose about cond * eps in small minors.
    """

    n: int
    mat: np.ndarray
    action: np.ndarray | None = None
    base: np.ndarray | None = None

    def __post_init__(self):
        m = matnum.as_matrix(self.mat)
        if m.shape != (self.n, self.n):
            raise DimensionMismatch(f"expected a {self.n}x{self.n} matrix")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > 1e-10 * scale:
            raise NotSpd("matrix is not symmetric")
        m = 0.5 * (m + m.T)
        if self.action is not None:
            self._check_factors()
            m.setflags(write=False)
            object.__setattr__(self, "mat", m)
            return
        ev = matnum.sym_eig(m).eigenvalues
        if ev[-1] <= 0.0:
            raise NotSpd("matrix is not positive definite")
        # the determinant of a stored matrix is only known to about cond * eps
        if abs(matnum.det(m) - 1.0) > max(1e-8, 64 * np.finfo(float).eps * ev[0] / ev[-1]):
            raise NotSpd(f"determinant {matnum.det(m):.12g} is not 1")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    def _check_factors(self):
        # g b g^T is SPD by construction; validate the factors instead of the product
        b = matnum.as_matrix(self.base)
        if np.max(np.abs(b - b.T)) > 1e-10 * max(1.0, float(np.max(np.abs(b)))):
            raise NotSpd("base matrix is not symmetric")
        if matnum.sym_eig(0.5 * (b + b.T)).eigenvalues[-1] <= 0.0:
            raise NotSpd("base matrix is not positive definite")
        logdet = 2.0 * math.log(abs(matnum.det(self.action))) + math.log(matnum.det(b))
        if abs(logdet) > 1e-8:
            raise NotSpd(f"log determinant {logdet:.3g} is not 0")

    @classmethod
    def identity(cls, n: int) -> "SpdPoint":
        return cls(n, np.eye(n))

    @classmethod
    def normalized(cls, m) -> "SpdPoint":
        """Rescale an SPD matrix to determinant one."""
        a = matnum.as_matrix(m)
        a = 0.5 * (a + a.T)
        d = matnum.det(a)
        if d <= 0:
            raise NotSpd("matrix is not positive definite")
        return cls(a.shape[0], a / d ** (1.0 / a.shape[0]))

    @classmethod
    def acted(cls, g, base: "SpdPoint") -> "SpdPoint":
        """g . base = g base g^T, keeping the factors; g is rescaled to determinant one."""
        g0, b = factors(base)
        g = matnum.as_matrix(g) @ g0
        d = matnum.det(g)
        if d == 0:
            raise NotSpd("action is singular")
        g = g / abs(d) ** (1.0 / g.shape[0])
        m = g @ b @ g.T
        return cls(base.n, 0.5 * (m + m.T), g, b)

    @property
    def is_factored(self) -> bool:
        return self.action is not None

    def act(self, g) -> "SpdPoint":
        g = matnum.as_matrix(g)
        return SpdPoint(self.n, g @ self.mat @ g.T)

    def to_json(self) -> dict:
        return {"n": self.n, "mat": [list(map(float, row)) for row in self.mat]}

    @classmethod
    def from_json(cls, rec) -> "SpdPoint":
        return cls(int(rec["n"]), np.array(rec["mat"], dtype=float))


@dataclass(frozen=True, eq=False)
class IdealPoint:
    """A boundary point: a flag together with a type whose signature matches it."""

    flag: Flag
    type: TypeVector

    def __post_init__(self):
        if self.type.signature != self.flag.signature or self.type.n != self.flag.n:
            raise TypeMismatch(
                f"type signature {self.type.signature.dims} does not match flag {self.flag.signature.dims}"
            )


def _mat(p) -> np.ndarray:
    return p.mat if isinstance(p, SpdPoint) else matnum.as_matrix(p)


def factors(p) -> tuple[np.ndarray, np.ndarray]:
    """(g, b) with p = g b g^T; trivial g for unfactored points."""
    if isinstance(p, SpdPoint) and p.action is not None:
        return p.action, p.base
    m = _mat(p)
    return np.eye(m.shape[0]), m


def log_spectrum(a, b) -> np.ndarray:
    """Logarithms of the eigenvalues of a^{-1} b, descending."""
    ai = matnum.spd_inv_sqrt(_mat(a))
    m = ai @ _mat(b) @ ai
    # symmetric in exact arithmetic; rounding breaks it for badly conditioned points
    return np.log(matnum.sym_eig(0.5 * (m + m.T)).eigenvalues)


def distance(a: SpdPoint, b: SpdPoint) -> float:
    if a.n != b.n:
        raise DimensionMismatch("points live in different dimensions")
    return c_metric(a.n) * float(np.linalg.norm(log_spectrum(a, b)))


def finite_gromov(p: SpdPoint, q: SpdPoint, o: SpdPoint) -> float:
    return 0.5 * (distance(o, p) + distance(o, q) - distance(p, q))


def translated_frame(o, flag: Flag) -> np.ndarray:
    """Orthonormal basis k of the flag o^{-1/2} . F."""
    return matnum.gram_schmidt(matnum.spd_inv_sqrt(_mat(o)) @ flag.basis)


def geodesic_point(o: SpdPoint, x: IdealPoint, t: float, c: float | None = None) -> SpdPoint:
    """The point at parameter t on the unit-speed ray from o towards x."""
    n = o.n
    c = c_metric(n) if c is None else c
    root = matnum.spd_sqrt(o.mat)
    k = translated_frame(o, x.flag)
    diag = np.exp((t / c) * embed(x.type))
    inner = (k * diag) @ k.T
    return SpdPoint(n, root @ inner @ root)


def delta_minor(p, j: int) -> float:
    """Determinant of the trailing j x j principal block."""
    m = _mat(p)
    n = m.shape[0]
    if not 1 <= j <= n:
        raise ValueError(f"minor size {j} out of range for n={n}")
    return matnum.det(m[n - j:, n - j:])


def _busemann_to_identity(x: IdealPoint, p) -> float:
    """b_x(p, I) from the trailing-minor formula, after rotating x to the standard flag.

    The minors of k^T p k are those of v^T b v with v = g^T k for p = g b g^T.
    """
    n = x.flag.n
    lam = embed(x.type)
    g, b = factors(p)
    v = g.T @ x.flag.basis
    total = 0.0
    for j in range(1, n):
        gap = lam[n - j - 1] - lam[n - j]
        if gap != 0.0:
            tail = v[:, n - j:]
            total += gap * math.log(matnum.det(tail.T @ b @ tail))
    return n * total


def busemann(x: IdealPoint, o, p) -> float:
    """b_x(o, p), normalized so that it equals s at the point at distance s along the ray from o."""
    return _busemann_to_identity(x, o) - _busemann_to_identity(x, p)


def retract(o: SpdPoint, cx: Flag, cy: Flag) -> SpdPoint:
    """Horospherical retraction of o onto the flat joining the chambers cx and cy, along cx."""
    u = unipotent_transporter(cx, ortho_opposite(cx, o), cy)
    return SpdPoint.acted(u, o)


def apartment_frame(cx: Flag, cy: Flag) -> np.ndarray:
    """Basis B of the flat joining opposite chambers: B[:, :i] spans cx_i, B[:, n-j:] spans cy_j."""
    xb = cx.completion().basis
    return xb @ _ul_unipotent(xb.T @ cy.completion().basis)


@dataclass(frozen=True, eq=False)
class FlatPoint:
    """The SPD point frame diag(e^logd) frame^T, kept in factored form."""

    frame: np.ndarray
    logd: np.ndarray

    @classmethod
    def from_spd(cls, p) -> "FlatPoint":
        g, b = factors(p)
        return cls(g @ matnum.spd_sqrt(b), np.zeros(b.shape[0]))

    def to_spd(self) -> SpdPoint:
        n = self.frame.shape[0]
        return SpdPoint.acted(self.frame * np.exp(0.5 * self.logd), SpdPoint.identity(n))


def _log_trailing_minors(c: np.ndarray, logd: np.ndarray) -> np.ndarray:
    """log det of the trailing j x j blocks of c diag(e^logd) c^T, j = 0..n.

    Cauchy-Binet writes each minor as a sum of positive terms
    det(c[rows, S])^2 prod e^{logd[S]}, summed here in the log domain.
    """
    n = c.shape[0]
    out = np.zeros(n + 1)
    for j in range(1, n + 1):
        rows = list(range(n - j, n))
        terms = []
        for cols in itertools.combinations(range(n), j):
            minor = abs(matnum.det(c[np.ix_(rows, cols)]))
            if minor > 0.0:
                terms.append(2.0 * math.log(minor) + float(logd[list(cols)].sum()))
        top = max(terms)
        out[j] = top + math.log(sum(math.exp(v - top) for v in terms))
    return out


def retract_flat(p: FlatPoint, cx: Flag, cy: Flag) -> FlatPoint:
    """Horospherical retraction along cx onto the flat of (cx, cy), in log-diagonal form.

    In the apartment frame B the unipotent radical of cx acts by upper
    unitriangular matrices, which preserve trailing principal minors; the
    diagonal point in the orbit has entries tm_j / tm_{j-1} read from the bottom.
    """
    b = apartment_frame(cx, cy)
    tm = _log_trailing_minors(matnum.solve(b, p.frame), np.asarray(p.logd, dtype=float))
    n = b.shape[0]
    logd = np.array([tm[n - i] - tm[n - i - 1] for i in range(n)])
    return FlatPoint(b, logd)


def _log_compound_norm(a_exp: np.ndarray, core: np.ndarray, b_exp: np.ndarray, j: int) -> float:
    """log of the spectral norm of the j-th compound of diag(e^a) core diag(e^b)."""
    n = core.shape[0]
    subsets = list(itertools.combinations(range(n), j))
    logs = np.full((len(subsets), len(subsets)), -np.inf)
    signs = np.zeros_like(logs)
    for r, rows in enumerate(subsets):
        ra = a_exp[list(rows)].sum()
        for s, cols in enumerate(subsets):
            minor = matnum.det(core[np.ix_(rows, cols)])
            if abs(minor) > MINOR_FLOOR:
                logs[r, s] = math.log(abs(minor)) + ra + b_exp[list(cols)].sum()
                signs[r, s] = math.copysign(1.0, minor)
    top = np.max(logs)
    scaled = signs * np.exp(logs - top)
    norm2 = matnum.sym_eig(scaled.T @ scaled).eigenvalues[0]
    return float(top + 0.5 * math.log(norm2))


def ray_separation(x: IdealPoint, y: IdealPoint, o: SpdPoint, t: float, c: float | None = None) -> float:
    """d(gamma_{ox}(t), gamma_{oy}(t)), evaluated without forming the (overflowing) points.

    With gamma_x(t) = k E k^T and gamma_y(t) = h F h^T after translating o to I,
    the squared singular values of M = E^{-1/2} k^T h F^{1/2} are the
    eigenvalues of gamma_x^{-1} gamma_y. Partial products of singular values
    are spectral norms of compound matrices, computed in the log domain.
    """
    n = o.n
    c = c_metric(n) if c is None else c
    k = translated_frame(o, x.flag)
    h = translated_frame(o, y.flag)
    core = k.T @ h
    a_exp = -0.5 * (t / c) * embed(x.type)
    b_exp = 0.5 * (t / c) * embed(y.type)
    partial = [0.0] + [_log_compound_norm(a_exp, core, b_exp, j) for j in range(1, n)]
    partial.append(math.log(abs(matnum.det(core))))
    log_sv = np.diff(partial)
    return c * float(np.linalg.norm(2.0 * log_sv))


def oracle_profile(x: IdealPoint, y: IdealPoint, o: SpdPoint, t: float, c: float | None = None) -> float:
    """f(t) = t - d(gamma_{ox}(t), gamma_{oy}(t)) / 2 at a single finite t."""
    _check_types(x, y)
    return t - 0.5 * ray_separation(x, y, o, t, c)


def _check_types(x: IdealPoint, y: IdealPoint):
    ity = involute(x.type)
    if ity.mults != y.type.mults or not np.allclose(ity.values, y.type.values, atol=1e-12):
        raise TypeMismatch("type of y must be the opposite of the type of x")


def gromov_oracle(x: IdealPoint, y: IdealPoint, o: SpdPoint, t: float = ORACLE_T, c: float | None = None) -> float:
    """Gromov product of boundary points from the limit definition.

    f(t) = L + a/t + b/t^2 + ..., since half the separation is the norm of an
    affine function of t. Second-order Richardson extrapolation over t, 2t, 4t
    removes both terms: (8 f(4t) - 6 f(2t) + f(t)) / 3. A jump f(2t) - f(t)
    above 0.1 means the limit is infinite (the flags are not opposite).
    """
    f1 = oracle_profile(x, y, o, t, c)
    f2 = oracle_profile(x, y, o, 2.0 * t, c)
    if f2 - f1 > DIVERGENCE_JUMP:
        raise NonOpposite(f"limit diverges: f(2t) - f(t) = {f2 - f1:.3g}")
    f4 = oracle_profile(x, y, o, 4.0 * t, c)
    return (8.0 * f4 - 6.0 * f2 + f1) / 3.0


@dataclass(frozen=True)
class CalibrationReport:
    n: int
    c_metric: float
    residual: float
    trials: int

    def to_json(self) -> dict:
        return {"n": self.n, "c_metric": self.c_metric, "residual": self.residual, "trials": self.trials}


def calibrate(n: int, trials: int = 20, seed: int = 42, t: float = ORACLE_T) -> CalibrationReport:
    """Fit the metric constant c so that c times the unit-metric oracle matches the closed form."""
    from .crossratio import gromov_closed
    from .sampling import random_flag, random_type

    if not 2 <= n <= 6:
        raise ValueError("calibration supports 2 <= n <= 6")
    rng = np.random.default_rng(seed)
    o = SpdPoint.identity(n)
    oracle, closed = [], []
    for _ in range(trials):
        lam = random_type(n, rng)
        x = random_flag(n, lam.signature, rng)
        y = random_flag(n, lam.signature.involute(), rng)
        value = gromov_closed(x, y, lam, o)
        if not value.is_finite:
            continue
        oracle.append(gromov_oracle(IdealPoint(x, lam), IdealPoint(y, involute(lam)), o, t, c=1.0))
        closed.append(value.scalar)
    a = np.array(oracle)
    b = np.array(closed)
    c = float(a @ b / (a @ a))
    residual = float(np.max(np.abs(c * a - b)))
    if residual > 1e-3:
        raise CalibrationFailed(f"residual {residual:.3g} exceeds 1e-3 (c = {c:.6f})")
    return CalibrationReport(n, c, residual, len(a))
