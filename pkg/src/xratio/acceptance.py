"""The acceptance battery: twelve seeded property checks with hard tolerances.

Each check returns a :class:`CheckResult` carrying the worst observed error
and the tolerance it is held to. ``xr suite`` and the test-suite both run
these functions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import products as P
from .cartan import FaceSignature, a_inner, embed, involute, project_to_face
from .crossratio import (
    Admissibility,
    Kind,
    Quadruple,
    classify,
    cr_scalar,
    cr_vector,
    geom_interp,
    gromov_closed,
    gromov_via_busemann,
    period,
    symmetrized_translation,
)
from .errors import Inadmissible, NotExtendable, NotMoebius
from .flags import is_opposite, make_flag
from .moebius import SampledMap, check_moebius
from .rank1 import DiscBoundaryPoint, EndedTree, branch_distance, h2_cr_mult, tree_moebius_extend
from .sampling import (
    random_ended_tree,
    random_flag,
    random_hyperbolic,
    random_spd,
    random_type,
    random_unimodular,
)
from .spdspace import IdealPoint, SpdPoint, busemann, calibrate, gromov_oracle

SEED = 42


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: worst {self.worst:.3e} (tolerance {self.tolerance:.0e})"

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "worst": self.worst, "tolerance": self.tolerance,
                "detail": self.detail}


def _result(name, worst, tol, **detail) -> CheckResult:
    return CheckResult(name, bool(worst <= tol), float(worst), tol, detail)


def _opposite_pair(n, t, rng):
    while True:
        x = random_flag(n, t.signature, rng)
        y = random_flag(n, t.signature.involute(), rng)
        if is_opposite(x, y):
            return x, y


def _all_opposite_quad(n, rng, face=None):
    face = FaceSignature.full(n) if face is None else face
    while True:
        q = Quadruple(random_flag(n, face, rng), random_flag(n, face.involute(), rng),
                      random_flag(n, face, rng), random_flag(n, face.involute(), rng))
        if classify(q) is Admissibility.ALL_OPPOSITE:
            return q


def _slots(q: Quadruple):
    return q.x, q.y, q.z, q.w


def _faces(n):
    for r in range(1, n):
        for steps in itertools.combinations(range(1, n), r):
            yield FaceSignature(n, steps + (n,))


# ---------------------------------------------------------------------------


def check_oracle(seed: int = SEED) -> CheckResult:
    """Closed-form Gromov product against the limit oracle, and recovery of c = n."""
    rng = np.random.default_rng(seed)
    worst, worst_c = 0.0, 0.0
    for n in (2, 3, 4):
        o = SpdPoint.identity(n)
        for _ in range(50):
            t = random_type(n, rng)
            x, y = _opposite_pair(n, t, rng)
            closed = gromov_closed(x, y, t, o).scalar
            limit = gromov_oracle(IdealPoint(x, t), IdealPoint(y, involute(t)), o)
            worst = max(worst, abs(closed - limit))
        worst_c = max(worst_c, abs(calibrate(n, trials=10, seed=seed).c_metric - n))
    ok = worst <= 1e-5 and worst_c <= 1e-3
    return CheckResult("01_oracle_equivalence", ok, worst, 1e-5, {"calibration_error": worst_c})


def check_basepoint_independence(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(30):
        n = 2 + k % 3
        t = random_type(n, rng)
        q = _all_opposite_quad(n, rng)
        values = [cr_scalar(q, t, random_spd(n, rng), method="gromov").scalar for _ in range(3)]
        values.append(cr_scalar(q, t, method="wedge").scalar)
        worst = max(worst, max(values) - min(values))
    return _result("02_basepoint_independence", worst, 1e-9)


def check_basepoint_change(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(30):
        n = 2 + k % 3
        t = random_type(n, rng)
        x, y = _opposite_pair(n, t, rng)
        o, oh = random_spd(n, rng), random_spd(n, rng)
        lhs = gromov_closed(x, y, t, o).scalar
        rhs = (gromov_closed(x, y, t, oh).scalar + 0.5 * busemann(IdealPoint(x, t), o, oh)
               + 0.5 * busemann(IdealPoint(y, involute(t)), o, oh))
        worst = max(worst, abs(lhs - rhs))
    return _result("03_basepoint_change", worst, 1e-8)


def check_busemann_retract(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(30):
        n = 2 + k % 2
        t = random_type(n, rng)
        x, y = _opposite_pair(n, t, rng)
        o = random_spd(n, rng)
        worst = max(worst, abs(gromov_closed(x, y, t, o).scalar - gromov_via_busemann(x, y, t, o)))
    return _result("04_busemann_retract", worst, 1e-8)


def check_symmetries(seed: int = SEED) -> CheckResult:
    """Two sign flips, their composition and the two cocycle identities."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < 100:
        n = 2 + done % 3
        t = random_type(n, rng)
        full = FaceSignature.full(n)
        x1, x2, w = (random_flag(n, full, rng) for _ in range(3))
        y1, y2, v = (random_flag(n, full, rng) for _ in range(3))

        def cr(a, b, c, d):
            return cr_scalar(Quadruple(a, b, c, d), t)

        vals = [cr(*q) for q in ((x1, y1, x2, y2), (x1, y2, x2, y1), (x2, y1, x1, y2), (x2, y2, x1, y1),
                                 (x1, y1, w, y2), (w, y1, x2, y2), (x1, y1, x2, v), (x1, v, x2, y2))]
        if not all(val.is_finite for val in vals):
            continue
        c = [val.scalar for val in vals]
        errs = [c[0] + c[1], c[0] + c[2], c[0] - c[3], c[0] - c[4] - c[5], c[0] - c[6] - c[7]]
        worst = max(worst, max(abs(e) for e in errs))
        done += 1
    return _result("05_symmetries_cocycles", worst, 1e-10)


def check_vector_machinery(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_inner, worst_proj = 0.0, 0.0
    for n in (3, 4):
        for _ in range(5):
            q = _all_opposite_quad(n, rng)
            full_vec = cr_vector(q).vector
            for face in _faces(n):
                vec = cr_vector(q, face).vector
                xi = random_type(n, rng, face.mults)
                scalar = cr_scalar(q.truncate(face), xi).scalar
                worst_inner = max(worst_inner, abs(a_inner(vec, embed(xi)) - scalar))
                worst_proj = max(worst_proj, float(np.max(np.abs(project_to_face(full_vec, face) - vec))))
    worst = max(worst_inner, worst_proj)
    return _result("06_vector_machinery", worst, 1e-9, inner=worst_inner, projection=worst_proj)


def check_periods(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst, worst_x = 0.0, 0.0
    for n in (3, 4):
        for _ in range(10):
            g = random_hyperbolic(n, rng)
            values = []
            for _ in range(3):
                vec, ell = period(g, random_flag(n, None, rng))
                values.append(vec.vector)
                worst = max(worst, float(np.max(np.abs(vec.vector - symmetrized_translation(ell)))))
            worst_x = max(worst_x, float(np.max(np.ptp(np.array(values), axis=0))))
    return _result("07_periods", max(worst, worst_x), 1e-8, translation=worst, x_spread=worst_x)


def check_geometric_interpretation(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(20):
        n = 2 + k % 2
        q = _all_opposite_quad(n, rng)
        worst = max(worst, float(np.max(np.abs(geom_interp(q) - 2.0 * cr_vector(q).vector))))
    return _result("08_geometric_interpretation", worst, 1e-8)


def _cayley(p: DiscBoundaryPoint) -> float:
    """Image on the real line of a point of the circle other than 1."""
    return -1.0 / math.tan(0.5 * p.angle)


def check_products(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    # H2 x H2 against log|multiplicative cross ratio|, computed on the line
    worst_h2 = 0.0
    space = P.ProductSpace((P.H2Factor(), P.H2Factor()))
    for alpha in (math.pi / 6, math.pi / 4, math.pi / 3):
        pt = P.ProductType.angle(alpha)
        for _ in range(20):
            pts = [(DiscBoundaryPoint(a), DiscBoundaryPoint(b)) for a, b in rng.uniform(0.1, 6.1, size=(4, 2))]
            value = P.product_cr(pts, space, pt).scalar
            expected = 0.0
            for i, mu in enumerate(pt.weights):
                x, y, z, w = (_cayley(p[i]) for p in pts)
                expected += mu * math.log(abs((x - y) * (z - w) / ((x - w) * (z - y))))
            worst_h2 = max(worst_h2, abs(value - expected))
            ref = math.cos(alpha) * math.log(abs(h2_cr_mult(*[p[0] for p in pts])))
            ref += math.sin(alpha) * math.log(abs(h2_cr_mult(*[p[1] for p in pts])))
            worst_h2 = max(worst_h2, abs(value - ref))
    # P2 x P2 inside P4
    worst_block = 0.0
    for _ in range(20):
        types = [random_type(2, rng), random_type(2, rng)]
        weights = P.normalize_weights(rng.uniform(0.2, 1.0, size=2))
        quads = [_slots(_all_opposite_quad(2, rng)) for _ in range(2)]
        direct = P.block_cr_direct(quads, types, weights)
        if not direct.is_finite:
            continue
        space = P.ProductSpace(tuple(P.SpdFactor(2, s) for s in P.block_scales([2, 2])))
        pq = tuple(tuple(quads[i][slot] for i in range(2)) for slot in range(4))
        value = P.product_cr(pq, space, P.ProductType(tuple(types), weights)).scalar
        worst_block = max(worst_block, abs(direct.scalar - value))
    # flat x tree against the limit of the ray separation
    worst_flat = 0.0
    for _ in range(20):
        tree = random_ended_tree(5, rng)
        o = tree.vertices[0]
        c_end, d_end = rng.choice(sorted(tree.ends), size=2, replace=False)
        alpha = float(rng.uniform(0.1, 1.4))
        space = P.ProductSpace((P.FlatFactor(1), P.TreeFactor(tree)))
        pt = P.ProductType.angle(alpha)
        value = P.product_gromov(((1.0,), c_end), ((-1.0,), d_end), space, pt, (None, o)).scalar
        worst_flat = max(worst_flat, abs(value - _flat_tree_limit(tree, c_end, d_end, o, alpha)))
    ok = worst_h2 <= 1e-10 and worst_block <= 1e-8 and worst_flat <= 1e-10
    return CheckResult("09_products", ok, max(worst_h2, worst_flat, worst_block), 1e-8,
                       {"h2xh2": worst_h2, "block": worst_block, "flat_tree": worst_flat})


def _path(tree: EndedTree, a, b):
    prev = {a: None}
    stack = [a]
    while stack:
        u = stack.pop()
        for v, _ in tree.neighbours(u):
            if v not in prev:
                prev[v] = u
                stack.append(v)
    out = [b]
    while out[-1] != a:
        out.append(prev[out[-1]])
    return out[::-1]


def _flat_tree_limit(tree, c_end, d_end, o, alpha, t=1e8):
    """t - d(c_t, d_t)/2 for rays in R x T, extrapolated; the overlap is measured on explicit paths."""
    pc, pd = _path(tree, o, tree.attach(c_end)), _path(tree, o, tree.attach(d_end))
    shared = 0
    for a, b in zip(pc, pd):
        if a != b:
            break
        shared += 1
    lengths = {(u, v): ln for u, v, ln in tree.edges}
    lengths.update({(v, u): ln for u, v, ln in tree.edges})
    g = float(sum(lengths[pc[i], pc[i + 1]] for i in range(shared - 1)))
    s = math.sin(alpha)

    def f(tt):
        # 2t - sqrt((2t cos a)^2 + (2 t sin a - 2g)^2), halved, written without cancellation
        a = tt * tt - 2.0 * tt * g * s + g * g
        return (2.0 * tt * g * s - g * g) / (tt + math.sqrt(a))

    return 2.0 * f(2.0 * t) - f(t)


def _double_tripod(rng):
    k = int(rng.integers(1, 5))
    verts = list(range(k + 1))
    edges = [(i, i + 1, Fraction(int(rng.integers(1, 20)), int(rng.integers(1, 7)))) for i in range(k)]
    ends = {"z1": 0, "w1": 0, "z2": k, "w2": k}
    # optional hairs along the path
    for h in range(int(rng.integers(0, 3))):
        v = len(verts)
        verts.append(v)
        edges.append((int(rng.integers(0, k + 1)), v, Fraction(int(rng.integers(1, 9)), 2)))
        ends[f"h{h}"] = v
    return EndedTree(tuple(verts), tuple(edges), ends), 0, k


def _relabelled(tree: EndedTree, rng, scale=None):
    names = {v: f"v{p}" for v, p in zip(tree.vertices, rng.permutation(len(tree.vertices)))}
    ends = {f"E{e}": names[v] for e, v in tree.ends.items()}
    edges = tuple((names[u], names[v], ln) for u, v, ln in tree.edges)
    return EndedTree(tuple(names.values()), edges, ends), {e: f"E{e}" for e in tree.ends}


def _separating_edge(tree: EndedTree):
    """An edge with at least two ends on each side, so it shows up in some cross ratio."""
    for i, (u, v, _) in enumerate(tree.edges):
        side = set(_component(tree, u, v))
        inside = sum(1 for h in tree.ends.values() if h in side)
        if 2 <= inside <= len(tree.ends) - 2:
            return i
    return None


def _component(tree, start, banned):
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v, _ in tree.neighbours(u):
            if v != banned and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def check_trees(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_branch = 0.0
    for _ in range(20):
        tree, p, q = _double_tripod(rng)
        worst_branch = max(worst_branch, abs(float(branch_distance(tree, ("z1", "w1"), ("z2", "w2")) - tree.d(p, q))))
    worst_ext, rejected, trials = 0.0, 0, 0
    while trials < 10:
        tree = random_ended_tree(int(rng.integers(4, 9)), rng)
        edge = _separating_edge(tree)
        if edge is None:
            continue
        trials += 1
        image, f = _relabelled(tree, rng)
        iso = tree_moebius_extend(tree, image, f)
        for u, v in itertools.combinations(iso.vertex_map, 2):
            worst_ext = max(worst_ext, abs(float(tree.d(u, v) - image.d(iso.vertex_map[u], iso.vertex_map[v]))))
        worst_ext = max(worst_ext, iso.max_distance_error)
        bumped = tuple((u, v, ln * Fraction(101, 100) if i == edge else ln) for i, (u, v, ln) in enumerate(image.edges))
        try:
            tree_moebius_extend(tree, EndedTree(image.vertices, bumped, image.ends), f)
        except (NotMoebius, NotExtendable):
            rejected += 1
    ok = worst_branch <= 1e-12 and worst_ext <= 1e-9 and rejected == trials
    return CheckResult("10_trees", ok, max(worst_branch, worst_ext), 1e-9,
                       {"branch": worst_branch, "extension": worst_ext, "perturbations_rejected": rejected,
                        "trials": trials})


def check_moebius_audit(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    verdicts = True
    for n in (2, 3, 4):
        for _ in range(3):
            t = random_type(n, rng)
            dom = [random_flag(n, None, rng) for _ in range(8)]
            report = check_moebius(SampledMap.from_matrix(random_unimodular(n, rng), dom), t)
            worst = max(worst, report.max_deviation)
            verdicts = verdicts and report.is_moebius
    split = _swap_example(rng)
    ok = worst <= 1e-8 and verdicts and split["permutation"] == [1, 0] and split["ratio_error"] <= 1e-8
    return CheckResult("11_moebius_audit", ok, max(worst, split["ratio_error"]), 1e-8,
                       {"matrix_maps": worst, **split})


def _swap_example(rng, mu=(0.6, 0.8), n=2) -> dict:
    """f(x, y) = (y, x) on M x (mu1/mu2) M with weights mu; the rescaling is mu1/mu2."""
    mu1, mu2 = mu
    t = random_type(n, rng)
    space = P.ProductSpace((P.SpdFactor(n), P.SpdFactor(n, mu1 / mu2)))
    pt = P.ProductType((t, t), mu)
    reference = [_slots(_all_opposite_quad(n, rng)) for _ in range(2)]
    samples = []
    for _ in range(6):
        a, b = (_slots(_all_opposite_quad(n, rng)) for _ in range(2))
        samples.append(tuple((a[s], b[s]) for s in range(4)))
    image = [P.apply_pointwise(lambda p: (p[1], p[0]), q) for q in samples]
    rec = P.factor_split_recover(P.factor_cr_table(space, pt, samples, reference),
                                 P.factor_cr_table(space, pt, image, reference))
    return {"permutation": list(rec.permutation), "ratios": list(rec.ratios),
            "ratio_error": max(abs(rec.ratios[0] - mu1 / mu2), abs(rec.ratios[1] - mu2 / mu1))}


def check_degeneracy(seed: int = SEED) -> CheckResult:
    rng = np.random.default_rng(seed)
    bad = 0
    for k in range(200):
        n = 2 + k % 3
        t = random_type(n, rng)
        face, iface = t.signature, t.signature.involute()
        x, z = random_flag(n, face, rng), random_flag(n, face, rng)
        y, w = random_flag(n, iface, rng), random_flag(n, iface, rng)
        # force opposition failures in random slots
        if rng.random() < 0.5:
            y = make_flag(n, iface, x.basis[:, rng.permutation(n)] if rng.random() < 0.5 else x.basis)
        if rng.random() < 0.5:
            w = make_flag(n, iface, z.basis if rng.random() < 0.5 else x.basis)
        q = Quadruple(x, y, z, w)
        pattern = (is_opposite(x, y), is_opposite(z, w), is_opposite(x, w), is_opposite(z, y))
        if all(pattern):
            expected = Admissibility.ALL_OPPOSITE
        elif pattern[2] and pattern[3]:
            expected = Admissibility.ADMISSIBLE_MINUS
        elif pattern[0] and pattern[1]:
            expected = Admissibility.ADMISSIBLE_PLUS
        else:
            expected = Admissibility.INADMISSIBLE
        if classify(q) is not expected:
            bad += 1
            continue
        try:
            value = cr_scalar(q, t)
        except Inadmissible:
            bad += expected is not Admissibility.INADMISSIBLE
            continue
        want = {Admissibility.ALL_OPPOSITE: Kind.FINITE, Admissibility.ADMISSIBLE_MINUS: Kind.MINUS_INF,
                Admissibility.ADMISSIBLE_PLUS: Kind.PLUS_INF}.get(expected)
        bad += value.kind is not want
    return _result("12_degeneracy", float(bad), 0.0)


CHECKS = {
    "01_oracle_equivalence": check_oracle,
    "02_basepoint_independence": check_basepoint_independence,
    "03_basepoint_change": check_basepoint_change,
    "04_busemann_retract": check_busemann_retract,
    "05_symmetries_cocycles": check_symmetries,
    "06_vector_machinery": check_vector_machinery,
    "07_periods": check_periods,
    "08_geometric_interpretation": check_geometric_interpretation,
    "09_products": check_products,
    "10_trees": check_trees,
    "11_moebius_audit": check_moebius_audit,
    "12_degeneracy": check_degeneracy,
}


def run_all(seed: int = SEED) -> list[CheckResult]:
    return [CHECKS[name](seed) for name in sorted(CHECKS)]
