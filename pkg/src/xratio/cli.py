"""The ``xr`` command line.

Every subcommand reads JSON files and writes one JSON document to standard
output (sorted keys, so output is byte-stable). Diagnostics go to standard
error. Exit codes: 0 success, 1 usage or input error, 2 geometric
degeneracy, 3 failed verification.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import acceptance, products
from .cartan import FaceSignature, TypeVector, involute, make_type
from .crossratio import CrValue, Quadruple, cr_project, cr_scalar, cr_vector, geom_interp, gromov_closed, period
from .errors import XrError
from .flags import Flag
from .moebius import MOEBIUS_THRESHOLD, SampledMap, check_moebius
from .rank1 import DiscBoundaryPoint, EndedTree, tree_cr, tree_gromov, tree_moebius_extend
from .spdspace import IdealPoint, SpdPoint, calibrate, gromov_oracle, oracle_profile

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE, EXIT_VERIFY = 0, 1, 2, 3
DEFAULT_SEED = 42
_EXIT = {"input": EXIT_USAGE, "degeneracy": EXIT_DEGENERATE, "verification": EXIT_VERIFY}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def default_tol(fallback: float) -> float:
    raw = os.environ.get("XR_TOL")
    if raw is None:
        return fallback
    try:
        tol = float(raw)
    except ValueError as exc:
        raise UsageError(f"XR_TOL={raw!r} is not a number") from exc
    if not tol > 0:
        raise UsageError("XR_TOL must be positive")
    return tol


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _type(path) -> TypeVector:
    rec = _load(path)
    if rec.get("normalize"):
        return make_type(int(rec["n"]), rec["values"], rec.get("mults"), normalize=True)
    return TypeVector.from_json(rec)


def _quad(path) -> Quadruple:
    return Quadruple.from_json(_load(path))


def _base(path):
    return None if path is None else SpdPoint.from_json(_load(path))


def _value(v: CrValue) -> dict:
    rec = v.to_json()
    if v.is_finite and v.scalar is not None:
        rec["value"] = float(v.scalar)
    return rec


def _finite_or_degenerate(rec: dict, v: CrValue):
    return rec, (EXIT_OK if v.is_finite else EXIT_DEGENERATE)


# ---------------------------------------------------------------------------
# subcommands; each returns (document, exit code)


def cmd_gromov(a):
    t = _type(a.type)
    v = gromov_closed(Flag.from_json(_load(a.x)), Flag.from_json(_load(a.y)), t, _base(a.base))
    return _finite_or_degenerate(_value(v), v)


def cmd_cr(a):
    v = cr_scalar(_quad(a.quad), _type(a.xi), _base(a.base), a.method)
    return _finite_or_degenerate(_value(v), v)


def cmd_cr_vector(a):
    face = None if a.face is None else FaceSignature.from_json(_load(a.face))
    v = cr_vector(_quad(a.quad), face, _base(a.base))
    return _finite_or_degenerate(v.to_json(), v)


def cmd_cr_project(a):
    rec = _load(a.vector)
    v = CrValue.from_json(rec) if isinstance(rec, dict) else CrValue.finite(np.asarray(rec, dtype=float))
    q = None if a.quad is None else _quad(a.quad)
    out = cr_project(v, FaceSignature.from_json(_load(a.face)), q)
    return _finite_or_degenerate(out.to_json(), out)


def cmd_period(a):
    g = np.array(_load(a.g), dtype=float)
    vec, ell = period(g, Flag.from_json(_load(a.x)))
    return {"cr": vec.to_json(), "translation": [float(v) for v in ell]}, EXIT_OK


def cmd_geom_interp(a):
    v = geom_interp(_quad(a.quad), _base(a.base))
    return {"displacement": [float(c) for c in v]}, EXIT_OK


def cmd_oracle(a):
    t = _type(a.type)
    x = IdealPoint(Flag.from_json(_load(a.x)), t)
    y = IdealPoint(Flag.from_json(_load(a.y)), involute(t))
    o = _base(a.base) or SpdPoint.identity(t.n)
    return {"t": a.t, "profile": oracle_profile(x, y, o, a.t), "value": gromov_oracle(x, y, o, a.t)}, EXIT_OK


def cmd_calibrate(a):
    report = calibrate(a.n, a.trials, a.seed)
    rec = report.to_json()
    rec["seed"] = a.seed
    return rec, EXIT_OK


def cmd_tree_gromov(a):
    tree = EndedTree.from_json(_load(a.tree))
    o = tree.vertices[0] if a.base is None else _vertex(tree, a.base)
    return {"value": float(tree_gromov(tree, a.z, a.w, o))}, EXIT_OK


def _vertex(tree, name):
    for v in tree.vertices:
        if str(v) == name:
            return v
    raise UsageError(f"unknown vertex {name!r}")


def cmd_tree_cr(a):
    tree = EndedTree.from_json(_load(a.tree))
    v = tree_cr(tree, *a.ends)
    return _finite_or_degenerate(_value(v), v)


def cmd_tree_extend(a):
    t1 = EndedTree.from_json(_load(a.tree1))
    t2 = EndedTree.from_json(_load(a.tree2))
    iso = tree_moebius_extend(t1, t2, dict(_load(a.map)), default_tol(a.tol))
    return iso.to_json(), EXIT_OK


def _factor_point(factor, rec):
    if isinstance(factor, products.SpdFactor):
        return Flag.from_json(rec)
    if isinstance(factor, products.H2Factor):
        return DiscBoundaryPoint(float(rec))
    if isinstance(factor, products.FlatFactor):
        return tuple(float(c) for c in rec)
    return rec


def cmd_product_cr(a):
    rec = _load(a.space)
    space = products.ProductSpace.from_json(rec)
    types = [None if t in (None, "point") else TypeVector.from_json(t)
             for t in rec.get("types", [None] * len(space.factors))]
    pt = products.ProductType(tuple(types), rec["weights"])
    quad = _load(a.quad)
    q = tuple(tuple(_factor_point(f, p) for f, p in zip(space.factors, quad[k])) for k in "xyzw")
    v = products.product_cr(q, space, pt)
    return _finite_or_degenerate(_value(v), v)


def cmd_moebius_check(a):
    f = SampledMap.from_json(_load(a.map))
    report = check_moebius(f, _type(a.type), a.budget, a.seed, default_tol(MOEBIUS_THRESHOLD))
    return report.to_json(), (EXIT_OK if report.is_moebius else EXIT_VERIFY)


def cmd_suite(a):
    results = acceptance.run_all(a.seed)
    for r in results:
        print(r.line(), file=sys.stderr)
    doc = {"seed": a.seed, "passed": all(r.passed for r in results), "checks": [r.to_json() for r in results]}
    return doc, (EXIT_OK if doc["passed"] else EXIT_VERIFY)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xr", description="Gromov products and cross ratios on flag manifolds, trees and products.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("gromov", cmd_gromov, "closed-form Gromov product of two flags")
    sp.add_argument("--type", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--base")

    sp = add("cr", cmd_cr, "scalar cross ratio of a quadruple")
    sp.add_argument("--xi", required=True)
    sp.add_argument("--quad", required=True)
    sp.add_argument("--base")
    sp.add_argument("--method", choices=["wedge", "gromov"])

    sp = add("cr-vector", cmd_cr_vector, "vector cross ratio of a quadruple")
    sp.add_argument("--quad", required=True)
    sp.add_argument("--face")
    sp.add_argument("--base")

    sp = add("cr-project", cmd_cr_project, "project a vector cross ratio onto a face")
    sp.add_argument("--vector", required=True)
    sp.add_argument("--face", required=True)
    sp.add_argument("--quad")

    sp = add("period", cmd_period, "period of a hyperbolic matrix")
    sp.add_argument("--g", required=True)
    sp.add_argument("--x", required=True)

    sp = add("geom-interp", cmd_geom_interp, "flat displacement of the retraction word")
    sp.add_argument("--quad", required=True)
    sp.add_argument("--base")

    sp = add("oracle", cmd_oracle, "Gromov product from the limit definition")
    sp.add_argument("--type", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--base")
    sp.add_argument("--t", type=float, default=1e4)

    sp = add("calibrate", cmd_calibrate, "fit the metric constant against the oracle")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)

    sp = add("tree-gromov", cmd_tree_gromov, "Gromov product of two ends of a tree")
    sp.add_argument("--tree", required=True)
    sp.add_argument("--z", required=True)
    sp.add_argument("--w", required=True)
    sp.add_argument("--base")

    sp = add("tree-cr", cmd_tree_cr, "cross ratio of four ends of a tree")
    sp.add_argument("--tree", required=True)
    sp.add_argument("--ends", nargs=4, required=True, metavar=("Z1", "W1", "Z2", "W2"))

    sp = add("tree-extend", cmd_tree_extend, "extend an end bijection to an isometry of median subtrees")
    sp.add_argument("--tree1", required=True)
    sp.add_argument("--tree2", required=True)
    sp.add_argument("--map", required=True)
    sp.add_argument("--tol", type=float, default=1e-9)

    sp = add("product-cr", cmd_product_cr, "cross ratio in a product space")
    sp.add_argument("--space", required=True)
    sp.add_argument("--quad", required=True)

    sp = add("moebius-check", cmd_moebius_check, "audit a sampled map for cross-ratio preservation")
    sp.add_argument("--map", required=True)
    sp.add_argument("--type", required=True)
    sp.add_argument("--budget", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)

    sp = add("suite", cmd_suite, "run the acceptance battery")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return p


def _clean(obj):
    """Replace non-finite floats, which JSON cannot carry."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def dispatch(argv=None) -> tuple[dict, int]:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        return {"error": "usage", "message": str(exc)}, EXIT_USAGE
    except XrError as exc:
        return {"error": type(exc).__name__, "category": exc.category, "message": str(exc)}, _EXIT[exc.category]
    except (KeyError, TypeError, ValueError) as exc:
        return {"error": "input", "message": f"{type(exc).__name__}: {exc}"}, EXIT_USAGE


def main(argv=None) -> int:
    doc, code = dispatch(argv)
    if "error" in doc:
        print(f"xr: {doc['message']}", file=sys.stderr)
    print(json.dumps(_clean(doc), sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
