"""Four lines in the plane: Gromov products two ways, then the cross ratio and its flat displacement.

Run with ``python3 demos/plane_lines.py``.
"""

import math

import numpy as np

from xratio.cartan import make_type
from xratio.crossratio import Quadruple, cr_scalar, cr_vector, geom_interp, gromov_closed
from xratio.flags import make_flag
from xratio.spdspace import IdealPoint, SpdPoint, gromov_oracle


def line(a, b):
    # the full flag of R^2 whose first step is the line through (a, b)
    basis = np.array([[a, -b], [b, a]], dtype=float)
    return make_flag(2, (1, 2), basis)


def main():
    xi = make_type(2, (1.0, -1.0), normalize=True)
    x, y, z, w = line(1, 0), line(0, 1), line(1, 1), line(1, -1)
    o = SpdPoint.identity(2)

    print("Gromov products at the identity")
    for name, (p, q) in {"(x|y)": (x, y), "(x|z)": (x, z), "(z|w)": (z, w)}.items():
        closed = gromov_closed(p, q, xi, o).scalar
        limit = gromov_oracle(IdealPoint(p, xi), IdealPoint(q, xi), o)
        print(f"  {name}: closed form {closed:.10f}, limit of rays {limit:.10f}")

    q = Quadruple(x, y, z, w)
    cr = cr_scalar(q, xi).scalar
    print(f"\ncr(x, y, z, w) = {cr:.10f}  (2 sqrt 2 log 2 = {2 * math.sqrt(2) * math.log(2):.10f})")
    print(f"same value from four Gromov products: {cr_scalar(q, xi, o).scalar:.10f}")
    print(f"vector cross ratio: {cr_vector(q).vector}")
    print(f"flat displacement of the retraction word: {geom_interp(q, o)}  (twice the vector)")


if __name__ == "__main__":
    main()
