"""Periods: the cross ratio cr(g-, g x, g+, x) recovers the translation length of g.

Run with ``python3 demos/periods.py``.
"""

import numpy as np

from xratio.crossratio import period, symmetrized_translation
from xratio.sampling import random_flag, random_hyperbolic


def main():
    rng = np.random.default_rng(42)
    for n in (3, 4):
        g = random_hyperbolic(n, rng)
        _, ell = period(g, random_flag(n, None, rng))
        print(f"SL({n}) element with translation vector {np.round(ell, 6)}")
        print(f"  symmetrized: {np.round(symmetrized_translation(ell), 6)}")
        for k in range(3):
            v, _ = period(g, random_flag(n, None, rng))
            print(f"  period from random flag #{k}: {np.round(v.vector, 6)}")


if __name__ == "__main__":
    main()
