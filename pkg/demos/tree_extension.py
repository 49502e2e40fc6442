"""Trees: recovering branch distances and isometries from cross ratios of ends.

Run with ``python3 demos/tree_extension.py``.
"""

from fractions import Fraction

import numpy as np

from xratio.errors import NotExtendable, NotMoebius
from xratio.rank1 import EndedTree, branch_distance, tree_moebius_extend
from xratio.sampling import random_ended_tree


def main():
    dumbbell = EndedTree(("p", "q"), (("p", "q", Fraction(7, 3)),), {"z1": "p", "w1": "p", "z2": "q", "w2": "q"})
    print(f"d(p, q) = {dumbbell.d('p', 'q')}, read off cr(z1, w2, z2, w1) = "
          f"{branch_distance(dumbbell, ('z1', 'w1'), ('z2', 'w2'))}")

    rng = np.random.default_rng(42)
    tree = random_ended_tree(6, rng)
    iso = tree_moebius_extend(tree, tree, {e: e for e in tree.ends})
    print(f"\nrandom tree with {len(tree.vertices)} vertices and ends {sorted(tree.ends)}")
    print(f"identity on ends extends to medians {sorted(iso.vertex_map)}")
    for u, v, a, b in iso.edges:
        print(f"  median edge {u}-{v}: length {a} in source, {b} in target")

    doubled = tree.scaled(2)
    try:
        tree_moebius_extend(tree, doubled, {e: e for e in tree.ends})
    except (NotMoebius, NotExtendable) as exc:
        print(f"\ninto the doubled tree: rejected ({exc})")
    halved = tree_moebius_extend(tree, doubled.scaled(Fraction(1, 2)), {e: e for e in tree.ends})
    print(f"after halving the target again: accepted, error {halved.max_distance_error}")


if __name__ == "__main__":
    main()
