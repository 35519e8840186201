"""Sweep the total spin j and tabulate the tight additive variance bound.

For each j the direct eigenvalue minimization is cross-checked against the
sector-approximant bracket [c, c + delta].

Usage: python scripts/spin_variance_table.py [max_twice_j]
"""

import sys
import time
from fractions import Fraction

from qgeom.core import spin_operators
from qgeom.uncertainty import default_partition, min_sum_variances, sector_sum_bound


def main(max_twice_j=8):
    print(f"{'j':>5} {'bound':>12} {'sector c':>12} {'c+delta':>12} {'time[s]':>8}")
    for twice_j in range(1, max_twice_j + 1):
        j = Fraction(twice_j, 2)
        jx, jy, _ = spin_operators(j)
        t0 = time.monotonic()
        bound = min_sum_variances(jx, jy)
        px = default_partition(jx, tol=1e-4)
        py = default_partition(jy, tol=1e-4)
        c, delta = sector_sum_bound(jx, jy, px, py)
        dt = time.monotonic() - t0
        assert c <= bound.value + 1e-9 <= c + delta + 2e-9
        print(f"{str(j):>5} {bound.value:12.6f} {c:12.6f} {c + delta:12.6f} {dt:8.2f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 8)
