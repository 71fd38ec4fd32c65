"""Distribution of |multistart - grid| for random operators on real l_p^n."""

import argparse
import time

import numpy as np

from numrad.operators import MatrixOperator
from numrad.radius import numerical_radius, radius_grid
from numrad.spaces import lp


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'p':>5} {'n':>2} {'median gap':>12} {'max gap':>12} {'ms/op':>8}")
    for p in (1.25, 1.5, 2, 3, 4):
        for n in (2, 3):
            rng = np.random.default_rng([args.seed, n, int(10 * p)])
            gaps, t0 = [], time.perf_counter()
            for _ in range(args.count):
                T = MatrixOperator.on(lp(n, p), rng.standard_normal((n, n)))
                gaps.append(abs(numerical_radius(T, "multistart", seed=args.seed).value - radius_grid(T).value))
            ms = 1000 * (time.perf_counter() - t0) / args.count
            print(f"{p:>5} {n:>2} {np.median(gaps):12.2e} {max(gaps):12.2e} {ms:8.1f}")


if __name__ == "__main__":
    main()
