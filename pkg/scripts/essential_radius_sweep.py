"""Essential radius of harmonic and constant tails three ways, over p and c."""

import argparse

from numrad.operators import constant, harmonic
from numrad.radius import essential_radius_report


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--schedule", default="32,64,128,256")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    schedule = [int(v) for v in args.schedule.split(",")]
    print(f"{'family':>10} {'c':>5} {'p':>4} {'exact':>8} {'projections':>12} {'weak':>10} {'gap':>9}")
    for name, make in (("harmonic", harmonic), ("constant", constant)):
        for c in (0.5, 1.0, 2.0):
            for p in (1.5, 2, 3):
                r = essential_radius_report(make(c, p=p), schedule, args.seed)
                print(f"{name:>10} {c:5.2f} {p:>4} {r['exact']:8.5f} {r['projections']['extrapolated']:12.8f} "
                      f"{r['weak']['extrapolated']:10.8f} {r['max_pairwise_gap']:9.2e}")


if __name__ == "__main__":
    main()
