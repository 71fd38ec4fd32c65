"""Truncation traces of the composite counterexample: ||S_N*||, the pair lower
bound for v(S_N) and ||S_N - V_N||, as JSON lines ready for plotting."""

import argparse

from numrad.extremal import build_counterexample_S, verify_counterexample
from numrad.report import dumps
from numrad.spaces import INF


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--schedule", default="16,32,64,128,256")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    schedule = [int(v) for v in args.schedule.split(",")]
    for p, q in ((2, 1), (3, 1), (3, 2), (4, 2)):
        for outer in (INF, 1):
            rep = verify_counterexample(build_counterexample_S(64, 2, p, q, outer), schedule, args.seed, strict=False)
            print(dumps({"p": p, "q": q, "outer": str(outer), "formula": rep.adjoint_norm_formula,
                         "norm_S": rep.norm_S, "v_S": rep.v_S, "ve_S_upper": rep.ve_S_upper,
                         "traces": rep.traces}))


if __name__ == "__main__":
    main()
