"""Run the acceptance battery and write one JSON line per criterion.

    python3 scripts/run_acceptance.py --preset quick --out acceptance.jsonl
"""

import argparse
import sys

from numrad.acceptance import PRESETS, run_suite
from numrad.report import dumps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--preset", choices=sorted(PRESETS), default="quick")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()
    sink = open(args.out, "w") if args.out else None

    def progress(c):
        print(c.line(), file=sys.stderr, flush=True)
        if sink:
            sink.write(dumps(c.to_json()) + "\n")

    suite = run_suite(args.preset, args.seed, progress)
    print(f"{'PASS' if suite.passed else 'FAIL'}  total {suite.runtime:.1f}s", file=sys.stderr)
    if sink:
        sink.close()
    return 0 if suite.passed else 2


if __name__ == "__main__":
    sys.exit(main())
