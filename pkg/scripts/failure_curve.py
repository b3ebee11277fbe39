"""Induction failure rate against k under injected independent candidate failures."""

import argparse
import json

from pddl_induction.bench.failure import failure_curve
from pddl_induction.bench.tasks import stack_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=0.4)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--k", type=int, nargs="+", default=[1, 5, 10, 15])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for pt in failure_curve([stack_demo()], args.k, args.p, args.trials, args.seed):
        print(json.dumps(pt.to_json()))


if __name__ == "__main__":
    main()
