"""Predicate accuracy under uniform position noise (above, adjacent-right)."""

import argparse

from pddl_induction.bench.noise import noise_study
from pddl_induction.bench.tasks import TaskSpec, generate_task, stack_demo
from pddl_induction.bridge import InductionConfig, OracleBackend, induce_domain


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    lib = induce_domain([stack_demo()], OracleBackend(), InductionConfig(k=1)).library
    scenes = [generate_task(TaskSpec(cat, n, s)).goal_scene
              for cat in ("stacking", "alignment") for n in (4, 5) for s in range(3)]
    table = noise_study(lib, scenes, seed=args.seed, repeats=args.repeats)
    print(table.to_csv(), end="")
    print(f"non-increasing: {table.non_increasing()}")


if __name__ == "__main__":
    main()
