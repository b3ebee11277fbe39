"""Write the generated demonstrations as JSON trajectories."""

import argparse
from pathlib import Path

from pddl_induction.bench.tasks import BUILTIN_DEMOS
from pddl_induction.scene import save_trajectory

DEFAULT_OUT = Path(__file__).resolve().parent.parent / "src" / "pddl_induction" / "data" / "demos"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    ap.add_argument("names", nargs="*", default=["stack", "unstack", "hanoi", "align"])
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.names:
        traj = BUILTIN_DEMOS[name]()
        path = args.out / f"{name}.json"
        save_trajectory(traj, path)
        print(f"{path}: {len(traj)} steps")


if __name__ == "__main__":
    main()
