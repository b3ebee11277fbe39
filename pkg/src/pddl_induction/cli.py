"""Command-line interface: derive, plan, exec, bench, score, noise."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench.tasks import BUILTIN_DEMOS, CATEGORIES, TaskSpec, generate_task, reference_domain
from .pddl.ast import GroundStep, Plan
from .pddl.parser import PDDLSyntaxError, parse_domain, parse_problem, read_tree
from .pddl.solver import NO_PLAN, PLAN, TIMEOUT, solve

log = logging.getLogger("pddl_induction")

EXIT_OK, EXIT_FAIL, EXIT_NO_PLAN, EXIT_TIMEOUT = 0, 1, 2, 3


def _demos(args):
    from .scene import ingest_demonstration
    out = [ingest_demonstration(p) for p in args.demo or ()]
    out += [BUILTIN_DEMOS[name]() for name in args.builtin or ()]
    if not out:
        raise SystemExit("give at least one --demo FILE or --builtin NAME")
    return out


def _range(text: str) -> list[int]:
    if "-" in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def read_plan(text: str) -> Plan:
    steps = []
    for line in text.splitlines():
        line = line.split(";", 1)[0].strip()
        if not line:
            continue
        node = read_tree(line)
        items = [c.text for c in node.items]
        steps.append(GroundStep(items[0], tuple(items[1:])))
    return Plan(tuple(steps))


def _backend(args):
    from .bridge.backends import FaultInjectingBackend, OracleBackend, RemoteBackend
    inner = OracleBackend() if args.backend == "oracle" else RemoteBackend.from_env()
    return FaultInjectingBackend(inner, args.fault_p, args.seed) if args.fault_p > 0 else inner


def cmd_derive(args) -> int:
    from .bridge.backends import TranscriptLog
    from .bridge.induction import InductionConfig, induce_domain
    from .features import FeatureConfig
    from .bridge.induction import DEFAULT_FEATURES
    fc = FeatureConfig.load(args.features or DEFAULT_FEATURES)
    fc.u_scale = args.u_scale
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tlog = TranscriptLog(path=out / "transcript.jsonl", keep=False)
    (out / "transcript.jsonl").write_text("")
    res = induce_domain(_demos(args), _backend(args), InductionConfig(k=args.prompts, seed=args.seed, features=fc),
                        log=tlog)
    res.save(out)
    print(json.dumps(res.summary(), indent=1))
    if not res.ok:
        print("induction failed: every candidate was eliminated", file=sys.stderr)
        return EXIT_FAIL
    print(f"domain written to {out / 'domain.pddl'}")
    return EXIT_OK


def cmd_plan(args) -> int:
    try:
        dom = parse_domain(Path(args.domain).read_text())
        prob = parse_problem(Path(args.problem).read_text(), dom)
    except (PDDLSyntaxError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    res = solve(prob, dom, budget=args.time_limit, mode=args.mode)
    if res.status == PLAN:
        text = res.plan.to_text()
        if args.out:
            Path(args.out).write_text(text)
        print(text, end="" if text.endswith("\n") or not text else "\n")
        print(f"; {len(res.plan)} steps, {res.stats.get('expanded', 0)} expanded", file=sys.stderr)
        return EXIT_OK
    print(res.status, file=sys.stderr)
    return {NO_PLAN: EXIT_NO_PLAN, TIMEOUT: EXIT_TIMEOUT}[res.status]


def cmd_exec(args) -> int:
    from .loca import execute_plan
    from .predicates import Library
    from .scene import load_scene
    from .bridge.induction import induced_problem
    dom = parse_domain(Path(args.domain).read_text())
    lib = Library.load(args.library)
    scene = load_scene(args.scene)
    if args.goal_scene:
        goal = induced_problem(scene, load_scene(args.goal_scene), lib, dom).goal
    elif args.problem:
        goal = parse_problem(Path(args.problem).read_text(), dom).goal
    else:
        raise SystemExit("give --goal-scene or --problem")
    plan = read_plan(Path(args.plan).read_text()) if args.plan else None
    trace = execute_plan(scene, plan, dom, lib, goal, budget=args.time_limit, seed=args.seed)
    trace.save(args.out, with_frames=args.frames)
    print(json.dumps({"success": trace.success, "reason": trace.reason, "steps": len(trace.steps),
                      "replans": trace.replans}))
    return EXIT_OK if trace.success else EXIT_FAIL


def cmd_bench(args) -> int:
    from .bench.pipeline import PipelineConfig, run_pipeline, suite
    specs = []
    for cat in args.category:
        specs += suite(cat, _range(args.n), range(args.seeds), args.time_limit)
    cfg = PipelineConfig(args.backend, args.prompts, args.seed, args.runs, args.u_scale, args.features,
                         None, args.workers, args.fault_p)
    out = Path(args.out)
    rep = run_pipeline(_demos(args), specs, cfg, out_dir=out, transcript=out / "transcript.jsonl")
    print(json.dumps({"overall": rep.aggregate(), "by_category": rep.to_json()["by_category"]}, indent=1))
    return EXIT_OK


def cmd_score(args) -> int:
    from .bench.quality import score_domain
    gen = parse_domain(Path(args.generated).read_text())
    ref = parse_domain(Path(args.reference).read_text()) if Path(args.reference).exists() \
        else reference_domain(args.reference)
    probs = [parse_problem(Path(p).read_text(), gen) for p in args.problem or ()]
    q = score_domain(gen, ref, probs, budget=args.time_limit)
    print(json.dumps(q.to_json(), indent=1))
    return EXIT_OK


def cmd_noise(args) -> int:
    from .bench.noise import noise_study
    from .predicates import Library
    from .scene import load_scene
    lib = Library.load(args.library)
    scenes = [load_scene(p) for p in args.scene or ()]
    for cat in args.category or ():
        scenes += [generate_task(TaskSpec(cat, n, s)).goal_scene for n in (4, 5) for s in range(3)]
    if not scenes:
        raise SystemExit("give --scene FILE or --category NAME")
    table = noise_study(lib, scenes, [float(v) for v in args.levels.split(",")], args.seed, args.predicate,
                        repeats=args.repeats)
    text = table.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pddl-induce", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    def induction_flags(sp):
        sp.add_argument("--demo", action="append", help="demonstration JSON file (repeatable)")
        sp.add_argument("--builtin", action="append", choices=sorted(BUILTIN_DEMOS),
                        help="use a generated demonstration (repeatable)")
        sp.add_argument("--backend", choices=("oracle", "remote"), default="oracle")
        sp.add_argument("--prompts", type=int, default=10, help="parallel candidates k")
        sp.add_argument("--u-scale", type=float, default=1.0, help="interval length as a multiple of d_min")
        sp.add_argument("--features", help="feature family config (JSON)")
        sp.add_argument("--fault-p", type=float, default=0.0, help="inject candidate failures")
        sp.add_argument("--seed", type=int, default=0)

    d = sub.add_parser("derive", help="demonstrations -> PDDL domain")
    induction_flags(d)
    d.add_argument("--out", default="derived")
    d.set_defaults(func=cmd_derive)

    pl = sub.add_parser("plan", help="domain + problem -> plan")
    pl.add_argument("--domain", required=True)
    pl.add_argument("--problem", required=True)
    pl.add_argument("--time-limit", type=float, default=50.0)
    pl.add_argument("--mode", choices=("bfs", "gbfs"), default="bfs")
    pl.add_argument("--out")
    pl.set_defaults(func=cmd_plan)

    ex = sub.add_parser("exec", help="plan -> execution trace")
    ex.add_argument("--domain", required=True)
    ex.add_argument("--library", required=True)
    ex.add_argument("--scene", required=True)
    ex.add_argument("--goal-scene")
    ex.add_argument("--problem")
    ex.add_argument("--plan", help="plan file; solved from the scene when omitted")
    ex.add_argument("--time-limit", type=float, default=50.0)
    ex.add_argument("--seed", type=int, default=0)
    ex.add_argument("--frames", action="store_true", help="include every frame in the trace")
    ex.add_argument("--out", default="trace.json")
    ex.set_defaults(func=cmd_exec)

    b = sub.add_parser("bench", help="induce once per run and solve task suites")
    induction_flags(b)
    b.add_argument("--category", action="append", choices=CATEGORIES, required=True)
    b.add_argument("--n", default="3-6", help="object counts, e.g. 3-6 or 3,5")
    b.add_argument("--seeds", type=int, default=10, help="tasks per object count")
    b.add_argument("--runs", type=int, default=3)
    b.add_argument("--time-limit", type=float, default=50.0)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", default="bench-out")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("score", help="missing/redundant elements against a reference")
    s.add_argument("--generated", required=True)
    s.add_argument("--reference", required=True, help="PDDL file or shipped fixture name")
    s.add_argument("--problem", action="append", help="validation problem over the generated domain")
    s.add_argument("--time-limit", type=float, default=10.0)
    s.set_defaults(func=cmd_score)

    n = sub.add_parser("noise", help="predicate accuracy under position noise")
    n.add_argument("--library", required=True)
    n.add_argument("--scene", action="append")
    n.add_argument("--category", action="append", choices=CATEGORIES, help="use generated goal scenes")
    n.add_argument("--predicate", action="append", default=None)
    n.add_argument("--levels", default="5,10,15,20,25,30")
    n.add_argument("--repeats", type=int, default=3)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--out")
    n.set_defaults(func=cmd_noise)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "predicate", "unset") is None:
        args.predicate = ["above", "adjacent-right"]
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
