"""End-to-end runs: induce a domain from demonstrations, then plan and execute task suites."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from ..bridge.backends import Backend, FaultInjectingBackend, OracleBackend, RemoteBackend, TranscriptLog
from ..bridge.induction import InductionConfig, InductionContext, induce_domain, induced_problem
from ..features import FeatureConfig
from ..loca import execute_plan
from ..pddl.grounding import GroundingCapError
from ..pddl.solver import solve
from ..scene import Trajectory
from .tasks import Task, TaskSpec, generate_task

ROW_FIELDS = ("run", "task", "category", "n_objects", "seed", "status", "reason", "plan_length",
              "reference_plan_length", "replans", "actions_executed", "effects_ok")
TIME_FIELDS = ("run", "task", "solve_time", "exec_time", "total_time")


@dataclass
class PipelineConfig:
    backend: str = "oracle"
    k: int = 10
    seed: int = 0
    runs: int = 3
    u_scale: float = 1.0
    features: str | None = None
    time_limit: float | None = None  # overrides the per-task limit
    workers: int = 1
    fault_p: float = 0.0
    frames_per_segment: int = 2

    def make_backend(self) -> Backend:
        if self.backend == "oracle":
            inner: Backend = OracleBackend()
        elif self.backend == "remote":
            inner = RemoteBackend.from_env()
        else:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.fault_p > 0:
            return FaultInjectingBackend(inner, self.fault_p, self.seed)
        return inner


def stderr(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    m = sum(values) / len(values)
    var = sum((v - m) ** 2 for v in values) / (len(values) - 1)
    return math.sqrt(var / len(values))


@dataclass
class BenchReport:
    rows: list[dict] = field(default_factory=list)
    timings: list[dict] = field(default_factory=list)
    induction: list[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def runs(self) -> list[int]:
        return sorted({r["run"] for r in self.rows} | {i["run"] for i in self.induction})

    def success_rates(self, rows: Sequence[dict] | None = None) -> list[float]:
        rows = self.rows if rows is None else rows
        out = []
        for run in self.runs:
            rr = [r for r in rows if r["run"] == run]
            if rr:
                out.append(100.0 * sum(r["status"] == "success" for r in rr) / len(rr))
        return out

    def aggregate(self, rows: Sequence[dict] | None = None) -> dict:
        rates = self.success_rates(rows)
        if not rates:
            return {"success_mean": None, "success_stderr": None, "n_tasks": 0}
        return {"success_mean": round(sum(rates) / len(rates), 6), "success_stderr": round(stderr(rates), 6),
                "n_tasks": len(rows if rows is not None else self.rows)}

    def series(self) -> list[dict]:
        """Success rate against object count, per category (plot-ready)."""
        out = []
        keys = sorted({(r["category"], r["n_objects"]) for r in self.rows})
        for cat, n in keys:
            sub = [r for r in self.rows if r["category"] == cat and r["n_objects"] == n]
            out.append({"category": cat, "n_objects": n, **self.aggregate(sub)})
        return out

    def to_json(self) -> dict:
        cats = sorted({r["category"] for r in self.rows})
        return {"config": self.config, "overall": self.aggregate(),
                "by_category": {c: self.aggregate([r for r in self.rows if r["category"] == c]) for c in cats},
                "series": self.series(), "induction": self.induction, "rows": self.rows}

    def rows_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, ROW_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows)
        return buf.getvalue()

    def save(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(self.to_json(), indent=1, sort_keys=True))
        (out / "rows.csv").write_text(self.rows_csv())
        with open(out / "series.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, ("category", "n_objects", "success_mean", "success_stderr", "n_tasks"),
                               lineterminator="\n")
            w.writeheader()
            w.writerows(self.series())
        with open(out / "timings.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, TIME_FIELDS, lineterminator="\n")
            w.writeheader()
            w.writerows(self.timings)
        return out


def _row(run: int, task: Task, status: str, reason: str = "", **kw) -> dict:
    s = task.spec
    row = {"run": run, "task": s.name, "category": s.category, "n_objects": s.n_objects, "seed": s.seed,
           "status": status, "reason": reason, "plan_length": None,
           "reference_plan_length": task.stats.get("reference_plan_length"),
           "replans": 0, "actions_executed": 0, "effects_ok": 0}
    row.update(kw)
    return row


def run_task(task: Task, domain, library, run: int, seed: int, time_limit: float | None = None,
             frames_per_segment: int = 2) -> tuple[dict, dict, object]:
    """Solve then execute within one shared budget; returns (row, timing, trace)."""
    budget = time_limit if time_limit is not None else task.spec.time_limit
    t0 = time.perf_counter()
    timing = {"run": run, "task": task.spec.name, "solve_time": 0.0, "exec_time": 0.0, "total_time": 0.0}
    try:
        prob = induced_problem(task.scene, task.goal_scene, library, domain, task.spec.name)
        res = solve(prob, domain, budget=budget)
    except GroundingCapError as e:
        return _row(run, task, "failed", f"grounding: {e}"), timing, None
    timing["solve_time"] = round(time.perf_counter() - t0, 4)
    if not res.solved:
        timing["total_time"] = timing["solve_time"]
        return _row(run, task, "failed", res.status), timing, None
    left = budget - (time.perf_counter() - t0)
    t1 = time.perf_counter()
    trace = execute_plan(task.scene, res.plan, domain, library, prob.goal, budget=left,
                         seed=seed, frames_per_segment=frames_per_segment)
    timing["exec_time"] = round(time.perf_counter() - t1, 4)
    timing["total_time"] = round(time.perf_counter() - t0, 4)
    done = [s for s in trace.steps if s.ok]
    row = _row(run, task, "success" if trace.success else "failed", trace.reason,
               plan_length=len(res.plan), replans=trace.replans, actions_executed=len(done),
               effects_ok=sum(bool(s.effects_ok) for s in done))
    return row, timing, trace


def run_pipeline(demos: Sequence[Trajectory], specs: Sequence[TaskSpec], config: PipelineConfig | None = None,
                 backend: Backend | None = None, out_dir: str | Path | None = None,
                 transcript: str | Path | None = None) -> BenchReport:
    """Induce once per run, then solve and execute every task; repeat `runs` times."""
    config = config or PipelineConfig()
    backend = backend or config.make_backend()
    fc = FeatureConfig.load(config.features) if config.features else None
    report = BenchReport(config={k: v for k, v in asdict(config).items()})
    if not specs:
        return report
    tasks = [generate_task(s) for s in specs]
    ctx: InductionContext | None = None
    for run in range(config.runs):
        seed = config.seed + run
        icfg = InductionConfig(k=config.k, seed=seed, features=fc)
        if fc is None:
            icfg.features = FeatureConfig.load(icfg.feature_config().to_json())
        icfg.features.u_scale = config.u_scale
        if ctx is None:
            ctx = InductionContext(demos, icfg)
        else:
            ctx.config = icfg
        log = TranscriptLog(path=Path(transcript) if transcript else None, keep=False)
        result = induce_domain(demos, backend, context=ctx, log=log)
        info = {"run": run, **result.summary()}
        report.induction.append(info)
        if not result.ok:
            reasons = ";".join(f"{i}:{r}" for i, r in sorted(result.reasons.items()))
            for t in tasks:
                report.rows.append(_row(run, t, "failed", f"induction({reasons})"))
            continue

        def one(t: Task, run=run, seed=seed, result=result):
            return run_task(t, result.domain, result.library, run, seed, config.time_limit,
                            config.frames_per_segment)

        if config.workers > 1:
            with ThreadPoolExecutor(config.workers) as pool:
                outs = list(pool.map(one, tasks))
        else:
            outs = [one(t) for t in tasks]
        for row, timing, _ in outs:
            report.rows.append(row)
            report.timings.append(timing)
    if out_dir is not None:
        report.save(out_dir)
    return report


def suite(category: str, n_values: Sequence[int], seeds: Sequence[int], time_limit: float = 50.0) -> list[TaskSpec]:
    return [TaskSpec(category, n, s, time_limit) for n in n_values for s in seeds]
