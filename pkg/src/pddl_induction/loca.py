"""Turn symbolic plan steps into collision-free placements and waypoint motions.

Each ground step names an object to move (the first argument of its first
feature-constrained add effect; steps that add nothing move nothing). A
placement is sampled by rejection: proposals come from the interval constraints
of the add effects, from uniform positions dropped onto the highest support
below them, and from plain uniform positions.
A proposal is accepted when the resulting scene is feasible, every add effect
holds in it and no delete effect does.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .features import POSITION_Q
from .pddl.ast import And, Atom, Domain, Formula, GroundStep, Plan, Problem, conjuncts
from .pddl.grounding import ground_action, holds
from .pddl.solver import solve
from .predicates import FIRST, Library, eval_predicate, ground_state
from .scene import Scene, _xy_overlap, apply_placement

DEFAULT_MAX_SAMPLES = 2000
DEFAULT_FRAMES = 10  # per waypoint segment
LIFT_MARGIN = 0.05


class UngroundableEffect(ValueError):
    """The step has no feature-constrained add effect to place an object by."""


@dataclass(frozen=True)
class ConstraintSet:
    action: str
    args: tuple[str, ...]
    target: str | None  # None when the step adds nothing
    required: tuple[Atom, ...]
    forbidden: tuple[Atom, ...]

    def satisfied(self, scene: Scene, library: Library) -> bool:
        return all(eval_predicate(a.pred, a.args, scene, library) for a in self.required) and \
            not any(eval_predicate(a.pred, a.args, scene, library) for a in self.forbidden)


def constraints_for_action(step: GroundStep, domain: Domain, library: Library) -> ConstraintSet:
    act = domain.action(step.action)
    if len(step.args) != act.arity:
        raise ValueError(f"{step.action} takes {act.arity} arguments, got {len(step.args)}")
    b = dict(zip(act.params, step.args))
    adds = sorted(a.substitute(b) for a in act.add)
    dels = sorted(a.substitute(b) for a in act.delete)
    known = lambda a: a.pred in library  # noqa: E731
    if not adds:
        return ConstraintSet(step.action, tuple(step.args), None, (), tuple(filter(known, dels)))
    first = [a for a in adds if a.pred in library and library[a.pred].order == FIRST and a.args]
    if not first:
        raise UngroundableEffect(f"{step}: no first-order add effect to place by")
    return ConstraintSet(step.action, tuple(step.args), first[0].args[0],
                         tuple(filter(known, adds)), tuple(filter(known, dels)))


@dataclass(frozen=True)
class Placement:
    target: str | None
    position: tuple[float, float, float] | None
    samples: int
    scene: Scene = field(repr=False, compare=False)


def _support_z(scene: Scene, oid: str, x: float, y: float) -> float:
    obj = scene[oid]
    probe = obj.moved(x, y, obj.position[2])
    top = scene.table_height
    for o in scene.objects:
        if o.id != oid and _xy_overlap(probe, o) > 0:
            top = max(top, o.top)
    return top + obj.size[2] / 2


def _directed(cs: ConstraintSet, scene: Scene, library: Library, rng: random.Random) -> list[float | None]:
    """Coordinates implied by the positional constraints; None where unconstrained."""
    out: list[float | None] = [None, None, None]
    obj = scene[cs.target]
    for atom in cs.required:
        p = library[atom.pred]
        if p.order != FIRST or cs.target not in atom.args:
            continue
        for fname, ivs in p.constraint:
            f = library.feature(fname)
            iv = rng.choice(ivs)
            v = rng.uniform(iv.lo, iv.hi)
            if f.quantity == "elevation" and p.arity == 1:
                out[2] = scene.table_height + v + obj.size[2] / 2
            elif f.quantity in POSITION_Q and p.arity == 2 and f.mode == "diff":
                d = POSITION_Q.index(f.quantity)
                other = atom.args[1] if atom.args[0] == cs.target else atom.args[0]
                sign = 1 if atom.args[0] == cs.target else -1
                if out[d] is None:
                    out[d] = scene[other].position[d] + sign * v
    return out


def solve_placement(scene: Scene, step: GroundStep, domain: Domain, library: Library, seed: int = 0,
                    max_samples: int = DEFAULT_MAX_SAMPLES,
                    expected: frozenset[Atom] | None = None) -> Placement | None:
    """Rejection-sample a target pose for the step's moved object; None if nothing is accepted.

    With `expected`, a proposal must also reproduce that whole logical state, so
    relations outside the step's effects stay untouched.
    """
    cs = constraints_for_action(step, domain, library)
    if cs.target is None:
        # nothing to establish: keep the scene if it already agrees
        if not cs.satisfied(scene, library):
            return None
        if expected is not None and logical_state(scene, library, domain) != expected:
            return None
        return Placement(None, None, 0, scene)
    rng = random.Random(f"place:{seed}:{step}")
    (x0, y0, z0), (x1, y1, z1) = scene.workspace
    obj = scene[cs.target]
    for i in range(1, max_samples + 1):
        r = rng.random()
        if r < 0.6:
            x, y, z = _directed(cs, scene, library, rng)
            x = rng.uniform(x0, x1) if x is None else x
            y = rng.uniform(y0, y1) if y is None else y
            if z is None or rng.random() < 0.5:
                z = _support_z(scene, cs.target, x, y)
        elif r < 0.9:
            x, y = rng.uniform(x0, x1), rng.uniform(y0, y1)
            z = _support_z(scene, cs.target, x, y)
        else:
            x, y = rng.uniform(x0, x1), rng.uniform(y0, y1)
            z = rng.uniform(z0 + obj.size[2] / 2, z1)
        new = apply_placement(scene, cs.target, (x, y, z))
        if not new:
            continue
        if not cs.satisfied(new, library):
            continue
        if expected is not None and logical_state(new, library, domain) != expected:
            continue
        return Placement(cs.target, (x, y, z), i, new)
    return None


# -- execution -----------------------------------------------------------

def waypoints(scene: Scene, oid: str, goal: Sequence[float]) -> list[tuple[float, float, float]]:
    """Lift clear of everything, carry, lower."""
    x0, y0, z0 = scene[oid].position
    x, y, z = goal
    h = scene[oid].size[2]
    safe = max([o.top for o in scene.objects if o.id != oid] + [scene.table_height]) + h / 2 + LIFT_MARGIN
    safe = max(safe, z0, z)
    return [(x0, y0, z0), (x0, y0, safe), (x, y, safe), (x, y, z)]


def _frames(scene: Scene, oid: str, pts, per_segment: int) -> list[Scene]:
    out = []
    obj = scene[oid]
    for a, b in zip(pts, pts[1:]):
        for k in range(1, per_segment + 1):
            t = k / per_segment
            p = tuple(a[i] + (b[i] - a[i]) * t for i in range(3))
            out.append(scene.with_object(obj.moved(*p)))
    return out


@dataclass
class ExecStep:
    action: str
    args: tuple[str, ...]
    target: str | None = None
    position: tuple[float, float, float] | None = None
    samples: int = 0
    waypoints: list = field(default_factory=list)
    ok: bool = True
    note: str = ""
    effects_ok: bool | None = None  # adds true and deletes false right after placement

    def to_json(self) -> dict:
        return {"action": self.action, "args": list(self.args), "target": self.target,
                "position": list(self.position) if self.position else None, "samples": self.samples,
                "waypoints": [list(w) for w in self.waypoints], "ok": self.ok, "note": self.note,
                "effects_ok": self.effects_ok}


@dataclass
class ExecutionTrace:
    steps: list[ExecStep] = field(default_factory=list)
    frames: list[Scene] = field(default_factory=list, repr=False)
    replans: int = 0
    success: bool = False
    reason: str = ""
    elapsed: float = 0.0

    @property
    def final_scene(self) -> Scene | None:
        return self.frames[-1] if self.frames else None

    def to_json(self, with_frames: bool = False) -> dict:
        out = {"success": self.success, "reason": self.reason, "replans": self.replans,
               "elapsed": self.elapsed, "steps": [s.to_json() for s in self.steps]}
        if with_frames:
            out["frames"] = [f.to_json() for f in self.frames]
        return out

    def save(self, path: str | Path, with_frames: bool = False) -> None:
        Path(path).write_text(json.dumps(self.to_json(with_frames), indent=1))


Disturbance = Callable[[Scene, int, random.Random], Scene]


def logical_state(scene: Scene, library: Library, domain: Domain) -> frozenset[Atom]:
    keep = set(domain.arities)
    return frozenset(a for a in ground_state(scene, library) if a.pred in keep)


def execute_plan(scene: Scene, plan: Plan | Sequence[GroundStep] | None, domain: Domain, library: Library,
                 goal: Formula, budget: float = 50.0, seed: int = 0, max_replans: int = 3,
                 disturbance: Disturbance | None = None, max_samples: int = DEFAULT_MAX_SAMPLES,
                 frames_per_segment: int = DEFAULT_FRAMES) -> ExecutionTrace:
    """Execute steps in the scene, replanning when the observed state departs from the expected one.

    With `plan=None` the first plan comes from the solver. The wall-clock budget
    covers planning and placement together.
    """
    t0 = time.perf_counter()
    trace = ExecutionTrace(frames=[scene])
    rng = random.Random(f"exec:{seed}")
    objects = tuple(scene.ids)
    steps = list(plan) if plan is not None else None
    counter = 0

    def remaining() -> float:
        return budget - (time.perf_counter() - t0)

    def finish(ok: bool, reason: str = "") -> ExecutionTrace:
        trace.success, trace.reason = ok, reason
        trace.elapsed = time.perf_counter() - t0
        return trace

    while True:
        state = logical_state(scene, library, domain)
        if holds(goal, state, objects):
            return finish(True)
        if steps is None:
            if remaining() <= 0:
                return finish(False, "timeout")
            prob = Problem("replan", domain.name, objects, state, goal if isinstance(goal, And) else
                           And(conjuncts(goal)))
            res = solve(prob, domain, budget=remaining())
            if not res.solved:
                return finish(False, res.status)
            steps = list(res.plan)
        if not steps:
            return finish(False, "goal-not-reached")
        deviated = False
        while steps:
            st = steps.pop(0)
            act = domain.action(st.action)
            ga = ground_action(act, st.args, objects)
            if not ga.applicable(state):
                deviated = True
                trace.steps.append(ExecStep(st.action, tuple(st.args), ok=False, note="precondition"))
                break
            if remaining() <= 0:
                return finish(False, "timeout")
            try:
                pl = solve_placement(scene, st, domain, library, seed=seed * 1000 + counter,
                                     max_samples=max_samples, expected=ga.apply(state))
            except UngroundableEffect as e:
                trace.steps.append(ExecStep(st.action, tuple(st.args), ok=False, note=str(e)))
                return finish(False, "ungroundable")
            counter += 1
            if pl is None:
                trace.steps.append(ExecStep(st.action, tuple(st.args), ok=False, note="no placement"))
                return finish(False, "placement")
            pts = waypoints(scene, pl.target, pl.position) if pl.target is not None else []
            if pts:
                trace.frames.extend(_frames(scene, pl.target, pts, frames_per_segment))
            scene = pl.scene
            trace.frames[-1] = scene
            post = ground_state(scene, library, include_irrelevant=True)
            trace.steps.append(ExecStep(st.action, tuple(st.args), pl.target, pl.position, pl.samples, pts,
                                        effects_ok=ga.add <= post and not (ga.delete & post)))
            expected = ga.apply(state)
            if disturbance is not None:
                scene = disturbance(scene, counter, rng)
                trace.frames.append(scene)
            state = logical_state(scene, library, domain)
            if state != expected:
                deviated = True
                break
        if not deviated:
            ok = holds(goal, logical_state(scene, library, domain), objects)
            return finish(ok, "" if ok else "goal-not-reached")
        trace.replans += 1
        if trace.replans > max_replans:
            return finish(False, "replan-limit")
        steps = None


__all__ = ["ConstraintSet", "UngroundableEffect", "Placement", "constraints_for_action", "solve_placement",
           "waypoints", "ExecStep", "ExecutionTrace", "execute_plan", "logical_state"]
