"""Forward state-space search over ground actions.

States are bitmasks over the atoms that can ever matter. The default mode is
breadth-first search with duplicate elimination, which returns shortest plans.
A greedy best-first mode guided by a delete-relaxation layer count is
available for larger instances.
"""

from __future__ import annotations

import heapq
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .ast import Atom, Domain, GroundStep, Plan, Problem, substitute
from .grounding import DEFAULT_GROUNDING_CAP, GroundAction, expand, ground, ground_action, holds

PLAN, NO_PLAN, TIMEOUT = "plan", "no-plan", "timeout"
_CLOCK_WORK = 20000  # action checks between clock reads


@dataclass
class SolveResult:
    status: str
    plan: Plan | None = None
    stats: dict = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.status == PLAN


class _Compiled:
    def __init__(self, problem: Problem, domain: Domain, cap: int):
        objs = list(problem.objects)
        acts = ground(domain, objs, cap) if objs else [ground_action(a, (), objs) for a in domain.actions if a.arity == 0]
        gpos, gneg = expand(problem.goal, objs)
        # atoms some action can change; everything else is fixed by init
        fluent = set()
        for a in acts:
            fluent |= a.add | a.delete
        init = problem.init
        kept = []
        for a in acts:
            if any(p not in fluent and p not in init for p in a.pre_pos):
                continue
            if any(n not in fluent and n in init for n in a.pre_neg):
                continue
            kept.append(a)
        self.static_goal_ok = all(p in fluent or p in init for p in gpos) and \
            not any(n not in fluent and n in init for n in gneg)
        index: dict[Atom, int] = {}

        def bit(atom: Atom) -> int:
            if atom not in index:
                index[atom] = len(index)
            return 1 << index[atom]

        def mask(atoms) -> int:
            m = 0
            for x in atoms:
                if x in fluent:
                    m |= bit(x)
            return m

        self.actions = kept
        self.pre = [mask(a.pre_pos) for a in kept]
        self.neg = [mask(a.pre_neg) for a in kept]
        self.add = [mask(a.add) for a in kept]
        self.dele = [mask(a.delete) for a in kept]
        self.init = mask(init)
        self.goal_pos = mask(gpos)
        self.goal_neg = mask(gneg)
        self.index = index
        self.n_ground = len(acts)

    def is_goal(self, s: int) -> bool:
        return (s & self.goal_pos) == self.goal_pos and not (s & self.goal_neg)


def _extract(parents: dict, s: int, actions: list[GroundAction]) -> tuple[GroundStep, ...]:
    steps = []
    while True:
        prev = parents[s]
        if prev is None:
            break
        s, ai = prev
        steps.append(actions[ai].step)
    return tuple(reversed(steps))


def solve(problem: Problem, domain: Domain, budget: float = 50.0, mode: str = "bfs",
          cap: int = DEFAULT_GROUNDING_CAP) -> SolveResult:
    """Search for a plan; outcomes are plan, no-plan or timeout (never raised)."""
    t0 = time.perf_counter()
    deadline = t0 + max(0.0, budget)
    if budget <= 0:
        return SolveResult(TIMEOUT, None, {"expanded": 0, "time": 0.0})
    c = _Compiled(problem, domain, cap)
    stats = {"expanded": 0, "generated": 1, "ground_actions": c.n_ground, "kept_actions": len(c.actions)}

    def done(status, steps=None):
        stats["time"] = time.perf_counter() - t0
        plan = Plan(steps, dict(stats)) if steps is not None else None
        return SolveResult(status, plan, stats)

    if not c.static_goal_ok:
        return done(NO_PLAN)
    if c.is_goal(c.init):
        return done(PLAN, ())
    if mode == "bfs":
        return _bfs(c, deadline, stats, done)
    if mode == "gbfs":
        return _gbfs(c, deadline, stats, done)
    raise ValueError(f"unknown search mode {mode!r}")


def _bfs(c: _Compiled, deadline: float, stats: dict, done):
    pre, neg, add, dele = c.pre, c.neg, c.add, c.dele
    rng = range(len(pre))
    parents: dict[int, tuple[int, int] | None] = {c.init: None}
    frontier = deque([c.init])
    expanded = 0
    every = max(1, _CLOCK_WORK // max(1, len(pre)))
    while frontier:
        s = frontier.popleft()
        expanded += 1
        if expanded % every == 0 and time.perf_counter() > deadline:
            stats["expanded"] = expanded
            return done(TIMEOUT)
        for i in rng:
            if (s & pre[i]) != pre[i] or (s & neg[i]):
                continue
            t = (s & ~dele[i]) | add[i]
            if t in parents:
                continue
            parents[t] = (s, i)
            if c.is_goal(t):
                stats["expanded"] = expanded
                stats["generated"] = len(parents)
                return done(PLAN, _extract(parents, t, c.actions))
            frontier.append(t)
    stats["expanded"] = expanded
    stats["generated"] = len(parents)
    return done(NO_PLAN)


def relaxed_layers(c: _Compiled, s: int) -> int | None:
    """Number of delete-relaxed layers until the positive goal is reachable."""
    reached = s
    layers = 0
    goal = c.goal_pos
    while (reached & goal) != goal:
        new = reached
        for i in range(len(c.pre)):
            if (reached & c.pre[i]) == c.pre[i]:
                new |= c.add[i]
        if new == reached:
            return None
        reached = new
        layers += 1
    return layers


def _gbfs(c: _Compiled, deadline: float, stats: dict, done):
    parents: dict[int, tuple[int, int] | None] = {c.init: None}
    h0 = relaxed_layers(c, c.init)
    if h0 is None:
        return done(NO_PLAN)
    heap = [(h0, 0, c.init)]
    tick = 1
    expanded = 0
    while heap:
        _, _, s = heapq.heappop(heap)
        expanded += 1
        if time.perf_counter() > deadline:
            stats["expanded"] = expanded
            return done(TIMEOUT)
        for i in range(len(c.pre)):
            if (s & c.pre[i]) != c.pre[i] or (s & c.neg[i]):
                continue
            t = (s & ~c.dele[i]) | c.add[i]
            if t in parents:
                continue
            parents[t] = (s, i)
            if c.is_goal(t):
                stats["expanded"] = expanded
                return done(PLAN, _extract(parents, t, c.actions))
            h = relaxed_layers(c, t)
            if h is not None:
                heapq.heappush(heap, (h, tick, t))
                tick += 1
    stats["expanded"] = expanded
    return done(NO_PLAN)


@dataclass(frozen=True)
class Validation:
    ok: bool
    step: int | str | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate(plan: Plan | Sequence[GroundStep], problem: Problem, domain: Domain) -> Validation:
    """Replay a plan with set semantics; report the first failing step or 'goal'."""
    steps = plan.steps if isinstance(plan, Plan) else tuple(plan)
    objs = list(problem.objects)
    state = set(problem.init)
    for i, st in enumerate(steps):
        try:
            act = domain.action(st.action)
        except KeyError:
            return Validation(False, i, f"unknown action {st.action}")
        if len(st.args) != act.arity:
            return Validation(False, i, f"{st.action} takes {act.arity} arguments")
        if len(set(st.args)) != len(st.args) or any(a not in objs for a in st.args):
            return Validation(False, i, f"bad arguments {st.args}")
        b = dict(zip(act.params, st.args))
        if not holds(substitute(act.precondition, b), state, objs):
            return Validation(False, i, f"precondition of {st} not satisfied")
        state -= {a.substitute(b) for a in act.delete}
        state |= {a.substitute(b) for a in act.add}
    if not holds(problem.goal, state, objs):
        return Validation(False, "goal", "goal not satisfied after the last step")
    return Validation(True)


def apply_plan(plan: Plan, problem: Problem, domain: Domain) -> list[frozenset[Atom]]:
    """States visited by a plan, starting with init (no precondition checks)."""
    states = [frozenset(problem.init)]
    objs = list(problem.objects)
    for st in plan.steps:
        g = ground_action(domain.action(st.action), st.args, objs)
        states.append(g.apply(states[-1]))
    return states
