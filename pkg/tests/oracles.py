"""Independent reference implementations used to check the package."""

import itertools
import random
from collections import deque

from pddl_induction.pddl.ast import ActionSchema, And, Atom, Domain, Forall, Not, PredicateDecl, Problem

PREDS = (("p", 1), ("q", 1), ("r", 2))


def truth(f, state, objects, env):
    """Closed-world evaluation with an explicit variable environment."""
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(env.get(a, a) for a in f.args)) in state
    if isinstance(f, Not):
        return not truth(f.arg, state, objects, env)
    if isinstance(f, And):
        return all(truth(p, state, objects, env) for p in f.parts)
    if isinstance(f, Forall):
        return all(truth(f.body, state, objects, {**env, **dict(zip(f.vars, combo))})
                   for combo in itertools.product(objects, repeat=len(f.vars)))
    raise TypeError(f)


def successors(domain, state, objects):
    for act in domain.actions:
        for args in itertools.permutations(objects, len(act.params)):
            env = dict(zip(act.params, args))
            if truth(act.precondition, state, objects, env):
                sub = lambda a: Atom(a.pred, tuple(env.get(x, x) for x in a.args))  # noqa: E731
                yield (act.name, args), frozenset((state - {sub(a) for a in act.delete}) | {sub(a) for a in act.add})


def exhaustive_bfs(problem, domain, limit=10**5):
    """Shortest plan length, None if unreachable, or 'too-big' when the state space exceeds `limit`."""
    objs = list(problem.objects)
    start = frozenset(problem.init)
    if truth(problem.goal, start, objs, {}):
        return 0
    depth = {start: 0}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for _, t in successors(domain, s, objs):
            if t in depth:
                continue
            depth[t] = depth[s] + 1
            if truth(problem.goal, t, objs, {}):
                return depth[t]
            if len(depth) > limit:
                return "too-big"
            queue.append(t)
    return None


def _literal(rng, params):
    name, ar = rng.choice(PREDS)
    if ar > len(params):
        name, ar = "p", 1
    return Atom(name, tuple(rng.sample(params, ar)))


def random_domain(rng: random.Random) -> Domain:
    acts = []
    for i in range(rng.randint(1, 3)):
        params = ("?a", "?b")[:rng.randint(1, 2)]
        pre = []
        for _ in range(rng.randint(0, 3)):
            lit = _literal(rng, list(params))
            pre.append(Not(lit) if rng.random() < 0.3 else lit)
        if rng.random() < 0.2:
            pre.append(Forall(("?x",), Not(Atom("r", ("?x", params[0])))))
        add = {_literal(rng, list(params)) for _ in range(rng.randint(1, 2))}
        dele = {_literal(rng, list(params)) for _ in range(rng.randint(0, 2))} - add
        acts.append(ActionSchema(f"act{i}", params, And(tuple(dict.fromkeys(pre))), frozenset(add),
                                 frozenset(dele)))
    return Domain("rand", tuple(PredicateDecl(n, a) for n, a in PREDS), tuple(acts))


def all_atoms(objects):
    out = []
    for name, ar in PREDS:
        out += [Atom(name, t) for t in itertools.permutations(objects, ar)]
    return out


def random_problem(rng: random.Random, domain: Domain) -> Problem:
    objs = [f"o{i}" for i in range(rng.randint(2, 4))]
    atoms = all_atoms(objs)
    init = frozenset(a for a in atoms if rng.random() < 0.3)
    goal = []
    for a in rng.sample(atoms, rng.randint(1, 3)):
        goal.append(Not(a) if rng.random() < 0.25 else a)
    return Problem("rand", domain.name, tuple(objs), init, And(tuple(goal)))


def brute_subspace_count(parts_per_feature):
    """Count cells by walking every index combination."""
    return sum(1 for _ in itertools.product(*(range(k) for k in parts_per_feature)))
