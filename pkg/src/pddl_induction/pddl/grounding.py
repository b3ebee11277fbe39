"""Ground lifted actions over a finite object set."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .ast import ActionSchema, And, Atom, Domain, Formula, Forall, GroundStep, Not, substitute

DEFAULT_GROUNDING_CAP = 10**6


class GroundingCapError(ValueError):
    def __init__(self, required: int, cap: int):
        self.required, self.cap = required, cap
        super().__init__(f"{required} ground actions exceed the cap of {cap}")


class UnsupportedFormulaError(ValueError):
    pass


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre_pos: frozenset[Atom]
    pre_neg: frozenset[Atom]
    add: frozenset[Atom]
    delete: frozenset[Atom]

    @property
    def step(self) -> GroundStep:
        return GroundStep(self.name, self.args)

    def applicable(self, state: frozenset[Atom] | set[Atom]) -> bool:
        return self.pre_pos <= state and not (self.pre_neg & state)

    def apply(self, state: frozenset[Atom]) -> frozenset[Atom]:
        return (state - self.delete) | self.add


def expand(f: Formula, objects: Sequence[str], positive: bool = True) -> tuple[set[Atom], set[Atom]]:
    """Flatten a ground formula into positive and negative literal sets.

    Forall is expanded over `objects`. Formulas whose negation would need a
    disjunction are rejected.
    """
    pos: set[Atom] = set()
    neg: set[Atom] = set()
    if isinstance(f, Atom):
        (pos if positive else neg).add(f)
    elif isinstance(f, Not):
        if isinstance(f.arg, Atom):
            (neg if positive else pos).add(f.arg)
        elif positive:
            p, n = expand(f.arg, objects, positive=False)
            pos |= p
            neg |= n
        else:
            p, n = expand(f.arg, objects, positive=True)
            pos |= p
            neg |= n
    elif isinstance(f, And):
        if not positive and len(f.parts) > 1:
            raise UnsupportedFormulaError("negated conjunction needs disjunction")
        for part in f.parts:
            p, n = expand(part, objects, positive)
            pos |= p
            neg |= n
    elif isinstance(f, Forall):
        if not positive:
            raise UnsupportedFormulaError("negated forall needs disjunction")
        for combo in itertools.product(objects, repeat=len(f.vars)):
            p, n = expand(substitute(f.body, dict(zip(f.vars, combo))), objects, True)
            pos |= p
            neg |= n
    else:
        raise TypeError(f)
    return pos, neg


def binding_count(domain: Domain, n_objects: int) -> int:
    return sum(math.perm(n_objects, a.arity) if a.arity <= n_objects else 0 for a in domain.actions)


def ground_action(act: ActionSchema, args: Sequence[str], objects: Sequence[str]) -> GroundAction:
    b = dict(zip(act.params, args))
    pos, neg = expand(substitute(act.precondition, b), objects)
    return GroundAction(act.name, tuple(args), frozenset(pos), frozenset(neg),
                        frozenset(a.substitute(b) for a in act.add),
                        frozenset(a.substitute(b) for a in act.delete))


def ground(domain: Domain, objects: Sequence[str], cap: int = DEFAULT_GROUNDING_CAP) -> list[GroundAction]:
    """All distinct-object bindings of every action."""
    if not objects:
        raise ValueError("grounding needs at least one object")
    objects = sorted(objects)
    need = binding_count(domain, len(objects))
    if need > cap:
        raise GroundingCapError(need, cap)
    out = []
    for act in domain.actions:
        for args in itertools.permutations(objects, act.arity):
            out.append(ground_action(act, args, objects))
    return out


def holds(f: Formula, state: frozenset[Atom] | set[Atom], objects: Sequence[str]) -> bool:
    """Closed-world truth of a ground formula; forall ranges over `objects`."""
    if isinstance(f, Atom):
        return f in state
    if isinstance(f, Not):
        return not holds(f.arg, state, objects)
    if isinstance(f, And):
        return all(holds(p, state, objects) for p in f.parts)
    if isinstance(f, Forall):
        return all(holds(substitute(f.body, dict(zip(f.vars, c))), state, objects)
                   for c in itertools.product(objects, repeat=len(f.vars)))
    raise TypeError(f)
