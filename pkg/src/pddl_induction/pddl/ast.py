"""Immutable syntax tree for the supported PDDL subset.

Formulas are Atom, Not, And and Forall. Action effects are plain add/delete
atom sets. Domains and problems canonicalise themselves on construction so
that structural equality is the same as equality of emitted text.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

SUPPORTED_REQUIREMENTS = (":strips", ":negative-preconditions", ":universal-preconditions", ":typing")


@dataclass(frozen=True, order=True)
class Atom:
    pred: str
    args: tuple[str, ...] = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    def __str__(self) -> str:
        return f"({' '.join((self.pred,) + self.args)})"

    def substitute(self, binding: dict[str, str]) -> "Atom":
        return Atom(self.pred, tuple(binding.get(a, a) for a in self.args))


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self) -> str:
        return f"(not {self.arg})"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...] = ()

    def __post_init__(self):
        flat: list[Formula] = []
        for p in self.parts:
            flat.extend(p.parts if isinstance(p, And) else (p,))
        object.__setattr__(self, "parts", tuple(sorted(set(flat), key=formula_key)))

    def __str__(self) -> str:
        return f"(and {' '.join(str(p) for p in self.parts)})" if self.parts else "(and)"


@dataclass(frozen=True)
class Forall:
    vars: tuple[str, ...]
    body: "Formula"

    def __str__(self) -> str:
        return f"(forall ({' '.join(self.vars)}) {self.body})"


Formula = Union[Atom, Not, And, Forall]


def formula_key(f: Formula) -> tuple:
    # literals before compound forms, then by text
    rank = {Atom: 0, Not: 1, Forall: 2, And: 3}[type(f)]
    return (rank, str(f))


def conjuncts(f: Formula | None) -> tuple[Formula, ...]:
    if f is None:
        return ()
    return f.parts if isinstance(f, And) else (f,)


def atoms_in(f: Formula) -> Iterable[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, Not):
        yield from atoms_in(f.arg)
    elif isinstance(f, And):
        for p in f.parts:
            yield from atoms_in(p)
    elif isinstance(f, Forall):
        yield from atoms_in(f.body)


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {a for a in f.args if a.startswith("?")}
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, And):
        out: set[str] = set()
        for p in f.parts:
            out |= free_vars(p)
        return out
    if isinstance(f, Forall):
        return free_vars(f.body) - set(f.vars)
    raise TypeError(f)


def substitute(f: Formula, binding: dict[str, str]) -> Formula:
    if isinstance(f, Atom):
        return f.substitute(binding)
    if isinstance(f, Not):
        return Not(substitute(f.arg, binding))
    if isinstance(f, And):
        return And(tuple(substitute(p, binding) for p in f.parts))
    if isinstance(f, Forall):
        inner = {k: v for k, v in binding.items() if k not in f.vars}
        return Forall(f.vars, substitute(f.body, inner))
    raise TypeError(f)


def uses_negation(f: Formula) -> bool:
    if isinstance(f, Not):
        return True
    if isinstance(f, And):
        return any(uses_negation(p) for p in f.parts)
    if isinstance(f, Forall):
        return uses_negation(f.body)
    return False


def uses_forall(f: Formula) -> bool:
    if isinstance(f, Forall):
        return True
    if isinstance(f, Not):
        return uses_forall(f.arg)
    if isinstance(f, And):
        return any(uses_forall(p) for p in f.parts)
    return False


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    arity: int
    loc: tuple[int, int] | None = field(default=None, compare=False)

    def __str__(self) -> str:
        vars_ = " ".join(param_names(self.arity))
        return f"({self.name}{' ' + vars_ if vars_ else ''})"


def param_names(n: int) -> list[str]:
    letters = "abcdefghijklmnopqrstuvwxyz"
    return [f"?{letters[i]}" if i < 26 else f"?v{i}" for i in range(n)]


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[str, ...]
    precondition: And = And()
    add: frozenset[Atom] = frozenset()
    delete: frozenset[Atom] = frozenset()
    loc: tuple[int, int] | None = field(default=None, compare=False)

    def __post_init__(self):
        pre = self.precondition
        if not isinstance(pre, And):
            pre = And((pre,))
        object.__setattr__(self, "precondition", pre)
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "add", frozenset(self.add))
        object.__setattr__(self, "delete", frozenset(self.delete))
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"action {self.name}: repeated parameter")
        if self.add & self.delete:
            raise ValueError(f"action {self.name}: atoms both added and deleted: "
                             f"{sorted(map(str, self.add & self.delete))}")

    @property
    def arity(self) -> int:
        return len(self.params)

    def predicates(self) -> set[str]:
        out = {a.pred for a in atoms_in(self.precondition)}
        out |= {a.pred for a in self.add | self.delete}
        return out

    def variables(self) -> set[str]:
        out = free_vars(self.precondition)
        for a in self.add | self.delete:
            out |= {x for x in a.args if x.startswith("?")}
        return out

    def rename(self, mapping: dict[str, str], name: str | None = None) -> "ActionSchema":
        """Rename parameters (and optionally the action)."""
        return ActionSchema(name or self.name, tuple(mapping.get(p, p) for p in self.params),
                            substitute(self.precondition, mapping),
                            frozenset(a.substitute(mapping) for a in self.add),
                            frozenset(a.substitute(mapping) for a in self.delete))

    def rename_predicates(self, mapping: dict[str, str]) -> "ActionSchema":
        def rp(f):
            if isinstance(f, Atom):
                return Atom(mapping.get(f.pred, f.pred), f.args)
            if isinstance(f, Not):
                return Not(rp(f.arg))
            if isinstance(f, And):
                return And(tuple(rp(p) for p in f.parts))
            return Forall(f.vars, rp(f.body))
        return ActionSchema(self.name, self.params, rp(self.precondition),
                            frozenset(rp(a) for a in self.add), frozenset(rp(a) for a in self.delete))


def needed_requirements(actions: Iterable[ActionSchema], goal: Formula | None = None) -> set[str]:
    req = {":strips"}
    forms = [a.precondition for a in actions] + ([goal] if goal is not None else [])
    for f in forms:
        if uses_negation(f):
            req.add(":negative-preconditions")
        if uses_forall(f):
            req.add(":universal-preconditions")
    return req


@dataclass(frozen=True)
class Domain:
    name: str
    predicates: tuple[PredicateDecl, ...] = ()
    actions: tuple[ActionSchema, ...] = ()
    requirements: tuple[str, ...] = ()

    def __post_init__(self):
        preds = tuple(sorted(self.predicates, key=lambda p: p.name))
        names = [p.name for p in preds]
        if len(set(names)) != len(names):
            raise ValueError(f"domain {self.name}: duplicate predicate declarations")
        acts = tuple(sorted(self.actions, key=lambda a: a.name))
        anames = [a.name for a in acts]
        if len(set(anames)) != len(anames):
            raise ValueError(f"domain {self.name}: duplicate action names")
        req = set(self.requirements) | needed_requirements(acts)
        object.__setattr__(self, "predicates", preds)
        object.__setattr__(self, "actions", acts)
        object.__setattr__(self, "requirements", tuple(sorted(req, key=SUPPORTED_REQUIREMENTS.index)))

    def predicate(self, name: str) -> PredicateDecl | None:
        for p in self.predicates:
            if p.name == name:
                return p
        return None

    def action(self, name: str) -> ActionSchema:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    @property
    def arities(self) -> dict[str, int]:
        return {p.name: p.arity for p in self.predicates}


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[str, ...]
    init: frozenset[Atom]
    goal: And = And()

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(sorted(set(self.objects))))
        object.__setattr__(self, "init", frozenset(self.init))
        g = self.goal
        if not isinstance(g, And):
            g = And((g,))
        object.__setattr__(self, "goal", g)


@dataclass(frozen=True)
class GroundStep:
    action: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return f"({' '.join((self.action,) + self.args)})"


@dataclass(frozen=True)
class Plan:
    steps: tuple[GroundStep, ...]
    stats: dict = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def to_text(self) -> str:
        return "\n".join(str(s) for s in self.steps) + ("\n" if self.steps else "")
