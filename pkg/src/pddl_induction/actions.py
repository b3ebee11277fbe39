"""Turn demonstrations into lifted action schemas and compose domains."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .pddl.ast import ActionSchema, And, Atom, Domain, PredicateDecl, param_names
from .pddl.parser import PDDLSemanticError, check_domain
from .predicates import Library, ground_state
from .scene import Trajectory, check_feasible


@dataclass(frozen=True)
class LogicalTrajectory:
    states: tuple[frozenset[Atom], ...]
    source: str = ""

    def __post_init__(self):
        for a, b in zip(self.states, self.states[1:]):
            if a == b:
                raise ValueError("consecutive logical states must differ")

    def __len__(self) -> int:
        return len(self.states)


def dedupe(states: Iterable[frozenset[Atom]]) -> list[frozenset[Atom]]:
    out: list[frozenset[Atom]] = []
    for s in states:
        if not out or out[-1] != s:
            out.append(s)
    return out


def ground_trajectory(traj: Trajectory, library: Library, settled_only: bool = True) -> LogicalTrajectory:
    """Ground each step and collapse consecutive repeats.

    With `settled_only`, steps where some object is in the air (the scene fails the
    feasibility check) are skipped: their relations describe a carried object,
    not a resting configuration.
    """
    if not library.relevant:
        raise ValueError("library has no relevant predicates")
    scenes = traj.scenes
    if settled_only:
        kept = [s for s in scenes if check_feasible(s)]
        scenes = kept or scenes
    return LogicalTrajectory(tuple(dedupe(ground_state(s, library) for s in scenes)), traj.source)


def extract_transitions(lt: LogicalTrajectory) -> list[tuple[frozenset[Atom], frozenset[Atom]]]:
    return list(zip(lt.states, lt.states[1:]))


Namer = Callable[[frozenset[Atom], frozenset[Atom], ActionSchema], str]


def _ordered_objects(added: Sequence[Atom], deleted: Sequence[Atom]) -> list[str]:
    seen: list[str] = []
    for atom in list(added) + list(deleted):
        for o in atom.args:
            if o not in seen:
                seen.append(o)
    return seen


def lift_transition(pair: tuple[frozenset[Atom], frozenset[Atom]], summarizer: Namer | None = None,
                    name: str = "act") -> tuple[ActionSchema, dict[str, str]]:
    """Lift a (pre, post) pair into a schema.

    Returns the schema and the object -> variable substitution used.
    """
    pre, post = pair
    if pre == post:
        raise ValueError("transition does not change the state")
    added = sorted(post - pre)
    deleted = sorted(pre - post)
    objs = _ordered_objects(added, deleted)
    var = dict(zip(objs, param_names(len(objs))))
    lift = lambda a: Atom(a.pred, tuple(var[o] for o in a.args))  # noqa: E731
    precond = {lift(a) for a in pre if a.args and all(o in var for o in a.args)}
    precond |= {lift(a) for a in pre if not a.args}
    schema = ActionSchema(name, tuple(var[o] for o in objs), And(tuple(precond | {lift(a) for a in deleted})),
                          frozenset(lift(a) for a in added), frozenset(lift(a) for a in deleted))
    if summarizer is not None:
        schema = schema.rename({}, summarizer(pre, post, schema))
    return schema, var


def effect_signature(s: ActionSchema) -> tuple:
    return (len(s.params), tuple(sorted(map(str, s.add))), tuple(sorted(map(str, s.delete))))


def merge_schemas(schemas: Sequence[ActionSchema]) -> list[ActionSchema]:
    """Fuse schemas with identical lifted effects by intersecting their preconditions.

    The first schema of each group supplies the name; order of first occurrence is kept.
    """
    groups: dict[tuple, list[ActionSchema]] = {}
    for s in schemas:
        groups.setdefault(effect_signature(s), []).append(s)
    out = []
    for group in groups.values():
        first = group[0]
        common = set(first.precondition.parts)
        for s in group[1:]:
            common &= set(s.precondition.parts)
        out.append(ActionSchema(first.name, first.params, And(tuple(common)), first.add, first.delete))
    return out


def schema_key(s: ActionSchema) -> str:
    """Canonical text of a schema with parameters renamed in order of appearance."""
    from .pddl.emitter import emit_action
    ren = dict(zip(s.params, param_names(len(s.params))))
    return emit_action(s.rename(ren, "_"))


def compose_domain(library: Library, schemas: Iterable[ActionSchema], name: str,
                   predicates: Iterable[str] | None = None) -> Domain:
    """Relevant predicates plus deduplicated schemas.

    Schemas that are structurally identical appear once; distinct schemas sharing a
    name get numeric suffixes.
    """
    names = [p.name for p in library.relevant] if predicates is None else list(predicates)
    arity = {p.name: p.arity for p in library.predicates}
    decls = []
    for n in names:
        if n not in arity:
            raise PDDLSemanticError(f"undeclared predicate {n}")
        decls.append(PredicateDecl(n, arity[n]))
    declared = set(names)
    seen: set[str] = set()
    acts: list[ActionSchema] = []
    used_names: set[str] = set()
    for s in schemas:
        missing = sorted(s.predicates() - declared)
        if missing:
            raise PDDLSemanticError(f"action {s.name} references undeclared predicate {missing[0]}")
        key = schema_key(s)
        if key in seen:
            continue
        seen.add(key)
        nm, i = s.name, 2
        while nm in used_names:
            nm, i = f"{s.name}-{i}", i + 1
        used_names.add(nm)
        acts.append(s.rename({}, nm))
    dom = Domain(name, tuple(decls), tuple(acts))
    check_domain(dom)
    return dom


def replay(schemas_with_bindings: Sequence[tuple[ActionSchema, dict[str, str]]],
           start: frozenset[Atom]) -> list[frozenset[Atom]]:
    """Apply lifted schemas under their original object bindings."""
    states = [start]
    for schema, var in schemas_with_bindings:
        inv = {v: o for o, v in var.items()}
        s = states[-1]
        s = (s - {a.substitute(inv) for a in schema.delete}) | {a.substitute(inv) for a in schema.add}
        states.append(s)
    return states
