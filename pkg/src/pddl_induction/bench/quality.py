"""Missing and redundant elements of a generated domain relative to an expert reference.

A reference element is missing when nothing in the generated domain matches it:
predicates match on name and arity, actions on their name-free canonical text.
An unmatched generated element is redundant when removing it still leaves every
validation problem solvable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..actions import schema_key
from ..pddl.ast import ActionSchema, And, Atom, Domain, Not, Problem, conjuncts
from ..pddl.solver import solve


@dataclass
class DomainQuality:
    missing_predicates: float
    redundant_predicates: float
    missing_actions: float
    redundant_actions: float
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        for k in ("missing_predicates", "redundant_predicates", "missing_actions", "redundant_actions"):
            v = getattr(self, k)
            if not 0 <= v <= 100:
                raise ValueError(f"{k}={v} outside [0, 100]")

    def to_json(self) -> dict:
        return {"missing_predicates": self.missing_predicates, "redundant_predicates": self.redundant_predicates,
                "missing_actions": self.missing_actions, "redundant_actions": self.redundant_actions,
                "details": self.details}


def _pct(a: int, b: int) -> float:
    return round(100.0 * a / b, 4) if b else 0.0


def _drop_literal(f, pred: str):
    parts = []
    for p in conjuncts(f):
        atom = p.arg if isinstance(p, Not) else p
        if isinstance(atom, Atom) and atom.pred == pred:
            continue
        parts.append(p)
    return And(tuple(parts))


def without_predicate(domain: Domain, problems: Sequence[Problem], pred: str) -> tuple[Domain, list[Problem]]:
    acts = [ActionSchema(a.name, a.params, _drop_literal(a.precondition, pred),
                         frozenset(x for x in a.add if x.pred != pred),
                         frozenset(x for x in a.delete if x.pred != pred)) for a in domain.actions]
    dom = Domain(domain.name, tuple(p for p in domain.predicates if p.name != pred), tuple(acts))
    probs = [Problem(q.name, q.domain_name, q.objects, frozenset(a for a in q.init if a.pred != pred),
                     _drop_literal(q.goal, pred)) for q in problems]
    return dom, probs


def without_action(domain: Domain, name: str) -> Domain:
    return Domain(domain.name, domain.predicates, tuple(a for a in domain.actions if a.name != name))


def all_solvable(domain: Domain, problems: Sequence[Problem], budget: float) -> bool:
    return all(solve(q, domain, budget=budget).solved for q in problems)


def _action_keys(domain: Domain) -> dict[str, str]:
    return {a.name: schema_key(a) for a in domain.actions}


def score_domain(generated: Domain, reference: Domain, problems: Sequence[Problem] = (),
                 budget: float = 10.0) -> DomainQuality:
    """Percentages of missing and redundant predicates and actions.

    `problems` are validation problems over the generated vocabulary. Without
    them no element can be shown removable, so redundancy is reported as 0.
    """
    gen_p = {(p.name, p.arity) for p in generated.predicates}
    ref_p = {(p.name, p.arity) for p in reference.predicates}
    missing_p = sorted(n for n, _ in ref_p - gen_p)
    unmatched_p = sorted(n for n, _ in gen_p - ref_p)
    gen_a, ref_a = _action_keys(generated), _action_keys(reference)
    missing_a = sorted(n for n, k in ref_a.items() if k not in set(gen_a.values()))
    unmatched_a = sorted(n for n, k in gen_a.items() if k not in set(ref_a.values()))
    redundant_p, redundant_a = [], []
    if problems and all_solvable(generated, problems, budget):
        for name in unmatched_p:
            dom, probs = without_predicate(generated, problems, name)
            if all_solvable(dom, probs, budget):
                redundant_p.append(name)
        for name in unmatched_a:
            if all_solvable(without_action(generated, name), problems, budget):
                redundant_a.append(name)
    return DomainQuality(_pct(len(missing_p), len(ref_p)), _pct(len(redundant_p), len(gen_p)),
                         _pct(len(missing_a), len(ref_a)), _pct(len(redundant_a), len(gen_a)),
                         {"missing_predicates": missing_p, "redundant_predicates": redundant_p,
                          "missing_actions": missing_a, "redundant_actions": redundant_a,
                          "unmatched_predicates": unmatched_p, "unmatched_actions": unmatched_a,
                          "validation_problems": len(problems)})
