"""Canonical PDDL text: sorted declarations, two-space indentation."""

from __future__ import annotations

from .ast import ActionSchema, And, Domain, Not, Problem, needed_requirements


def _conj(atoms_pos, atoms_neg=()) -> str:
    parts = [str(a) for a in sorted(atoms_pos)] + [str(Not(a)) for a in sorted(atoms_neg)]
    if not parts:
        return "(and)"
    return f"(and {' '.join(parts)})"


def emit_action(act: ActionSchema) -> str:
    return "\n".join([
        f"  (:action {act.name}",
        f"    :parameters ({' '.join(act.params)})",
        f"    :precondition {act.precondition}",
        f"    :effect {_conj(act.add, act.delete)})",
    ])


def emit_domain(dom: Domain) -> str:
    lines = [f"(define (domain {dom.name})",
             f"  (:requirements {' '.join(dom.requirements)})"]
    if dom.predicates:
        lines.append("  (:predicates")
        for i, p in enumerate(dom.predicates):
            close = ")" if i == len(dom.predicates) - 1 else ""
            lines.append(f"    {p}{close}")
    else:
        lines.append("  (:predicates)")
    for act in dom.actions:
        lines.append(emit_action(act))
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


def emit_problem(prob: Problem) -> str:
    reqs = sorted(needed_requirements((), prob.goal) - {":strips"})
    lines = [f"(define (problem {prob.name})",
             f"  (:domain {prob.domain_name})"]
    if reqs:
        lines.append(f"  (:requirements {' '.join(reqs)})")
    lines.append(f"  (:objects {' '.join(prob.objects)})" if prob.objects else "  (:objects)")
    if prob.init:
        lines.append("  (:init")
        init = sorted(prob.init)
        for i, a in enumerate(init):
            lines.append(f"    {a}{')' if i == len(init) - 1 else ''}")
    else:
        lines.append("  (:init)")
    goal = prob.goal if isinstance(prob.goal, And) else And((prob.goal,))
    lines.append(f"  (:goal {goal}))")
    return "\n".join(lines) + "\n"
