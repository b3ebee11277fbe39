"""Prompt templates for the summarizer.

Each request kind has a fixed template with named slots. Rendering is
deterministic; numbers are printed with a fixed number of decimals.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Any

PRECISION = 4
KINDS = ("predicate-naming", "action-naming", "selection", "relevance")


class MissingSlotError(KeyError):
    pass


TEMPLATES = {
    "predicate-naming": (
        "You are helping to build a symbolic planning domain for a tabletop robot.\n"
        "Scene objects ({n_objects}): {objects}.\n"
        "Task: {task}\n"
        "A simulator confirmed that the following region of the feature space is physically "
        "reachable for the argument objects {arguments}:\n"
        "{bounds}\n"
        "Give this relation a short lowercase PDDL predicate name. You may also ask to merge "
        "neighbouring intervals of one feature or to subdivide an interval.\n"
        'Reply with JSON: {{"name": "<name>", "refine": [{{"op": "merge", "feature": "<f>", '
        '"indices": [i, j]}}]}}'
    ),
    "action-naming": (
        "A demonstration for the task \"{task}\" changed the symbolic state as follows.\n"
        "State before:\n{pre_state}\n"
        "State after:\n{post_state}\n"
        "Added facts: {added}\nRemoved facts: {deleted}\n"
        "Parameters {params} stand for objects {objects}. A lifted draft of the operator is:\n"
        "{draft}\n"
        "Name this operator and return it as a PDDL :action block over the parameters above.\n"
        'Reply with JSON: {{"name": "<name>", "pddl": "(:action ...)"}}'
    ),
    "selection": (
        "Several candidate domains describe the same {what} under different names:\n"
        "{options}\n"
        "Task: {task}\n"
        "Pick the clearest name.\n"
        'Reply with JSON: {{"choice": "<one of the names>"}}'
    ),
    "relevance": (
        "Task: {task}\n"
        "Predicate ({name} {params}) holds when: {meaning}\n"
        "Does a planner need this predicate to describe states or goals of the task?\n"
        'Reply with JSON: {{"relevant": true|false}}'
    ),
}


def _slots(template: str) -> set[str]:
    return {f for _, f, _, _ in string.Formatter().parse(template) if f}


def fmt_num(v: float) -> str:
    return f"{v:.{PRECISION}f}"


def fmt_bounds(bounds) -> str:
    """Lines of `feature in [lo, hi)` with fixed precision."""
    lines = []
    for b in bounds:
        close = "]" if b.get("closed_hi") else ")"
        lines.append(f"  {b['feature']} in [{fmt_num(b['lo'])}, {fmt_num(b['hi'])}{close}")
    return "\n".join(lines)


def fmt_atoms(atoms) -> str:
    atoms = sorted(str(a) for a in atoms)
    return "  " + "\n  ".join(atoms) if atoms else "  (none)"


def render_prompt(kind: str, context: dict[str, Any], task: str = "") -> str:
    if kind not in TEMPLATES:
        raise ValueError(f"unknown request kind {kind!r}")
    if not context:
        raise MissingSlotError(f"{kind}: empty context")
    values = dict(context)
    values.setdefault("task", task)
    if kind == "predicate-naming" and "bounds" in values and not isinstance(values["bounds"], str):
        values["bounds"] = fmt_bounds(values["bounds"])
    if kind == "action-naming":
        for key in ("pre_state", "post_state"):
            if key in values and not isinstance(values[key], str):
                values[key] = fmt_atoms(values[key])
        for key in ("added", "deleted"):
            if key in values and not isinstance(values[key], str):
                values[key] = " ".join(sorted(str(a) for a in values[key])) or "(none)"
    for key in ("objects", "arguments", "params", "options"):
        if key in values and isinstance(values[key], (list, tuple)):
            values[key] = ", ".join(map(str, values[key])) if key != "params" else " ".join(values[key])
    missing = sorted(s for s in _slots(TEMPLATES[kind]) if s not in values or values[s] in (None, ""))
    if missing:
        raise MissingSlotError(f"{kind}: missing slots {missing}")
    return TEMPLATES[kind].format(**values)


@dataclass(frozen=True)
class SummarizerRequest:
    kind: str
    rendered_prompt: str
    context: dict = field(compare=False, hash=False)
    task_description: str = ""

    @classmethod
    def build(cls, kind: str, context: dict, task: str) -> "SummarizerRequest":
        return cls(kind, render_prompt(kind, context, task), context, task)
