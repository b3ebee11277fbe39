"""Parser for the PDDL subset: STRIPS plus negative and universal preconditions."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (SUPPORTED_REQUIREMENTS, ActionSchema, And, Atom, Domain, Formula, Forall,
                  Not, PredicateDecl, Problem, atoms_in, free_vars)


class PDDLSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {message}")


class PDDLSemanticError(ValueError):
    pass


class UnsupportedRequirementError(PDDLSyntaxError):
    pass


@dataclass
class Tok:
    text: str
    line: int
    col: int


@dataclass
class Node:
    """A parenthesised list, or a bare symbol when `items` is None."""
    items: list | None
    text: str
    line: int
    col: int

    @property
    def is_list(self) -> bool:
        return self.items is not None

    def head(self) -> str:
        if not self.items or self.items[0].is_list:
            return ""
        return self.items[0].text.lower()


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def tokenize(text: str) -> list[Tok]:
    toks = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split(";", 1)[0]
        for m in _TOKEN.finditer(line):
            toks.append(Tok(m.group(), lineno, m.start() + 1))
    return toks


def read_tree(text: str) -> Node:
    toks = tokenize(text)
    if not toks:
        raise PDDLSyntaxError("empty input", 1, 1)
    stack: list[Node] = []
    root = None
    for t in toks:
        if t.text == "(":
            node = Node([], "(", t.line, t.col)
            if stack:
                stack[-1].items.append(node)
            elif root is not None:
                raise PDDLSyntaxError("content after the top-level expression", t.line, t.col)
            else:
                root = node
            stack.append(node)
        elif t.text == ")":
            if not stack:
                raise PDDLSyntaxError("unbalanced ')'", t.line, t.col)
            stack.pop()
        else:
            if not stack:
                raise PDDLSyntaxError(f"unexpected symbol {t.text!r} outside parentheses", t.line, t.col)
            stack[-1].items.append(Node(None, t.text, t.line, t.col))
    if stack:
        n = stack[-1]
        raise PDDLSyntaxError("unclosed '('", n.line, n.col)
    return root


def _expect_list(n: Node, what: str) -> list:
    if not n.is_list:
        raise PDDLSyntaxError(f"expected {what}, got {n.text!r}", n.line, n.col)
    return n.items


def _sym(n: Node, what: str) -> str:
    if n.is_list:
        raise PDDLSyntaxError(f"expected {what}, got a list", n.line, n.col)
    return n.text


def _typed_list(items: list, what: str) -> list[str]:
    """Names with optional '- object' annotations (only the object type is supported)."""
    out = []
    i = 0
    while i < len(items):
        s = _sym(items[i], what)
        if s == "-":
            if i + 1 >= len(items):
                raise PDDLSyntaxError("type name missing after '-'", items[i].line, items[i].col)
            t = _sym(items[i + 1], "type")
            if t.lower() != "object":
                raise PDDLSyntaxError(f"unsupported type {t!r}; only 'object' is supported",
                                      items[i + 1].line, items[i + 1].col)
            i += 2
            continue
        out.append(s)
        i += 1
    return out


def _formula(n: Node) -> Formula:
    items = _expect_list(n, "formula")
    if not items:
        return And(())
    head = n.head()
    if head == "and":
        return And(tuple(_formula(c) for c in items[1:]))
    if head == "not":
        if len(items) != 2:
            raise PDDLSyntaxError("'not' takes one argument", n.line, n.col)
        return Not(_formula(items[1]))
    if head == "forall":
        if len(items) != 3:
            raise PDDLSyntaxError("'forall' takes a variable list and a body", n.line, n.col)
        vars_ = _typed_list(_expect_list(items[1], "variable list"), "variable")
        if not all(v.startswith("?") for v in vars_):
            raise PDDLSyntaxError("forall variables must start with '?'", items[1].line, items[1].col)
        return Forall(tuple(vars_), _formula(items[2]))
    if head in ("or", "imply", "exists", "when", "=", "increase"):
        raise PDDLSyntaxError(f"unsupported construct {head!r}", n.line, n.col)
    if items[0].is_list:
        raise PDDLSyntaxError("expected a predicate name", n.line, n.col)
    return Atom(items[0].text.lower(), tuple(_sym(c, "argument").lower() for c in items[1:]))


def _effect(n: Node) -> tuple[set[Atom], set[Atom]]:
    add: set[Atom] = set()
    dele: set[Atom] = set()
    for lit in _conj_nodes(n):
        if lit.head() == "not":
            inner = _formula(lit)
            if not isinstance(inner.arg, Atom):
                raise PDDLSyntaxError("only atoms may be negated in effects", lit.line, lit.col)
            dele.add(inner.arg)
        elif lit.head() in ("forall", "when", "and", "or", "exists", "increase"):
            raise PDDLSyntaxError(f"unsupported effect {lit.head()!r}", lit.line, lit.col)
        else:
            f = _formula(lit)
            add.add(f)
    return add, dele


def _conj_nodes(n: Node) -> list[Node]:
    items = _expect_list(n, "effect")
    if not items:
        return []
    if n.head() == "and":
        return [c for c in items[1:]]
    return [n]


def _check_requirements(node: Node) -> list[str]:
    reqs = []
    for r in node.items[1:]:
        s = _sym(r, "requirement").lower()
        if s not in SUPPORTED_REQUIREMENTS:
            raise UnsupportedRequirementError(f"unsupported requirement {s}", r.line, r.col)
        reqs.append(s)
    return reqs


def parse_domain(text: str) -> Domain:
    root = read_tree(text)
    items = _expect_list(root, "domain")
    if root.head() != "define" or len(items) < 2:
        raise PDDLSyntaxError("expected (define (domain NAME) ...)", root.line, root.col)
    hdr = _expect_list(items[1], "domain header")
    if items[1].head() != "domain" or len(hdr) != 2:
        raise PDDLSyntaxError("expected (domain NAME)", items[1].line, items[1].col)
    name = _sym(hdr[1], "domain name").lower()
    reqs: list[str] = []
    preds: list[PredicateDecl] = []
    actions: list[ActionSchema] = []
    for sec in items[2:]:
        _expect_list(sec, "domain section")
        head = sec.head()
        if head == ":requirements":
            reqs = _check_requirements(sec)
        elif head == ":types":
            for t in _typed_list(sec.items[1:], "type"):
                if t.lower() != "object":
                    raise PDDLSyntaxError(f"unsupported type {t!r}", sec.line, sec.col)
        elif head == ":predicates":
            for p in sec.items[1:]:
                pi = _expect_list(p, "predicate declaration")
                if not pi or pi[0].is_list:
                    raise PDDLSyntaxError("predicate declaration needs a name", p.line, p.col)
                params = _typed_list(pi[1:], "parameter")
                preds.append(PredicateDecl(pi[0].text.lower(), len(params), (p.line, p.col)))
        elif head == ":action":
            actions.append(_action(sec))
        else:
            raise PDDLSyntaxError(f"unsupported domain section {head or sec.text!r}", sec.line, sec.col)
    seen = set()
    for p in preds:
        if p.name in seen:
            raise PDDLSemanticError(f"predicate {p.name} declared twice")
        seen.add(p.name)
    dom = Domain(name, tuple(preds), tuple(actions), tuple(reqs))
    check_domain(dom)
    return dom


def _action(sec: Node) -> ActionSchema:
    items = sec.items
    if len(items) < 2:
        raise PDDLSyntaxError("action needs a name", sec.line, sec.col)
    name = _sym(items[1], "action name").lower()
    params: list[str] = []
    pre: Formula = And(())
    add: set[Atom] = set()
    dele: set[Atom] = set()
    i = 2
    while i < len(items):
        key = _sym(items[i], "action keyword").lower()
        if i + 1 >= len(items):
            raise PDDLSyntaxError(f"{key} has no value", items[i].line, items[i].col)
        val = items[i + 1]
        if key == ":parameters":
            params = [p.lower() for p in _typed_list(_expect_list(val, "parameter list"), "parameter")]
            if not all(p.startswith("?") for p in params):
                raise PDDLSyntaxError("parameters must start with '?'", val.line, val.col)
        elif key == ":precondition":
            pre = _formula(val)
        elif key == ":effect":
            add, dele = _effect(val)
        else:
            raise PDDLSyntaxError(f"unsupported action field {key}", items[i].line, items[i].col)
        i += 2
    try:
        return ActionSchema(name, tuple(params), pre, frozenset(add), frozenset(dele), (sec.line, sec.col))
    except ValueError as e:
        raise PDDLSemanticError(str(e)) from None


def check_domain(dom: Domain) -> None:
    arity = dom.arities
    for act in dom.actions:
        for atom in list(atoms_in(act.precondition)) + sorted(act.add | act.delete):
            if atom.pred not in arity:
                raise PDDLSemanticError(f"action {act.name} uses undeclared predicate {atom.pred}")
            if len(atom.args) != arity[atom.pred]:
                raise PDDLSemanticError(f"action {act.name}: {atom.pred} expects {arity[atom.pred]} "
                                        f"arguments, got {len(atom.args)}")
        unknown = act.variables() - set(act.params)
        if unknown:
            raise PDDLSemanticError(f"action {act.name} uses unbound variables {sorted(unknown)}")
        consts = [a for at in list(atoms_in(act.precondition)) + list(act.add | act.delete)
                  for a in at.args if not a.startswith("?")]
        if consts:
            raise PDDLSemanticError(f"action {act.name} mentions constants {sorted(set(consts))}")


def parse_problem(text: str, domain: Domain | None = None) -> Problem:
    root = read_tree(text)
    items = _expect_list(root, "problem")
    if root.head() != "define" or len(items) < 2:
        raise PDDLSyntaxError("expected (define (problem NAME) ...)", root.line, root.col)
    hdr = items[1]
    if hdr.head() != "problem" or len(hdr.items) != 2:
        raise PDDLSyntaxError("expected (problem NAME)", hdr.line, hdr.col)
    name = _sym(hdr.items[1], "problem name").lower()
    dname = ""
    objects: list[str] = []
    init: set[Atom] = set()
    goal: Formula = And(())
    for sec in items[2:]:
        _expect_list(sec, "problem section")
        head = sec.head()
        if head == ":domain":
            dname = _sym(sec.items[1], "domain name").lower()
        elif head == ":requirements":
            _check_requirements(sec)
        elif head == ":objects":
            objects = [o.lower() for o in _typed_list(sec.items[1:], "object")]
        elif head == ":init":
            for a in sec.items[1:]:
                f = _formula(a)
                if not isinstance(f, Atom):
                    raise PDDLSyntaxError("init holds ground atoms only", a.line, a.col)
                init.add(f)
        elif head == ":goal":
            if len(sec.items) != 2:
                raise PDDLSyntaxError(":goal takes one formula", sec.line, sec.col)
            goal = _formula(sec.items[1])
        else:
            raise PDDLSyntaxError(f"unsupported problem section {head or sec.text!r}", sec.line, sec.col)
    prob = Problem(name, dname, tuple(objects), frozenset(init), goal)
    if domain is not None:
        check_problem(prob, domain)
    return prob


def check_problem(prob: Problem, dom: Domain) -> None:
    arity = dom.arities
    objs = set(prob.objects)
    if prob.domain_name and prob.domain_name != dom.name:
        raise PDDLSemanticError(f"problem targets domain {prob.domain_name}, not {dom.name}")
    for atom in sorted(prob.init) + list(atoms_in(prob.goal)):
        if atom.pred not in arity:
            raise PDDLSemanticError(f"problem uses undeclared predicate {atom.pred}")
        if len(atom.args) != arity[atom.pred]:
            raise PDDLSemanticError(f"{atom.pred} expects {arity[atom.pred]} arguments in {atom}")
    for atom in prob.init:
        bad = [a for a in atom.args if a not in objs]
        if bad:
            raise PDDLSemanticError(f"init atom {atom} mentions unknown objects {bad}")
    if free_vars(prob.goal):
        raise PDDLSemanticError(f"goal has unbound variables {sorted(free_vars(prob.goal))}")
