import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pddl_induction.bench.tasks import DOMAIN_DIR
from pddl_induction.features import planning_complexity
from pddl_induction.pddl import (NO_PLAN, PLAN, TIMEOUT, And, Atom, GroundingCapError, PDDLSemanticError,
                                 PDDLSyntaxError, UnsupportedRequirementError, emit_domain, emit_problem,
                                 Problem, ground, parse_domain, parse_problem, solve,
                                 validate)
from pddl_induction.pddl.ast import GroundStep, Plan
from pddl_induction.pddl.grounding import binding_count

from oracles import exhaustive_bfs, random_domain, random_problem, successors, truth

BLOCKS = (DOMAIN_DIR / "blocksworld.pddl").read_text()

PROBLEM = """
(define (problem three)
  (:domain blocksworld)
  (:objects a b c)
  (:init (ontable a) (ontable b) (on c a) (clear b) (clear c) (handempty))
  (:goal (and (on a b) (on b c))))
"""


@pytest.fixture(scope="module")
def blocks():
    return parse_domain(BLOCKS)


def test_parse_blocksworld(blocks):
    assert blocks.name == "blocksworld"
    assert {a.name for a in blocks.actions} == {"pick-up", "put-down", "stack", "unstack"}
    assert blocks.arities["on"] == 2


def test_sussman_anomaly_needs_six_steps(blocks):
    prob = parse_problem(PROBLEM, blocks)
    res = solve(prob, blocks)
    assert res.status == PLAN
    assert len(res.plan) == 6
    assert validate(res.plan, prob, blocks)


def test_goal_already_true_gives_empty_plan(blocks):
    prob = parse_problem(PROBLEM.replace("(:goal (and (on a b) (on b c)))", "(:goal (on c a))"), blocks)
    res = solve(prob, blocks)
    assert res.solved and len(res.plan) == 0


def test_unreachable_static_goal(blocks):
    # distinct-object bindings never produce (on a a), and init lacks it
    prob = parse_problem(PROBLEM.replace("(:goal (and (on a b) (on b c)))", "(:goal (and (on a a)))"), blocks)
    assert solve(prob, blocks).status == NO_PLAN


def test_zero_budget_times_out(blocks):
    assert solve(parse_problem(PROBLEM, blocks), blocks, budget=0).status == TIMEOUT


def test_gbfs_finds_a_valid_plan(blocks):
    prob = parse_problem(PROBLEM, blocks)
    res = solve(prob, blocks, mode="gbfs")
    assert res.solved and validate(res.plan, prob, blocks)


def test_validate_reports_first_bad_step(blocks):
    prob = parse_problem(PROBLEM, blocks)
    v = validate(Plan((GroundStep("stack", ("a", "b")),)), prob, blocks)
    assert not v and v.step == 0
    v = validate(Plan((GroundStep("unstack", ("c", "a")),)), prob, blocks)
    assert not v and v.step == "goal"
    assert validate([GroundStep("fly", ("a",))], prob, blocks).message == "unknown action fly"


def test_syntax_errors_carry_positions():
    with pytest.raises(PDDLSyntaxError) as e:
        parse_domain("(define (domain d)\n  (:predicates (p ?a))\n")
    assert e.value.line == 1
    with pytest.raises(PDDLSyntaxError) as e:
        parse_domain("(define (domain d))\n)")
    assert (e.value.line, e.value.col) == (2, 1)
    with pytest.raises(UnsupportedRequirementError):
        parse_domain("(define (domain d) (:requirements :fluents))")
    with pytest.raises(PDDLSyntaxError):
        parse_domain("(define (domain d) (:functions (f)))")


def test_semantic_errors():
    base = "(define (domain d) (:predicates (p ?a)) (:action x :parameters (?a) :precondition {} :effect {}))"
    with pytest.raises(PDDLSemanticError, match="undeclared"):
        parse_domain(base.format("(q ?a)", "(p ?a)"))
    with pytest.raises(PDDLSemanticError, match="expects 1"):
        parse_domain(base.format("(p ?a ?a)", "(p ?a)"))
    with pytest.raises(PDDLSemanticError, match="unbound"):
        parse_domain(base.format("(p ?z)", "(p ?a)"))
    with pytest.raises(PDDLSemanticError, match="both added and deleted"):
        parse_domain(base.format("(and)", "(and (p ?a) (not (p ?a)))"))


def test_problem_checks(blocks):
    with pytest.raises(PDDLSemanticError, match="unknown objects"):
        parse_problem(PROBLEM.replace("(on c a)", "(on c z)"), blocks)
    with pytest.raises(PDDLSemanticError, match="targets domain"):
        parse_problem(PROBLEM.replace("(:domain blocksworld)", "(:domain other)"), blocks)


@pytest.mark.parametrize("path", sorted(DOMAIN_DIR.glob("*.pddl")), ids=lambda p: p.stem)
def test_fixture_roundtrip(path):
    d = parse_domain(path.read_text())
    text = emit_domain(d)
    assert parse_domain(text) == d
    assert emit_domain(parse_domain(text)) == text


def test_problem_roundtrip(blocks):
    p = parse_problem(PROBLEM, blocks)
    assert parse_problem(emit_problem(p), blocks) == p


def test_grounding_counts_distinct_bindings(blocks):
    acts = ground(blocks, ["a", "b", "c", "d"])
    brute = sum(sum(1 for _ in itertools.permutations("abcd", a.arity)) for a in blocks.actions)
    assert len(acts) == brute == binding_count(blocks, 4)
    assert all(len(set(g.args)) == len(g.args) for g in acts)
    with pytest.raises(GroundingCapError):
        ground(blocks, list("abcdef"), cap=10)


def test_forall_grounds_over_all_objects():
    d = parse_domain((DOMAIN_DIR / "hanoi-forall.pddl").read_text())
    g = [x for x in ground(d, ["d1", "p1", "p2"]) if x.args == ("d1", "p1", "p2")][0]
    assert Atom("on", ("p1", "d1")) in g.pre_neg and Atom("on", ("d1", "p2")) in g.pre_neg


def test_hanoi_forall_fixture_is_optimal():
    d = parse_domain((DOMAIN_DIR / "hanoi-forall.pddl").read_text())
    for n in (2, 3):
        disks = [f"d{i}" for i in range(1, n + 1)]
        objs = disks + ["p1", "p2", "p3"]
        init = {Atom("on", (disks[i], disks[i + 1])) for i in range(n - 1)} | {Atom("on", (disks[-1], "p1"))}
        init |= {Atom("smaller", (a, b)) for i, a in enumerate(disks) for b in disks[i + 1:] + ["p1", "p2", "p3"]}
        goal = [Atom("on", (disks[i], disks[i + 1])) for i in range(n - 1)] + [Atom("on", (disks[-1], "p3"))]
        prob = Problem("h", d.name, tuple(objs), frozenset(init), And(tuple(goal)))
        res = solve(prob, d)
        assert res.solved and len(res.plan) == 2 ** n - 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_random_domains_roundtrip(seed):
    d = random_domain(random.Random(seed))
    assert parse_domain(emit_domain(d)) == d


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_solver_agrees_with_exhaustive_search(seed):
    rng = random.Random(seed)
    d = random_domain(rng)
    prob = random_problem(rng, d)
    ref = exhaustive_bfs(prob, d)
    res = solve(prob, d, budget=30)
    if ref == "too-big":
        return
    if ref is None:
        assert res.status == NO_PLAN
    else:
        assert res.status == PLAN
        assert len(res.plan) == ref
        assert validate(res.plan, prob, d)
        # replay with the oracle's own evaluator
        state = frozenset(prob.init)
        for step in res.plan:
            state = dict(successors(d, state, list(prob.objects)))[(step.action, step.args)]
        assert truth(prob.goal, state, list(prob.objects), {})


def test_planning_complexity_matches_tree_size():
    # m actions x n objects branching for l levels
    m, n, l = 2, 3, 4
    leaves = sum(1 for _ in itertools.product(range(m * n), repeat=l))
    assert planning_complexity(m, n, l) == leaves == math.prod([m * n] * l)
