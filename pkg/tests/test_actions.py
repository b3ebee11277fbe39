import pytest

from pddl_induction.actions import (compose_domain, dedupe, extract_transitions, ground_trajectory,
                                    lift_transition, merge_schemas, replay, schema_key)
from pddl_induction.bench.tasks import pick_place_demo
from pddl_induction.pddl.ast import ActionSchema, And, Atom, Not
from pddl_induction.pddl.parser import PDDLSemanticError

A = lambda p, *args: Atom(p, args)  # noqa: E731


def test_dedupe_collapses_runs_only():
    s1, s2 = frozenset({A("p", "a")}), frozenset()
    assert dedupe([s1, s1, s2, s2, s1]) == [s1, s2, s1]


def test_lift_stack_transition():
    pre = frozenset({A("clear", "b"), A("clear", "c"), A("on-table", "b"), A("on-table", "c"), A("clear", "a")})
    post = frozenset({A("clear", "b"), A("on-table", "c"), A("above", "b", "c"), A("clear", "a")})
    schema, var = lift_transition((pre, post), name="stack")
    assert var == {"b": "?a", "c": "?b"}
    assert schema.add == {A("above", "?a", "?b")}
    assert schema.delete == {A("clear", "?b"), A("on-table", "?a")}
    # atoms of uninvolved objects do not leak into the precondition
    assert A("clear", "?a") in schema.precondition.parts
    assert all("a" not in x.args for x in schema.precondition.parts)
    with pytest.raises(ValueError):
        lift_transition((pre, pre))


def test_summarizer_names_the_action():
    pre, post = frozenset({A("p", "x")}), frozenset({A("q", "x")})
    schema, _ = lift_transition((pre, post), summarizer=lambda *_: "flip")
    assert schema.name == "flip"


def test_merge_intersects_preconditions():
    s1 = ActionSchema("one", ("?a",), And((A("p", "?a"), A("r", "?a"))), frozenset({A("q", "?a")}))
    s2 = ActionSchema("two", ("?a",), And((A("p", "?a"),)), frozenset({A("q", "?a")}))
    other = ActionSchema("three", ("?a",), And(), frozenset({A("r", "?a")}))
    out = merge_schemas([s1, other, s2])
    assert [s.name for s in out] == ["one", "three"]
    assert set(out[0].precondition.parts) == {A("p", "?a")}


def test_schema_key_is_name_and_variable_free():
    s = ActionSchema("x", ("?u", "?v"), And((Not(A("p", "?v")),)), frozenset({A("q", "?u", "?v")}))
    t = ActionSchema("y", ("?a", "?b"), And((Not(A("p", "?b")),)), frozenset({A("q", "?a", "?b")}))
    assert schema_key(s) == schema_key(t)


def test_compose_domain(stack_result):
    lib = stack_result.library
    s = ActionSchema("move", ("?a", "?b"), And((A("above", "?a", "?b"),)), frozenset({A("on-table", "?a")}),
                     frozenset({A("above", "?a", "?b")}))
    twin = s.rename({"?a": "?x", "?b": "?y"}, "move")
    other = ActionSchema("move", ("?a",), And(), frozenset({A("on-table", "?a")}))
    dom = compose_domain(lib, [s, twin, other], "d")
    assert [a.name for a in dom.actions] == ["move", "move-2"]
    with pytest.raises(PDDLSemanticError):
        compose_domain(lib, [ActionSchema("bad", ("?a",), And(), frozenset({A("ghost", "?a")}))], "d")


def test_pick_place_compresses_to_two_states(stack_result):
    traj = pick_place_demo(1001)
    lt = ground_trajectory(traj, stack_result.library)
    assert len(traj) == 1001
    assert len(lt) == 2


def test_stack_demo_states_and_replay(stack_result, stack_traj):
    lt = ground_trajectory(stack_traj, stack_result.library)
    assert len(lt) == 3
    pairs = extract_transitions(lt)
    lifted = [lift_transition(p) for p in pairs]
    # the lifted effects, re-bound to the demo objects, reproduce every state
    assert replay(lifted, lt.states[0]) == list(lt.states)
    assert len(merge_schemas([s for s, _ in lifted])) == 1


def test_grounding_without_relevant_predicates_fails(stack_result, stack_traj):
    lib = stack_result.library
    lib = lib.with_predicates(p.with_relevance("irrelevant") for p in lib.predicates)
    with pytest.raises(ValueError):
        ground_trajectory(stack_traj, lib)
