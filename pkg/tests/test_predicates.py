import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pddl_induction.features import FeatureDef, Interval
from pddl_induction.pddl.ast import Atom
from pddl_induction.predicates import (HIGHER, HigherOrderForm, Library, LibraryError, Merge, PredicateDef,
                                       Subdivide, derive_higher_order, eval_predicate, ground_state,
                                       quantified_arity, refine_intervals, rename_library, semantic_signature)
from pddl_induction.scene import ObjectState, Scene

U = 0.04


def feat(name, q, units=2):
    return FeatureDef(name, 2, -units * U - U / 2, units * U + U / 2, U, q, "diff", "position")


FEATS = (feat("delta_x", "x"), feat("delta_y", "y"), feat("delta_z", "z"),
         FeatureDef("elevation", 1, -U / 2, 3 * U + U / 2, U, "elevation", "value", "support"))
CENTRE = (Interval(-U / 2, U / 2),)


def base_library():
    above = PredicateDef("above", 2, (("delta_x", CENTRE), ("delta_y", CENTRE),
                                      ("delta_z", (Interval(U / 2, 3 * U / 2),))))
    on_table = PredicateDef("on-table", 1, (("elevation", (Interval(-U / 2, U / 2),)),))
    return Library(FEATS, (above, on_table))


def cube(oid, x, y, z):
    return ObjectState(oid, (x, y, z), (U, U, U))


TOWER = Scene((cube("a", 0, 0, 0.02), cube("b", 0, 0, 0.06), cube("c", 0.2, 0, 0.02)))


def test_first_order_evaluation():
    lib = base_library()
    assert eval_predicate("above", ("b", "a"), TOWER, lib)
    assert not eval_predicate("above", ("a", "b"), TOWER, lib)
    assert eval_predicate("on-table", ("c",), TOWER, lib)
    assert not eval_predicate("on-table", ("b",), TOWER, lib)
    with pytest.raises(ValueError):
        eval_predicate("above", ("a",), TOWER, lib)


def test_higher_order_forms():
    lib = derive_higher_order(base_library())
    names = {p.name for p in lib.predicates}
    assert {"not_above", "forall_0_above", "forall_0_not_above"} <= names
    assert lib["forall_0_not_above"].arity == 1
    clear = {a.args[0] for a in ground_state(TOWER, lib) if a.pred == "forall_0_not_above"}
    assert clear == {"b", "c"}
    assert "exists_0_above" in {p.name for p in derive_higher_order(base_library(), include_exists=True).predicates}


def test_derived_name_collision():
    lib = derive_higher_order(base_library())
    with pytest.raises(LibraryError):
        derive_higher_order(lib)


def test_library_validation():
    above = base_library()["above"]
    with pytest.raises(LibraryError, match="duplicate"):
        Library(FEATS, (above, above))
    with pytest.raises(LibraryError, match="unknown feature"):
        Library((), (above,))
    wide = PredicateDef("wide", 2, (("delta_x", (Interval(-1, 1),)),))
    with pytest.raises(LibraryError, match="leaves the range"):
        Library(FEATS, (wide,))
    with pytest.raises(ValueError):
        PredicateDef("p", 1)
    with pytest.raises(ValueError):
        PredicateDef("p", 1, order=HIGHER)


def test_library_json_roundtrip(tmp_path):
    lib = derive_higher_order(base_library())
    lib.save(tmp_path / "lib.json")
    assert Library.load(tmp_path / "lib.json") == lib


def test_quantified_arity():
    assert quantified_arity(2, "not") == 2
    assert quantified_arity(2, "forall-not") == 1


def test_rename_follows_base():
    lib = rename_library(derive_higher_order(base_library()), {"above": "on"})
    assert "forall_0_not_on" in lib and "above" not in lib
    assert lib["forall_0_not_on"].form == HigherOrderForm("on", "forall-not", 0)


def test_semantic_signature_ignores_names():
    lib = derive_higher_order(base_library())
    ren = rename_library(lib, {"above": "stacked"})
    assert semantic_signature(lib["forall_0_not_above"], lib) == \
        semantic_signature(ren["forall_0_not_stacked"], ren)
    assert semantic_signature(lib["above"], lib) != semantic_signature(lib["on-table"], lib)


def test_refine_examples():
    p = PredicateDef("p", 2, (("delta_z", (Interval(-0.1, 0.0), Interval(0.0, 0.1, True))),))
    merged = refine_intervals(p, Merge("delta_z", (0, 1)))
    assert merged.intervals("delta_z") == (Interval(-0.1, 0.1, True),)
    assert merged.origin == "refined"
    with pytest.raises(ValueError):
        refine_intervals(p, Merge("delta_z", (0,)))
    with pytest.raises(IndexError):
        refine_intervals(p, Subdivide("delta_z", 5, 2))


@settings(max_examples=150)
@given(st.integers(2, 5), st.integers(0, 3), st.floats(-0.1, 0.1, allow_nan=False))
def test_subdivide_then_merge_preserves_coverage(factor, k, v):
    ivs = tuple(Interval(-0.1 + 0.05 * i, -0.05 + 0.05 * i, i == 3) for i in range(4))
    p = PredicateDef("p", 2, (("delta_z", ivs),))
    split = refine_intervals(p, Subdivide("delta_z", k, factor))
    assert len(split.intervals("delta_z")) == 4 + factor - 1
    back = refine_intervals(split, Merge("delta_z", tuple(range(k, k + factor))))
    member = lambda q: any(iv.contains(v) for iv in q.intervals("delta_z"))  # noqa: E731
    assert member(p) == member(split) == member(back)


coord = st.sampled_from([-0.1, 0.0, 0.005, 0.1])
level = st.sampled_from([0.02, 0.06, 0.1])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(coord, coord, level), min_size=2, max_size=4, unique=True))
def test_ground_state_matches_pointwise_evaluation(pts):
    lib = derive_higher_order(base_library())
    s = Scene(tuple(cube(f"o{i}", x, y, z) for i, (x, y, z) in enumerate(pts)))
    oracle = set()
    for p in lib.predicates:
        for args in itertools.permutations(s.ids, p.arity):
            if eval_predicate(p, args, s, lib):
                oracle.add(Atom(p.name, args))
    assert ground_state(s, lib) == oracle


def test_irrelevant_predicates_are_skipped():
    lib = base_library()
    lib = lib.replace_predicate(lib["on-table"].with_relevance("irrelevant"))
    assert all(a.pred != "on-table" for a in ground_state(TOWER, lib))
    assert any(a.pred == "on-table" for a in ground_state(TOWER, lib, include_irrelevant=True))
