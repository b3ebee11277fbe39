import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pddl_induction.scene import (DemoFormatError, Infeasible, ObjectState, Scene, SceneError,
                                  UnknownObjectError, apply_placement, check_feasible, feasible_batch,
                                  ingest_demonstration, load_scene, save_scene, settled,
                                  trajectory_from_json, violations)


def cube(oid, x, y, z, s=0.04):
    return ObjectState(oid, (x, y, z), (s, s, s))


def test_two_cubes_on_table_are_feasible():
    s = Scene((cube("a", 0, 0, 0.02), cube("b", 0.1, 0, 0.02)))
    assert check_feasible(s)
    assert violations(s) == []


def test_stacked_cube_is_supported():
    s = Scene((cube("a", 0, 0, 0.02), cube("b", 0.005, 0, 0.06)))
    assert check_feasible(s)


def test_floating_and_overlapping():
    assert violations(Scene((cube("a", 0, 0, 0.1),))) == ["unsupported"]
    assert "overlap" in violations(Scene((cube("a", 0, 0, 0.02), cube("b", 0.01, 0, 0.02))))


def test_half_overhang_is_the_support_limit():
    # support needs at least half the footprint
    ok = Scene((cube("a", 0, 0, 0.02), cube("b", 0.019, 0, 0.06)))
    bad = Scene((cube("a", 0, 0, 0.02), cube("b", 0.03, 0, 0.06)))
    assert check_feasible(ok)
    assert violations(bad) == ["unsupported"]


def test_scene_validation():
    with pytest.raises(SceneError):
        Scene((cube("a", 0, 0, 0.02), cube("a", 0.1, 0, 0.02)))
    with pytest.raises(SceneError):
        Scene((cube("a", 2.0, 0, 0.02),))
    with pytest.raises(SceneError):
        ObjectState("a", (0, 0, 0), (0, 1, 1))
    with pytest.raises(SceneError):
        ObjectState("a", (0, 0, 0), (1, 1, 1), color=(2, 0, 0))
    with pytest.raises(UnknownObjectError):
        Scene((cube("a", 0, 0, 0.02),))["zz"]


def test_apply_placement_refuses_infeasible_moves():
    s = Scene((cube("a", 0, 0, 0.02), cube("b", 0.1, 0, 0.02)))
    moved = apply_placement(s, "b", (0, 0, 0.06))
    assert moved and moved["b"].position == (0, 0, 0.06)
    bad = apply_placement(s, "b", (0, 0, 0.02))
    assert isinstance(bad, Infeasible) and not bad
    assert bad.reasons == ("overlap",)
    assert apply_placement(s, "b", (3, 0, 0.02)).reasons == ("out-of-workspace",)
    # the source scene is untouched
    assert s["b"].position == (0.1, 0, 0.02)


def test_scene_json_roundtrip(tmp_path):
    s = Scene((cube("a", 0, 0, 0.02), ObjectState("b", (0.1, 0, 0.02), (0.04, 0.04, 0.04), (1, 0, 0), 0.3, 2.0)))
    save_scene(s, tmp_path / "s.json")
    assert load_scene(tmp_path / "s.json") == s


def _raw(n=3):
    return {"task": "t", "steps": [{"t": i * 0.1, "objects": {"a": {"pos": [0, 0, 0.02], "size": [0.04] * 3}}}
                                   for i in range(n)]}


def test_ingest_reports_the_bad_step(tmp_path):
    raw = _raw()
    raw["steps"][2]["t"] = 0.05
    with pytest.raises(DemoFormatError) as e:
        trajectory_from_json(raw)
    assert e.value.step == 2
    raw = _raw()
    raw["steps"][1]["objects"]["b"] = {"pos": [0.1, 0, 0.02], "size": [0.04] * 3}
    with pytest.raises(DemoFormatError) as e:
        trajectory_from_json(raw)
    assert e.value.step == 1 and "extra ['b']" in str(e.value)
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DemoFormatError):
        ingest_demonstration(p)
    p.write_text(json.dumps({"steps": []}))
    with pytest.raises(DemoFormatError):
        ingest_demonstration(p)


def test_trajectory_roundtrip(stack_traj, tmp_path):
    from pddl_induction.scene import save_trajectory
    save_trajectory(stack_traj, tmp_path / "d.json")
    back = ingest_demonstration(tmp_path / "d.json")
    assert len(back) == len(stack_traj)
    assert back.scenes[-1] == stack_traj.scenes[-1]
    assert back.task == stack_traj.task


def test_settled_drops_carried_frames(stack_traj):
    rest = settled(stack_traj.scenes)
    assert 0 < len(rest) < len(stack_traj)


coord = st.floats(-0.15, 0.15, allow_nan=False)
height = st.sampled_from([0.02, 0.06, 0.1, 0.035])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(coord, coord, height), min_size=1, max_size=4))
def test_feasible_batch_matches_scalar_check(pts):
    objs = tuple(cube(f"o{i}", x, y, z) for i, (x, y, z) in enumerate(pts))
    s = Scene(objs)
    pos = np.array([[o.position for o in s.objects]])
    size = np.array([[o.size for o in s.objects]])
    assert bool(feasible_batch(pos, size, s.table_height, s.workspace)[0]) == check_feasible(s)


@settings(max_examples=100, deadline=None)
@given(coord, coord, coord, coord)
def test_overlap_is_symmetric(x1, y1, x2, y2):
    a = Scene((cube("a", x1, y1, 0.02), cube("b", x2, y2, 0.02)))
    b = Scene((cube("b", x1, y1, 0.02), cube("a", x2, y2, 0.02)))
    assert check_feasible(a) == check_feasible(b)
    apart = abs(x1 - x2) >= 0.04 or abs(y1 - y2) >= 0.04
    if apart:
        assert check_feasible(a)
