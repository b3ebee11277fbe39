import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pddl_induction.features import (DegenerateFeatureError, FeatureConfig, FeatureDef, Interval,
                                     SubspaceCapError, build_features, compute_d_min, derivation_complexity,
                                     discretize, enumerate_subspaces, merge_adjacent, planning_complexity,
                                     realize_scene, sample_and_filter, subspace_count)
from pddl_induction.scene import ObjectState, Scene, check_feasible


def dz(u=0.04, units=2):
    return FeatureDef("delta_z", 2, -units * u - u / 2, units * u + u / 2, u, "z", "diff", "position")


def test_interval_semantics():
    iv = Interval(0, 1)
    assert iv.contains(0) and not iv.contains(1)
    assert Interval(0, 1, True).contains(1)
    with pytest.raises(ValueError):
        Interval(1, 1)
    assert Interval.from_json(iv.to_json()) == iv


def test_merge_adjacent():
    got = merge_adjacent([Interval(1, 2, True), Interval(0, 1)])
    assert got == (Interval(0, 2, True),)
    assert merge_adjacent([Interval(0, 1), Interval(2, 3)]) == (Interval(0, 1), Interval(2, 3))


def test_centred_bins_put_zero_in_the_middle():
    f = dz()
    assert f.n_intervals == 5
    assert f.bin_index(0.0) == 2
    assert f.bin_index(0.04) == 3
    assert f.bin_index(f.hi) == 4
    assert f.bin_index(f.hi + 1e-6) is None
    parts = discretize(f)
    assert parts[-1].closed_hi and not parts[0].closed_hi
    assert math.isclose(sum(p.width for p in parts), f.hi - f.lo)


def test_feature_validation():
    with pytest.raises(ValueError):
        FeatureDef("x", 1, 0, 1, 0.1, "x", "diff")
    with pytest.raises(ValueError):
        FeatureDef("x", 1, 0, 1, 2.0, "x")
    with pytest.raises(ValueError):
        FeatureDef("x", 3, 0, 1, 0.1, "x")


def test_d_min_examples():
    assert compute_d_min([0.0, 0.04, 0.08, 0.04]) == pytest.approx(0.04)
    # near-duplicates collapse into one observation
    assert compute_d_min([0.0, 0.0005, 0.04], tol=1e-3) == pytest.approx(0.04 - 0.00025)
    with pytest.raises(DegenerateFeatureError):
        compute_d_min([0.1, 0.1])


@given(st.lists(st.integers(-1000, 1000), min_size=2, unique=True))
def test_d_min_matches_pairwise_oracle(vals):
    v = [x / 100 for x in vals]
    brute = min(abs(a - b) for a, b in itertools.combinations(v, 2))
    assert compute_d_min(v) == pytest.approx(brute)


@settings(max_examples=200)
@given(st.floats(-0.1, 0.1, allow_nan=False))
def test_bin_index_interval_contains_value(v):
    f = dz()
    k = f.bin_index(v)
    assert k is not None and f.interval(k).contains(v)


def test_enumerate_subspaces_and_cap():
    f = dz()
    g = FeatureDef("delta_x", 2, f.lo, f.hi, f.u, "x", "diff", "position")
    cells = enumerate_subspaces([f, g])
    assert len(cells) == subspace_count([f, g]) == 25
    assert cells[0].index == (0, 0) and cells[-1].index == (4, 4)
    with pytest.raises(SubspaceCapError) as e:
        enumerate_subspaces([f, g], cap=10)
    assert e.value.required == 25


def test_complexity_estimators():
    assert planning_complexity(2, 3, 4) == 1296
    assert planning_complexity(2, 3, 4, log10=True) == pytest.approx(math.log10(1296))
    assert derivation_complexity([(5, 3), (4, 1)]) == 129
    with pytest.raises(ValueError):
        derivation_complexity([(0, 2)])


def _template():
    return Scene((ObjectState("a", (0, 0, 0.02), (0.04,) * 3), ObjectState("b", (0.1, 0, 0.02), (0.04,) * 3)))


def test_sampled_feasibility_has_witnesses():
    f = dz()
    gx = FeatureDef("delta_x", 2, f.lo, f.hi, f.u, "x", "diff", "position")
    cells = sample_and_filter([gx, f], _template(), n=20000, seed=1)
    feasible = [c for c in cells if c.feasible]
    assert feasible
    for c in feasible:
        assert c.contains(c.witness)
        s = realize_scene([gx, f], c.witness, _template(), (0, 1))
        assert s is not None and check_feasible(s)
    # a cube half a cube-height above its partner at zero x-offset is interpenetrating
    above = {c.index: c.feasible for c in cells}
    assert above[(2, 3)] is True    # directly on top
    assert above[(2, 2)] is False   # same place


def test_sampling_is_seeded():
    f = dz()
    a = sample_and_filter([f], _template(), n=500, seed=3)
    b = sample_and_filter([f], _template(), n=500, seed=3)
    assert [c.feasible for c in a] == [c.feasible for c in b]
    with pytest.raises(ValueError):
        sample_and_filter([f], _template(), n=0)


def test_build_features_from_demo(stack_traj):
    from pddl_induction.bridge.induction import DEFAULT_FEATURES
    feats, dropped = build_features(FeatureConfig.load(DEFAULT_FEATURES), stack_traj.scenes)
    names = {f.name for f in feats}
    assert {"delta_x", "delta_y", "delta_z", "elevation"} <= names
    # identical cube sizes leave the size family degenerate
    assert dropped == {"size": "degenerate"}
    z = next(f for f in feats if f.name == "delta_z")
    assert z.u == pytest.approx(0.04, abs=1e-3)
    assert z.n_intervals == 5


def test_u_scale_changes_interval_length(stack_traj):
    from pddl_induction.bridge.induction import DEFAULT_FEATURES
    cfg = FeatureConfig.load(DEFAULT_FEATURES)
    base = {f.name: f.u for f in build_features(cfg, stack_traj.scenes)[0]}
    cfg.u_scale = 0.5
    half = {f.name: f.u for f in build_features(cfg, stack_traj.scenes)[0]}
    assert half["delta_z"] == pytest.approx(base["delta_z"] / 2)
