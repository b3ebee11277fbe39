"""Continuous features, interval partitions and subspace feasibility filtering."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .scene import (EPS_SUP, ObjectState, Scene, check_feasible, feasible_batch, in_workspace,
                    settled)

POSITION_Q = ("x", "y", "z")
SIZE_Q = ("w", "l", "h")
COLOR_Q = ("r", "g", "b")
QUANTITIES = POSITION_Q + SIZE_Q + COLOR_Q + ("elevation", "yaw")
MODES = ("value", "diff", "absdiff")
DEFAULT_SUBSPACE_CAP = 10**6
DEFAULT_SAMPLES = 1000


class DegenerateFeatureError(ValueError):
    pass


class SubspaceCapError(ValueError):
    def __init__(self, required: int, cap: int):
        self.required = required
        self.cap = cap
        super().__init__(f"{required} subspaces exceed the cap of {cap}; raise cap to at least {required}")


@dataclass(frozen=True, order=True)
class Interval:
    """[lo, hi) or, with closed_hi, [lo, hi]."""
    lo: float
    hi: float
    closed_hi: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi})")

    def contains(self, v: float) -> bool:
        return self.lo <= v < self.hi or (self.closed_hi and v == self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_json(self) -> list:
        return [self.lo, self.hi, self.closed_hi]

    @classmethod
    def from_json(cls, d) -> "Interval":
        return cls(float(d[0]), float(d[1]), bool(d[2]) if len(d) > 2 else False)

    def __str__(self) -> str:
        return f"[{self.lo:.4f}, {self.hi:.4f}{']' if self.closed_hi else ')'}"


def merge_adjacent(intervals: Iterable[Interval]) -> tuple[Interval, ...]:
    """Sort and fuse touching intervals."""
    out: list[Interval] = []
    for iv in sorted(intervals):
        if out and math.isclose(out[-1].hi, iv.lo, abs_tol=1e-12) and not out[-1].closed_hi:
            out[-1] = Interval(out[-1].lo, iv.hi, iv.closed_hi)
        elif out and iv.lo < out[-1].hi:
            hi = max(out[-1].hi, iv.hi)
            closed = iv.closed_hi if iv.hi >= out[-1].hi else out[-1].closed_hi
            out[-1] = Interval(out[-1].lo, hi, closed)
        else:
            out.append(iv)
    return tuple(out)


def in_union(v: float, intervals: Sequence[Interval]) -> bool:
    return any(iv.contains(v) for iv in intervals)


def _name_for(quantity: str, arity: int) -> str:
    if quantity in SIZE_Q:
        base = f"size_{quantity}"
    elif quantity in COLOR_Q:
        base = f"color_{quantity}"
    else:
        base = quantity
    return f"delta_{base}" if arity == 2 else base


@dataclass(frozen=True)
class FeatureDef:
    name: str
    arity: int
    lo: float
    hi: float
    u: float
    quantity: str
    mode: str = "value"
    family: str = ""

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ValueError(f"{self.name}: arity must be 1 or 2")
        if self.quantity not in QUANTITIES:
            raise ValueError(f"{self.name}: unknown quantity {self.quantity!r}")
        if self.mode not in MODES or (self.arity == 1) != (self.mode == "value"):
            raise ValueError(f"{self.name}: mode {self.mode!r} does not fit arity {self.arity}")
        if not self.lo < self.hi:
            raise ValueError(f"{self.name}: range needs lo < hi, got [{self.lo}, {self.hi}]")
        if not 0 < self.u <= self.hi - self.lo + 1e-12:
            raise ValueError(f"{self.name}: need 0 < u <= hi - lo, got u={self.u}")
        if not self.family:
            object.__setattr__(self, "family", self.name)

    @property
    def n_intervals(self) -> int:
        # guard against (hi-lo)/u landing a hair above an integer
        return max(1, math.ceil((self.hi - self.lo) / self.u - 1e-9))

    @property
    def signed(self) -> bool:
        return self.mode == "diff"

    def bin_index(self, v: float) -> int | None:
        if v < self.lo or v > self.hi:
            return None
        k = int(math.floor((v - self.lo) / self.u))
        return min(k, self.n_intervals - 1)

    def interval(self, k: int) -> Interval:
        n = self.n_intervals
        if not 0 <= k < n:
            raise IndexError(f"{self.name}: interval index {k} outside 0..{n - 1}")
        lo = self.lo + k * self.u
        if k == n - 1:
            return Interval(lo, self.hi, True)
        return Interval(lo, self.lo + (k + 1) * self.u)

    def value(self, scene: Scene, args: Sequence[str]) -> float:
        if len(args) != self.arity:
            raise ValueError(f"{self.name} takes {self.arity} objects, got {len(args)}")
        a = quantity_of(scene[args[0]], self.quantity, scene.table_height)
        if self.arity == 1:
            return a
        b = quantity_of(scene[args[1]], self.quantity, scene.table_height)
        return a - b if self.mode == "diff" else abs(a - b)

    def to_json(self) -> dict:
        return {"name": self.name, "arity": self.arity, "range": [self.lo, self.hi], "u": self.u,
                "quantity": self.quantity, "mode": self.mode, "family": self.family}

    @classmethod
    def from_json(cls, d: dict) -> "FeatureDef":
        return cls(d["name"], d["arity"], d["range"][0], d["range"][1], d["u"], d["quantity"],
                   d.get("mode", "value"), d.get("family", ""))


def quantity_of(obj: ObjectState, q: str, table_z: float = 0.0) -> float:
    if q in POSITION_Q:
        return obj.position[POSITION_Q.index(q)]
    if q in SIZE_Q:
        return obj.size[SIZE_Q.index(q)]
    if q in COLOR_Q:
        return obj.color[COLOR_Q.index(q)]
    if q == "elevation":
        return obj.bottom - table_z
    if q == "yaw":
        return obj.yaw
    raise ValueError(f"unknown quantity {q!r}")


def discretize(feature: FeatureDef) -> list[Interval]:
    return [feature.interval(k) for k in range(feature.n_intervals)]


def compute_d_min(values: Iterable[float], tol: float = 1e-9) -> float:
    """Smallest non-zero difference between observed values.

    Values closer than `tol` are treated as one observation: they are chained
    into clusters and each cluster is represented by its median.
    """
    vals = sorted(float(v) for v in values)
    if not vals:
        raise ValueError("compute_d_min needs at least one value")
    clusters = [[vals[0]]]
    for a, b in zip(vals, vals[1:]):
        if b - a > tol:
            clusters.append([b])
        else:
            clusters[-1].append(b)
    if len(clusters) < 2:
        raise DegenerateFeatureError("all observed values coincide; no non-zero difference")
    reps = [float(np.median(c)) for c in clusters]
    return min(b - a for a, b in zip(reps, reps[1:]))


# -- subspaces -----------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    family: str
    index: tuple[int, ...]
    features: tuple[str, ...]
    bounds: tuple[Interval, ...]
    feasible: bool | None = None
    witness: tuple[float, ...] | None = field(default=None, compare=False)

    @property
    def intervals(self) -> dict[str, tuple[int, Interval]]:
        return {f: (k, b) for f, k, b in zip(self.features, self.index, self.bounds)}

    def contains(self, values: Sequence[float]) -> bool:
        return all(b.contains(v) for b, v in zip(self.bounds, values))


def family_groups(features: Sequence[FeatureDef]) -> dict[str, list[FeatureDef]]:
    groups: dict[str, list[FeatureDef]] = {}
    for f in features:
        groups.setdefault(f.family, []).append(f)
    for fam, fs in groups.items():
        if len({f.arity for f in fs}) != 1:
            raise ValueError(f"family {fam!r} mixes arities")
    return groups


def subspace_count(features: Sequence[FeatureDef]) -> int:
    return math.prod(f.n_intervals for f in features)


def enumerate_subspaces(features: Sequence[FeatureDef], cap: int = DEFAULT_SUBSPACE_CAP,
                        family: str | None = None) -> list[Subspace]:
    """Cartesian product of the features' partitions, lexicographic in feature order."""
    if not features:
        raise ValueError("enumerate_subspaces needs at least one feature")
    total = subspace_count(features)
    if total > cap:
        raise SubspaceCapError(total, cap)
    parts = [discretize(f) for f in features]
    names = tuple(f.name for f in features)
    fam = family if family is not None else features[0].family
    out = []
    for idx in itertools.product(*(range(len(p)) for p in parts)):
        out.append(Subspace(fam, idx, names, tuple(p[k] for p, k in zip(parts, idx))))
    return out


def derivation_complexity(types: Sequence[tuple[int, int]]) -> int:
    """Sum over predicate types of partitions ** dimensions."""
    total = 0
    for n_p, n_dim in types:
        if n_p < 1 or n_dim < 1:
            raise ValueError(f"need n_p >= 1 and n_dim >= 1, got ({n_p}, {n_dim})")
        total += n_p ** n_dim
    return total


def planning_complexity(m: int, n: int, l: int, log10: bool = False) -> int | float:
    """(m*n)**l search-tree size; exact int, or its log10 on request."""
    if m < 1 or n < 1 or l < 1:
        raise ValueError(f"need m, n, l >= 1, got ({m}, {n}, {l})")
    if log10:
        return l * math.log10(m * n)
    return (m * n) ** l


# -- sampling ------------------------------------------------------------

def _pairs_from(template: Scene, arity: int) -> list[tuple[int, ...]]:
    m = len(template.objects)
    if arity == 1:
        return [(i,) for i in range(m)]
    return [(i, j) for i in range(m) for j in range(m) if i != j]


def realize_batch(features: Sequence[FeatureDef], values: np.ndarray, template: Scene,
                  picks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Build N small scenes realising sampled feature vectors.

    Returns (pos, size, color, valid) with shapes (N, A, 3) x3 and (N,), where A is the
    family arity. Object 0 carries the first argument. For pairwise positional
    features the lower of the two objects rests on the table; without positional
    features the objects sit apart on the table.
    """
    objs = template.objects
    n = values.shape[0]
    arity = features[0].arity
    picks = np.asarray(picks, dtype=int).reshape(n, arity)
    size = np.array([o.size for o in objs], dtype=float)[picks]
    color = np.array([o.color for o in objs], dtype=float)[picks]
    valid = np.ones(n, dtype=bool)
    table = template.table_height
    cx = (template.workspace[0][0] + template.workspace[1][0]) / 2
    cy = (template.workspace[0][1] + template.workspace[1][1]) / 2
    pos = np.zeros((n, arity, 3))
    pos[..., 0], pos[..., 1] = cx, cy
    if arity == 2:
        spread = max(0.1, float(size[..., 0].max()) * 1.5)
        pos[:, 0, 0] += spread
        pos[:, 1, 0] -= spread
    pos[..., 2] = table + size[..., 2] / 2

    rel = np.zeros((n, 3))
    has_rel = False
    for col, f in enumerate(features):
        v = values[:, col]
        q = f.quantity
        if q in SIZE_Q:
            d = SIZE_Q.index(q)
            if arity == 1:
                size[:, 0, d] = v
            else:
                size[:, 0, d] = size[:, 1, d] + v
            valid &= size[:, 0, d] > 0
        elif q in COLOR_Q:
            d = COLOR_Q.index(q)
            if arity == 1:
                color[:, 0, d] = v
            else:
                mag = np.abs(v)
                # place the reference channel so both channels stay inside [0, 1]
                base = np.clip(color[:, 1, d], 0.0, np.clip(1.0 - mag, 0.0, 1.0))
                color[:, 1, d] = base
                color[:, 0, d] = base + (mag if f.mode == "absdiff" else v)
                if f.mode == "diff":
                    neg = v < 0
                    color[neg, 1, d] = base[neg] + mag[neg]
                    color[neg, 0, d] = base[neg]
                valid &= (color[:, 0, d] >= 0) & (color[:, 0, d] <= 1)
    pos[..., 2] = table + size[..., 2] / 2
    for col, f in enumerate(features):
        v = values[:, col]
        q = f.quantity
        if q in POSITION_Q:
            d = POSITION_Q.index(q)
            if arity == 1:
                pos[:, 0, d] = v
            else:
                rel[:, d] = v if f.mode == "diff" else np.abs(v)
                has_rel = True
        elif q == "elevation":
            if arity == 1:
                pos[:, 0, 2] = table + v + size[:, 0, 2] / 2
            else:
                rel[:, 2] = v + (size[:, 1, 2] - size[:, 0, 2]) / 2
                has_rel = True
    if has_rel:
        pos[:, 1, 0], pos[:, 1, 1] = cx, cy
        pos[:, 0, :2] = pos[:, 1, :2] + rel[:, :2]
        # rest the lower box on the table, keep the centre offset
        bottom_b = np.zeros(n)
        bottom_a = rel[:, 2] + (size[:, 1, 2] - size[:, 0, 2]) / 2
        shift = table - np.minimum(bottom_a, bottom_b)
        pos[:, 1, 2] = shift + size[:, 1, 2] / 2
        pos[:, 0, 2] = pos[:, 1, 2] + rel[:, 2]
    return pos, size, color, valid


def _feasible(pos, size, valid, template: Scene) -> np.ndarray:
    ok = valid.copy()
    safe = np.where(valid[:, None, None], size, 1.0)
    ok &= feasible_batch(pos, safe, template.table_height, template.workspace)
    return ok


def sample_and_filter(features: Sequence[FeatureDef], scene_template: Scene, n: int | Mapping[str, int] = DEFAULT_SAMPLES,
                      seed: int = 0, cap: int = DEFAULT_SUBSPACE_CAP) -> list[Subspace]:
    """Uniformly sample each feature family, realise samples as scenes, keep feasibility per cell.

    `n` is the sample count per family, or a mapping family -> count. Cells that no
    sample landed in stay `feasible=None`.
    """
    counts = n if isinstance(n, Mapping) else None
    if counts is None and (not isinstance(n, int) or n < 1):
        raise ValueError(f"sample count must be >= 1, got {n!r}")
    rng = np.random.default_rng(seed)
    out: list[Subspace] = []
    for fam, fs in family_groups(features).items():
        cells = enumerate_subspaces(fs, cap, fam)
        k = counts.get(fam, DEFAULT_SAMPLES) if counts is not None else n
        if k < 1:
            raise ValueError(f"sample count for {fam!r} must be >= 1")
        pairs = _pairs_from(scene_template, fs[0].arity)
        if not pairs:
            out.extend(cells)
            continue
        lo = np.array([f.lo for f in fs])
        hi = np.array([f.hi for f in fs])
        vals = rng.uniform(lo, hi, size=(k, len(fs)))
        picks = np.array(pairs)[rng.integers(0, len(pairs), size=k)]
        pos, size, _, valid = realize_batch(fs, vals, scene_template, picks)
        ok = _feasible(pos, size, valid, scene_template)
        bins = np.stack([np.minimum(np.floor((vals[:, c] - f.lo) / f.u).astype(int), f.n_intervals - 1)
                         for c, f in enumerate(fs)], axis=1)
        dims = [f.n_intervals for f in fs]
        flat = np.ravel_multi_index(bins.T, dims)
        seen = np.zeros(len(cells), dtype=bool)
        seen[flat] = True
        feas = np.zeros(len(cells), dtype=bool)
        feas[flat[ok]] = True
        witness: dict[int, tuple[float, ...]] = {}
        for i in np.flatnonzero(ok):
            witness.setdefault(int(flat[i]), tuple(float(v) for v in vals[i]))
        for ci, cell in enumerate(cells):
            flag = bool(feas[ci]) if seen[ci] else None
            out.append(Subspace(cell.family, cell.index, cell.features, cell.bounds, flag, witness.get(ci)))
    return out


def realize_scene(features: Sequence[FeatureDef], values: Sequence[float], template: Scene,
                  pick: Sequence[int]) -> Scene | None:
    """Scalar counterpart of `realize_batch`; None if the sample cannot be built."""
    pos, size, color, valid = realize_batch(features, np.array([values], dtype=float), template,
                                            np.array([pick]))
    if not valid[0]:
        return None
    objs = []
    for a, k in enumerate(pick):
        src = template.objects[k]
        try:
            objs.append(ObjectState(f"o{a}", tuple(pos[0, a]), tuple(size[0, a]),
                                    tuple(np.clip(color[0, a], 0, 1)), src.yaw))
        except ValueError:
            return None
    if not all(in_workspace(o.position, template.workspace) for o in objs):
        return None
    return Scene(tuple(objs), template.workspace, template.table_height)


def sample_feasible_scalar(features: Sequence[FeatureDef], values, template: Scene, pick) -> bool:
    s = realize_scene(features, values, template, pick)
    return s is not None and check_feasible(s)


# -- configuration -------------------------------------------------------

@dataclass
class FamilyConfig:
    family: str
    arity: int
    quantities: list[str]
    mode: str = "value"
    u: float | str = "d_min"
    d_min_over: list[str] | None = None
    range: tuple[float, float] | None = None
    range_units: tuple[float, float] | None = None
    center: bool = False
    samples: int = DEFAULT_SAMPLES
    degenerate: str = "drop"  # or "error"

    @classmethod
    def from_json(cls, d: dict) -> "FamilyConfig":
        ru = d.get("range_units")
        if isinstance(ru, (int, float)):
            ru = (-ru, ru)
        return cls(d["family"], int(d["arity"]), list(d["quantities"]), d.get("mode", "value"),
                   d.get("u", "d_min"), d.get("d_min_over"), tuple(d["range"]) if "range" in d else None,
                   tuple(ru) if ru is not None else None, bool(d.get("center", False)),
                   int(d.get("samples", DEFAULT_SAMPLES)), d.get("degenerate", "drop"))

    def to_json(self) -> dict:
        out = {"family": self.family, "arity": self.arity, "quantities": self.quantities,
               "mode": self.mode, "u": self.u, "center": self.center, "samples": self.samples,
               "degenerate": self.degenerate}
        if self.d_min_over:
            out["d_min_over"] = self.d_min_over
        if self.range is not None:
            out["range"] = list(self.range)
        if self.range_units is not None:
            out["range_units"] = list(self.range_units)
        return out


@dataclass
class FeatureConfig:
    families: list[FamilyConfig]
    seed: int = 0
    u_scale: float = 1.0

    @classmethod
    def load(cls, src: str | Path | dict) -> "FeatureConfig":
        d = src if isinstance(src, dict) else json.loads(Path(src).read_text())
        return cls([FamilyConfig.from_json(f) for f in d["families"]], int(d.get("seed", 0)),
                   float(d.get("u_scale", 1.0)))

    def to_json(self) -> dict:
        return {"seed": self.seed, "u_scale": self.u_scale,
                "families": [f.to_json() for f in self.families]}

    @property
    def samples(self) -> dict[str, int]:
        return {f.family: f.samples for f in self.families}


def observed_values(scenes: Iterable[Scene], quantity: str) -> list[float]:
    out = []
    for s in scenes:
        out.extend(quantity_of(o, quantity, s.table_height) for o in s.objects)
    return out


def build_features(config: FeatureConfig, scenes: Sequence[Scene],
                   tol: float = EPS_SUP) -> tuple[list[FeatureDef], dict[str, str]]:
    """Resolve a feature config against demonstration scenes.

    Only settled scenes feed d_min (carried objects would create spurious gaps),
    and observations closer than `tol` count as the same value.
    Returns the features and a map family -> note for families that were dropped.
    """
    rest = settled(scenes) or list(scenes)
    feats: list[FeatureDef] = []
    dropped: dict[str, str] = {}
    for fam in config.families:
        if fam.u == "d_min":
            gaps = []
            for q in fam.d_min_over or fam.quantities:
                try:
                    gaps.append(compute_d_min(observed_values(rest, q), tol))
                except DegenerateFeatureError:
                    pass
            if not gaps:
                if fam.degenerate == "error":
                    raise DegenerateFeatureError(f"family {fam.family!r}: no non-zero difference observed")
                dropped[fam.family] = "degenerate"
                continue
            u = min(gaps) * config.u_scale
        else:
            u = float(fam.u) * config.u_scale
        if fam.range_units is not None:
            lo, hi = fam.range_units[0] * u, fam.range_units[1] * u
            if fam.center:
                lo, hi = lo - u / 2, hi + u / 2
        elif fam.range is not None:
            lo, hi = fam.range
        else:
            raise ValueError(f"family {fam.family!r} needs range or range_units")
        for q in fam.quantities:
            feats.append(FeatureDef(_name_for(q, fam.arity), fam.arity, lo, hi, min(u, hi - lo), q,
                                    fam.mode, fam.family))
    return feats, dropped


def representative_template(scenes: Sequence[Scene]) -> Scene:
    """First settled scene, used as the object pool for sampling."""
    rest = settled(scenes)
    return rest[0] if rest else scenes[0]

