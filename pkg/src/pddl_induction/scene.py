"""Desk-scale rigid-body scene model.

Objects are axis-aligned boxes resting on a table. Feasibility is a static
check: no interpenetration and every object supported by the table or by
another object's top face. Yaw is carried as a feature value only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

EPS_PEN = 1e-4
EPS_SUP = 1e-3
SUPPORT_FRACTION = 0.5

DEFAULT_WORKSPACE = ((-0.5, -0.5, 0.0), (0.5, 0.5, 0.6))
DEFAULT_TABLE_Z = 0.0

Vec3 = tuple[float, float, float]


class SceneError(ValueError):
    pass


class UnknownObjectError(KeyError):
    pass


class DemoFormatError(ValueError):
    """Malformed trajectory file. `step` is the offending step index, if any."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)


def _vec3(values, what: str) -> Vec3:
    vals = tuple(float(v) for v in values)
    if len(vals) != 3:
        raise SceneError(f"{what} must have 3 components, got {len(vals)}")
    return vals  # type: ignore[return-value]


@dataclass(frozen=True)
class ObjectState:
    id: str
    position: Vec3
    size: Vec3
    color: Vec3 = (0.5, 0.5, 0.5)
    yaw: float = 0.0
    mass: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        object.__setattr__(self, "size", _vec3(self.size, "size"))
        object.__setattr__(self, "color", _vec3(self.color, "color"))
        object.__setattr__(self, "yaw", float(self.yaw))
        if any(s <= 0 for s in self.size):
            raise SceneError(f"{self.id}: size components must be positive: {self.size}")
        if any(not 0.0 <= c <= 1.0 for c in self.color):
            raise SceneError(f"{self.id}: color components must lie in [0, 1]: {self.color}")

    @property
    def bottom(self) -> float:
        return self.position[2] - self.size[2] / 2

    @property
    def top(self) -> float:
        return self.position[2] + self.size[2] / 2

    def bounds(self) -> tuple[Vec3, Vec3]:
        lo = tuple(p - s / 2 for p, s in zip(self.position, self.size))
        hi = tuple(p + s / 2 for p, s in zip(self.position, self.size))
        return lo, hi  # type: ignore[return-value]

    def moved(self, x: float, y: float, z: float, yaw: float | None = None) -> "ObjectState":
        return replace(self, position=(x, y, z), yaw=self.yaw if yaw is None else yaw)

    def to_json(self) -> dict:
        out = {"pos": list(self.position), "size": list(self.size),
               "color": list(self.color), "yaw": self.yaw}
        if self.mass is not None:
            out["mass"] = self.mass
        return out

    @classmethod
    def from_json(cls, oid: str, d: dict) -> "ObjectState":
        return cls(oid, d["pos"], d["size"], d.get("color", (0.5, 0.5, 0.5)),
                   d.get("yaw", 0.0), d.get("mass"))


@dataclass(frozen=True)
class Scene:
    objects: tuple[ObjectState, ...]
    workspace: tuple[Vec3, Vec3] = DEFAULT_WORKSPACE
    table_height: float = DEFAULT_TABLE_Z
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        objs = tuple(sorted(self.objects, key=lambda o: o.id))
        ids = [o.id for o in objs]
        if len(set(ids)) != len(ids):
            raise SceneError(f"duplicate object ids: {ids}")
        ws = (_vec3(self.workspace[0], "workspace"), _vec3(self.workspace[1], "workspace"))
        object.__setattr__(self, "objects", objs)
        object.__setattr__(self, "workspace", ws)
        object.__setattr__(self, "table_height", float(self.table_height))
        object.__setattr__(self, "_index", {o.id: o for o in objs})
        for o in objs:
            if not in_workspace(o.position, ws):
                raise SceneError(f"{o.id} at {o.position} lies outside the workspace")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self._index)

    def __getitem__(self, oid: str) -> ObjectState:
        try:
            return self._index[oid]
        except KeyError:
            raise UnknownObjectError(oid) from None

    def __contains__(self, oid: str) -> bool:
        return oid in self._index

    def __len__(self) -> int:
        return len(self.objects)

    def with_object(self, obj: ObjectState) -> "Scene":
        others = [o for o in self.objects if o.id != obj.id]
        return Scene(tuple(others) + (obj,), self.workspace, self.table_height)

    def to_json(self) -> dict:
        return {"workspace": [list(self.workspace[0]), list(self.workspace[1])],
                "table_z": self.table_height,
                "objects": {o.id: o.to_json() for o in self.objects}}

    @classmethod
    def from_json(cls, d: dict) -> "Scene":
        ws = d.get("workspace", DEFAULT_WORKSPACE)
        objs = tuple(ObjectState.from_json(k, v) for k, v in d["objects"].items())
        return cls(objs, (tuple(ws[0]), tuple(ws[1])), d.get("table_z", DEFAULT_TABLE_Z))


def in_workspace(p: Sequence[float], ws: tuple[Vec3, Vec3]) -> bool:
    return all(lo <= v <= hi for v, lo, hi in zip(p, ws[0], ws[1]))


def load_scene(path: str | Path) -> Scene:
    return Scene.from_json(json.loads(Path(path).read_text()))


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scene.to_json(), indent=2))


# -- feasibility ---------------------------------------------------------

def _xy_overlap(a: ObjectState, b: ObjectState) -> float:
    (alo, ahi), (blo, bhi) = a.bounds(), b.bounds()
    dx = min(ahi[0], bhi[0]) - max(alo[0], blo[0])
    dy = min(ahi[1], bhi[1]) - max(alo[1], blo[1])
    return max(dx, 0.0) * max(dy, 0.0)


def interpenetrate(a: ObjectState, b: ObjectState, eps: float = EPS_PEN) -> bool:
    (alo, ahi), (blo, bhi) = a.bounds(), b.bounds()
    return all(min(ahi[i], bhi[i]) - max(alo[i], blo[i]) > eps for i in range(3))


def supported(obj: ObjectState, scene: Scene, eps: float = EPS_SUP) -> bool:
    if abs(obj.bottom - scene.table_height) <= eps:
        return True
    need = SUPPORT_FRACTION * obj.size[0] * obj.size[1]
    for other in scene.objects:
        if other.id == obj.id:
            continue
        if abs(obj.bottom - other.top) <= eps and _xy_overlap(obj, other) >= need - 1e-12:
            return True
    return False


def violations(scene: Scene) -> list[str]:
    """Violated feasibility conditions, sorted; empty when feasible."""
    found = set()
    objs = scene.objects
    for o in objs:
        if not in_workspace(o.position, scene.workspace):
            found.add("out-of-workspace")
        if o.bottom < scene.table_height - EPS_PEN:
            found.add("overlap")
    for i, a in enumerate(objs):
        for b in objs[i + 1:]:
            if interpenetrate(a, b):
                found.add("overlap")
    for o in objs:
        if not supported(o, scene):
            found.add("unsupported")
    return sorted(found)


def check_feasible(scene: Scene) -> bool:
    return not violations(scene)


@dataclass(frozen=True)
class Infeasible:
    """Why a placement was refused."""
    object_id: str
    reasons: tuple[str, ...]

    def __bool__(self) -> bool:
        return False


def apply_placement(scene: Scene, oid: str, target: Sequence[float]) -> Scene | Infeasible:
    """Move `oid` to `target` = (x, y, z[, yaw]) if the result is feasible."""
    obj = scene[oid]
    x, y, z = (float(v) for v in target[:3])
    yaw = float(target[3]) if len(target) > 3 else None
    if not in_workspace((x, y, z), scene.workspace):
        return Infeasible(oid, ("out-of-workspace",))
    new = scene.with_object(obj.moved(x, y, z, yaw))
    bad = violations(new)
    if bad:
        return Infeasible(oid, tuple(bad))
    return new


def feasible_batch(pos: np.ndarray, size: np.ndarray, table_z: float,
                   workspace: tuple[Vec3, Vec3] = DEFAULT_WORKSPACE) -> np.ndarray:
    """Vectorised `check_feasible` for N scenes of M boxes each.

    pos, size: arrays of shape (N, M, 3). Returns a bool array of shape (N,).
    """
    pos = np.asarray(pos, dtype=float)
    size = np.broadcast_to(np.asarray(size, dtype=float), pos.shape)
    n, m, _ = pos.shape
    lo, hi = pos - size / 2, pos + size / 2
    ws_lo, ws_hi = np.asarray(workspace[0]), np.asarray(workspace[1])
    ok = np.all((pos >= ws_lo) & (pos <= ws_hi), axis=(1, 2))
    ok &= np.all(lo[..., 2] >= table_z - EPS_PEN, axis=1)
    bottom, top = lo[..., 2], hi[..., 2]
    area = size[..., 0] * size[..., 1]
    sup = np.abs(bottom - table_z) <= EPS_SUP
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            depth = np.minimum(hi[:, i], hi[:, j]) - np.maximum(lo[:, i], lo[:, j])
            if i < j:
                ok &= ~np.all(depth > EPS_PEN, axis=1)
            ov = np.clip(depth[:, 0], 0, None) * np.clip(depth[:, 1], 0, None)
            on_j = (np.abs(bottom[:, i] - top[:, j]) <= EPS_SUP) & \
                (ov >= SUPPORT_FRACTION * area[:, i] - 1e-12)
            sup[:, i] |= on_j
    ok &= np.all(sup, axis=1)
    return ok


# -- trajectories --------------------------------------------------------

@dataclass(frozen=True)
class Step:
    t: float
    scene: Scene
    ee: tuple[float, float, float, float] = (0.0, 0.0, 0.5, 0.0)


@dataclass(frozen=True)
class Trajectory:
    steps: tuple[Step, ...]
    task: str = ""
    source: str = ""

    def __post_init__(self):
        if not self.steps:
            raise DemoFormatError("trajectory has no steps")
        ids = set(self.steps[0].scene.ids)
        for i, st in enumerate(self.steps):
            if set(st.scene.ids) != ids:
                raise DemoFormatError("object set differs from step 0", i)
            if i and st.t <= self.steps[i - 1].t:
                raise DemoFormatError("timestamps must be strictly increasing", i)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def scenes(self) -> list[Scene]:
        return [s.scene for s in self.steps]

    def to_json(self) -> dict:
        first = self.steps[0].scene
        return {"task": self.task,
                "workspace": [list(first.workspace[0]), list(first.workspace[1])],
                "table_z": first.table_height,
                "steps": [{"t": s.t, "ee": list(s.ee),
                           "objects": {o.id: o.to_json() for o in s.scene.objects}}
                          for s in self.steps]}


def ingest_demonstration(path: str | Path) -> Trajectory:
    """Load a trajectory file, reporting the first bad step."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise DemoFormatError(f"{path.name}: not valid JSON ({e})") from None
    return trajectory_from_json(raw, source=path.stem)


def trajectory_from_json(raw: dict, source: str = "") -> Trajectory:
    if not isinstance(raw, dict) or not isinstance(raw.get("steps"), list):
        raise DemoFormatError("expected an object with a 'steps' list")
    ws = raw.get("workspace", DEFAULT_WORKSPACE)
    ws = (tuple(ws[0]), tuple(ws[1]))
    table_z = float(raw.get("table_z", DEFAULT_TABLE_Z))
    steps = []
    ids = None
    prev_t = -math.inf
    for i, st in enumerate(raw["steps"]):
        try:
            t = float(st["t"])
            ee = tuple(float(v) for v in st.get("ee", (0.0, 0.0, 0.5, 0.0)))
            objs = st["objects"]
        except (KeyError, TypeError, ValueError) as e:
            raise DemoFormatError(f"missing or malformed field ({e})", i) from None
        if len(ee) != 4:
            raise DemoFormatError("ee must be [x, y, z, yaw]", i)
        if ids is None:
            ids = set(objs)
        elif set(objs) != ids:
            missing = sorted(ids - set(objs))
            extra = sorted(set(objs) - ids)
            raise DemoFormatError(f"object set changed (missing {missing}, extra {extra})", i)
        if t <= prev_t:
            raise DemoFormatError(f"non-monotone timestamp {t} after {prev_t}", i)
        prev_t = t
        try:
            scene = Scene(tuple(ObjectState.from_json(k, v) for k, v in objs.items()), ws, table_z)
        except (SceneError, KeyError, TypeError) as e:
            raise DemoFormatError(f"bad object state ({e})", i) from None
        steps.append(Step(t, scene, ee))  # type: ignore[arg-type]
    if not steps:
        raise DemoFormatError("trajectory has no steps")
    return Trajectory(tuple(steps), str(raw.get("task", "")), source)


def save_trajectory(traj: Trajectory, path: str | Path) -> None:
    Path(path).write_text(json.dumps(traj.to_json()))


def settled(scenes: Iterable[Scene]) -> list[Scene]:
    """Scenes in which every object rests on a support (nothing held in the gripper)."""
    return [s for s in scenes if check_feasible(s)]
