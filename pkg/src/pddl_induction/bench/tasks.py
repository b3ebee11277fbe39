"""Seeded task generators and synthetic demonstrations for desk-scale block worlds.

Every generator knows the symbolic structure it builds (towers, pegs, rows), so
reference problems are written down directly instead of being read back from
geometry. That keeps them independent of any induced predicate library.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..pddl.ast import And, Atom, Domain, Problem
from ..pddl.parser import parse_domain
from ..pddl.solver import solve
from ..scene import ObjectState, Scene, Step, Trajectory

CATEGORIES = ("stacking", "unstacking", "rearrangement", "alignment", "color-classification",
              "tower-of-hanoi")
N_RANGE = (3, 20)
CUBE = 0.04
DISK_H = 0.02
PEG = (0.10, 0.10, 0.02)
PEG_X = (-0.15, 0.0, 0.15)
GRID = 0.14
SAFE_Z = 0.3

PALETTE = {
    "red": (1.0, 0.0, 0.0),
    "orange": (1.0, 0.5, 0.0),
    "blue": (0.0, 0.0, 1.0),
    "green": (0.0, 1.0, 0.0),
    "yellow": (1.0, 1.0, 0.0),
}

DOMAIN_DIR = Path(__file__).resolve().parent.parent / "data" / "domains"
REFERENCE_FOR = {
    "stacking": "stacking",
    "unstacking": "rearrangement",
    "rearrangement": "rearrangement",
    "color-classification": "rearrangement",
    "alignment": "alignment",
    "tower-of-hanoi": "hanoi",
}
CLEAR = "forall_0_not_above"


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class TaskSpec:
    category: str
    n_objects: int
    seed: int = 0
    time_limit: float = 50.0

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise SpecError(f"unknown category {self.category!r}")
        lo, hi = N_RANGE
        if not lo <= self.n_objects <= hi:
            raise SpecError(f"n_objects must lie in {lo}..{hi}, got {self.n_objects}")
        if self.time_limit <= 0:
            raise SpecError("time_limit must be positive")

    @property
    def name(self) -> str:
        return f"{self.category}-n{self.n_objects}-s{self.seed}"


@dataclass
class Task:
    spec: TaskSpec
    scene: Scene
    goal_scene: Scene
    problem: Problem
    reference: str
    description: str
    stats: dict = field(default_factory=dict)


def reference_domain(name: str) -> Domain:
    return parse_domain((DOMAIN_DIR / f"{name}.pddl").read_text())


# -- geometry helpers ----------------------------------------------------

def cube(oid: str, x: float, y: float, z: float, color=(0.5, 0.5, 0.5), size=CUBE) -> ObjectState:
    return ObjectState(oid, (x, y, z), (size, size, size), color)


def build_towers(towers: list[list[str]], cells: list[tuple[float, float]], proto: dict[str, ObjectState],
                 table_z: float = 0.0) -> list[ObjectState]:
    """Place each tower (bottom first) centred on its cell."""
    out = []
    for tower, (x, y) in zip(towers, cells):
        z = table_z
        for oid in tower:
            o = proto[oid]
            out.append(ObjectState(oid, (x, y, z + o.size[2] / 2), o.size, o.color))
            z += o.size[2]
    return out


def tower_atoms(towers: list[list[str]]) -> set[Atom]:
    atoms = set()
    for t in towers:
        if not t:
            continue
        atoms.add(Atom("on-table", (t[0],)))
        for lower, upper in zip(t, t[1:]):
            atoms.add(Atom("above", (upper, lower)))
        atoms.add(Atom(CLEAR, (t[-1],)))
    return atoms


def _cells(rng: random.Random, k: int) -> list[tuple[float, float]]:
    grid = [(i * GRID, j * GRID) for i in range(-2, 3) for j in range(-3, 4)]
    picks = rng.sample(grid, k)
    return [(round(x + rng.uniform(-0.01, 0.01), 4), round(y + rng.uniform(-0.01, 0.01), 4)) for x, y in picks]


def _partition(rng: random.Random, ids: list[str]) -> list[list[str]]:
    ids = ids[:]
    rng.shuffle(ids)
    towers: list[list[str]] = []
    for oid in ids:
        if towers and rng.random() < 0.5:
            rng.choice(towers).append(oid)
        else:
            towers.append([oid])
    return towers


def _cube_protos(n: int, rng: random.Random, colors=("red", "orange", "blue")) -> dict[str, ObjectState]:
    return {f"c{i}": cube(f"c{i}", 0, 0, CUBE / 2, PALETTE[colors[i % len(colors)]]) for i in range(n)}


# -- task generation -----------------------------------------------------

def generate_task(spec: TaskSpec, verify: bool = True) -> Task:
    """Seeded initial scene, goal scene and reference problem for a spec."""
    rng = random.Random(f"{spec.category}:{spec.n_objects}:{spec.seed}")
    n = spec.n_objects
    cat = spec.category
    if cat == "tower-of-hanoi":
        task = _hanoi_task(spec)
    elif cat == "alignment":
        task = _alignment_task(spec, rng)
    else:
        protos = _cube_protos(n, rng, ("red", "orange", "blue") if cat != "color-classification"
                              else ("red", "blue", "yellow"))
        ids = sorted(protos)
        if cat == "stacking":
            init = [[i] for i in ids]
            order = ids[:]
            rng.shuffle(order)
            goal = [order]
            desc = "stack all blocks into a single tower"
        elif cat == "unstacking":
            order = ids[:]
            rng.shuffle(order)
            init = [order]
            goal = [[i] for i in ids]
            desc = "unstack the tower so every block rests on the table"
        elif cat == "rearrangement":
            init = _partition(rng, ids)
            goal = _partition(rng, ids)
            while goal == init:
                goal = _partition(rng, ids)
            desc = "rearrange the blocks into the target towers"
        else:
            init = [[i] for i in ids]
            groups: dict[tuple, list[str]] = {}
            for i in ids:
                groups.setdefault(protos[i].color, []).append(i)
            goal = []
            for g in groups.values():
                rng.shuffle(g)
                goal.append(g)
            desc = "sort the blocks by color, stacking blocks of the same color together"
        cells = _cells(rng, n)
        scene = Scene(tuple(build_towers(init, cells[:len(init)], protos)))
        goal_scene = Scene(tuple(build_towers(goal, cells[:len(goal)], protos)))
        problem = Problem(spec.name, "blocks-" + REFERENCE_FOR[cat], tuple(ids),
                          frozenset(tower_atoms(init)), And(tuple(sorted(tower_atoms(goal)))))
        task = Task(spec, scene, goal_scene, problem, REFERENCE_FOR[cat], desc)
    if verify:
        dom = reference_domain(task.reference)
        task.problem = Problem(task.problem.name, dom.name, task.problem.objects, task.problem.init,
                               task.problem.goal)
        res = solve(task.problem, dom, budget=spec.time_limit)
        if not res.solved:
            raise SpecError(f"{spec.name}: reference domain cannot reach the goal ({res.status})")
        task.stats["reference_plan_length"] = len(res.plan)
    return task


def hanoi_objects(n: int) -> tuple[dict[str, ObjectState], list[str], list[str]]:
    disks = [f"d{i}" for i in range(1, n + 1)]
    pegs = ["p1", "p2", "p3"]
    protos = {p: ObjectState(p, (x, 0.0, PEG[2] / 2), PEG, (0.6, 0.4, 0.2)) for p, x in zip(pegs, PEG_X)}
    for i, d in enumerate(disks, 1):
        w = 0.03 + 0.01 * i
        protos[d] = ObjectState(d, (0, 0, 0), (w, w, DISK_H), (0.2, 0.2 + 0.6 * i / n, 0.8))
    return protos, disks, pegs


def _hanoi_scene(protos, disks, pegs, where: dict[str, list[str]]) -> Scene:
    objs = []
    for p, x in zip(pegs, PEG_X):
        peg = protos[p]
        objs.append(peg)
        z = peg.top
        for d in where.get(p, []):
            o = protos[d]
            objs.append(ObjectState(d, (x, 0.0, z + o.size[2] / 2), o.size, o.color))
            z += o.size[2]
    return Scene(tuple(objs))


def hanoi_atoms(protos, pegs, where: dict[str, list[str]]) -> set[Atom]:
    atoms = set()
    for p in pegs:
        atoms.add(Atom("on-table", (p,)))
        col = [p] + where.get(p, [])
        for lower, upper in zip(col, col[1:]):
            atoms.add(Atom("above", (upper, lower)))
        atoms.add(Atom(CLEAR, (col[-1],)))
    ids = sorted(protos)
    for a in ids:
        for b in ids:
            if a != b and protos[a].size[0] - protos[b].size[0] > 0.005:
                atoms.add(Atom("wider", (a, b)))
    return atoms


def _hanoi_task(spec: TaskSpec) -> Task:
    protos, disks, pegs = hanoi_objects(spec.n_objects)
    stack = list(reversed(disks))  # largest at the bottom
    init_where = {"p1": stack}
    goal_where = {"p3": stack}
    scene = _hanoi_scene(protos, disks, pegs, init_where)
    goal_scene = _hanoi_scene(protos, disks, pegs, goal_where)
    goal = {a for a in hanoi_atoms(protos, pegs, goal_where)}
    problem = Problem(spec.name, "hanoi", tuple(sorted(protos)), frozenset(hanoi_atoms(protos, pegs, init_where)),
                      And(tuple(sorted(goal))))
    return Task(spec, scene, goal_scene, problem, "hanoi",
                "tower of hanoi: move all disks from the first peg to the third without ever "
                "placing a larger disk on a smaller one")


def _alignment_task(spec: TaskSpec, rng: random.Random) -> Task:
    n = spec.n_objects
    protos = _cube_protos(n, rng)
    ids = sorted(protos)
    cells = _cells(rng, n)
    scene = Scene(tuple(build_towers([[i] for i in ids], cells, protos)))
    order = ids[:]
    rng.shuffle(order)
    x0 = -CUBE * (n - 1) / 2
    row = [ObjectState(o, (x0 + k * CUBE, -0.3, CUBE / 2), protos[o].size, protos[o].color)
           for k, o in enumerate(order)]
    goal_scene = Scene(tuple(row))
    init = {Atom("on-table", (i,)) for i in ids} | {Atom("free-right", (i,)) for i in ids} | \
        {Atom("free-left", (i,)) for i in ids}
    goal = {Atom("adjacent-right", (b, a)) for a, b in zip(order, order[1:])}
    problem = Problem(spec.name, "alignment", tuple(ids), frozenset(init), And(tuple(sorted(goal))))
    return Task(spec, scene, goal_scene, problem, "alignment", "align all blocks in a single row")


# -- demonstrations ------------------------------------------------------

def record(scene: Scene, moves: list[tuple[str, tuple[float, float, float]]], task: str,
           frames_per_move: int = 90, idle: int = 5, dt: float = 0.05) -> Trajectory:
    """Kinematic pick-lift-carry-lower recording of a move sequence."""
    steps: list[Step] = []
    t = 0.0
    cur = scene

    def emit(s: Scene, ee):
        nonlocal t
        steps.append(Step(round(t, 6), s, ee))
        t += dt

    home = (0.0, 0.0, 0.45, 0.0)
    for _ in range(idle):
        emit(cur, home)
    for oid, (x, y, z) in moves:
        o = cur[oid]
        x0, y0, z0 = o.position
        lift = max(1, frames_per_move // 3)
        carry = max(1, frames_per_move // 3)
        lower = max(1, frames_per_move - lift - carry)
        path = []
        for k in range(1, lift + 1):
            path.append((x0, y0, z0 + (SAFE_Z - z0) * k / lift))
        for k in range(1, carry + 1):
            path.append((x0 + (x - x0) * k / carry, y0 + (y - y0) * k / carry, SAFE_Z))
        for k in range(1, lower + 1):
            path.append((x, y, SAFE_Z + (z - SAFE_Z) * k / lower))
        for p in path:
            cur = cur.with_object(o.moved(*p))
            emit(cur, (p[0], p[1], p[2] + o.size[2] / 2, 0.0))
        for _ in range(idle):
            emit(cur, (x, y, z + o.size[2] / 2 + 0.05, 0.0))
    return Trajectory(tuple(steps), task)


def demo_cubes(ids=("red", "orange", "blue")) -> dict[str, ObjectState]:
    return {i: cube(i, 0, 0, CUBE / 2, PALETTE[i]) for i in ids}


def stack_demo(frames_per_move: int = 90) -> Trajectory:
    protos = demo_cubes()
    scene = Scene(tuple(build_towers([["red"], ["orange"], ["blue"]], [(-0.12, 0.0), (0.0, 0.0), (0.12, 0.0)], protos)))
    moves = [("orange", (-0.12, 0.0, CUBE * 1.5)), ("blue", (-0.12, 0.0, CUBE * 2.5))]
    return record(scene, moves, "stack the blocks into a tower", frames_per_move)


def unstack_demo(frames_per_move: int = 90) -> Trajectory:
    protos = demo_cubes()
    scene = Scene(tuple(build_towers([["red", "orange", "blue"]], [(0.0, 0.0)], protos)))
    moves = [("blue", (0.12, 0.0, CUBE / 2)), ("orange", (-0.12, 0.0, CUBE / 2))]
    return record(scene, moves, "unstack the tower so all blocks rest on the table", frames_per_move)


def align_demo(frames_per_move: int = 90) -> Trajectory:
    protos = demo_cubes()
    scene = Scene(tuple(build_towers([["red"], ["orange"], ["blue"]], [(-0.2, 0.15), (0.1, 0.2), (0.2, -0.1)], protos)))
    moves = [("orange", (-0.2 + CUBE, 0.15, CUBE / 2)), ("blue", (-0.2 + 2 * CUBE, 0.15, CUBE / 2))]
    return record(scene, moves, "align the blocks in a row", frames_per_move)


def pick_place_demo(frames: int = 1001) -> Trajectory:
    """One cube lifted onto another, recorded at `frames` steps."""
    protos = demo_cubes()
    scene = Scene(tuple(build_towers([["red"], ["orange"], ["blue"]], [(-0.12, 0.0), (0.0, 0.0), (0.12, 0.0)], protos)))
    traj = record(scene, [("orange", (-0.12, 0.0, CUBE * 1.5))], "stack the orange block on the red block",
                  frames_per_move=frames - 2, idle=1)
    assert len(traj) == frames
    return traj


def hanoi_moves(n: int, src: str = "p1", dst: str = "p3", via: str = "p2") -> list[tuple[str, str, str]]:
    """(disk, from, to) for the optimal recursive solution."""
    if n == 0:
        return []
    return hanoi_moves(n - 1, src, via, dst) + [(f"d{n}", src, dst)] + hanoi_moves(n - 1, via, dst, src)


def hanoi_demo(n: int = 3, frames_per_move: int = 45) -> Trajectory:
    protos, disks, pegs = hanoi_objects(n)
    where = {"p1": list(reversed(disks)), "p2": [], "p3": []}
    scene = _hanoi_scene(protos, disks, pegs, where)
    moves = []
    for d, src, dst in hanoi_moves(n):
        where[src].remove(d)
        peg = protos[dst]
        z = peg.top + sum(protos[o].size[2] for o in where[dst]) + protos[d].size[2] / 2
        where[dst].append(d)
        moves.append((d, (PEG_X[pegs.index(dst)], 0.0, z)))
    return record(scene, moves, "tower of hanoi: move every disk from the first peg to the third, "
                  "never placing a larger disk on a smaller one", frames_per_move)


BUILTIN_DEMOS = {"stack": stack_demo, "unstack": unstack_demo, "hanoi": hanoi_demo, "align": align_demo,
                 "pick-place": pick_place_demo}


def jitter(traj: Trajectory, sigma: float, seed: int = 0) -> Trajectory:
    """Gaussian position noise on every object at every step (perception noise)."""
    rng = np.random.default_rng(seed)
    steps = []
    for st in traj.steps:
        objs = []
        for o in st.scene.objects:
            d = rng.normal(0, sigma, 3)
            objs.append(o.moved(*(np.array(o.position) + d)))
        steps.append(Step(st.t, Scene(tuple(objs), st.scene.workspace, st.scene.table_height), st.ee))
    return Trajectory(tuple(steps), traj.task, traj.source)
