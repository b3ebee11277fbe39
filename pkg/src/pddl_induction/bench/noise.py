"""Predicate accuracy under injected position noise."""

from __future__ import annotations

import csv
import io
import itertools
import random
from dataclasses import dataclass, field
from typing import Sequence

from ..predicates import Library, eval_predicate
from ..scene import Scene
from .pipeline import stderr

DEFAULT_LEVELS = (5, 10, 15, 20, 25, 30)
DEFAULT_PREDICATES = ("above", "adjacent-right")


def perturb(scene: Scene, level: float, rng: random.Random) -> Scene:
    """Shift each coordinate by uniform noise of `level`% of the object's largest dimension."""
    objs = []
    for o in scene.objects:
        amp = level / 100.0 * max(o.size)
        objs.append(o.moved(*(c + rng.uniform(-amp, amp) for c in o.position)))
    return Scene(tuple(objs), scene.workspace, scene.table_height)


def labeled_examples(library: Library, scenes: Sequence[Scene], pred: str, n_true: int, n_false: int,
                     rng: random.Random) -> list[tuple[int, tuple[str, ...], bool]]:
    """Balanced (scene index, args, label) triples drawn from unperturbed scenes."""
    p = library[pred]
    pos, neg = [], []
    for i, s in enumerate(scenes):
        for args in itertools.permutations(s.ids, p.arity):
            (pos if eval_predicate(p, args, s, library) else neg).append((i, args, True))
    if not pos or not neg:
        raise ValueError(f"{pred}: the scenes need both true and false instances")
    neg = [(i, a, False) for i, a, _ in neg]
    pick = lambda pool, k: [pool[rng.randrange(len(pool))] for _ in range(k)] if len(pool) < k else rng.sample(pool, k)  # noqa: E731
    return pick(pos, n_true) + pick(neg, n_false)


@dataclass
class NoiseTable:
    levels: list[float]
    predicates: list[str]
    accuracy: dict = field(default_factory=dict)   # pred -> level -> [per repeat]
    overall: dict = field(default_factory=dict)    # level -> [per repeat]

    def mean(self, values) -> float:
        return sum(values) / len(values)

    def rows(self) -> list[dict]:
        out = []
        for lv in self.levels:
            row = {"level": lv}
            for p in self.predicates:
                v = self.accuracy[p][lv]
                row[p] = round(self.mean(v), 4)
                row[f"{p}_stderr"] = round(stderr(v), 4)
            row["overall"] = round(self.mean(self.overall[lv]), 4)
            row["overall_stderr"] = round(stderr(self.overall[lv]), 4)
            out.append(row)
        return out

    def non_increasing(self, slack: float = 1.0) -> bool:
        """Overall accuracy never rises by more than `slack` combined stderrs between levels."""
        rows = self.rows()
        for a, b in zip(rows, rows[1:]):
            if b["overall"] > a["overall"] + slack * (a["overall_stderr"] + b["overall_stderr"]) + 1e-9:
                return False
        return True

    def to_csv(self) -> str:
        rows = self.rows()
        buf = io.StringIO()
        w = csv.DictWriter(buf, list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"levels": self.levels, "predicates": self.predicates, "rows": self.rows()}


def noise_study(library: Library, scenes: Sequence[Scene], noise_levels: Sequence[float] = DEFAULT_LEVELS,
                seed: int = 0, predicates: Sequence[str] = DEFAULT_PREDICATES, n_true: int = 25,
                n_false: int = 25, repeats: int = 3) -> NoiseTable:
    """Accuracy (%) of each predicate on balanced labelled tuples, per noise level and repeat."""
    table = NoiseTable(list(noise_levels), list(predicates))
    for p in predicates:
        table.accuracy[p] = {lv: [] for lv in noise_levels}
    for lv in noise_levels:
        table.overall[lv] = []
    for rep in range(repeats):
        rng = random.Random(f"noise:{seed}:{rep}")
        examples = {p: labeled_examples(library, scenes, p, n_true, n_false, rng) for p in predicates}
        for lv in noise_levels:
            hits_all, total = 0, 0
            for p in predicates:
                hits = 0
                for i, args, label in examples[p]:
                    noisy = perturb(scenes[i], lv, rng)
                    hits += eval_predicate(p, args, noisy, library) == label
                table.accuracy[p][lv].append(100.0 * hits / len(examples[p]))
                hits_all += hits
                total += len(examples[p])
            table.overall[lv].append(100.0 * hits_all / total)
    return table
