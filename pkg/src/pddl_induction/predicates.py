"""Interval-constrained predicates, their evaluation on scenes, and higher-order forms."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .features import FeatureDef, Interval, in_union
from .pddl.ast import Atom
from .scene import Scene

FIRST, HIGHER = "first", "higher"
RELEVANT, IRRELEVANT = "relevant", "irrelevant"
ORIGINS = ("summarized", "derived", "refined", "given")
OPERATORS = ("not", "forall", "forall-not", "exists")

LogicalState = frozenset  # of Atom


class LibraryError(ValueError):
    pass


@dataclass(frozen=True)
class HigherOrderForm:
    base: str
    operator: str
    position: int | None = None

    def __post_init__(self):
        if self.operator not in OPERATORS:
            raise ValueError(f"unknown operator {self.operator!r}")
        if self.operator != "not" and self.position is None:
            raise ValueError(f"{self.operator} needs a quantified position")

    def to_json(self) -> dict:
        return {"base": self.base, "operator": self.operator, "position": self.position}


@dataclass(frozen=True)
class PredicateDef:
    name: str
    arity: int
    constraint: tuple[tuple[str, tuple[Interval, ...]], ...] = ()
    order: str = FIRST
    relevance: str = RELEVANT
    origin: str = "summarized"
    form: HigherOrderForm | None = None
    param_roles: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0 <= self.arity <= 2:
            raise ValueError(f"{self.name}: arity must be 0..2")
        if self.order == FIRST and not self.constraint:
            raise ValueError(f"{self.name}: first-order predicates need a constraint")
        if self.order == HIGHER and self.form is None:
            raise ValueError(f"{self.name}: higher-order predicates need a form")
        cons = tuple((f, tuple(sorted(ivs))) for f, ivs in self.constraint)
        object.__setattr__(self, "constraint", cons)
        if not self.param_roles:
            object.__setattr__(self, "param_roles", tuple("ab"[:self.arity]) if self.arity <= 2 else ())

    @property
    def relevant(self) -> bool:
        return self.relevance == RELEVANT

    def intervals(self, feature: str) -> tuple[Interval, ...]:
        for f, ivs in self.constraint:
            if f == feature:
                return ivs
        raise KeyError(feature)

    def with_relevance(self, rel: str) -> "PredicateDef":
        return replace(self, relevance=rel)

    def to_json(self) -> dict:
        return {"name": self.name, "arity": self.arity, "param_roles": list(self.param_roles),
                "constraint": [{"feature": f, "intervals": [iv.to_json() for iv in ivs]}
                               for f, ivs in self.constraint],
                "order": self.order, "relevance": self.relevance, "origin": self.origin,
                "form": self.form.to_json() if self.form else None}

    @classmethod
    def from_json(cls, d: dict) -> "PredicateDef":
        form = d.get("form")
        return cls(d["name"], d["arity"],
                   tuple((c["feature"], tuple(Interval.from_json(i) for i in c["intervals"]))
                         for c in d.get("constraint", ())),
                   d.get("order", FIRST), d.get("relevance", RELEVANT), d.get("origin", "summarized"),
                   HigherOrderForm(form["base"], form["operator"], form.get("position")) if form else None,
                   tuple(d.get("param_roles", ())))


def quantified_arity(base_arity: int, operator: str) -> int:
    return base_arity if operator == "not" else base_arity - 1


@dataclass(frozen=True)
class Library:
    features: tuple[FeatureDef, ...] = ()
    predicates: tuple[PredicateDef, ...] = ()
    _by_name: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        preds = tuple(self.predicates)
        names = [p.name for p in preds]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise LibraryError(f"duplicate predicate names: {sorted(dup)}")
        feats = {f.name: f for f in self.features}
        for p in preds:
            for fname, ivs in p.constraint:
                if fname not in feats:
                    raise LibraryError(f"{p.name} constrains unknown feature {fname}")
                f = feats[fname]
                if f.arity != p.arity:
                    raise LibraryError(f"{p.name}: feature {fname} has arity {f.arity}, predicate {p.arity}")
                for iv in ivs:
                    if iv.lo < f.lo - 1e-9 or iv.hi > f.hi + 1e-9:
                        raise LibraryError(f"{p.name}: interval {iv} leaves the range of {fname}")
        object.__setattr__(self, "predicates", preds)
        object.__setattr__(self, "_by_name", {p.name: p for p in preds})
        object.__setattr__(self, "features", tuple(self.features))

    def __getitem__(self, name: str) -> PredicateDef:
        try:
            return self._by_name[name]
        except KeyError:
            raise LibraryError(f"unknown predicate {name}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self.predicates)

    def feature(self, name: str) -> FeatureDef:
        for f in self.features:
            if f.name == name:
                return f
        raise LibraryError(f"unknown feature {name}")

    @property
    def relevant(self) -> tuple[PredicateDef, ...]:
        return tuple(p for p in self.predicates if p.relevant)

    def with_predicates(self, preds: Iterable[PredicateDef]) -> "Library":
        return Library(self.features, tuple(preds))

    def replace_predicate(self, p: PredicateDef) -> "Library":
        return self.with_predicates(p if q.name == p.name else q for q in self.predicates)

    def union(self, other: "Library") -> "Library":
        feats = {f.name: f for f in self.features}
        for f in other.features:
            if f.name in feats and feats[f.name] != f:
                raise LibraryError(f"feature {f.name} defined differently in the two libraries")
            feats[f.name] = f
        preds = {p.name: p for p in self.predicates}
        for p in other.predicates:
            if p.name in preds and preds[p.name] != p:
                raise LibraryError(f"predicate {p.name} defined differently in the two libraries")
            preds[p.name] = p
        return Library(tuple(feats.values()), tuple(preds.values()))

    def to_json(self) -> dict:
        return {"features": [f.to_json() for f in self.features],
                "predicates": [p.to_json() for p in self.predicates]}

    @classmethod
    def from_json(cls, d: dict) -> "Library":
        return cls(tuple(FeatureDef.from_json(f) for f in d.get("features", ())),
                   tuple(PredicateDef.from_json(p) for p in d.get("predicates", ())))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "Library":
        return cls.from_json(json.loads(Path(path).read_text()))


# -- evaluation ----------------------------------------------------------

def eval_predicate(p: PredicateDef | str, args: Sequence[str], scene: Scene, library: Library) -> bool:
    if isinstance(p, str):
        p = library[p]
    args = tuple(args)
    if len(args) != p.arity:
        raise ValueError(f"{p.name} takes {p.arity} arguments, got {len(args)}")
    for a in args:
        scene[a]  # raises UnknownObjectError
    if p.order == FIRST:
        for fname, ivs in p.constraint:
            if not in_union(library.feature(fname).value(scene, args), ivs):
                return False
        return True
    form = p.form
    base = library[form.base]
    if form.operator == "not":
        return not eval_predicate(base, args, scene, library)
    if not 0 <= form.position < base.arity:
        raise LibraryError(f"{p.name}: position {form.position} outside base arity {base.arity}")
    others = [o for o in scene.ids if o not in args]
    results = (eval_predicate(base, args[:form.position] + (o,) + args[form.position:], scene, library)
               for o in others)
    if form.operator == "forall":
        return all(results)
    if form.operator == "forall-not":
        return not any(results)
    return any(results)


def _first_order_table(p: PredicateDef, scene: Scene, library: Library) -> frozenset[tuple[str, ...]]:
    ids = scene.ids
    tuples = itertools.permutations(ids, p.arity)
    return frozenset(t for t in tuples if eval_predicate(p, t, scene, library))


def ground_state(scene: Scene, library: Library, include_irrelevant: bool = False) -> frozenset[Atom]:
    """All true atoms of the (relevant) predicates, distinct objects per tuple."""
    tables: dict[str, frozenset] = {}

    def table(p: PredicateDef) -> frozenset:
        if p.name not in tables:
            if p.order == FIRST:
                tables[p.name] = _first_order_table(p, scene, library)
            else:
                tables[p.name] = _derived_table(p, scene, library, table)
        return tables[p.name]

    out = set()
    for p in library.predicates:
        if not (p.relevant or include_irrelevant):
            continue
        out.update(Atom(p.name, t) for t in table(p))
    return frozenset(out)


def _derived_table(p: PredicateDef, scene: Scene, library: Library, table) -> frozenset:
    form = p.form
    base = library[form.base]
    bt = table(base)
    ids = scene.ids
    out = set()
    for t in itertools.permutations(ids, p.arity):
        if form.operator == "not":
            ok = t not in bt
        else:
            others = [o for o in ids if o not in t]
            hits = [t[:form.position] + (o,) + t[form.position:] in bt for o in others]
            ok = {"forall": all, "forall-not": lambda h: not any(h), "exists": any}[form.operator](hits)
        if ok:
            out.add(t)
    return frozenset(out)


# -- higher-order derivation ---------------------------------------------

def derived_name(base: str, operator: str, position: int | None) -> str:
    if operator == "not":
        return f"not_{base}"
    if operator == "forall":
        return f"forall_{position}_{base}"
    if operator == "forall-not":
        return f"forall_{position}_not_{base}"
    return f"exists_{position}_{base}"


def derive_higher_order(library: Library, positions: Sequence[int] = (0,),
                        include_exists: bool = False) -> Library:
    """Add not / forall / forall-not (and optionally exists) forms of binary first-order predicates."""
    new: list[PredicateDef] = []
    ops = ["not", "forall", "forall-not"] + (["exists"] if include_exists else [])
    for p in library.predicates:
        if p.order != FIRST or p.arity != 2:
            continue
        for op in ops:
            for pos in ([None] if op == "not" else positions):
                if pos is not None and not 0 <= pos < p.arity:
                    raise LibraryError(f"position {pos} outside arity of {p.name}")
                name = derived_name(p.name, op, pos)
                if name in library or any(q.name == name for q in new):
                    raise LibraryError(f"derived name {name} collides with an existing predicate")
                roles = tuple(r for i, r in enumerate(p.param_roles) if i != pos) if pos is not None else p.param_roles
                new.append(PredicateDef(name, quantified_arity(p.arity, op), (), HIGHER, p.relevance,
                                        "derived", HigherOrderForm(p.name, op, pos), roles))
    return library.with_predicates(library.predicates + tuple(new))


# -- refinement ----------------------------------------------------------

@dataclass(frozen=True)
class Merge:
    feature: str
    indices: tuple[int, ...]


@dataclass(frozen=True)
class Subdivide:
    feature: str
    index: int
    factor: int


def refine_intervals(p: PredicateDef, directive: Merge | Subdivide) -> PredicateDef:
    """Merge contiguous constraint intervals or split one evenly; coverage is unchanged."""
    ivs = list(p.intervals(directive.feature))
    if isinstance(directive, Merge):
        idx = sorted(directive.indices)
        if len(idx) < 2:
            raise ValueError("merge needs at least two intervals")
        if any(i < 0 or i >= len(ivs) for i in idx):
            raise IndexError(f"merge indices {idx} outside 0..{len(ivs) - 1}")
        if idx != list(range(idx[0], idx[-1] + 1)):
            raise ValueError(f"merge indices {idx} are not contiguous")
        for a, b in zip(idx, idx[1:]):
            if abs(ivs[a].hi - ivs[b].lo) > 1e-12:
                raise ValueError(f"intervals {ivs[a]} and {ivs[b]} do not touch")
        merged = Interval(ivs[idx[0]].lo, ivs[idx[-1]].hi, ivs[idx[-1]].closed_hi)
        ivs = ivs[:idx[0]] + [merged] + ivs[idx[-1] + 1:]
    else:
        k, n = directive.index, directive.factor
        if n < 2:
            raise ValueError("subdivide factor must be >= 2")
        if not 0 <= k < len(ivs):
            raise IndexError(f"interval index {k} outside 0..{len(ivs) - 1}")
        iv = ivs[k]
        step = iv.width / n
        cuts = [iv.lo + i * step for i in range(n)] + [iv.hi]
        parts = [Interval(cuts[i], cuts[i + 1], iv.closed_hi and i == n - 1) for i in range(n)]
        ivs = ivs[:k] + parts + ivs[k + 1:]
    cons = tuple((f, tuple(ivs) if f == directive.feature else v) for f, v in p.constraint)
    return replace(p, constraint=cons, origin="refined")


def rename_library(library: Library, mapping: dict[str, str]) -> Library:
    """Rename predicates; derived names follow their renamed base unless mapped explicitly."""
    out = []
    for p in library.predicates:
        if p.form is None:
            out.append(replace(p, name=mapping.get(p.name, p.name)))
            continue
        base = mapping.get(p.form.base, p.form.base)
        name = mapping.get(p.name)
        if name is None:
            name = derived_name(base, p.form.operator, p.form.position) if base != p.form.base else p.name
        out.append(replace(p, name=name, form=HigherOrderForm(base, p.form.operator, p.form.position)))
    return library.with_predicates(out)


def semantic_signature(p: PredicateDef, library: Library) -> tuple:
    """Name-free description of what a predicate means."""
    if p.form is None:
        return ("first", p.arity, tuple((f, tuple((round(iv.lo, 9), round(iv.hi, 9), iv.closed_hi) for iv in ivs))
                                        for f, ivs in sorted(p.constraint)))
    return ("higher", p.form.operator, p.form.position, semantic_signature(library[p.form.base], library))
