"""Candidate domain generation, validation against demonstrations, and voting.

One candidate runs the whole pipeline once against the summarizer: name every
feasible feature-space cell, derive higher-order predicates, classify relevance,
lift the demonstrations into schemas and have them named. Candidates that parse
and reproduce every demonstration take part in the vote.
"""

from __future__ import annotations

import json
import random
import re
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..actions import (LogicalTrajectory, compose_domain, extract_transitions, ground_trajectory,
                       lift_transition, merge_schemas)
from ..features import (FeatureConfig, FeatureDef, Subspace, build_features, family_groups,
                        representative_template, sample_and_filter)
from ..pddl.ast import ActionSchema, And, Domain, PredicateDecl, Problem, param_names
from ..pddl.emitter import emit_action, emit_domain
from ..pddl.parser import PDDLSemanticError, PDDLSyntaxError, parse_domain
from ..pddl.solver import PLAN, TIMEOUT, solve
from ..predicates import (IRRELEVANT, RELEVANT, Library, LibraryError, Merge, PredicateDef,
                          derive_higher_order, refine_intervals, rename_library, semantic_signature)
from ..scene import Trajectory
from .backends import Backend, BackendUnavailable, TranscriptLog, parse_reply
from .prompts import MissingSlotError, SummarizerRequest, fmt_num

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
DEFAULT_FEATURES = DATA_DIR / "features.json"
DEFAULT_K = 10
VALID, ELIMINATED = "valid", "eliminated"
REASONS = ("syntax", "incomplete", "goal-unreached", "timeout", "backend")
_NAME = re.compile(r"^[a-z][a-z0-9_-]*$")


class InductionFailure(RuntimeError):
    """No candidate survived validation."""

    def __init__(self, reasons: dict[int, str]):
        self.reasons = reasons
        summary = Counter(reasons.values())
        super().__init__("all candidates eliminated: " + ", ".join(f"{k}={v}" for k, v in sorted(summary.items())))


class CandidateRejected(Exception):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}")
        self.reason, self.detail = reason, detail


@dataclass
class InductionConfig:
    k: int = DEFAULT_K
    seed: int = 0
    features: FeatureConfig | None = None
    positions: tuple[int, ...] = (0,)
    include_exists: bool = False
    validation_budget: float = 10.0
    workers: int = 1
    prune_unused: bool = True
    domain_name: str = "induced"
    subspace_cap: int = 10**6

    def feature_config(self) -> FeatureConfig:
        return self.features if self.features is not None else FeatureConfig.load(DEFAULT_FEATURES)


@dataclass
class CandidateDomain:
    index: int
    domain: Domain | None = None
    text: str = ""
    library: Library | None = None
    status: str = ELIMINATED
    reason: str | None = None
    detail: str = ""
    transcript: list[int] = field(default_factory=list)
    usage: Counter = field(default_factory=Counter)
    key: str | None = None

    @property
    def valid(self) -> bool:
        return self.status == VALID


def _task_text(demos: Sequence[Trajectory]) -> str:
    seen: list[str] = []
    for d in demos:
        if d.task and d.task not in seen:
            seen.append(d.task)
    return "; ".join(seen) or "manipulate the objects on the table"


class InductionContext:
    """Everything candidates share: features, feasible cells, rendered prompts and caches."""

    def __init__(self, demos: Sequence[Trajectory], config: InductionConfig | None = None):
        if not demos:
            raise ValueError("induction needs at least one demonstration")
        self.config = config or InductionConfig()
        self.demos = list(demos)
        self.task = _task_text(demos)
        fc = self.config.feature_config()
        scenes = [s for d in demos for s in d.scenes]
        self.features, self.dropped = build_features(fc, scenes)
        if not self.features:
            raise ValueError("every feature family was dropped as degenerate")
        self.template = representative_template(scenes)
        self.cells: list[Subspace] = [c for c in sample_and_filter(self.features, self.template, fc.samples,
                                                                   fc.seed, self.config.subspace_cap)
                                      if c.feasible]
        self.by_name = {f.name: f for f in self.features}
        self.naming = [self._naming_request(c) for c in self.cells]
        self._lock = threading.Lock()
        self._ground: dict[tuple, list[LogicalTrajectory]] = {}
        self._valid: dict[tuple[str, int], tuple[str, tuple[str, ...]]] = {}

    def bounds(self, cell: Subspace) -> list[dict]:
        out = []
        for fname, k, iv in zip(cell.features, cell.index, cell.bounds):
            f = self.by_name[fname]
            out.append({"feature": fname, "quantity": f.quantity, "mode": f.mode, "lo": iv.lo, "hi": iv.hi,
                        "closed_hi": iv.closed_hi, "u": f.u, "range_lo": f.lo, "range_hi": f.hi,
                        "index": k, "family": f.family})
        return out

    def _naming_request(self, cell: Subspace) -> SummarizerRequest:
        arity = self.by_name[cell.features[0]].arity
        ctx = {"n_objects": len(self.template.objects), "objects": list(self.template.ids),
               "arguments": " ".join(param_names(arity)), "bounds": self.bounds(cell), "family": cell.family}
        return SummarizerRequest.build("predicate-naming", ctx, self.task)

    def grounded(self, library: Library) -> list[LogicalTrajectory]:
        key = tuple(sorted((p.name, repr(semantic_signature(p, library))) for p in library.relevant))
        with self._lock:
            hit = self._ground.get(key)
        if hit is None:
            hit = [ground_trajectory(d, library) for d in self.demos]
            with self._lock:
                self._ground[key] = hit
        return hit

    def validation(self, text: str, i: int, run):
        key = (text, i)
        with self._lock:
            hit = self._valid.get(key)
        if hit is None:
            hit = run()
            with self._lock:
                self._valid[key] = hit
        return hit


# -- one candidate -------------------------------------------------------

class _Session:
    def __init__(self, ctx: InductionContext, backend: Backend, index: int, log: TranscriptLog | None):
        self.ctx, self.backend, self.index, self.log = ctx, backend, index, log
        self.ids: list[int] = []

    def ask(self, request: SummarizerRequest) -> dict:
        try:
            resp = self.backend.complete(request, self.index)
        except BackendUnavailable as e:
            if self.log is not None:
                self.ids.append(self.log.record(self.index, request, None, str(e)))
            raise CandidateRejected("backend", str(e)) from None
        if self.log is not None:
            self.ids.append(self.log.record(self.index, request, resp))
        try:
            return parse_reply(resp.text)
        except ValueError as e:
            raise CandidateRejected("syntax", str(e)) from None


def _clean_name(raw, what: str) -> str:
    name = str(raw or "").strip().lower().replace(" ", "-")
    if not _NAME.match(name):
        raise CandidateRejected("syntax", f"{what}: unusable name {raw!r}")
    return name


def _mirror(cell: tuple[int, ...], feats: list[FeatureDef]) -> tuple[int, ...] | None:
    out = []
    for k, f in zip(cell, feats):
        if f.mode == "diff":
            if abs(f.lo + f.hi) > 1e-9:
                return None
            out.append(f.n_intervals - 1 - k)
        else:
            out.append(k)
    return tuple(out)


def _positive_side(cell: tuple[int, ...], feats: list[FeatureDef]) -> bool:
    for k, f in zip(cell, feats):
        if f.mode == "diff":
            off = k - (f.n_intervals - 1) / 2
            if off:
                return off > 0
    return True


def _family_predicates(fam: str, feats: list[FeatureDef], names: dict[tuple, str],
                       directives: dict[tuple, list[dict]]) -> list[PredicateDef]:
    """Group a family's named cells into predicates.

    A group whose mirror image (argument swap) carries a different single name
    is the converse relation; only the positive side is kept. A group whose
    per-feature index sets do not form a product of named cells is split.
    """
    groups: dict[str, list[tuple]] = {}
    for cell, name in names.items():
        groups.setdefault(name, []).append(cell)
    signed = any(f.mode == "diff" for f in feats) and feats[0].arity == 2
    drop: set[str] = set()
    if signed:
        for name, cells in groups.items():
            mirrored = {_mirror(c, feats) for c in cells}
            if None in mirrored:
                continue
            other = {names.get(m) for m in mirrored}
            if len(other) != 1:
                continue
            (oname,) = other
            if oname is None or oname == name or set(groups[oname]) != mirrored:
                continue
            if not _positive_side(min(cells), feats):
                drop.add(name)
    out: list[PredicateDef] = []
    for name, cells in sorted(groups.items()):
        if name in drop:
            continue
        per = [sorted({c[i] for c in cells}) for i in range(len(feats))]
        product = 1
        for p in per:
            product *= len(p)
        parts = [(name, cells)] if product == len(cells) else \
            [(f"{name}-{j}", [c]) for j, c in enumerate(sorted(cells))]
        for pname, pcells in parts:
            cons = []
            idx_sets = []
            for i, f in enumerate(feats):
                ks = sorted({c[i] for c in pcells})
                idx_sets.append(ks)
                cons.append((f.name, tuple(f.interval(k) for k in ks)))
            p = PredicateDef(pname, feats[0].arity, tuple(cons))
            seen_dirs = set()
            for c in pcells:
                for d in directives.get(c, ()):
                    p = _apply_directive(p, d, feats, idx_sets, seen_dirs)
            out.append(p)
    return out


def _apply_directive(p: PredicateDef, d: dict, feats, idx_sets, seen) -> PredicateDef:
    if not isinstance(d, dict) or d.get("op") != "merge":
        return p
    fname = d.get("feature")
    names = [f.name for f in feats]
    if fname not in names:
        return p
    key = (fname, tuple(d.get("indices") or ()))
    if key in seen:
        return p
    seen.add(key)
    ks = idx_sets[names.index(fname)]
    wanted = sorted(set(int(i) for i in d.get("indices") or ()) & set(ks))
    if len(wanted) < 2:
        return p
    # positions in the (possibly already fused) interval list
    f = feats[names.index(fname)]
    ivs = p.intervals(fname)
    pos = sorted({j for j, iv in enumerate(ivs) for k in wanted if iv.contains(f.interval(k).lo + 1e-12)})
    if len(pos) < 2 or pos != list(range(pos[0], pos[-1] + 1)):
        return p
    try:
        return refine_intervals(p, Merge(fname, tuple(pos)))
    except (ValueError, IndexError):
        return p


def _meaning(p: PredicateDef, library: Library) -> str:
    if p.form is None:
        parts = []
        for fname, ivs in p.constraint:
            spans = " or ".join(f"[{fmt_num(iv.lo)}, {fmt_num(iv.hi)}{']' if iv.closed_hi else ')'}" for iv in ivs)
            parts.append(f"{fname} in {spans}")
        return " and ".join(parts)
    base = library[p.form.base]
    if p.form.operator == "not":
        return f"({base.name} {' '.join(param_names(base.arity))}) is false"
    args = param_names(p.arity)
    full = args[:p.form.position] + ["?x"] + args[p.form.position:]
    inner = f"({base.name} {' '.join(full)})"
    return {"forall": f"for every other object ?x, {inner}",
            "forall-not": f"for no other object ?x, {inner}",
            "exists": f"for some other object ?x, {inner}"}[p.form.operator]


def classify_relevance(p: PredicateDef, library: Library, task: str, session: _Session) -> str:
    ctx = {"name": p.name, "params": param_names(p.arity) or ["(no arguments)"],
           "meaning": _meaning(p, library),
           "operator": p.form.operator if p.form else None, "base": p.form.base if p.form else None}
    reply = session.ask(SummarizerRequest.build("relevance", ctx, task))
    val = reply.get("relevant")
    if isinstance(val, str):
        val = val.strip().lower() in ("true", "yes", "1")
    return RELEVANT if val else IRRELEVANT


def _set_header(pddl: str, name: str) -> str:
    return re.sub(r"^\s*\(:action\s+\S+", f"(:action {name}", pddl.strip(), count=1)


def _problem_for(lt: LogicalTrajectory, objects, domain: Domain, i: int) -> Problem:
    return Problem(f"demo-{i}", domain.name, tuple(objects), lt.states[0], And(tuple(sorted(lt.states[-1]))))


def run_candidate(ctx: InductionContext, backend: Backend, index: int,
                  log: TranscriptLog | None = None) -> CandidateDomain:
    cand = CandidateDomain(index)
    sess = _Session(ctx, backend, index, log)
    try:
        _build(ctx, sess, cand)
        cand.status, cand.reason = VALID, None
    except CandidateRejected as e:
        cand.status, cand.reason, cand.detail = ELIMINATED, e.reason, e.detail
    cand.transcript = sess.ids
    return cand


def _build(ctx: InductionContext, sess: _Session, cand: CandidateDomain) -> None:
    cfg = ctx.config
    # 1. name the feasible cells
    names_by_family: dict[str, dict[tuple, str]] = {}
    dirs_by_family: dict[str, dict[tuple, list]] = {}
    for cell, req in zip(ctx.cells, ctx.naming):
        reply = sess.ask(req)
        name = _clean_name(reply.get("name"), "predicate")
        names_by_family.setdefault(cell.family, {})[cell.index] = name
        refine = reply.get("refine") or []
        if refine:
            dirs_by_family.setdefault(cell.family, {})[cell.index] = list(refine)
    preds: list[PredicateDef] = []
    taken: set[str] = set()
    for fam, feats in family_groups(ctx.features).items():
        if fam not in names_by_family:
            continue
        for p in _family_predicates(fam, feats, names_by_family[fam], dirs_by_family.get(fam, {})):
            name, i = p.name, 2
            while name in taken:
                name, i = f"{p.name}-{i}", i + 1
            taken.add(name)
            preds.append(PredicateDef(name, p.arity, p.constraint, origin=p.origin) if name != p.name else p)
    try:
        library = derive_higher_order(Library(tuple(ctx.features), tuple(preds)), cfg.positions, cfg.include_exists)
    except LibraryError as e:
        raise CandidateRejected("incomplete", str(e)) from None
    # 2. relevance
    rel = []
    for p in library.predicates:
        rel.append(p.with_relevance(classify_relevance(p, library, ctx.task, sess)))
    library = library.with_predicates(rel)
    if not library.relevant:
        raise CandidateRejected("incomplete", "no relevant predicates")
    cand.library = library
    # 3. lift and name actions
    trajs = ctx.grounded(library)
    lifted: list[tuple[ActionSchema, tuple]] = []
    for lt in trajs:
        for pair in extract_transitions(lt):
            schema, _ = lift_transition(pair)
            lifted.append((schema, pair))
    merged = merge_schemas([s for s, _ in lifted])
    first_pair = {}
    for s, pair in lifted:
        first_pair.setdefault((len(s.params), s.add, s.delete), pair)
    blocks: list[str] = []
    used: set[str] = set()
    for s in merged:
        pre, post = first_pair[(len(s.params), s.add, s.delete)]
        objs = [o for o in sorted({o for a in (post - pre) | (pre - post) for o in a.args})]
        context = {"pre_state": pre, "post_state": post, "added": post - pre, "deleted": pre - post,
                   "params": list(s.params), "objects": objs, "draft": emit_action(s).strip(),
                   "added_lifted": sorted(map(str, s.add)), "deleted_lifted": sorted(map(str, s.delete))}
        try:
            req = SummarizerRequest.build("action-naming", context, ctx.task)
        except MissingSlotError as e:
            raise CandidateRejected("incomplete", str(e)) from None
        reply = sess.ask(req)
        name = _clean_name(reply.get("name"), "action")
        base, i = name, 2
        while name in used:
            name, i = f"{base}-{i}", i + 1
        used.add(name)
        blocks.append(_set_header(str(reply.get("pddl") or ""), name))
    # 4. assemble, parse and compose
    decls = "\n".join(f"    {PredicateDecl(p.name, p.arity)}" for p in library.relevant)
    text = (f"(define (domain {cfg.domain_name})\n  (:requirements :strips)\n  (:predicates\n{decls})\n"
            + "".join(f"  {b}\n" for b in blocks) + ")\n")
    try:
        parsed = parse_domain(text)
        domain = compose_domain(library, parsed.actions, cfg.domain_name)
    except PDDLSyntaxError as e:
        raise CandidateRejected("syntax", str(e)) from None
    except (PDDLSemanticError, ValueError) as e:
        raise CandidateRejected("incomplete", str(e)) from None
    cand.domain = domain
    cand.text = emit_domain(domain)
    # 5. every demonstration must be reproducible
    for i, (lt, demo) in enumerate(zip(trajs, ctx.demos)):
        prob = _problem_for(lt, demo.steps[0].scene.ids, domain, i)

        def run(prob=prob):
            res = solve(prob, domain, budget=cfg.validation_budget)
            steps = tuple(st.action for st in res.plan) if res.plan is not None else ()
            return res.status, steps

        status, steps = ctx.validation(cand.text, i, run)
        if status == TIMEOUT:
            raise CandidateRejected("timeout", f"demonstration {i}")
        if status != PLAN:
            raise CandidateRejected("goal-unreached", f"demonstration {i}")
        cand.usage.update(steps)
    cand.key = canonical_key(domain, library)


# -- voting --------------------------------------------------------------

def canonical_key(domain: Domain, library: Library) -> str:
    """Name-free text of a domain: predicates by meaning, actions alpha-renamed and unnamed."""
    sigs = {p.name: repr(semantic_signature(p, library)) for p in library.predicates if p.name in domain.arities}
    order = sorted(sigs, key=lambda n: sigs[n])
    pmap = {n: f"p{i}" for i, n in enumerate(order)}
    acts = sorted(_action_key(a, pmap) for a in domain.actions)
    return "\n".join([f"{pmap[n]}={sigs[n]}" for n in order] + acts)


def _action_key(a: ActionSchema, pmap: dict[str, str]) -> str:
    a = a.rename_predicates(pmap)
    return emit_action(a.rename(dict(zip(a.params, param_names(len(a.params)))), "_")).strip()


@dataclass
class VoteResult:
    winner: CandidateDomain | None
    tally: dict[str, list[int]]
    tie_broken: bool = False
    renamed: dict[str, str] = field(default_factory=dict)
    pruned: list[str] = field(default_factory=list)
    domain: Domain | None = None
    library: Library | None = None


def vote(candidates: Sequence[CandidateDomain], seed: int = 0, backend: Backend | None = None,
         task: str = "", log: TranscriptLog | None = None, prune_unused: bool = True) -> VoteResult:
    """Strict plurality over canonical keys; ties go to a seeded draw."""
    tally: dict[str, list[int]] = {}
    for c in candidates:
        if c.valid and c.key is not None:
            tally.setdefault(c.key, []).append(c.index)
    if not tally:
        return VoteResult(None, {})
    best = max(len(v) for v in tally.values())
    top = sorted(k for k, v in tally.items() if len(v) == best)
    key = top[0] if len(top) == 1 else random.Random(f"vote:{seed}").choice(top)
    members = [c for c in candidates if c.key == key and c.valid]
    winner = min(members, key=lambda c: c.index)
    domain, library = winner.domain, winner.library
    renamed: dict[str, str] = {}
    if backend is not None and len(members) > 1:
        domain, library, renamed = _select_names(winner, members, backend, task, log)
    pruned: list[str] = []
    if prune_unused:
        domain, pruned = _prune(domain, library, winner, candidates, renamed)
    return VoteResult(winner, tally, len(top) > 1, renamed, pruned, domain, library)


def _select_names(winner, members, backend, task, log):
    sess = _Session(None, backend, winner.index, log)
    lib = winner.library
    # predicates by meaning
    sig_names: dict[str, list[str]] = {}
    for m in members:
        for p in m.library.predicates:
            if p.form is None and p.relevant:
                sig_names.setdefault(repr(semantic_signature(p, m.library)), []).append(p.name)
    pmap: dict[str, str] = {}
    for p in lib.predicates:
        if p.form is not None or not p.relevant:
            continue
        opts = sig_names.get(repr(semantic_signature(p, lib)), [p.name])
        if len(set(opts)) > 1:
            choice = _choose(sess, "relation", opts, task)
            if choice != p.name and choice not in lib:
                pmap[p.name] = choice
    library = rename_library(lib, pmap) if pmap else lib
    full = {p.name: q.name for p, q in zip(lib.predicates, library.predicates) if p.name != q.name}
    acts = [a.rename_predicates(full) for a in winner.domain.actions]
    # actions by canonical text
    act_names: dict[str, list[str]] = {}
    for m in members:
        mm = _pred_canon(m)
        for a in m.domain.actions:
            act_names.setdefault(_action_key(a, mm), []).append(a.name)
    wm = _pred_canon(winner)
    out, used = [], set()
    for orig, a in zip(winner.domain.actions, acts):
        opts = act_names.get(_action_key(orig, wm), [a.name])
        name = _choose(sess, "operator", opts, task) if len(set(opts)) > 1 else a.name
        if name in used:
            name = a.name
        used.add(name)
        if name != a.name:
            full[a.name] = name
        out.append(a.rename({}, name))
    decls = tuple(PredicateDecl(full.get(d.name, d.name), d.arity) for d in winner.domain.predicates)
    return Domain(winner.domain.name, decls, tuple(out)), library, full


def _pred_canon(c: CandidateDomain) -> dict[str, str]:
    sigs = {p.name: repr(semantic_signature(p, c.library)) for p in c.library.predicates}
    return {n: sigs[n] for n in sigs}


def _choose(sess: _Session, what: str, options: list[str], task: str) -> str:
    ctx = {"what": what, "options": list(options)}
    try:
        reply = sess.ask(SummarizerRequest.build("selection", ctx, task or "planning"))
    except CandidateRejected:
        return Counter(options).most_common(1)[0][0]
    choice = str(reply.get("choice", ""))
    return choice if choice in options else sorted(set(options))[0]


def _prune(domain: Domain, library: Library, winner, candidates, renamed) -> tuple[Domain, list[str]]:
    """Drop actions that no validation plan of the winning class ever used."""
    members = [c for c in candidates if c.valid and c.key == winner.key]
    used: Counter = Counter()
    for c in members:
        used.update(c.usage)
    if not sum(used.values()):
        return domain, []
    inverse = {v: k for k, v in renamed.items()}
    keep, pruned = [], []
    for a in domain.actions:
        original = inverse.get(a.name, a.name)
        if used[original] or any(c.usage[original] for c in members):
            keep.append(a)
        else:
            pruned.append(a.name)
    if not keep:
        return domain, []
    return Domain(domain.name, domain.predicates, tuple(keep), domain.requirements), pruned


# -- driver --------------------------------------------------------------

@dataclass
class InductionResult:
    domain: Domain | None
    library: Library | None
    candidates: list[CandidateDomain]
    vote: VoteResult
    context: InductionContext = field(repr=False)
    log: TranscriptLog | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.domain is not None

    @property
    def reasons(self) -> dict[int, str]:
        return {c.index: c.reason for c in self.candidates if not c.valid}

    @property
    def text(self) -> str:
        return emit_domain(self.domain) if self.domain is not None else ""

    def summary(self) -> dict:
        return {"ok": self.ok, "k": len(self.candidates),
                "valid": sum(c.valid for c in self.candidates),
                "eliminated": dict(Counter(c.reason for c in self.candidates if not c.valid)),
                "classes": {str(i): len(v) for i, v in enumerate(self.vote.tally.values())},
                "tie_broken": self.vote.tie_broken, "pruned": self.vote.pruned,
                "predicates": sorted(self.domain.arities) if self.domain else [],
                "actions": [a.name for a in self.domain.actions] if self.domain else [],
                "dropped_families": self.context.dropped,
                "tokens_in": self.log.tokens_in if self.log else 0,
                "tokens_out": self.log.tokens_out if self.log else 0}

    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if self.domain is not None:
            (out / "domain.pddl").write_text(self.text)
            self.library.save(out / "library.json")
        (out / "induction.json").write_text(json.dumps(self.summary(), indent=1))


def generate_candidates(ctx: InductionContext, backend: Backend, k: int | None = None,
                        log: TranscriptLog | None = None, workers: int | None = None) -> list[CandidateDomain]:
    k = ctx.config.k if k is None else k
    if k < 1:
        raise ValueError("k must be >= 1")
    workers = workers or ctx.config.workers
    if workers <= 1:
        return [run_candidate(ctx, backend, i, log) for i in range(k)]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda i: run_candidate(ctx, backend, i, log), range(k)))


def induce_domain(demos: Sequence[Trajectory], backend: Backend, config: InductionConfig | None = None,
                  log: TranscriptLog | None = None, context: InductionContext | None = None,
                  strict: bool = False) -> InductionResult:
    """Full induction: k candidates, validation, vote. With `strict`, failure raises."""
    ctx = context or InductionContext(demos, config)
    log = log if log is not None else TranscriptLog(keep=False)
    cands = generate_candidates(ctx, backend, log=log)
    result = vote(cands, ctx.config.seed, backend, ctx.task, log, ctx.config.prune_unused)
    if result.domain is None and strict:
        raise InductionFailure({c.index: c.reason for c in cands})
    return InductionResult(result.domain, result.library, cands, result, ctx, log)


def induced_problem(task_scene, goal_scene, library: Library, domain: Domain, name: str = "task") -> Problem:
    """Problem whose init and goal come from grounding two scenes with an induced library."""
    from ..predicates import ground_state
    keep = set(domain.arities)
    init = frozenset(a for a in ground_state(task_scene, library) if a.pred in keep)
    goal = frozenset(a for a in ground_state(goal_scene, library) if a.pred in keep)
    return Problem(name, domain.name, tuple(task_scene.ids), init, And(tuple(sorted(goal))))


__all__ = ["InductionConfig", "InductionContext", "CandidateDomain", "InductionResult", "VoteResult",
           "InductionFailure", "run_candidate", "generate_candidates", "vote", "induce_domain",
           "canonical_key", "classify_relevance", "induced_problem"]
