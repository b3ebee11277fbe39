"""Summarizer backends: a deterministic rule oracle, a remote chat endpoint, and a fault injector."""

from __future__ import annotations

import json
import math
import os
import random
import re
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from .prompts import SummarizerRequest

DEFAULT_RETRIES = 2


class BackendUnavailable(RuntimeError):
    pass


@dataclass(frozen=True)
class Response:
    text: str
    tokens_in: int = 0
    tokens_out: int = 0


class Backend(Protocol):
    name: str

    def complete(self, request: SummarizerRequest, candidate: int = 0) -> Response: ...


_WORD = re.compile(r"\w+|[^\w\s]")


def count_tokens(text: str) -> int:
    """Rough token count: words and punctuation marks."""
    return len(_WORD.findall(text))


def parse_reply(text: str) -> dict:
    """First JSON object found in a reply (models often wrap JSON in prose or fences)."""
    dec = json.JSONDecoder()
    for m in re.finditer(r"\{", text):
        try:
            obj, _ = dec.raw_decode(text[m.start():])
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    raise ValueError(f"no JSON object in reply: {text[:80]!r}")


# -- rule oracle ---------------------------------------------------------

DERIVED_PREFIX = re.compile(r"^(not_|forall_\d+_not_|forall_\d+_|exists_\d+_)")

SUPPORT_WORDS = ("stack", "tower", "pile", "hanoi", "disk", "rearrange", "block")
SIZE_WORDS = ("hanoi", "larger", "smaller", "size", "disk", "wider")
ROW_WORDS = ("align", "row", "line up", "next to", "beside")
COLOR_WORDS = ("color", "colour", "sort")


def base_of(pred: str) -> str:
    return DERIVED_PREFIX.sub("", pred)


def _n_bins(bound: dict) -> int:
    return max(1, math.ceil((bound["range_hi"] - bound["range_lo"]) / bound["u"] - 1e-9))


def _bin(bound: dict) -> int:
    return int(math.floor((bound["lo"] - bound["range_lo"]) / bound["u"] + 1e-9))


def _centre_k(bound: dict) -> int:
    """Signed multiple of u at the centre of the interval."""
    return int(round((bound["lo"] + bound["hi"]) / 2 / bound["u"]))


class OracleBackend:
    """Keyword and sign-pattern rules standing in for a language model.

    Naming reads only the interval bounds in the request context; relevance reads
    the task text. Replies are memoised per prompt, so repeated candidates are cheap.
    """

    name = "oracle"

    def __init__(self):
        self._memo: dict[tuple[str, str], Response] = {}
        self._lock = threading.Lock()

    def complete(self, request: SummarizerRequest, candidate: int = 0) -> Response:
        key = (request.kind, request.rendered_prompt)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        handler = {
            "predicate-naming": self._name_predicate,
            "action-naming": self._name_action,
            "selection": self._select,
            "relevance": self._relevance,
        }[request.kind]
        text = json.dumps(handler(request.context, request.task_description), sort_keys=True)
        resp = Response(text, count_tokens(request.rendered_prompt), count_tokens(text))
        with self._lock:
            self._memo[key] = resp
        return resp

    # predicate naming
    def _name_predicate(self, ctx: dict, task: str) -> dict:
        bounds = ctx["bounds"]
        q = {b["quantity"]: b for b in bounds}
        refine = []
        if {"x", "y", "z"} & set(q) and all(b["mode"] == "diff" for b in bounds):
            kx, ky, kz = (_centre_k(q[c]) if c in q else 0 for c in "xyz")
            return {"name": _position_name(kx, ky, kz), "refine": refine}
        if "elevation" in q:
            k = _centre_k(q["elevation"])
            return {"name": "on-table" if k == 0 else (f"elevated-{k}" if k > 0 else "sunken"), "refine": refine}
        if set(q) <= {"w", "l", "h"} and all(b["mode"] == "diff" for b in bounds):
            parts = []
            for dim, (pos, neg, same) in {"w": ("wider", "narrower", "same-width"),
                                          "l": ("longer", "shorter", "same-length"),
                                          "h": ("taller", "lower", "same-height")}.items():
                if dim not in q:
                    continue
                b = q[dim]
                k = _centre_k(b)
                parts.append(pos if k > 0 else neg if k < 0 else same)
                n = _n_bins(b)
                mid = (n - 1) // 2
                if k > 0 and n - 1 - mid > 1:
                    refine.append({"op": "merge", "feature": b["feature"], "indices": list(range(mid + 1, n))})
                elif k < 0 and mid > 1:
                    refine.append({"op": "merge", "feature": b["feature"], "indices": list(range(0, mid))})
            return {"name": "-".join(parts), "refine": refine}
        if set(q) <= {"r", "g", "b"} and all(b["mode"] == "absdiff" for b in bounds):
            differing = []
            for ch in "rgb":
                if ch not in q:
                    continue
                b = q[ch]
                if _bin(b) > 0:
                    differing.append(ch)
                    n = _n_bins(b)
                    if n > 2:
                        # the documented channel merge: all non-zero differences alike
                        refine.append({"op": "merge", "feature": b["feature"], "indices": list(range(1, n))})
            name = "similar-color" if not differing else "differ-color-" + "".join(differing)
            return {"name": name, "refine": refine}
        tag = "-".join(f"{b['quantity']}{_bin(b)}" for b in bounds)
        return {"name": f"{ctx.get('family', 'rel')}-{tag}", "refine": refine}

    # relevance
    def _relevance(self, ctx: dict, task: str) -> dict:
        t = task.lower()
        roots: set[str] = set()
        prefixes: list[str] = []
        if any(w in t for w in SUPPORT_WORDS):
            roots |= {"above", "on-table"}
        if any(w in t for w in SIZE_WORDS):
            roots |= {"wider"}
        if any(w in t for w in ROW_WORDS):
            roots |= {"on-table"}
            prefixes.append("adjacent-")
        if any(w in t for w in COLOR_WORDS):
            roots |= {"similar-color"}

        def rel(name: str) -> bool:
            return name in roots or any(name.startswith(p) for p in prefixes)

        name = ctx["name"]
        op = ctx.get("operator")
        if op is None:
            return {"relevant": rel(name)}
        return {"relevant": op == "forall-not" and rel(ctx["base"])}

    # action naming
    def _name_action(self, ctx: dict, task: str) -> dict:
        head = lambda a: str(a).strip("()").split()[0]  # noqa: E731
        added = {head(a) for a in ctx.get("added_lifted", ())}
        deleted = {head(a) for a in ctx.get("deleted_lifted", ())}
        if "above" in added and "above" in deleted:
            name = "move"
        elif "above" in added:
            name = "stack"
        elif "on-table" in added:
            name = "unstack" if "above" in deleted else "put-down"
        elif any(p.startswith("adjacent-") for p in added):
            name = "place-" + sorted(p for p in added if p.startswith("adjacent-"))[0].split("-", 1)[1]
        elif added:
            name = "make-" + base_of(sorted(added)[0])
        else:
            name = "act"
        draft = ctx["draft"]
        return {"name": name, "pddl": re.sub(r"^\s*\(:action\s+\S+", f"(:action {name}", draft, count=1)}

    # selection
    def _select(self, ctx: dict, task: str) -> dict:
        counts = Counter(ctx["options"])
        best = max(counts.values())
        return {"choice": sorted(n for n, c in counts.items() if c == best)[0]}


def _position_name(kx: int, ky: int, kz: int) -> str:
    def dirs(kx, ky):
        out = []
        for k, pos, neg in ((ky, "behind", "front"), (kx, "right", "left")):
            if k:
                word = pos if k > 0 else neg
                out.append(word if abs(k) == 1 else f"{word}{abs(k)}")
        return out

    if kx == 0 and ky == 0:
        if kz == 0:
            return "coincident"
        word = "above" if kz > 0 else "below"
        return word if abs(kz) == 1 else f"{word}{abs(kz)}"
    if kz == 0:
        prefix = "adjacent" if max(abs(kx), abs(ky)) == 1 else "near"
        return "-".join([prefix] + dirs(kx, ky))
    vert = "above" if kz > 0 else "below"
    if abs(kz) > 1:
        vert += str(abs(kz))
    return "-".join([vert] + dirs(kx, ky))


# -- remote endpoint ----------------------------------------------------

class RemoteBackend:
    """OpenAI-style chat completion endpoint over HTTP."""

    name = "remote"

    def __init__(self, url: str, key: str = "", model: str = "", retries: int = DEFAULT_RETRIES,
                 timeout: float = 60.0, client=None, temperature: float = 0.7):
        import httpx
        self.url, self.key, self.model = url, key, model
        self.retries = retries
        self.temperature = temperature
        self._client = client or httpx.Client(timeout=timeout)
        self._httpx = httpx

    @classmethod
    def from_env(cls, **kw) -> "RemoteBackend":
        url = os.environ.get("BACKEND_URL")
        if not url:
            raise BackendUnavailable("BACKEND_URL is not set")
        return cls(url, os.environ.get("BACKEND_KEY", ""), os.environ.get("BACKEND_MODEL", ""), **kw)

    def complete(self, request: SummarizerRequest, candidate: int = 0) -> Response:
        body = {"model": self.model, "temperature": self.temperature,
                "messages": [{"role": "user", "content": request.rendered_prompt}]}
        headers = {"Authorization": f"Bearer {self.key}"} if self.key else {}
        last = None
        for _ in range(self.retries + 1):
            try:
                r = self._client.post(self.url, json=body, headers=headers)
                if r.status_code >= 500 or r.status_code == 429:
                    last = f"HTTP {r.status_code}"
                    continue
                r.raise_for_status()
                data = r.json()
                text = data["choices"][0]["message"]["content"]
                usage = data.get("usage") or {}
                return Response(text, int(usage.get("prompt_tokens", count_tokens(request.rendered_prompt))),
                                int(usage.get("completion_tokens", count_tokens(text))))
            except (self._httpx.HTTPError, KeyError, IndexError, ValueError) as e:
                last = repr(e)
        raise BackendUnavailable(f"{self.url} failed after {self.retries + 1} attempts: {last}")


# -- fault injection ----------------------------------------------------

FAULT_KINDS = ("syntax", "incomplete", "goal-unreached")


class FaultInjectingBackend:
    """Wraps a backend and corrupts every action reply of a seeded subset of candidates.

    Each candidate independently fails with probability `p`; the fault kind is drawn
    from `kinds`. Kind "backend" makes every call of that candidate raise.
    """

    def __init__(self, inner: Backend, p: float, seed: int = 0, kinds=FAULT_KINDS):
        if not 0 <= p <= 1:
            raise ValueError("fault probability must lie in [0, 1]")
        self.inner, self.p, self.seed, self.kinds = inner, p, seed, tuple(kinds)
        self.name = f"faulty({inner.name})"
        self._faults: dict[int, str | None] = {}

    def fault_for(self, candidate: int) -> str | None:
        if candidate not in self._faults:
            rng = random.Random(f"fault:{self.seed}:{candidate}")
            self._faults[candidate] = rng.choice(self.kinds) if rng.random() < self.p else None
        return self._faults[candidate]

    def complete(self, request: SummarizerRequest, candidate: int = 0) -> Response:
        fault = self.fault_for(candidate)
        if fault == "backend":
            raise BackendUnavailable(f"injected outage for candidate {candidate}")
        resp = self.inner.complete(request, candidate)
        if fault is None or request.kind != "action-naming":
            return resp
        reply = parse_reply(resp.text)
        reply["pddl"] = corrupt_action(reply.get("pddl", ""), fault)
        return Response(json.dumps(reply, sort_keys=True), resp.tokens_in, resp.tokens_out)


def corrupt_action(text: str, fault: str) -> str:
    if fault == "syntax":
        return text.rstrip().rstrip(")") if text.strip() else "(:action"
    from ..pddl.emitter import emit_action
    from ..pddl.parser import _action, read_tree
    try:
        act = _action(read_tree(text))
    except ValueError:
        return text.rstrip().rstrip(")")
    if fault == "incomplete":
        from ..pddl.ast import ActionSchema, And, Atom
        ghost = Atom("ghost-relation", act.params[:1])
        act = ActionSchema(act.name, act.params, And(act.precondition.parts + (ghost,)), act.add, act.delete)
        return emit_action(act).strip()
    if fault == "goal-unreached":
        from ..pddl.ast import ActionSchema
        act = ActionSchema(act.name, act.params, act.precondition, frozenset(), act.delete)
        return emit_action(act).strip()
    raise ValueError(f"unknown fault kind {fault!r}")


# -- transcript ---------------------------------------------------------

@dataclass
class TranscriptLog:
    path: Path | None = None
    entries: list = field(default_factory=list)
    keep: bool = True
    tokens_in: int = 0
    tokens_out: int = 0
    calls: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def record(self, candidate: int, request: SummarizerRequest, response: Response | None,
               error: str | None = None) -> int:
        with self._lock:
            cid = self.calls
            self.calls += 1
            if response is not None:
                self.tokens_in += response.tokens_in
                self.tokens_out += response.tokens_out
            if self.keep or self.path is not None:
                entry = {"id": cid, "candidate": candidate, "kind": request.kind,
                         "request": request.rendered_prompt,
                         "response": response.text if response else None,
                         "tokens_in": response.tokens_in if response else 0,
                         "tokens_out": response.tokens_out if response else 0}
                if error:
                    entry["error"] = error
                if self.keep:
                    self.entries.append(entry)
                if self.path is not None:
                    with open(self.path, "a") as fh:
                        fh.write(json.dumps(entry) + "\n")
            return cid
