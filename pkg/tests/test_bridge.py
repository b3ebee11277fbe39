import json
from collections import Counter

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pddl_induction.actions import schema_key
from pddl_induction.bench.tasks import reference_domain, stack_demo
from pddl_induction.bridge import (FaultInjectingBackend, InductionConfig, OracleBackend, RemoteBackend,
                                   SummarizerRequest, induce_domain, render_prompt)
from pddl_induction.bridge.backends import (BackendUnavailable, TranscriptLog, corrupt_action, count_tokens,
                                            parse_reply)
from pddl_induction.bridge.induction import (VALID, CandidateDomain, InductionContext, InductionFailure,
                                             canonical_key, vote)
from pddl_induction.bridge.prompts import MissingSlotError
from pddl_induction.pddl import Domain, PredicateDecl, emit_domain, parse_domain
from pddl_induction.predicates import Library, rename_library

ACTION = "(:action stack :parameters (?a ?b) :precondition (and (p ?a)) :effect (and (q ?a ?b)))"


def test_render_is_deterministic_and_checks_slots():
    ctx = {"what": "relation", "options": ["above", "on"]}
    a = render_prompt("selection", ctx, "stack")
    assert a == render_prompt("selection", dict(ctx), "stack")
    assert "above, on" in a
    with pytest.raises(MissingSlotError):
        render_prompt("selection", {"what": "relation"}, "stack")
    with pytest.raises(MissingSlotError):
        render_prompt("relevance", {}, "stack")
    with pytest.raises(ValueError):
        render_prompt("poetry", ctx)


def test_bounds_are_printed_with_fixed_precision():
    ctx = {"n_objects": 2, "objects": ["a", "b"], "arguments": "?a ?b",
           "bounds": [{"feature": "delta_z", "lo": 0.02, "hi": 1 / 15, "closed_hi": True}]}
    text = render_prompt("predicate-naming", ctx, "t")
    assert "delta_z in [0.0200, 0.0667]" in text


def test_parse_reply_finds_embedded_json():
    assert parse_reply('Sure!\n```json\n{"name": "above"}\n```') == {"name": "above"}
    with pytest.raises(ValueError):
        parse_reply("no braces here")


def test_count_tokens():
    assert count_tokens("(on ?a ?b)") == 7  # ( on ? a ? b )


def test_oracle_names_position_cells():
    def bound(q, lo, hi, u=0.04):
        return {"feature": f"delta_{q}", "quantity": q, "mode": "diff", "lo": lo, "hi": hi, "closed_hi": False,
                "u": u, "range_lo": -0.1, "range_hi": 0.1, "index": 0, "family": "position"}
    ctx = {"n_objects": 2, "objects": ["a", "b"], "arguments": "?a ?b",
           "bounds": [bound("x", -0.02, 0.02), bound("y", -0.02, 0.02), bound("z", 0.02, 0.06)]}
    reply = json.loads(OracleBackend().complete(SummarizerRequest.build("predicate-naming", ctx, "t")).text)
    assert reply["name"] == "above"
    ctx["bounds"][0] = bound("x", 0.02, 0.06)
    ctx["bounds"][2] = bound("z", -0.02, 0.02)
    reply = json.loads(OracleBackend().complete(SummarizerRequest.build("predicate-naming", ctx, "t")).text)
    assert reply["name"] == "adjacent-right"


def _mock_client(responses):
    calls = []

    def handler(request):
        calls.append(json.loads(request.content))
        status, body = responses[min(len(calls) - 1, len(responses) - 1)]
        return httpx.Response(status, json=body)
    return httpx.Client(transport=httpx.MockTransport(handler)), calls


def test_remote_backend_retries_then_succeeds():
    ok = {"choices": [{"message": {"content": '{"choice": "on"}'}}],
          "usage": {"prompt_tokens": 11, "completion_tokens": 3}}
    client, calls = _mock_client([(500, {}), (200, ok)])
    be = RemoteBackend("http://x/v1/chat", key="k", model="m", client=client)
    req = SummarizerRequest.build("selection", {"what": "relation", "options": ["on", "above"]}, "t")
    resp = be.complete(req)
    assert parse_reply(resp.text) == {"choice": "on"}
    assert (resp.tokens_in, resp.tokens_out) == (11, 3)
    assert len(calls) == 2 and calls[0]["messages"][0]["content"] == req.rendered_prompt


def test_remote_backend_gives_up():
    client, calls = _mock_client([(503, {})])
    be = RemoteBackend("http://x", client=client, retries=2)
    req = SummarizerRequest.build("selection", {"what": "relation", "options": ["on"]}, "t")
    with pytest.raises(BackendUnavailable):
        be.complete(req)
    assert len(calls) == 3


def test_remote_from_env_needs_url(monkeypatch):
    monkeypatch.delenv("BACKEND_URL", raising=False)
    with pytest.raises(BackendUnavailable):
        RemoteBackend.from_env()


@pytest.mark.parametrize("fault", ["syntax", "incomplete", "goal-unreached"])
def test_corrupt_action(fault):
    out = corrupt_action(ACTION, fault)
    if fault == "syntax":
        assert out.count("(") > out.count(")")
    elif fault == "incomplete":
        assert "ghost-relation" in out
    else:
        assert "(q ?a ?b)" not in out


@given(st.integers(0, 10**6))
def test_fault_draws_are_seeded(seed):
    a = FaultInjectingBackend(OracleBackend(), 0.4, seed)
    b = FaultInjectingBackend(OracleBackend(), 0.4, seed)
    assert [a.fault_for(i) for i in range(20)] == [b.fault_for(i) for i in range(20)]


def test_fault_rate_is_close_to_p():
    be = FaultInjectingBackend(OracleBackend(), 0.4, seed=7)
    rate = sum(be.fault_for(i) is not None for i in range(5000)) / 5000
    assert abs(rate - 0.4) < 3 * (0.4 * 0.6 / 5000) ** 0.5


# -- induction ----------------------------------------------------------

def test_stacking_domain_matches_reference(stack_result):
    assert stack_result.ok
    dom = stack_result.domain
    assert sorted(dom.arities) == ["above", "forall_0_not_above", "on-table"]
    ref = reference_domain("stacking")
    assert [schema_key(a) for a in dom.actions] == [schema_key(a) for a in ref.actions]


def test_composed_demos_give_both_operators(composed_result):
    assert [a.name for a in composed_result.domain.actions] == ["stack", "unstack"]


def test_hanoi_domain_uses_size(hanoi_result):
    assert "wider" in hanoi_result.domain.arities
    (move,) = hanoi_result.domain.actions
    assert move.arity == 3


def test_induced_text_roundtrips(stack_result, composed_result, hanoi_result):
    for r in (stack_result, composed_result, hanoi_result):
        assert parse_domain(r.text) == r.domain
        assert emit_domain(parse_domain(r.text)) == r.text


def test_candidates_agree_and_record_usage(stack_result):
    assert all(c.valid for c in stack_result.candidates)
    assert len({c.key for c in stack_result.candidates}) == 1
    assert stack_result.candidates[0].usage == Counter({"stack": 2})
    assert stack_result.summary()["valid"] == 3


@pytest.mark.parametrize("kind", ["syntax", "incomplete", "goal-unreached", "backend"])
def test_each_fault_kind_eliminates_with_its_reason(stack_result, kind):
    be = FaultInjectingBackend(OracleBackend(), 1.0, seed=0, kinds=(kind,))
    res = induce_domain(stack_result.context.demos, be, context=stack_result.context)
    assert not res.ok
    assert set(res.reasons.values()) == {kind}
    with pytest.raises(InductionFailure):
        induce_domain(stack_result.context.demos, be, context=stack_result.context, strict=True)


def test_partial_faults_still_produce_the_clean_domain(stack_result):
    be = FaultInjectingBackend(OracleBackend(), 0.5, seed=3)
    ctx = stack_result.context
    old = ctx.config.k
    ctx.config.k = 8
    try:
        res = induce_domain(ctx.demos, be, context=ctx)
    finally:
        ctx.config.k = old
    faulty = {i for i in range(8) if be.fault_for(i)}
    assert 0 < len(faulty) < 8
    assert set(res.reasons) == faulty
    assert res.text == stack_result.text


def test_canonical_key_ignores_predicate_names(stack_result):
    dom, lib = stack_result.domain, stack_result.library
    ren_lib = rename_library(lib, {"above": "on"})
    full = {p.name: q.name for p, q in zip(lib.predicates, ren_lib.predicates) if p.name != q.name}
    ren_dom = Domain(dom.name, tuple(PredicateDecl(full.get(p.name, p.name), p.arity) for p in dom.predicates),
                     tuple(a.rename_predicates(full) for a in dom.actions))
    assert canonical_key(ren_dom, ren_lib) == canonical_key(dom, lib)


def _cand(i, key, stack_result):
    return CandidateDomain(i, stack_result.domain, stack_result.text, stack_result.library, VALID, key=key)


def test_vote_plurality(stack_result):
    cands = [_cand(0, "b", stack_result), _cand(1, "a", stack_result), _cand(2, "a", stack_result)]
    res = vote(cands, prune_unused=False)
    assert res.winner.index == 1 and not res.tie_broken
    assert res.tally == {"b": [0], "a": [1, 2]}


def test_vote_ties_are_seeded(stack_result):
    cands = [_cand(0, "a", stack_result), _cand(1, "b", stack_result)]
    winners = {s: vote(cands, seed=s, prune_unused=False).winner.index for s in range(40)}
    assert all(vote(cands, seed=s, prune_unused=False).winner.index == w for s, w in winners.items())
    assert set(winners.values()) == {0, 1}
    assert vote(cands, seed=0, prune_unused=False).tie_broken


def test_vote_with_no_valid_candidates():
    assert vote([CandidateDomain(0)]).winner is None


def test_transcript_and_save(stack_result, tmp_path):
    log = TranscriptLog(path=tmp_path / "t.jsonl")
    res = induce_domain([stack_demo()], OracleBackend(), InductionConfig(k=2), log=log)
    lines = (tmp_path / "t.jsonl").read_text().splitlines()
    assert len(lines) == log.calls == len(log.entries) > 0
    assert log.tokens_in > 0 and log.tokens_out > 0
    kinds = {json.loads(x)["kind"] for x in lines}
    assert {"predicate-naming", "relevance", "action-naming"} <= kinds
    res.save(tmp_path / "out")
    assert parse_domain((tmp_path / "out" / "domain.pddl").read_text()) == res.domain
    assert Library.load(tmp_path / "out" / "library.json") == res.library


def test_threaded_candidates_match_sequential(stack_result):
    ctx = InductionContext(stack_result.context.demos, InductionConfig(k=4, workers=4))
    res = induce_domain(ctx.demos, OracleBackend(), context=ctx)
    assert res.text == stack_result.text
