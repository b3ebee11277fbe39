"""Bridge between continuous demonstrations and a symbolic domain via a summarizer backend."""

from .backends import (Backend, BackendUnavailable, FaultInjectingBackend, OracleBackend, RemoteBackend,
                       Response, TranscriptLog)
from .induction import (CandidateDomain, InductionConfig, InductionContext, InductionFailure,
                        InductionResult, VoteResult, canonical_key, generate_candidates, induce_domain,
                        induced_problem, run_candidate, vote)
from .prompts import SummarizerRequest, render_prompt

__all__ = ["Backend", "BackendUnavailable", "FaultInjectingBackend", "OracleBackend", "RemoteBackend",
           "Response", "TranscriptLog", "CandidateDomain", "InductionConfig", "InductionContext",
           "InductionFailure", "InductionResult", "VoteResult", "canonical_key", "generate_candidates",
           "induce_domain", "induced_problem", "run_candidate", "vote", "SummarizerRequest", "render_prompt"]
