"""Induction failure rate against the number of parallel candidates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..bridge.backends import FAULT_KINDS, Backend, FaultInjectingBackend, OracleBackend
from ..bridge.induction import InductionConfig, InductionContext, induce_domain
from ..scene import Trajectory


@dataclass(frozen=True)
class CurvePoint:
    k: int
    trials: int
    failures: int
    expected: float

    @property
    def rate(self) -> float:
        return self.failures / self.trials

    @property
    def sigma(self) -> float:
        return math.sqrt(self.expected * (1 - self.expected) / self.trials)

    def within(self, n_sigma: float = 3.0) -> bool:
        return abs(self.rate - self.expected) <= n_sigma * self.sigma + 1e-12

    def to_json(self) -> dict:
        return {"k": self.k, "trials": self.trials, "failures": self.failures, "rate": self.rate,
                "expected": self.expected, "sigma": self.sigma, "within_3sigma": self.within()}


def failure_curve(demos: Sequence[Trajectory], ks: Sequence[int] = (1, 5, 10, 15), p: float = 0.4,
                  trials: int = 1000, seed: int = 0, inner: Backend | None = None,
                  kinds: Sequence[str] = FAULT_KINDS + ("backend",)) -> list[CurvePoint]:
    """Each trial draws fresh per-candidate faults; the trial fails when no candidate survives."""
    inner = inner or OracleBackend()
    ctx = InductionContext(demos, InductionConfig(k=max(ks)))
    out = []
    for k in ks:
        ctx.config.k = k
        failures = 0
        for t in range(trials):
            backend = FaultInjectingBackend(inner, p, seed=seed * 1_000_003 + k * 10_007 + t, kinds=kinds)
            failures += not induce_domain(demos, backend, context=ctx).ok
        out.append(CurvePoint(k, trials, failures, p ** k))
    return out
