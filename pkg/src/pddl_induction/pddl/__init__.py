from .ast import (ActionSchema, And, Atom, Domain, Forall, GroundStep, Not, Plan,
                  PredicateDecl, Problem)
from .emitter import emit_domain, emit_problem
from .grounding import GroundAction, GroundingCapError, ground, holds
from .parser import (PDDLSemanticError, PDDLSyntaxError, UnsupportedRequirementError,
                     parse_domain, parse_problem)
from .solver import NO_PLAN, PLAN, TIMEOUT, SolveResult, Validation, solve, validate

__all__ = [
    "ActionSchema", "And", "Atom", "Domain", "Forall", "GroundStep", "Not", "Plan",
    "PredicateDecl", "Problem", "emit_domain", "emit_problem", "GroundAction",
    "GroundingCapError", "ground", "holds", "PDDLSemanticError", "PDDLSyntaxError",
    "UnsupportedRequirementError", "parse_domain", "parse_problem", "NO_PLAN", "PLAN",
    "TIMEOUT", "SolveResult", "Validation", "solve", "validate",
]
