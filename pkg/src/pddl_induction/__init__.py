"""Induce symbolic planning domains from continuous tabletop demonstrations.

Pipeline: scene trajectories -> interval features -> feasible feature cells ->
named predicates -> lifted action schemas -> a voted PDDL domain, then
planning and constraint-based placement to execute plans back in the scene.
"""

from .actions import compose_domain, ground_trajectory, lift_transition, merge_schemas
from .bridge import InductionConfig, OracleBackend, RemoteBackend, induce_domain, induced_problem
from .features import FeatureConfig, build_features, sample_and_filter
from .loca import execute_plan, solve_placement
from .predicates import Library, PredicateDef, derive_higher_order, ground_state
from .scene import ObjectState, Scene, Trajectory, check_feasible, ingest_demonstration

__version__ = "0.1.0"

__all__ = ["compose_domain", "ground_trajectory", "lift_transition", "merge_schemas", "InductionConfig",
           "OracleBackend", "RemoteBackend", "induce_domain", "induced_problem", "FeatureConfig",
           "build_features", "sample_and_filter", "execute_plan", "solve_placement", "Library",
           "PredicateDef", "derive_higher_order", "ground_state", "ObjectState", "Scene", "Trajectory",
           "check_feasible", "ingest_demonstration"]
