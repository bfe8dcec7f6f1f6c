"""Intervention complexity of state transitions and agent evaluation on
finite deterministic environments."""

from .envs import (
    INF,
    Environment,
    diameter,
    distance_matrix,
    load_env,
    parse_env,
    reachable_pairs,
    reachable_set,
    serialize_env,
    shortest_path,
)
from .generators import complexity_proxy, cycle_env, gated_corridor, grid_env, random_env
from .ic import (
    ActionCount,
    Combined,
    Exactness,
    ICResult,
    ProgramLength,
    SearchBudget,
    ic_action_count,
    ic_all_pairs_action_count,
    ic_combined,
    ic_program_length,
    intervention_complexity,
    knowledge_cost,
    quasimetric_report,
    reward,
)
from .vm import Program, Regime, decode, enumerate_programs, execute

__version__ = "0.1.0"

__all__ = [
    "ActionCount",
    "Combined",
    "Environment",
    "Exactness",
    "ICResult",
    "INF",
    "Program",
    "ProgramLength",
    "Regime",
    "SearchBudget",
    "complexity_proxy",
    "cycle_env",
    "decode",
    "diameter",
    "distance_matrix",
    "enumerate_programs",
    "execute",
    "gated_corridor",
    "grid_env",
    "ic_action_count",
    "ic_all_pairs_action_count",
    "ic_combined",
    "ic_program_length",
    "intervention_complexity",
    "knowledge_cost",
    "load_env",
    "parse_env",
    "quasimetric_report",
    "random_env",
    "reachable_pairs",
    "reachable_set",
    "reward",
    "serialize_env",
    "shortest_path",
]
