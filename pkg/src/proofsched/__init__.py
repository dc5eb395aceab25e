"""Concurrent processes as proof nets, and schedules between them."""

from .formula import format_formula, parse_formula, unify, unify_dual
from .net import ProofStructure, dr_check, from_json, normalize, to_dot, to_json
from .process import (
    congruent, enabled_pairs, enumerate_pairings, execute, format_term, is_consistent,
    maximal_consistent_subpairings, parse_term, reachable_terms, step,
)
from .schedule import (
    Schedule, check_schedule, compose, congruence_schedule, induced_pairing,
    pairing_to_schedule, replay, step_schedule, synthesize, trace_schedule,
)
from .translate import ASYNC, SYNC, proof_assign, ttype

__version__ = "0.1.0"
