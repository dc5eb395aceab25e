import random

import pytest

from conftest import C1, C2, C3, P_EX_TEXT
from proofsched.formula import Var
from proofsched.generate import all_terms, shape
from proofsched.net import dr_check, normalize, same_net
from proofsched.process import (
    NotEnabled, canonicalize, congruent, enabled_pairs, execute, make_pairing, parse_term,
    reachable, reachable_terms, step,
)
from proofsched.schedule import (
    NotCongruent, NotConsistent, NotMaximal, TypeMismatch, check_schedule, compose,
    congruence_schedule, implies, induced_pairing, is_valid, modalities_balance,
    pairing_to_schedule, replay, run_schedule, schedule_from_json, schedule_to_json,
    scheduled_net, step_schedule, synthesize, trace_schedule,
)
from proofsched.search import SearchCapExceeded
from proofsched.translate import ASYNC, SYNC

T = parse_term
ONE = T("1")


def modality_free(s):
    return not s.proof.has_modalities()


@pytest.mark.parametrize("variant", [SYNC, ASYNC])
@pytest.mark.parametrize("p,q", [
    ("a^1 | b^2", "a^1 | b^2"),
    ("a^1 | b^2", "b^2 | a^1"),
    ("a^1.(b^2 | ~c^3) | c^4", "c^4 | a^1.(b^2 | ~c^3)"),
])
def test_congruence_schedule(p, q, variant):
    s = congruence_schedule(T(p), T(q), variant)
    check_schedule(s)
    # source and target variables live in separate namespaces, so "empty" means a renaming
    values = list(s.instantiation.values())
    assert all(isinstance(v, Var) for v in values) and len(set(values)) == len(values)
    assert modality_free(s)
    assert list(replay(T(p), s).steps) == []


def test_reordering_under_a_prefix():
    p, q = T("a^1.(b^2 | ~c^3) | c^4"), T("c^4 | a^1.(~c^3 | b^2)")
    s = congruence_schedule(p, q, ASYNC)
    check_schedule(s)
    assert list(replay(p, s).steps) == []
    # the synchronous type nests the body under the modality, out of reach of axioms
    with pytest.raises(NotCongruent):
        congruence_schedule(p, q, SYNC)


def test_congruence_schedule_rejects_other_classes():
    with pytest.raises(NotCongruent):
        congruence_schedule(T("a^1.b^2"), T("b^2.a^1"))


@pytest.mark.parametrize("variant", [SYNC, ASYNC])
def test_step_schedule(variant):
    p = T("a^1 | ~a^2")
    s = step_schedule(p, (1, 2), variant)
    check_schedule(s)
    assert modality_free(s) and dr_check(s.proof)
    assert congruent(s.target, ONE)
    trace = replay(p, s)
    assert list(trace.steps) == [(1, 2)] and congruent(trace.final, ONE)


def test_step_schedule_needs_an_enabled_pair():
    with pytest.raises(NotEnabled):
        step_schedule(T("a^1.b^2 | ~b^3"), (2, 3))


def test_compose_two_steps():
    p = T("a^1 | ~a^2 | b^3 | ~b^4")
    s1 = step_schedule(p, (1, 2), SYNC)
    s2 = step_schedule(s1.target, (3, 4), SYNC)
    s = compose(s1, s2)
    check_schedule(s)
    assert congruent(s.target, ONE) and sorted(replay(p, s).steps) == [(1, 2), (3, 4)]


def test_compose_with_identity_changes_nothing():
    p = T("a^1 | ~a^2")
    s = step_schedule(p, (1, 2), SYNC)
    same = compose(s, congruence_schedule(s.target, s.target, SYNC))
    a = normalize(scheduled_net(p, s))
    b = normalize(scheduled_net(p, same))
    assert a.pairs == b.pairs and same_net(a.net, b.net)


def test_compose_across_variants_fails():
    p = T("a^1 | ~a^2")
    s = step_schedule(p, (1, 2), SYNC)
    with pytest.raises(TypeMismatch):
        compose(s, congruence_schedule(s.target, s.target, ASYNC))


def test_trace_schedule(p_ex):
    assert congruent(trace_schedule(p_ex, [], SYNC).target, p_ex)
    s = trace_schedule(p_ex, [(9, 5), (1, 0), (2, 6)], SYNC)
    check_schedule(s)
    assert congruent(s.target, T("b^3.~a^4 | a^7.~b^8"))
    r = replay(p_ex, s)
    assert set(r.steps) == {(5, 9), (0, 1), (2, 6)} and congruent(r.final, s.target)
    order = [(3, 5), (1, 4), (2, 6), (7, 0), (9, 8)]
    full = trace_schedule(p_ex, order, ASYNC)
    assert congruent(full.target, ONE)
    assert induced_pairing(p_ex, full) == C2


def test_synthesize_examples():
    assert synthesize(T("a^1 | ~a^2"), ONE, ASYNC) is not None
    assert synthesize(T("a^1.b^2 | ~b^3.~a^4"), ONE, ASYNC) is None
    for variant in (SYNC, ASYNC):
        p = T("a^1.~b^2 | b^3")
        s = synthesize(p, p, variant)
        assert s is not None and is_valid(s)


def test_synthesize_reports_caps_distinctly():
    from proofsched.process import CapExceeded
    with pytest.raises(CapExceeded):
        synthesize(T(P_EX_TEXT), ONE, ASYNC, cap_atoms=4)
    with pytest.raises(SearchCapExceeded):
        synthesize(T("b^1.(~b^2 | ~b^3 | b^4)"), ONE, ASYNC, cap_atoms=40, cap_nodes=5)


@pytest.mark.parametrize("text", ["a^1.b^2 | ~a^3 | ~b^4", "a^1 | ~a^2 | ~a^3.b^4"])
def test_synthesized_schedules_replay_to_their_target(text):
    p = T(text)
    for c, q in reachable_terms(p).items():
        s = synthesize(p, q, SYNC, cap_atoms=40)
        assert s is not None and modality_free(s) and dr_check(s.proof)
        r = run_schedule(p, s)
        # types carry no locations: the schedule may consume a different copy of ~a
        assert shape(r.trace.final) == shape(q)


def test_pairing_roundtrip(p_ex):
    assert induced_pairing(p_ex, pairing_to_schedule(p_ex, C2)) == C2
    assert induced_pairing(p_ex, pairing_to_schedule(p_ex, C3)) == C3
    with pytest.raises(NotConsistent):
        pairing_to_schedule(p_ex, C1)
    with pytest.raises(NotMaximal):
        pairing_to_schedule(p_ex, make_pairing([(9, 5)]))
    p = T("a^1 | ~a^2")
    s = pairing_to_schedule(p, make_pairing([(1, 2)]))
    assert induced_pairing(p, s) == {(1, 2)}
    assert len(s.proof.links) == len(step_schedule(p, (1, 2), ASYNC).proof.links)


def test_induced_pairing_does_not_depend_on_the_order(p_ex):
    s = pairing_to_schedule(p_ex, C3)
    net = scheduled_net(p_ex, s)
    for order in ("lowest", "highest"):
        assert frozenset(normalize(net, order).pairs) == C3


def test_asynchrony_witness():
    # an action may be scheduled before the prefix guarding it has fired
    p, q = T("a^1.(b^2 | ~b^3)"), T("a^1")
    assert implies(p, q)
    assert all(c != canonicalize(q) for _, c in reachable(p))
    assert synthesize(p, q, SYNC) is None


def test_crossed_prefixes_do_not_commute():
    # the two a-modalities of u.a | v.~a can only meet through an axiom that
    # closes a cycle with the u and v axioms, so no schedule exists
    p, q = T("u^1.a^2 | v^3.~a^4"), T("u^1 | v^3")
    assert synthesize(p, q, ASYNC, cap_atoms=40, screen=False) is None


def test_implication_under_a_prefix():
    assert implies(T("a^1.(b^2 | ~b^3)"), T("a^1"))
    assert implies(T("a^1 | ~a^2"), ONE)


def test_modalities_balance():
    assert modalities_balance(T("a^1 | ~a^2 | b^3"), T("b^3"))
    assert not modalities_balance(T("a^1 | a^2"), ONE)
    assert not modalities_balance(T("a^1"), T("a^1 | ~a^2 | a^3"))


@pytest.mark.parametrize("seed", range(3))
def test_screen_agrees_with_the_full_search(seed):
    rng = random.Random(seed)
    terms = all_terms(3)
    for _ in range(8):
        p, q = rng.choice(terms), rng.choice(terms)
        with_screen = synthesize(p, q, ASYNC, cap_atoms=40)
        without = synthesize(p, q, ASYNC, cap_atoms=40, screen=False)
        assert (with_screen is None) == (without is None)


def test_json_roundtrip(p_ex):
    s = pairing_to_schedule(p_ex, C2)
    data = schedule_to_json(s)
    assert data["format"] == 1
    back = schedule_from_json(data)
    assert schedule_to_json(back) == data
    assert induced_pairing(p_ex, back) == C2


def test_step_lemma_for_async():
    # whenever a term reaches 1 asynchronously, some enabled step keeps that property
    for p in all_terms(3):
        if synthesize(p, ONE, ASYNC, cap_atoms=40) is None or not enabled_pairs(p):
            continue
        assert any(synthesize(step(p, *pair), ONE, ASYNC, cap_atoms=40) is not None
                   for pair in sorted(enabled_pairs(p)))


def test_run_schedule_reorders_async_pairs(p_ex):
    r = run_schedule(p_ex, pairing_to_schedule(p_ex, C3))
    assert congruent(execute(p_ex, r.trace.steps).final, ONE)
