import pytest

from conftest import P_EX_TEXT
from proofsched.formula import format_formula, parse_formula, var_occurrences
from proofsched.net import NetBuilder, cut_step, dr_check, proof_order, same_net
from proofsched.process import action_order, congruent, parse_term, polarity, subject
from proofsched.schedule import scheduled_net, trace_schedule
from proofsched.translate import (
    ASYNC, SYNC, EnumerationCapExceeded, Incompatible, compatible, enumerate_cutfree_proofs,
    extract_term, fresh_variables, modality_paths, proof_assign, restrict_term, ttype,
)

T, F = parse_term, parse_formula


@pytest.mark.parametrize("variant,term,expected", [
    (SYNC, "1", "v0^ @ v0"),
    (SYNC, "a^1", "<a>+ (v1^ @ ((v0^ @ v0) * v1))"),
    (SYNC, "~a^1", "(<a>- ((v0^ @ v0) * v1^)) @ v1"),
    (ASYNC, "1", "v0^ @ v0"),
    (ASYNC, "a^1", "<a>+ v1^ @ ((v0^ @ v0) * v1)"),
    (ASYNC, "~a^1", "((v0^ @ v0) * v1^) @ <a>- v1"),
])
def test_type_assignment(variant, term, expected):
    assert ttype(T(term), variant) == F(expected)


@pytest.mark.parametrize("variant", [SYNC, ASYNC])
def test_fresh_variables_occur_twice_once_per_polarity(variant):
    p = T(P_EX_TEXT)
    f = ttype(p, variant)
    names = fresh_variables(p, variant)
    occ = [(type(o).__name__, o.name) for o in var_occurrences(f)]
    for v in names:
        assert sorted(k for k, n in occ if n == v) == ["DualVar", "Var"]
    assert len(occ) == 2 * len(names)


def test_unit_proof():
    typed = proof_assign(T("1"), SYNC)
    kinds = sorted(l.kind for l in typed.proof.links.values())
    assert kinds == ["ax", "par"] and dr_check(typed.proof)
    assert typed.proof.conclusion_formulas() == (typed.type,)


@pytest.mark.parametrize("variant", [SYNC, ASYNC])
def test_modality_links_mirror_prefixes(variant):
    p = T(P_EX_TEXT)
    net = proof_assign(p, variant).proof
    assert net.locations() == frozenset(range(10))
    for loc in range(10):
        assert net.subject(loc) == subject(p, loc) and net.polarity(loc) == polarity(p, loc)
    assert net.is_cut_free() and dr_check(net)


def test_sync_proof_order_is_the_action_order():
    p = T(P_EX_TEXT)
    assert proof_order(proof_assign(p, SYNC).proof) == action_order(p)
    assert proof_order(proof_assign(T("a^1.b^2"), SYNC).proof).strict_pairs() == {(1, 2)}


@pytest.mark.parametrize("variant", [SYNC, ASYNC])
def test_enumeration_finds_the_assigned_proof_only(variant):
    p = T("a^1 | ~a^2")
    f = ttype(p, variant)
    found = enumerate_cutfree_proofs(f, locations_by_path=modality_paths(p, variant))
    assert len(found) == 1 and same_net(found[0], proof_assign(p, variant).proof)


def test_enumeration_small_cases():
    assert len(enumerate_cutfree_proofs(F("v0^ @ v0"))) == 1
    assert enumerate_cutfree_proofs(F("v0 * v0^")) == []
    with pytest.raises(EnumerationCapExceeded):
        enumerate_cutfree_proofs(ttype(T(P_EX_TEXT)), cap=4)


def test_compatibility():
    p = T(P_EX_TEXT)
    net = proof_assign(p, SYNC).proof
    assert compatible(p, net) and congruent(extract_term(p, net), p)
    assert compatible(T("a^1 | b^2"), proof_assign(T("a^1.b^2"), SYNC).proof)
    reversed_net = proof_assign(T("b^2.a^1"), SYNC).proof
    assert not compatible(T("a^1.b^2"), reversed_net)
    with pytest.raises(Incompatible):
        extract_term(T("a^1.b^2"), reversed_net)


def test_extraction_of_a_modality_free_net_is_the_unit():
    b = NetBuilder()
    n, q = b.axiom(F("x"))
    net = b.build([b.par(n, q)])
    assert congruent(extract_term(T("a^1 | ~a^2"), net), T("1"))


def test_extraction_after_eliminating_one_pair():
    p = T(P_EX_TEXT)
    net = scheduled_net(p, trace_schedule(p, [(1, 0), (9, 5), (2, 6)], SYNC))
    seen = None
    while net.cuts():
        net, event = cut_step(net, net.cuts()[0].id)
        if event.pair == (0, 1):
            seen = extract_term(p, net)
            break
    assert seen is not None
    assert congruent(seen, T("c^2 | b^3.~a^4 | ~b^5.~c^6 | a^7.~b^8 | b^9"))


def test_restrict_term_keeps_the_order():
    p = T("a^1.(b^2 | c^3.d^4)")
    assert congruent(restrict_term(p, {2, 3, 4}), T("b^2 | c^3.d^4"))


def test_type_printing_is_stable():
    assert format_formula(ttype(T("1"), SYNC)) == "v0^ @ v0"
