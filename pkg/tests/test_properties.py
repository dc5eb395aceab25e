import itertools
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from proofsched.formula import (
    DualVar, ModNeg, ModPos, Par, Tensor, Var, format_formula, negate, parse_formula,
    substitute,
)
from proofsched.generate import random_term
from proofsched.net import dr_check, normalize, same_net, strategy
from proofsched.process import (
    Parallel, Prefix, Unit, canonicalize, congruent, enabled_pairs, enumerate_pairings, execute,
    format_term, is_consistent, locations, parse_term, step,
)
from proofsched.translate import ASYNC, SYNC, proof_assign

seeds = st.integers(min_value=0, max_value=10 ** 6)


def term(seed, size=5):
    return random_term(random.Random(seed), size)


def shuffle(p, rng):
    """A congruent term: commute, reassociate and pad with units at random positions."""
    if isinstance(p, Prefix):
        return Prefix(p.name, p.polarity, p.location, shuffle(p.body, rng))
    if isinstance(p, Parallel):
        left, right = shuffle(p.left, rng), shuffle(p.right, rng)
        if rng.random() < 0.5:
            left, right = right, left
        if isinstance(right, Parallel) and rng.random() < 0.5:
            return Parallel(Parallel(left, right.left), right.right)
        return Parallel(left, right)
    return Parallel(p, Unit()) if rng.random() < 0.3 else p


@given(seeds, seeds)
def test_congruence_is_invariant_under_rewrites(s1, s2):
    p = term(s1)
    q = shuffle(p, random.Random(s2))
    assert canonicalize(p) == canonicalize(q)


@given(seeds)
def test_terms_print_and_parse_back(seed):
    p = term(seed)
    assert parse_term(format_term(p)) == p


@given(seeds)
def test_steps_conserve_locations(seed):
    p = term(seed, 6)
    for l, m in enabled_pairs(p):
        q = step(p, l, m)
        assert locations(q) == locations(p) - {l, m}
        assert congruent(step(p, m, l), q)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_consistency_is_executability(seed):
    p = term(seed, 6)
    for c in enumerate_pairings(p):
        finals = []
        for order in itertools.permutations(sorted(c)):
            try:
                finals.append(execute(p, order).final)
            except Exception:
                continue
        assert bool(is_consistent(p, c)) == bool(finals)
        assert all(congruent(f, finals[0]) for f in finals)


def formulas():
    atoms = st.sampled_from(["x", "y", "z"]).flatmap(
        lambda n: st.sampled_from([Var(n), DualVar(n)]))
    return st.recursive(atoms, lambda sub: st.one_of(
        st.builds(Tensor, sub, sub),
        st.builds(Par, sub, sub),
        st.builds(ModPos, st.sampled_from("ab"), sub),
        st.builds(ModNeg, st.sampled_from("ab"), sub),
    ), max_leaves=8)


@given(formulas())
def test_negation_is_an_involution(f):
    assert negate(negate(f)) == f


@given(formulas(), formulas())
def test_substitution_commutes_with_negation(f, g):
    sigma = {"x": g}
    assert substitute(negate(f), sigma) == negate(substitute(f, sigma))


@given(formulas())
def test_formulas_print_and_parse_back(f):
    assert parse_formula(format_formula(f)) == f


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([SYNC, ASYNC]))
def test_assigned_proofs_are_correct_both_ways(seed, variant):
    net = proof_assign(term(seed), variant).proof
    assert dr_check(net, "contraction") and dr_check(net, "switchings")


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_normalization_is_confluent(seed):
    from proofsched.schedule import pairing_to_schedule, scheduled_net
    from proofsched.process import is_maximal_consistent
    p = term(seed, 4)
    pairings = sorted((c for c in enumerate_pairings(p) if is_maximal_consistent(p, c)), key=sorted)
    net = scheduled_net(p, pairing_to_schedule(p, pairings[0]))
    a = normalize(net, "lowest")
    for order in (strategy("highest"), strategy("random", seed)):
        b = normalize(net, order)
        assert same_net(a.net, b.net) and sorted(a.pairs) == sorted(b.pairs)
