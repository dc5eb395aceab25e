"""Term families for exhaustive and seeded random testing."""

from __future__ import annotations

import random
from functools import lru_cache

from .process import NEG, POS, Prefix, Term, Unit, canonicalize, erase_locations, par

LABELS = tuple((c, s) for c in ("a", "b") for s in (POS, NEG))


def _labels(channels) -> tuple:
    return tuple((c, s) for c in channels for s in (POS, NEG))


@lru_cache(maxsize=None)
def _forests(n: int, labels: tuple) -> frozenset:
    """Multisets of labelled trees with ``n`` nodes, as sorted tuples."""
    if n == 0:
        return frozenset({()})
    out = set()
    for k in range(1, n + 1):
        for tree in _trees(k, labels):
            for rest in _forests(n - k, labels):
                out.add(tuple(sorted((tree,) + rest)))
    return frozenset(out)


@lru_cache(maxsize=None)
def _trees(n: int, labels: tuple) -> frozenset:
    return frozenset((lab, f) for lab in labels for f in _forests(n - 1, labels))


def _to_term(forest, counter) -> Term:
    parts = []
    for (name, sign), body in forest:
        counter[0] += 1
        loc = counter[0]
        parts.append(Prefix(name, sign, loc, _to_term(body, counter)))
    return par(*parts) if parts else Unit()


def all_terms(max_prefixes: int, channels=("a", "b")) -> list[Term]:
    """One term per congruence class (locations aside) with at most ``max_prefixes`` prefixes.

    Locations are ``1..n`` in left-to-right order.
    """
    labels = _labels(channels)
    out = []
    for n in range(max_prefixes + 1):
        for forest in sorted(_forests(n, labels)):
            out.append(_to_term(forest, [0]))
    return out


def random_term(rng: random.Random, max_prefixes: int, channels=("a", "b"),
                unit_weight: float = 0.2) -> Term:
    """A random term with at most ``max_prefixes`` prefixes, locations ``1..n``."""
    n = rng.randint(0, max_prefixes)
    labels = _labels(channels)
    counter = [0]

    def forest(budget: int) -> Term:
        if budget == 0:
            return Unit()
        parts = []
        while budget > 0:
            size = rng.randint(1, budget)
            budget -= size
            name, sign = rng.choice(labels)
            counter[0] += 1
            loc = counter[0]
            parts.append(Prefix(name, sign, loc, forest(size - 1)))
        if rng.random() < unit_weight:
            parts.insert(rng.randrange(len(parts) + 1), Unit())
        rng.shuffle(parts)
        return par(*parts)

    return forest(n)


def shape(p: Term) -> tuple:
    """Congruence class with locations erased."""
    return erase_locations(canonicalize(p))
