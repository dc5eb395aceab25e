"""Multiplicative CCS: located terms, structural congruence, execution, pairings.

Terms are built from the inactive process ``1``, binary parallel composition and
polarized action prefixes.  Every prefix carries a location (a non-negative
integer) that is unique in the term.  Text syntax::

    a^1.c^2 | b^3.~a^4 | ~b^5.~c^6

Prefixing binds tighter than ``|``; a bare action ``a`` abbreviates ``a.1``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

POS = 1
NEG = -1

Pair = tuple[int, int]
Pairing = frozenset  # frozenset[Pair], each pair stored as (min, max)


class ProcessError(Exception):
    pass


class ParseError(ProcessError):
    def __init__(self, message: str, text: str, offset: int):
        line = text.count("\n", 0, offset) + 1
        column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnknownLocation(ProcessError, KeyError):
    def __str__(self):
        return f"unknown location {self.args[0]}"


class NotEnabled(ProcessError):
    def __init__(self, pair, reason: str, index: int | None = None):
        where = "" if index is None else f" at step {index}"
        super().__init__(f"pair {tuple(pair)} not enabled{where}: {reason}")
        self.pair = tuple(pair)
        self.index = index
        self.reason = reason


class InvalidPairing(ProcessError):
    pass


class CapExceeded(ProcessError):
    pass


class MismatchedInitial(ProcessError):
    pass


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Unit:
    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Parallel:
    left: "Term"
    right: "Term"

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Prefix:
    name: str
    polarity: int
    location: int
    body: "Term" = Unit()

    def __str__(self):
        return format_term(self)


Term = Union[Unit, Parallel, Prefix]


def par(*terms: Term) -> Term:
    """Left-associated parallel composition; the empty composition is ``1``."""
    if not terms:
        return Unit()
    result = terms[0]
    for t in terms[1:]:
        result = Parallel(result, t)
    return result


def components(p: Term) -> list[Term]:
    """Top-level leaves of the parallel tree: prefixes and literal units."""
    if isinstance(p, Parallel):
        return components(p.left) + components(p.right)
    return [p]


def prefixes(p: Term) -> Iterator[Prefix]:
    """All prefix occurrences, in left-to-right order."""
    if isinstance(p, Parallel):
        yield from prefixes(p.left)
        yield from prefixes(p.right)
    elif isinstance(p, Prefix):
        yield p
        yield from prefixes(p.body)


def locations(p: Term) -> frozenset[int]:
    return frozenset(q.location for q in prefixes(p))


def _prefix_at(p: Term, loc: int) -> Prefix:
    for q in prefixes(p):
        if q.location == loc:
            return q
    raise UnknownLocation(loc)


def subject(p: Term, loc: int) -> str:
    return _prefix_at(p, loc).name


def polarity(p: Term, loc: int) -> int:
    return _prefix_at(p, loc).polarity


def top_level(p: Term) -> list[Prefix]:
    return [c for c in components(p) if isinstance(c, Prefix)]


def simplify_units(p: Term) -> Term:
    """Drop units from parallel compositions (not under prefixes)."""
    if isinstance(p, Parallel):
        left, right = simplify_units(p.left), simplify_units(p.right)
        if isinstance(left, Unit):
            return right
        if isinstance(right, Unit):
            return left
        return Parallel(left, right)
    return p


def check_term(p: Term) -> None:
    seen = set()
    for q in prefixes(p):
        if not re.fullmatch(r"[a-z][a-zA-Z0-9_]*", q.name):
            raise ProcessError(f"bad channel name {q.name!r}")
        if q.polarity not in (POS, NEG):
            raise ProcessError(f"bad polarity {q.polarity!r}")
        if q.location in seen:
            raise ProcessError(f"location {q.location} occurs twice")
        seen.add(q.location)


# -- orders ------------------------------------------------------------------

class Order:
    """A finite strict partial order given by the set of elements above each one."""

    def __init__(self, above: dict[int, frozenset[int]]):
        self.above = above

    @property
    def elements(self) -> frozenset[int]:
        return frozenset(self.above)

    def less(self, a: int, b: int) -> bool:
        return b in self.above.get(a, ())

    def leq(self, a: int, b: int) -> bool:
        return a == b or self.less(a, b)

    def strict_pairs(self) -> frozenset[Pair]:
        return frozenset((a, b) for a, ups in self.above.items() for b in ups)

    def covering_pairs(self) -> frozenset[Pair]:
        return frozenset(
            (a, b)
            for a, b in self.strict_pairs()
            if not any(self.less(a, c) and self.less(c, b) for c in self.above)
        )

    def minimal(self) -> frozenset[int]:
        below = {b for ups in self.above.values() for b in ups}
        return frozenset(self.above) - below

    def restrict(self, keep: Iterable[int]) -> "Order":
        keep = frozenset(keep)
        return Order({a: self.above[a] & keep for a in self.above if a in keep})

    def includes(self, other: "Order") -> bool:
        """True when every strict relation of ``other`` also holds here."""
        return other.strict_pairs() <= self.strict_pairs()

    def __eq__(self, other):
        return isinstance(other, Order) and self.above == other.above

    def __repr__(self):
        return f"Order({sorted(self.strict_pairs())})"


def action_order(p: Term) -> Order:
    above: dict[int, frozenset[int]] = {}
    for q in prefixes(p):
        above[q.location] = locations(q.body)
    return Order(above)


# -- congruence ----------------------------------------------------------------

def canonicalize(p: Term) -> tuple:
    """Normal form for structural congruence: a sorted tuple of prefix nodes.

    A prefix node is ``(name, polarity, canonical body, location)``; the unit is
    the empty tuple.
    """
    return tuple(sorted(_canon_nodes(p)))


def _canon_nodes(p: Term) -> list:
    if isinstance(p, Unit):
        return []
    if isinstance(p, Parallel):
        return _canon_nodes(p.left) + _canon_nodes(p.right)
    return [(p.name, p.polarity, canonicalize(p.body), p.location)]


def congruent(p: Term, q: Term) -> bool:
    return canonicalize(p) == canonicalize(q)


def from_canonical(c: tuple) -> Term:
    return par(*(Prefix(n, s, loc, from_canonical(body)) for n, s, body, loc in c))


def erase_locations(c: tuple) -> tuple:
    """Canonical form with locations forgotten (an unlocated congruence class)."""
    return tuple(sorted((n, s, erase_locations(b)) for n, s, b, _ in c))


# -- execution -----------------------------------------------------------------

def norm_pair(a: int, b: int) -> Pair:
    return (a, b) if a <= b else (b, a)


def make_pairing(pairs: Iterable) -> Pairing:
    out = set()
    seen = set()
    for a, b in pairs:
        if a == b or a in seen or b in seen:
            raise InvalidPairing(f"pairs overlap at {(a, b)}")
        seen.update((a, b))
        out.add(norm_pair(a, b))
    return frozenset(out)


def step(p: Term, l: int, m: int) -> Term:
    """Synchronize the top-level prefixes at ``l`` and ``m``."""
    tops = {q.location: q for q in top_level(p)}
    for loc in (l, m):
        if loc not in tops:
            if loc in locations(p):
                raise NotEnabled((l, m), f"location {loc} is guarded")
            raise NotEnabled((l, m), f"unknown location {loc}")
    a, b = tops[l], tops[m]
    if l == m or a.name != b.name:
        raise NotEnabled((l, m), "subjects differ")
    if a.polarity == b.polarity:
        raise NotEnabled((l, m), "same polarity")
    return simplify_units(_release(p, {l, m}))


def _release(p: Term, locs: set[int]) -> Term:
    if isinstance(p, Parallel):
        return Parallel(_release(p.left, locs), _release(p.right, locs))
    if isinstance(p, Prefix) and p.location in locs:
        return p.body
    return p


def enabled_pairs(p: Term) -> frozenset[Pair]:
    tops = top_level(p)
    return frozenset(
        norm_pair(a.location, b.location)
        for a, b in itertools.combinations(tops, 2)
        if a.name == b.name and a.polarity != b.polarity
    )


@dataclass(frozen=True)
class ExecutionTrace:
    initial: Term
    steps: tuple[Pair, ...]
    final: Term

    @property
    def pairing(self) -> Pairing:
        return make_pairing(self.steps)


def execute(p: Term, steps: Iterable) -> ExecutionTrace:
    current = p
    done = []
    for i, (l, m) in enumerate(steps):
        try:
            current = step(current, l, m)
        except NotEnabled as exc:
            raise NotEnabled((l, m), exc.reason, index=i) from None
        done.append(norm_pair(l, m))
    return ExecutionTrace(p, tuple(done), current)


def reachable_terms(p: Term) -> dict[Pairing, Term]:
    """Every pairing ``c`` with ``p ->*_c q``, mapped to a representative ``q``."""
    found: dict[Pairing, Term] = {frozenset(): p}
    stack = [frozenset()]
    while stack:
        c = stack.pop()
        q = found[c]
        for pair in sorted(enabled_pairs(q)):
            d = c | {pair}
            if d not in found:
                found[d] = step(q, *pair)
                stack.append(d)
    return found


def reachable(p: Term) -> set[tuple[Pairing, tuple]]:
    return {(c, canonicalize(q)) for c, q in reachable_terms(p).items()}


# -- pairings ------------------------------------------------------------------

def check_pairing(p: Term, c: Pairing) -> None:
    locs = locations(p)
    seen = set()
    for a, b in c:
        for x in (a, b):
            if x not in locs:
                raise InvalidPairing(f"location {x} not in term")
            if x in seen:
                raise InvalidPairing(f"location {x} paired twice")
            seen.add(x)
        if a == b:
            raise InvalidPairing(f"fixed point {a}")
        if subject(p, a) != subject(p, b):
            raise InvalidPairing(f"subjects differ in {(a, b)}")
        if polarity(p, a) == polarity(p, b):
            raise InvalidPairing(f"same polarity in {(a, b)}")


def enumerate_pairings(p: Term, total_only: bool = False, cap: int = 24) -> set[Pairing]:
    pre = list(prefixes(p))
    if len(pre) > cap:
        raise CapExceeded(f"{len(pre)} locations exceed the cap of {cap}")
    info = {q.location: (q.name, q.polarity) for q in pre}
    order = sorted(info)
    results: set[Pairing] = set()

    def go(i: int, used: frozenset, acc: list):
        while i < len(order) and order[i] in used:
            i += 1
        if i == len(order):
            results.add(frozenset(acc))
            return
        loc = order[i]
        name, sign = info[loc]
        if not total_only:
            go(i + 1, used | {loc}, acc)
        for other in order[i + 1:]:
            if other not in used and info[other] == (name, -sign):
                go(i + 1, used | {loc, other}, acc + [norm_pair(loc, other)])

    go(0, frozenset(), [])
    return results


@dataclass(frozen=True)
class Consistency:
    ok: bool
    unclosed: int | None = None
    cycle: tuple[int, ...] | None = None

    def __bool__(self):
        return self.ok


def is_consistent(p: Term, c: Pairing) -> Consistency:
    check_pairing(p, c)
    order = action_order(p)
    dom = {x for pair in c for x in pair}
    for x in sorted(dom):
        for y in order.above:
            if order.less(y, x) and y not in dom:
                return Consistency(False, unclosed=x)
    cls = {}
    for a, b in c:
        cls[a] = cls[b] = (a, b)
    succ: dict[Pair, set[Pair]] = {k: set() for k in cls.values()}
    for x in dom:
        for y in order.above[x]:
            if y in dom:
                succ[cls[x]].add(cls[y])
    cycle = _find_cycle(succ)
    if cycle is not None:
        return Consistency(False, cycle=tuple(x for k in cycle for x in k))
    return Consistency(True)


def _find_cycle(succ: dict) -> list | None:
    white, grey, black = 0, 1, 2
    colour = {k: white for k in succ}
    path: list = []

    def visit(k):
        colour[k] = grey
        path.append(k)
        for n in sorted(succ[k]):
            if colour[n] == grey:
                return path[path.index(n):]
            if colour[n] == white:
                found = visit(n)
                if found is not None:
                    return found
        path.pop()
        colour[k] = black
        return None

    for k in sorted(succ):
        if colour[k] == white:
            found = visit(k)
            if found is not None:
                return found
    return None


def maximal_consistent_subpairings(p: Term, c: Pairing, cap: int = 16) -> set[Pairing]:
    pairs = sorted(c)
    if len(pairs) > cap:
        raise CapExceeded(f"{len(pairs)} pairs exceed the cap of {cap}")
    kept: list[frozenset] = []
    for size in range(len(pairs), -1, -1):
        for sub in itertools.combinations(pairs, size):
            s = frozenset(sub)
            if any(s < k for k in kept):
                continue
            if is_consistent(p, s):
                kept.append(s)
    return set(kept)


def is_maximal_consistent(p: Term, c: Pairing) -> bool:
    if not is_consistent(p, c):
        return False
    used = {x for pair in c for x in pair}
    free = [q for q in prefixes(p) if q.location not in used]
    for a, b in itertools.combinations(free, 2):
        if a.name == b.name and a.polarity != b.polarity:
            if is_consistent(p, c | {norm_pair(a.location, b.location)}):
                return False
    return True


def executable_orderings(p: Term, c: Pairing) -> Iterator[tuple[Pair, ...]]:
    """Orderings of ``c`` accepted by :func:`execute`, lexicographically."""
    pairs = sorted(c)

    def go(q: Term, rest: list, acc: tuple):
        if not rest:
            yield acc
            return
        enabled = enabled_pairs(q)
        for i, pair in enumerate(rest):
            if pair in enabled:
                yield from go(step(q, *pair), rest[:i] + rest[i + 1:], acc + (pair,))

    yield from go(p, pairs, ())


def permutation_equivalent(t1: ExecutionTrace, t2: ExecutionTrace) -> bool:
    if not congruent(t1.initial, t2.initial):
        raise MismatchedInitial("traces start from different congruence classes")
    if set(t1.steps) != set(t2.steps):
        return False
    if not congruent(t1.final, t2.final):
        raise AssertionError("same pairing reached non-congruent terms")
    return True


# -- text ----------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<nat>\d+)|(?P<name>[a-zA-Z_][a-zA-Z0-9_]*)|(?P<sym>[|.()~^]))")


class _TermParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos == len(text):
                break
            m = _TOKEN.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("eof", "", len(text)))
        self.i = 0
        self.count = 0
        self.slots: list[tuple[Prefix, int | None, int]] = []

    def peek(self):
        return self.tokens[self.i]

    def take(self, value: str | None = None, kind: str | None = None):
        tok = self.tokens[self.i]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value or kind
            raise ParseError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", self.text, tok[2])
        self.i += 1
        return tok

    def process(self):
        left = self.primary()
        while self.peek()[1] == "|":
            self.take("|")
            left = Parallel(left, self.primary())
        return left

    def primary(self):
        kind, value, pos = self.peek()
        if value == "(":
            self.take("(")
            inner = self.process()
            self.take(")")
            return inner
        if kind == "nat" and value == "1":
            self.take()
            return Unit()
        if value == "~" or kind == "name":
            return self.prefix()
        raise ParseError(f"unexpected {value or 'end of input'!r}", self.text, pos)

    def prefix(self):
        sign = POS
        if self.peek()[1] == "~":
            self.take("~")
            sign = NEG
        _, name, pos = self.take(kind="name")
        if not re.fullmatch(r"[a-z][a-zA-Z0-9_]*", name):
            raise ParseError(f"bad channel name {name!r}", self.text, pos)
        tag = None
        if self.peek()[1] == "^":
            self.take("^")
            tag = int(self.take(kind="nat")[1])
        index = self.count
        self.count += 1
        body: Term = Unit()
        if self.peek()[1] == ".":
            self.take(".")
            body = self.primary()
        node = Prefix(name, sign, -1 - index, body)
        self.slots.append((node, tag, pos))
        return node


def parse_term(text: str) -> Term:
    """Parse a term; untagged prefixes get their left-to-right index as location."""
    parser = _TermParser(text)
    term = parser.process()
    tok = parser.peek()
    if tok[0] != "eof":
        raise ParseError(f"trailing input {tok[1]!r}", text, tok[2])
    explicit = {}
    for _, tag, pos in parser.slots:
        if tag is not None:
            if tag in explicit:
                raise ParseError(f"location {tag} used twice", text, pos)
            explicit[tag] = pos
    mapping = {}
    for node, tag, pos in parser.slots:
        index = -1 - node.location
        loc = tag if tag is not None else index
        if tag is None and loc in explicit:
            raise ParseError(f"implicit location {loc} collides with an explicit tag", text, pos)
        mapping[node.location] = loc
    return _relocate(term, mapping)


def _relocate(p: Term, mapping: dict[int, int]) -> Term:
    if isinstance(p, Parallel):
        return Parallel(_relocate(p.left, mapping), _relocate(p.right, mapping))
    if isinstance(p, Prefix):
        return Prefix(p.name, p.polarity, mapping[p.location], _relocate(p.body, mapping))
    return p


def format_term(p: Term) -> str:
    if isinstance(p, Unit):
        return "1"
    if isinstance(p, Parallel):
        right = format_term(p.right)
        if isinstance(p.right, Parallel):
            right = f"({right})"
        return f"{format_term(p.left)} | {right}"
    act = ("~" if p.polarity == NEG else "") + f"{p.name}^{p.location}"
    if isinstance(p.body, Unit):
        return act
    body = format_term(p.body)
    if isinstance(p.body, Parallel):
        body = f"({body})"
    return f"{act}.{body}"


def format_pairing(c: Iterable[Pair]) -> list[list[int]]:
    """JSON-ready form: sorted list of sorted two-element lists."""
    return [list(pair) for pair in sorted(norm_pair(*pair) for pair in c)]
