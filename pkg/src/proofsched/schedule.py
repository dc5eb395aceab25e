"""Schedules: modality-free MLL proofs of ``[P] -o [Q]``.

Variables of the source type are named ``v<k>`` and may be instantiated;
variables of the target type are named ``w<k>`` and are held rigid.  Source
variables that a proof leaves unconstrained are closed with fresh rigid names
``u<k>``, so a schedule's instantiation is always total and closed.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .formula import (
    ATOMS, BINARY, Formula, Tensor, Var, format_formula, lollipop, parse_formula, substitute, variables,
)
from .net import (
    PAR, NetBuilder, ProofStructure, check_structure, dr_check, from_json,
    instantiate, normalize, reduction_sequence, strategy, to_json,
)
from .process import (
    NEG, POS, CapExceeded, ExecutionTrace, NotEnabled, Pair, Pairing, Parallel, Prefix,
    ProcessError, Term, check_pairing, congruent, enabled_pairs, execute,
    executable_orderings, format_term, is_consistent, is_maximal_consistent, parse_term, prefixes,
    _release, simplify_units, step,
)
from .search import Search, generalized_atoms
from .translate import ASYNC, SYNC, VARIANTS, fresh_variables, proof_assign, restrict_term, ttype

SOURCE, TARGET, FREE = "v", "w", "u"
FORMAT_VERSION = 1
DEFAULT_CAP_ATOMS = 12
DEFAULT_CAP_NODES = 200_000


class ScheduleError(ProcessError):
    pass


class NotCongruent(ScheduleError):
    pass


class TypeMismatch(ScheduleError):
    pass


class NotConsistent(ScheduleError):
    pass


class NotMaximal(ScheduleError):
    pass


class NotExecutable(ScheduleError):
    """Cut elimination consumed pairs that no execution order can replay."""


@dataclass(frozen=True, eq=False)
class Schedule:
    variant: str
    source: Term
    target: Term
    proof: ProofStructure
    instantiation: dict = field(default_factory=dict)

    @property
    def conclusion(self) -> Formula:
        return schedule_type(self.source, self.target, self.variant, self.instantiation)


def schedule_type(p: Term, q: Term, variant: str, sigma=None) -> Formula:
    return lollipop(substitute(ttype(p, variant, SOURCE), sigma or {}), ttype(q, variant, TARGET))


def check_schedule(s: Schedule) -> None:
    """Raise ``ScheduleError`` unless ``s`` is a well-typed, correct, modality-free proof."""
    if s.variant not in VARIANTS:
        raise ScheduleError(f"unknown variant {s.variant!r}")
    if s.proof.has_modalities():
        raise ScheduleError("schedule uses modality links")
    check_structure(s.proof)
    result = dr_check(s.proof)
    if not result:
        raise ScheduleError(f"not a proof net: {result.reason}")
    if s.proof.conclusion_formulas() != (s.conclusion,):
        raise ScheduleError("conclusion does not match the schedule type")
    source_vars = set(fresh_variables(s.source, s.variant, SOURCE))
    if set(s.instantiation) != source_vars:
        raise ScheduleError("instantiation must cover exactly the source variables")
    for f in s.instantiation.values():
        if any(n.startswith(SOURCE) for n in variables(f)):
            raise ScheduleError("instantiation is not closed")


def is_valid(s: Schedule) -> bool:
    try:
        check_schedule(s)
    except ScheduleError:
        return False
    return True


# -- search ------------------------------------------------------------------------

def _check_caps(p: Term, q: Term, variant: str, cap_atoms: int) -> None:
    for side, t in (("source", p), ("target", q)):
        n = generalized_atoms(ttype(t, variant))
        if n > cap_atoms:
            raise CapExceeded(f"{side} has {n} generalized atoms, above the cap of {cap_atoms}")


def _search(p: Term, q: Term, variant: str, sigma0: dict, cap_nodes: int) -> Schedule | None:
    goal = lollipop(ttype(p, variant, SOURCE), ttype(q, variant, TARGET))
    found = Search(goal, fresh_variables(p, variant, SOURCE), sigma0, cap_nodes, FREE).run()
    if found is None:
        return None
    return Schedule(variant, p, q, found.proof, found.instantiation)


def modalities_balance(p: Term, q: Term) -> bool:
    """Necessary condition for a schedule from ``p`` to ``q`` in either variant.

    Cutting ``[[P]]`` against a schedule and normalizing gives a cut-free net
    of ``[Q]`` whose modality links are exactly the modalities of ``[Q]``
    (their bodies never form dual pairs, so no axiom can carry them).  The
    other links of ``[[P]]`` cancel in dual pairs, so per channel the surplus
    of ``p`` over ``q`` is the same for both polarities and never negative.
    """
    def counts(t: Term) -> Counter:
        return Counter((x.name, x.polarity) for x in prefixes(t))

    cp, cq = counts(p), counts(q)
    for name in {n for n, _ in cp | cq}:
        up, down = cp[name, POS] - cq[name, POS], cp[name, NEG] - cq[name, NEG]
        if up != down or up < 0:
            return False
    return True


def synthesize(p: Term, q: Term, variant: str = SYNC, cap_atoms: int = DEFAULT_CAP_ATOMS,
               cap_nodes: int = DEFAULT_CAP_NODES, screen: bool = True) -> Schedule | None:
    """A schedule from ``p`` to ``q`` found by exhaustive proof search, or ``None``.

    Raises ``CapExceeded`` when either side has more than ``cap_atoms``
    generalized atoms or the search visits more than ``cap_nodes`` states.
    With ``screen`` the search is skipped when ``modalities_balance`` fails.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    _check_caps(p, q, variant, cap_atoms)
    if screen and not modalities_balance(p, q):
        return None
    return _search(p, q, variant, {}, cap_nodes)


def implies(p: Term, q: Term, cap_atoms: int = DEFAULT_CAP_ATOMS,
            cap_nodes: int = DEFAULT_CAP_NODES) -> bool:
    return synthesize(p, q, ASYNC, cap_atoms, cap_nodes) is not None


# -- explicit constructions --------------------------------------------------------

def _components(p: Term, f: Formula) -> list[tuple[Term, Formula]]:
    if isinstance(p, Parallel):
        return _components(p.left, f.left) + _components(p.right, f.right)
    return [(p, f)]


def _walk_renaming(src: Formula, dst: Formula, out: dict) -> None:
    """Map the variables of ``src`` onto those of the same-shaped ``dst``."""
    if isinstance(src, ATOMS):
        out[src.name] = Var(dst.name)
    elif isinstance(src, BINARY):
        _walk_renaming(src.left, dst.left, out)
        _walk_renaming(src.right, dst.right, out)
    else:
        _walk_renaming(src.body, dst.body, out)


def _match_components(pieces, targets, out: dict) -> None:
    """Rename source pieces onto identical target components (by root location)."""
    by_loc = {t.location: (t, f) for t, f in targets if isinstance(t, Prefix)}
    for t, f in pieces:
        if isinstance(t, Prefix) and t.location in by_loc:
            t2, f2 = by_loc.pop(t.location)
            if t2 == t:
                _walk_renaming(f, f2, out)


def congruence_schedule(p: Term, q: Term, variant: str = SYNC,
                        cap_nodes: int = DEFAULT_CAP_NODES) -> Schedule:
    """The structural isomorphism between congruent terms.

    Components are matched by root location and renamed onto each other;
    stray units are left to the search.  In ``sync`` only congruence outside
    prefixes can be proved, so other congruent pairs raise ``NotCongruent``.
    """
    if not congruent(p, q):
        raise NotCongruent(f"{format_term(p)} and {format_term(q)} are not congruent")
    sigma0: dict = {}
    _match_components(_components(p, ttype(p, variant, SOURCE)),
                      _components(q, ttype(q, variant, TARGET)), sigma0)
    s = _search(p, q, variant, sigma0, cap_nodes)
    if s is None:
        raise NotCongruent(f"no {variant} isomorphism: terms differ under a prefix")
    return s


def step_schedule(p: Term, pair: Pair, variant: str = SYNC,
                  cap_nodes: int = DEFAULT_CAP_NODES) -> Schedule:
    """One execution step as a proof, with the instantiation of the step figures.

    For ``a.P1 | ~a.Q1 | R``: in ``sync`` the positive prefix's variable gets
    ``[Q1]`` and the negative one's gets ``[P1] * [Q1]``; in ``async`` both get
    ``[Q1]``.  The variables of ``P1``, ``Q1`` and ``R`` are renamed onto
    their copies in the target.
    """
    l, m = pair
    q = step(p, l, m)
    if variant == ASYNC:
        # units inside the two bodies slow the figure search down; in async they
        # can be dropped first by a congruence proof
        tidy = _simplify_bodies(p)
        if tidy != p:
            return compose(congruence_schedule(p, tidy, variant, cap_nodes),
                           step_schedule(tidy, pair, variant, cap_nodes))
    # the figures keep released units; they are dropped by a congruence afterwards
    raw = _release(p, {l, m})
    fp, fq = ttype(p, variant, SOURCE), ttype(raw, variant, TARGET)
    pieces = _components(p, fp)
    tops = {t.location: (t, f) for t, f in pieces if isinstance(t, Prefix)}
    (pos, fpos), (neg, fneg) = sorted((tops[l], tops[m]), key=lambda tf: -tf[0].polarity)
    sigma0: dict = {}
    flat = []
    for t, f in pieces:
        flat.extend(_body_components(t, f, variant) if t in (pos, neg) else [(t, f)])
    for (_, f), (_, g) in zip(flat, _components(raw, fq)):
        _walk_renaming(f, g, sigma0)
    x = substitute(_body_formula(fpos, POS, variant), sigma0)
    y = substitute(_body_formula(fneg, NEG, variant), sigma0)
    alpha, beta = _prefix_var(fpos, POS, variant), _prefix_var(fneg, NEG, variant)
    if variant == SYNC:
        sigma0[alpha], sigma0[beta] = y, Tensor(x, y)
    else:
        sigma0[alpha], sigma0[beta] = y, y
    s = _search(p, raw, variant, sigma0, cap_nodes)
    if s is None:  # pragma: no cover - the figures always give a proof
        raise ScheduleError(f"no step proof for {pair}")
    if raw != q:
        s = compose(s, congruence_schedule(raw, q, variant, cap_nodes))
    return s


def _simplify_bodies(p: Term) -> Term:
    """Drop units under every prefix, leaving the top level alone."""
    if isinstance(p, Parallel):
        return Parallel(_simplify_bodies(p.left), _simplify_bodies(p.right))
    if isinstance(p, Prefix):
        return Prefix(p.name, p.polarity, p.location, simplify_units(_simplify_bodies(p.body)))
    return p


def _prefix_var(f: Formula, sign: int, variant: str) -> str:
    if variant == SYNC:
        # <a>+ (x^ @ (B * x))   or   (<a>- (B * x^)) @ x
        return f.body.left.name if sign == POS else f.right.name
    # <a>+ x^ @ (B * x)   or   (B * x^) @ <a>- x
    return f.left.body.name if sign == POS else f.right.body.name


def _body_formula(f: Formula, sign: int, variant: str) -> Formula:
    if variant == SYNC:
        return f.body.right.left if sign == POS else f.left.body.left
    return f.right.left if sign == POS else f.left.left


def _body_components(t: Prefix, f: Formula, variant: str):
    return _components(t.body, _body_formula(f, t.polarity, variant))


def _u_vars(s: Schedule) -> set[str]:
    names = set()
    for f in s.proof.wires.values():
        names |= variables(f)
    for f in s.instantiation.values():
        names |= variables(f)
    return {n for n in names if n.startswith(FREE)}


def _open_top(net: ProofStructure, b: NetBuilder) -> tuple[int, int]:
    """Copy ``net`` into ``b`` without its final par; return the two premiss wires."""
    wmap = b.add(net)
    top = wmap[net.conclusions[0]]
    lid = next(k for k, l in b.links.items() if top in l.conclusions)
    link = b.links.pop(lid)
    if link.kind != PAR:
        raise TypeMismatch("schedule conclusion is not introduced by a par")
    del b.wires[top]
    return link.premisses


def compose(s1: Schedule, s2: Schedule, normal: bool = True) -> Schedule:
    """Cut ``s1`` (A -o B) against ``s2`` (B -o C) on ``B``."""
    if s1.variant != s2.variant:
        raise TypeMismatch("cannot compose schedules of different variants")
    if s1.target != s2.source:
        if not congruent(s1.target, s2.source):
            raise TypeMismatch("target of the first schedule is not the source of the second")
        bridge = congruence_schedule(s1.target, s2.source, s1.variant)
        return compose(compose(s1, bridge, normal), s2, normal)
    mid = s1.target
    theta = {w: s2.instantiation[v] for w, v in zip(fresh_variables(mid, s1.variant, TARGET),
                                                     fresh_variables(mid, s1.variant, SOURCE))}
    taken = _u_vars(s2)
    apart = {}
    for n in sorted(_u_vars(s1)):
        k = 0
        while f"{FREE}{k}" in taken:
            k += 1
        taken.add(f"{FREE}{k}")
        apart[n] = Var(f"{FREE}{k}")
    # apply the renaming and theta simultaneously: their domains are disjoint
    both = dict(apart)
    both.update(theta)
    proof1 = instantiate(s1.proof, both)
    b = NetBuilder()
    a1, b1 = _open_top(proof1, b)
    a2, b2 = _open_top(s2.proof, b)
    b.cut(b1, a2)
    net = b.build([b.par(a1, b2)])
    if normal:
        net = normalize(net).net
    sigma = {k: substitute(f, both) for k, f in s1.instantiation.items()}
    return Schedule(s1.variant, s1.source, s2.target, net, sigma)


def trace_schedule(p: Term, trace, variant: str = SYNC) -> Schedule:
    """Compose step schedules along ``trace``; the empty trace gives ``P -o P``."""
    trace = list(trace)
    if not trace:
        return congruence_schedule(p, p, variant)
    current = p
    result = None
    for i, (l, m) in enumerate(trace):
        try:
            s = step_schedule(current, (l, m), variant)
        except NotEnabled as exc:
            raise NotEnabled((l, m), exc.reason, index=i) from None
        current = s.target
        result = s if result is None else compose(result, s)
    return result


# -- replay ------------------------------------------------------------------------

def scheduled_net(p: Term, s: Schedule) -> ProofStructure:
    """``[[P]]`` (instantiated) cut against the schedule; concludes ``[Q]``."""
    if s.source != p and not congruent(s.source, p):
        raise TypeMismatch("schedule is for another source term")
    if s.source != p:
        raise TypeMismatch("schedule source must be the term itself, not a congruent one")
    proc = instantiate(proof_assign(p, s.variant, SOURCE).proof, s.instantiation)
    b = NetBuilder()
    wmap = b.add(proc)
    a, q = _open_top(s.proof, b)
    b.cut(wmap[proc.conclusions[0]], a)
    return b.build([q])


@dataclass
class Replay:
    trace: ExecutionTrace
    emitted: list[Pair]
    net: ProofStructure


def run_schedule(p: Term, s: Schedule, choose="lowest") -> Replay:
    """Normalize the scheduled net and read back an execution.

    In ``sync`` the emitted order is itself an execution.  In ``async`` the
    emitted pairs are put in the least executable order; ``NotExecutable`` is
    raised when there is none.
    """
    result = normalize(scheduled_net(p, s), choose)
    pairs = list(result.pairs)
    try:
        trace = execute(p, pairs)
    except NotEnabled:
        if s.variant == SYNC:
            raise
        order = next(executable_orderings(p, frozenset(pairs)), None)
        if order is None:
            raise NotExecutable(f"pairs {sorted(pairs)} cannot be executed in any order") from None
        trace = execute(p, order)
    return Replay(trace, pairs, result.net)


def replay(p: Term, s: Schedule) -> ExecutionTrace:
    return run_schedule(p, s).trace


def induced_pairing(p: Term, s: Schedule) -> Pairing:
    return frozenset(normalize(scheduled_net(p, s)).pairs)


def pairing_to_schedule(p: Term, c: Pairing) -> Schedule:
    """The async schedule along the least executable ordering of ``c``.

    ``c`` must be maximal consistent.  When it is not total the target is the
    residual term of the execution rather than ``1``.
    """
    c = frozenset(c)
    check_pairing(p, c)
    if not is_consistent(p, c):
        raise NotConsistent("pairing is not consistent")
    if not is_maximal_consistent(p, c):
        raise NotMaximal("pairing is not maximal")
    order = next(executable_orderings(p, c))
    return trace_schedule(p, order, ASYNC)


# -- extraction along cut elimination ---------------------------------------------

@dataclass(frozen=True)
class ExtractionStep:
    kind: str
    pair: Pair | None
    before: Term
    after: Term
    ok: bool


def extraction_steps(p: Term, s: Schedule, choose="lowest") -> list[ExtractionStep]:
    """Term extracted from ``p`` before and after every cut-elimination step.

    A step is ``ok`` when a modality elimination is a valid execution step of
    the extracted term, or any other elimination leaves it congruent.
    """
    if isinstance(choose, str):
        choose = strategy(choose)
    net = scheduled_net(p, s)
    locs = set(net.locations())
    out = []
    for event, _ in reduction_sequence(net, choose):
        before = restrict_term(p, locs)
        if event.pair is not None:
            locs -= set(event.pair)
        after = restrict_term(p, locs)
        if event.pair is None:
            ok = congruent(before, after)
        else:
            ok = event.pair in enabled_pairs(before) and congruent(step(before, *event.pair), after)
        out.append(ExtractionStep(event.kind, event.pair, before, after, ok))
    return out


# -- text ----------------------------------------------------------------------------

def schedule_to_json(s: Schedule) -> dict:
    return {
        "format": FORMAT_VERSION,
        "variant": s.variant,
        "source": format_term(s.source),
        "target": format_term(s.target),
        "proof": to_json(s.proof),
        "instantiation": {k: format_formula(f) for k, f in sorted(s.instantiation.items())},
    }


def schedule_from_json(data: dict | str) -> Schedule:
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("format", FORMAT_VERSION) != FORMAT_VERSION:
        raise ScheduleError(f"unsupported format {data.get('format')!r}")
    return Schedule(
        data["variant"],
        parse_term(data["source"]),
        parse_term(data["target"]),
        from_json(data["proof"]),
        {k: parse_formula(v) for k, v in data["instantiation"].items()},
    )
