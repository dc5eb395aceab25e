"""Proof structures for MLL with action modalities.

A structure is a set of links joined by wires.  Each wire is produced by
exactly one link and consumed by at most one; unconsumed wires are the
conclusions.  Wire formulas are the typing truth.  Cuts are explicit links with
two premisses and no conclusion.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator

from .formula import (
    BINARY, MODAL, DualVar, Formula, ModNeg, ModPos, Par, Tensor, Var,
    format_formula, negate, parse_formula, substitute,
)
from .process import Order, Pair, norm_pair

AX, CUT, TENSOR, PAR, MODP, MODN = "ax", "cut", "tensor", "par", "mod+", "mod-"
KINDS = (AX, CUT, TENSOR, PAR, MODP, MODN)
ARITY = {AX: (0, 2), CUT: (2, 0), TENSOR: (2, 1), PAR: (2, 1), MODP: (1, 1), MODN: (1, 1)}
FORMAT_VERSION = 1


class NetError(Exception):
    pass


class MalformedStructure(NetError):
    pass


class CutClash(NetError):
    pass


class NotACut(NetError):
    pass


class SwitchingCapExceeded(NetError):
    pass


@dataclass(frozen=True)
class Link:
    id: int
    kind: str
    premisses: tuple[int, ...] = ()
    conclusions: tuple[int, ...] = ()
    channel: str | None = None
    location: int | None = None


@dataclass
class ProofStructure:
    links: dict[int, Link]
    wires: dict[int, Formula]
    conclusions: tuple[int, ...]

    # -- derived views -----------------------------------------------------

    def producer(self) -> dict[int, int]:
        return {w: l.id for l in self.links.values() for w in l.conclusions}

    def consumer(self) -> dict[int, int]:
        return {w: l.id for l in self.links.values() for w in l.premisses}

    def copy(self) -> "ProofStructure":
        return ProofStructure(dict(self.links), dict(self.wires), tuple(self.conclusions))

    def links_of(self, *kinds: str) -> list[Link]:
        return [l for _, l in sorted(self.links.items()) if l.kind in kinds]

    def cuts(self) -> list[Link]:
        return self.links_of(CUT)

    def is_cut_free(self) -> bool:
        return not self.cuts()

    def has_modalities(self) -> bool:
        return bool(self.links_of(MODP, MODN))

    def conclusion_formulas(self) -> tuple[Formula, ...]:
        return tuple(self.wires[w] for w in self.conclusions)

    def locations(self) -> frozenset[int]:
        return frozenset(l.location for l in self.links_of(MODP, MODN))

    def subject(self, loc: int) -> str:
        return self._mod_at(loc).channel

    def polarity(self, loc: int) -> int:
        return 1 if self._mod_at(loc).kind == MODP else -1

    def _mod_at(self, loc: int) -> Link:
        for l in self.links_of(MODP, MODN):
            if l.location == loc:
                return l
        raise KeyError(loc)

    def next_id(self) -> int:
        return max(itertools.chain(self.links, self.wires, [-1])) + 1


# -- construction ----------------------------------------------------------------

class NetBuilder:
    """Incremental construction of a structure, one link at a time."""

    def __init__(self, start: int = 0):
        self.links: dict[int, Link] = {}
        self.wires: dict[int, Formula] = {}
        self._next = start

    def _fresh(self) -> int:
        self._next += 1
        return self._next - 1

    def wire(self, formula: Formula) -> int:
        w = self._fresh()
        self.wires[w] = formula
        return w

    def _link(self, kind, premisses=(), conclusions=(), channel=None, location=None) -> int:
        lid = self._fresh()
        self.links[lid] = Link(lid, kind, tuple(premisses), tuple(conclusions), channel, location)
        return lid

    def axiom(self, formula: Formula) -> tuple[int, int]:
        """Axiom on ``formula``; returns the wires for ``formula^`` and ``formula``."""
        neg, pos = self.wire(negate(formula)), self.wire(formula)
        self._link(AX, (), (neg, pos))
        return neg, pos

    def cut(self, a: int, b: int) -> int:
        return self._link(CUT, (a, b))

    def tensor(self, a: int, b: int) -> int:
        w = self.wire(Tensor(self.wires[a], self.wires[b]))
        self._link(TENSOR, (a, b), (w,))
        return w

    def par(self, a: int, b: int) -> int:
        w = self.wire(Par(self.wires[a], self.wires[b]))
        self._link(PAR, (a, b), (w,))
        return w

    def modality(self, positive: bool, channel: str, location: int, a: int) -> int:
        body = self.wires[a]
        w = self.wire(ModPos(channel, body) if positive else ModNeg(channel, body))
        self._link(MODP if positive else MODN, (a,), (w,), channel, location)
        return w

    def add(self, net: ProofStructure) -> dict[int, int]:
        """Copy ``net`` in with fresh ids; returns the wire renaming."""
        wmap = {w: self.wire(f) for w, f in sorted(net.wires.items())}
        for _, l in sorted(net.links.items()):
            self._link(l.kind, [wmap[w] for w in l.premisses], [wmap[w] for w in l.conclusions],
                       l.channel, l.location)
        return wmap

    def build(self, conclusions: Iterable[int]) -> ProofStructure:
        return ProofStructure(dict(self.links), dict(self.wires), tuple(conclusions))


def check_structure(net: ProofStructure, typed: bool = True) -> None:
    """Raise :class:`MalformedStructure` unless ``net`` is a well-formed structure."""
    produced: dict[int, int] = {}
    consumed: dict[int, int] = {}
    seen_locs = set()
    for lid, l in net.links.items():
        if lid != l.id:
            raise MalformedStructure(f"link key {lid} != id {l.id}")
        if l.kind not in ARITY:
            raise MalformedStructure(f"unknown link kind {l.kind!r}")
        if (len(l.premisses), len(l.conclusions)) != ARITY[l.kind]:
            raise MalformedStructure(f"link {lid} ({l.kind}) has wrong arity")
        for w in l.conclusions:
            if w in produced:
                raise MalformedStructure(f"wire {w} produced twice")
            produced[w] = lid
        for w in l.premisses:
            if w in consumed:
                raise MalformedStructure(f"wire {w} consumed twice")
            consumed[w] = lid
        if l.kind in (MODP, MODN):
            if l.location is None or l.channel is None:
                raise MalformedStructure(f"modality link {lid} lacks channel or location")
            if l.location in seen_locs:
                raise MalformedStructure(f"location {l.location} labels two links")
            seen_locs.add(l.location)
    for w in set(produced) | set(consumed) | set(net.conclusions):
        if w not in net.wires:
            raise MalformedStructure(f"wire {w} has no formula")
    for w in net.wires:
        if w not in produced:
            raise MalformedStructure(f"wire {w} has no producer")
    dangling = set(net.wires) - set(consumed)
    if dangling != set(net.conclusions) or len(net.conclusions) != len(set(net.conclusions)):
        raise MalformedStructure("conclusions do not match the unconsumed wires")
    if typed:
        for l in net.links.values():
            _check_typing(net, l)


def _check_typing(net: ProofStructure, l: Link) -> None:
    f = net.wires
    ok = True
    if l.kind == AX:
        ok = f[l.conclusions[0]] == negate(f[l.conclusions[1]])
    elif l.kind == CUT:
        ok = f[l.premisses[0]] == negate(f[l.premisses[1]])
    elif l.kind == TENSOR:
        ok = f[l.conclusions[0]] == Tensor(f[l.premisses[0]], f[l.premisses[1]])
    elif l.kind == PAR:
        ok = f[l.conclusions[0]] == Par(f[l.premisses[0]], f[l.premisses[1]])
    elif l.kind == MODP:
        ok = f[l.conclusions[0]] == ModPos(l.channel, f[l.premisses[0]])
    elif l.kind == MODN:
        ok = f[l.conclusions[0]] == ModNeg(l.channel, f[l.premisses[0]])
    if not ok:
        raise MalformedStructure(f"link {l.id} ({l.kind}) is ill-typed")


# -- correctness -----------------------------------------------------------------

@dataclass
class DRResult:
    ok: bool
    reason: str = ""
    switching: dict[int, int] | None = None
    cycle: list[int] | None = None

    def __bool__(self):
        return self.ok


def _graph(net: ProofStructure):
    """Switching-graph data: vertices, fixed edges, and the two edges of each par."""
    produced = {}
    for l in net.links.values():
        for w in l.conclusions:
            if w in produced:
                raise MalformedStructure(f"wire {w} produced twice")
            produced[w] = l.id
    fixed: list[tuple[int, int, int]] = []
    switched: dict[int, list[tuple[int, int, int]]] = {}
    seen = set()
    for l in net.links.values():
        if l.kind not in ARITY or len(l.premisses) != ARITY[l.kind][0]:
            raise MalformedStructure(f"link {l.id} has wrong arity")
        edges = []
        for w in l.premisses:
            if w in seen:
                raise MalformedStructure(f"wire {w} consumed twice")
            seen.add(w)
            if w in produced:
                edges.append((produced[w], l.id, w))
        if l.kind == PAR:
            switched[l.id] = edges
        else:
            fixed.extend(edges)
    return sorted(net.links), fixed, switched


class _UF:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        self.parent[b] = a
        return True


def dr_check(net: ProofStructure, method: str = "contraction", cap: int = 2 ** 22) -> DRResult:
    """Danos-Regnier criterion: every switching graph is a tree.

    ``method="switchings"`` enumerates all switchings (at most ``cap``);
    ``"contraction"`` runs the equivalent graph-contraction procedure.
    Structures with dangling premisses are rejected rather than raising.
    """
    vertices, fixed, switched = _graph(net)
    produced = {w for l in net.links.values() for w in l.conclusions}
    for _, l in sorted(net.links.items()):
        if any(w not in produced for w in l.premisses):
            return DRResult(False, f"{l.kind} link {l.id} has a dangling premiss")
    if method == "switchings":
        return _dr_switchings(vertices, fixed, switched, cap)
    if method != "contraction":
        raise ValueError(f"unknown method {method!r}")
    result = _dr_contract(vertices, fixed, switched)
    if not result.ok and len(switched) <= 16:
        witness = _dr_switchings(vertices, fixed, switched, cap)
        result.switching, result.cycle = witness.switching, witness.cycle
    return result


def _dr_contract(vertices, fixed, switched) -> DRResult:
    if not vertices:
        return DRResult(False, "empty structure")
    uf = _UF(vertices)
    for a, b, w in fixed:
        if not uf.union(a, b):
            return DRResult(False, f"cycle through wire {w}")
    pending = {p: edges for p, edges in switched.items()}
    for p, edges in pending.items():
        if len(edges) != 2:
            return DRResult(False, f"par link {p} has a dangling premiss")
    progress = True
    while pending and progress:
        progress = False
        for p in sorted(pending):
            (a1, _, w1), (a2, _, w2) = pending[p]
            home, x1, x2 = uf.find(p), uf.find(a1), uf.find(a2)
            if x1 == home or x2 == home:
                return DRResult(False, f"cycle through par link {p}")
            if x1 == x2:
                uf.union(home, x1)
                del pending[p]
                progress = True
    if pending:
        return DRResult(False, f"par links {sorted(pending)} cannot be contracted")
    roots = {uf.find(v) for v in vertices}
    if len(roots) != 1:
        return DRResult(False, f"disconnected ({len(roots)} components)")
    return DRResult(True)


def _dr_switchings(vertices, fixed, switched, cap) -> DRResult:
    pars = sorted(switched)
    if any(len(switched[p]) == 0 for p in pars):
        return DRResult(False, "par link without premisses")
    total = 1
    for p in pars:
        total *= len(switched[p])
    if total > cap:
        raise SwitchingCapExceeded(f"{total} switchings exceed the cap of {cap}")
    for choice in itertools.product(*(range(len(switched[p])) for p in pars)):
        edges = fixed + [switched[p][i] for p, i in zip(pars, choice)]
        switching = {p: switched[p][i][2] for p, i in zip(pars, choice)}
        uf = _UF(vertices)
        adj: dict[int, list[int]] = {v: [] for v in vertices}
        for a, b, w in edges:
            if not uf.union(a, b):
                return DRResult(False, f"cycle through wire {w}", switching, _path(adj, a, b) or [a])
            adj[a].append(b)
            adj[b].append(a)
        roots = {uf.find(v) for v in vertices}
        if len(roots) != 1:
            return DRResult(False, f"disconnected ({len(roots)} components)", switching)
    return DRResult(True)


def _path(adj, start, goal):
    prev = {start: None}
    queue = [start]
    for v in queue:
        if v == goal:
            out = []
            while v is not None:
                out.append(v)
                v = prev[v]
            return out[::-1]
        for n in adj[v]:
            if n not in prev:
                prev[n] = v
                queue.append(n)
    return None


# -- cut elimination ----------------------------------------------------------------

@dataclass(frozen=True)
class CutEvent:
    cut: int
    kind: str  # "axiom", "multiplicative" or "modality"
    pair: Pair | None = None


class _Rewriter:
    """Mutable working copy used by cut elimination."""

    def __init__(self, net: ProofStructure):
        self.links = dict(net.links)
        self.wires = dict(net.wires)
        self.conclusions = list(net.conclusions)
        self.prod = net.producer()
        self.cons = net.consumer()
        self.next = net.next_id()

    def snapshot(self) -> ProofStructure:
        return ProofStructure(dict(self.links), dict(self.wires), tuple(self.conclusions))

    def fresh(self) -> int:
        self.next += 1
        return self.next - 1

    def remove(self, lid: int) -> None:
        l = self.links.pop(lid)
        for w in l.conclusions:
            self.prod.pop(w, None)
        for w in l.premisses:
            self.cons.pop(w, None)

    def new_cut(self, a: int, b: int) -> None:
        lid = self.fresh()
        self.links[lid] = Link(lid, CUT, (a, b))
        self.cons[a] = lid
        self.cons[b] = lid

    def redirect(self, old: int, new: int) -> None:
        """Whoever consumed ``old`` now consumes ``new``."""
        user = self.cons.pop(old, None)
        if user is None:
            self.conclusions[self.conclusions.index(old)] = new
        else:
            l = self.links[user]
            self.links[user] = replace(l, premisses=tuple(new if w == old else w for w in l.premisses))
            self.cons[new] = user

    def step(self, cid: int) -> CutEvent:
        cut = self.links.get(cid)
        if cut is None or cut.kind != CUT:
            raise NotACut(f"link {cid} is not a cut")
        x, y = cut.premisses
        lx, ly = self.links[self.prod[x]], self.links[self.prod[y]]
        if lx.kind != AX and ly.kind == AX:
            lx, ly, x, y = ly, lx, y, x
        if lx.kind == AX:
            if lx.id == ly.id:
                raise CutClash(f"cut {cid} closes a loop on axiom {lx.id}")
            other = lx.conclusions[1] if lx.conclusions[0] == x else lx.conclusions[0]
            self.remove(cid)
            self.remove(lx.id)
            self.redirect(other, y)
            del self.wires[x], self.wires[other]
            return CutEvent(cid, "axiom")
        if lx.kind == PAR and ly.kind == TENSOR:
            lx, ly, x, y = ly, lx, y, x
        if lx.kind == TENSOR and ly.kind == PAR:
            self.remove(cid)
            self.remove(lx.id)
            self.remove(ly.id)
            del self.wires[x], self.wires[y]
            self.new_cut(lx.premisses[0], ly.premisses[0])
            self.new_cut(lx.premisses[1], ly.premisses[1])
            return CutEvent(cid, "multiplicative")
        if lx.kind == MODN and ly.kind == MODP:
            lx, ly, x, y = ly, lx, y, x
        if lx.kind == MODP and ly.kind == MODN and lx.channel == ly.channel:
            self.remove(cid)
            self.remove(lx.id)
            self.remove(ly.id)
            del self.wires[x], self.wires[y]
            self.new_cut(lx.premisses[0], ly.premisses[0])
            return CutEvent(cid, "modality", norm_pair(lx.location, ly.location))
        raise CutClash(f"cut {cid}: {lx.kind} against {ly.kind}")


def cut_step(net: ProofStructure, cut: int) -> tuple[ProofStructure, CutEvent]:
    rw = _Rewriter(net)
    event = rw.step(cut)
    return rw.snapshot(), event


Strategy = Callable[[list[int]], int]


def strategy(name: str = "lowest", seed: int = 0) -> Strategy:
    if name == "lowest":
        return min
    if name == "highest":
        return max
    if name == "random":
        rng = random.Random(seed)
        return lambda cuts: rng.choice(sorted(cuts))
    raise ValueError(f"unknown strategy {name!r}")


def reduction_sequence(net: ProofStructure, choose: Strategy = min,
                       snapshots: bool = False) -> Iterator[tuple[CutEvent, ProofStructure | None]]:
    """Yield every cut-elimination step until no cut remains."""
    rw = _Rewriter(net)
    while True:
        cuts = [lid for lid, l in rw.links.items() if l.kind == CUT]
        if not cuts:
            return
        event = rw.step(choose(cuts))
        yield event, (rw.snapshot() if snapshots else None)


@dataclass
class Normalized:
    net: ProofStructure
    pairs: list[Pair] = field(default_factory=list)
    steps: int = 0


def normalize(net: ProofStructure, choose: Strategy | str = min) -> Normalized:
    if isinstance(choose, str):
        choose = strategy(choose)
    rw = _Rewriter(net)
    pairs = []
    count = 0
    while True:
        cuts = [lid for lid, l in rw.links.items() if l.kind == CUT]
        if not cuts:
            break
        event = rw.step(choose(cuts))
        count += 1
        if event.pair is not None:
            pairs.append(event.pair)
    return Normalized(rw.snapshot(), pairs, count)


# -- order, comparison, instantiation ------------------------------------------------

def proof_order(net: ProofStructure) -> Order:
    """``l < m`` when the modality link at ``m`` sits in the premiss tree of ``l``.

    Trees stop at axiom links, so axioms separate the trees of the structure.
    """
    prod = net.producer()
    above: dict[int, frozenset[int]] = {}
    for l in net.links_of(MODP, MODN):
        found = set()
        stack = list(l.premisses)
        while stack:
            w = stack.pop()
            src = net.links.get(prod.get(w))
            if src is None or src.kind == AX:
                continue
            if src.kind in (MODP, MODN):
                found.add(src.location)
            stack.extend(src.premisses)
        above[l.location] = frozenset(found)
    return Order(above)


def signature(net: ProofStructure):
    """Id-independent description of a cut-free structure, for equality tests."""
    if not net.is_cut_free():
        raise NetError("signature needs a cut-free structure")
    prod = net.producer()
    nodes = []
    ends = {}
    for i, c in enumerate(net.conclusions):
        stack = [(c, (i,))]
        while stack:
            w, path = stack.pop()
            l = net.links[prod[w]]
            if l.kind == AX:
                ends.setdefault(l.id, []).append(path)
                continue
            nodes.append((path, l.kind, l.channel, l.location))
            for j, p in enumerate(l.premisses):
                stack.append((p, path + (j,)))
    axioms = frozenset(tuple(sorted(v)) for v in ends.values())
    return net.conclusion_formulas(), frozenset(nodes), axioms


def same_net(a: ProofStructure, b: ProofStructure) -> bool:
    return signature(a) == signature(b)


def instantiate(net: ProofStructure, sigma) -> ProofStructure:
    return ProofStructure(dict(net.links), {w: substitute(f, sigma) for w, f in net.wires.items()},
                          tuple(net.conclusions))


def eta_expand(net: ProofStructure, modalities: bool = False) -> ProofStructure:
    """Replace axioms on compound formulas by axioms on their components."""
    b = NetBuilder(net.next_id())
    b.links = dict(net.links)
    b.wires = dict(net.wires)
    cons = net.consumer()
    conclusions = list(net.conclusions)
    work = [l for l in net.links_of(AX)]
    while work:
        ax = work.pop()
        n, p = ax.conclusions
        f = b.wires[p]
        if isinstance(f, (Var, DualVar)) or (isinstance(f, MODAL) and not modalities):
            continue
        if isinstance(f, (Par, ModNeg)):
            n, p = p, n
            f = b.wires[p]
        del b.links[ax.id]
        if isinstance(f, Tensor):
            n1, p1 = b.axiom(f.left)
            n2, p2 = b.axiom(f.right)
            new_p, new_n = b.tensor(p1, p2), b.par(n1, n2)
            made = [p1, p2]
        else:
            n1, p1 = b.axiom(f.body)
            new_p = b.modality(True, f.channel, _fresh_loc(b), p1)
            new_n = b.modality(False, f.channel, _fresh_loc(b), n1)
            made = [p1]
        for old, new in ((p, new_p), (n, new_n)):
            if old in cons:
                l = b.links[cons[old]]
                b.links[l.id] = replace(l, premisses=tuple(new if w == old else w for w in l.premisses))
                cons[new] = l.id
            else:
                conclusions[conclusions.index(old)] = new
            del b.wires[old]
        for w in made:
            work.append(b.links[next(lid for lid, l in b.links.items() if w in l.conclusions and l.kind == AX)])
    return b.build(conclusions)


def _fresh_loc(b: NetBuilder) -> int:
    used = {l.location for l in b.links.values() if l.location is not None}
    return max(used | {-1}) + 1


# -- serialization --------------------------------------------------------------------

def to_json(net: ProofStructure) -> dict:
    links = []
    for _, l in sorted(net.links.items()):
        item = {"id": l.id, "kind": l.kind, "premisses": list(l.premisses), "conclusions": list(l.conclusions)}
        if l.channel is not None:
            item["channel"] = l.channel
        if l.location is not None:
            item["location"] = l.location
        links.append(item)
    return {
        "format": FORMAT_VERSION,
        "links": links,
        "wires": [{"id": w, "formula": format_formula(f)} for w, f in sorted(net.wires.items())],
        "conclusions": list(net.conclusions),
    }


def from_json(data: dict | str) -> ProofStructure:
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("format", FORMAT_VERSION) != FORMAT_VERSION:
        raise MalformedStructure(f"unsupported format {data.get('format')!r}")
    links = {}
    for item in data["links"]:
        if item["kind"] not in KINDS:
            raise MalformedStructure(f"unknown link kind {item['kind']!r}")
        links[item["id"]] = Link(item["id"], item["kind"], tuple(item["premisses"]), tuple(item["conclusions"]),
                                 item.get("channel"), item.get("location"))
    wires = {item["id"]: parse_formula(item["formula"]) for item in data["wires"]}
    return ProofStructure(links, wires, tuple(data["conclusions"]))


_DOT_LABEL = {AX: "ax", CUT: "cut", TENSOR: "⊗", PAR: "⅋"}


def to_dot(net: ProofStructure, name: str = "net") -> str:
    lines = [f"digraph {name} {{", "  node [shape=box, fontname=Helvetica];"]
    for _, l in sorted(net.links.items()):
        if l.kind in (MODP, MODN):
            label = f"<{l.channel}>{'+' if l.kind == MODP else '-'} @{l.location}"
        else:
            label = _DOT_LABEL[l.kind]
        lines.append(f'  l{l.id} [label="{label}"];')
    prod = net.producer()
    cons = net.consumer()
    for w, f in sorted(net.wires.items()):
        src = f"l{prod[w]}" if w in prod else f"h{w}"
        if w in cons:
            dst = f"l{cons[w]}"
        else:
            dst = f"c{w}"
            lines.append(f'  c{w} [shape=plaintext, label=""];')
        style = ", style=dashed" if w in cons and net.links[cons[w]].kind == PAR else ""
        label = format_formula(f).replace('"', '\\"')
        lines.append(f'  {src} -> {dst} [label="{label}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
