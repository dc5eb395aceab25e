"""Translation of terms into formulas and cut-free proofs.

Two variants.  ``sync`` nests the modality around the continuation, so the
action order of a term becomes the proof order of its proof.  ``async`` puts
the modality on the fresh variable only.  Fresh variables are numbered in
post-order: ``<prefix><k>``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .formula import (
    DualVar, Formula, ModNeg, ModPos, Par, Tensor, Var, negate, size,
)
from .net import (
    AX, MODN, MODP, PAR, TENSOR, NetBuilder, ProofStructure, dr_check, proof_order,
)
from .process import (
    NEG, POS, Parallel, Prefix, ProcessError, Term, Unit, action_order, locations,
    par, prefixes,
)

SYNC, ASYNC = "sync", "async"
VARIANTS = (SYNC, ASYNC)


class Incompatible(ProcessError):
    pass


class EnumerationCapExceeded(Exception):
    pass


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")


class _Translation:
    def __init__(self, variant: str, prefix: str, builder: NetBuilder | None):
        _check_variant(variant)
        self.variant = variant
        self.prefix = prefix
        self.b = builder
        self.count = 0
        self.fresh: list[str] = []

    def var(self) -> str:
        name = f"{self.prefix}{self.count}"
        self.count += 1
        self.fresh.append(name)
        return name

    def run(self, p: Term):
        """Return ``(formula, wire)``; the wire is ``None`` without a builder."""
        b = self.b
        if isinstance(p, Unit):
            a = self.var()
            if b is None:
                return Par(DualVar(a), Var(a)), None
            n, q = b.axiom(Var(a))
            w = b.par(n, q)
            return b.wires[w], w
        if isinstance(p, Parallel):
            fl, wl = self.run(p.left)
            fr, wr = self.run(p.right)
            if b is None:
                return Tensor(fl, fr), None
            w = b.tensor(wl, wr)
            return b.wires[w], w
        fb, wb = self.run(p.body)
        a = self.var()
        al, na = Var(a), DualVar(a)
        ch, loc = p.name, p.location
        if b is None:
            if self.variant == SYNC:
                if p.polarity == POS:
                    return ModPos(ch, Par(na, Tensor(fb, al))), None
                return Par(ModNeg(ch, Tensor(fb, na)), al), None
            if p.polarity == POS:
                return Par(ModPos(ch, na), Tensor(fb, al)), None
            return Par(Tensor(fb, na), ModNeg(ch, al)), None
        n, q = b.axiom(al)
        if self.variant == SYNC:
            if p.polarity == POS:
                w = b.modality(True, ch, loc, b.par(n, b.tensor(wb, q)))
            else:
                w = b.par(b.modality(False, ch, loc, b.tensor(wb, n)), q)
        else:
            if p.polarity == POS:
                w = b.par(b.modality(True, ch, loc, n), b.tensor(wb, q))
            else:
                w = b.par(b.tensor(wb, n), b.modality(False, ch, loc, q))
        return b.wires[w], w


def ttype(p: Term, variant: str = SYNC, prefix: str = "v") -> Formula:
    return _Translation(variant, prefix, None).run(p)[0]


def ttype_sync(p: Term, prefix: str = "v") -> Formula:
    return ttype(p, SYNC, prefix)


def ttype_async(p: Term, prefix: str = "v") -> Formula:
    return ttype(p, ASYNC, prefix)


def fresh_variables(p: Term, variant: str = SYNC, prefix: str = "v") -> list[str]:
    t = _Translation(variant, prefix, None)
    t.run(p)
    return t.fresh


@dataclass(frozen=True)
class TypedProcess:
    term: Term
    variant: str
    type: Formula
    proof: ProofStructure
    fresh_vars: tuple[str, ...]


def proof_assign(p: Term, variant: str = SYNC, prefix: str = "v") -> TypedProcess:
    b = NetBuilder()
    t = _Translation(variant, prefix, b)
    formula, wire = t.run(p)
    return TypedProcess(p, variant, formula, b.build([wire]), tuple(t.fresh))


def type_tree(p: Term, formula: Formula) -> list[tuple[Term, Formula]]:
    """Top-level leaves of ``p`` paired with their part of ``formula``."""
    if isinstance(p, Parallel):
        if not isinstance(formula, Tensor):
            raise ValueError("formula does not follow the term")
        return type_tree(p.left, formula.left) + type_tree(p.right, formula.right)
    return [(p, formula)]


# -- compatibility and extraction ---------------------------------------------------

def compatible(p: Term, net: ProofStructure) -> bool:
    locs = net.locations()
    plocs = locations(p)
    if not locs <= plocs:
        return False
    info = {q.location: (q.name, q.polarity) for q in prefixes(p)}
    for loc in locs:
        if info[loc] != (net.subject(loc), net.polarity(loc)):
            return False
    return proof_order(net).includes(action_order(p).restrict(locs))


def extract_term(p: Term, net: ProofStructure) -> Term:
    if not compatible(p, net):
        raise Incompatible("structure is not compatible with the term")
    return restrict_term(p, net.locations())


def restrict_term(p: Term, keep) -> Term:
    """The term on locations ``keep`` with subjects, polarities and order from ``p``."""
    keep = frozenset(keep)

    def go(t: Term) -> list[Term]:
        if isinstance(t, Unit):
            return []
        if isinstance(t, Parallel):
            return go(t.left) + go(t.right)
        inner = go(t.body)
        if t.location in keep:
            return [Prefix(t.name, t.polarity, t.location, par(*inner))]
        return inner

    return par(*go(p))


# -- uniqueness oracle ----------------------------------------------------------------

def _atoms(formula: Formula, allow_modalities: bool):
    """Formula tree nodes: (path, formula); leaves are the generalized atoms."""
    nodes, atoms = [], []

    def go(f, path):
        if isinstance(f, (Var, DualVar)) or (not allow_modalities and isinstance(f, (ModPos, ModNeg))):
            atoms.append((path, f))
            return
        nodes.append((path, f))
        if isinstance(f, (Tensor, Par)):
            go(f.left, path + (0,))
            go(f.right, path + (1,))
        else:
            go(f.body, path + (0,))

    go(formula, ())
    return nodes, atoms


def _net_for_matching(formula: Formula, matching, allow_modalities: bool, locs) -> ProofStructure:
    b = NetBuilder()
    leaf = {}
    for x, y in matching:
        n, q = b.axiom(y[1])
        leaf[x[0]], leaf[y[0]] = n, q

    def go(f, path):
        if path in leaf:
            return leaf[path]
        if isinstance(f, Tensor):
            return b.tensor(go(f.left, path + (0,)), go(f.right, path + (1,)))
        if isinstance(f, Par):
            return b.par(go(f.left, path + (0,)), go(f.right, path + (1,)))
        return b.modality(isinstance(f, ModPos), f.channel, locs[path], go(f.body, path + (0,)))

    return b.build([go(formula, ())])


def enumerate_cutfree_proofs(formula: Formula, allow_modalities: bool = True, cap: int = 16,
                             locations_by_path: dict | None = None) -> list[ProofStructure]:
    """Every cut-free net of ``formula`` whose axioms sit on generalized atoms.

    ``cap`` bounds the number of axiom links (half the atom count).
    Modality links get locations from ``locations_by_path`` (formula-tree
    path -> location) or, failing that, consecutive integers in tree order.
    """
    nodes, atoms = _atoms(formula, allow_modalities)
    if len(atoms) > 2 * cap:
        raise EnumerationCapExceeded(f"{len(atoms)} atoms need more than {cap} axiom links")
    mods = [path for path, f in nodes if isinstance(f, (ModPos, ModNeg))]
    locs = dict(locations_by_path or {})
    for i, path in enumerate(mods):
        locs.setdefault(path, i)
    results = []

    def go(rest, acc):
        if not rest:
            net = _net_for_matching(formula, acc, allow_modalities, locs)
            if dr_check(net):
                results.append(net)
            return
        x = rest[0]
        for i in range(1, len(rest)):
            y = rest[i]
            if x[1] == negate(y[1]):
                go(rest[1:i] + rest[i + 1:], acc + [(x, y)])

    if len(atoms) % 2 == 0:
        go(atoms, [])
    return results


def modality_paths(p: Term, variant: str) -> dict:
    """Formula-tree path of the modality of each prefix in ``ttype(p)``."""
    out = {}

    def go(t: Term, path):
        if isinstance(t, Parallel):
            go(t.left, path + (0,))
            go(t.right, path + (1,))
        elif isinstance(t, Prefix):
            if variant == SYNC:
                if t.polarity == POS:
                    out[path] = t.location
                    body = path + (0, 1, 0)
                else:
                    out[path + (0,)] = t.location
                    body = path + (0, 0, 0)
            else:
                if t.polarity == POS:
                    out[path + (0,)] = t.location
                    body = path + (1, 0)
                else:
                    out[path + (1,)] = t.location
                    body = path + (0, 0)
            go(t.body, body)

    go(p, ())
    return out
