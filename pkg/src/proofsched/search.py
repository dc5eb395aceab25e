"""Proof search for modality-free MLL nets over generalized atoms.

The conclusion formula is laid out as a tree.  Its leaves are variable
occurrences and maximal modal subformulas; these are the generalized atoms.
Search picks the most constrained unmatched leaf and tries every way it can be
closed by an axiom link:

* against another leaf, under dual unification;
* an open variable against a whole compound subtree (a compound axiom);
* as part of a compound subtree that an open variable swallows;
* an open variable together with another leaf of the same variable, spliced
  into an axiom already placed (``a - b`` becomes ``a - x`` and ``x^ - b``).

The last kind catches variables whose leaves only appear after the axioms
they belong on were placed, such as units released by an expansion.

When a variable gets bound to a tensor or par, its other leaves are expanded
into subtrees.  Every partial state is checked for switching cycles (which no
completion can remove); complete states get the full Danos-Regnier test.

Before searching, every operand ``v * v^`` of a par whose open variable occurs
nowhere else is removed.  This does not change provability: ``A @ (F * F^)``
implies ``A``, and ``A`` implies ``A @ (A * A^)``; contexts are monotone.  The
second implication, cut in and normalized, is how the operand is put back
into the proof found: a fresh axiom on ``A`` and ``v := A``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from .formula import (
    ATOMS, BINARY, MODAL, DualVar, Formula, Par, Tensor, Var, UnificationError,
    negate, substitute, unify_dual, var_occurrences, variables,
)
from .net import AX, PAR, TENSOR, NetBuilder, ProofStructure, dr_check
from .process import CapExceeded


class SearchCapExceeded(CapExceeded):
    pass


def generalized_atoms(f: Formula) -> int:
    if isinstance(f, ATOMS + MODAL):
        return 1
    return generalized_atoms(f.left) + generalized_atoms(f.right)


@dataclass
class Found:
    proof: ProofStructure
    instantiation: dict  # every open variable -> closed formula
    explored: int


class _State:
    """Forest plus the decisions made so far.  Copied on every branch."""

    __slots__ = ("sigma", "formula", "children", "parent", "frontier", "axioms", "next",
                 "postponed", "cache", "pars")

    def copy(self) -> "_State":
        s = _State()
        s.sigma = dict(self.sigma)
        s.formula = dict(self.formula)
        s.children = dict(self.children)
        s.parent = dict(self.parent)
        s.frontier = dict(self.frontier)
        s.axioms = list(self.axioms)
        s.next = self.next
        s.postponed = dict(self.postponed)
        s.cache = dict(self.cache)
        s.pars = set(self.pars)
        return s

    def bind(self, sigma: dict) -> None:
        """Replace the substitution, refreshing cached formulas that mention new bindings."""
        new = {k: v for k, v in sigma.items() if k not in self.sigma}
        self.sigma = sigma
        if new:
            for n, f in list(self.cache.items()):
                if not variables(f).isdisjoint(new):
                    self.cache[n] = substitute(f, new)


class Search:
    """One search problem: find a net of ``goal`` binding only ``open_vars``.

    ``fresh`` names leftover open variables in the result (``u0``, ``u1``...).
    ``cap_nodes`` bounds the number of explored states.
    """

    def __init__(self, goal: Formula, open_vars, sigma0=None, cap_nodes: int = 200_000,
                 fresh: str = "u"):
        self.goal = goal
        self.open = frozenset(open_vars)
        self.cap_nodes = cap_nodes
        self.fresh = fresh
        self.explored = 0
        sigma0 = dict(sigma0 or {})
        counts = Counter(a.name for a in var_occurrences(goal))
        removable = {v for v in self.open if counts[v] == 2 and v not in sigma0}
        self.removed: list = []
        self.stripped = _strip_units(goal, removable, (), self.removed)
        s = _State()
        s.sigma = sigma0
        s.formula, s.children, s.parent, s.frontier, s.axioms, s.next = {}, {}, {}, {}, [], 0
        s.postponed = {}
        s.cache = {}
        s.pars = set()
        self.root = self._grow(s, self.stripped, None)
        # nodes of the conclusion's right half; they are never expanded
        self.target = frozenset(self._leaves_under(s, s.children[self.root][1])) \
            if self.root in s.children else frozenset()
        self._expand(s)
        self.start = s

    # -- forest -------------------------------------------------------------------

    def _grow(self, s: _State, f: Formula, parent) -> int:
        nid = s.next
        s.next += 1
        s.formula[nid] = f
        s.parent[nid] = parent
        cur = substitute(f, s.sigma)
        if isinstance(cur, BINARY):
            if isinstance(cur, Par):
                s.pars.add(nid)
            s.children[nid] = (self._grow(s, cur.left, nid), self._grow(s, cur.right, nid))
        else:
            s.frontier[nid] = None  # unmatched leaf
        return nid

    def _expand(self, s: _State) -> None:
        """Turn unmatched leaves whose variable is now bound to a tensor or par into subtrees."""
        changed = True
        while changed:
            changed = False
            for nid in [n for n, ax in s.frontier.items() if ax is None]:
                cur = self._current(s, nid)
                if isinstance(cur, BINARY):
                    del s.frontier[nid]
                    if isinstance(cur, Par):
                        s.pars.add(nid)
                    s.children[nid] = (self._grow(s, cur.left, nid), self._grow(s, cur.right, nid))
                    changed = True

    def _current(self, s: _State, nid: int) -> Formula:
        f = s.cache.get(nid)
        if f is None:
            f = s.cache[nid] = substitute(s.formula[nid], s.sigma)
        return f

    def _is_open(self, s: _State, f: Formula) -> bool:
        return isinstance(f, ATOMS) and f.name in self.open and f.name not in s.sigma

    def _leaves_under(self, s: _State, nid: int) -> list[int]:
        out, stack = [], [nid]
        while stack:
            n = stack.pop()
            if n in s.children:
                stack.extend(s.children[n])
            else:
                out.append(n)
        return out

    def _free_subtrees(self, s: _State) -> list[int]:
        """Internal nodes all of whose leaves are unmatched."""
        free = {}

        def go(n):
            if n in s.children:
                ok = all([go(c) for c in s.children[n]])
                if ok:
                    free[n] = True
                return ok
            return s.frontier.get(n, 0) is None

        go(self.root)
        free.pop(self.root, None)
        return sorted(free)

    # -- symmetry -------------------------------------------------------------------

    def _components(self, s: _State) -> list[int]:
        """Roots hanging off the par spine of the source and the tensor spine of the target."""
        out = []
        if self.root not in s.children:
            return out
        left, right = s.children[self.root]
        for top, kind in ((left, Par), (right, Tensor)):
            stack = [top]
            while stack:
                n = stack.pop()
                if n in s.children and isinstance(self._current(s, n), kind):
                    stack.extend(s.children[n])
                else:
                    out.append(n)
        return sorted(out)

    def _classes(self, s: _State) -> list[list[set[int]]]:
        """Untouched components grouped by shape, as node sets in tree order.

        Two untouched components equal up to renaming their private variables
        can be swapped without changing anything else, so options reaching
        into one of them repeat options into the other.
        """
        counts = Counter()
        for n in s.frontier:
            counts.update(a.name for a in var_occurrences(self._current(s, n)))
        for f in s.sigma.values():
            counts.update(a.name for a in var_occurrences(f))
        groups: dict = {}
        for c in self._components(s):
            leaves = self._leaves_under(s, c)
            if any(s.frontier.get(n) is not None for n in leaves):
                continue
            local = Counter()
            for n in leaves:
                local.update(a.name for a in var_occurrences(self._current(s, n)))
            if any(counts[v] != k for v, k in local.items()):
                continue
            groups.setdefault(self._shape(s, c), []).append(set(self._nodes_under(s, c)))
        return [g for g in groups.values() if len(g) > 1]

    @staticmethod
    def _redundant(classes, x: int) -> set[int]:
        skip: set[int] = set()
        for group in classes:
            rest = [g for g in group if x not in g]
            for g in rest[1:]:
                skip |= g
        return skip

    def _shape(self, s: _State, c: int):
        names: dict = {}

        def go(f):
            if isinstance(f, ATOMS):
                tag = names.setdefault(f.name, len(names))
                return (type(f).__name__, tag, self._is_open(s, f))
            if isinstance(f, BINARY):
                return (type(f).__name__, go(f.left), go(f.right))
            return (type(f).__name__, f.channel, go(f.body))

        return go(self._current(s, c))

    def _nodes_under(self, s: _State, nid: int) -> list[int]:
        out, stack = [], [nid]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(s.children.get(n, ()))
        return out

    # -- candidates ----------------------------------------------------------------

    def _plausible(self, s: _State, fx: Formula, fy: Formula) -> bool:
        if self._is_open(s, fx) or self._is_open(s, fy):
            return True
        if isinstance(fx, ATOMS) and isinstance(fy, ATOMS):
            return fx.name == fy.name and type(fx) is not type(fy)
        if isinstance(fx, MODAL) and isinstance(fy, MODAL):
            return fx.channel == fy.channel and type(fx) is not type(fy)
        return False

    def _options(self, s: _State, x: int, leaves: list[int], subtrees: list[int], classes=()):
        """Every way to close leaf ``x``, most of them axioms between two nodes.

        A postponed leaf only gets options involving a node or axiom created
        after it was postponed; the older ones were tried before.
        """
        fx = self._current(s, x)
        mark = s.postponed.get(x)
        out = []
        for y in leaves:
            if y != x and self._plausible(s, fx, self._current(s, y)):
                out.append(("leaf", x, y))
        if self._is_open(s, fx):
            for n in subtrees:
                out.append(("swallow", x, n))
        ancestors = []
        n = s.parent[x]
        while n is not None:
            ancestors.append(n)
            n = s.parent[n]
        free = set(subtrees)
        owners = [y for y in leaves if y != x and self._is_open(s, self._current(s, y))]
        for n in ancestors:
            if n in free:
                for y in owners:
                    out.append(("swallowed", y, n))
        if self._is_open(s, fx):
            mates = [y for y in leaves if y != x and self._current(s, y) == negate(fx)]
            for y in mates[:1]:
                for k in range(len(s.axioms)):
                    out.append(("thread", x, y, k, 0))
                    out.append(("thread", x, y, k, 1))
        skip = self._redundant(classes, x)
        if skip:
            out = [o for o in out if not skip.intersection(o[1:3])]
        if mark is not None:
            nodes, axioms = mark
            out = [o for o in out if max(o[1:3]) >= nodes or (o[0] == "thread" and o[3] >= axioms)]
        out = [o for o in out if o[0] == "thread" or self._unifiable(s, o[1], o[2])]
        # links across the implication first
        out.sort(key=lambda o: (o[0] == "thread", (o[1] in self.target) == (o[2] in self.target),
                                o[0] != "leaf", self._is_open(s, self._current(s, o[2]))))
        return out

    def _unifiable(self, s: _State, a: int, b: int) -> bool:
        try:
            unify_dual(self._current(s, a), self._current(s, b), s.sigma, self.open)
        except UnificationError:
            return False
        return True

    def _apply(self, s: _State, option) -> _State | None:
        if option[0] == "thread":
            return self._thread(s, *option[1:])
        _, a, b = option
        try:
            sigma = unify_dual(self._current(s, a), self._current(s, b), s.sigma, self.open)
        except UnificationError:
            return None
        t = s.copy()
        t.bind(sigma)
        k = len(t.axioms)
        t.axioms.append((a, b))
        for end in (a, b):
            if end in t.children:
                self._cut_subtree(t, end)
            t.frontier[end] = k
            t.postponed.pop(end, None)
        self._expand(t)
        return t

    def _thread(self, s: _State, x: int, y: int, k: int, orient: int) -> _State | None:
        """Split axiom ``k`` into two through the occurrences ``x`` and ``y`` of one variable."""
        a, b = s.axioms[k]
        first, second = ((a, x), (y, b)) if orient == 0 else ((a, y), (x, b))
        try:
            sigma = unify_dual(self._current(s, first[0]), self._current(s, first[1]), s.sigma, self.open)
            sigma = unify_dual(substitute(s.formula[second[0]], sigma),
                               substitute(s.formula[second[1]], sigma), sigma, self.open)
        except UnificationError:
            return None
        t = s.copy()
        t.bind(sigma)
        t.axioms[k] = first
        t.axioms.append(second)
        for end in first:
            t.frontier[end] = k
        for end in second:
            t.frontier[end] = len(t.axioms) - 1
        t.postponed.pop(x, None)
        t.postponed.pop(y, None)
        self._expand(t)
        return t

    def _cut_subtree(self, s: _State, nid: int) -> None:
        stack = list(s.children.pop(nid))
        s.pars.discard(nid)
        while stack:
            n = stack.pop()
            s.frontier.pop(n, None)
            s.postponed.pop(n, None)
            s.cache.pop(n, None)
            s.pars.discard(n)
            s.formula.pop(n, None)
            s.parent.pop(n, None)
            stack.extend(s.children.pop(n, ()))

    # -- correctness ---------------------------------------------------------------

    def _has_loop(self, s: _State) -> bool:
        """Partial contraction: only a switching cycle counts as failure."""
        uf = {}

        def find(v):
            while uf.setdefault(v, v) != v:
                uf[v] = uf[uf[v]]
                v = uf[v]
            return v

        def union(a, b):
            a, b = find(a), find(b)
            if a == b:
                return False
            uf[b] = a
            return True

        def source(c):
            if c in s.children:
                return ("n", c)
            k = s.frontier.get(c)
            return None if k is None else ("a", k)

        pars = []
        for n, (l, r) in s.children.items():
            srcs = [source(l), source(r)]
            if n in s.pars:
                pars.append((("n", n), srcs))
            else:
                for src in srcs:
                    if src is not None and not union(src, ("n", n)):
                        return True
        pending = pars
        progress = True
        while progress:
            progress = False
            rest = []
            for home, srcs in pending:
                h = find(home)
                roots = [find(x) for x in srcs if x is not None]
                if h in roots:
                    return True
                if len(roots) == 2 and roots[0] == roots[1]:
                    union(h, roots[0])
                    progress = True
                else:
                    rest.append((home, srcs))
            pending = rest
        return False

    # -- driver --------------------------------------------------------------------

    def run(self) -> Found | None:
        return self._search(self.start)

    def _search(self, s: _State) -> Found | None:
        self.explored += 1
        if self.explored > self.cap_nodes:
            raise SearchCapExceeded(f"search explored more than {self.cap_nodes} states")
        leaves = sorted(n for n, ax in s.frontier.items() if ax is None)
        if not leaves:
            return self._finish(s)
        subtrees = self._free_subtrees(s)
        # modal leaves first: matching them expands variables into the
        # leaves that the remaining variable occurrences must meet
        growing = any(self._is_open(s, self._current(s, n)) for n in leaves)
        classes = self._classes(s)
        best, waiting = None, []
        for x in leaves:
            opts = self._options(s, x, leaves, subtrees, classes)
            if not opts:
                if not growing:
                    return None
                if x not in s.postponed:
                    waiting.append(x)
                continue
            key = (not isinstance(self._current(s, x), MODAL), x not in self.target, len(opts))
            if best is None or key < best[0]:
                best = (key, x, opts)
        if best is None:
            return None  # every leaf waits for partners that can no longer appear
        _, x, opts = best
        mark = (s.next, len(s.axioms))
        for option in opts:
            t = self._apply(s, option)
            if t is None or self._has_loop(t):
                continue
            for w in waiting:
                if t.frontier.get(w, 0) is None:
                    t.postponed.setdefault(w, mark)
            found = self._search(t)
            if found is not None:
                return found
        # the partner of x may only appear after later expansions
        if not growing or not isinstance(self._current(s, x), MODAL):
            return None
        t = s.copy()
        for w in waiting:
            t.postponed.setdefault(w, mark)
        t.postponed[x] = mark
        return self._search(t)

    def _closing(self, s: _State) -> dict:
        """Send every open variable left unbound to a fresh rigid name."""
        names = {}
        for v in sorted(self.open, key=_natural):
            if v not in s.sigma:
                names[v] = Var(f"{self.fresh}{len(names)}")
        sigma = {k: substitute(f, names) for k, f in s.sigma.items()}
        sigma.update(names)
        return sigma

    def _finish(self, s: _State) -> Found | None:
        sigma = self._closing(s)
        net = self.build(s, sigma)
        if not dr_check(net):
            return None
        net = _restore_units(net, self.removed, sigma)
        return Found(net, {k: sigma[k] for k in sorted(self.open, key=_natural)}, self.explored)

    def build(self, s: _State, sigma) -> ProofStructure:
        b = NetBuilder()
        ends = {}
        for a, c in s.axioms:
            fa = substitute(s.formula[a], sigma)
            wa, wc = b.axiom(negate(fa))
            ends[a], ends[c] = wa, wc

        def go(n):
            if n not in s.children:
                return ends[n]
            l, r = (go(c) for c in s.children[n])
            if isinstance(self._current(s, n), Tensor):
                return b.tensor(l, r)
            return b.par(l, r)

        return b.build([go(self.root)])


# -- unit operands ---------------------------------------------------------------------

def _unit_var(f: Formula, removable) -> tuple[str, bool] | None:
    """``(v, first_is_positive)`` when ``f`` is ``v * v^`` or ``v^ * v``."""
    if isinstance(f, Tensor) and isinstance(f.left, ATOMS) and isinstance(f.right, ATOMS):
        a, b = f.left, f.right
        if a.name == b.name and a.name in removable and type(a) is not type(b):
            return a.name, isinstance(a, Var)
    return None


def _strip_units(f: Formula, removable, path, out: list) -> Formula:
    """Drop unit operands of pars; ``out`` gets ``(path, side, var, first_positive)``.

    Paths are positions in the stripped formula, so undoing the removals in
    reverse order keeps every recorded path valid.
    """
    if isinstance(f, Par):
        for side, unit, other in ((0, f.left, f.right), (1, f.right, f.left)):
            found = _unit_var(unit, removable)
            if found is not None:
                out.append((path, side) + found)
                return _strip_units(other, removable, path, out)
    if isinstance(f, BINARY):
        return type(f)(_strip_units(f.left, removable, path + (0,), out),
                       _strip_units(f.right, removable, path + (1,), out))
    return f


def _restore_units(net: ProofStructure, removed: list, sigma: dict) -> ProofStructure:
    b = NetBuilder(net.next_id())
    b.links, b.wires = dict(net.links), dict(net.wires)
    conclusions = list(net.conclusions)
    for path, side, v, first_positive in reversed(removed):
        w = _wire_at(b, conclusions, path)
        a = b.wires[w]
        sigma[v] = a if first_positive else negate(a)
        user = next((l for l in b.links.values() if w in l.premisses), None)
        neg, pos = b.axiom(a)
        t = b.tensor(w, neg)
        p = b.par(t, pos) if side == 0 else b.par(pos, t)
        if user is None:
            conclusions[conclusions.index(w)] = p
        else:
            b.links[user.id] = replace(user, premisses=tuple(p if x == w else x for x in user.premisses))
        _retype(b, conclusions[0])
    return b.build(conclusions)


def _retype(b: NetBuilder, root: int) -> None:
    """Recompute the formulas of tensor and par conclusions under ``root``."""
    producer = {w: l for l in b.links.values() for w in l.conclusions}

    def go(w):
        link = producer[w]
        if link.kind in (TENSOR, PAR):
            left, right = (go(x) for x in link.premisses)
            b.wires[w] = Tensor(left, right) if link.kind == TENSOR else Par(left, right)
        return b.wires[w]

    go(root)


def _wire_at(b: NetBuilder, conclusions: list, path) -> int:
    """Wire of the subformula at ``path``, expanding compound axioms on the way."""
    w = conclusions[0]
    for i in path:
        link = next(l for l in b.links.values() if w in l.conclusions)
        if link.kind == AX:
            link = _expand_axiom(b, link, w)
        w = link.premisses[i]
    return w


def _expand_axiom(b: NetBuilder, ax, end: int):
    """One level of eta-expansion of ``ax``; returns the new link producing ``end``."""
    neg, pos = ax.conclusions
    if isinstance(b.wires[pos], Par):
        neg, pos = pos, neg
    f = b.wires[pos]
    del b.links[ax.id]
    n1, p1 = b.axiom(f.left)
    n2, p2 = b.axiom(f.right)
    made = {}
    for old, kind, prem in ((pos, TENSOR, (p1, p2)), (neg, PAR, (n1, n2))):
        lid = b._fresh()
        b.links[lid] = type(ax)(lid, kind, prem, (old,))
        made[old] = b.links[lid]
    return made[end]


def _natural(name: str):
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return head, int(tail) if tail else -1


def search(goal: Formula, open_vars, sigma0=None, cap_nodes: int = 200_000) -> Found | None:
    return Search(goal, open_vars, sigma0, cap_nodes).run()
