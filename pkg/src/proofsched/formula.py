"""Formulas of multiplicative linear logic with action modalities.

Formulas are kept in negation normal form: duals only occur on variables.
Text syntax: ``x``, ``x^``, ``A * B`` (tensor), ``A @ B`` (par), ``<a>+ A``,
``<a>- A`` and ``A -o B``.  ``*`` binds tighter than ``@``; both associate to
the left; modalities bind tightest.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union


class FormulaError(Exception):
    pass


class FormulaParseError(FormulaError):
    def __init__(self, message: str, text: str, offset: int):
        line = text.count("\n", 0, offset) + 1
        column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnificationError(FormulaError):
    pass


class Clash(UnificationError):
    pass


class OccursCheck(UnificationError):
    pass


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class DualVar:
    name: str

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Tensor:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class Par:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class ModPos:
    channel: str
    body: "Formula"

    def __str__(self):
        return format_formula(self)


@dataclass(frozen=True)
class ModNeg:
    channel: str
    body: "Formula"

    def __str__(self):
        return format_formula(self)


Formula = Union[Var, DualVar, Tensor, Par, ModPos, ModNeg]
Substitution = dict  # variable name -> Formula

ATOMS = (Var, DualVar)
BINARY = (Tensor, Par)
MODAL = (ModPos, ModNeg)


def negate(a: Formula) -> Formula:
    if isinstance(a, Var):
        return DualVar(a.name)
    if isinstance(a, DualVar):
        return Var(a.name)
    if isinstance(a, Tensor):
        return Par(negate(a.left), negate(a.right))
    if isinstance(a, Par):
        return Tensor(negate(a.left), negate(a.right))
    if isinstance(a, ModPos):
        return ModNeg(a.channel, negate(a.body))
    if isinstance(a, ModNeg):
        return ModPos(a.channel, negate(a.body))
    raise TypeError(f"not a formula: {a!r}")


def lollipop(a: Formula, b: Formula) -> Formula:
    return Par(negate(a), b)


def variables(a: Formula) -> set[str]:
    if isinstance(a, ATOMS):
        return {a.name}
    if isinstance(a, BINARY):
        return variables(a.left) | variables(a.right)
    return variables(a.body)


def var_occurrences(a: Formula) -> Iterator[Formula]:
    if isinstance(a, ATOMS):
        yield a
    elif isinstance(a, BINARY):
        yield from var_occurrences(a.left)
        yield from var_occurrences(a.right)
    else:
        yield from var_occurrences(a.body)


def has_modality(a: Formula) -> bool:
    if isinstance(a, ATOMS):
        return False
    if isinstance(a, BINARY):
        return has_modality(a.left) or has_modality(a.right)
    return True


def size(a: Formula) -> int:
    if isinstance(a, ATOMS):
        return 1
    if isinstance(a, BINARY):
        return 1 + size(a.left) + size(a.right)
    return 1 + size(a.body)


def substitute(a: Formula, sigma: Mapping[str, Formula]) -> Formula:
    if not sigma:
        return a
    if isinstance(a, Var):
        return sigma.get(a.name, a)
    if isinstance(a, DualVar):
        return negate(sigma[a.name]) if a.name in sigma else a
    if isinstance(a, Tensor):
        return Tensor(substitute(a.left, sigma), substitute(a.right, sigma))
    if isinstance(a, Par):
        return Par(substitute(a.left, sigma), substitute(a.right, sigma))
    if isinstance(a, ModPos):
        return ModPos(a.channel, substitute(a.body, sigma))
    return ModNeg(a.channel, substitute(a.body, sigma))


def rename(a: Formula, names: Mapping[str, str]) -> Formula:
    return substitute(a, {old: Var(new) for old, new in names.items()})


def compose_substitutions(first: Mapping[str, Formula], then: Mapping[str, Formula]) -> Substitution:
    """The substitution that applies ``first`` and then ``then``."""
    out = {k: substitute(v, then) for k, v in first.items()}
    for k, v in then.items():
        out.setdefault(k, v)
    return out


def _bind(sigma: Substitution, name: str, value: Formula) -> None:
    if name in variables(value):
        raise OccursCheck(f"{name} occurs in {format_formula(value)}")
    single = {name: value}
    for k in list(sigma):
        sigma[k] = substitute(sigma[k], single)
    sigma[name] = value


def unify(a: Formula, b: Formula, sigma0: Mapping[str, Formula] | None = None,
          open_vars=frozenset()) -> Substitution:
    """Most general ``sigma`` extending ``sigma0`` with ``a sigma == b sigma``.

    Only names in ``open_vars`` may be bound; other variables are rigid.
    """
    sigma = dict(sigma0 or {})
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = substitute(x, sigma), substitute(y, sigma)
        if x == y:
            continue
        if isinstance(x, ATOMS) and x.name in open_vars:
            _bind(sigma, x.name, y if isinstance(x, Var) else negate(y))
        elif isinstance(y, ATOMS) and y.name in open_vars:
            _bind(sigma, y.name, x if isinstance(y, Var) else negate(x))
        elif type(x) is not type(y):
            raise Clash(f"{format_formula(x)} vs {format_formula(y)}")
        elif isinstance(x, BINARY):
            stack.append((x.right, y.right))
            stack.append((x.left, y.left))
        elif isinstance(x, MODAL) and x.channel == y.channel:
            stack.append((x.body, y.body))
        else:
            raise Clash(f"{format_formula(x)} vs {format_formula(y)}")
    return sigma


def unify_dual(a: Formula, b: Formula, sigma0: Mapping[str, Formula] | None = None,
               open_vars=frozenset()) -> Substitution:
    """Most general ``sigma`` with ``a sigma == (b sigma)^``."""
    return unify(a, negate(b), sigma0, open_vars)


def is_idempotent(sigma: Mapping[str, Formula]) -> bool:
    return all(substitute(v, sigma) == v for v in sigma.values())


# -- text ----------------------------------------------------------------------

def format_formula(a: Formula) -> str:
    if isinstance(a, Var):
        return a.name
    if isinstance(a, DualVar):
        return a.name + "^"
    if isinstance(a, BINARY):
        op = "*" if isinstance(a, Tensor) else "@"
        return f"{_operand(a.left)} {op} {_operand(a.right)}"
    sign = "+" if isinstance(a, ModPos) else "-"
    body = format_formula(a.body)
    if isinstance(a.body, BINARY):
        body = f"({body})"
    return f"<{a.channel}>{sign} {body}"


def _operand(a: Formula) -> str:
    text = format_formula(a)
    if isinstance(a, BINARY) or (isinstance(a, MODAL) and not isinstance(a.body, ATOMS + MODAL)):
        return f"({text})"
    return text


_FTOKEN = re.compile(r"(?P<lol>-o)|(?P<mod><[a-z][a-zA-Z0-9_]*>[+-])|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>[*@()^])")


def parse_formula(text: str) -> Formula:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _FTOKEN.match(text, pos)
        if not m:
            raise FormulaParseError(f"unexpected character {text[pos]!r}", text, pos)
        tokens.append((m.lastgroup, m.group(), m.start()))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    i = 0

    def peek():
        return tokens[i]

    def take(value=None):
        nonlocal i
        tok = tokens[i]
        if value is not None and tok[1] != value:
            raise FormulaParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", text, tok[2])
        i += 1
        return tok

    def implication():
        left = par_level()
        if peek()[0] == "lol":
            take()
            return lollipop(left, implication())
        return left

    def par_level():
        left = tensor_level()
        while peek()[1] == "@":
            take()
            left = Par(left, tensor_level())
        return left

    def tensor_level():
        left = unary()
        while peek()[1] == "*":
            take()
            left = Tensor(left, unary())
        return left

    def unary():
        kind, value, _ = peek()
        if kind == "mod":
            take()
            body = unary()
            channel = value[1:value.index(">")]
            return ModPos(channel, body) if value.endswith("+") else ModNeg(channel, body)
        return postfix()

    def postfix():
        kind, value, where = peek()
        if value == "(":
            take()
            inner = implication()
            take(")")
            result = inner
        elif kind == "name":
            take()
            result = Var(value)
        else:
            raise FormulaParseError(f"unexpected {value or 'end of input'!r}", text, where)
        while peek()[1] == "^":
            take()
            result = negate(result)
        return result

    result = implication()
    if peek()[0] != "eof":
        raise FormulaParseError(f"trailing input {peek()[1]!r}", text, peek()[2])
    return result
