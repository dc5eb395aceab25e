import pytest

from proofsched.formula import (
    Clash, FormulaParseError, OccursCheck, format_formula, is_idempotent, lollipop, negate,
    parse_formula, substitute, unify, unify_dual, variables,
)

F = parse_formula


@pytest.mark.parametrize("a,expected", [
    ("<a>+ x", "<a>- x^"),
    ("x @ y", "x^ * y^"),
    ("x * y", "x^ @ y^"),
    ("<b>- (x * y^)", "<b>+ (x^ @ y)"),
])
def test_negate(a, expected):
    assert negate(F(a)) == F(expected)


@pytest.mark.parametrize("a", ["(x * y^) @ <b>- z", "x", "<a>+ (x @ y) * z^"])
def test_negate_is_an_involution(a):
    assert negate(negate(F(a))) == F(a)


@pytest.mark.parametrize("a,b,expected", [
    ("x", "x", "x^ @ x"),
    ("x * y", "z", "(x^ @ y^) @ z"),
    ("<a>+ x", "y^ @ y", "<a>- x^ @ (y^ @ y)"),
])
def test_lollipop(a, b, expected):
    assert lollipop(F(a), F(b)) == F(expected)


def test_lollipop_sugar_in_the_grammar():
    assert F("x * y -o z") == F("(x^ @ y^) @ z")


@pytest.mark.parametrize("text", ["x^ @ x", "(x * y) @ z", "<a>+ (x^ @ (x * y))", "x * y * z"])
def test_print_parse_roundtrip(text):
    assert F(format_formula(F(text))) == F(text)


def test_precedence():
    assert F("x * y @ z") == F("(x * y) @ z")
    assert F("x @ y @ z") == F("(x @ y) @ z")


@pytest.mark.parametrize("text", ["x *", "(x", "<a> x", "x ^ ^ y", ""])
def test_parse_errors(text):
    with pytest.raises(FormulaParseError):
        F(text)


def test_substitute():
    assert substitute(F("x^ @ x"), {"x": F("y * z")}) == F("(y^ @ z^) @ (y * z)")
    assert substitute(F("x^ @ x"), {}) == F("x^ @ x")


def test_unify_dual_binds_open_variables():
    assert unify_dual(F("X"), F("<a>+ y"), open_vars={"X"}) == {"X": F("<a>- y^")}
    assert unify_dual(F("x * X"), F("x^ @ <b>- z"), open_vars={"X"}) == {"X": F("<b>+ z^")}


def test_unify_dual_occurs_check():
    with pytest.raises(OccursCheck):
        unify_dual(F("X"), F("X"), open_vars={"X"})


def test_rigid_variables_do_not_bind():
    with pytest.raises(Clash):
        unify(F("x"), F("y * z"))
    assert unify(F("x"), F("x")) == {}


def test_channel_mismatch_clashes():
    with pytest.raises(Clash):
        unify(F("<a>+ x"), F("<b>+ x"))


def test_unifier_is_idempotent_and_general():
    sigma = unify(F("X * Y"), F("Y * (z @ w)"), open_vars={"X", "Y"})
    assert is_idempotent(sigma)
    assert substitute(F("X * Y"), sigma) == substitute(F("Y * (z @ w)"), sigma)
    assert variables(substitute(F("X"), sigma)) == {"z", "w"}
