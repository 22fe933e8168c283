import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from qfun.exact import rat, sym
from qfun.expr import (Add, Call, Div, EvalError, Mul, Neg, Num, ParseError, Pow, Sym, evaluate,
                       expand_series, parse, parse_equation, to_text)

q, x = sym("q"), sym("x")

leaves = st.one_of(
    st.builds(lambda v: Num(mpq(v)), st.integers(0, 20)),
    st.builds(lambda a, b: Num(mpq(a, b)), st.integers(-9, 9), st.integers(1, 5)),
    st.sampled_from([Sym("q"), Sym("x"), Sym("a"), Sym("n")]),
)


def _extend(children):
    return st.one_of(
        st.builds(lambda b, e: Pow(b, Num(mpq(e))), children, st.integers(0, 4)),
        st.builds(lambda b, e: Pow(b, e), children, children),
        st.builds(lambda fs: Mul(tuple(fs)), st.lists(children, min_size=2, max_size=3)),
        st.builds(lambda ts: Add(tuple(ts)), st.lists(children, min_size=2, max_size=3)),
        st.builds(Neg, children),
        st.builds(Div, children, children),
        st.builds(lambda args: Call("F", tuple(args)), st.lists(children, min_size=1, max_size=2)),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=200)
@given(trees)
def test_print_parse_identity(tree):
    # the parser folds signs and literal quotients, so compare from its output on
    canonical = parse(to_text(tree))
    assert parse(to_text(canonical)) == canonical


@settings(max_examples=100)
@given(trees)
def test_printing_preserves_value(tree):
    try:
        before = evaluate(tree)
    except (EvalError, ZeroDivisionError, ValueError):
        return
    assert evaluate(parse(to_text(tree))) == before


def test_double_caret_offset():
    with pytest.raises(ParseError) as info:
        parse("q^^2")
    assert info.value.offset == 2
    assert "offset 2" in str(info.value)


def test_implicit_multiplication_rejected():
    with pytest.raises(ParseError):
        parse("2 q")
    assert parse("2 q", mma=True) == Mul((Num(mpq(2)), Sym("q")))


def test_brackets_only_with_compatibility_flag():
    with pytest.raises(ParseError):
        parse("F[q*x]")
    assert parse("F[q x]", mma=True) == Call("F", (Mul((Sym("q"), Sym("x"))),))


def test_unknown_function_rejected():
    with pytest.raises(EvalError):
        evaluate(parse("foo(q)"))


def test_affine_exponents():
    assert evaluate(parse("q^(2*n+4)"), {"n": 3}) == rat(q ** 10)
    assert evaluate(parse("qPochhammer(q, q, 3)")) == rat((1 - q) * (1 - q ** 2) * (1 - q ** 3))


def test_series_expansion_of_rogers_ramanujan_sum():
    s = expand_series(parse("Sum(x^k*q^(k^2)/qPochhammer(q, q, k), k, 0, 10)"), "x", 3)
    assert s.c[2] == rat(q ** 4) / rat((1 - q) * (1 - q ** 2))


def test_parse_bracket_style_equation():
    eq = parse_equation("F[x q^2] - x^2 q F[x]", mma=True)
    assert eq.to_text() == "F(q^2*x) - q*x^2*F(x)"
    rec = parse_equation("a(n+2)*q^(2*n+4) - q*a(n)")
    assert rec.to_text() == "a(n+2)*q^(2*n+4) - a(n)*q"


def test_sequence_factor_length_slope():
    from qfun.expr import parse_factor
    f = parse_factor("qPochhammer(q^2,q^2,n)/qPochhammer(q,q,2*n+1)", "sequence")
    assert [(a.lam, a.mu, a.power) for a in f.atoms] == [(1, 0, 1), (2, 1, -1)]


def test_runaway_power_is_refused():
    with pytest.raises(EvalError):
        evaluate(parse("(2*q + 1)^(20^3)"))
    assert evaluate(parse("q^(20^3)")) == rat(q ** 8000)
