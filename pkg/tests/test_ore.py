from hypothesis import given, settings, strategies as st

from qfun.exact import QPolynomial, rat, sym
from qfun.forms import recurrence, unroll
from qfun.ore import CoupledSystem, OreOperator, gcrd, right_divide, shift_operator

from strategies import polynomials

q, Qn = sym("q"), sym("Qn")

coefficients = polynomials(vars=("q", "Qn"), max_terms=2, max_exp=2)


@st.composite
def operators(draw, max_order=1):
    order = draw(st.integers(0, max_order))
    coeffs = {i: draw(coefficients) for i in range(order)}
    coeffs[order] = draw(coefficients.filter(bool))
    return OreOperator(coeffs, "Qn", 1)


def _values(count):
    # a generic sequence of polynomials in q
    return [rat(1 + i * q + q ** (i * i % 5)) for i in range(count)]


def test_commutation_rule():
    S = shift_operator(1)
    v = OreOperator({0: Qn}, "Qn", 1)
    assert S * v == OreOperator({1: q * Qn}, "Qn", 1)
    S2 = shift_operator(1, stride=2)
    v2 = OreOperator({0: Qn}, "Qn", 2)
    assert S2 * v2 == OreOperator({1: q ** 2 * Qn}, "Qn", 2)


@settings(max_examples=40)
@given(operators(), operators(), operators())
def test_multiplication_associative(A, B, C):
    assert (A * B) * C == A * (B * C)


@settings(max_examples=40)
@given(operators(), operators())
def test_product_acts_as_composition(A, B):
    vals = _values(8)
    inner = {n: B.apply_to_sequence(vals, n) for n in range(0, 8 - B.order)}
    for n in range(0, 8 - B.order - A.order):
        assert (A * B).apply_to_sequence(vals, n) == A.apply_to_sequence(inner, n)


@settings(max_examples=25)
@given(operators(max_order=1), operators(max_order=1), operators(max_order=1))
def test_gcrd_right_divides_both(L1, L2, G):
    A, B = L1 * G, L2 * G
    g = gcrd(A, B)
    for X in (A, B):
        _, rem = right_divide(X, g)
        assert rem.is_zero()
    # the planted common factor divides the gcrd
    _, rem = right_divide(g, G)
    assert rem.is_zero()


@settings(max_examples=20)
@given(operators(max_order=1), operators(max_order=1), operators(max_order=1))
def test_gcrd_under_left_multiplication(A, B, L):
    if not (A.order or B.order):
        return
    g = gcrd(A, B)
    # L may share factors with B, so the gcrd can only grow
    assert right_divide(gcrd(L * A, B), g)[1].is_zero()
    # adding a left multiple of A is a Euclid step and changes nothing
    if not (B + L * A).is_zero():
        assert gcrd(A, B + L * A).equivalent(g)


def test_gcrd_of_reference_pair():
    a = recurrence({2: q ** 4 * Qn ** 2, 0: -q})
    b = recurrence({4: q ** 10 * Qn ** 4, 0: -1})
    assert gcrd(a.op, b.op).to_text("a", "n") == "a(n+2)*q^(2*n+3) - a(n)"


def test_normalization_sign_and_content():
    op = OreOperator({0: 2 * q, 1: -4 * q * Qn}, "Qn", 1).normalized()
    assert op == OreOperator({0: -1, 1: 2 * Qn}, "Qn", 1)


def test_uncoupled_operator_annihilates_unrolled_values():
    # g1(n) = g2(n-1) + q^n g1(n-1), g2(n) = g1(n) + Qn g2(n-1)
    rows = [{"g1": OreOperator({0: 1, -1: -Qn}, "Qn", 1), "g2": OreOperator({-1: -1}, "Qn", 1)},
            {"g1": OreOperator({0: -1}, "Qn", 1), "g2": OreOperator({0: 1, -1: -Qn}, "Qn", 1)}]
    cs = CoupledSystem(rows, ["g1", "g2"])
    vals = cs.unroll({"g1": [1], "g2": [1]}, 0, 20)
    for u, op in cs.uncouple().items():
        seq = vals[u]
        hits = [n for n in op.admissible_range(0, 20) if n >= 1]
        assert len(hits) >= 12
        assert all(op.apply_to_sequence(seq, n) == 0 for n in hits)


def test_unroll_two_term():
    rec = recurrence({2: q ** 4 * Qn ** 2, 0: -q})
    assert [str(v) for v in unroll(rec, -2, [1, q], 5)] == ["1", "q", "q", "1", "q^(-2)"]
