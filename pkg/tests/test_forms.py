from gmpy2 import mpq
from hypothesis import assume, given, settings, strategies as st

from qfun.exact import ONE, QPolynomial, rat, sym
from qfun.forms import (SeriesPochhammer, SequencePochhammer, SubstitutionFactor, convert, de_to_se,
                        q_factorial, re_to_se, recurrence, se_to_de, se_to_re, series_solution_residual,
                        shift_equation, substitute_re, substitute_se, unroll)

from strategies import polynomials

q, x, Qn = sym("q"), sym("x"), sym("Qn")

se_coefficients = polynomials(vars=("q", "x"), max_terms=3, max_exp=2)


@st.composite
def shift_equations(draw):
    order = draw(st.integers(1, 3))
    terms = {k: draw(se_coefficients) for k in range(order)}
    terms[order] = draw(se_coefficients.filter(bool))
    assume(terms[0])
    return shift_equation(terms)


@st.composite
def recurrences(draw):
    # leading coefficient 1 + Qn-free part keeps unrolling well defined for n >= 0
    order = draw(st.integers(1, 2))
    coeffs = {i: draw(polynomials(vars=("q", "Qn"), max_terms=2, max_exp=2)) for i in range(order)}
    coeffs[order] = ONE + q * Qn
    return recurrence(coeffs)


def test_reference_shift_equation_conversions():
    se = shift_equation({2: 1, 0: -q * x ** 2})
    rec = convert(se, "qRE")
    assert rec.to_text() == "a(n+2)*q^(2*n+4) - a(n)*q"
    back = re_to_se(rec)
    assert back.homogeneous_part().equivalent(se)
    assert {j: str(c) for j, c in back.boundary.items()} == {0: "-1", 1: "-q^2*x"}


@settings(max_examples=30)
@given(recurrences(), st.lists(polynomials(vars=("q",), max_terms=2), min_size=2, max_size=2))
def test_solution_preserved_re_to_se(rec, init):
    vals = unroll(rec, 0, init[:rec.order], 15)
    se = re_to_se(rec)
    assert all(r == 0 for r in series_solution_residual(se, vals, 14))
    back = se_to_re(se).recurrence
    for n in back.op.admissible_range(0, 15):
        if n >= back.valid_from:
            assert back.op.apply_to_sequence(vals, n) == 0


@settings(max_examples=30)
@given(shift_equations())
def test_se_re_se_round_trip_modulo_boundary(se):
    back = re_to_se(se_to_re(se).recurrence)
    assert back.homogeneous_part().equivalent(se)


@settings(max_examples=30)
@given(shift_equations())
def test_se_de_round_trip(se):
    assert de_to_se(se_to_de(se)).equivalent(se)


def test_boundary_law():
    # order-4 recurrence: boundary terms reach x^3
    rec = recurrence({4: 1 - q ** 2 * Qn, 2: q, 0: -Qn ** 2})
    se = re_to_se(rec)
    de = se_to_de(se)
    assert max(se.boundary) == 3
    ratios = {rat(de.init[j]) * rat(q_factorial(j)) / rat(se.boundary[j]) for j in se.boundary}
    assert len(ratios) == 1
    assert de_to_se(de).equivalent(se)


def test_q_derivative_of_series_at_zero():
    # D^j F(0) = [j]_q! <x^j>F for F = sum a_m x^m
    a = [rat(1 + m * q) for m in range(6)]
    for j in range(4):
        coeffs = list(a)
        for _ in range(j):
            # D x^m = [m]_q x^(m-1)
            coeffs = [coeffs[m + 1] * rat(sum((q ** i for i in range(m + 1)), 0 * q))
                      for m in range(len(coeffs) - 1)]
        assert coeffs[0] == a[j] * rat(q_factorial(j))


def _reciprocal(factor):
    atoms = tuple(type(a)(*[getattr(a, f) for f in a.__dataclass_fields__ if f != "power"], -a.power)
                  for a in factor.atoms)
    return SubstitutionFactor(atoms, 1 / factor.coeff if factor.coeff != ONE else ONE,
                              -factor.xpow, tuple(-e for e in factor.qexp))


@settings(max_examples=20)
@given(recurrences(), st.integers(1, 2), st.integers(0, 2), st.integers(-2, 2))
def test_substitute_re_then_reciprocal(rec, base, mu, square):
    fac = SubstitutionFactor(atoms=(SequencePochhammer(q ** base, base, 1, mu, 1),),
                             qexp=(mpq(square), mpq(0), mpq(0)))
    there = substitute_re(rec, fac, "g")
    back = substitute_re(there, _reciprocal(fac), "a")
    assert back.equivalent(rec)


def test_substitution_is_new_equals_factor_times_old():
    # a(n) = q^(n^2): a(n+1) - q^(2n+1) a(n) = 0; g = a / q^(n^2) is constant
    rec = recurrence({1: ONE, 0: -q * Qn ** 2})
    g = substitute_re(rec, SubstitutionFactor(qexp=(mpq(-1), mpq(0), mpq(0))), "g")
    assert g.to_text() == "g(n+1) - g(n)"


def test_substitute_se_infinite_pochhammer():
    # F = 1/(x;q)_inf obeys (1-x)F(x) = F(qx), so B = (x;q)_inf F is constant
    se = shift_equation({0: 1 - x, 1: -1})
    fac = SubstitutionFactor(atoms=(SeriesPochhammer(ONE, 1, 1, None, 1),))
    assert substitute_se(se, fac, "B").equivalent(shift_equation({0: 1, 1: -1}, unknown="B"))
