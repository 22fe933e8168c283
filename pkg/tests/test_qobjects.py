from hypothesis import given, strategies as st

from qfun.exact import QPolynomial, rat, sym
from qfun.forms import recurrence, unroll
from qfun.qobjects import (at_q_equals_one, borodin_product, hirschhorn_recurrence_values, hirschhorn_sum,
                           pochhammer, prod_make, product_series, q_binomial, round_trinomial,
                           trinomial_T, trinomial_count)

q = sym("q")


def _times(a, b):
    return [sum(a[i] * b[m - i] for i in range(m + 1)) for m in range(len(a))]


@given(st.integers(0, 12), st.integers(0, 12))
def test_q_binomial_symmetry(n, k):
    assert q_binomial(n, k) == q_binomial(n, n - k)


def test_pascal_in_both_forms():
    for n in range(1, 11):
        for k in range(1, n):
            assert q_binomial(n, k) == q_binomial(n - 1, k - 1) + q ** k * q_binomial(n - 1, k)
            assert q_binomial(n, k) == q ** (n - k) * q_binomial(n - 1, k - 1) + q_binomial(n - 1, k)


def test_q_binomial_edges():
    assert q_binomial(2, 1) == 1 + q
    assert q_binomial(3, 5).is_zero()
    assert at_q_equals_one(q_binomial(5, 2)) == 10
    assert rat(q_binomial(6, 3)) == rat(pochhammer(q, q, 6), pochhammer(q, q, 3) ** 2)


def _brute_trinomial(L, a):
    # coefficient of x^(L+a) in (1 + x + x^2)^L, by repeated convolution
    row = [1]
    for _ in range(L):
        row = [sum(row[i - d] for d in range(3) if 0 <= i - d < len(row)) for i in range(len(row) + 2)]
    return row[L + a] if 0 <= L + a < len(row) else 0


def test_round_trinomial_at_one_counts_centered_trinomials():
    for L in range(9):
        for a in range(-L - 1, L + 2):
            for b in (0, 1, -1):
                value = at_q_equals_one(round_trinomial(L, b, a))
                assert value == trinomial_count(L, a) == _brute_trinomial(L, a)


def test_trinomial_T_boundary():
    for L in range(7):
        assert trinomial_T(0, L, L) == QPolynomial.const(1)


def test_borodin_rotations_agree():
    series = [borodin_product(p).series(25) for p in ((2, 1, 1), (1, 2, 1), (1, 1, 2))]
    assert series[0] == series[1] == series[2]


def test_borodin_trivial_profile():
    d = borodin_product((0,))
    assert d.modulus == 1 and d.exponents == (1,)


def test_borodin_products_for_four_zero_and_three_one():
    euler = product_series({1: -1}, 1, 30)
    three_one = _times(borodin_product((3, 1)).series(30), euler)
    four_zero = _times(borodin_product((4, 0)).series(30), euler)
    assert three_one == product_series({1: 1, 3: 1, 5: 1}, 6, 30)
    assert four_zero == product_series({2: 1, 3: 1, 4: 1}, 6, 30)


def test_prod_make_recovers_exponents():
    target = product_series({3: -1, 1: 1, 2: 1, 4: 1, 5: 1}, 6, 30)
    ex = prod_make(target).exponents
    assert ex == tuple([1, 1, -1, 1, 1, 0] * 5)
    assert prod_make(product_series({1: 1}, 1, 10)).exponents == (1,) * 10
    assert prod_make([1] + [0] * 8).exponents == (0,) * 8


def test_hirschhorn_matches_recurrence():
    for args in ((1, q, q ** -1, q ** -1), (1, q, q ** -1, 1)):
        sums = [hirschhorn_sum(*args, n, 2) for n in range(11)]
        assert sums == hirschhorn_recurrence_values(*args, 11, 2)
    assert hirschhorn_sum(1, q, q ** -1, q ** -1, 0, 2) == rat(1)


def test_hirschhorn_is_the_h_recurrence():
    Qn = sym("Qn")
    rec = recurrence({2: 1, 1: -(1 + q + q ** 3 * Qn ** 2), 0: -q * (-1 + q ** 2 * Qn ** 2)})
    unrolled = unroll(rec, -1, [0, 1], 12)[1:]
    for n in range(11):
        assert hirschhorn_sum(1, q, q ** -1, q ** -1, n, 2) == rat(unrolled[n])
