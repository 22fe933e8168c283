"""Special q-objects: Pochhammer symbols, q-binomials, q-trinomials (round, T, t, U, V),
Borodin's product for cylindric partitions, product extraction from a series, and
Hirschhorn's triple sum."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

from gmpy2 import mpq

from .exact import ONE, ZERO, QPolynomial, poly, rat, sym

Q = sym("q")


def qpow(k, var: str = "q") -> QPolynomial:
    """q^k, with k an integer or half-integer."""
    k = mpq(k)
    if k.denominator == 1:
        return QPolynomial.var(var, int(k)) if k else ONE
    if k.denominator == 2 and var == "q":
        return QPolynomial.var("q12", int(2 * k))
    raise ValueError(f"unsupported exponent {k}")


def pochhammer(a, base, length: int) -> QPolynomial:
    """(a; base)_length = prod_{i<length} (1 - a*base^i)."""
    if length < 0:
        raise ValueError("negative Pochhammer length")
    a, base = poly(a), poly(base)
    out = ONE
    cur = a
    for _ in range(length):
        out = out * (ONE - cur)
        cur = cur * base
    return out


@lru_cache(maxsize=4096)
def _qbin_coeffs(top: int, bottom: int) -> tuple:
    # Pascal: [n,k] = [n-1,k-1] + q^k [n-1,k]
    if bottom < 0 or bottom > top:
        return ()
    if bottom == 0 or bottom == top:
        return (1,)
    a = _qbin_coeffs(top - 1, bottom - 1)
    b = _qbin_coeffs(top - 1, bottom)
    n = max(len(a), len(b) + bottom)
    out = [0] * n
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i + bottom] += c
    return tuple(out)


def q_binomial(top: int, bottom: int, base: str | int = "q") -> QPolynomial:
    """[top, bottom] in the given base (q or an integer g meaning q^g); 0 out of range."""
    if top < 0 or bottom < 0 or bottom > top:
        return ZERO
    g = 1 if base == "q" else int(base)
    coeffs = _qbin_coeffs(top, bottom)
    return QPolynomial({(g * e,): c for e, c in enumerate(coeffs) if c}, ("q",))


def q_binomial_param(top: int, bottom: int, base: QPolynomial) -> QPolynomial:
    """q-binomial with an arbitrary monomial base (e.g. q^2)."""
    if top < 0 or bottom < 0 or bottom > top:
        return ZERO
    out = ZERO
    for e, c in enumerate(_qbin_coeffs(top, bottom)):
        if c:
            out = out + base ** e * c
    return out


def q_factorial_poly(n: int) -> QPolynomial:
    return pochhammer(Q, Q, n)


# -- trinomials -------------------------------------------------------------------

def _invert_q(p: QPolynomial) -> QPolynomial:
    return p.subs("q", QPolynomial.var("q", -1)) if "q" in p.vars else p


def round_trinomial(L: int, b: int, a: int) -> QPolynomial:
    """(L, b; a; q)_2 = sum_m q^(m(m+b)) (q;q)_L / ((q;q)_m (q;q)_(m+a) (q;q)_(L-2m-a))."""
    if L < 0:
        raise ValueError("L must be non-negative")
    out = ZERO
    m = max(0, -a)
    while L - 2 * m - a >= 0:
        # (q;q)_L/((q;q)_m (q;q)_(m+a) (q;q)_(L-2m-a)) = [L, m+a] [L-m-a, m]
        term = q_binomial(L, m + a) * q_binomial(L - m - a, m)
        out = out + term * qpow(m * (m + b))
        m += 1
    return out


def trinomial_T(n: int, L: int, a: int) -> QPolynomial:
    """T_n(L, a; q) = q^((L-a)(L+a-n)/2) (L, a-n; a; 1/q)_2."""
    return qpow(mpq((L - a) * (L + a - n), 2)) * _invert_q(round_trinomial(L, a - n, a))


def trinomial_t(n: int, L: int, a: int) -> QPolynomial:
    """t_n(L, a; q) = q^(n(L-a)/2) (L, a-n; a; q)_2."""
    return qpow(mpq(n * (L - a), 2)) * round_trinomial(L, a - n, a)


def trinomial_U(n: int, L: int, a: int) -> QPolynomial:
    return trinomial_T(n, L, a + 1) + trinomial_T(n, L, a)


def trinomial_V(n: int, L: int, a: int) -> QPolynomial:
    return trinomial_T(n + 1, L, a + 1) + qpow(mpq(L - a, 2)) * trinomial_T(n, L, a)


def q_trinomial(kind: str, L: int, a: int, n: int = 0) -> QPolynomial:
    """Dispatch by kind: 'round' uses (L, n; a), the others T_n/t_n/U_n/V_n(L, a)."""
    if kind == "round":
        return round_trinomial(L, n, a)
    table = {"T": trinomial_T, "t": trinomial_t, "U": trinomial_U, "V": trinomial_V}
    if kind not in table:
        raise ValueError(f"unknown trinomial kind {kind!r}")
    return table[kind](n, L, a)


def at_q_equals_one(p: QPolynomial):
    """Sum of coefficients (value at q = 1, also for half-integral powers)."""
    return sum(p.terms.values(), mpq(0))


def trinomial_count(L: int, a: int) -> int:
    """Coefficient of x^a in (1 + x + x^(-1))^L."""
    return sum(comb(L, m) * comb(L - m, m + a) for m in range(0, L + 1) if 0 <= m + a <= L - m) if a >= 0 \
        else trinomial_count(L, -a)


# -- products -------------------------------------------------------------------

@dataclass(frozen=True)
class ProductDescriptor:
    """prod over exponents e of 1/(q^e; q^modulus)_inf (negative multiplicity = numerator)."""
    modulus: int
    exponents: tuple

    def __str__(self):
        parts = ",".join("q" if e == 1 else f"q^{e}" for e in sorted(self.exponents))
        base = "q" if self.modulus == 1 else f"q^{self.modulus}"
        return f"1/({parts};{base})_inf"

    def series(self, order: int) -> list:
        return product_series(_multiset(self.exponents), self.modulus, order)


def _multiset(exps) -> dict:
    out: dict = {}
    for e in exps:
        out[e] = out.get(e, 0) + 1
    return out


def product_series(exponents: dict, modulus: int, order: int) -> list:
    """Coefficients through q^order of prod_e (q^e; q^modulus)_inf^(-mult_e)."""
    a = [mpq(0)] * (order + 1)
    a[0] = mpq(1)
    for e, mult in exponents.items():
        k = e
        while k <= order:
            for _ in range(abs(mult)):
                if mult > 0:
                    for i in range(k, order + 1):       # times 1/(1 - q^k)
                        a[i] += a[i - k]
                else:
                    for i in range(order, k - 1, -1):   # times (1 - q^k)
                        a[i] -= a[i - k]
            k += modulus
    return a


def eta_series(exps_by_n: dict, order: int) -> list:
    """prod_n (1 - q^n)^(-e_n) through q^order."""
    return product_series({n: e for n, e in exps_by_n.items()}, order + 1, order)


def borodin_product(profile) -> ProductDescriptor:
    """Borodin's evaluation of the cylindric generating function at z = 1."""
    c = list(profile)
    k = len(c)
    if k < 1 or any(v < 0 for v in c):
        raise ValueError("profile must be non-empty with non-negative entries")
    t = k + sum(c)

    def s(i, j):                       # c_i + ... + c_j, 1-based; empty when i > j
        return sum(c[i - 1:j]) if i <= j else 0

    exps = [t]
    for i in range(1, k + 1):
        for j in range(i, k + 1):
            for m in range(1, c[i - 1] + 1):
                exps.append(m + s(i + 1, j) + j - i)
    for i in range(2, k + 1):
        for j in range(2, i + 1):
            for m in range(1, c[i - 1] + 1):
                exps.append(t - m - s(j, i - 1) + j - i)
    return ProductDescriptor(t, tuple(sorted(exps)))


@dataclass(frozen=True)
class ProdMakeResult:
    exponents: tuple          # e_1 .. e_order
    integral: bool


def prod_make(coeffs, order: int | None = None) -> ProdMakeResult:
    """Find e_n with f = prod_n (1 - q^n)^(-e_n) through the given order."""
    b = [mpq(c) for c in coeffs]
    if not b or b[0] != 1:
        raise ValueError("series must have constant term 1")
    N = len(b) - 1 if order is None else order
    if N > len(b) - 1:
        raise ValueError("order exceeds the available coefficients")
    c = [mpq(0)] * (N + 1)
    e = [mpq(0)] * (N + 1)
    for m in range(1, N + 1):
        acc = m * b[m]
        for i in range(1, m):
            acc -= c[i] * b[m - i]
        c[m] = acc
        s = c[m]
        for d in range(1, m):
            if m % d == 0:
                s -= d * e[d]
        e[m] = s / m
    ex = tuple(e[1:])
    return ProdMakeResult(ex, all(v.denominator == 1 for v in ex))


def q_series_of(p: QPolynomial, order: int) -> list:
    """Coefficient list of a polynomial in q (non-negative powers only)."""
    out = [mpq(0)] * (order + 1)
    for e, c in p.terms.items():
        k = e[0] if p.vars else 0
        if p.vars and p.vars != ("q",):
            raise ValueError("expected a polynomial in q")
        if k < 0:
            raise ValueError("negative power of q")
        if k <= order:
            out[k] += c
    return out


# -- Hirschhorn -------------------------------------------------------------------

def hirschhorn_sum(a, b, c, d, n: int, base: int = 1):
    """sum a^i b^(n-i-j-k) c^j d^(k-j) Q^(C(j+1,2)+C(k+1,2)) [k+i,i][n-i-j,k][k,j], Q = q^base."""
    if n < 0:
        return rat(0)
    a, b, c, d = rat(a), rat(b), rat(c), rat(d)
    total = rat(0)
    for i in range(n + 1):
        for j in range(n - i + 1):
            for k in range(j, n - i - j + 1):
                w = q_binomial(k + i, i, base) * q_binomial(n - i - j, k, base) * q_binomial(k, j, base)
                w = w * QPolynomial.var("q", base * (j * (j + 1) // 2 + k * (k + 1) // 2))
                total = total + rat(w) * a ** i * b ** (n - i - j - k) * c ** j * d ** (k - j)
    return total


def hirschhorn_recurrence_values(a, b, c, d, count: int, base: int = 1) -> list:
    """a_{-1} = 0, a_0 = 1, a_{n+2} = (a+b+d Q^(n+2)) a_{n+1} + (-ab + c Q^(n+2)) a_n."""
    a, b, c, d = rat(a), rat(b), rat(c), rat(d)
    vals = [rat(0), rat(1)]
    n = -1
    while len(vals) < count + 1:
        Qn2 = rat(QPolynomial.var("q", base * (n + 2)))
        vals.append((a + b + d * Qn2) * vals[-1] + (-a * b + c * Qn2) * vals[-2])
        n += 1
    return vals[1:count + 1]
