"""Exact arithmetic: sparse Laurent polynomials and rational functions over Q.

Polynomials live in q plus any number of auxiliary symbols (x, z, a, b, ...,
and ``Qn`` standing for q^n).  Coefficients are ``gmpy2.mpq``.  The variable
list of a polynomial is always the sorted set of symbols it actually uses, so
structurally equal polynomials compare and hash equal regardless of how they
were built.

Half-integral powers of q are carried by the symbol ``q12`` (= q^(1/2)).  A
polynomial containing ``q12`` expresses all of its q-dependence through it; when
every ``q12`` exponent is even the polynomial is folded back to ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd as igcd, isqrt
from typing import Iterable, Mapping, Union

import gmpy2
from gmpy2 import mpq, mpz

Rational = mpq
Number = Union[int, mpq]

HALF_Q = "q12"


def var_key(name: str):
    """Sort key for symbols: q first, then Qn/Qk, then alphabetical."""
    if name == "q":
        return (0, name)
    if name == HALF_Q:
        return (1, name)
    if name.startswith("Q"):
        return (2, name)
    return (3, name)


def _as_mpq(c) -> mpq:
    if isinstance(c, mpq):
        return c
    if isinstance(c, (int, type(mpz(0)))):
        return mpq(c)
    return mpq(c)


def _lcm(a: int, b: int) -> int:
    return a // igcd(a, b) * b


class QPolynomial:
    """Immutable sparse Laurent polynomial with rational coefficients."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, terms: Mapping[tuple, Number] | None = None, vars: Iterable[str] = ()):
        vars = tuple(vars)
        clean = {}
        if terms:
            for e, c in terms.items():
                c = _as_mpq(c)
                if c:
                    if len(e) != len(vars):
                        raise ValueError("exponent length does not match variables")
                    clean[e] = c
        self.vars, self.terms = _canonical(vars, clean)
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def const(cls, c: Number) -> "QPolynomial":
        return cls({(): c}, ())

    @classmethod
    def var(cls, name: str, power: int = 1) -> "QPolynomial":
        return cls({(power,): 1}, (name,))

    @classmethod
    def monomial(cls, coeff: Number = 1, powers: Mapping[str, int] | None = None) -> "QPolynomial":
        powers = dict(powers or {})
        vs = tuple(sorted(powers, key=var_key))
        return cls({tuple(powers[v] for v in vs): coeff}, vs)

    @classmethod
    def _raw(cls, vars: tuple, terms: dict) -> "QPolynomial":
        # terms already clean (no zeros); still canonicalize the variable set
        obj = cls.__new__(cls)
        obj.vars, obj.terms = _canonical(vars, terms)
        obj._hash = None
        return obj

    # -- basic queries ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_const(self) -> bool:
        return not self.vars

    def const_value(self) -> mpq:
        if not self.vars:
            return self.terms.get((), mpq(0))
        raise ValueError(f"{self} is not a constant")

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def nterms(self) -> int:
        return len(self.terms)

    def degree(self, var: str) -> int:
        if var not in self.vars:
            return 0 if self.terms else -1
        i = self.vars.index(var)
        return max(e[i] for e in self.terms)

    def min_degree(self, var: str) -> int:
        if var not in self.vars:
            return 0
        i = self.vars.index(var)
        return min(e[i] for e in self.terms)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def leading(self) -> tuple[tuple, mpq]:
        """Leading (exponent, coefficient) in graded lexicographic order."""
        e = max(self.terms, key=lambda t: (sum(t), t))
        return e, self.terms[e]

    def leading_coeff(self) -> mpq:
        return self.leading()[1]

    def exponents_of(self, var: str) -> list[int]:
        if var not in self.vars:
            return [0] if self.terms else []
        i = self.vars.index(var)
        return sorted({e[i] for e in self.terms})

    def coeffs_in(self, var: str) -> dict[int, "QPolynomial"]:
        """Split into {power of var: coefficient polynomial free of var}."""
        if var not in self.vars:
            return {0: self} if self.terms else {}
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1:]
        groups: dict[int, dict] = {}
        for e, c in self.terms.items():
            groups.setdefault(e[i], {})[e[:i] + e[i + 1:]] = c
        return {k: QPolynomial._raw(rest, t) for k, t in groups.items()}

    def coeff(self, var: str, power: int) -> "QPolynomial":
        return self.coeffs_in(var).get(power, ZERO)

    def free_of(self, var: str) -> bool:
        return var not in self.vars

    def content(self) -> mpq:
        """Positive rational g with self/g having coprime integer coefficients."""
        if not self.terms:
            return mpq(1)
        num = 0
        den = 1
        for c in self.terms.values():
            num = igcd(num, int(c.numerator))
            den = _lcm(den, int(c.denominator))
        return mpq(num, den)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, QPolynomial):
            return other
        if isinstance(other, (int, type(mpq(0)), type(mpz(0)))):
            return QPolynomial.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        vs, a, b = _align(self, other)
        out = dict(a)
        for e, c in b.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return QPolynomial._raw(vs, out)

    __radd__ = __add__

    def __neg__(self):
        return QPolynomial._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, QRationalFunction):
            return NotImplemented
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.terms or not other.terms:
            return ZERO
        if not other.vars:
            c = other.terms[()]
            return QPolynomial._raw(self.vars, {e: v * c for e, v in self.terms.items()})
        if not self.vars:
            c = self.terms[()]
            return QPolynomial._raw(other.vars, {e: v * c for e, v in other.terms.items()})
        if self.vars == other.vars and len(self.vars) == 1 \
                and len(self.terms) * len(other.terms) > _KRON_MIN:
            la, da, na = _uni_split(self)
            lb, db, nbb = _uni_split(other)
            return _from_dense(self.vars[0], la + lb, _kron_mul(da, db), na * nbb)
        vs, a, b = _align(self, other)
        out: dict = {}
        get = out.get
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple([x + y for x, y in zip(e1, e2)])
                s = get(e)
                out[e] = c1 * c2 if s is None else s + c1 * c2
        return QPolynomial._raw(vs, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise ZeroDivisionError("negative power of a non-monomial polynomial")
            (e, c), = self.terms.items()
            return QPolynomial._raw(self.vars, {tuple(x * n for x in e): c ** n})
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c: Number) -> "QPolynomial":
        c = _as_mpq(c)
        if not c:
            return ZERO
        return QPolynomial._raw(self.vars, {e: v * c for e, v in self.terms.items()})

    def __truediv__(self, other):
        if isinstance(other, (int, type(mpq(0)))):
            return self.scale(mpq(1) / _as_mpq(other))
        return QRationalFunction(self, other)

    def __rtruediv__(self, other):
        return QRationalFunction(other, self)

    def __eq__(self, other):
        if isinstance(other, QRationalFunction):
            return other == self
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    # -- substitution and evaluation ----------------------------------------
    def subs(self, var: str, value) -> "QPolynomial | QRationalFunction":
        """Replace ``var`` by ``value`` (polynomial, rational function or number)."""
        if var not in self.vars:
            return self
        if isinstance(value, (int, type(mpq(0)))):
            value = QPolynomial.const(value)
        if isinstance(value, QRationalFunction) and value.den.is_const():
            value = value.num.scale(1 / value.den.const_value())
        if isinstance(value, QPolynomial) and len(value.terms) == 1:
            return self._subs_monomial(var, value)
        if isinstance(value, QPolynomial) and value.is_zero():
            if self.min_degree(var) < 0:
                raise ZeroDivisionError(f"substituting {var} = 0 into a negative power")
        result = QRationalFunction(ZERO)
        any_neg = False
        parts = self.coeffs_in(var)
        for k, c in parts.items():
            if k < 0:
                any_neg = True
        if not any_neg and isinstance(value, QPolynomial):
            acc = ZERO
            for k, c in parts.items():
                acc = acc + c * value ** k
            return acc
        value = QRationalFunction(value) if not isinstance(value, QRationalFunction) else value
        for k, c in parts.items():
            result = result + QRationalFunction(c) * value ** k
        return result

    def _subs_monomial(self, var: str, value: "QPolynomial") -> "QPolynomial":
        (ve, vc), = value.terms.items()
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1:]
        vs = tuple(sorted(set(rest) | set(value.vars), key=var_key))
        pos_rest = [vs.index(v) for v in rest]
        pos_val = [vs.index(v) for v in value.vars]
        out: dict = {}
        n = len(vs)
        for e, c in self.terms.items():
            k = e[i]
            if k < 0 and not vc:
                raise ZeroDivisionError("negative power of zero")
            ne = [0] * n
            for p, x in zip(pos_rest, e[:i] + e[i + 1:]):
                ne[p] += x
            for p, x in zip(pos_val, ve):
                ne[p] += x * k
            ne = tuple(ne)
            cc = c * vc ** k
            s = out.get(ne)
            out[ne] = cc if s is None else s + cc
        return QPolynomial._raw(vs, {e: c for e, c in out.items() if c})

    def subs_many(self, mapping: Mapping[str, object]):
        out = self
        for v, val in mapping.items():
            out = out.subs(v, val)
        return out

    def qshift(self, var: str, k: int, base: str = "q") -> "QPolynomial":
        """Substitute var -> base^k * var (the q-shift action)."""
        if var not in self.vars:
            return self
        return self._subs_monomial(var, QPolynomial.monomial(1, {base: k, var: 1}) if k else QPolynomial.var(var))

    def rename(self, mapping: Mapping[str, str]) -> "QPolynomial":
        vs = tuple(mapping.get(v, v) for v in self.vars)
        if len(set(vs)) != len(vs):
            out = ZERO
            for e, c in self.terms.items():
                out = out + QPolynomial.monomial(c, {}) * _mono(vs, e)
            return out
        order = sorted(range(len(vs)), key=lambda i: var_key(vs[i]))
        nv = tuple(vs[i] for i in order)
        return QPolynomial._raw(nv, {tuple(e[i] for i in order): c for e, c in self.terms.items()})

    def __call__(self, **values):
        return self.subs_many(values)

    # -- printing -----------------------------------------------------------
    def sorted_terms(self) -> list[tuple[tuple, mpq]]:
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"QPolynomial({format_poly(self)!r})"


def _mono(vars, e):
    out = ONE
    for v, k in zip(vars, e):
        if k:
            out = out * QPolynomial.var(v, k)
    return out


def _canonical(vars: tuple, terms: dict) -> tuple[tuple, dict]:
    if not terms:
        return (), {}
    n = len(vars)
    used = [i for i in range(n) if any(e[i] for e in terms)]
    if len(used) != n or any(var_key(vars[i]) >= var_key(vars[i + 1]) for i in range(n - 1)):
        order = sorted(used, key=lambda i: var_key(vars[i]))
        merged: dict = {}
        for e, c in terms.items():
            ne = tuple(e[i] for i in order)
            s = merged.get(ne)
            merged[ne] = c if s is None else s + c
        vars = tuple(vars[i] for i in order)
        terms = {e: c for e, c in merged.items() if c}
        if len(set(vars)) != len(vars):
            raise ValueError("duplicate variable names")
        if not terms:
            return (), {}
    if HALF_Q in vars:
        vars, terms = _fold_half(vars, terms)
    return vars, terms


def _fold_half(vars: tuple, terms: dict) -> tuple[tuple, dict]:
    h = vars.index(HALF_Q)
    if "q" in vars:
        qi = vars.index("q")
        new = {}
        for e, c in terms.items():
            ne = list(e)
            ne[h] += 2 * ne[qi]
            ne[qi] = 0
            ne = tuple(ne)
            new[ne] = new.get(ne, 0) + c
        return _canonical(vars, {e: c for e, c in new.items() if c})
    if all(e[h] % 2 == 0 for e in terms):
        nv = tuple("q" if v == HALF_Q else v for v in vars)
        new = {}
        for e, c in terms.items():
            ne = list(e)
            ne[h] //= 2
            new[tuple(ne)] = c
        return _canonical(nv, new)
    return vars, terms


def _align(p: QPolynomial, r: QPolynomial):
    if p.vars == r.vars:
        return p.vars, p.terms, r.terms
    vs = tuple(sorted(set(p.vars) | set(r.vars), key=var_key))
    return vs, _embed(p, vs), _embed(r, vs)


def _embed(p: QPolynomial, vs: tuple) -> dict:
    if p.vars == vs:
        return p.terms
    pos = [vs.index(v) for v in p.vars]
    n = len(vs)
    out = {}
    for e, c in p.terms.items():
        ne = [0] * n
        for i, x in zip(pos, e):
            ne[i] = x
        out[tuple(ne)] = c
    return out


ZERO = QPolynomial()
ONE = QPolynomial.const(1)


def poly(x) -> QPolynomial:
    """Coerce ints, rationals and polynomials to QPolynomial."""
    if isinstance(x, QPolynomial):
        return x
    if isinstance(x, QRationalFunction):
        if x.den.is_const():
            return x.num.scale(1 / x.den.const_value())
        raise ValueError(f"{x} is not a polynomial")
    return QPolynomial.const(x)


def sym(name: str) -> QPolynomial:
    return QPolynomial.var(name)


# -- gcd via sympy ------------------------------------------------------------

@lru_cache(maxsize=256)
def _sympy_ring(vars: tuple):
    from sympy.polys.domains import ZZ
    from sympy.polys.rings import ring
    R, *_ = ring(",".join(_safe(v) for v in vars), ZZ)
    return R


def _safe(v: str) -> str:
    return v.replace("[", "_").replace("]", "_")


def _int_parts(p: QPolynomial) -> tuple[dict, int]:
    """Integer coefficient dict of p*den and the denominator lcm."""
    den = 1
    for c in p.terms.values():
        den = _lcm(den, int(c.denominator))
    return {e: int(c * den) for e, c in p.terms.items()}, den


def _lcm_den(t: dict) -> int:
    den = 1
    for c in t.values():
        den = _lcm(den, int(c.denominator))
    return den


def _int_dict(t: dict) -> dict:
    den = 1
    for c in t.values():
        den = _lcm(den, int(c.denominator))
    return {e: int(c * den) for e, c in t.items()}


def _monomial_shift(p: QPolynomial, vs: tuple) -> tuple[dict, list[int]]:
    t = _embed(p, vs)
    mins = [min(e[i] for e in t) for i in range(len(vs))]
    return {tuple(x - m for x, m in zip(e, mins)): c for e, c in t.items()}, mins


# -- univariate integer fast path (Kronecker substitution) -------------------------

_KRON_MIN = 4000       # len(a)*len(b) above which packing beats the schoolbook loop


def _uni_split(p: "QPolynomial") -> tuple[int, list[int], int]:
    """p = q^lo * (sum digits[i] q^i) / den with integer digits."""
    t = p.terms
    den = _lcm_den(t)
    lo = min(e[0] for e in t)
    hi = max(e[0] for e in t)
    dense = [0] * (hi - lo + 1)
    for e, c in t.items():
        dense[e[0] - lo] = int(c * den)
    return lo, dense, den


def _pack(digits: list[int], nbytes: int) -> mpz:
    pos = b"".join((c if c > 0 else 0).to_bytes(nbytes, "little") for c in digits)
    neg = b"".join((-c if c < 0 else 0).to_bytes(nbytes, "little") for c in digits)
    return mpz(int.from_bytes(pos, "little")) - mpz(int.from_bytes(neg, "little"))


def _unpack(v, nbytes: int, length: int) -> list[int]:
    if v < 0:
        return [-c for c in _unpack(-v, nbytes, length)]
    raw = int(v).to_bytes(max(1, (int(v).bit_length() + 7) // 8), "little")
    base = 1 << (8 * nbytes)
    half = base >> 1
    out = []
    carry = 0
    for i in range(length):
        d = int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") + carry
        if d >= half:
            d -= base
            carry = 1
        else:
            carry = 0
        out.append(d)
    return out


def _nbytes(bound: int) -> int:
    return (int(bound).bit_length() + 2 + 7) // 8


def _kron_mul(a: list[int], b: list[int]) -> list[int]:
    bound = max(map(abs, a)) * max(map(abs, b)) * min(len(a), len(b))
    nb = _nbytes(bound)
    return _unpack(_pack(a, nb) * _pack(b, nb), nb, len(a) + len(b) - 1)


def _kron_divexact(a: list[int], b: list[int]) -> list[int] | None:
    """Integer quotient a/b when b divides a over Z[q], else None (b primitive)."""
    n = len(a) - len(b) + 1
    if n < 1:
        return None
    norm = isqrt(sum(c * c for c in a)) + 1
    nb = _nbytes(max(norm << n, max(map(abs, a)), max(map(abs, b))))
    A, B = _pack(a, nb), _pack(b, nb)
    qv, r = divmod(A, B)
    if r:
        return None
    quot = _unpack(qv, nb, n)
    if _kron_mul(quot, b) != a:
        return None
    return quot


def _heu_gcd(a: list[int], b: list[int]):
    """Heuristic gcd of integer polynomials with nonzero constant terms, by evaluation
    at a power of two and balanced unpacking; verified by exact division."""
    def prim(v):
        g = 0
        for c in v:
            g = igcd(g, c)
        return [c // g for c in v]
    a, b = prim(a), prim(b)
    bits = max(max(abs(c) for c in a).bit_length(), max(abs(c) for c in b).bit_length())
    for extra in (min(len(a), len(b)) + 16, 2 * min(len(a), len(b)) + 64):
        nb = (2 * bits + extra + 7) // 8
        h = gmpy2.gcd(_pack(a, nb), _pack(b, nb))
        g = _unpack(h, nb, min(len(a), len(b)))
        while g and g[-1] == 0:
            g.pop()
        if not g:
            continue
        g = prim(g)
        if g[-1] < 0:
            g = [-c for c in g]
        if len(g) == 1:
            return [1], a, b
        qa = _kron_divexact(a, g)
        qb = _kron_divexact(b, g) if qa is not None else None
        if qb is not None:
            return g, qa, qb
    return None


def _from_dense(var: str, lo: int, digits: list[int], den) -> "QPolynomial":
    inv = 1 / mpq(den)
    return QPolynomial._raw((var,), {(lo + i,): c * inv for i, c in enumerate(digits) if c})


def poly_cofactors(a: QPolynomial, b: QPolynomial) -> tuple[QPolynomial, QPolynomial, QPolynomial]:
    """Return (g, a/g, b/g) with g a gcd of genuine polynomials a, b (no negative powers)."""
    vs = tuple(sorted(set(a.vars) | set(b.vars), key=var_key))
    if not vs:
        return ONE, a, b
    if len(vs) == 1 and a and b:
        return _uni_cofactors(a, b, vs[0])
    ta = _int_dict(_embed(a, vs))
    tb = _int_dict(_embed(b, vs))
    R = _sympy_ring(vs)
    pa = R.from_dict(ta)
    pb = R.from_dict(tb)
    h, ca, cb = pa.cofactors(pb)
    g = QPolynomial._raw(vs, {e: mpq(int(c)) for e, c in h.items()})
    # cofactors returned for the scaled inputs; rescale to the originals
    qa = QPolynomial._raw(vs, {e: mpq(int(c)) for e, c in ca.items()})
    qb = QPolynomial._raw(vs, {e: mpq(int(c)) for e, c in cb.items()})
    sa = a.leading_coeff() / (g * qa).leading_coeff() if a else mpq(1)
    sb = b.leading_coeff() / (g * qb).leading_coeff() if b else mpq(1)
    return g, qa.scale(sa), qb.scale(sb)


def _uni_cofactors(a: QPolynomial, b: QPolynomial, var: str):
    from sympy.polys.domains import ZZ
    from sympy.polys.euclidtools import dup_inner_gcd

    def dense(p):
        t = _int_dict(_embed(p, (var,)))
        hi = max(e[0] for e in t)
        out = [0] * (hi + 1)
        for e, c in t.items():
            out[hi - e[0]] = c
        return [ZZ(c) for c in out]

    def back(d):
        n = len(d) - 1
        return QPolynomial._raw((var,), {(n - i,): mpq(int(c)) for i, c in enumerate(d) if c})

    fast = _heu_gcd(_uni_split(a)[1], _uni_split(b)[1]) if min(a.degree(var), b.degree(var)) > 8 else None
    if fast is not None:
        # _uni_split strips the lowest power; restore the shared monomial factor
        la, lb = a.min_degree(var), b.min_degree(var)
        m = min(la, lb)
        g = _from_dense(var, m, fast[0], 1)
        qa = _from_dense(var, la - m, fast[1], 1)
        qb = _from_dense(var, lb - m, fast[2], 1)
    else:
        h, ca, cb = dup_inner_gcd(dense(a), dense(b), ZZ)
        g, qa, qb = back(h), back(ca), back(cb)
    sa = a.leading_coeff() / (g * qa).leading_coeff()
    sb = b.leading_coeff() / (g * qb).leading_coeff()
    return g, qa.scale(sa), qb.scale(sb)


def poly_gcd(p: QPolynomial, r: QPolynomial) -> QPolynomial:
    """Gcd of two Laurent polynomials, normalized to integer primitive coefficients
    with positive leading coefficient and no monomial factor beyond the common one."""
    if p.is_zero() and r.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    if p.is_zero():
        return normalize_poly(r)
    if r.is_zero():
        return normalize_poly(p)
    vs = tuple(sorted(set(p.vars) | set(r.vars), key=var_key))
    tp, mp = _monomial_shift(p, vs)
    tr, mr = _monomial_shift(r, vs)
    mono = [min(x, y) for x, y in zip(mp, mr)]
    a = QPolynomial._raw(vs, tp)
    b = QPolynomial._raw(vs, tr)
    g, _, _ = poly_cofactors(a, b)
    m = QPolynomial._raw(vs, {tuple(mono): mpq(1)})
    return normalize_poly(g * m, strip_monomial=False)


def normalize_poly(p: QPolynomial, strip_monomial: bool = False) -> QPolynomial:
    """Scale p to integer coprime coefficients with positive leading term."""
    if p.is_zero():
        return p
    c = p.content()
    if p.leading_coeff() < 0:
        c = -c
    out = p.scale(1 / c)
    if strip_monomial and out.vars:
        mins = {v: out.min_degree(v) for v in out.vars}
        out = out * QPolynomial.monomial(1, {v: -k for v, k in mins.items()})
    return out


def poly_divide_exact(p: QPolynomial, d: QPolynomial) -> QPolynomial:
    """Exact quotient p/d; raises ValueError if d does not divide p."""
    if d.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if p.is_zero():
        return p
    if len(d.terms) == 1:
        (e, c), = d.terms.items()
        return p * QPolynomial._raw(d.vars, {tuple(-x for x in e): 1 / c})
    if p.vars == d.vars and len(p.vars) == 1:
        lp, dgp, np_ = _uni_split(p)
        ld, dgd, nd = _uni_split(d)
        g = 0
        for c in dgd:
            g = igcd(g, c)
        quot = _kron_divexact(dgp, [c // g for c in dgd])
        if quot is None:
            raise ValueError("inexact polynomial division")
        # p/d = (dgp/np_) / (g*prim/nd)
        return _from_dense(p.vars[0], lp - ld, quot, mpq(np_ * g, nd))
    vs = tuple(sorted(set(p.vars) | set(d.vars), key=var_key))
    tp, mp = _monomial_shift(p, vs)
    td, md = _monomial_shift(d, vs)
    ip, dp = _int_dict(tp), _lcm_den(tp)
    idd, dd = _int_dict(td), _lcm_den(td)
    R = _sympy_ring(vs)
    a = R.from_dict(ip)
    b = R.from_dict(idd)
    qq, rr = a.div(b)
    if rr:
        # over ZZ the quotient may need rational scaling: retry over QQ
        from sympy.polys.domains import QQ
        Rq = R.clone(domain=QQ)
        qq, rr = Rq.from_dict(ip).div(Rq.from_dict(idd))
        if rr:
            raise ValueError("inexact polynomial division")
        quot = QPolynomial._raw(vs, {e: mpq(c.numerator, c.denominator) for e, c in qq.items()})
    else:
        quot = QPolynomial._raw(vs, {e: mpq(int(c)) for e, c in qq.items()})
    shift = QPolynomial._raw(vs, {tuple(x - y for x, y in zip(mp, md)): mpq(dd, dp)})
    return quot * shift


# -- rational functions -------------------------------------------------------

class QRationalFunction:
    """Canonical quotient num/den of polynomials.

    The denominator is a genuine polynomial with coprime integer coefficients,
    positive leading coefficient (graded lex) and no monomial factor; num and
    den are coprime.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=0, den=1, *, _canonical: bool = False):
        if isinstance(num, QRationalFunction):
            if not (isinstance(den, int) and den == 1):
                other = den if isinstance(den, QRationalFunction) else QRationalFunction(den)
                num = num / other
            self.num, self.den, self._hash = num.num, num.den, None
            return
        num = poly(num)
        if isinstance(den, QRationalFunction):
            r = QRationalFunction(num) / den
            self.num, self.den, self._hash = r.num, r.den, None
            return
        den = poly(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _canonical:
            num, den = _normalize_fraction(num, den)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def _make(cls, num, den):
        obj = cls.__new__(cls)
        obj.num, obj.den, obj._hash = num, den, None
        return obj

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.is_const()

    def as_poly(self) -> QPolynomial:
        return poly(self)

    @property
    def vars(self) -> tuple:
        return tuple(sorted(set(self.num.vars) | set(self.den.vars), key=var_key))

    def _coerce(self, other):
        if isinstance(other, QRationalFunction):
            return other
        if isinstance(other, QPolynomial):
            return QRationalFunction._make(other, ONE)
        if isinstance(other, (int, type(mpq(0)), type(mpz(0)))):
            return QRationalFunction._make(QPolynomial.const(other), ONE)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            if self.den.is_const():
                return QRationalFunction._make(self.num + other.num, ONE)
            return QRationalFunction(self.num + other.num, self.den)
        if self.den.is_const() or other.den.is_const():
            return QRationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)
        g, d1, d2 = poly_cofactors(self.den, other.den)
        return QRationalFunction(self.num * d2 + other.num * d1, d1 * other.den)

    __radd__ = __add__

    def __neg__(self):
        return QRationalFunction._make(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return RZERO
        if self.den.is_const() and other.den.is_const():
            return QRationalFunction._make(self.num * other.num, ONE)
        return QRationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "QRationalFunction":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return QRationalFunction(self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return QRationalFunction._make(self.num ** n, self.den ** n) if n else RONE

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def subs(self, var: str, value) -> "QRationalFunction":
        n = self.num.subs(var, value)
        d = self.den.subs(var, value)
        return QRationalFunction(n) / QRationalFunction(d)

    def subs_many(self, mapping: Mapping[str, object]) -> "QRationalFunction":
        out = self
        for v, val in mapping.items():
            out = out.subs(v, val)
        return out

    def qshift(self, var: str, k: int, base: str = "q") -> "QRationalFunction":
        return QRationalFunction(self.num.qshift(var, k, base), self.den.qshift(var, k, base))

    def __str__(self):
        if self.den.is_const():
            return format_poly(self.num)
        n = format_poly(self.num)
        if self.num.nterms() > 1:
            n = f"({n})"
        d = format_poly(self.den)
        if self.den.nterms() > 1 or not _is_atom_text(d):
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"QRationalFunction({str(self)!r})"


def _is_atom_text(s: str) -> bool:
    return "*" not in s and " " not in s


def _normalize_fraction(num: QPolynomial, den: QPolynomial) -> tuple[QPolynomial, QPolynomial]:
    if num.is_zero():
        return ZERO, ONE
    if den.is_const():
        c = den.const_value()
        return (num if c == 1 else num.scale(1 / c)), ONE
    # move monomial factors so that neither side is divisible by a variable
    vs = tuple(sorted(set(num.vars) | set(den.vars), key=var_key))
    tn, mn = _monomial_shift(num, vs)
    td, md = _monomial_shift(den, vs)
    n = QPolynomial._raw(vs, tn)
    d = QPolynomial._raw(vs, td)
    net = [a - b for a, b in zip(mn, md)]
    if not d.is_const() and not n.is_const() and len(d.terms) > 1:
        g, n, d = poly_cofactors(n, d)
    # the whole monomial part goes to the numerator (Laurent), so num/q and
    # q^(-1)*num have one representation
    mono = {v: k for v, k in zip(vs, net) if k}
    if mono:
        n = n * QPolynomial.monomial(1, mono)
    c = d.content()
    if d.leading_coeff() < 0:
        c = -c
    if c != 1:
        d = d.scale(1 / c)
        n = n.scale(1 / c)
    return n, d


def sum_rationals(terms) -> "QRationalFunction":
    """Sum many fractions, growing a common denominator only when a term's
    denominator does not already divide it (one normalization at the end)."""
    D, N = ONE, ZERO
    for f in terms:
        f = rat(f)
        if not f:
            continue
        d = f.den
        if d.is_const():
            N = N + f.num * D
            continue
        if D.is_const():
            D, N = d, N * d + f.num
            continue
        try:
            N = N + f.num * poly_divide_exact(D, d)
            continue
        except ValueError:
            pass
        _, Dg, dg = poly_cofactors(D, d)
        N = N * dg + f.num * Dg
        D = D * dg
    return QRationalFunction(N, D)


RZERO = QRationalFunction._make(ZERO, ONE)
RONE = QRationalFunction._make(ONE, ONE)


def rat(x, y=None) -> QRationalFunction:
    """Coerce to QRationalFunction; rat(a, b) builds a/b."""
    if y is not None:
        return QRationalFunction(rat(x)) / rat(y)
    if isinstance(x, QRationalFunction):
        return x
    return QRationalFunction._make(poly(x), ONE)


# -- printing -----------------------------------------------------------------

def format_monomial(vars: tuple, e: tuple) -> str:
    parts = []
    for v, k in zip(vars, e):
        if not k:
            continue
        name = v
        if v == HALF_Q:
            if k % 2 == 0:
                parts.append("q" if k == 2 else f"q^{_signed(k // 2)}")
            else:
                parts.append(f"q^({k}/2)")
            continue
        parts.append(name if k == 1 else f"{name}^{_signed(k)}")
    return "*".join(parts)


def _signed(k: int) -> str:
    return str(k) if k >= 0 else f"({k})"


def _format_coeff(c: mpq) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_poly(p: QPolynomial) -> str:
    """Canonical text: graded-lex descending terms, explicit ``*`` and ``^``."""
    if p.is_zero():
        return "0"
    out = []
    for i, (e, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        mono = format_monomial(p.vars, e)
        if mono:
            body = mono if a == 1 else f"{_format_coeff(a)}*{mono}"
        else:
            body = _format_coeff(a)
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


# -- truncated series ---------------------------------------------------------

@dataclass(frozen=True)
class TruncatedSeries:
    """Coefficients of var^0 .. var^order; each coefficient is free of var."""

    var: str
    order: int
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.order + 1:
            raise ValueError("coefficient list must have length order + 1")

    def __getitem__(self, i):
        return self.coeffs[i]

    def __len__(self):
        return len(self.coeffs)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        n = min(self.order, other.order)
        out = []
        for k in range(n + 1):
            acc = RZERO
            for i in range(k + 1):
                a, b = self.coeffs[i], other.coeffs[k - i]
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return TruncatedSeries(self.var, n, tuple(out))

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        n = min(self.order, other.order)
        return TruncatedSeries(self.var, n, tuple(self.coeffs[i] + other.coeffs[i] for i in range(n + 1)))


def series_expand(f, var: str, order: int) -> list:
    """Power series coefficients of f in ``var`` up to var^order.

    The var-free part of the (canonical) denominator must be a nonzero rational
    constant; coefficients are polynomials when f's numerator/denominator are.
    """
    f = rat(f)
    num = f.num.coeffs_in(var)
    den = f.den.coeffs_in(var)
    if any(k < 0 for k in num):
        raise ValueError(f"{f} has negative powers of {var}")
    d0 = den.get(0)
    if d0 is None or not d0.is_const():
        raise ValueError(f"denominator of {f} is not invertible as a power series in {var}")
    inv0 = 1 / d0.const_value()
    out: list = []
    for m in range(order + 1):
        acc = num.get(m, ZERO)
        for k, dk in den.items():
            if 0 < k <= m and out[m - k]:
                acc = acc - dk * out[m - k]
        out.append(acc.scale(inv0))
    return out


def truncate(p: QPolynomial, var: str, order: int) -> QPolynomial:
    """Drop terms with var-degree above ``order``."""
    if var not in p.vars:
        return p
    i = p.vars.index(var)
    return QPolynomial._raw(p.vars, {e: c for e, c in p.terms.items() if e[i] <= order})


Q = sym("q")
