"""Expression trees: parsing, canonical printing, exact evaluation, series expansion.

Grammar (whitespace is insignificant)::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' exponent)?
    exponent := integer | symbol | '(' expr ')'
    atom     := integer | symbol | call | '(' expr ')'
    call     := symbol '(' expr (',' expr)* ')'

Juxtaposition is rejected unless ``mma=True``, which also accepts ``F[x]`` for
``F(x)``.  Division by an integer literal folds into a rational literal, and a
minus sign directly in front of a literal folds into the literal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from gmpy2 import mpq

from .exact import (sum_rationals, ONE, RONE, RZERO, ZERO, QPolynomial, QRationalFunction, poly,
                    rat, series_expand, sym)


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, expected: Sequence[str] = ()):
        self.offset = offset
        self.expected = tuple(expected)
        exp = f"; expected one of {', '.join(expected)}" if expected else ""
        super().__init__(f"{message} at offset {offset}{exp}")


# -- tree -----------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: mpq


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Pow:
    base: object
    exp: object


@dataclass(frozen=True)
class Mul:
    factors: tuple


@dataclass(frozen=True)
class Div:
    num: object
    den: object


@dataclass(frozen=True)
class Add:
    terms: tuple


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


# -- lexer ----------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


@dataclass(frozen=True)
class Token:
    kind: str      # 'int', 'name', 'op', 'end'
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        if m.group(1):
            out.append(Token("int", m.group(1), m.start(1)))
        elif m.group(2):
            out.append(Token("name", m.group(2), m.start(2)))
        elif m.group(3):
            ch = m.group(3)
            if ch not in "+-*/^(),[]":
                raise ParseError(f"unexpected character {ch!r}", m.start(3))
            out.append(Token("op", ch, m.start(3)))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


# -- parser ---------------------------------------------------------------------

class Parser:
    def __init__(self, text: str, mma: bool = False):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.mma = mma

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str):
        t = self.tok
        if t.kind != "op" or t.text != text:
            raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.offset, [repr(text)])
        self.i += 1

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            exp = ["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"]
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.offset, exp)
        return node

    def expr(self):
        terms = [self.term()]
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            t = self.term()
            terms.append(t if op == "+" else _neg(t))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def _starts_unary(self) -> bool:
        t = self.tok
        return t.kind in ("int", "name") or (t.kind == "op" and t.text == "(")

    def term(self):
        node = self.unary()
        factors = [node]
        while True:
            t = self.tok
            if t.kind == "op" and t.text == "*":
                self.take()
                factors.append(self.unary())
            elif t.kind == "op" and t.text == "/":
                self.take()
                right = self.unary()
                left = factors[0] if len(factors) == 1 else Mul(tuple(factors))
                factors = [_div(left, right)]
            elif self.mma and self._starts_unary():
                factors.append(self.unary())
            else:
                break
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def unary(self):
        t = self.tok
        if t.kind == "op" and t.text == "-":
            self.take()
            return _neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        t = self.tok
        if t.kind == "op" and t.text == "^":
            self.take()
            return Pow(base, self.exponent())
        return base

    def exponent(self):
        t = self.tok
        if t.kind == "int":
            self.take()
            return Num(mpq(int(t.text)))
        if t.kind == "name":
            self.take()
            return Sym(t.text)
        if t.kind == "op" and t.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.offset, ["integer", "symbol", "'('"])

    def atom(self):
        t = self.tok
        if t.kind == "int":
            self.take()
            return Num(mpq(int(t.text)))
        if t.kind == "name":
            self.take()
            nxt = self.tok
            if nxt.kind == "op" and (nxt.text == "(" or (self.mma and nxt.text == "[")):
                close = ")" if nxt.text == "(" else "]"
                self.take()
                args = [self.expr()]
                while self.tok.kind == "op" and self.tok.text == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(close)
                return Call(t.text, tuple(args))
            return Sym(t.text)
        if t.kind == "op" and t.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.offset, ["integer", "symbol", "'('"])


def _neg(node):
    if isinstance(node, Num):
        return Num(-node.value)
    return Neg(node)


def _div(left, right):
    if isinstance(left, Num) and isinstance(right, Num) and right.value != 0:
        return Num(left.value / right.value)
    return Div(left, right)


def parse(text: str, mma: bool = False):
    """Parse text into an expression tree; ParseError carries the offset."""
    return Parser(text, mma).parse()


# -- printer --------------------------------------------------------------------

def _num_text(v: mpq) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def to_text(node) -> str:
    """Canonical text; parse(to_text(t)) == t for trees the parser can build."""
    return _p_expr(node)


def _p_expr(node) -> str:
    if isinstance(node, Add):
        out = []
        for k, t in enumerate(node.terms):
            if k == 0:
                out.append(_p_first_term(t))
            elif isinstance(t, Neg):
                out.append(" - " + _p_term(t.arg))
            elif isinstance(t, Num) and t.value < 0:
                out.append(" - " + _num_text(-t.value))
            else:
                out.append(" + " + _p_term(t))
        return "".join(out)
    return _p_first_term(node)


def _p_first_term(node) -> str:
    if isinstance(node, Add):
        return f"({_p_expr(node)})"
    return _p_term(node)


def _p_term(node) -> str:
    if isinstance(node, Mul):
        out = []
        for k, f in enumerate(node.factors):
            if k == 0:
                out.append(_p_div_left(f) if isinstance(f, Div) else _p_unary(f, first=True))
            else:
                out.append("*" + _p_unary(f, first=False))
        return "".join(out)
    if isinstance(node, Div):
        return _p_div_left(node)
    if isinstance(node, Add):
        return f"({_p_expr(node)})"
    return _p_unary(node, first=True)


def _p_div_left(node: Div) -> str:
    left = node.num
    if isinstance(left, (Mul, Div)):
        ltxt = _p_term(left)
    else:
        ltxt = _p_unary(left, first=True)
    return f"{ltxt}/{_p_unary(node.den, first=False)}"


def _p_unary(node, first: bool) -> str:
    """A factor that must parse back as a single unary."""
    if isinstance(node, Neg):
        return "-" + _p_unary(node.arg, first=False)
    if isinstance(node, Num):
        if node.value.denominator != 1:
            return _num_text(node.value) if first and node.value > 0 else f"({_num_text(node.value)})"
        return _num_text(node.value)
    if isinstance(node, (Add, Mul, Div)):
        return f"({_p_expr(node)})"
    return _p_power(node)


def _p_power(node) -> str:
    if isinstance(node, Pow):
        return f"{_p_atom(node.base)}^{_p_exponent(node.exp)}"
    return _p_atom(node)


def _p_exponent(e) -> str:
    if isinstance(e, Num) and e.value.denominator == 1 and e.value >= 0:
        return _num_text(e.value)
    if isinstance(e, Sym):
        return e.name
    return f"({_p_expr(e)})"


def _p_atom(node) -> str:
    if isinstance(node, Num):
        if node.value.denominator == 1 and node.value >= 0:
            return _num_text(node.value)
        return f"({_num_text(node.value)})"
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({', '.join(_p_expr(a) for a in node.args)})"
    return f"({_p_expr(node)})"


# -- evaluation -----------------------------------------------------------------

INDEX_VARS = ("n", "k")

BUILTINS = {"qPochhammer", "qBinomial", "qTrinomial", "qTn", "qtn", "qUn", "qVn", "Sum"}


class EvalError(ValueError):
    pass


def _exponent_poly(node, env) -> QPolynomial:
    """Evaluate an exponent to a polynomial in the plain index symbols."""
    v = evaluate(node, env, in_exponent=True)
    if not v.is_poly():
        raise EvalError(f"exponent {to_text(node)} is not polynomial")
    return v.as_poly()


# dense expansion of a non-monomial base beyond this power is never intended
MAX_EXPONENT = 4096


def _unit_monomial(f: QRationalFunction) -> bool:
    if not f.is_poly() or not f.as_poly().is_monomial():
        return f.is_poly() and f.as_poly().is_zero()
    (_, c), = f.as_poly().terms.items()
    return abs(c) == 1


def _power(base: QRationalFunction, e: QPolynomial, node) -> QRationalFunction:
    if e.is_const():
        k = e.const_value()
        if k.denominator == 1:
            if abs(k) > MAX_EXPONENT and not _unit_monomial(base):
                raise EvalError(f"exponent {k} too large in {to_text(node)}")
            return base ** int(k)
        if k.denominator == 2 and base == rat(sym("q")):
            return rat(QPolynomial.var("q12", int(2 * k)))
        raise EvalError(f"fractional power in {to_text(node)}")
    # affine exponent a*n + b on a power of q
    bp = base.as_poly() if base.is_poly() else None
    if bp is None or not bp.is_monomial() or set(bp.vars) - {"q"}:
        raise EvalError(f"symbolic power of a non-q base in {to_text(node)}")
    (mono, c), = bp.terms.items()
    if c != 1:
        raise EvalError(f"symbolic power of a signed or scaled base in {to_text(node)}")
    qe = mono[0] if mono else 0
    out = ONE
    for exps, coef in e.terms.items():
        powers = dict(zip(e.vars, exps))
        if len([v for v in powers if powers[v]]) > 1 or any(p > 1 for p in powers.values()):
            raise EvalError(f"exponent {to_text(node)} must be affine in the index")
        total = coef * qe
        if not powers or not any(powers.values()):
            if total.denominator == 1:
                out = out * QPolynomial.var("q", int(total))
            elif total.denominator == 2:
                out = out * QPolynomial.var("q12", int(2 * total))
            else:
                raise EvalError(f"unsupported exponent in {to_text(node)}")
        else:
            (v, _), = [(v, p) for v, p in powers.items() if p]
            if total.denominator != 1:
                raise EvalError(f"non-integral coefficient of {v} in {to_text(node)}")
            out = out * QPolynomial.var("Q" + v, int(total))
    return rat(out)


def evaluate(node, env: Mapping[str, object] | None = None, in_exponent: bool = False) -> QRationalFunction:
    """Exact value as a rational function.  Symbols evaluate to themselves unless bound."""
    env = env or {}
    if isinstance(node, Num):
        return rat(node.value)
    if isinstance(node, Sym):
        if node.name in env:
            return rat(env[node.name])
        if node.name == "inf":
            raise EvalError("inf is only meaningful as a Pochhammer length")
        return rat(sym(node.name))
    if isinstance(node, Neg):
        return -evaluate(node.arg, env, in_exponent)
    if isinstance(node, Add):
        acc = RZERO
        for t in node.terms:
            acc = acc + evaluate(t, env, in_exponent)
        return acc
    if isinstance(node, Mul):
        acc = RONE
        for f in node.factors:
            acc = acc * evaluate(f, env, in_exponent)
        return acc
    if isinstance(node, Div):
        return evaluate(node.num, env, in_exponent) / evaluate(node.den, env, in_exponent)
    if isinstance(node, Pow):
        base = evaluate(node.base, env, in_exponent)
        e = _exponent_poly(node.exp, env)
        return _power(base, e, node)
    if isinstance(node, Call):
        return _call(node, env)
    raise EvalError(f"cannot evaluate {node!r}")


def _int_arg(node, env) -> int:
    v = evaluate(node, env)
    if not v.is_poly() or not v.as_poly().is_const() or v.as_poly().const_value().denominator != 1:
        raise EvalError(f"{to_text(node)} must evaluate to an integer")
    return int(v.as_poly().const_value())


def _base_power(node, env) -> int:
    """g for a base argument q^g."""
    v = evaluate(node, env)
    p = v.as_poly() if v.is_poly() else None
    if p is None or not p.is_monomial() or set(p.vars) != {"q"} or p.leading_coeff() != 1:
        raise EvalError(f"base {to_text(node)} must be a power of q")
    return p.degree("q")


def _call(node: Call, env) -> QRationalFunction:
    from . import qobjects as qo
    name, args = node.name, node.args
    if name == "qPochhammer":
        if len(args) != 3:
            raise EvalError("qPochhammer takes (a, base, length)")
        if isinstance(args[2], Sym) and args[2].name == "inf":
            raise EvalError("infinite Pochhammer symbols need a series context")
        a = evaluate(args[0], env)
        b = evaluate(args[1], env)
        L = _int_arg(args[2], env)
        if L < 0:
            raise EvalError("negative Pochhammer length")
        out = RONE
        cur = a
        for _ in range(L):
            out = out * (RONE - cur)
            cur = cur * b
        return out
    if name == "qBinomial":
        top, bot = _int_arg(args[0], env), _int_arg(args[1], env)
        g = _base_power(args[2], env) if len(args) > 2 else 1
        return rat(qo.q_binomial(top, bot, g))
    if name == "qTrinomial":
        L, b, a = (_int_arg(x, env) for x in args[:3])
        return rat(qo.round_trinomial(L, b, a))
    if name in ("qTn", "qtn", "qUn", "qVn"):
        n, L, a = (_int_arg(x, env) for x in args[:3])
        kind = {"qTn": "T", "qtn": "t", "qUn": "U", "qVn": "V"}[name]
        return rat(qo.q_trinomial(kind, L, a, n))
    if name == "Sum":
        return sum_rationals(_sum_terms(node, env, lambda body, e: evaluate(body, e)))
    raise EvalError(f"unknown function {name!r}")


def sum_ranges(node: Call, env) -> tuple:
    args = node.args
    if len(args) < 4 or (len(args) - 1) % 3:
        raise EvalError("Sum takes (body, var, lo, hi, ...)")
    out = []
    for t in range(1, len(args), 3):
        v = args[t]
        if not isinstance(v, Sym):
            raise EvalError("summation variable must be a symbol")
        out.append((v.name, args[t + 1], args[t + 2]))
    return tuple(out)


def _sum_terms(node: Call, env, fn: Callable) -> list:
    ranges = sum_ranges(node, env)
    body = node.args[0]
    out = []

    def rec(level, e):
        if level == len(ranges):
            out.append(fn(body, e))
            return
        v, lo, hi = ranges[level]
        lo_i, hi_i = _int_arg(lo, e), _int_arg(hi, e)
        for val in range(lo_i, hi_i + 1):
            e2 = dict(e)
            e2[v] = val
            rec(level + 1, e2)

    rec(0, dict(env))
    return out


# -- series expansion -------------------------------------------------------------

class Series:
    """Truncated power series in one variable; coefficients are rational in the rest."""

    __slots__ = ("var", "order", "c")

    def __init__(self, var: str, order: int, c: list):
        self.var, self.order, self.c = var, order, c

    @classmethod
    def of(cls, f: QRationalFunction, var: str, order: int) -> "Series":
        f = rat(f)
        if var not in f.vars:
            return cls(var, order, [f] + [RZERO] * order)
        if f.den.free_of(var):
            out = [RZERO] * (order + 1)
            parts = f.num.coeffs_in(var)
            if len(parts) == 1:
                # a single var-power: the coefficient stays coprime to den
                (k, p), = parts.items()
                if k < 0:
                    raise EvalError(f"negative power of {var}")
                if k <= order:
                    out[k] = QRationalFunction._make(p, f.den)
                return cls(var, order, out)
            inv = rat(ONE) / rat(f.den)
            for k, p in parts.items():
                if k < 0:
                    raise EvalError(f"negative power of {var}")
                if k <= order:
                    out[k] = rat(p) * inv
            return cls(var, order, out)
        return cls(var, order, [rat(v) for v in _expand_rational(f, var, order)])

    def __add__(self, o):
        return Series(self.var, self.order, [a + b for a, b in zip(self.c, o.c)])

    def __neg__(self):
        return Series(self.var, self.order, [-a for a in self.c])

    def __mul__(self, o):
        n = self.order
        out = [RZERO] * (n + 1)
        nz = [(i, a) for i, a in enumerate(self.c) if a]
        onz = [(j, b) for j, b in enumerate(o.c) if b]
        for i, a in nz:
            for j, b in onz:
                if i + j > n:
                    break
                out[i + j] = out[i + j] + a * b
        return Series(self.var, n, out)

    def inverse(self):
        if not self.c[0]:
            raise EvalError(f"series in {self.var} is not invertible (zero constant term)")
        n = self.order
        inv0 = self.c[0].inverse()
        out = [inv0] + [RZERO] * n
        for m in range(1, n + 1):
            acc = RZERO
            for k in range(1, m + 1):
                if self.c[k] and out[m - k]:
                    acc = acc + self.c[k] * out[m - k]
            out[m] = -acc * inv0
        return Series(self.var, n, out)

    def valuation(self) -> int:
        for i, a in enumerate(self.c):
            if a:
                return i
        return self.order + 1


def _expand_rational(f: QRationalFunction, var: str, order: int):
    d0 = f.den.coeff(var, 0)
    if d0.is_zero():
        raise EvalError(f"denominator vanishes at {var} = 0")
    num = Series(var, order, [rat(c) for c in _coeff_list(f.num, var, order)])
    den = Series(var, order, [rat(c) for c in _coeff_list(f.den, var, order)])
    return (num * den.inverse()).c


def _coeff_list(p: QPolynomial, var: str, order: int):
    out = [ZERO] * (order + 1)
    for k, c in p.coeffs_in(var).items():
        if k < 0:
            raise EvalError(f"negative power of {var}")
        if k <= order:
            out[k] = c
    return out


def _x_valuation_lower_bound(node, var: str, env) -> int | None:
    """Cheap lower bound for the var-valuation of a product-shaped summand."""
    if isinstance(node, Pow) and isinstance(node.base, Sym) and node.base.name == var:
        try:
            e = _exponent_poly(node.exp, env)
            if e.is_const():
                return int(e.const_value())
        except EvalError:
            return None
        return None
    if isinstance(node, Sym) and node.name == var:
        return 1
    if isinstance(node, Mul):
        total = 0
        for f in node.factors:
            b = _x_valuation_lower_bound(f, var, env)
            if b is not None:
                total += b
        return total
    if isinstance(node, Div):
        return _x_valuation_lower_bound(node.num, var, env)
    if isinstance(node, Neg):
        return _x_valuation_lower_bound(node.arg, var, env)
    return 0


def expand_series(node, var: str, order: int, env: Mapping | None = None) -> Series:
    """Truncated expansion in ``var`` through var^order."""
    env = dict(env or {})
    if isinstance(node, Call) and node.name == "Sum":
        def term(body, e):
            lb = _x_valuation_lower_bound(body, var, e)
            if lb is not None and lb > order:
                return None
            return expand_series(body, var, order, e)

        parts = [t for t in _sum_terms(node, env, term) if t is not None]
        return Series(var, order, [sum_rationals(t.c[m] for t in parts) for m in range(order + 1)])
    if isinstance(node, Add):
        acc = None
        for t in node.terms:
            s = expand_series(t, var, order, env)
            acc = s if acc is None else acc + s
        return acc
    if isinstance(node, Neg):
        return -expand_series(node.arg, var, order, env)
    if isinstance(node, (Mul, Div)) and not _mentions_series_only(node):
        try:
            return Series.of(evaluate(node, env), var, order)
        except EvalError:
            pass
    if isinstance(node, Mul):
        acc = None
        for f in node.factors:
            s = expand_series(f, var, order, env)
            acc = s if acc is None else acc * s
        return acc
    if isinstance(node, Div):
        return expand_series(node.num, var, order, env) * expand_series(node.den, var, order, env).inverse()
    if isinstance(node, Call) and node.name == "qPochhammer" and isinstance(node.args[2], Sym) \
            and node.args[2].name == "inf":
        return _infinite_pochhammer(node, var, order, env)
    if isinstance(node, Pow):
        try:
            return Series.of(evaluate(node, env), var, order)
        except EvalError:
            e = _exponent_poly(node.exp, env)
            if not e.is_const() or e.const_value().denominator != 1:
                raise
            s = expand_series(node.base, var, order, env)
            k = int(e.const_value())
            out = Series(var, order, [RONE] + [RZERO] * order)
            base = s if k >= 0 else s.inverse()
            for _ in range(abs(k)):
                out = out * base
            return out
    return Series.of(evaluate(node, env), var, order)


def _mentions_series_only(node) -> bool:
    if isinstance(node, Call):
        if node.name == "qPochhammer" and isinstance(node.args[2], Sym) and node.args[2].name == "inf":
            return True
        return node.name == "Sum"
    for attr in ("factors", "terms"):
        if hasattr(node, attr):
            return any(_mentions_series_only(f) for f in getattr(node, attr))
    if isinstance(node, Div):
        return _mentions_series_only(node.num) or _mentions_series_only(node.den)
    if isinstance(node, (Neg,)):
        return _mentions_series_only(node.arg)
    if isinstance(node, Pow):
        return _mentions_series_only(node.base)
    return False


def _infinite_pochhammer(node: Call, var: str, order: int, env) -> Series:
    """(a; b)_inf as a series in var.

    With b free of var and a = alpha*var^e (e >= 1), Euler's expansion
    (z; b)_inf = sum_n (-1)^n b^(n(n-1)/2) z^n / (b; b)_n is used; when b itself
    has positive valuation the product is truncated directly.
    """
    a = evaluate(node.args[0], env)
    b = evaluate(node.args[1], env)
    if not a.is_poly() or not b.is_poly():
        raise EvalError("infinite Pochhammer arguments must be polynomial")
    ap, bp = a.as_poly(), b.as_poly()
    one = Series(var, order, [RONE] + [RZERO] * order)
    if ap.is_zero():
        return one
    bv = bp.min_degree(var) if var in bp.vars else 0
    if bv > 0:
        out = one
        cur = ap
        while (cur.min_degree(var) if var in cur.vars else 0) <= order:
            if var not in cur.vars or cur.min_degree(var) <= 0:
                raise EvalError(f"infinite Pochhammer {to_text(node)} is not a power series in {var}")
            out = out * Series.of(rat(ONE - cur), var, order)
            cur = cur * bp
        return out
    if var in bp.vars or not ap.is_monomial() or var not in ap.vars or ap.min_degree(var) < 1:
        raise EvalError(f"infinite Pochhammer {to_text(node)} is not a power series in {var}")
    e = ap.degree(var)
    alpha = rat(ap * QPolynomial.var(var, -e))
    out = [RZERO] * (order + 1)
    poch = RONE            # (b; b)_n
    bn = RONE              # b^n
    tri = RONE             # b^(n(n-1)/2)
    z = RONE               # a^n
    n = 0
    while n * e <= order:
        sign = -1 if n % 2 else 1
        out[n * e] = rat(sign) * tri * z / poch
        n += 1
        tri = tri * bn
        bn = bn * rat(bp)
        poch = poch * (RONE - bn)
        z = z * alpha
    return Series(var, order, out)


def series_expand_tree(node, var: str, order: int, env: Mapping | None = None) -> list[QRationalFunction]:
    """Coefficients of var^0 .. var^order."""
    return expand_series(node, var, order, env).c


def default_expansion_order() -> int:
    import os
    try:
        return int(os.environ.get("QFUN_TRUNC_DEFAULT", "30"))
    except ValueError:
        return 30


# -- linear forms in unknown-function atoms -----------------------------------------

@dataclass(frozen=True)
class Atom:
    kind: str          # 'shift' | 'rec' | 'coeff' | 'deriv' | 'init'
    name: str
    var: str
    k: int


class Linear:
    """sum over atoms of coefficient * atom, plus a constant."""

    def __init__(self, parts: dict):
        self.parts = {k: v for k, v in parts.items() if v}

    @classmethod
    def const(cls, c):
        return cls({None: rat(c)})

    def is_const(self):
        return set(self.parts) <= {None}

    def value(self):
        return self.parts.get(None, RZERO)

    def __add__(self, o):
        out = dict(self.parts)
        for k, v in o.parts.items():
            out[k] = out.get(k, RZERO) + v
        return Linear(out)

    def __neg__(self):
        return Linear({k: -v for k, v in self.parts.items()})

    def scale(self, c):
        return Linear({k: v * c for k, v in self.parts.items()})

    def __mul__(self, o):
        if self.is_const():
            return o.scale(self.value())
        if o.is_const():
            return self.scale(o.value())
        raise EvalError("product of two unknown-function terms is not linear")


def linear_form(node, index_vars=INDEX_VARS) -> Linear:
    """Decompose an equation expression into unknown-function atoms with coefficients."""
    if isinstance(node, Add):
        acc = Linear({})
        for t in node.terms:
            acc = acc + linear_form(t, index_vars)
        return acc
    if isinstance(node, Neg):
        return -linear_form(node.arg, index_vars)
    if isinstance(node, Mul):
        acc = Linear.const(1)
        for f in node.factors:
            acc = acc * linear_form(f, index_vars)
        return acc
    if isinstance(node, Div):
        den = linear_form(node.den, index_vars)
        if not den.is_const():
            raise EvalError("division by an unknown-function term")
        return linear_form(node.num, index_vars).scale(den.value().inverse())
    if isinstance(node, Call) and node.name not in BUILTINS:
        return Linear({_atom(node, index_vars): RONE})
    return Linear.const(evaluate(node))


def _atom(node: Call, index_vars) -> Atom:
    name, args = node.name, node.args
    if name == "Coeff":
        return Atom("coeff", _sym_name(args[0]), "", _int_arg(args[1], {}))
    if name == "Dq0":
        return Atom("init", _sym_name(args[0]), "", _int_arg(args[1], {}))
    if name == "Dq":
        inner = args[0]
        if not isinstance(inner, Call) or len(inner.args) != 1:
            raise EvalError("Dq expects F(x) as first argument")
        var = _sym_name(inner.args[0])
        return Atom("deriv", inner.name, var, _int_arg(args[1], {}) if len(args) > 1 else 1)
    if len(args) != 1:
        raise EvalError(f"unknown function {name!r} takes one argument")
    arg = evaluate(args[0])
    if not arg.is_poly():
        raise EvalError(f"argument of {name} must be polynomial")
    p = arg.as_poly()
    idx = [v for v in p.vars if v in index_vars]
    if idx:
        v = idx[0]
        rest = p - sym(v)
        if rest.vars or (rest and rest.const_value().denominator != 1):
            raise EvalError(f"argument of {name} must be {v} + integer")
        return Atom("rec", name, v, int(rest.const_value()) if rest else 0)
    if not p.is_monomial() or p.leading_coeff() != 1:
        raise EvalError(f"argument of {name} must look like q^k*x")
    others = [v for v in p.vars if v != "q"]
    if len(others) != 1 or p.degree(others[0]) != 1:
        raise EvalError(f"argument of {name} must look like q^k*x")
    return Atom("shift", name, others[0], p.degree("q") if "q" in p.vars else 0)


def _sym_name(node) -> str:
    if isinstance(node, Sym):
        return node.name
    raise EvalError(f"expected a symbol, got {to_text(node)}")


def parse_equation(text: str, mma: bool = False):
    """Text to ShiftEquation, Recurrence or DifferentialEquation."""
    from .forms import DifferentialEquation, Recurrence, ShiftEquation, shift_equation
    from .ore import OreOperator
    if "=" in text:
        lhs, rhs = text.split("=", 1)
        node = Add((parse(lhs, mma), _neg(parse(rhs, mma))))
    else:
        node = parse(text, mma)
    lin = linear_form(node)
    atoms = [a for a in lin.parts if a is not None]
    if not atoms:
        raise EvalError("equation has no unknown-function terms")
    kinds = {a.kind for a in atoms}
    const = lin.parts.get(None, RZERO)
    if "rec" in kinds:
        if kinds != {"rec"}:
            raise EvalError("mixed recurrence and series terms")
        names = {a.name for a in atoms}
        if len(names) > 1:
            raise EvalError("recurrence must involve one unknown")
        if const:
            raise EvalError("inhomogeneous recurrences are not supported")
        v = atoms[0].var
        ops = {a.k: lin.parts[a] for a in atoms}
        qv = "Q" + v
        if any(v in c.vars for c in ops.values()):
            raise EvalError(f"coefficients may depend on {v} only through q^{v}")
        return Recurrence(OreOperator(ops, qv, 1), 0, atoms[0].name)
    if "deriv" in kinds or "init" in kinds:
        terms, init = {}, {}
        name, var = None, "x"
        for a in atoms:
            if a.kind == "shift":
                if a.k != 0:
                    raise EvalError("q-differential equations cannot contain shifts")
                terms[0] = lin.parts[a]
                name, var = a.name, a.var
            elif a.kind == "deriv":
                terms[a.k] = lin.parts[a]
                name, var = a.name, a.var
            elif a.kind == "init":
                init[a.k] = lin.parts[a]
            else:
                raise EvalError("Coeff terms belong to q-shift equations")
        return DifferentialEquation(terms, init, const.as_poly() if const else ZERO, name or "F", var)
    shift = [a for a in atoms if a.kind == "shift"]
    if not shift:
        raise EvalError("no unknown-function terms")
    name, var = shift[0].name, shift[0].var
    terms = {a.k: lin.parts[a] for a in shift}
    bnd = {a.k: lin.parts[a] for a in atoms if a.kind == "coeff"}
    from math import gcd
    g = 0
    for k in terms:
        g = gcd(g, k)
    stride = 1
    eq = shift_equation(terms, var, stride, {}, 0, name)
    return ShiftEquation(eq.op, {j: (c.as_poly() if c.is_poly() else c) for j, c in bnd.items()},
                         const.as_poly() if const and const.is_poly() else ZERO, name)


# -- substitution factors -----------------------------------------------------------

def parse_factor(text: str, kind: str, var: str = "x", index: str = "n"):
    """Build a SubstitutionFactor from text such as ``1/qPochhammer(x, q^2, inf)`` or
    ``qPochhammer(q^2, q^2, n)/q^(n^2)``."""
    from .forms import SequencePochhammer, SeriesPochhammer, SubstitutionFactor
    node = parse(text)
    atoms: list = []
    state = {"coeff": RONE, "xpow": 0, "qexp": [mpq(0), mpq(0), mpq(0)]}

    def walk(nd, sign: int):
        if isinstance(nd, Mul):
            for f in nd.factors:
                walk(f, sign)
            return
        if isinstance(nd, Div):
            walk(nd.num, sign)
            walk(nd.den, -sign)
            return
        if isinstance(nd, Neg):
            state["coeff"] = state["coeff"] * (-1)
            walk(nd.arg, sign)
            return
        if isinstance(nd, Num):
            state["coeff"] = state["coeff"] * (rat(nd.value) if sign > 0 else rat(nd.value).inverse())
            return
        if isinstance(nd, Pow) and isinstance(nd.exp, Num) and nd.exp.value.denominator == 1 \
                and isinstance(nd.base, Call):
            for _ in range(abs(int(nd.exp.value))):
                walk(nd.base, sign * (1 if nd.exp.value > 0 else -1))
            return
        if isinstance(nd, Call) and nd.name == "qPochhammer":
            a_node, b_node, L_node = nd.args
            g = _base_power(b_node, {})
            if kind == "series":
                a = evaluate(a_node).as_poly()
                e = a.degree(var) if var in a.vars else 0
                alpha = a * QPolynomial.var(var, -e) if e else a
                L = None if isinstance(L_node, Sym) and L_node.name == "inf" else _int_arg(L_node, {})
                atoms.append(SeriesPochhammer(alpha, e, g, L, sign))
            else:
                beta = evaluate(a_node).as_poly()
                lp = evaluate(L_node).as_poly()
                if index in lp.vars and lp.degree(index) > 1:
                    raise EvalError("Pochhammer length must be affine in the index")
                lam = int(lp.coeff(index, 1).const_value()) if index in lp.vars else 0
                mu = lp.coeff(index, 0) if index in lp.vars else lp
                mu = int(mu.const_value()) if mu else 0
                atoms.append(SequencePochhammer(beta, g, lam, mu, sign))
            return
        if isinstance(nd, Pow) and isinstance(nd.base, Sym) and nd.base.name == "q" and kind == "sequence":
            e = _exponent_poly(nd.exp, {})
            A = e.coeff(index, 2) if index in e.vars else ZERO
            B = e.coeff(index, 1) if index in e.vars else ZERO
            C = e.coeff(index, 0) if index in e.vars else e
            if any(k > 2 for k in e.exponents_of(index)):
                raise EvalError("q-power factor must be at most quadratic in the index")
            vals = [c.const_value() if c else mpq(0) for c in (A, B, C)]
            for i in range(3):
                state["qexp"][i] += sign * vals[i]
            return
        v = evaluate(nd)
        if kind == "series" and v.is_poly() and v.as_poly().is_monomial() and var in v.vars:
            p = v.as_poly()
            state["xpow"] += sign * p.degree(var)
            rest = p * QPolynomial.var(var, -p.degree(var))
            state["coeff"] = state["coeff"] * (rat(rest) if sign > 0 else rat(rest).inverse())
            return
        if index in v.vars or var in v.vars:
            raise EvalError(f"unsupported factor {to_text(nd)}")
        state["coeff"] = state["coeff"] * (v if sign > 0 else v.inverse())

    walk(node, 1)
    coeff = state["coeff"]
    return SubstitutionFactor(tuple(atoms), coeff.as_poly() if coeff.is_poly() else ONE,
                              state["xpow"], tuple(state["qexp"]))
