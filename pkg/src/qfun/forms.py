"""Equation forms: q-shift equations, q-recurrences and q-differential equations.

Conventions
-----------
* A shift equation  sum_i p_i(x) F(q^(s*i) x) + sum_j c_j(x) <x^j>F + h(x) = 0
  keeps its operator part as an :class:`OreOperator` in ``x``.  ``<x^j>F`` is the
  j-th coefficient of F, written ``Coeff(F,j)`` in text.
* A recurrence is an operator in ``Qn`` (= q^n) acting on a(n), valid for n >= valid_from.
* A q-differential equation  sum_i p_i(x) D^i F(x) + sum_j c_j(x) F^(j)(0) = 0,
  where D is the q-derivative (F(x) - F(qx)) / (x (1 - q)).

All conversions are exact and keep the "expression = 0" reading.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from gmpy2 import mpq

from .exact import (ONE, RONE, RZERO, ZERO, QPolynomial, QRationalFunction,
                    format_poly, poly, rat, sym, var_key)
from .qobjects import pochhammer
from .ore import (OreOperator, clear_denominators, format_coefficient,
                  format_operator, format_rational_coefficient, remove_content)

Q = sym("q")


def _qpow(k) -> QPolynomial:
    return QPolynomial.var("q", k) if k else ONE


def q_factorial(j: int) -> QPolynomial:
    """[j]_q! as a polynomial: prod_{i=1..j} (1 + q + ... + q^(i-1))."""
    out = ONE
    for i in range(1, j + 1):
        out = out * QPolynomial({(e,): 1 for e in range(i)}, ("q",))
    return out


# -- equation types -------------------------------------------------------------

@dataclass(frozen=True)
class ShiftEquation:
    op: OreOperator                     # in var x, stride s
    boundary: Mapping[int, QPolynomial] = field(default_factory=dict)
    inhomogeneous: QPolynomial = ZERO
    unknown: str = "F"

    @property
    def var(self) -> str:
        return self.op.var

    @property
    def stride(self) -> int:
        return self.op.stride

    def terms(self) -> dict[int, QRationalFunction]:
        """Map q-power k -> coefficient of F(q^k x)."""
        return {self.stride * i: c for i, c in self.op.coeffs.items()}

    def normalized(self, polynomial_gcd: bool = True) -> "ShiftEquation":
        """Clear denominators and content over operator, boundary and inhomogeneous parts;
        shift so the lowest power is F(x); positive leading sign."""
        op = self.op
        bnd = dict(self.boundary)
        inh = self.inhomogeneous
        if op.low:
            k = op.stride * op.low
            op = op.shift_left(-op.low)
            # substituting x -> q^(-k) x in the whole equation
            bnd = {j: rat(c).qshift(self.var, -k) for j, c in bnd.items()}
            inh = rat(inh).qshift(self.var, -k)
        keys = sorted(op.coeffs)
        bkeys = sorted(bnd)
        vals = [op.coeffs[i] for i in keys] + [rat(bnd[j]) for j in bkeys] + [rat(inh)]
        nums = remove_content(clear_denominators(vals), polynomial_gcd)
        lead = nums[len(keys) - 1]
        if lead.leading_coeff() < 0:
            nums = [-p for p in nums]
        newop = op._like(dict(zip(keys, nums[:len(keys)])))
        newb = {j: p for j, p in zip(bkeys, nums[len(keys):-1]) if p}
        return ShiftEquation(newop, newb, nums[-1], self.unknown)

    def equivalent(self, other: "ShiftEquation") -> bool:
        a, b = self.normalized(), other.normalized()
        return a.op == b.op and dict(a.boundary) == dict(b.boundary) and a.inhomogeneous == b.inhomogeneous

    def homogeneous_part(self) -> "ShiftEquation":
        return ShiftEquation(self.op, {}, ZERO, self.unknown)

    def to_text(self) -> str:
        F, x = self.unknown, self.var
        parts = []
        for i in sorted(self.op.coeffs, reverse=True):
            k = self.stride * i
            arg = x if k == 0 else f"{format_poly(_qpow(k))}*{x}"
            parts.append((f"{F}({arg})", self.op.coeffs[i]))
        for j in sorted(self.boundary, reverse=True):
            parts.append((f"Coeff({F},{j})", rat(self.boundary[j])))
        if self.inhomogeneous:
            parts.append(("1", rat(self.inhomogeneous)))
        return join_terms(parts)

    def __str__(self):
        return self.to_text()


@dataclass(frozen=True)
class Recurrence:
    op: OreOperator                     # in var Qn
    valid_from: int = 0
    unknown: str = "a"

    @property
    def order(self) -> int:
        return self.op.span

    def normalized(self) -> "Recurrence":
        low = self.op.low
        return Recurrence(self.op.normalized(), self.valid_from + self.op.stride * low, self.unknown)

    def equivalent(self, other: "Recurrence") -> bool:
        return self.op.normalized() == other.op.normalized()

    def to_text(self) -> str:
        return format_operator(self.op, self.unknown, _index(self.op.var))

    def __str__(self):
        return self.to_text()


@dataclass(frozen=True)
class DifferentialEquation:
    terms: Mapping[int, QRationalFunction]          # derivative order -> coefficient
    init: Mapping[int, QRationalFunction] = field(default_factory=dict)
    inhomogeneous: QPolynomial = ZERO
    unknown: str = "F"
    var: str = "x"

    def normalized(self) -> "DifferentialEquation":
        keys = sorted(self.terms)
        ikeys = sorted(self.init)
        vals = [rat(self.terms[i]) for i in keys] + [rat(self.init[j]) for j in ikeys] + [rat(self.inhomogeneous)]
        nums = remove_content(clear_denominators(vals))
        top = [p for p in nums[:len(keys)] if p][-1]
        if top.leading_coeff() < 0:
            nums = [-p for p in nums]
        t = {i: rat(p) for i, p in zip(keys, nums) if p}
        ini = {j: rat(p) for j, p in zip(ikeys, nums[len(keys):-1]) if p}
        return DifferentialEquation(t, ini, nums[-1], self.unknown, self.var)

    def equivalent(self, other: "DifferentialEquation") -> bool:
        a, b = self.normalized(), other.normalized()
        return dict(a.terms) == dict(b.terms) and dict(a.init) == dict(b.init) and a.inhomogeneous == b.inhomogeneous

    def to_text(self) -> str:
        F, x = self.unknown, self.var
        parts = []
        for i in sorted(self.terms, reverse=True):
            name = f"{F}({x})" if i == 0 else f"Dq({F}({x}),{i})"
            parts.append((name, rat(self.terms[i])))
        for j in sorted(self.init, reverse=True):
            parts.append((f"Dq0({F},{j})", rat(self.init[j])))
        if self.inhomogeneous:
            parts.append(("1", rat(self.inhomogeneous)))
        return join_terms(parts)

    def __str__(self):
        return self.to_text()


def _index(var: str) -> str:
    return var[1:] if var.startswith("Q") and len(var) > 1 else var


def join_terms(parts: Sequence[tuple[str, QRationalFunction]]) -> str:
    """`coeff*Name` summands; the sign of a monomial numerator is pulled out."""
    out = []
    for name, c in parts:
        if not c:
            continue
        neg = c.num.nterms() == 1 and c.num.leading_coeff() < 0
        cc = -c if neg else c
        text = str(cc)
        if name == "1":
            body = text if (cc.num.nterms() == 1 or not out) else f"({text})"
        elif text == "1":
            body = name
        elif cc.num.nterms() > 1 and cc.den.is_const():
            body = f"({text})*{name}"
        else:
            body = f"{text}*{name}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out) if out else "0"


# -- construction helpers ------------------------------------------------------

def shift_equation(terms: Mapping[int, object], var: str = "x", stride: int = 1,
                   boundary: Mapping[int, object] | None = None, inhomogeneous=0,
                   unknown: str = "F") -> ShiftEquation:
    """Build from {q-power k: coefficient of F(q^k x)}; each k must be a multiple of stride."""
    coeffs = {}
    for k, c in terms.items():
        if k % stride:
            raise ValueError(f"shift q^{k} is not a multiple of the stride {stride}")
        coeffs[k // stride] = c
    bnd = {j: poly(c) if not isinstance(c, QRationalFunction) else c for j, c in (boundary or {}).items()}
    return ShiftEquation(OreOperator(coeffs, var, stride), bnd, poly(inhomogeneous), unknown)


def recurrence(terms: Mapping[int, object], valid_from: int = 0, unknown: str = "a",
               var: str = "Qn") -> Recurrence:
    return Recurrence(OreOperator(terms, var, 1), valid_from, unknown)


# -- qSE <-> qRE ----------------------------------------------------------------

@dataclass(frozen=True)
class ConversionResult:
    recurrence: Recurrence
    side_conditions: tuple          # tuples (m, {index: coefficient}) for the low equations


def se_to_re(eq: ShiftEquation, unknown: str = "a") -> ConversionResult:
    """Coefficient extraction: the x^m equation becomes a recurrence at n = m - J,
    J the largest x-degree among operator coefficients."""
    x = eq.var
    if any(not c.is_poly() for c in eq.op.coeffs.values()):
        eq = eq.normalized()
    if any(rat(c).num.min_degree(x) < 0 for c in eq.op.coeffs.values()):
        eq = eq.normalized()
    parts = {}
    J = 0
    for i, c in eq.op.coeffs.items():
        k = eq.stride * i
        for e, pc in c.as_poly().coeffs_in(x).items():
            parts[(k, e)] = pc
            J = max(J, e)
    rec: dict[int, QRationalFunction] = {}
    for (k, e), pc in parts.items():
        shift = J - e
        mono = QPolynomial.monomial(1, {"q": k * (J - e), "Qn": k})
        rec[shift] = rec.get(shift, RZERO) + rat(pc * mono)
    extra_deg = -1
    for c in eq.boundary.values():
        extra_deg = max(extra_deg, poly(c).degree(x))
    if eq.inhomogeneous:
        extra_deg = max(extra_deg, eq.inhomogeneous.degree(x))
    valid_from = max(0, extra_deg - J + 1)
    side = []
    for m in range(0, J + valid_from):
        rel: dict[int, QRationalFunction] = {}
        for (k, e), pc in parts.items():
            idx = m - e
            if idx >= 0:
                rel[idx] = rel.get(idx, RZERO) + rat(pc * _qpow(k * idx))
        for j, c in eq.boundary.items():
            cm = poly(c).coeff(x, m)
            if cm:
                rel[j] = rel.get(j, RZERO) + rat(cm)
        rhs = eq.inhomogeneous.coeff(x, m) if eq.inhomogeneous else ZERO
        rel = {i: v for i, v in rel.items() if v}
        if rel or rhs:
            side.append((m, rel, rhs))
    op = OreOperator(rec, "Qn", 1)
    return ConversionResult(Recurrence(op, valid_from, unknown), tuple(side))


def re_to_se(rec: Recurrence, var: str = "x", unknown: str = "F") -> ShiftEquation:
    """Multiply the recurrence by x^(n+d) and sum over n >= valid_from."""
    op = rec.op
    if op.stride != 1:
        raise ValueError("recurrences with stride > 1 are not supported here")
    if op.low < 0:
        op = op.shift_left(-op.low)
        n0 = rec.valid_from + rec.op.low
    else:
        n0 = rec.valid_from
    n0 = max(n0, 0)
    d = op.order
    xs = sym(var)
    terms: dict[int, QRationalFunction] = {}
    boundary: dict[int, QRationalFunction] = {}
    for i, c in op.coeffs.items():
        c = c.as_poly()
        for k, rho in c.coeffs_in(op.var).items():
            # x^(d-i) q^(-k i) rho [F(q^k x) - sum_{m < n0+i} a_m q^(k m) x^m]
            pre = rho * xs ** (d - i) * _qpow(-k * i)
            terms[k] = terms.get(k, RZERO) + rat(pre)
            for m in range(0, n0 + i):
                bc = pre * _qpow(k * m) * xs ** m
                boundary[m] = boundary.get(m, RZERO) - rat(bc)
    ks = sorted(terms)
    low = ks[0]
    from math import gcd
    g = 0
    for k in ks:
        g = gcd(g, k - low)
    stride = 1
    coeffs = {k: v for k, v in terms.items()}
    boundary = {m: v for m, v in boundary.items() if v}
    return ShiftEquation(OreOperator(coeffs, var, stride), {m: v.as_poly() for m, v in boundary.items()},
                         ZERO, unknown)


# -- qSE <-> qDE ----------------------------------------------------------------

def _eta_basis(kmax: int, x: str) -> list[dict[int, QPolynomial]]:
    """F(q^k x) expressed as sum_i beta_{k,i} x^i D^i F for k = 0..kmax."""
    xs = sym(x)
    one_minus_q = ONE - Q
    out = [{0: ONE}]
    for k in range(1, kmax + 1):
        prev = out[-1]
        cur: dict[int, QPolynomial] = {}
        for i, b in prev.items():
            # eta(x^i D^i F) = q^i x^i D^i F - (1-q) q^i x^(i+1) D^(i+1) F
            cur[i] = cur.get(i, ZERO) + b * _qpow(i)
            cur[i + 1] = cur.get(i + 1, ZERO) - b * one_minus_q * _qpow(i) * xs
        out.append({i: v for i, v in cur.items() if v})
    return out


def se_to_de(eq: ShiftEquation) -> DifferentialEquation:
    x = eq.var
    if eq.op.low < 0:
        eq = eq.normalized()
    terms = eq.terms()
    basis = _eta_basis(max(terms), x)
    xs = sym(x)
    out: dict[int, QRationalFunction] = {}
    for k, c in terms.items():
        for i, b in basis[k].items():
            # b already carries x^i
            out[i] = out.get(i, RZERO) + c * b
    init = {j: rat(c) / rat(q_factorial(j)) for j, c in eq.boundary.items()}
    de = DifferentialEquation({i: v for i, v in out.items() if v}, init, eq.inhomogeneous, eq.unknown, x)
    if any(not v.is_poly() for v in init.values()):
        vals = list(de.terms.values()) + list(de.init.values()) + [rat(de.inhomogeneous)]
        nums = clear_denominators(vals)
        tk, ik = list(de.terms), list(de.init)
        de = DifferentialEquation({i: rat(p) for i, p in zip(tk, nums)},
                                  {j: rat(p) for j, p in zip(ik, nums[len(tk):])},
                                  nums[-1], eq.unknown, x)
    return de


def de_to_se(de: DifferentialEquation) -> ShiftEquation:
    """Expand D^i F into shifts: D(c(x)F(q^k x)) = [c(x)F(q^k x) - c(qx)F(q^(k+1) x)] / (x(1-q))."""
    x = de.var
    xs = sym(x)
    denom = rat(xs * (ONE - Q))
    total: dict[int, QRationalFunction] = {}
    cur = {0: RONE}
    for i in range(0, max(de.terms) + 1):
        if i:
            nxt: dict[int, QRationalFunction] = {}
            for k, c in cur.items():
                nxt[k] = nxt.get(k, RZERO) + c / denom
                nxt[k + 1] = nxt.get(k + 1, RZERO) - c.qshift(x, 1) / denom
            cur = {k: v for k, v in nxt.items() if v}
        p = de.terms.get(i)
        if p:
            for k, c in cur.items():
                total[k] = total.get(k, RZERO) + rat(p) * c
    boundary = {j: rat(c) * rat(q_factorial(j)) for j, c in de.init.items()}
    keys = sorted(total)
    bkeys = sorted(boundary)
    vals = [total[k] for k in keys] + [boundary[j] for j in bkeys] + [rat(de.inhomogeneous)]
    nums = clear_denominators(vals)
    op = OreOperator(dict(zip(keys, nums[:len(keys)])), x, 1)
    bnd = {j: p for j, p in zip(bkeys, nums[len(keys):-1]) if p}
    return ShiftEquation(op, bnd, nums[-1], de.unknown)


def convert(eq, target: str):
    """Convert among 'qSE', 'qRE', 'qDE'."""
    target = target.lower()
    if isinstance(eq, ShiftEquation):
        if target == "qse":
            return eq
        if target == "qre":
            return se_to_re(eq).recurrence
        if target == "qde":
            if eq.stride != 1:
                raise ValueError("stride > 1 cannot be converted into a q-differential equation")
            return se_to_de(eq)
    if isinstance(eq, Recurrence):
        if target == "qre":
            return eq
        se = re_to_se(eq)
        return se if target == "qse" else se_to_de(se)
    if isinstance(eq, DifferentialEquation):
        if target == "qde":
            return eq
        se = de_to_se(eq)
        return se if target == "qse" else se_to_re(se).recurrence
    raise ValueError(f"unknown conversion target {target!r}")


# -- unrolling ------------------------------------------------------------------

def unroll(rec: Recurrence | OreOperator, start: int, initial: Sequence, count: int) -> list[QRationalFunction]:
    """Values a(start), ..., a(start+count-1); the first given values are echoed and
    the last ``order`` of them seed the recursion."""
    op = rec.op if isinstance(rec, Recurrence) else rec
    if op.stride != 1:
        raise ValueError("unrolling requires stride 1")
    low = op.low
    op = op.shift_left(-low) if low else op
    d = op.order
    vals = [rat(v) for v in initial]
    if len(vals) < d:
        raise ValueError(f"at least {d} initial values are required")
    out = list(vals[:count])
    seed = vals[len(vals) - d:] if d else []
    m = start + len(vals)
    while len(out) < count:
        n = m - d
        lead = op.coeff_at(d, n)
        if not lead:
            raise ZeroDivisionError(f"leading coefficient vanishes at n = {n} (computing index {m})")
        acc = RZERO
        for i, c in op.coeffs.items():
            if i < d and seed[i]:
                acc = acc + op.coeff_at(i, n) * seed[i]
        v = -acc / lead
        out.append(v)
        seed = (seed + [v])[1:] if d else []
        m += 1
    return out


# -- substitution factors ------------------------------------------------------

@dataclass(frozen=True)
class SeriesPochhammer:
    """(alpha * x^xpow ; q^base)_length raised to ``power``; length None means infinity."""
    alpha: QPolynomial
    xpow: int
    base: int
    length: int | None
    power: int = 1


@dataclass(frozen=True)
class SequencePochhammer:
    """(beta ; q^base)_(lam*n + mu) raised to ``power``."""
    beta: QPolynomial
    base: int
    lam: int
    mu: int
    power: int = 1


@dataclass(frozen=True)
class SubstitutionFactor:
    """Product of Pochhammer atoms times a monomial prefactor.

    For series factors the prefactor is c * x^xpow; for sequence factors it is
    c * q^(A n^2 + B n + C) with ``qexp = (A, B, C)``.
    """
    atoms: tuple = ()
    coeff: QPolynomial = ONE
    xpow: int = 0
    qexp: tuple = (mpq(0), mpq(0), mpq(0))

    def series_ratio(self, k: int, x: str = "x") -> QRationalFunction:
        """phi(x) / phi(q^k x)."""
        xs = sym(x)
        out = rat(_qpow(-k * self.xpow))
        for a in self.atoms:
            r = _series_atom_ratio(a, k, xs)
            out = out * (r if a.power > 0 else r.inverse()) ** abs(a.power)
        return out

    def sequence_ratio(self, i: int, var: str = "Qn") -> QRationalFunction:
        """phi(n) / phi(n+i) as a rational function of q and Qn."""
        A, B, C = self.qexp
        # q^(P(n) - P(n+i)) = q^(-(2 A i) n - A i^2 - B i)
        lin = -2 * A * i
        cst = -A * i * i - B * i
        if lin.denominator != 1 or cst.denominator != 1:
            raise ValueError("monomial factor ratio is not rational in q^n")
        out = rat(QPolynomial.monomial(1, {"q": int(cst), var: int(lin)}))
        for a in self.atoms:
            r = _sequence_atom_ratio(a, i, var)      # P(n+i)/P(n)
            r = r.inverse()
            out = out * (r if a.power > 0 else r.inverse()) ** abs(a.power)
        return out


def _series_atom_ratio(a: SeriesPochhammer, k: int, xs: QPolynomial) -> QRationalFunction:
    """P(x)/P(q^k x) for P = (alpha x^e; q^g)_L."""
    g, e = a.base, a.xpow
    arg = a.alpha * xs ** e
    if a.length is not None:
        num = pochhammer(arg, _qpow(g), a.length)
        den = pochhammer(arg * _qpow(k * e), _qpow(g), a.length)
        return rat(num) / rat(den)
    t = k * e
    if t % g:
        raise ValueError(f"shift ratio of an infinite Pochhammer with base q^{g} under x -> q^{k} x is not rational")
    steps = t // g
    if steps >= 0:
        return rat(pochhammer(arg, _qpow(g), steps))
    return rat(pochhammer(arg * _qpow(t), _qpow(g), -steps)).inverse()


def _sequence_atom_ratio(a: SequencePochhammer, i: int, var: str) -> QRationalFunction:
    """P(n+i)/P(n) for P(n) = (beta; q^g)_(lam n + mu)."""
    if a.lam < 0:
        raise ValueError("Pochhammer length must increase with n")
    out = RONE
    qn = sym(var)
    steps = a.lam * abs(i)
    base_r = a.mu if i >= 0 else a.mu - a.lam * abs(i)
    prod = ONE
    for t in range(steps):
        # factor r = lam*n + base_r + t  ->  1 - beta q^(g r)
        prod = prod * (ONE - a.beta * _qpow(a.base * (base_r + t)) * qn ** (a.base * a.lam))
    out = rat(prod)
    return out if i >= 0 else out.inverse()


def substitute_se(eq: ShiftEquation, factor: SubstitutionFactor, unknown: str | None = None) -> ShiftEquation:
    """New unknown B = factor * F; coefficients become p_k(x) phi(x)/phi(q^k x), collected."""
    if eq.boundary or eq.inhomogeneous:
        raise ValueError("substitution applies to homogeneous equations without boundary terms")
    terms = eq.terms()
    new = {k: c * factor.series_ratio(k, eq.var) for k, c in terms.items()}
    keys = sorted(new)
    nums = clear_denominators([new[k] for k in keys])
    nums = remove_content(nums)
    op = OreOperator({k // eq.stride: p for k, p in zip(keys, nums)}, eq.var, eq.stride)
    return ShiftEquation(op, {}, ZERO, unknown or eq.unknown)


def substitute_re(rec: Recurrence, factor: SubstitutionFactor, unknown: str | None = None) -> Recurrence:
    """New unknown g = factor * a; coefficients r_i phi(n)/phi(n+i), collected."""
    op = rec.op
    new = {i: c * factor.sequence_ratio(op.stride * i, op.var) for i, c in op.coeffs.items()}
    keys = sorted(new)
    nums = remove_content(clear_denominators([new[i] for i in keys]))
    return Recurrence(op._like(dict(zip(keys, nums))), rec.valid_from, unknown or rec.unknown)


# -- series solutions (used as an oracle) -----------------------------------------

def series_solution_residual(eq: ShiftEquation, coeffs: Sequence, upto: int) -> list[QRationalFunction]:
    """Coefficients of x^0..x^upto of the equation evaluated on F = sum coeffs[m] x^m."""
    x = eq.var
    out = []
    for m in range(upto + 1):
        acc = RZERO
        for k, c in eq.terms().items():
            for e, pc in c.as_poly().coeffs_in(x).items():
                idx = m - e
                if 0 <= idx < len(coeffs):
                    acc = acc + rat(pc * _qpow(k * idx)) * rat(coeffs[idx])
        for j, c in eq.boundary.items():
            cm = poly(c).coeff(x, m)
            if cm and j < len(coeffs):
                acc = acc + rat(cm) * rat(coeffs[j])
        if eq.inhomogeneous:
            acc = acc + rat(eq.inhomogeneous.coeff(x, m))
        out.append(acc)
    return out
