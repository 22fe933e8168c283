"""Skew polynomials in the q-shift operator S, with S·f(v) = f(q^s v)·S.

An operator is stored as a sparse map shift -> coefficient.  Negative shifts
are permitted (S is invertible on sequences and on Laurent series), which keeps
equations such as ``g(k) - g(k-1)`` representable without rewriting.  The same
type serves recurrences (v = Qn, the symbol for q^n) and q-shift equations
(v = x).
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .exact import (ONE, RONE, RZERO, ZERO, QPolynomial, QRationalFunction,
                    format_monomial, poly_cofactors, poly_gcd, rat, var_key)


class OreOperator:
    __slots__ = ("var", "stride", "coeffs")

    def __init__(self, coeffs: Mapping[int, object] | Sequence, var: str = "Qn", stride: int = 1):
        if stride <= 0:
            raise ValueError("stride must be positive")
        if not isinstance(coeffs, Mapping):
            coeffs = dict(enumerate(coeffs))
        clean = {}
        for i, c in coeffs.items():
            c = rat(c)
            if c:
                clean[int(i)] = c
        self.var = var
        self.stride = stride
        self.coeffs = clean

    # -- structure ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    @property
    def order(self) -> int:
        """Highest shift present (-1 for the zero operator)."""
        return max(self.coeffs) if self.coeffs else -1

    @property
    def low(self) -> int:
        return min(self.coeffs) if self.coeffs else 0

    @property
    def span(self) -> int:
        return self.order - self.low if self.coeffs else -1

    def lead(self) -> QRationalFunction:
        return self.coeffs[self.order]

    def coeff(self, i: int) -> QRationalFunction:
        return self.coeffs.get(i, RZERO)

    def _like(self, coeffs) -> "OreOperator":
        return OreOperator(coeffs, self.var, self.stride)

    def _check(self, other: "OreOperator"):
        if self.var != other.var or self.stride != other.stride:
            raise ValueError(f"stride/variable mismatch: ({self.var},{self.stride}) vs ({other.var},{other.stride})")

    # -- the twist ------------------------------------------------------------
    def sigma(self, c, k: int) -> QRationalFunction:
        """sigma^k(c): v -> q^(s*k) v."""
        c = rat(c)
        if not k or self.var not in c.vars:
            return c
        return c.qshift(self.var, self.stride * k)

    # -- arithmetic -------------------------------------------------------------
    def __add__(self, other: "OreOperator") -> "OreOperator":
        self._check(other)
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, RZERO) + c
        return self._like(out)

    def __neg__(self):
        return self._like({i: -c for i, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "OreOperator":
        if not isinstance(other, OreOperator):
            c = rat(other)
            return self._like({i: v * self.sigma(c, i) for i, v in self.coeffs.items()})
        self._check(other)
        out: dict = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                t = a * self.sigma(b, i)
                out[i + j] = out.get(i + j, RZERO) + t
        return self._like(out)

    def lmul(self, c) -> "OreOperator":
        """Left multiplication by a coefficient (no twisting)."""
        c = rat(c)
        return self._like({i: c * v for i, v in self.coeffs.items()})

    def shift_left(self, k: int) -> "OreOperator":
        """S^k · self."""
        return self._like({i + k: self.sigma(c, k) for i, c in self.coeffs.items()})

    def __eq__(self, other):
        return (isinstance(other, OreOperator) and self.var == other.var
                and self.stride == other.stride and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.var, self.stride, frozenset(self.coeffs.items())))

    # -- normalization ---------------------------------------------------------
    def normalized(self, polynomial_gcd: bool = True) -> "OreOperator":
        """Shift to lowest power 0, clear denominators, drop content and monomial
        units, and make the leading term of the leading coefficient positive."""
        if not self.coeffs:
            return self
        op = self.shift_left(-self.low) if self.low else self
        nums = clear_denominators(list(op.coeffs.values()))
        nums = remove_content(nums, polynomial_gcd)
        keys = list(op.coeffs.keys())
        out = dict(zip(keys, nums))
        lead = out[max(out)]
        if lead.leading_coeff() < 0:
            out = {i: -c for i, c in out.items()}
        return op._like(out)

    def equivalent(self, other: "OreOperator") -> bool:
        return self.normalized() == other.normalized()

    # -- evaluation --------------------------------------------------------------
    def coeff_at(self, i: int, n: int) -> QRationalFunction:
        """Coefficient i with v = q^n (sequence interpretation)."""
        c = self.coeff(i)
        if self.var not in c.vars:
            return c
        return c.subs(self.var, QPolynomial.var("q", n))

    def apply_to_sequence(self, values: Mapping[int, object] | Sequence, n: int, start: int = 0):
        """Sum_i r_i(q^n) * value[n + s*i]."""
        if not isinstance(values, Mapping):
            values = {start + k: v for k, v in enumerate(values)}
        acc = RZERO
        for i in sorted(self.coeffs):
            idx = n + self.stride * i
            if idx not in values:
                raise IndexError(f"value at index {idx} is required")
            v = rat(values[idx])
            if v:
                acc = acc + self.coeff_at(i, n) * v
        return acc

    def admissible_range(self, start: int, count: int) -> range:
        """Indices n for which n+s*low .. n+s*order are all within the data."""
        lo = start - self.stride * self.low
        hi = start + count - 1 - self.stride * self.order
        return range(lo, hi + 1)

    # -- printing ----------------------------------------------------------------
    def to_text(self, unknown: str = "a", index: str | None = None) -> str:
        idx = index or _index_name(self.var)
        return format_operator(self, unknown, idx)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"OreOperator({self.to_text()!r})"


def _index_name(var: str) -> str:
    return var[1:] if var.startswith("Q") and len(var) > 1 else var


def shift_operator(k: int = 1, var: str = "Qn", stride: int = 1) -> OreOperator:
    return OreOperator({k: RONE}, var, stride)


def const_operator(c, var: str = "Qn", stride: int = 1) -> OreOperator:
    return OreOperator({0: rat(c)}, var, stride)


def clear_denominators(cs: Sequence[QRationalFunction]) -> list[QPolynomial]:
    """Multiply through by the lcm of denominators; returns polynomial numerators."""
    cs = [rat(c) for c in cs]
    den = ONE
    for c in cs:
        if not c.den.is_const():
            g = poly_gcd(den, c.den) if not den.is_const() else ONE
            if g.is_const():
                den = den * c.den
            else:
                _, _, extra = poly_cofactors(g, c.den)
                den = den * extra
    out = []
    for c in cs:
        if c.den == den:
            out.append(c.num)
        elif c.den.is_const():
            out.append(c.num * den)
        else:
            out.append((c * den).as_poly())
    return out


def remove_content(ps: Sequence[QPolynomial], polynomial_gcd: bool = True) -> list[QPolynomial]:
    """Divide by the common monomial (a Laurent unit), the rational content and,
    unless disabled, the polynomial gcd."""
    ps = list(ps)
    nz = [p for p in ps if p]
    if not nz:
        return ps
    # common monomial
    vs = sorted({v for p in nz for v in p.vars}, key=var_key)
    mono = {v: min(p.min_degree(v) for p in nz) for v in vs}
    mono = {v: k for v, k in mono.items() if k}
    if mono:
        m = QPolynomial.monomial(1, {v: -k for v, k in mono.items()})
        ps = [p * m for p in ps]
        nz = [p for p in ps if p]
    # rational content
    from math import gcd as igcd
    num, den = 0, 1
    for p in nz:
        c = p.content()
        num = igcd(num, int(c.numerator))
        den = den * int(c.denominator) // igcd(den, int(c.denominator))
    scale = mpq(den, num)
    ps = [p.scale(scale) for p in ps]
    nz = [p for p in ps if p]
    if not polynomial_gcd or all(p.is_const() for p in nz) or any(p.is_monomial() for p in nz):
        return ps
    g = nz[0]
    for p in nz[1:]:
        if g.is_const():
            break
        g = poly_gcd(g, p)
    if not g.is_const():
        from .exact import poly_divide_exact
        ps = [poly_divide_exact(p, g) if p else p for p in ps]
    return ps


# -- division and gcd -----------------------------------------------------------

def right_divide(A: OreOperator, B: OreOperator) -> tuple[OreOperator, OreOperator]:
    """A = Q*B + R over the fraction field, with order(R) < order(B)."""
    A._check(B)
    if B.is_zero():
        raise ZeroDivisionError("division by the zero operator")
    B = B.shift_left(-B.low) if B.low else B
    d = B.order
    Q = A._like({})
    R = A
    lb = B.lead()
    while R and R.order >= d:
        k = R.order - d
        c = R.lead() / R.sigma(lb, k)
        term = A._like({k: c})
        Q = Q + term
        R = R - term * B
        R = R._like({i: v for i, v in R.coeffs.items() if i < R.order + 1})
    return Q, R


def pseudo_remainder(A: OreOperator, B: OreOperator) -> OreOperator:
    """Fraction-free remainder: repeatedly sigma^k(lc B)·A - lc(A)·S^k·B, content removed."""
    A._check(B)
    B = B.shift_left(-B.low) if B.low else B
    R = A.shift_left(-A.low) if A.coeffs and A.low else A
    d = B.order
    lb = B.lead()
    while R and R.order >= d:
        k = R.order - d
        R = R.lmul(R.sigma(lb, k)) - (B.shift_left(k)).lmul(R.lead())
        if R:
            R = _primitive(R)
    return R


def _primitive(op: OreOperator) -> OreOperator:
    keys = list(op.coeffs)
    nums = remove_content(clear_denominators([op.coeffs[k] for k in keys]))
    return op._like(dict(zip(keys, nums)))


def gcrd(A: OreOperator, B: OreOperator) -> OreOperator:
    """Greatest common right divisor by the Euclidean algorithm (normalized)."""
    A._check(B)
    if A.is_zero():
        return B.normalized()
    if B.is_zero():
        return A.normalized()
    A, B = A.normalized(), B.normalized()
    if A.order < B.order:
        A, B = B, A
    while B:
        R = pseudo_remainder(A, B)
        A, B = B, (R.normalized() if R else R)
    return A.normalized()


# -- printing -------------------------------------------------------------------

def format_index(index: str, k: int) -> str:
    if k == 0:
        return index
    return f"{index}+{k}" if k > 0 else f"{index}-{-k}"


def format_qn_monomial(vars: tuple, e: tuple, qvar: str, index: str) -> str:
    """Monomial text where q^e * Qn^f is printed as q^(f*n+e)."""
    powers = dict(zip(vars, e))
    f = powers.pop(qvar, 0)
    qe = powers.pop("q", 0)
    half = powers.pop("q12", None)
    parts = []
    if f:
        lin = index if f == 1 else ("-" + index if f == -1 else f"{f}*{index}")
        if half is not None:
            # half-integral q power together with q^n: keep them separate
            parts.append(format_monomial(("q12",), (half,)))
            parts.append(f"q^({lin})")
        elif qe:
            parts.append(f"q^({lin}{'+' if qe > 0 else '-'}{abs(qe)})")
        else:
            parts.append(f"q^({lin})" if f != 1 else f"q^{index}")
    else:
        if half is not None:
            parts.append(format_monomial(("q12",), (half,)))
        elif qe:
            parts.append(format_monomial(("q",), (qe,)))
    rest = [v for v in sorted(powers, key=var_key) if powers[v]]
    if rest:
        parts.append(format_monomial(tuple(rest), tuple(powers[v] for v in rest)))
    return "*".join(p for p in parts if p)


def format_coefficient(p: QPolynomial, qvar: str, index: str) -> str:
    """Polynomial text in graded order, with Qn folded into q-powers."""
    from .exact import _format_coeff
    if p.is_zero():
        return "0"
    items = p.sorted_terms()
    if qvar in p.vars:
        i = p.vars.index(qvar)
        qi = p.vars.index("q") if "q" in p.vars else None
        items = sorted(items, key=lambda t: (t[0][i], t[0][qi] if qi is not None else 0, t[0]), reverse=True)
    out = []
    for k, (e, c) in enumerate(items):
        neg = c < 0
        a = -c if neg else c
        mono = format_qn_monomial(p.vars, e, qvar, index)
        if mono:
            body = mono if a == 1 else f"{_format_coeff(a)}*{mono}"
        else:
            body = _format_coeff(a)
        if k == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def format_rational_coefficient(c: QRationalFunction, qvar: str, index: str) -> str:
    n = format_coefficient(c.num, qvar, index)
    if c.den.is_const():
        return n
    d = format_coefficient(c.den, qvar, index)
    if c.num.nterms() > 1:
        n = f"({n})"
    if c.den.nterms() > 1 or "*" in d:
        d = f"({d})"
    return f"{n}/{d}"


def format_term(name: str, coeff: QRationalFunction, qvar: str, index: str, first: bool) -> str:
    """One summand `name*coeff` with the sign pulled to the front."""
    # the sign is pulled out only for monomial numerators
    neg = coeff.num.nterms() == 1 and coeff.num.leading_coeff() < 0
    c = -coeff if neg else coeff
    text = format_rational_coefficient(c, qvar, index)
    if text == "1":
        body = name
    elif c.num.nterms() > 1 and c.den.is_const():
        body = f"{name}*({text})"
    else:
        body = f"{name}*{text}"
    if first:
        return ("-" if neg else "") + body
    return (" - " if neg else " + ") + body


def format_operator(op: OreOperator, unknown: str, index: str) -> str:
    if not op.coeffs:
        return "0"
    out = []
    for k, i in enumerate(sorted(op.coeffs, reverse=True)):
        name = f"{unknown}({format_index(index, op.stride * i)})"
        out.append(format_term(name, op.coeffs[i], op.var, index, k == 0))
    return "".join(out)


# -- coupled systems -----------------------------------------------------------

class CoupledSystem:
    """Square linear system sum_j L_ij g_j = 0 of operators in one shift variable."""

    def __init__(self, rows: Sequence[Mapping[str, OreOperator]], unknowns: Sequence[str]):
        self.unknowns = list(unknowns)
        self.rows = [dict(r) for r in rows]
        ops = [op for r in self.rows for op in r.values()]
        if not ops:
            raise ValueError("empty system")
        self.var = ops[0].var
        self.stride = ops[0].stride

    def zero(self) -> OreOperator:
        return OreOperator({}, self.var, self.stride)

    def entry(self, row: Mapping[str, OreOperator], u: str) -> OreOperator:
        return row.get(u, self.zero())

    def uncouple(self, target: str | None = None):
        """Scalar annihilators, one per unknown (or just the target's)."""
        if target is None:
            return {u: self.uncouple(u) for u in self.unknowns}
        order = [u for u in self.unknowns if u != target] + [target]
        rows = [_row_primitive(_row_lowest_zero(r, self)) for r in self.rows]
        rows = [r for r in rows if any(op for op in r.values())]
        for col in order[:-1]:
            with_col = [r for r in rows if self.entry(r, col)]
            others = [r for r in rows if not self.entry(r, col)]
            if not with_col:
                continue
            while len(with_col) > 1:
                with_col.sort(key=lambda r: (self.entry(r, col).span, _row_size(r)))
                piv = with_col[0]
                p = self.entry(piv, col)
                new = [piv]
                for r in with_col[1:]:
                    r = _reduce_row(r, piv, col, self)
                    if not any(op for op in r.values()):
                        continue
                    if self.entry(r, col):
                        new.append(r)
                    else:
                        others.append(r)
                with_col = new
            rows = others  # the pivot row is consumed by this column
        ops = [self.entry(r, target) for r in rows if self.entry(r, target)]
        if not ops:
            raise ValueError(f"elimination collapsed to 0 = 0 for {target}: system underdetermined")
        g = ops[0].normalized()
        for op in ops[1:]:
            g = gcrd(g, op)
        return g.normalized()

    def unroll(self, initial: Mapping[str, Sequence], start: int, count: int) -> dict[str, list]:
        """Generate values g_j[start..start+count-1] level by level.

        Each row is shifted so its highest shift is 0; ``initial`` gives, for each
        unknown, the values at start, start+1, ... that are taken as known.
        Unknown values below ``start`` are read as 0.
        """
        from .linalg import solve_field
        rows = []
        for r in self.rows:
            hi = max(op.order for op in r.values() if op)
            rows.append({u: op.shift_left(-hi) for u, op in r.items() if op})
        vals = {u: {start + i: rat(v) for i, v in enumerate(initial.get(u, ()))} for u in self.unknowns}
        m = len(self.unknowns)
        s = self.stride
        for lvl in range(start, start + count):
            missing = [u for u in self.unknowns if lvl not in vals[u]]
            if not missing:
                continue
            A, b = [], []
            for r in rows:
                rowA = [RZERO] * len(missing)
                rhs = RZERO
                for u, op in r.items():
                    for i, c in op.coeffs.items():
                        idx = lvl + s * i
                        cval = op.coeff_at(i, lvl)
                        if u in missing and idx == lvl:
                            rowA[missing.index(u)] = rowA[missing.index(u)] + cval
                        else:
                            v = vals[u].get(idx, RZERO) if idx >= start else RZERO
                            rhs = rhs - cval * v
                A.append(rowA)
                b.append(rhs)
            sol = _solve_overdetermined(A, b, len(missing), lvl)
            for u, v in zip(missing, sol):
                vals[u][lvl] = v
        return {u: [vals[u][start + i] for i in range(count)] for u in self.unknowns}


def _solve_overdetermined(A, b, n, lvl):
    from .linalg import solve_field
    # pick n independent rows greedily
    chosen = []
    for i in range(len(A)):
        trial = chosen + [i]
        if _independent([A[j] for j in trial]):
            chosen = trial
        if len(chosen) == n:
            break
    if len(chosen) < n:
        raise ValueError(f"system is singular at level {lvl}")
    return solve_field([A[i] for i in chosen], [b[i] for i in chosen])


def _independent(rows) -> bool:
    M = [list(r) for r in rows]
    k = len(M)
    ncol = len(M[0])
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, k) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(r + 1, k):
            if M[i][c]:
                f = M[i][c] / M[r][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        r += 1
    return r == k


def _row_lowest_zero(row, sysm):
    ops = [op for op in row.values() if op]
    lo = min(op.low for op in ops)
    return {u: (op.shift_left(-lo) if lo else op) for u, op in row.items() if op}


def _row_size(row) -> int:
    return sum(c.num.nterms() for op in row.values() for c in op.coeffs.values())


def _row_primitive(row):
    keys = [(u, i) for u, op in row.items() for i in op.coeffs]
    if not keys:
        return row
    vals = clear_denominators([row[u].coeffs[i] for u, i in keys])
    vals = remove_content(vals)
    out: dict = {}
    for (u, i), v in zip(keys, vals):
        out.setdefault(u, {})[i] = v
    return {u: OreOperator(out.get(u, {}), row[u].var, row[u].stride) for u in row}


def _reduce_row(r, piv, col, sysm):
    """Cancel the top of r's col-entry against the pivot row until its span drops."""
    p = sysm.entry(piv, col)
    while True:
        e = sysm.entry(r, col)
        if not e or e.span < p.span:
            return r
        k = e.order - p.order
        left_r = p.sigma(p.lead(), k)
        left_p = e.lead()
        out = {}
        for u in set(r) | set(piv):
            a = sysm.entry(r, u).lmul(left_r)
            b = sysm.entry(piv, u).shift_left(k).lmul(left_p)
            out[u] = a - b
        out = {u: op for u, op in out.items() if op}
        if not out:
            return out
        r = _row_primitive(_row_lowest_zero(out, sysm))
