"""Guessing q-shift equations and q-recurrences from data.

The ansatz for a shift equation is

    sum_{i<=order} sum_{j<=dx} sum_{k<=dq} c_ijk x^j q^k F(q^(s*i) x)  (+ h(x) if inhomogeneous)

Extracting the coefficient of x^m, clearing the data denominators and splitting
by powers of q yields rational linear equations in the c_ijk.  The nullspace is
computed multi-modularly and every returned equation is re-verified against the
data with independent rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .exact import ONE, RZERO, ZERO, QPolynomial, poly, poly_cofactors, poly_gcd, rat, sym
from .forms import Recurrence, ShiftEquation, series_solution_residual
from .linalg import nullspace, solve_affine
from .ore import OreOperator

DIAGNOSTIC_MORE_DATA = "More restrictions/data needed. Example: set ExpansionOrder higher."
SAFETY_MARGIN = 5


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class GuessOptions:
    order: int = 1
    degree: int | tuple = 1
    shift_increment: int = 1
    starting_point: int = 0
    expansion_order: int | None = None
    highest_order_factor: QPolynomial | None = None
    lowest_order_coefficient: QPolynomial | None = None
    inhomogeneous: bool = False

    def degrees(self) -> tuple[int, int]:
        d = self.degree
        if isinstance(d, (tuple, list)):
            return int(d[0]), int(d[1])
        return int(d), int(d)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be at least 1")
        dv, dq = self.degrees()
        if dv < 0 or dq < 0:
            raise ValueError("degrees must be non-negative")
        if self.shift_increment < 1:
            raise ValueError("shift increment must be positive")


@dataclass
class GuessResult:
    solutions: list                 # normalized basis equations
    general: object = None          # combination with free constants C[i]
    unique: bool = False
    diagnostic: str = ""
    free_constants: int = 0
    equations_used: int = 0
    unknowns: int = 0

    def __str__(self):
        if not self.solutions:
            return self.diagnostic or "no solution"
        return str(self.general if self.general is not None else self.solutions[0])


# -- shared machinery --------------------------------------------------------------

@dataclass(frozen=True)
class _Column:
    """Unknown multiplying sum of coeff * x^xpow * q^qpow applied to shift i."""
    shift: int
    terms: tuple            # ((xpow, qpow, coeff), ...)
    label: tuple


def _lcm_poly(a: QPolynomial, b: QPolynomial) -> QPolynomial:
    if a.is_const():
        return b
    if b.is_const():
        return a
    g, _, bb = poly_cofactors(a, b)
    return a * bb


def _integer_scale(p: QPolynomial) -> QPolynomial:
    from math import gcd
    den = 1
    for c in p.terms.values():
        d = int(c.denominator)
        den = den // gcd(den, d) * d
    return p.scale(den) if den != 1 else p


def _columns(opts: GuessOptions, var: str, index_mode: bool) -> tuple[list[_Column], _Column | None]:
    dv, dq = opts.degrees()
    cols: list[_Column] = []
    fixed = None
    F0 = opts.highest_order_factor
    for i in range(opts.order + 1):
        if i == 0 and opts.lowest_order_coefficient is not None:
            P0 = poly(opts.lowest_order_coefficient)
            fixed = _Column(0, tuple(_split_xq(P0, var)), ("fixed", 0))
            continue
        if i == opts.order and F0 is not None:
            F0p = poly(F0)
            fx = F0p.degree(var) if var in F0p.vars else 0
            fq = F0p.degree("q") if "q" in F0p.vars else 0
            base = _split_xq(F0p, var)
            for j in range(dv - fx + 1):
                for k in range(dq - fq + 1):
                    terms = tuple((a + j, b + k, c) for a, b, c in base)
                    cols.append(_Column(i, terms, (i, j, k)))
            continue
        for j in range(dv + 1):
            for k in range(dq + 1):
                cols.append(_Column(i, ((j, k, mpq(1)),), (i, j, k)))
    if opts.inhomogeneous:
        for j in range(dv + 1):
            for k in range(dq + 1):
                cols.append(_Column(-1, ((j, k, mpq(1)),), ("h", j, k)))
    return cols, fixed


def _split_xq(p: QPolynomial, var: str) -> list:
    extra = set(p.vars) - {var, "q"}
    if extra:
        raise ValueError(f"factor may only involve {var} and q")
    out = []
    xi = p.vars.index(var) if var in p.vars else None
    qi = p.vars.index("q") if "q" in p.vars else None
    for e, c in p.terms.items():
        out.append((e[xi] if xi is not None else 0, e[qi] if qi is not None else 0, c))
    return out


def _qpoly_terms(p: QPolynomial) -> dict[int, mpq]:
    if not p.vars:
        return {0: p.terms[()]} if p.terms else {}
    if p.vars != ("q",):
        raise ValueError(f"data must be rational in q only, got {p}")
    return {e[0]: c for e, c in p.terms.items()}


def _dense_rows(rows: list[dict[int, mpq]], ncols: int) -> list[list]:
    out, seen = [], set()
    for r in rows:
        key = tuple(sorted(r.items()))
        if not key or key in seen:
            continue
        seen.add(key)
        v = [0] * ncols
        for c, val in r.items():
            v[c] = val
        out.append(v)
    return out


# -- series guessing ---------------------------------------------------------------

def guess_shift_equation(data: Sequence, opts: GuessOptions, unknown: str = "F", var: str = "x") -> GuessResult:
    """Guess from coefficient data a_0, a_1, ... (rational functions of q)."""
    data = [rat(a) for a in data]
    N = len(data) - 1 if opts.expansion_order is None else opts.expansion_order
    if N > len(data) - 1:
        raise InsufficientDataError(f"expansion order {N} exceeds the {len(data)} supplied coefficients")
    s = opts.shift_increment
    dv, _ = opts.degrees()
    cols, fixed = _columns(opts, var, False)
    ncols = len(cols)
    sp = opts.starting_point
    first = sp + dv if sp > 0 else 0
    eqs = range(first, N + 1)
    rows: list[dict[int, mpq]] = []
    maxx = _max_xpow(cols, fixed)
    allcols = list(enumerate(cols)) + ([(ncols, fixed)] if fixed is not None else [])
    for m in eqs:
        den = ONE
        for idx in range(max(0, m - maxx), m + 1):
            den = _lcm_poly(den, data[idx].den)
        scaled: dict[int, dict] = {}
        eq_rows: dict[int, dict[int, mpq]] = {}
        for ci, col in allcols:
            for xp, qp, c in col.terms:
                idx = m - xp
                if col.shift == -1:
                    # h(x) enters the cleared equation as h_m(q) * den
                    if idx == 0:
                        for e, v in _qpoly_terms(den).items():
                            r = eq_rows.setdefault(e + qp, {})
                            r[ci] = r.get(ci, 0) + c * v
                    continue
                if idx < 0:
                    continue
                if idx not in scaled:
                    scaled[idx] = _qpoly_terms((data[idx] * den).as_poly()) if data[idx] else {}
                shift = qp + s * col.shift * idx
                for e, v in scaled[idx].items():
                    r = eq_rows.setdefault(e + shift, {})
                    r[ci] = r.get(ci, 0) + c * v
        for e in sorted(eq_rows):
            r = {k: v for k, v in eq_rows[e].items() if v}
            if r:
                rows.append(r)
    return _finish(rows, cols, fixed, opts, len(eqs),
                   lambda vec, normalize=True: _to_shift_equation(vec, cols, fixed, opts, unknown, var, normalize),
                   lambda eq: verify_guess(eq, data, N, start=first))


def _max_xpow(cols, fixed) -> int:
    allc = cols + ([fixed] if fixed is not None else [])
    return max(xp for c in allc for xp, _, _ in c.terms)


def _finish(rows, cols, fixed, opts, n_eqs, build, verify) -> GuessResult:
    ncols = len(cols)
    if len(rows) < ncols + SAFETY_MARGIN:
        raise InsufficientDataError(
            f"{len(rows)} linear conditions for {ncols} unknowns; supply more data or a higher expansion order")
    none = GuessResult([], None, False, "no equation of the requested shape fits the data", 0, n_eqs, ncols)
    if fixed is None:
        basis = nullspace(_dense_rows(rows, ncols), ncols)
        if not basis:
            return none
        base, rest = list(basis[0]), basis[1:]
        eqs = [build(list(v)) for v in basis]
    else:
        dense = _dense_rows(rows, ncols + 1)
        sol = solve_affine([r[:ncols] for r in dense], [-r[ncols] for r in dense], ncols)
        if sol is None:
            return none
        particular, rest = sol
        base = list(particular) + [1]
        eqs = [build(base)] + [build(list(v) + [0]) for v in rest]
    for eq in eqs:
        if not verify(eq):
            raise AssertionError(f"guessed equation fails verification: {eq}")
    free = len(rest)
    if free == 0:
        return GuessResult(eqs, eqs[0], True, "", 0, n_eqs, ncols)
    combo = [rat(v) for v in base]
    for i, v in enumerate(rest, start=1):
        C = rat(sym(f"C[{i}]"))
        combo = [a + C * rat(b) for a, b in zip(combo, list(v) + [0] * (len(base) - len(v)))]
    return GuessResult(eqs, build(combo, normalize=False), False, DIAGNOSTIC_MORE_DATA, free, n_eqs, ncols)


def _to_shift_equation(vec, cols, fixed, opts, unknown, var, normalize=True) -> ShiftEquation:
    x = sym(var)
    coeffs: dict[int, object] = {}
    inh = RZERO
    allcols = list(zip(cols, vec))
    if fixed is not None:
        allcols.append((fixed, vec[len(cols)]))
    for col, c in allcols:
        c = rat(c)
        if not c:
            continue
        p = ZERO
        for xp, qp, cc in col.terms:
            p = p + QPolynomial.monomial(cc, {var: xp, "q": qp})
        if col.shift == -1:
            inh = inh + c * rat(p)
            continue
        coeffs[col.shift] = coeffs.get(col.shift, RZERO) + c * rat(p)
    op = OreOperator(coeffs, var, opts.shift_increment)
    eq = ShiftEquation(op, {}, inh.as_poly() if inh.is_poly() else ZERO, unknown)
    if not inh.is_poly():
        eq = ShiftEquation(op, {}, ZERO, unknown)
    # a prescribed leading factor must survive normalization
    return eq.normalized(opts.highest_order_factor is None) if normalize else eq


def verify_guess(eq, data: Sequence, through: int, start: int = 0) -> bool:
    """True iff eq annihilates the data at every index from start through ``through``."""
    if isinstance(eq, ShiftEquation):
        res = series_solution_residual(eq, [rat(a) for a in data[:through + 1]], through)
        return all(not r for r in res[start:])
    if isinstance(eq, Recurrence):
        op = eq.op
        vals = {i: rat(a) for i, a in enumerate(data)}
        for n in range(start, through + 1):
            idxs = [n + op.stride * i for i in op.coeffs]
            if min(idxs) < 0 or max(idxs) >= len(data):
                continue
            if op.apply_to_sequence(vals, n):
                return False
        return True
    raise TypeError("expected a ShiftEquation or Recurrence")


# -- recurrence guessing ----------------------------------------------------------

def guess_recurrence(data: Sequence, opts: GuessOptions, unknown: str = "a", index: str = "n") -> GuessResult:
    """Guess sum c_ijk (q^n)^j q^k a(n + s*i) = 0 from a_0, a_1, ..."""
    data = [rat(a) for a in data]
    s = opts.shift_increment
    qv = "Q" + index
    cols, fixed = _columns(opts, qv, True)
    ncols = len(cols)
    last = len(data) - 1 if opts.expansion_order is None else opts.expansion_order
    top = s * opts.order
    ns = range(opts.starting_point, last - top + 1)
    rows = []
    for n in ns:
        den = ONE
        for i in range(opts.order + 1):
            den = _lcm_poly(den, data[n + s * i].den)
        allcols = list(enumerate(cols)) + ([(ncols, fixed)] if fixed is not None else [])
        eq_rows: dict[int, dict[int, mpq]] = {}
        cache = {}
        for ci, col in allcols:
            if col.shift == -1:
                for xp, qp, c in col.terms:
                    for e, v in _qpoly_terms(den).items():
                        r = eq_rows.setdefault(e + qp + xp * n, {})
                        r[ci] = r.get(ci, 0) + c * v
                continue
            idx = n + s * col.shift
            if idx not in cache:
                cache[idx] = _qpoly_terms((data[idx] * den).as_poly()) if data[idx] else {}
            for xp, qp, c in col.terms:
                shift = qp + xp * n
                for e, v in cache[idx].items():
                    r = eq_rows.setdefault(e + shift, {})
                    r[ci] = r.get(ci, 0) + c * v
        for e in sorted(eq_rows):
            r = {k: v for k, v in eq_rows[e].items() if v}
            if r:
                rows.append(r)
    return _finish(rows, cols, fixed, opts, len(ns),
                   lambda vec, normalize=True: _to_recurrence(vec, cols, fixed, opts, unknown, qv, normalize),
                   lambda eq: verify_guess(eq, data, last, start=opts.starting_point))


def _to_recurrence(vec, cols, fixed, opts, unknown, qv, normalize=True) -> Recurrence:
    coeffs: dict[int, object] = {}
    allcols = list(zip(cols, vec))
    if fixed is not None:
        allcols.append((fixed, vec[len(cols)]))
    for col, c in allcols:
        c = rat(c)
        if not c or col.shift == -1:
            continue
        p = ZERO
        for xp, qp, cc in col.terms:
            p = p + QPolynomial.monomial(cc, {qv: xp, "q": qp})
        coeffs[col.shift] = coeffs.get(col.shift, RZERO) + c * rat(p)
    op = OreOperator(coeffs, qv, opts.shift_increment)
    rec = Recurrence(op, opts.starting_point, unknown)
    return Recurrence(op.normalized(opts.highest_order_factor is None), opts.starting_point, unknown) if normalize else rec


# -- summand input -------------------------------------------------------------

def complete_order(summand_node, var: str, ranges) -> int:
    """Largest var-exponent through which a bounded multi-sum equals its infinite version:
    min over summation variables of (bound + 1) * (var-exponent per unit) - 1."""
    from .expr import Pow, Sym, _exponent_poly, Mul, Div
    expo = None
    for nd in _walk(summand_node):
        if isinstance(nd, Pow) and isinstance(nd.base, Sym) and nd.base.name == var:
            expo = _exponent_poly(nd.exp, {})
            break
    if expo is None:
        raise ValueError(f"summand has no explicit power of {var}")
    best = None
    for name, lo, hi in ranges:
        if name in expo.vars:
            w = expo.coeff(name, 1)
            if not w.is_const() or w.const_value() <= 0:
                continue
            bound = (hi + 1) * int(w.const_value()) - 1
            best = bound if best is None else min(best, bound)
    if best is None:
        raise ValueError("could not determine an expansion order")
    return best


def _walk(node):
    yield node
    for attr in ("factors", "terms", "args"):
        if hasattr(node, attr):
            for ch in getattr(node, attr):
                yield from _walk(ch)
    for attr in ("num", "den", "base", "exp", "arg"):
        if hasattr(node, attr):
            yield from _walk(getattr(node, attr))


def data_from_summand(sum_text: str, var: str = "x", order: int | None = None) -> tuple[list, int]:
    """Expand a finite Sum(...) expression; returns (coefficients, order used)."""
    from .expr import Call, evaluate, parse, series_expand_tree, sum_ranges
    node = parse(sum_text)
    if order is None:
        if not (isinstance(node, Call) and node.name == "Sum"):
            raise ValueError("automatic expansion order needs a Sum(...) expression")
        ranges = [(v, int(evaluate(lo).as_poly().const_value()), int(evaluate(hi).as_poly().const_value()))
                  for v, lo, hi in sum_ranges(node, {})]
        order = complete_order(node.args[0], var, ranges)
    return series_expand_tree(node, var, order), order
