"""Cylindric partitions: profiles, functional equations for G_C(z) = (zq;q)_inf F_C(z),
their coefficient recurrences, and an exhaustive enumerator used as oracle."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from gmpy2 import mpq

from .exact import ONE, ZERO, QPolynomial, QRationalFunction, rat, sym
from .exact import format_poly
from .ore import CoupledSystem, OreOperator

Z = "z"


# -- profiles -------------------------------------------------------------------

def canonical(profile: Sequence[int]) -> tuple:
    """Lexicographically greatest cyclic rotation."""
    c = tuple(int(v) for v in profile)
    if not c or any(v < 0 for v in c):
        raise ValueError("profile must be non-empty with non-negative entries")
    return max(c[i:] + c[:i] for i in range(len(c)))


def profiles_of(k: int, size: int) -> list[tuple]:
    """Canonical profiles of length k and the given size, in increasing lexicographic order."""
    if k < 1 or size < 0:
        raise ValueError("need k >= 1 and size >= 0")
    found = set()

    def rec(prefix, left, slots):
        if slots == 1:
            found.add(canonical(prefix + (left,)))
            return
        for v in range(left + 1):
            rec(prefix + (v,), left - v, slots - 1)

    rec((), size, k)
    return sorted(found)


def profile_name(c: Sequence[int], head: str = "G") -> str:
    return f"{head}[{{{','.join(map(str, c))}}}]"


# -- functional equations ----------------------------------------------------------

@dataclass
class FunctionalEquation:
    """sum over (profile, m) of coefficient(z) * G_profile(q^m z) = 0."""
    profile: tuple
    terms: dict                      # {(profile, m): QPolynomial in q, z}

    def to_text(self) -> str:
        parts = []
        for (c, m) in sorted(self.terms, key=lambda t: (t[0], t[1])):
            arg = Z if m == 0 else f"{format_poly(QPolynomial.var('q', m))}*{Z}"
            parts.append((f"{profile_name(c)}({arg})", rat(self.terms[(c, m)])))
        return "".join(_term(name, coeff, i == 0) for i, (name, coeff) in enumerate(parts))

    def __str__(self):
        return self.to_text()


def _term(name: str, coeff: QRationalFunction, first: bool) -> str:
    p = coeff.as_poly()
    neg = p.nterms() == 1 and p.leading_coeff() < 0
    if neg:
        p = -p
    text = format_poly(p)
    if text == "1":
        body = name
    elif p.nterms() > 1:
        body = f"({text})*{name}"
    else:
        body = f"{text}*{name}"
    if first:
        return ("-" if neg else "") + body
    return (" - " if neg else " + ") + body


def functional_equation(profile: Sequence[int]) -> FunctionalEquation:
    """G_C(z) - sum_{J} (-1)^(|J|-1) (zq;q)_(|J|-1) G_{C(J)}(z q^|J|) over nonempty J within
    the non-zero positions of C, where C(J) moves one unit from each j in J to position j+1.

    The all-zero profile has no such J and is rejected.
    """
    c = canonical(profile)
    k = len(c)
    support = [i for i in range(k) if c[i] > 0]
    if not support:
        raise ValueError("the all-zero profile has no functional equation of this shape")
    terms: dict = {(c, 0): ONE}
    factor = ONE                                  # (zq;q)_(r-1)
    for r in range(1, len(support) + 1):
        if r > 1:
            factor = factor * (ONE - QPolynomial.monomial(1, {"q": r - 1, Z: 1}))
        for J in combinations(support, r):
            Js = set(J)
            new = tuple(c[j] - (j in Js) + (((j - 1) % k) in Js) for j in range(k))
            key = (canonical(new), r)
            terms[key] = terms.get(key, ZERO) + factor * (-1) ** r      # moved to the left side
    return FunctionalEquation(c, {t: p for t, p in terms.items() if p})


def functional_equation_system(k: int, size: int, trusted_only: bool = False) -> list[FunctionalEquation]:
    if trusted_only and (k, size) not in VALIDATED:
        raise ValueError(f"the functional-equation template has not been validated for profiles of "
                         f"length {k} and size {size}; run the enumeration check first")
    return [functional_equation(c) for c in profiles_of(k, size)]


VALIDATED: set = set()


# -- coefficient recurrences --------------------------------------------------------

def coefficient_recurrences(system: Sequence[FunctionalEquation], index_var: str = "Qn") -> CoupledSystem:
    """z^n coefficient of each equation: p z^j G(q^m z) gives p q^(m(n-j)) g(n-j)."""
    rows = []
    unknowns = []
    for eq in system:
        row: dict[str, dict[int, QRationalFunction]] = {}
        for (c, m), p in eq.terms.items():
            name = profile_name(c, "g")
            if name not in unknowns:
                unknowns.append(name)
            for j, pj in p.coeffs_in(Z).items():
                coeff = rat(pj) * rat(QPolynomial.monomial(1, {"q": -m * j, index_var: m}))
                d = row.setdefault(name, {})
                d[-j] = d.get(-j, rat(0)) + coeff
        rows.append({u: OreOperator({s: v for s, v in d.items() if v}, index_var, 1) for u, d in row.items()})
    order = sorted(unknowns)
    return CoupledSystem(rows, order)


def system_text(cs: CoupledSystem) -> str:
    from .ore import format_operator
    lines = []
    for r in cs.rows:
        parts = [format_operator(op, u, "n") for u, op in sorted(r.items()) if op]
        lines.append(" + ".join(parts).replace("+ -", "- "))
    return "\n".join(lines)


# -- enumeration oracle --------------------------------------------------------------

def _partitions_bounded(bounds: list, free_max: int, budget: int):
    """Weakly decreasing non-negative lists p with p[m] <= bounds(m), sum <= budget."""
    out = []

    def rec(prefix, cap, left):
        m = len(prefix)
        out.append(tuple(prefix))
        ub = min(cap, left, bounds(m))
        for v in range(ub, 0, -1):
            prefix.append(v)
            rec(prefix, v, left - v)
            prefix.pop()

    rec([], free_max, budget)
    return out


def enumerate_cylindric(profile: Sequence[int], max_part: int, max_size: int) -> dict:
    """{(size, largest part): count} over cylindric partitions of the profile with
    largest part <= max_part and size <= max_size."""
    c = tuple(int(v) for v in profile)
    k = len(c)
    counts: dict = {}

    def at(p, j):
        return p[j] if j < len(p) else 0

    def rows(i, acc, left):
        if i == k:
            last, first = acc[-1], acc[0]
            # wrap-around: pi^k_j >= pi^1_{j + c_1}
            for j in range(c[0], len(first)):
                if at(last, j - c[0]) < first[j]:
                    return
            size = sum(sum(p) for p in acc)
            big = max((p[0] for p in acc if p), default=0)
            counts[(size, big)] = counts.get((size, big), 0) + 1
            return
        if i == 0:
            cands = _partitions_bounded(lambda m: max_part, max_part, left)
        else:
            prev = acc[-1]
            shift = c[i]
            # pi^{i}_m <= pi^{i-1}_{m - c_i}
            cands = _partitions_bounded(
                lambda m, prev=prev, shift=shift: max_part if m < shift else at(prev, m - shift),
                max_part, left)
        for p in cands:
            rows(i + 1, acc + [p], left - sum(p))

    rows(0, [], max_size)
    return counts


def enumerated_F(profile, max_part: int, max_size: int) -> dict:
    """Truncated F_C(z, q) as {(z-power, q-power): count}."""
    return {(b, s): n for (s, b), n in enumerate_cylindric(profile, max_part, max_size).items()}


def times_zq_infinite(F: dict, qmax: int) -> dict:
    """(zq; q)_inf * F, truncated at q-degree qmax."""
    out = dict(F)
    for i in range(1, qmax + 1):            # multiply by (1 - z q^i)
        new = dict(out)
        for (zp, qp), v in out.items():
            if qp + i <= qmax:
                key = (zp + 1, qp + i)
                new[key] = new.get(key, 0) - v
        out = {kk: v for kk, v in new.items() if v}
    return out


def check_functional_equation(profile, qmax: int = 10, zmax: int = 5) -> bool:
    """Verify the generated equation on enumerated truncations of all profiles involved."""
    eq = functional_equation(profile)
    G = {}
    for (c, _m) in eq.terms:
        if c not in G:
            G[c] = times_zq_infinite(enumerated_F(c, qmax, qmax), qmax)
    # coefficient of z^n q^d of p(z,q) G(q^m z) is sum p_{j,e} g_{n-j, d-e-m(n-j)}
    for n in range(zmax + 1):
        for d in range(qmax + 1):
            total = mpq(0)
            for (c, m), p in eq.terms.items():
                for e, coeff in p.terms.items():
                    j = e[p.vars.index(Z)] if Z in p.vars else 0
                    qe = e[p.vars.index("q")] if "q" in p.vars else 0
                    nn = n - j
                    dd = d - qe - m * nn
                    if nn >= 0 and dd >= 0:
                        total += coeff * G[c].get((nn, dd), 0)
            if total:
                return False
    return True


def validate_templates(max_k: int = 3, max_size: int = 4, qmax: int = 10, zmax: int = 5) -> list:
    """Check every canonical profile with k <= max_k, |C| <= max_size; returns failures."""
    bad = []
    for k in range(1, max_k + 1):
        for s in range(1, max_size + 1):
            ok = all(check_functional_equation(c, qmax, zmax) for c in profiles_of(k, s))
            if ok:
                VALIDATED.add((k, s))
            else:
                bad.append((k, s))
    return bad


def F_at_one(profile, qmax: int) -> list:
    """Coefficients of F_C(1, q) through q^qmax (a part exceeds qmax only when the size does)."""
    out = [0] * (qmax + 1)
    for (s, _b), n in enumerate_cylindric(profile, qmax, qmax).items():
        out[s] += n
    return out
