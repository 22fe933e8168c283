"""Fit a list of q-polynomials as a fixed combination of q-binomials or q-trinomials.

A fit is sum_j c_j(q) * Family(top(n), center(n) + j) with offsets j >= 0 and
coefficients that do not depend on n.  Coefficients are determined index by index:
each data index may bring in at most one basis element that was zero before, whose
coefficient is then forced; every other index is a pure consistency check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .exact import ZERO, QPolynomial, format_poly, poly, poly_divide_exact
from .qobjects import q_binomial, round_trinomial, trinomial_T, trinomial_U, trinomial_V, trinomial_t

FAMILIES = ("qBinomial", "qTrinomial", "qTnTrinomial", "qtnTrinomial", "qUnTrinomial", "qVnTrinomial")
TOPS = ((1, 0), (1, 1), (2, 0), (2, 1), (2, 2))
NO_FIT = "no representation found in the tried families and argument forms"

_T_KINDS = {"qTnTrinomial": trinomial_T, "qtnTrinomial": trinomial_t,
            "qUnTrinomial": trinomial_U, "qVnTrinomial": trinomial_V}


@dataclass(frozen=True)
class Affine:
    """slope * n + offset."""
    slope: int
    offset: int

    def __call__(self, n: int) -> int:
        return self.slope * n + self.offset

    def shifted(self, j: int) -> "Affine":
        return Affine(self.slope, self.offset + j)

    def to_text(self, var: str = "n") -> str:
        if self.slope == 0:
            return str(self.offset)
        lead = var if self.slope == 1 else f"{self.slope}*{var}"
        if self.offset == 0:
            return lead
        return f"{lead} {'+' if self.offset > 0 else '-'} {abs(self.offset)}"

    def __str__(self):
        return self.to_text()


def _dilate(p: QPolynomial, base: int) -> QPolynomial:
    if base == 1 or p.is_const():
        return p
    return p.subs("q", QPolynomial.var("q", base))


def family_element(family: str, top: int, center: Sequence[int], base: int = 1) -> QPolynomial:
    """One basis element; ``center`` is (bottom,) for binomials, (b, a) for the round
    trinomial and (index, a) for the T/t/U/V trinomials."""
    if family == "qBinomial":
        return q_binomial(top, center[-1], base)
    if top < 0:
        return ZERO
    if family == "qTrinomial":
        p = round_trinomial(top, center[0], center[1])
    elif family in _T_KINDS:
        p = _T_KINDS[family](center[0], top, center[1])
    else:
        raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    return _dilate(p, base)


@dataclass(frozen=True)
class FitResult:
    family: str
    top: Affine
    center: tuple                      # Affine per center argument; offsets shift the last one
    coefficients: tuple                # ((offset, QPolynomial), ...) with non-zero coefficients
    subsequence: tuple | None = None
    base: int = 1
    index_var: str = "n"

    def element(self, n: int, j: int) -> QPolynomial:
        args = [c(n) for c in self.center]
        args[-1] += j
        return family_element(self.family, self.top(n), args, self.base)

    def evaluate(self, n: int) -> QPolynomial:
        return evaluate_fit(self, n)

    def monomial_count(self) -> int:
        return sum(c.nterms() for _, c in self.coefficients)

    def to_text(self) -> str:
        v = self.index_var
        base = "q" if self.base == 1 else f"q^{self.base}"
        parts = []
        for j, c in self.coefficients:
            args = [self.top.to_text(v)] + [a.to_text(v) for a in self.center[:-1]]
            args.append(self.center[-1].shifted(j).to_text(v))
            call = f"{self.family}[{', '.join(args)}, {base}]"
            text = format_poly(c)
            if text == "1":
                parts.append(("+", call))
            elif text == "-1":
                parts.append(("-", call))
            elif c.nterms() == 1:
                neg = text.startswith("-")
                parts.append(("-" if neg else "+", f"{text.lstrip('-')}*{call}"))
            else:
                parts.append(("+", f"({text})*{call}"))
        if not parts:
            return "0"
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.to_text()


def evaluate_fit(fit: FitResult, n: int) -> QPolynomial:
    total = ZERO
    for j, c in fit.coefficients:
        total = total + c * fit.element(n, j)
    return total


# -- candidate argument forms ------------------------------------------------------

def _middle(top: Affine) -> Affine:
    # balanced middle of [top, .]: n for 2n, n+1 for 2n+1 and 2n+2; bottom 0 for tops n + b
    if top.slope == 2:
        return Affine(1, (top.offset + 1) // 2)
    return Affine(0, 0)


def candidates(family: str) -> list[tuple[Affine, tuple]]:
    out = []
    for slope, offset in TOPS:
        top = Affine(slope, offset)
        mid = _middle(top)
        if family == "qBinomial":
            out.append((top, (mid,)))
        elif family == "qTrinomial":
            out.append((top, (mid, mid)))
        else:
            for index in (0, 1):
                out.append((top, (Affine(0, index), mid)))
    return out


def _fit_one(data: Sequence[QPolynomial], family: str, top: Affine, center: tuple,
             base: int) -> dict | None:
    coeffs: dict[int, QPolynomial] = {}
    probe = FitResult(family, top, center, (), None, base)
    for n, d in enumerate(data):
        span = range(0, max(top(n), 0) + 2)
        elems = {j: probe.element(n, j) for j in span}
        residual = d - sum((c * elems[j] for j, c in coeffs.items() if j in elems), ZERO)
        # an already-fixed offset beyond the span must vanish here as well
        new = [j for j in span if j not in coeffs and elems[j]]
        if len(new) > 1:
            return None
        if not new:
            if residual:
                return None
            continue
        j = new[0]
        try:
            coeffs[j] = poly_divide_exact(residual, elems[j]) if residual else ZERO
        except ValueError:
            return None
    return coeffs


def _select(data, subsequence):
    if subsequence is None:
        return list(data)
    m, r = subsequence
    if m < 1 or not 0 <= r < m:
        raise ValueError("subsequence must be (m, r) with m >= 1 and 0 <= r < m")
    return [data[i] for i in range(r, len(data), m)]


def fit_q_representation(data: Sequence, index_var: str = "n", base: int = 1,
                         subsequence: tuple | None = None,
                         try_to_fit: Iterable[str] | str = "All",
                         return_all: bool = False) -> list[FitResult]:
    """Exhaustive search over families and candidate argument forms.

    Within a family the fit with the fewest coefficient monomials wins, ties going to
    the larger top argument; the search stops at the first family that fits unless
    ``return_all`` is set, in which case every successful candidate is returned.
    """
    values = [poly(v) for v in data]
    chosen = _select(values, subsequence)
    if len(chosen) < 4:
        raise ValueError("at least 4 data values are required after subsequence selection")
    families = FAMILIES if try_to_fit == "All" else tuple(try_to_fit)
    unknown = [f for f in families if f not in FAMILIES]
    if unknown:
        raise ValueError(f"unknown families {unknown}; expected some of {', '.join(FAMILIES)}")
    families = [f for f in FAMILIES if f in families]
    results = []
    for family in families:
        found = []
        for top, center in candidates(family):
            coeffs = _fit_one(chosen, family, top, center, base)
            if coeffs is None:
                continue
            fit = FitResult(family, top, center,
                            tuple((j, c) for j, c in sorted(coeffs.items()) if c),
                            tuple(subsequence) if subsequence else None, base, index_var)
            for n, d in enumerate(chosen):
                assert evaluate_fit(fit, n) == d, "fit does not reproduce its data"
            found.append(fit)
        found.sort(key=lambda f: (f.monomial_count(), -f.top.slope, -f.top.offset))
        if found and not return_all:
            return [found[0]]
        results.extend(found)
    return results


# -- bilateral descriptions ----------------------------------------------------------

@dataclass(frozen=True)
class ResidueClass:
    """Terms sign * alt^k * q^(A k^2 + B k + C) at positions modulus*k + residue."""
    residue: int
    sign: int
    alternating: bool
    exponent: tuple                    # (A, B, C) as Fractions

    def value(self, k: int) -> tuple[int, Fraction]:
        A, B, C = self.exponent
        s = self.sign * ((-1) ** k if self.alternating else 1)
        return s, A * k * k + B * k + C


@dataclass(frozen=True)
class BilateralForm:
    fit: FitResult
    modulus: int
    classes: tuple
    bilateral: bool                    # sum over all integers k (mirror symmetric basis)

    def evaluate(self, n: int) -> QPolynomial:
        """The described sum at index n, including terms past the fitted offsets."""
        fit = self.fit
        if not self.modulus:
            (cl,) = self.classes
            s, e = cl.value(0)
            return fit.element(n, cl.residue) * QPolynomial.monomial(s, {"q": int(e)})
        total = ZERO
        reach = abs(fit.top(n)) + abs(fit.center[-1](n)) + 2
        for cl in self.classes:
            lo = -reach if self.bilateral else 0
            for k in range(lo, reach + 1):
                elem = fit.element(n, self.modulus * k + cl.residue)
                if elem:
                    s, e = cl.value(k)
                    if e.denominator != 1:
                        raise ValueError("exponent pattern is not integral")
                    total = total + elem * QPolynomial.monomial(s, {"q": int(e)})
        return total

    def to_text(self) -> str:
        v = self.fit.index_var
        out = []
        for cl in self.classes:
            A, B, C = cl.exponent
            expo = _quad_text(A, B, C)
            sign = "(-1)^k*" if cl.alternating else ""
            lead = "-" if cl.sign < 0 else ""
            pos = self.fit.center[-1].shifted(cl.residue)
            if self.modulus:
                arg = f"{pos.to_text(v)} + {self.modulus}*k" if self.modulus != 1 else f"{pos.to_text(v)} + k"
            else:
                arg = pos.to_text(v)
            args = [self.fit.top.to_text(v)] + [a.to_text(v) for a in self.fit.center[:-1]] + [arg]
            rng = "k in Z" if self.bilateral else "k >= 0"
            q = f"q^({expo})*" if expo != "0" else ""
            body = f"{lead}{sign}{q}{self.fit.family}[{', '.join(args)}]"
            out.append(body if not self.modulus else f"sum_({rng}) {body}")
        return " + ".join(out)

    def __str__(self):
        return self.to_text()


def _quad_text(A, B, C) -> str:
    parts = []
    for coef, mono in ((A, "k^2"), (B, "k"), (C, "")):
        if coef == 0:
            continue
        c = str(coef) if mono == "" or abs(coef) != 1 else ("-" if coef < 0 else "")
        if mono and c not in ("", "-"):
            c += "*"
        parts.append(f"{c}{mono}")
    text = " + ".join(parts).replace("+ -", "- ")
    return text or "0"


def _mirror_shift(fit: FitResult) -> int | None:
    """Offset j and shift - j name the same basis element, or None without that symmetry."""
    if fit.family != "qBinomial" or fit.top.slope != 2:
        return None
    return fit.top.offset - 2 * fit.center[-1].offset


def _monomials(p: QPolynomial) -> set | None:
    out = set()
    for e, c in p.terms.items():
        if c not in (1, -1) or (p.vars and p.vars != ("q",)):
            return None
        out.add((int(c), Fraction(e[0]) if p.vars else Fraction(0)))
    return out


def _fit_quadratic(points):
    """Exact quadratic through three (k, value) points, or None."""
    (k0, v0), (k1, v1), (k2, v2) = points
    den = (k0 - k1) * (k0 - k2) * (k1 - k2)
    if den == 0:
        return None
    A = Fraction(k2 * (v1 - v0) + k1 * (v0 - v2) + k0 * (v2 - v1), den)
    B = Fraction(k2 * k2 * (v0 - v1) + k1 * k1 * (v2 - v0) + k0 * k0 * (v1 - v2), den)
    C = Fraction(k1 * k2 * (k1 - k2) * v0 + k2 * k0 * (k2 - k0) * v1 + k0 * k1 * (k0 - k1) * v2, den)
    return A, B, C


def fit_to_bilateral_form(fit: FitResult, max_modulus: int = 6) -> BilateralForm | None:
    """Group the signed-monomial coefficients into residue classes with quadratic exponents."""
    mons = {j: _monomials(c) for j, c in fit.coefficients}
    if any(m is None for m in mons.values()):
        return None
    if len(fit.coefficients) == 1:
        j, _ = fit.coefficients[0]
        if len(mons[j]) != 1:
            return None
        (s, e), = mons[j]
        return BilateralForm(fit, 0, (ResidueClass(j, s, False, (Fraction(0), Fraction(0), e)),), False)
    top_offset = max(j for j, _ in fit.coefficients)
    shift = _mirror_shift(fit)
    span = range(0, top_offset + 1)
    # positions: every offset, plus its mirror image when the basis is symmetric
    owner = {}
    for j in span:
        owner[j] = j
        if shift is not None:
            owner[shift - j] = j
    positions = sorted(owner)
    for modulus in range(1, max_modulus + 1):
        per_class = []
        for r in range(modulus):
            ks = sorted({(p - r) // modulus for p in positions if (p - r) % modulus == 0}, key=lambda k: (abs(k), k))
            opts = [None]
            if len(ks) >= 3:
                opts += _class_options(r, modulus, ks, owner, mons)
            per_class.append(opts)
        found = []
        for combo in product(*per_class):
            if not any(combo):
                continue
            used = {j: [] for j in span}
            for cl in combo:
                if cl is None:
                    continue
                for p in positions:
                    if (p - cl.residue) % modulus == 0:
                        used[owner[p]].append(cl.value((p - cl.residue) // modulus))
            if all(sorted(used[j]) == sorted(mons.get(j, set())) for j in span):
                classes = tuple(c for c in combo if c)
                found.append(((tuple(c.residue for c in classes), sum(c.sign < 0 for c in classes)), classes))
        if found:
            found.sort(key=lambda t: t[0])
            return BilateralForm(fit, modulus, found[0][1], shift is not None)
    return None


def _class_options(r, modulus, ks, owner, mons) -> list:
    picks = []
    for k in ks[:3]:
        j = owner[modulus * k + r]
        picks.append(sorted(mons.get(j, set())))
    out = []
    for choice in product(*picks):
        signs = [s for s, _ in choice]
        for alternating in (False, True):
            base_sign = signs[0] * ((-1) ** ks[0] if alternating else 1)
            if any(s != base_sign * ((-1) ** k if alternating else 1) for s, k in zip(signs, ks[:3])):
                continue
            quad = _fit_quadratic([(k, e) for k, (_, e) in zip(ks[:3], choice)])
            if quad is None:
                continue
            cl = ResidueClass(r, base_sign, alternating, quad)
            if all(cl.value(k) in mons.get(owner[modulus * k + r], set()) for k in ks):
                out.append(cl)
    return out
