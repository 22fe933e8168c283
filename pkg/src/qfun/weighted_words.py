"""Recurrence systems for partitions with gap conditions (method of weighted words).

Parts are coloured integers (l_i)_k ordered as (l_1)_1 < ... < (l_m)_1 < (l_1)_2 < ...
A gap matrix M constrains consecutive parts: a part (l_i)_k may be followed by
(l_j)_k' only when k - k' >= M[i][j].  A diagonal 0 allows unlimited repetition
of a part, a diagonal -n allows runs of at most n equal parts.  g[l_i][k] is the
generating function of all lists whose first part is at most (l_i)_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .exact import ONE, ZERO, QPolynomial, QRationalFunction, rat, series_expand, sym
from .ore import CoupledSystem, OreOperator, format_rational_coefficient

REJECTION = ("Given difference conditions matrix either does not yield a finite order recurrence, "
             "or the difference conditions are inconsistent.")

LEVEL = "Qk"        # q^k


@dataclass(frozen=True)
class GapMatrix:
    entries: tuple
    letters: tuple

    def __post_init__(self):
        m = len(self.entries)
        if m == 0 or any(len(r) != m for r in self.entries):
            raise ValueError("gap matrix must be square and non-empty")
        if len(self.letters) != m:
            raise ValueError(f"need {m} letters, got {len(self.letters)}")
        if len(set(self.letters)) != m:
            raise ValueError("letters must be distinct")
        rows = tuple(tuple(int(v) for v in r) for r in self.entries)
        # a diagonal -1 (runs of length one) is the same as a gap of 1
        rows = tuple(tuple(1 if (i == j and v == -1) else v for j, v in enumerate(r))
                     for i, r in enumerate(rows))
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "letters", tuple(self.letters))

    @classmethod
    def of(cls, rows, letters=None) -> "GapMatrix":
        rows = [list(r) for r in rows]
        if letters is None:
            letters = [chr(ord("a") + i) for i in range(len(rows))]
        return cls(tuple(tuple(r) for r in rows), tuple(letters))

    @property
    def size(self) -> int:
        return len(self.entries)

    def run_limit(self, i: int) -> int | None:
        """Maximal run of equal parts for letter i: 1, n, or None for unlimited."""
        d = self.entries[i][i]
        if d >= 1:
            return 1
        return None if d == 0 else -d

    def permuted(self, perm: Sequence[int]) -> "GapMatrix":
        rows = tuple(tuple(self.entries[perm[i]][perm[j]] for j in range(self.size)) for i in range(self.size))
        return GapMatrix(rows, tuple(self.letters[p] for p in perm))


@dataclass(frozen=True)
class Ref:
    """g[letter index][k - back]."""
    letter: int
    back: int


@dataclass
class WWEquation:
    letter: int
    predecessor: Ref
    factor: QRationalFunction           # in the weight symbols, q and Qk
    target: Ref


@dataclass
class WWSystem:
    matrix: GapMatrix
    equations: list = field(default_factory=list)
    valid_from: int = 1
    warning: str = ""

    def __bool__(self):
        return bool(self.equations)

    def unknown(self, i: int) -> str:
        return f"g[{self.matrix.letters[i]}]"

    def unknowns(self) -> list[str]:
        return [self.unknown(i) for i in range(self.matrix.size)]

    def coupled(self) -> CoupledSystem:
        """Rows g_i(k) - g_pred - factor * g_target = 0 as operators in Qk."""
        rows = []
        for eq in self.equations:
            row: dict[str, dict[int, QRationalFunction]] = {}

            def add(ref: Ref, c):
                d = row.setdefault(self.unknown(ref.letter), {})
                d[-ref.back] = d.get(-ref.back, rat(0)) + rat(c)

            add(Ref(eq.letter, 0), 1)
            add(eq.predecessor, -1)
            add(eq.target, -eq.factor)
            rows.append({u: OreOperator({s: c for s, c in d.items() if c}, LEVEL, 1) for u, d in row.items()})
        return CoupledSystem(rows, self.unknowns())

    def ref_text(self, ref: Ref) -> str:
        k = "k" if ref.back == 0 else f"k-{ref.back}"
        return f"{self.unknown(ref.letter)}[{k}]"

    def to_text(self) -> str:
        if not self:
            return self.warning
        lines = []
        for eq in self.equations:
            f = format_rational_coefficient(eq.factor, LEVEL, "k")
            lines.append(f"{self.ref_text(Ref(eq.letter, 0))} = {self.ref_text(eq.predecessor)}"
                         f" + {_paren(f)}*{self.ref_text(eq.target)}")
        return "\n".join(lines)

    def cleared(self) -> list[dict[str, OreOperator]]:
        """Rows with the repetition denominators multiplied out (polynomial coefficients)."""
        return [{u: op for u, op in _clear_row(r).items()} for r in self.coupled().rows]


def _paren(s: str) -> str:
    return s if all(ch not in s for ch in "+- ") or s.startswith("(") and s.endswith(")") else f"({s})"


def _clear_row(row):
    from .ore import clear_denominators
    keys = [(u, i) for u, op in row.items() for i in op.coeffs]
    nums = clear_denominators([row[u].coeffs[i] for u, i in keys])
    out: dict[str, dict[int, object]] = {}
    for (u, i), p in zip(keys, nums):
        out.setdefault(u, {})[i] = p
    return {u: OreOperator(d, row[u].var, row[u].stride) for u, d in out.items()}


# -- generation rule ------------------------------------------------------------

def _offsets(M: GapMatrix, i: int) -> list[int]:
    """c_j with threshold level t_j = k - c_j for the part after (l_i)_k."""
    out = []
    for j, v in enumerate(M.entries[i]):
        if j == i and v <= 0:
            out.append(0)
        else:
            out.append(v)
    return out


def _max_ref(offsets: dict[int, int]) -> tuple[int, int]:
    """Largest (l_j)_{k-c_j} in the total order: (letter, back)."""
    return max(offsets.items(), key=lambda jc: (-jc[1], jc[0]))


def _realizes(offsets: dict[int, int], p: int, back: int) -> bool:
    """The down-set of (l_p)_{k-back} holds exactly the parts (l_j)_{<= k-c_j}."""
    for j, c in offsets.items():
        want = back if j <= p else back + 1
        if c != want:
            return False
    return True


def generate_recurrences(M: GapMatrix) -> WWSystem:
    """The recurrence system of a gap matrix, or an empty system carrying the rejection message."""
    m = M.size
    Qk = rat(QPolynomial.var(LEVEL))
    eqs = []
    for i in range(m):
        c = _offsets(M, i)
        if any(v < 0 for j, v in enumerate(c) if j != i):
            return WWSystem(M, [], 0, REJECTION)       # a later part could exceed the first
        w = rat(sym(M.letters[i])) * Qk
        allv = dict(enumerate(c))
        p, back = _max_ref(allv)
        if (p, back) != (i, 0):
            if M.entries[i][i] < 0:
                return WWSystem(M, [], 0, REJECTION)   # bounded runs reachable through a larger letter
            if not _realizes(allv, p, back):
                return WWSystem(M, [], 0, REJECTION)
            factor, target = w, Ref(p, back)
        else:
            rest = {j: v for j, v in allv.items() if j != i}
            if rest:
                p2, back2 = _max_ref(rest)
            else:
                p2, back2 = i, 1
            # after the run of (l_i)_k: other letters by threshold, the own letter below level k
            need = dict(rest)
            need[i] = 1
            if not _realizes(need, p2, back2):
                return WWSystem(M, [], 0, REJECTION)
            n = M.run_limit(i)
            if n is None:
                factor = w / (1 - w)
            else:
                factor = rat(0)
                for r in range(1, n + 1):
                    factor = factor + w ** r
                if n > 1:
                    factor = w * (1 - w ** n) / (1 - w)
            target = Ref(p2, back2)
        pred = Ref(i - 1, 0) if i > 0 else Ref(m - 1, 1)
        eqs.append(WWEquation(i, pred, factor, target))
    pos = [v for r in M.entries for v in r if v > 0]
    return WWSystem(M, eqs, 1 + max(pos, default=0))


def accepts(M: GapMatrix) -> bool:
    return bool(generate_recurrences(M))


# -- enumeration oracle -----------------------------------------------------------

def _allowed(M: GapMatrix, prev: tuple[int, int], run: int, nxt: tuple[int, int]) -> bool:
    i, k = prev
    j, k2 = nxt
    if j != i:
        return k - k2 >= M.entries[i][j]
    d = M.entries[i][i]
    if d >= 1:
        return k - k2 >= d
    if k2 < k:
        return True
    if k2 > k:
        return False
    return d == 0 or run < -d


def enumerate_weighted_partitions(M: GapMatrix, max_level: int, max_q_degree: int) -> dict:
    """{(letter, k): QPolynomial} for 1 <= k <= max_level: all lists with first part at
    most (letter)_k, truncated at q-degree max_q_degree."""
    m = M.size
    D = max_q_degree

    @lru_cache(maxsize=None)
    def tails(i: int, k: int, run: int, budget: int) -> tuple:
        # lists that may follow (l_i)_k (seen ``run`` times in a row)
        acc: dict = {(0,) + (0,) * m: 1}
        for j in range(m):
            for k2 in range(1, budget + 1):
                if not _allowed(M, (i, k), run, (j, k2)):
                    continue
                r2 = run + 1 if (j, k2) == (i, k) else 1
                for key, cnt in tails(j, k2, r2, budget - k2):
                    nk = list(key)
                    nk[0] += k2
                    nk[1 + j] += 1
                    nk = tuple(nk)
                    acc[nk] = acc.get(nk, 0) + cnt
        return tuple(sorted(acc.items()))

    def below(X: tuple[int, int]) -> QPolynomial:
        p, K = X
        acc: dict = {(0,) * (m + 1): 1}
        for j in range(m):
            for k2 in range(1, D + 1):
                if (k2, j) > (K, p):
                    continue
                for key, cnt in tails(j, k2, 1, D - k2):
                    nk = list(key)
                    nk[0] += k2
                    nk[1 + j] += 1
                    nk = tuple(nk)
                    acc[nk] = acc.get(nk, 0) + cnt
        return _to_poly(acc, M.letters)

    return {(M.letters[i], k): below((i, k)) for k in range(1, max_level + 1) for i in range(m)}


def _to_poly(acc: dict, letters) -> QPolynomial:
    out = ZERO
    for key, cnt in acc.items():
        mono = {"q": key[0]}
        mono.update({letters[j]: e for j, e in enumerate(key[1:]) if e})
        out = out + QPolynomial.monomial(cnt, mono)
    return out


def truncate_q(f, order: int) -> QPolynomial:
    """Expansion of a rational function (denominator with nonzero constant term in q)
    through q^order."""
    f = rat(f)
    if f.is_poly():
        p = f.as_poly()
        return QPolynomial._raw(p.vars, {e: c for e, c in p.terms.items()
                                         if _qdeg(p.vars, e) <= order}) if p.terms else p
    coeffs = series_expand(f, "q", order)
    out = ZERO
    for d, c in enumerate(coeffs):
        if c:
            out = out + rat(c).as_poly() * QPolynomial.var("q", d)
    return out


def _qdeg(vars, e) -> int:
    return e[vars.index("q")] if "q" in vars else 0


# -- unrolling against the oracle -------------------------------------------------

def unroll_system(system: WWSystem, initial: dict, upto: int) -> dict:
    """Values g[l][k] for 1 <= k <= upto; levels <= 0 are 1, ``initial`` maps
    (letter, k) -> value for the levels below valid_from."""
    cs = system.coupled()
    letters = system.matrix.letters
    depth = 1 + max(max(eq.target.back, eq.predecessor.back) for eq in system.equations)
    start = 1 - depth
    init = {}
    for i, l in enumerate(letters):
        vals = [ONE] * depth
        for k in range(1, system.valid_from):
            vals.append(initial[(l, k)])
        init[system.unknown(i)] = vals
    out = cs.unroll(init, start, upto - start + 1)
    return {(l, k): out[system.unknown(i)][k - start] for i, l in enumerate(letters) for k in range(1, upto + 1)}


def oracle_agrees(M: GapMatrix, max_level: int = 6, max_q_degree: int = 12) -> bool:
    """Unrolled recurrences match exhaustive enumeration through q^max_q_degree."""
    system = generate_recurrences(M)
    if not system:
        raise ValueError(system.warning)
    enum = enumerate_weighted_partitions(M, max_level, max_q_degree)
    vals = unroll_system(system, enum, max_level)
    return all(truncate_q(vals[key], max_q_degree) == enum[key] for key in enum)


# -- the Schur pipeline ----------------------------------------------------------

SCHUR = GapMatrix.of([[1, 2, 2], [1, 1, 2], [1, 1, 2]], ["a", "b", "c"])


@dataclass
class SchurReport:
    uncoupled: dict
    values: list                    # (k, g_c(k+1) at c=abq, factored text of the right side)
    holds: bool


def schur_pipeline(kmax: int = 4) -> SchurReport:
    """Check g_c(k+1)(a, b, abq) = (1+aq)(1+bq) g_b(k)(aq, bq, abq^3) for 0 <= k <= kmax."""
    system = generate_recurrences(SCHUR)
    unc = system.coupled().uncouple()
    a, b, q = sym("a"), sym("b"), sym("q")
    # every diagonal entry is positive, so lists below a fixed part are finite and a
    # generous degree bound makes the enumerated initial values exact
    init = enumerate_weighted_partitions(SCHUR, system.valid_from - 1, 4 * system.valid_from ** 2)
    vals = unroll_system(system, init, kmax + 1)
    rows = []
    ok = True
    for k in range(0, kmax + 1):
        left = vals[("c", k + 1)].subs("c", a * b * q)
        gb = rat(1) if k == 0 else vals[("b", k)]
        right = rat((1 + a * q) * (1 + b * q)) * gb.subs_many({"a": a * q, "b": b * q, "c": a * b * q ** 3})
        ok = ok and left == right
        rows.append((k, left, right))
    return SchurReport(unc, rows, ok)
