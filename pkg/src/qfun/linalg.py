"""Exact linear algebra for the guesser and the coupled-system solvers.

Two nullspace routes are provided.  ``nullspace_exact`` is fraction-free Bareiss
elimination over Z.  ``nullspace_modular`` row-reduces modulo several word-size
primes with numpy, lifts the reduced echelon basis by CRT and rational
reconstruction, and accepts it only after an exact check against every row.
"""

from __future__ import annotations

from math import gcd as igcd, isqrt
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpq, mpz

from .exact import RONE, RZERO, rat

# primes below 2**31 so that products of residues fit in int64
_PRIMES = [2147483647, 2147483629, 2147483587, 2147483579, 2147483563, 2147483549,
           2147483543, 2147483497, 2147483489, 2147483477, 2147483423, 2147483399,
           2147483353, 2147483323, 2147483269, 2147483249, 2147483237, 2147483179,
           2147483171, 2147483137, 2147483123, 2147483077, 2147483069, 2147483059]


def _more_primes(start: int, count: int) -> list[int]:
    out = []
    p = start
    while len(out) < count:
        p = int(gmpy2.prev_prime(p)) if hasattr(gmpy2, "prev_prime") else _prev_prime(p)
        out.append(p)
    return out


def _prev_prime(n: int) -> int:
    n -= 1
    while not gmpy2.is_prime(n):
        n -= 1
    return n


def integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    """Scale each rational row to coprime integers."""
    out = []
    for r in rows:
        den = 1
        for c in r:
            c = mpq(c)
            d = int(c.denominator)
            den = den // igcd(den, d) * d
        ints = [int(mpq(c) * den) for c in r]
        g = 0
        for v in ints:
            g = igcd(g, v)
        if g > 1:
            ints = [v // g for v in ints]
        out.append(ints)
    return out


# -- fraction-free route ------------------------------------------------------

def nullspace_exact(rows: Sequence[Sequence], ncols: int) -> list[list[mpq]]:
    """Nullspace basis via Bareiss elimination, in reduced echelon normal form.

    Basis vector j has a 1 in the j-th free column and 0 in the other free columns.
    """
    M = [[mpz(v) for v in r] for r in integer_rows(rows) if any(r)]
    pivots: list[int] = []
    nrows = len(M)
    r = 0
    prev = mpz(1)
    for c in range(ncols):
        if r >= nrows:
            break
        piv = None
        best = None
        for i in range(r, nrows):
            if M[i][c]:
                size = sum(1 for v in M[i] if v)
                if best is None or size < best:
                    piv, best = i, size
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pr = M[r]
        a = pr[c]
        for i in range(r + 1, nrows):
            row = M[i]
            b = row[c]
            if b:
                M[i] = [(a * row[k] - b * pr[k]) // prev for k in range(ncols)]
            elif a != prev:
                M[i] = [(a * v) // prev for v in row]
        prev = a
        pivots.append(c)
        r += 1
    rank = len(pivots)
    # back substitution to reduced echelon form over Q
    R = [[mpq(v) for v in M[i]] for i in range(rank)]
    for i in range(rank - 1, -1, -1):
        c = pivots[i]
        inv = 1 / R[i][c]
        R[i] = [v * inv for v in R[i]]
        for j in range(i):
            f = R[j][c]
            if f:
                R[j] = [x - f * y for x, y in zip(R[j], R[i])]
    return _basis_from_rref(R, pivots, ncols)


def _basis_from_rref(R, pivots, ncols) -> list[list[mpq]]:
    pset = set(pivots)
    free = [c for c in range(ncols) if c not in pset]
    basis = []
    for f in free:
        v = [mpq(0)] * ncols
        v[f] = mpq(1)
        for i, c in enumerate(pivots):
            v[c] = -R[i][f]
        basis.append(v)
    return basis


def rank_exact(rows: Sequence[Sequence], ncols: int) -> int:
    return ncols - len(nullspace_exact(rows, ncols))


# -- modular route ------------------------------------------------------------

def rref_mod_p(A: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of an int64 matrix modulo prime p."""
    M = A % p
    nrows, ncols = M.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            M[[r, i]] = M[[i, r]]
        inv = pow(int(M[r, c]), p - 2, p)
        M[r] = (M[r] * inv) % p
        col = M[:, c].copy()
        col[r] = 0
        idx = np.nonzero(col)[0]
        if idx.size:
            M[idx] = (M[idx] - (col[idx, None] * M[r][None, :]) % p) % p
        pivots.append(c)
        r += 1
    return M[:r], pivots


def _compress(A: np.ndarray, ncols: int, p: int) -> np.ndarray:
    """Replace a tall system by random combinations of its rows modulo p.

    The row space is preserved with overwhelming probability; a loss only shows up
    as a smaller rank, which the caller treats like an unlucky prime, and every
    lifted basis is checked against the original rows anyway.
    """
    nrows = A.shape[0]
    m = ncols + 16
    if nrows <= 2 * m:
        return A
    rng = np.random.default_rng(p)
    out = np.zeros((m, A.shape[1]), dtype=np.int64)
    chunk = 1 << 14                     # keeps int64 sums below 2^31 * 2^8 * 2^14
    for s in range(0, nrows, chunk):
        blk = A[s:s + chunk]
        R = rng.integers(0, 256, size=(m, blk.shape[0]), dtype=np.int64)
        out = (out + (R @ blk) % p) % p
    return out


def rational_reconstruct(a: int, m: int) -> mpq | None:
    """Find n/d = a mod m with |n|, d <= sqrt(m/2), or None."""
    a %= m
    bound = isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        qq = r0 // r1
        r0, r1 = r1, r0 - qq * r1
        s0, s1 = s1, s0 - qq * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    if igcd(r1, abs(s1)) != 1:
        return None
    return mpq(r1, s1)


def _check(rows_int: list[list[int]], basis: list[list[mpq]]) -> bool:
    for v in basis:
        den = 1
        for c in v:
            d = int(c.denominator)
            den = den // igcd(den, d) * d
        iv = [int(c * den) for c in v]
        nz = [(k, x) for k, x in enumerate(iv) if x]
        for r in rows_int:
            if sum(r[k] * x for k, x in nz):
                return False
    return True


def nullspace_modular(rows: Sequence[Sequence], ncols: int, max_primes: int = 64) -> list[list[mpq]]:
    """Nullspace basis (reduced echelon normal form) by multi-modular lifting."""
    rows_int = [r for r in integer_rows(rows) if any(r)]
    if not rows_int:
        return [[mpq(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    primes = list(_PRIMES)
    obj = np.array(rows_int, dtype=object)
    best_piv = None
    residues: list[tuple[int, np.ndarray]] = []
    modulus = 1
    used = 0
    while used < max_primes:
        if used >= len(primes):
            primes += _more_primes(primes[-1], 16)
        p = primes[used]
        used += 1
        A = (obj % p).astype(np.int64)
        R, piv = rref_mod_p(_compress(A, ncols, p), p)
        key = (len(piv), [-c for c in piv])
        if best_piv is not None:
            bkey = (len(best_piv), [-c for c in best_piv])
            if key < bkey:
                continue  # unlucky prime
            if key > bkey:
                residues, modulus = [], 1
        best_piv = piv
        residues.append((p, R))
        modulus *= p
        if len(residues) < 2 and len(rows_int) > 0 and used < max_primes:
            continue
        lifted = _lift(residues, best_piv, ncols)
        if lifted is None:
            continue
        basis = _basis_from_rref(lifted, best_piv, ncols)
        if _check(rows_int, basis):
            return basis
    return nullspace_exact(rows, ncols)


def _lift(residues, pivots, ncols):
    free = [c for c in range(ncols) if c not in set(pivots)]
    if not free:
        return [[mpq(0)] * ncols for _ in pivots]
    m = 1
    combined = None
    for p, R in residues:
        block = R[:, free].astype(object)
        if combined is None:
            combined = block
            m = p
        else:
            # CRT: x = c + m * ((r - c) * m^-1 mod p)
            inv = pow(m, -1, p)
            combined = combined + m * (((block - combined) % p) * inv % p)
            m *= p
    out = []
    for i in range(len(pivots)):
        row = [mpq(0)] * ncols
        for j, f in enumerate(free):
            v = int(combined[i, j])
            if v:
                rr = rational_reconstruct(v, m)
                if rr is None:
                    return None
                row[f] = rr
        out.append(row)
    return out


def nullspace(rows: Sequence[Sequence], ncols: int, method: str = "modular") -> list[list[mpq]]:
    if method == "exact":
        return nullspace_exact(rows, ncols)
    return nullspace_modular(rows, ncols)


# -- affine systems -------------------------------------------------------------

def solve_affine(rows: Sequence[Sequence], rhs: Sequence, ncols: int, method: str = "modular"):
    """All solutions of A x = b as (particular, homogeneous basis), or None."""
    aug = [list(r) + [-mpq(b)] for r, b in zip(rows, rhs)]
    basis = nullspace(aug, ncols + 1, method)
    with_one = [v for v in basis if v[ncols] != 0]
    if not with_one:
        return None
    part = with_one[0]
    s = part[ncols]
    part = [c / s for c in part[:ncols]]
    homog = []
    for v in basis:
        if v is with_one[0]:
            continue
        t = v[ncols]
        homog.append([a - t * b for a, b in zip(v[:ncols], part)])
    return part, homog


# -- generic field elimination --------------------------------------------------

def solve_field(A: list[list], b: list, zero=RZERO, one=RONE) -> list:
    """Solve a square nonsingular system over a field given by arithmetic operators.

    Entries are normally QRationalFunction; ValueError is raised when singular.
    """
    n = len(A)
    M = [list(map(rat, row)) + [rat(bb)] for row, bb in zip(A, b)]
    for c in range(n):
        piv = None
        best = None
        for i in range(c, n):
            e = M[i][c]
            if e:
                size = e.num.nterms() + e.den.nterms()
                if best is None or size < best:
                    piv, best = i, size
        if piv is None:
            raise ValueError("singular system")
        M[c], M[piv] = M[piv], M[c]
        inv = M[c][c].inverse()
        M[c] = [v * inv if v else v for v in M[c]]
        for i in range(n):
            if i != c and M[i][c]:
                f = M[i][c]
                M[i] = [x - f * y if y else x for x, y in zip(M[i], M[c])]
    return [M[i][n] for i in range(n)]
