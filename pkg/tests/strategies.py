"""Shared hypothesis strategies for small exact objects."""

import random

from gmpy2 import mpq

from hypothesis import strategies as st

from qfun.exact import QPolynomial
from qfun.weighted_words import GapMatrix, accepts

VARS = ("q", "x", "a")

small_rationals = st.builds(mpq, st.integers(-5, 5), st.integers(1, 3))


@st.composite
def polynomials(draw, vars=VARS, max_terms=4, min_exp=0, max_exp=3):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(min_exp, max_exp)) for _ in vars)
        terms[e] = draw(small_rationals)
    return QPolynomial(terms, vars)


def laurent_polynomials(vars=("q", "x")):
    return polynomials(vars=vars, min_exp=-3, max_exp=3)


nonzero_polynomials = polynomials().filter(bool)


def random_accepted_matrices(count, seed=2024):
    rng = random.Random(seed)
    found = []
    while len(found) < count:
        m = rng.choice((2, 3))
        M = GapMatrix.of([[rng.randint(-3, 3) for _ in range(m)] for _ in range(m)])
        if accepts(M) and M.entries not in {f.entries for f in found}:
            found.append(M)
    return found
