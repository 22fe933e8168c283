"""Exact q-series toolkit.

Polynomials and rational functions in q (and any other symbols) with rational
coefficients, q-shift equations and q-recurrences as Ore operators, guessing by exact
nullspaces, weighted-words and cylindric-partition recurrence generators, and fitting
of q-polynomial sequences by q-binomial and q-trinomial bases.
"""

from .exact import ONE, ZERO, QPolynomial, QRationalFunction, format_poly, poly, rat, sym
from .expr import expand_series, parse, parse_equation, parse_factor, to_text
from .forms import (DifferentialEquation, Recurrence, ShiftEquation, SubstitutionFactor, convert,
                    re_to_se, se_to_de, se_to_re, substitute_re, substitute_se, unroll)
from .ore import CoupledSystem, OreOperator, gcrd
from .guess import GuessOptions, GuessResult, guess_recurrence, guess_shift_equation
from .weighted_words import GapMatrix, WWSystem, enumerate_weighted_partitions, generate_recurrences
from .cylindric import (coefficient_recurrences, enumerate_cylindric, functional_equation,
                        functional_equation_system)
from .qobjects import borodin_product, hirschhorn_sum, prod_make, q_binomial, q_trinomial
from .fitting import FitResult, evaluate_fit, fit_q_representation, fit_to_bilateral_form

__version__ = "0.1.0"
