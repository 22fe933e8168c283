import json

import jsonschema

from qfun import io
from qfun.exact import sym
from qfun.fitting import fit_q_representation
from qfun.forms import convert, re_to_se, recurrence, se_to_re, shift_equation, unroll
from qfun.weighted_words import SCHUR, generate_recurrences

q, x, Qn = sym("q"), sym("x"), sym("Qn")

SE = shift_equation({2: 1, 0: -q * x ** 2})


def _round_trip(obj, schema, write, read):
    text = io.dumps(write(obj))
    data = json.loads(text)
    jsonschema.validate(data, schema)
    again = read(data)
    assert io.dumps(write(again)) == text
    return again


def test_equation_round_trips():
    rec = se_to_re(SE).recurrence
    for eq in (SE, re_to_se(rec), rec, convert(SE, "qDE"), convert(re_to_se(rec), "qDE"),
               shift_equation({0: 1, 2: -1 - q * x}, stride=2, inhomogeneous=1 - x)):
        back = _round_trip(eq, io.EQUATION_SCHEMA, io.equation_to_json, io.equation_from_json)
        assert type(back) is type(eq)


def test_rational_coefficients_survive():
    eq = shift_equation({0: 1, 1: 1 / (1 - x)})
    back = _round_trip(eq, io.EQUATION_SCHEMA, io.equation_to_json, io.equation_from_json)
    assert back.equivalent(eq)


def test_system_round_trip():
    system = generate_recurrences(SCHUR)
    data = json.loads(io.dumps(io.ww_system_to_json(system)))
    jsonschema.validate(data, io.SYSTEM_SCHEMA)
    rows, unknowns = io.system_from_json(data)
    assert unknowns == ["g.a", "g.b", "g.c"]
    assert io.dumps(io.system_to_json(rows, unknowns, data["var"], data["validFrom"])) == io.dumps(data)


def test_fit_round_trip():
    rec = recurrence({2: 1, 1: -(1 + q + q ** 3 * Qn ** 2), 0: -q * (-1 + q ** 2 * Qn ** 2)})
    h = [v.as_poly() for v in unroll(rec, -1, [0, 1], 11)[1:]]
    (fit,) = fit_q_representation(h)
    back = _round_trip(fit, io.FIT_SCHEMA, io.fit_to_json, io.fit_from_json)
    assert back == fit


def test_poly_lists():
    values = [1 + q, q ** -2, (1 + q) / (1 - q)]
    text = io.dumps(io.polys_to_json(values))
    jsonschema.validate(json.loads(text), io.POLY_LIST_SCHEMA)
    assert io.read_poly_list(text) == io.read_poly_list("1 + q\nq^(-2)  # comment\n\n(1+q)/(1-q)\n")
