import pytest

from qfun import cylindric
from qfun.cylindric import (F_at_one, canonical, check_functional_equation, coefficient_recurrences,
                            enumerate_cylindric, functional_equation, functional_equation_system,
                            profiles_of, validate_templates)
from qfun.exact import rat, sym
from qfun.expr import parse_factor
from qfun.forms import Recurrence, recurrence, substitute_re, unroll
from qfun.ore import OreOperator, gcrd
from qfun.qobjects import borodin_product, hirschhorn_sum

q, Qn = sym("q"), sym("Qn")


def test_profiles_and_canonical_rotation():
    assert profiles_of(2, 4) == [(2, 2), (3, 1), (4, 0)]
    assert profiles_of(3, 1) == [(1, 0, 0)]
    assert canonical((0, 1, 3)) == (3, 0, 1)
    with pytest.raises(ValueError):
        canonical(())


def test_empty_partition_only():
    assert enumerate_cylindric((2, 2), 3, 0) == {(0, 0): 1}


def test_templates_validate_against_enumeration():
    assert validate_templates(max_k=3, max_size=4, qmax=10, zmax=5) == []


def test_rotation_invariance():
    for c in profiles_of(3, 4):
        expected = functional_equation(c)
        for r in range(3):
            assert functional_equation(c[r:] + c[:r]).terms == expected.terms


def test_borodin_against_enumeration():
    for k in (1, 2, 3):
        for size in range(1, 5):
            for c in profiles_of(k, size):
                assert F_at_one(c, 12) == borodin_product(c).series(12), c


def test_zero_profile_rejected():
    with pytest.raises(ValueError):
        functional_equation((0, 0))


def test_trusted_only_refuses_unvalidated(monkeypatch):
    monkeypatch.setattr(cylindric, "VALIDATED", set())
    with pytest.raises(ValueError, match="not been validated"):
        functional_equation_system(2, 4, trusted_only=True)
    assert check_functional_equation((2, 2))


def test_h_pipeline():
    cs = coefficient_recurrences(functional_equation_system(2, 4))
    g22 = Recurrence(cs.uncouple("g[{2,2}]"), 0, "g")
    h = substitute_re(g22, parse_factor("qPochhammer(q^2,q^2,n)/q^(n^2)", "sequence"), "h")
    rec22 = recurrence({2: 1, 1: -(1 + q + q ** 3 * Qn ** 2), 0: -q * (-1 + q ** 2 * Qn ** 2)}, unknown="h")
    assert gcrd(h.op, rec22.op).normalized() == rec22.op.normalized()
    values = _unroll_h(h.op, 11)
    for n in range(11):
        assert values[n] == hirschhorn_sum(1, q, q ** -1, q ** -1, n, 2)


def _unroll_h(op: OreOperator, count):
    return [rat(v) for v in unroll(Recurrence(op, 0, "h"), -1, [0, 1], count + 1)[1:]]
