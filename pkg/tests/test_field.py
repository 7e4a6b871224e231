from fractions import Fraction
from math import isqrt

import pytest
from hypothesis import given, strategies as st

from cusp_forge.field import (RealQuadraticField, field, format_element, fundamental_unit, is_totally_positive, norm,
                              parse_element)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=12)
fields = st.sampled_from([2, 3, 5, 6, 7, 13, 10, 17])


def elements(D):
    F = field(D)
    return st.builds(lambda x, y: F(x, y), rationals, rationals)


def pell_unit(D):
    """Smallest unit > 1 of Z[ω] found by brute force over x + y√D (half-integers when D = 1 mod 4)."""
    half = D % 4 == 1
    for y2 in range(1, 10 ** 6):
        y = Fraction(y2, 2) if half else Fraction(y2)
        for s in (-1, 1):
            t = D * y * y + s
            x = Fraction(isqrt(int(4 * t)), 2) if half else Fraction(isqrt(int(t)))
            if x > 0 and x * x == t and (not half or (x - y).denominator == 1):
                return x, y
    raise AssertionError


def in_basis(F, x, y):
    return F(x, 0) + y * F.sqrtD()


def test_norm_examples():
    F5, F3 = field(5), field(3)
    assert norm(F5.omega) == -1
    assert norm(F3(2, 1)) == 1
    for D in (2, 3, 5):
        assert norm(field(D).one) == 1


def test_total_positivity_examples():
    assert is_totally_positive(field(3)(2, 1))
    assert not is_totally_positive(field(5).omega)
    for D in (2, 3, 5):
        assert not is_totally_positive(-field(D).one)


@pytest.mark.parametrize("D,expected", [(2, (1, 1)), (5, (0, 1)), (3, (2, 1))])
def test_fundamental_unit_examples(D, expected):
    F = field(D)
    assert fundamental_unit(F) == F(*expected)


@pytest.mark.parametrize("D", [2, 3, 5, 6, 7, 13, 10, 17, 21, 29])
def test_fundamental_unit_matches_pell_oracle(D):
    F = field(D)
    x, y = pell_unit(D)
    assert fundamental_unit(F) == in_basis(F, x, y)


@given(fields, st.data())
def test_norm_multiplicative_trace_additive(D, data):
    a = data.draw(elements(D))
    b = data.draw(elements(D))
    assert (a * b).norm() == a.norm() * b.norm()
    assert (a + b).trace() == a.trace() + b.trace()


@given(fields, st.data())
def test_sign_vector_multiplicative(D, data):
    a = data.draw(elements(D))
    b = data.draw(elements(D))
    sa, sb = a.sign_vector(), b.sign_vector()
    assert (a * b).sign_vector() == (sa[0] * sb[0], sa[1] * sb[1])


@given(fields, st.data())
def test_sign_vector_matches_embeddings(D, data):
    a = data.draw(elements(D))
    e1, e2 = a.embeddings()
    sv = a.sign_vector()
    # floats only as an independent oracle away from zero
    if abs(e1) > 1e-9:
        assert sv[0] == (1 if e1 > 0 else -1)
    if abs(e2) > 1e-9:
        assert sv[1] == (1 if e2 > 0 else -1)


@pytest.mark.parametrize("D", [2, 3, 5, 13])
def test_fundamental_unit_has_infinite_order(D):
    F = field(D)
    eps = F.fund_unit
    assert abs(eps.norm()) == 1
    assert eps.embeddings()[0] > 1
    p = F.one
    for _ in range(20):
        p = p * eps
        assert p != F.one and p.inverse() != F.one


@given(fields, st.data())
def test_element_roundtrip(D, data):
    F = field(D)
    a = data.draw(elements(D))
    assert parse_element(F, format_element(a)) == a


def test_rejects_non_squarefree():
    with pytest.raises(ValueError):
        RealQuadraticField(12)
    with pytest.raises(ValueError):
        RealQuadraticField(1)
