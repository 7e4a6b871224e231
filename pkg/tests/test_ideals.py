import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cusp_forge.field import field
from cusp_forge.groups import wide_class_reps
from cusp_forge.ideals import (FractionalIdeal, InvalidIdeal, Lattice2, different, format_ideal, ideal_add,
                               ideal_intersect, ideal_inv, ideal_mul, ideal_norm, lattice_intersect_line,
                               normalizing_ideal, parse_ideal)

small = st.integers(min_value=-12, max_value=12)
fields = st.sampled_from([2, 3, 5, 13, 10])


@st.composite
def ideals(draw, D):
    F = field(D)
    gens = []
    for _ in range(draw(st.integers(1, 2))):
        x, y = draw(small), draw(small)
        if x == 0 and y == 0:
            x = 1
        gens.append(F(x, y))
    den = draw(st.integers(1, 4))
    return FractionalIdeal.from_generators(F, gens) * F(Fraction(1, den))


def principal(F, *xy):
    return FractionalIdeal.principal(F, F(*xy))


def test_arithmetic_examples():
    F = field(5)
    assert ideal_mul(principal(F, 2), principal(F, 3)) == principal(F, 6)
    assert ideal_intersect(principal(F, 2), principal(F, 3)) == principal(F, 6)
    assert ideal_add(principal(F, 2), principal(F, 3)) == FractionalIdeal.unit(F)


def test_different_examples():
    F5, F2 = field(5), field(2)
    assert different(F5) == FractionalIdeal.principal(F5, F5.sqrtD())
    assert different(F2) == FractionalIdeal.principal(F2, 2 * F2.sqrtD())
    for D in (2, 3, 5, 13, 10):
        assert ideal_norm(different(field(D))) == field(D).disc


def test_norm_examples():
    F = field(5)
    assert ideal_norm(FractionalIdeal.unit(F)) == 1
    assert ideal_norm(FractionalIdeal.principal(F, F.sqrtD())) == 5
    assert ideal_norm(principal(F, Fraction(1, 2))) == Fraction(1, 4)


@given(fields, st.data())
def test_inverse_and_norm_laws(D, data):
    a = data.draw(ideals(D))
    b = data.draw(ideals(D))
    assert ideal_mul(a, ideal_inv(a)) == FractionalIdeal.unit(field(D))
    assert ideal_norm(a * b) == ideal_norm(a) * ideal_norm(b)


@given(fields, st.data())
def test_hnf_is_omega_stable_and_canonical(D, data):
    F = field(D)
    a = data.draw(ideals(D))
    for g in a.gens():
        assert g * F.omega in a
    assert parse_ideal(F, format_ideal(a)) == a
    hnf = f"hnf:{[list(r) for r in a.basis]}/{a.den}".replace(" ", "")
    assert parse_ideal(F, hnf) == a


@pytest.mark.parametrize("text", ["(1", "(2, 3", "hnf:[[1,0],[0,2]]", "hnf:[[2,1],[0,3]]", "(x)"])
def test_parse_rejects_garbage(text):
    with pytest.raises(InvalidIdeal):
        parse_ideal(field(5), text)


def test_intersect_line_examples():
    for D in (2, 3, 5, 13):
        F = field(D)
        O = FractionalIdeal.unit(F)
        t = wide_class_reps(D)[-1]
        H = Lattice2.direct_sum(t * different(F), O)
        assert lattice_intersect_line(H, (F.zero, F.one)) == O
        assert H.quotient_ideal((F.zero, F.one)) == t * different(F)
        assert lattice_intersect_line(Lattice2.direct_sum(O, O), (F.one, F.one)) == O


def random_g(F, rng, height=10):
    while True:
        g = [[F(rng.randint(-height, height), rng.randint(-height, height)) for _ in range(2)] for _ in range(2)]
        det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        if det and det.is_totally_positive():
            return g, det


def intersection_oracle(a_id, b_id, g, det):
    """{t : (0, t) g^-1 in b + a}, via ideal intersections only."""
    (a, _), (c, _) = g
    parts = []
    if c:
        parts.append(b_id * (det / c))
    if a:
        parts.append(a_id * (det / a))
    out = parts[0]
    for p in parts[1:]:
        out = out & p
    return out


@pytest.mark.parametrize("D", [2, 3, 5, 13])
def test_normalizing_ideal_against_oracles(D):
    F = field(D)
    rng = random.Random(D)
    reps = wide_class_reps(D)
    for _ in range(25):
        a_id, b_id = rng.choice(reps), rng.choice(reps) * rng.choice([F.one, F(2, 1)])
        g, det = random_g(F, rng, 6)
        J, I = normalizing_ideal(a_id, b_id, g)
        H = Lattice2.direct_sum(b_id, a_id)
        gH = H.transform(g)
        direct = lattice_intersect_line(gH, (F.zero, F.one))
        assert I == direct == intersection_oracle(a_id, b_id, g, det)
        assert gH.det_ideal() == FractionalIdeal.principal(F, det) * a_id * b_id
        # J = I(1) / I(g)
        assert J == a_id * I.inverse()


def test_normalizing_identity():
    F = field(5)
    a_id = principal(F, 2)
    b_id = FractionalIdeal.unit(F)
    J, I = normalizing_ideal(a_id, b_id, [[F.one, F.zero], [F.zero, F.one]])
    assert J == FractionalIdeal.unit(F) and I == a_id


def test_standard_label_normalizing_ideal():
    # for H = t d + O: J = det(g)^-1 (a + c t^-1 d^-1), and det(g)(a + c t^-1 d^-1)^-1 is I = J^-1
    F = field(3)
    rng = random.Random(1)
    t = wide_class_reps(3)[0]
    b_id = t * different(F)
    O = FractionalIdeal.unit(F)
    for _ in range(10):
        g, det = random_g(F, rng, 5)
        (a, _), (c, _) = g
        J, _ = normalizing_ideal(O, b_id, g)
        inner = [x for x in (FractionalIdeal.principal(F, a) if a else None,
                             b_id.inverse() * c if c else None) if x is not None]
        S = inner[0] if len(inner) == 1 else inner[0] + inner[1]
        assert J == S * det.inverse()
        assert J.inverse() == FractionalIdeal.principal(F, det) * S.inverse()
