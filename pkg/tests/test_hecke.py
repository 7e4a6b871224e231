import random
from fractions import Fraction

import pytest

from cusp_forge.field import field
from cusp_forge.groups import ray_class_group
from cusp_forge.hecke import compatible_characters, is_admissible_weight
from cusp_forge.ideals import FractionalIdeal, parse_ideal

LEVELS = [(5, "(1)"), (3, "(1)"), (5, "(7)"), (2, "(7)"), (13, "(3)"), (3, "(2)"), (5, "(6)"), (13, "(4)")]


def test_admissible_examples():
    F5, F3 = field(5), field(3)
    O5, O3 = FractionalIdeal.unit(F5), FractionalIdeal.unit(F3)
    assert is_admissible_weight(F5, O5, 2) and not is_admissible_weight(F5, O5, 1)
    assert all(is_admissible_weight(F3, O3, k) for k in range(-3, 7))
    for D in (2, 3, 5, 13):
        assert is_admissible_weight(field(D), FractionalIdeal.unit(field(D)), 0)


def test_compatible_examples():
    F3 = field(3)
    O3 = FractionalIdeal.unit(F3)
    for k in (1, 3):
        (chi,) = compatible_characters(F3, O3, k)
        assert not chi.is_trivial()
        assert chi(FractionalIdeal.principal(F3, F3.sqrtD())) == Fraction(1, 2)
    for k in (0, 2):
        (chi,) = compatible_characters(F3, O3, k)
        assert chi.is_trivial()
    assert compatible_characters(field(5), FractionalIdeal.unit(field(5)), 1) == []


def unit_norm_oracle(F, n, k):
    """N(u)^k = 1 for all u = 1 mod n, by scanning +-eps^j."""
    from cusp_forge.groups import ResidueRing
    R = ResidueRing(n)
    if k % 2 == 0:
        return True
    p = F.one
    for _ in range(4 * R.size + 4):
        for u in (p, -p):
            if R.size == 1 or R.reduce(u) == R.reduce(F.one):
                if u.norm() == -1:
                    return False
        p = p * F.fund_unit
    return True


@pytest.mark.parametrize("D,n", LEVELS)
def test_admissibility_matches_unit_scan(D, n):
    F = field(D)
    N = parse_ideal(F, n)
    for k in (1, 2, 3):
        assert is_admissible_weight(F, N, k) == unit_norm_oracle(F, N, k)


@pytest.mark.parametrize("D,n", LEVELS)
def test_compatibility_on_random_principal_ideals(D, n):
    F = field(D)
    N = parse_ideal(F, n)
    G = ray_class_group(F, N, narrow=True)
    rng = random.Random(7)
    for k in (1, 2):
        chars = compatible_characters(F, N, k)
        for _ in range(10):
            signs = (rng.choice((1, -1)), rng.choice((1, -1)))
            alpha = G.element_with(F.one + G.ring.m * F(rng.randint(-3, 3), rng.randint(-3, 3)), signs)
            want = Fraction(0) if alpha.norm() > 0 or k % 2 == 0 else Fraction(1, 2)
            for chi in chars:
                assert chi(FractionalIdeal.principal(F, alpha)) == want


@pytest.mark.parametrize("D,n", LEVELS)
def test_parities_partition_sign_characters(D, n):
    F = field(D)
    N = parse_ideal(F, n)
    G = ray_class_group(F, N, narrow=True)
    if not is_admissible_weight(F, N, 1):
        return
    from cusp_forge.cusps import kernel_subgroup, level_context
    K = kernel_subgroup(level_context(F, N))
    odd = set(compatible_characters(F, N, 1))
    even = set(compatible_characters(F, N, 2))
    assert not odd & even
    assert len(odd) == len(even) == G.order // len(K)
    assert odd | even == {chi for chi in G.characters() if chi.parity() is not None}
