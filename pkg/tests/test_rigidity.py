import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cusp_forge.field import field
from cusp_forge.groups import ResidueRing
from cusp_forge.ideals import InvalidIdeal, factor, parse_ideal
from cusp_forge.rigidity import (SWEEP_NORM, auxiliary_bound, excluded_primes, gl2_order, inert_in_cm, inertia_bound,
                                 injective_primes, is_good_prime, is_rigid_full_level, is_rigid_gamma1, level_report,
                                 unit_image_order, unit_square_index)


def level(D, text):
    F = field(D)
    return F, parse_ideal(F, text)


def gl2_brute(n):
    """Count 2x2 matrices over O/n with unit determinant."""
    R = ResidueRing(n)
    res = R.all_residues
    elems = [R.element(r) for r in res]
    idx = {r: i for i, r in enumerate(res)}
    mul = [[idx[R.reduce(x * y)] for y in elems] for x in elems]
    unit_diff = [[R.is_unit(x - y) for y in elems] for x in elems]
    count = 0
    for a, b, c, d in itertools.product(range(len(res)), repeat=4):
        count += unit_diff[mul[a][d]][mul[b][c]]
    return count


def unit_residues_brute(F, n):
    """Residues of +-eps^j for 0 <= j < 4 #(O/n)."""
    R = ResidueRing(n)
    out, p = set(), F.one
    for _ in range(4 * R.size + 4):
        out |= {R.reduce(p), R.reduce(-p)}
        p = p * F.fund_unit
    return out


def square_index_brute(F, n):
    """2a/b with eps^a the least power that is +-1 mod n and eps^b the least totally positive one that is 1 mod n."""
    R = ResidueRing(n)
    one = R.reduce(F.one)
    a = b = None
    p = F.one
    for j in range(1, 8 * R.size + 8):
        p = p * F.fund_unit
        for u in (p, -p):
            if R.reduce(u) == one:
                a = a or j
                if u.is_totally_positive():
                    b = b or j
        if a and b:
            return 2 * a // b
    raise AssertionError


def lth_power_prime_level(F, P, x, ell):
    """Euler's criterion in the cyclic group (O/P)^*."""
    R = ResidueRing(P)
    q = int(P.norm())
    e = (q - 1) // math.gcd(ell, q - 1)
    return R.reduce(x ** e) == R.reduce(F.one)


CATALOG = [
    (5, "(7)"), (5, "(3)"), (2, "(7)"), (3, "(5)"), (13, "(3)"),
    (5, "(11)"), (2, "(5)"), (5, "(2)"), (5, "(21)"), (10, "(7)"),
]


@pytest.mark.parametrize("D,n", [(5, "(2)"), (3, "(2)"), (2, "(2)"), (13, "(3)"), (5, "(3)"), (2, "(3)"), (5, "(4)")])
def test_gl2_matches_brute_force(D, n):
    F, N = level(D, n)
    assert gl2_order(N) == gl2_brute(N)


def test_gl2_example():
    # O/(3) = F_9 in Q(sqrt 5)
    F, N = level(5, "(3)")
    q = 9
    assert gl2_order(N) == (q * q - 1) * (q * q - q) == 5760


@pytest.mark.parametrize("D,n1,n2", [(5, "(3)", "(7)"), (2, "(3)", "(5)"), (13, "(2)", "(3)"), (3, "(5)", "(7)"),
                                     (5, "(2)", "(11)")])
def test_gl2_crt_multiplicative(D, n1, n2):
    F = field(D)
    a, b = parse_ideal(F, n1), parse_ideal(F, n2)
    assert gl2_order(a * b) == gl2_order(a) * gl2_order(b)


@pytest.mark.parametrize("D,n", CATALOG)
def test_unit_image_and_square_index(D, n):
    F, N = level(D, n)
    assert unit_image_order(N) == len(unit_residues_brute(F, N))
    if not N.divides(parse_ideal(F, "(2)")):
        assert unit_square_index(N) == square_index_brute(F, N)
        assert unit_square_index(N) in (1, 2)


@pytest.mark.parametrize("D,n", CATALOG)
def test_inertia_bound_is_the_product(D, n):
    F, N = level(D, n)
    if N.divides(parse_ideal(F, "(2)")):
        with pytest.raises(ValueError):
            inertia_bound(F, N)
        return
    b = inertia_bound(F, N)
    assert b == square_index_brute(F, N) * gl2_brute_or_formula(N) // len(unit_residues_brute(F, N))
    assert b % 2 == 0


def gl2_brute_or_formula(N):
    return gl2_brute(N) if N.norm() <= 9 else gl2_order(N)


def test_inertia_bound_rejects():
    F, N = level(5, "(7)")
    with pytest.raises(ValueError):
        inertia_bound(F, N, 7)
    with pytest.raises(ValueError):
        inertia_bound(F, parse_ideal(F, "(2)"))
    with pytest.raises(InvalidIdeal):
        inertia_bound(F, parse_ideal(F, "(1/3)"))


def test_full_level_condition_one():
    # 2[F:Q] = 4
    F, N = level(5, "(2)")
    assert not is_rigid_full_level(F, N)
    F, N = level(2, "(3)")
    assert not is_rigid_full_level(F, N)


def test_sqrt5_level7_oracle():
    F, N = level(5, "(7)")
    R = ResidueRing(N)
    phi = (F.one + F.sqrtD()) * F(Fraction(1, 2))
    eta = phi * phi
    # order of eta in F_49^* by repeated multiplication
    k, x = 1, eta
    while R.reduce(x) != R.reduce(F.one):
        x, k = x * eta, k + 1
    assert k == 8
    # no odd prime divides the order, so condition 2 fails
    assert injective_primes(F, N) == []
    assert not is_rigid_full_level(F, N)


@pytest.mark.parametrize("D,n", [(5, "(11)"), (2, "(7)"), (3, "(5)"), (13, "(3)"), (10, "(7)"), (2, "(5)")])
def test_injective_primes_against_euler(D, n):
    F, N = level(D, n)
    facs = [P for P, _ in factor(N)]
    eta = F.fund_unit if F.fund_unit.norm() == 1 else F.fund_unit ** 2
    R = ResidueRing(N)
    k, x = 1, eta
    while R.reduce(x) != R.reduce(F.one):
        x, k = x * eta, k + 1
    expected = []
    for ell in (3, 5, 7, 11, 13, 17, 19, 23):
        if k % ell:
            continue
        # eta is an l-th power mod n iff it is one mod every prime factor (n squarefree here)
        if not all(lth_power_prime_level(F, P, eta, ell) for P in facs):
            expected.append(ell)
    assert injective_primes(F, N) == expected
    big_prime = any(q > 4 and N.min_integer() % q == 0 for q in range(2, N.min_integer() + 1))
    assert is_rigid_full_level(F, N) == (bool(expected) and big_prime)


def test_inert_in_cm():
    F = field(5)
    # q = 49: 3 | 48
    assert not inert_in_cm(F, parse_ideal(F, "(7)"))
    # q = 11 splits; 11 - 1 = 10 is divisible by 5
    P = factor(parse_ideal(F, "(11)"))[0][0]
    assert not inert_in_cm(F, P)
    F2 = field(2)
    # norm 7 in Q(sqrt 2): 6 is divisible by 3
    P = factor(parse_ideal(F2, "(7)"))[0][0]
    assert not inert_in_cm(F2, P)
    # q = 23 in Q(sqrt 2) (split): 22 avoids 3, 4, 8
    P = factor(parse_ideal(F2, "(23)"))[0][0]
    assert int(P.norm()) == 23 and inert_in_cm(F2, P)


def test_good_prime_examples():
    F, N = level(5, "(7)")
    assert not is_good_prime(F, N, 7)
    assert not is_good_prime(F, N, 2)
    level_, b = auxiliary_bound(F, 3)
    assert is_good_prime(F, N, 3) == (b % 3 != 0)
    assert int(level_.norm()) % 3 and int(level_.norm()) <= SWEEP_NORM


@given(st.sampled_from([2, 3, 5, 13]), st.sampled_from(["(1)", "(2)", "(3)", "(7)", "(5)"]),
       st.sampled_from([2, 3, 5, 7, 11, 13, 17, 19]))
@settings(max_examples=40)
def test_good_prime_trivial_refusals(D, n, p):
    F, N = level(D, n)
    if (2 * int(N.norm())) % p == 0:
        assert not is_good_prime(F, N, p)
    assert (p in excluded_primes(F, N)) == (not is_good_prime(F, N, p))


@pytest.mark.parametrize("D,n", CATALOG)
def test_rigid_implies_good_away_from_bound(D, n):
    F, N = level(D, n)
    if not is_rigid_full_level(F, N):
        return
    b = inertia_bound(F, N)
    for p in (3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        if (2 * int(N.norm()) * b) % p:
            assert is_good_prime(F, N, p)


@pytest.mark.parametrize("D,n", CATALOG)
def test_level_report(D, n):
    F, N = level(D, n)
    rep = level_report(F, N, 3)
    js = rep.to_json()
    assert js["rigid_full_level"] == is_rigid_full_level(F, N)
    assert js["rigid_gamma1"] == is_rigid_gamma1(F, N)
    assert js["inertia_bound"] > 0 and js["inertia_bound"] % 2 == 0
    assert js["good"] == is_good_prime(F, N, 3)
    if rep.conservative:
        assert not rep.good
