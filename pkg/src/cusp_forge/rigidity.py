"""Elliptic-point control: rigid levels, inertia bounds and good primes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

from .field import RealQuadraticField
from .groups import ResidueRing, UnitData, primes_up_to_norm
from .ideals import FractionalIdeal, InvalidIdeal, factor, format_ideal, _prime_factors

SWEEP_NORM = 100


def _integral(n: FractionalIdeal) -> None:
    if not n.is_integral():
        raise InvalidIdeal("level must be an integral ideal")


def _divides_two(n: FractionalIdeal) -> bool:
    return n.divides(FractionalIdeal.principal(n.F, 2))


def gl2_order(n: FractionalIdeal) -> int:
    """#GL_2(O/n), multiplied out over the prime-power factors of n."""
    _integral(n)
    out = 1
    for P, e in factor(n):
        q = int(P.norm())
        out *= q ** (4 * (e - 1)) * (q * q - 1) * (q * q - q)
    return out


def unit_image_order(n: FractionalIdeal) -> int:
    """Size of the image of O^* = <-1, eps> in (O/n)^*."""
    R = ResidueRing(n)
    if R.size == 1:
        return 1
    F = n.F
    seen = set()
    p = F.one
    while True:
        r = R.reduce(p)
        if r in seen:
            break
        seen.add(r)
        seen.add(R.reduce(-p))
        p = p * F.fund_unit
    return len(seen)


def unit_square_index(n: FractionalIdeal) -> int:
    """[U^+_{1,n} : (U_{1,n})^2] for n not dividing 2.

    Both groups are infinite cyclic here (-1 is not 1 mod n), so the index is
    read off from eps-exponents of their generators.
    """
    if _divides_two(n):
        raise ValueError("n divides (2)")
    U = UnitData(n.F, n)
    g = U.u1n_gens[0]
    plus = U.u1n_plus_gen
    return 2 * _eps_exponent(g) // _eps_exponent(plus)


def _eps_exponent(u) -> int:
    """|j| with u = +-eps^j, for a unit u != +-1."""
    eps = u.F.fund_unit
    if u.sign_vector()[0] < 0:
        u = -u
    if (u - 1).sign_vector()[0] < 0:
        u = u.inverse()
    j, p = 0, u.F.one
    while p != u:
        p = p * eps
        j += 1
    return j


def inertia_bound(F: RealQuadraticField, n: FractionalIdeal, p: int | None = None) -> int:
    """|U^+_{1,n}/(U_{1,n})^2| * |GL_2(O/n)/O^*| for n coprime to p, n not dividing 2."""
    _integral(n)
    if _divides_two(n):
        raise ValueError("n divides (2)")
    if p is not None and int(n.norm()) % p == 0:
        raise ValueError("n is not coprime to p")
    return unit_square_index(n) * (gl2_order(n) // unit_image_order(n))


def _odd_prime_factors(m: int) -> list[int]:
    return [q for q in _prime_factors(m) if q != 2] if m > 1 else []


def _is_lth_power(R: ResidueRing, x, ell: int) -> bool:
    target = R.reduce(x)
    return any(R.reduce(R.element(r) ** ell) == target for r in R.unit_residues)


def injective_primes(F: RealQuadraticField, n: FractionalIdeal) -> list[int]:
    """Odd primes l with U^+ (x) Z/l -> (O/n)^* (x) Z/l injective.

    U^+ is cyclic on eta, so this asks that eta is not an l-th power mod n;
    only l dividing the order of eta can qualify.
    """
    _integral(n)
    R = ResidueRing(n)
    if R.size == 1:
        return []
    eta = UnitData(F, n).eta
    return [ell for ell in _odd_prime_factors(R.mult_order(eta))
            if not _is_lth_power(R, eta, ell)]


def is_rigid_full_level(F: RealQuadraticField, n: FractionalIdeal) -> bool:
    """n meets Z in a multiple of a prime > 2[F:Q], and some odd l is injective."""
    _integral(n)
    m = n.min_integer()
    if not any(q > 4 for q in _prime_factors(m)):
        return False
    return bool(injective_primes(F, n))


def _cm_orders(F: RealQuadraticField) -> list[int]:
    """Orders m with F(zeta_m) a CM quadratic extension carrying extra roots of unity."""
    extra = {5: 5, 2: 8, 3: 12}
    return [3, 4] + ([extra[F.D]] if F.D in extra else [])


def inert_in_cm(F: RealQuadraticField, P: FractionalIdeal) -> bool:
    """P is prime to 30 and inert in every F(zeta_m) of degree two.

    For such P the Frobenius acts by zeta -> zeta^q, so P is inert in
    F(zeta_m) exactly when m does not divide q - 1.
    """
    q = int(P.norm())
    if math.gcd(q, 30) != 1:
        return False
    return all((q - 1) % m for m in _cm_orders(F))


def is_rigid_gamma1(F: RealQuadraticField, n: FractionalIdeal) -> bool:
    """The two checkable conditions after the CM-points argument, at level Gamma_1(n)."""
    _integral(n)
    if not any(inert_in_cm(F, P) for P, _ in factor(n)):
        return False
    return bool(injective_primes(F, n))


@lru_cache(maxsize=None)
def _sweep(D: int) -> tuple:
    from .field import field
    F = field(D)
    out = []
    for P in primes_up_to_norm(F, SWEEP_NORM):
        if _divides_two(P):
            continue
        out.append((P, inertia_bound(F, P)))
    return tuple(out)


def auxiliary_bound(F: RealQuadraticField, p: int) -> tuple[FractionalIdeal | None, int | None]:
    """The swept level coprime to p whose bound has the least p-adic valuation."""
    best = None
    for P, b in _sweep(F.D):
        if int(P.norm()) % p == 0:
            continue
        v = _ord(b, p)
        if best is None or (v, b) < best[0]:
            best = ((v, b), P, b)
    if best is None:
        return None, None
    return best[1], best[2]


def _ord(m: int, p: int) -> int:
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


def is_good_prime(F: RealQuadraticField, n: FractionalIdeal, p: int) -> bool:
    """p is invertible on 2N(n) and prime to some swept inertia bound.

    A False verdict coming from the sweep alone is conservative.
    """
    _integral(n)
    if (2 * int(n.norm())) % p == 0:
        return False
    _, b = auxiliary_bound(F, p)
    return b is not None and b % p != 0


def excluded_primes(F: RealQuadraticField, n: FractionalIdeal) -> list[int]:
    """All primes p failing is_good_prime, a finite set."""
    cands = set(_prime_factors(2 * int(n.norm())))
    P0, b0 = _sweep(F.D)[0]
    cands |= set(_prime_factors(b0)) | set(_prime_factors(int(P0.norm())))
    return sorted(p for p in cands if not is_good_prime(F, n, p))


@dataclass
class LevelReport:
    n: FractionalIdeal
    rigid_full_level: bool
    rigid_gamma1: bool
    inertia_bound: int
    good_primes_excluded: list[int] = dc_field(default_factory=list)
    bound_level: FractionalIdeal | None = None
    conservative: bool = False
    p: int | None = None
    good: bool | None = None

    def to_json(self) -> dict:
        out = {
            "n": format_ideal(self.n),
            "rigid_full_level": self.rigid_full_level,
            "rigid_gamma1": self.rigid_gamma1,
            "inertia_bound": self.inertia_bound,
            "bound_level": format_ideal(self.bound_level) if self.bound_level else None,
            "good_primes_excluded": self.good_primes_excluded,
            "sweep_norm": SWEEP_NORM,
            "conservative": self.conservative,
        }
        if self.p is not None:
            out["p"] = self.p
            out["good"] = self.good
        return out


def level_report(F: RealQuadraticField, n: FractionalIdeal, p: int | None = None) -> LevelReport:
    """Collect the rigidity data of n; levels dividing 2 borrow the best swept bound."""
    _integral(n)
    if not _divides_two(n) and (p is None or int(n.norm()) % p):
        level, bound = n, inertia_bound(F, n)
    else:
        level, bound = auxiliary_bound(F, p or 2)
    rep = LevelReport(
        n=n,
        rigid_full_level=is_rigid_full_level(F, n),
        rigid_gamma1=is_rigid_gamma1(F, n),
        inertia_bound=bound,
        good_primes_excluded=excluded_primes(F, n),
        bound_level=level,
    )
    if p is not None:
        rep.p = p
        rep.good = is_good_prime(F, n, p)
        # a refusal driven by the sweep rather than by 2N(n) is only an upper bound
        rep.conservative = not rep.good and (2 * int(n.norm())) % p != 0
    return rep
