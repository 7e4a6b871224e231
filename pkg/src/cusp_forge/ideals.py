"""Fractional ideals of O_F and rank-two O_F-lattices in F^2.

Both are stored as Z-lattices in Hermite normal form over the basis {1, w}
(and {1, w} in each coordinate for F^2), so equality is a cheap comparison.
"""
from __future__ import annotations

import ast
import math
import re
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .field import FieldElement, RealQuadraticField, parse_element
from .zlinalg import RatLattice, _clear, kernel


class InvalidIdeal(ValueError):
    pass


def _vec(e: FieldElement) -> list[Fraction]:
    return [e.x, e.y]


def _times_omega(F: RealQuadraticField, v: Sequence[Fraction]) -> list[Fraction]:
    x, y = v
    return [-F.norm_omega * y, x + F.trace_omega * y]


class FractionalIdeal:
    """A nonzero fractional ideal, stored as a Z-lattice in Q^2."""

    __slots__ = ("F", "lat", "__dict__")

    def __init__(self, F: RealQuadraticField, lat: RatLattice):
        if lat.rank != 2:
            raise InvalidIdeal("an ideal must have Z-rank 2")
        self.F = F
        self.lat = lat

    @classmethod
    def from_generators(cls, F: RealQuadraticField, gens: Iterable) -> "FractionalIdeal":
        vecs = []
        for g in gens:
            g = g if isinstance(g, FieldElement) else F(g)
            if not g:
                continue
            vecs.append(_vec(g))
            vecs.append(_vec(g * F.omega))
        if not vecs:
            raise InvalidIdeal("the zero ideal is not a fractional ideal")
        return cls(F, RatLattice.from_generators(vecs, 2))

    @classmethod
    def principal(cls, F: RealQuadraticField, g) -> "FractionalIdeal":
        return cls.from_generators(F, [g])

    @classmethod
    def unit(cls, F: RealQuadraticField) -> "FractionalIdeal":
        return cls.from_generators(F, [1])

    @property
    def basis(self) -> list[list[int]]:
        return self.lat.basis

    @property
    def den(self) -> int:
        return self.lat.den

    def gens(self) -> list[FieldElement]:
        return [self.F(*v) for v in self.lat.vectors()]

    def __eq__(self, other):
        return isinstance(other, FractionalIdeal) and self.F == other.F and self.lat == other.lat

    def __hash__(self):
        return hash((self.F.D, self.lat))

    def __repr__(self):
        return f"FractionalIdeal({self.F.D}: {format_ideal(self)})"

    def __str__(self):
        return format_ideal(self)

    # --- arithmetic
    def __mul__(self, other) -> "FractionalIdeal":
        if isinstance(other, FractionalIdeal):
            return FractionalIdeal.from_generators(
                self.F, [a * b for a in self.gens() for b in other.gens()])
        other = other if isinstance(other, FieldElement) else self.F(other)
        if not other:
            raise InvalidIdeal("scaling by zero")
        return FractionalIdeal.from_generators(self.F, [a * other for a in self.gens()])

    __rmul__ = __mul__

    def __add__(self, other: "FractionalIdeal") -> "FractionalIdeal":
        return FractionalIdeal(self.F, self.lat + other.lat)

    def __and__(self, other: "FractionalIdeal") -> "FractionalIdeal":
        return FractionalIdeal(self.F, self.lat.intersect(other.lat))

    def conjugate(self) -> "FractionalIdeal":
        return FractionalIdeal.from_generators(self.F, [g.conjugate() for g in self.gens()])

    def inverse(self) -> "FractionalIdeal":
        return self.conjugate() * self.F(1 / self.norm())

    def __truediv__(self, other) -> "FractionalIdeal":
        if isinstance(other, FractionalIdeal):
            return self * other.inverse()
        other = other if isinstance(other, FieldElement) else self.F(other)
        return self * other.inverse()

    def __pow__(self, k: int) -> "FractionalIdeal":
        if k < 0:
            return self.inverse() ** (-k)
        out = FractionalIdeal.unit(self.F)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # --- predicates and invariants
    def norm(self) -> Fraction:
        # covolume of O_F in these coordinates is 1
        return self.lat.covolume()

    def __contains__(self, e) -> bool:
        e = e if isinstance(e, FieldElement) else self.F(e)
        return _vec(e) in self.lat

    def contains(self, other: "FractionalIdeal") -> bool:
        return self.lat.contains_lattice(other.lat)

    def is_integral(self) -> bool:
        return self.den == 1

    def is_unit(self) -> bool:
        return self == FractionalIdeal.unit(self.F)

    def divides(self, other: "FractionalIdeal") -> bool:
        """self | other, i.e. other is contained in self."""
        return self.contains(other)

    def is_coprime(self, other: "FractionalIdeal") -> bool:
        return (self + other).is_unit()

    def min_integer(self) -> int:
        """Positive generator of self ∩ Z for an integral ideal."""
        if not self.is_integral():
            raise InvalidIdeal("min_integer needs an integral ideal")
        (a, b), (_, c) = self.basis
        return a * c // math.gcd(b, c)

    def residue(self, e: FieldElement) -> tuple[int, ...]:
        """Canonical representative coordinates of an integral element mod self."""
        return O_lattice(self.F).residue(self.lat, _vec(e))

    def two_generators(self) -> tuple[Fraction, FieldElement]:
        """(m, g) with self = (m, g); m a positive rational."""
        d = self.den
        J = self * self.F(d)
        m = J.min_integer()
        for cand in _small_elements(J):
            if FractionalIdeal.from_generators(self.F, [m, cand]) == J:
                return Fraction(m, d), cand / d
        raise AssertionError("no two-generator form found")

    @cached_property
    def factorization(self) -> list[tuple["FractionalIdeal", int]]:
        return factor(self)

    def valuation(self, P: "FractionalIdeal") -> int:
        for Q, e in self.factorization:
            if Q == P:
                return e
        return 0


def _small_elements(J: FractionalIdeal):
    v1, v2 = J.gens()
    for r in range(0, 50):
        for i in range(-r, r + 1):
            for j in (-r + abs(i), r - abs(i)):
                yield v1 * i + v2 * j


def O_lattice(F: RealQuadraticField) -> RatLattice:
    return RatLattice([[1, 0], [0, 1]], 1, 2)


def unit_ideal(F: RealQuadraticField) -> FractionalIdeal:
    return FractionalIdeal.unit(F)


def ideal_mul(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    return a * b


def ideal_inv(a: FractionalIdeal) -> FractionalIdeal:
    return a.inverse()


def ideal_add(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    return a + b


def ideal_intersect(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    return a & b


def ideal_norm(a: FractionalIdeal) -> Fraction:
    return a.norm()


def different(F: RealQuadraticField) -> FractionalIdeal:
    """(f'(w)) for the minimal polynomial f of w."""
    return FractionalIdeal.principal(F, 2 * F.omega - F.trace_omega)


# --- primes

def primes_above(F: RealQuadraticField, p: int) -> list[FractionalIdeal]:
    """Prime ideals over the rational prime p, by factoring X^2 - T X + N mod p."""
    T, N = F.trace_omega, F.norm_omega
    roots = [r for r in range(p) if (r * r - T * r + N) % p == 0]
    if not roots:
        return [FractionalIdeal.principal(F, p)]
    return [FractionalIdeal.from_generators(F, [p, F.omega - r]) for r in roots]


def _prime_factors(n: int) -> list[int]:
    out, q = [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def _integral_valuation(J: FractionalIdeal, P: FractionalIdeal) -> int:
    e = 0
    Pinv = P.inverse()
    while P.contains(J):
        J = J * Pinv
        e += 1
    return e


def factor(I: FractionalIdeal) -> list[tuple[FractionalIdeal, int]]:
    """Prime factorization with nonzero exponents, sorted by (norm, HNF)."""
    F = I.F
    d = I.den
    J = I * F(d)
    dO = FractionalIdeal.principal(F, d)
    N = J.norm().numerator * d
    out = []
    for p in _prime_factors(N):
        for P in primes_above(F, p):
            e = _integral_valuation(J, P) - _integral_valuation(dO, P)
            if e:
                out.append((P, e))
    out.sort(key=lambda t: (t[0].norm(), t[0].basis))
    return out


# --- printing and parsing

def format_ideal(I: FractionalIdeal) -> str:
    m, g = I.two_generators()
    if FractionalIdeal.principal(I.F, m) == I:
        return f"({m})"
    return f"({m}, {g})"


def ideal_to_json(I: FractionalIdeal) -> dict:
    m, g = I.two_generators()
    return {"two_generator": [str(m), str(g)], "hnf": I.basis, "den": I.den}


_HNF = re.compile(r"^hnf:(\[.*\])(?:/(\d+))?$")


def parse_ideal(F: RealQuadraticField, text: str) -> FractionalIdeal:
    """Parse ``"(g)"``, ``"(a, x+y*w)"`` or ``"hnf:[[a,b],[0,c]]/d"``."""
    s = text.strip().replace(" ", "")
    try:
        m = _HNF.match(s)
        if m:
            rows = ast.literal_eval(m.group(1))
            den = int(m.group(2) or 1)
            if (len(rows) != 2 or any(len(r) != 2 for r in rows)
                    or not all(isinstance(x, int) for r in rows for x in r)):
                raise InvalidIdeal(f"bad HNF matrix in {text!r}")
            lat = RatLattice.from_generators([[Fraction(x, den) for x in r] for r in rows], 2)
            if lat.rank != 2 or any(_times_omega(F, v) not in lat for v in lat.vectors()):
                raise InvalidIdeal(f"HNF lattice {text!r} is not an O_F-ideal")
            return FractionalIdeal(F, lat)
        if not (s.startswith("(") and s.endswith(")")):
            raise InvalidIdeal(f"cannot parse ideal {text!r}")
        parts = [p for p in s[1:-1].split(",")]
        gens = [parse_element(F, p) for p in parts]
        return FractionalIdeal.from_generators(F, gens)
    except InvalidIdeal:
        raise
    except (ValueError, SyntaxError, ZeroDivisionError) as exc:
        raise InvalidIdeal(f"cannot parse ideal {text!r}: {exc}") from exc


# --- principal generators

def _gauss_reduce(b1, b2):
    """Lagrange-Gauss reduction of a planar basis, tracking integer transforms."""
    t1, t2 = (1, 0), (0, 1)
    dot = lambda a, b: a[0] * b[0] + a[1] * b[1]
    while True:
        if dot(b1, b1) > dot(b2, b2):
            b1, b2, t1, t2 = b2, b1, t2, t1
        mu = dot(b1, b2) / dot(b1, b1)
        # the tolerance stops float ties at 1/2 from cycling; the box bound holds for any basis
        if abs(mu) <= 0.5 + 1e-9:
            return b1, b2, t1, t2
        q = round(mu)
        if q == 0:
            return b1, b2, t1, t2
        b2 = (b2[0] - q * b1[0], b2[1] - q * b1[1])
        t2 = (t2[0] - q * t1[0], t2[1] - q * t1[1])


def box_points(v1: FieldElement, v2: FieldElement, B1: float, B2: float):
    """Integer combinations u*v1 + v*v2 with |x_1| <= B1 and |x_2| <= B2.

    Floats only bound the search; callers test candidates exactly. The
    returned set may contain points slightly outside the box.
    """
    e1, e2 = v1.embeddings(), v2.embeddings()
    b1 = (e1[0] / B1, e1[1] / B2)
    b2 = (e2[0] / B1, e2[1] / B2)
    r1, r2, t1, t2 = _gauss_reduce(b1, b2)
    det = abs(r1[0] * r2[1] - r1[1] * r2[0])
    n1 = math.hypot(*r1)
    n2 = math.hypot(*r2)
    rad = math.sqrt(2) * (1 + 1e-9)
    c1max = int(rad * n2 / det) + 1
    c2max = int(rad * n1 / det) + 1
    for c1 in range(-c1max, c1max + 1):
        for c2 in range(-c2max, c2max + 1):
            u = c1 * t1[0] + c2 * t2[0]
            v = c1 * t1[1] + c2 * t2[1]
            yield v1 * u + v2 * v


def find_generator(I: FractionalIdeal, signs: tuple[int, int] | None = None) -> FieldElement | None:
    """An element x with (x) = I, or None if I is not principal.

    With ``signs`` the generator must have that sign vector (None if impossible).
    Multiplying by powers of the fundamental unit moves any generator onto the
    arc sqrt(N/eps) <= |x_1| <= sqrt(N eps) of the hyperbola |x_1 x_2| = N;
    that arc is covered by boxes of ratio 2, so the work grows like log(eps).
    """
    F = I.F
    N = I.norm()
    Nf = float(N)
    eps = F.fund_unit.embeddings()[0]
    lo = math.sqrt(Nf / eps) * (1 - 1e-9)
    hi = math.sqrt(Nf * eps) * (1 + 1e-9)
    v1, v2 = I.gens()
    gen = None
    a = lo
    while a < hi and gen is None:
        for x in box_points(v1, v2, 2 * a * (1 + 1e-9), Nf / a * (1 + 1e-9)):
            if x and abs(x.norm()) == N:
                gen = x
                break
        a *= 2
    if gen is None:
        return None
    if signs is None:
        return gen
    u = F.fund_unit
    for unit in (F.one, -F.one, u, -u):
        y = gen * unit
        if y.sign_vector() == tuple(signs):
            return y
    return None


def is_principal(I: FractionalIdeal, narrow: bool = False) -> bool:
    return find_generator(I, (1, 1) if narrow else None) is not None


# --- lines and rank-two lattices

def canonical_line(x: FieldElement, y: FieldElement) -> tuple[FieldElement, FieldElement]:
    """Representative (x/y : 1) or (1 : 0) of a point of P^1(F)."""
    if y:
        return (x / y, y.F.one)
    if not x:
        raise ValueError("degenerate line (0 : 0)")
    return (x.F.one, x.F.zero)


def det2(u: Sequence[FieldElement], v: Sequence[FieldElement]) -> FieldElement:
    return u[0] * v[1] - u[1] * v[0]


class Lattice2:
    """An O_F-lattice of rank two in F^2 (Z-rank 4, coordinates x1, y1, x2, y2)."""

    __slots__ = ("F", "lat", "__dict__")

    def __init__(self, F: RealQuadraticField, lat: RatLattice):
        if lat.rank != 4:
            raise ValueError("a rank-two O_F-lattice has Z-rank 4")
        self.F = F
        self.lat = lat

    @classmethod
    def from_generators(cls, F: RealQuadraticField, pairs: Iterable) -> "Lattice2":
        vecs = []
        w = F.omega
        for a, b in pairs:
            vecs.append(_vec(a) + _vec(b))
            vecs.append(_vec(a * w) + _vec(b * w))
        return cls(F, RatLattice.from_generators(vecs, 4))

    @classmethod
    def direct_sum(cls, first: FractionalIdeal, second: FractionalIdeal) -> "Lattice2":
        F = first.F
        pairs = [(g, F.zero) for g in first.gens()] + [(F.zero, g) for g in second.gens()]
        return cls.from_generators(F, pairs)

    def vectors(self) -> list[tuple[FieldElement, FieldElement]]:
        return [(self.F(v[0], v[1]), self.F(v[2], v[3])) for v in self.lat.vectors()]

    def __eq__(self, other):
        return isinstance(other, Lattice2) and self.lat == other.lat

    def __hash__(self):
        return hash(self.lat)

    def __repr__(self):
        return f"Lattice2({self.lat.basis}/{self.lat.den})"

    def __contains__(self, pair) -> bool:
        return (_vec(pair[0]) + _vec(pair[1])) in self.lat

    def contains(self, other: "Lattice2") -> bool:
        return self.lat.contains_lattice(other.lat)

    def __add__(self, other: "Lattice2") -> "Lattice2":
        return Lattice2(self.F, self.lat + other.lat)

    def intersect(self, other: "Lattice2") -> "Lattice2":
        return Lattice2(self.F, self.lat.intersect(other.lat))

    def index(self, sub: "Lattice2") -> int:
        return self.lat.index(sub.lat)

    def residue(self, sub: "Lattice2", pair) -> tuple[int, ...]:
        return self.lat.residue(sub.lat, _vec(pair[0]) + _vec(pair[1]))

    def transform(self, M) -> "Lattice2":
        """Image under the row action h -> h M for a 2x2 matrix over F."""
        (a, b), (c, d) = M
        return Lattice2.from_generators(
            self.F, [(h1 * a + h2 * c, h1 * b + h2 * d) for h1, h2 in self.vectors()])

    def scale(self, N: FractionalIdeal) -> "Lattice2":
        """The product N * H."""
        return Lattice2.from_generators(
            self.F, [(n * h1, n * h2) for n in N.gens() for h1, h2 in self.vectors()])

    def det_ideal(self) -> FractionalIdeal:
        vs = self.vectors()
        return FractionalIdeal.from_generators(
            self.F, [det2(vs[i], vs[j]) for i in range(4) for j in range(i + 1, 4)])

    def intersect_line(self, line) -> FractionalIdeal:
        """The ideal {t in F : t * line in H}."""
        x, y = line
        if not x and not y:
            raise ValueError("degenerate line")
        vs = self.vectors()
        rows = [_vec(det2(h, line)) for h in vs]
        ints, _ = _clear(rows)
        ker = kernel(ints)
        ts = []
        for k in ker:
            hx = sum((h[0] * c for h, c in zip(vs, k)), self.F.zero)
            hy = sum((h[1] * c for h, c in zip(vs, k)), self.F.zero)
            ts.append(hx / x if x else hy / y)
        return FractionalIdeal.from_generators(self.F, ts)

    def quotient_ideal(self, line) -> FractionalIdeal:
        """The image of H under h -> det(h, line), i.e. H/(H ∩ L) for line spanning L."""
        return FractionalIdeal.from_generators(self.F, [det2(h, line) for h in self.vectors()])


def lattice_intersect_line(H: Lattice2, line) -> FractionalIdeal:
    return H.intersect_line(line)


def normalizing_ideal(a_ideal: FractionalIdeal, b_ideal: FractionalIdeal, g):
    """(J, I) for the split lattice b + a (a on the second coordinate) and g in GL2+(F).

    J = det(g)^-1 (a + c b^-1 a) and I = det(g) b a (a b + c a)^-1 with
    g = [[a, b], [c, d]].
    """
    (ga, gb), (gc, gd) = g
    F = a_ideal.F
    dg = ga * gd - gb * gc
    if not dg or not dg.is_totally_positive():
        raise ValueError("det(g) must be totally positive")
    binv_a = b_ideal.inverse() * a_ideal
    inner = _sum_scaled([(ga, FractionalIdeal.unit(F)), (gc, binv_a)])
    J = inner * dg.inverse()
    inner2 = _sum_scaled([(ga, b_ideal), (gc, a_ideal)])
    I = b_ideal * a_ideal * inner2.inverse() * dg
    return J, I


def _sum_scaled(terms) -> FractionalIdeal:
    out = None
    for x, J in terms:
        if not x:
            continue
        t = J * x
        out = t if out is None else out + t
    if out is None:
        raise ValueError("zero ideal")
    return out
