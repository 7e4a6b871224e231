"""Units, (O/n)^*, class groups and ray class groups with discrete logarithms.

Every finite group here is presented by a triangular relation matrix built
greedily from explicit generators, then diagonalized with a Smith normal form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Hashable, Sequence

from .cyclotomic import Cyc, root_of_unity_value
from .field import FieldElement, RealQuadraticField
from .ideals import FractionalIdeal, InvalidIdeal, O_lattice, _prime_factors, find_generator, primes_above
from .zlinalg import snf


# --- greedy presentations

def greedy_presentation(candidates, mul, key, one, lookup=None, order=None):
    """Present the group generated by ``candidates``.

    Returns ``(gens, rels, table)`` where ``table`` maps keys of all enumerated
    elements to exponent vectors (when ``lookup`` is None). With ``lookup``
    given, membership of x in the current subgroup is decided by
    ``lookup(x, table)`` which returns an exponent vector or None; this is how
    classes of ideals are handled.
    """
    gens = []
    rels: list[list[int]] = []
    elems = [(one, ())]  # (element, exponent vector)
    table = {key(one): ()} if lookup is None else {}

    def find(x):
        if lookup is None:
            return table.get(key(x))
        return lookup(x, elems)

    for g in candidates:
        if order is not None and len(elems) >= order:
            break
        if find(g) is not None:
            continue
        m, power = 1, g
        while True:
            hit = find(power)
            if hit is not None:
                break
            power = mul(power, g)
            m += 1
        rel = [-c for c in hit] + [m]
        rels = [r + [0] for r in rels] + [rel]
        gens.append(g)
        new = []
        gpow = one
        for i in range(m):
            for x, vec in elems:
                y = mul(x, gpow) if i else x
                new.append((y, tuple(vec) + (i,)))
            gpow = mul(gpow, g)
        elems = new
        if lookup is None:
            table = {key(x): v for x, v in elems}
    return gens, rels, elems


class AbelianPresentation:
    """Z^k / rowspan(rels) with Smith coordinates."""

    def __init__(self, rels: Sequence[Sequence[int]], k: int):
        self.k = k
        if k == 0:
            self.invariants, self._V, self._keep = [], [], []
            return
        rows = [list(r) for r in rels] or [[0] * k]
        D, _, V = snf(rows)
        diag = [D[i][i] if i < len(D) else 0 for i in range(k)]
        if any(d == 0 for d in diag):
            raise ValueError("relation matrix does not present a finite group")
        self._V = V
        self._keep = [i for i, d in enumerate(diag) if d != 1]
        self.invariants = [diag[i] for i in self._keep]

    @property
    def order(self) -> int:
        return math.prod(self.invariants)

    def reduce(self, vec: Sequence[int]) -> tuple[int, ...]:
        """Smith coordinates of an exponent vector."""
        if self.k == 0:
            return ()
        y = [sum(vec[r] * self._V[r][c] for r in range(self.k)) for c in range(self.k)]
        return tuple(y[i] % d for i, d in zip(self._keep, self.invariants))

    def elements(self) -> list[tuple[int, ...]]:
        out = [()]
        for d in self.invariants:
            out = [e + (i,) for e in out for i in range(d)]
        return out

    def add(self, a, b):
        return tuple((x + y) % d for x, y, d in zip(a, b, self.invariants))

    def neg(self, a):
        return tuple((-x) % d for x, d in zip(a, self.invariants))

    def scale(self, a, m: int):
        return tuple((m * x) % d for x, d in zip(a, self.invariants))

    def elem_order(self, a) -> int:
        o = 1
        for x, d in zip(a, self.invariants):
            o = o * (d // math.gcd(d, x)) // math.gcd(o, d // math.gcd(d, x))
        return o

    @property
    def zero(self):
        return tuple(0 for _ in self.invariants)


# --- O/n

class ResidueRing:
    """The ring O/n for an integral ideal n, with its unit group."""

    def __init__(self, n: FractionalIdeal):
        if not n.is_integral():
            raise InvalidIdeal("modulus must be integral")
        self.n = n
        self.F = n.F
        self.m = n.min_integer()
        self._O = O_lattice(self.F)

    def reduce(self, x: FieldElement) -> tuple[int, ...]:
        """Residue of x mod n; x may have a denominator prime to n ∩ Z."""
        d = math.lcm(x.x.denominator, x.y.denominator)
        if d != 1:
            if math.gcd(d, self.m) != 1:
                raise ValueError("denominator not invertible modulo n")
            # x = y/d with y integral; use y * d^-1 mod (n ∩ Z)
            x = x * (d * _inv_mod(d, self.m))
        return self._O.residue(self.n.lat, [x.x, x.y])

    def element(self, r: Sequence[int]) -> FieldElement:
        v = self._O.element(r)
        return self.F(v[0], v[1])

    @cached_property
    def all_residues(self) -> list[tuple[int, ...]]:
        return self._O.coset_reps(self.n.lat)

    @property
    def size(self) -> int:
        return len(self.all_residues)

    def is_unit(self, x: FieldElement) -> bool:
        return (FractionalIdeal.principal(self.F, x) + self.n).is_unit() if x else self.n.is_unit()

    def mul(self, a, b):
        return self.reduce(self.element(a) * self.element(b))

    @cached_property
    def unit_residues(self) -> list[tuple[int, ...]]:
        return [r for r in self.all_residues if self.is_unit(self.element(r))]

    @cached_property
    def _unit_presentation(self):
        one = self.reduce(self.F.one)
        gens, rels, elems = greedy_presentation(
            self.unit_residues, self.mul, lambda r: r, one)
        table = {x: v for x, v in elems}
        return gens, rels, table

    @property
    def unit_gens(self) -> list[tuple[int, ...]]:
        return self._unit_presentation[0]

    @property
    def unit_rels(self) -> list[list[int]]:
        return self._unit_presentation[1]

    def unit_dlog(self, x: FieldElement) -> tuple[int, ...]:
        """Exponent vector of x in the greedy generators of (O/n)^*."""
        r = self.reduce(x)
        v = self._unit_presentation[2].get(r)
        if v is None:
            raise ValueError(f"{x} is not a unit modulo n")
        return v

    @cached_property
    def unit_group(self) -> AbelianPresentation:
        return AbelianPresentation(self.unit_rels, len(self.unit_gens))

    def unit_order(self) -> int:
        return len(self.unit_residues)

    def mult_order(self, x: FieldElement) -> int:
        one = self.reduce(self.F.one)
        r = self.reduce(x)
        p, k = r, 1
        while p != one:
            p = self.mul(p, r)
            k += 1
        return k


def _inv_mod(d: int, m: int) -> int:
    return pow(d, -1, m) if m > 1 else 0


# --- units

class UnitData:
    """Generators of U^+, U_{1,n}, U^+_{1,n} as elements of F."""

    def __init__(self, F: RealQuadraticField, n: FractionalIdeal):
        self.F = F
        self.n = n
        self.ring = ResidueRing(n)
        self.eps = F.fund_unit
        self.eps_norm = int(self.eps.norm())
        self.eta = self.eps if self.eps_norm == 1 else self.eps * self.eps
        R = self.ring
        one = R.reduce(F.one)
        minus_one_trivial = R.reduce(-F.one) == one
        # smallest j with eps^j = +-1 mod n
        j, p = 1, self.eps
        while R.reduce(p) not in (one, R.reduce(-F.one)):
            p = p * self.eps
            j += 1
        self.eps_order_pm = j
        g = p if R.reduce(p) == one else -p
        self.u1n_gens = [g] + ([-F.one] if minus_one_trivial else [])
        self.eps_order = R.mult_order(self.eps) if R.size > 1 else 1
        t = R.mult_order(self.eta) if R.size > 1 else 1
        self.u1n_plus_gen = self.eta ** t

    @property
    def uplus_gen(self) -> FieldElement:
        return self.eta

    def signs(self) -> dict:
        return {"-1": [-1, -1], "eps": list(self.eps.sign_vector())}

    def u1n_norms(self) -> list[int]:
        return [int(u.norm()) for u in self.u1n_gens]


# --- class groups

def minkowski_bound(F: RealQuadraticField) -> float:
    return math.sqrt(F.disc) / 2


def primes_up_to_norm(F: RealQuadraticField, bound: float) -> list[FractionalIdeal]:
    out = []
    p = 2
    while p <= bound:
        if all(p % q for q in range(2, int(p ** 0.5) + 1)):
            out.extend(P for P in primes_above(F, p) if P.norm() <= bound)
        p += 1
    out.sort(key=lambda P: (P.norm(), P.basis))
    return out


def prime_ideals(F: RealQuadraticField):
    """All prime ideals in order of increasing norm."""
    p = 2
    pending: list[FractionalIdeal] = []
    while True:
        if all(p % q for q in range(2, int(p ** 0.5) + 1)):
            pending.extend(primes_above(F, p))
        pending.sort(key=lambda P: (P.norm(), P.basis))
        while pending and pending[0].norm() <= p:
            yield pending.pop(0)
        p += 1


def _ideal_lookup(I: FractionalIdeal, elems):
    for R, vec in elems:
        if find_generator(I * R.inverse()) is not None:
            return vec
    return None


@lru_cache(maxsize=None)
def _wide_class_group(D: int):
    from .field import field
    F = field(D)
    cands = primes_up_to_norm(F, minkowski_bound(F))
    gens, rels, elems = greedy_presentation(
        cands, lambda a, b: a * b, None, FractionalIdeal.unit(F), lookup=_ideal_lookup)
    return gens, rels, len(elems)


def class_number(F: RealQuadraticField) -> int:
    return _wide_class_group(F.D)[2]


def _signbits(x: FieldElement) -> list[int]:
    return [0 if s > 0 else 1 for s in x.sign_vector()]


def _prod_ideals(F, gens, exps) -> FractionalIdeal:
    out = FractionalIdeal.unit(F)
    for g, e in zip(gens, exps):
        if e:
            out = out * g ** e
    return out


class RayClassGroup:
    """G_n (wide) or G_n^+ (narrow): ideals prime to n modulo principal ideals
    (a) with a = 1 mod n (and a totally positive when narrow).

    Internal coordinates are (class-group exponents, (O/n)^* exponents, sign bits).
    """

    def __init__(self, F: RealQuadraticField, n: FractionalIdeal, narrow: bool = True):
        self.F = F
        self.n = n
        self.narrow = narrow
        self.ring = ResidueRing(n)
        self.units = UnitData(F, n)
        norm_n = int(n.norm())
        base_gens, cl_rels, self.h = _wide_class_group(F.D)
        # replace class generators by primes over rational primes prime to N(n)
        self.cl_gens = [self._coprime_rep(g, norm_n) for g in base_gens]
        self.cl_rels = cl_rels
        k1 = len(self.cl_gens)
        k2 = len(self.ring.unit_gens)
        s = 2 if narrow else 0
        self._k = (k1, k2, s)
        rows = []
        self.cl_witnesses = []
        for R in cl_rels:
            x = find_generator(_prod_ideals(F, self.cl_gens, R))
            assert x is not None, "class relation is not principal"
            self.cl_witnesses.append(x)
            rows.append(list(R) + [-c for c in self.img(x)])
        for r in self.ring.unit_rels:
            rows.append([0] * k1 + list(r) + [0] * s)
        for i in range(s):
            rows.append([0] * (k1 + k2) + [2 if j == i else 0 for j in range(s)])
        for u in (-F.one, self.units.eps):
            rows.append([0] * k1 + self.img(u))
        self.rels = rows
        self.pres = AbelianPresentation(rows, k1 + k2 + s)
        # representatives R_e of the wide classes, with exponent vectors
        self._cl_elems = []
        for e in _box([r[i] for i, r in enumerate(cl_rels)]):
            self._cl_elems.append((_prod_ideals(F, self.cl_gens, e), e))

    def _coprime_rep(self, g: FractionalIdeal, norm_n: int) -> FractionalIdeal:
        if math.gcd(int(g.norm()), norm_n) == 1:
            return g
        for P in prime_ideals(self.F):
            if math.gcd(int(P.norm()), norm_n) == 1 and find_generator(P * g.inverse()) is not None:
                return P
        raise AssertionError("unreachable")

    # --- coordinates
    def img(self, x: FieldElement) -> list[int]:
        """Internal (unit, sign) coordinates of the principal ideal (x), x prime to n."""
        v = list(self.ring.unit_dlog(x)) if self._k[1] else []
        return v + (_signbits(x) if self.narrow else [])

    @property
    def invariant_factors(self) -> list[int]:
        return self.pres.invariants

    @property
    def order(self) -> int:
        return self.pres.order

    @property
    def exponent(self) -> int:
        return math.lcm(*self.invariant_factors) if self.invariant_factors else 1

    def elements(self):
        return self.pres.elements()

    def is_coprime(self, I: FractionalIdeal) -> bool:
        return all(not any(P == Q for Q, _ in self.n.factorization) for P, _ in I.factorization)

    def dlog(self, I: FractionalIdeal) -> tuple[int, ...]:
        if not self.is_coprime(I):
            raise InvalidIdeal(f"{I} is not coprime to the modulus")
        if I.is_integral():
            return self._dlog_integral(I)
        pos = _prod_ideals(self.F, [P for P, e in I.factorization if e > 0],
                           [e for _, e in I.factorization if e > 0])
        neg = _prod_ideals(self.F, [P for P, e in I.factorization if e < 0],
                           [-e for _, e in I.factorization if e < 0])
        return self.pres.add(self._dlog_integral(pos), self.pres.neg(self._dlog_integral(neg)))

    def _dlog_integral(self, I: FractionalIdeal) -> tuple[int, ...]:
        for R, e in self._cl_elems:
            x = find_generator(I * R.inverse())
            if x is not None:
                return self.pres.reduce(list(e) + self.img(x))
        raise AssertionError("ideal class not found")

    def element_with(self, residue: FieldElement, signs=(1, 1)) -> FieldElement:
        """Some a in O with a = residue mod n and the given sign vector."""
        m = self.ring.m
        base = residue
        for r in range(0, 200):
            for a in range(-r, r + 1):
                for b in {-(r - abs(a)), r - abs(a)}:
                    x = base + m * self.F(a, b)
                    if x and x.sign_vector() == tuple(signs):
                        return x
        raise AssertionError("no element with prescribed signs found")

    @cached_property
    def sign_witnesses(self) -> dict[tuple[int, int], FieldElement]:
        """alpha = 1 mod n with sign vectors (-,+) and (+,-)."""
        return {s: self.element_with(self.F.one, s) for s in ((-1, 1), (1, -1))}

    @cached_property
    def kernel_to_wide(self) -> list[tuple[int, ...]]:
        """Images of the sign witnesses: generators of ker(G^+_n -> G_n)."""
        if not self.narrow:
            return []
        return [self.dlog(FractionalIdeal.principal(self.F, a)) for a in self.sign_witnesses.values()]

    @cached_property
    def representatives(self) -> dict[tuple[int, ...], FractionalIdeal]:
        """An integral ideal prime to n in every class."""
        out: dict[tuple[int, ...], FractionalIdeal] = {}
        R = self.ring
        unit_elems = [R.element(r) for r in R.unit_residues]
        signs = [(1, 1), (-1, 1), (1, -1), (-1, -1)] if self.narrow else [(1, 1)]
        for Rc, e in self._cl_elems:
            for u in unit_elems:
                for s in signs:
                    vec = list(e) + list(R.unit_dlog(u) if self._k[1] else []) + (
                        [0 if c > 0 else 1 for c in s] if self.narrow else [])
                    key = self.pres.reduce(vec)
                    if key not in out:
                        out[key] = Rc * self.element_with(u, s)
                    if len(out) == self.order:
                        return out
        assert len(out) == self.order
        return out

    def generators(self) -> list[FractionalIdeal]:
        """Ideals whose classes generate the group (one per presentation generator)."""
        F = self.F
        gens = list(self.cl_gens)
        for r in self.ring.unit_gens:
            gens.append(FractionalIdeal.principal(F, self.element_with(self.ring.element(r))))
        if self.narrow:
            gens.extend(FractionalIdeal.principal(F, a) for a in self.sign_witnesses.values())
        return gens

    def characters(self) -> list["Character"]:
        return [Character(self, j) for j in self.elements()]

    def wide(self) -> "RayClassGroup":
        return RayClassGroup(self.F, self.n, narrow=False)


def _box(bounds: Sequence[int]):
    out = [()]
    for b in bounds:
        out = [e + (i,) for e in out for i in range(b)]
    return out


def ray_class_group(F: RealQuadraticField, n: FractionalIdeal, narrow: bool = True) -> RayClassGroup:
    return _cached_rcg(F.D, n.lat, narrow, n)


_RCG_CACHE: dict = {}


def _cached_rcg(D, lat, narrow, n):
    key = (D, lat, narrow)
    if key not in _RCG_CACHE:
        _RCG_CACHE[key] = RayClassGroup(n.F, n, narrow)
    return _RCG_CACHE[key]


def dlog(G: RayClassGroup, a: FractionalIdeal) -> tuple[int, ...]:
    return G.dlog(a)


def characters(G: RayClassGroup) -> list["Character"]:
    return G.characters()


class Character:
    """The character y -> exp(2 pi i sum j_i y_i / d_i) of a ray class group."""

    __slots__ = ("G", "j")

    def __init__(self, G: RayClassGroup, j: Sequence[int]):
        self.G = G
        self.j = tuple(int(x) % d for x, d in zip(j, G.invariant_factors))

    def __eq__(self, other):
        return isinstance(other, Character) and other.G is self.G and other.j == self.j

    def __hash__(self):
        return hash(self.j)

    def __repr__(self):
        return f"Character{self.j}"

    def angle(self, y: Sequence[int]) -> Fraction:
        """Value at Smith coordinates y as an element of Q/Z in [0, 1)."""
        t = sum((Fraction(a * b, d) for a, b, d in zip(self.j, y, self.G.invariant_factors)), Fraction(0))
        return t - math.floor(t)

    def __call__(self, I: FractionalIdeal) -> Fraction:
        return self.angle(self.G.dlog(I))

    def value(self, y: Sequence[int], M: int | None = None) -> Cyc:
        return root_of_unity_value(M or self.G.exponent, self.angle(y))

    def __mul__(self, other: "Character") -> "Character":
        return Character(self.G, [a + b for a, b in zip(self.j, other.j)])

    def inverse(self) -> "Character":
        return Character(self.G, [-a for a in self.j])

    def is_trivial(self) -> bool:
        return not any(self.j)

    def order(self) -> int:
        return self.G.pres.elem_order(self.j)

    def parity(self) -> int | None:
        """+1 or -1 when the restriction to ker(G^+_n -> G_n) is s -> sgn(N s)^0 or ^1."""
        vals = {self.angle(k) for k in self.G.kernel_to_wide}
        if not vals or vals == {Fraction(0)}:
            return 1
        if vals == {Fraction(1, 2)}:
            return -1
        return None


@lru_cache(maxsize=None)
def wide_class_reps(D: int) -> tuple[FractionalIdeal, ...]:
    """One integral ideal per wide ideal class; the first is O_F."""
    from .field import field
    F = field(D)
    gens, rels, _ = _wide_class_group(D)
    return tuple(_prod_ideals(F, gens, e) for e in _box([r[i] for i, r in enumerate(rels)]))


def narrow_class_group(F: RealQuadraticField) -> RayClassGroup:
    return ray_class_group(F, FractionalIdeal.unit(F), narrow=True)
