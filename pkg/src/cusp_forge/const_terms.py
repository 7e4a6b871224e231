"""Constant terms at cusps, the twisted diamond action, and group-ring coefficients.

An entry at a cusp [C] is a scalar relative to the generator |N(a)|^-k of
N(a)^(-k), where a = H ∩ L for the stored representative label of [C].
Moving between isomorphic labels with a-parts related by u multiplies the
scalar by sgn(N u)^k.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .cusps import (Cusp, CuspLabel, LevelContext, canonical_key, diamond_act, enumerate_p_unramified_cusps,
                    is_admissible, kernel_subgroup, presented_label, stabilizer, standard_label, orbits)
from .cyclotomic import Cyc
from .field import FieldElement
from .groups import Character, prime_ideals
from .hecke import compatible_characters, is_admissible_weight
from .ideals import FractionalIdeal, InvalidIdeal


class ParityError(ValueError):
    """The weight and the sign of the characters do not match."""


def _nsign(x: FieldElement, k: int) -> int:
    return -1 if k % 2 and x.norm() < 0 else 1


def _ord_p(n: int, p: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


# --- the image R of O[G] in the product over characters of one parity

class GroupRingImage:
    """R = image of O[G^+_n] in prod_{sgn psi = eps} O, elements as tuples indexed by chars."""

    def __init__(self, ctx: LevelContext, eps: int, p: int | None = None):
        self.ctx = ctx
        self.G = ctx.Gn
        self.eps = eps
        self.p = p
        self.chars = [chi for chi in self.G.characters() if chi.parity() == eps]
        self.M = max(self.G.exponent, 2 if eps == -1 else 1)
        K = kernel_subgroup(ctx)
        cosets: list = []
        covered: set = set()
        for g in self.G.elements():
            if g not in covered:
                cosets.append(g)
                covered |= {self.G.pres.add(g, k) for k in K}
        self.coset_reps = cosets
        assert len(cosets) == len(self.chars), "parity characters do not match G/K"

    @property
    def order(self) -> int:
        return self.G.order

    def value(self, chi: Character, g) -> Cyc:
        return chi.value(g, self.M)

    def image(self, coeffs: dict) -> tuple[Cyc, ...]:
        """Image of sum_g c_g [g] (keys are group coordinates)."""
        return tuple(sum((Cyc(self.M, [0]) + c * self.value(chi, g) for g, c in coeffs.items()),
                         Cyc(self.M, [0])) for chi in self.chars)

    def psi_bold(self, N: FractionalIdeal) -> tuple[Cyc, ...]:
        """The canonical character G -> R^*, N -> (psi(N))_psi."""
        y = self.G.dlog(N)
        return tuple(self.value(chi, y) for chi in self.chars)

    def scaled_idempotent(self, chi: Character) -> tuple[Cyc, ...]:
        """(#G) e_chi, the image of sum_g chi(g)^-1 [g]."""
        return self.image({g: self.value(chi.inverse(), g) for g in self.G.elements()})

    def coordinates(self, vec) -> list[Cyc]:
        """c with vec = image(sum_j c_j [t_j]) over the coset representatives t_j."""
        m = len(self.chars)
        out = []
        for t in self.coset_reps:
            acc = Cyc(self.M, [0])
            for chi, v in zip(self.chars, vec):
                acc = acc + self.value(chi.inverse(), t) * v
            out.append(acc / m)
        return out

    def contains(self, vec) -> bool:
        c = self.coordinates(vec)
        back = self.image(dict(zip(self.coset_reps, c)))
        assert tuple(back) == tuple(vec)
        if self.p is None:
            return all(x.is_integral() for x in c)
        return all(x.is_p_integral(self.p) for x in c)

    def zero(self) -> tuple[Cyc, ...]:
        return tuple(Cyc(self.M, [0]) for _ in self.chars)


def class_ideals(ctx: LevelContext, p: int | None) -> dict:
    """A prime ideal prime to p n in every class of G^+_n (O_F for the identity)."""
    return _class_ideals(ctx, p)


_CLASS_IDEALS: dict = {}


def _class_ideals(ctx: LevelContext, p):
    key = (id(ctx), p)
    if key not in _CLASS_IDEALS:
        G = ctx.Gn
        out = {G.pres.zero: ctx.O}
        bad = int(ctx.n.norm()) * (p or 1)
        for P in prime_ideals(ctx.F):
            if len(out) == G.order:
                break
            if math.gcd(int(P.norm()), bad) == 1:
                out.setdefault(G.dlog(P), P)
        _CLASS_IDEALS[key] = out
    return _CLASS_IDEALS[key]


def class_generators(ctx: LevelContext, p: int | None) -> list[FractionalIdeal]:
    """Ideals prime to p n whose classes generate G^+_n."""
    G = ctx.Gn
    reps = class_ideals(ctx, p)
    gens, span = [], {G.pres.zero}
    for g in sorted(reps):
        if g not in span:
            gens.append(reps[g])
            frontier = set(span)
            while frontier:
                new = {G.pres.add(a, b) for a in frontier for b in [G.dlog(x) for x in gens]} - span
                span |= new
                frontier = new
    return gens


# --- constant-term vectors

@dataclass
class ConstantTermVector:
    """Entries indexed by cusp keys; each entry is a tuple of Cyc (one per coordinate)."""
    ctx: LevelContext
    k: int
    cusps: dict            # key -> Cusp
    entries: dict          # key -> tuple[Cyc, ...]
    modulus: int | None = None
    labels: tuple = dc_field(default=())  # names of the coordinates

    def keys(self):
        return sorted(self.cusps)

    def _reduce(self, t):
        if self.modulus is None:
            return tuple(t)
        m = self.modulus
        return tuple(Cyc(c.M, [Fraction(int(x) % m) for x in c.c]) for c in t)

    def with_entries(self, entries: dict, k: int | None = None) -> "ConstantTermVector":
        return ConstantTermVector(self.ctx, self.k if k is None else k, self.cusps,
                                  {key: self._reduce(v) for key, v in entries.items()},
                                  self.modulus, self.labels)

    def __eq__(self, other):
        return (isinstance(other, ConstantTermVector) and self.k == other.k
                and set(self.cusps) == set(other.cusps) and self.entries == other.entries)

    def __add__(self, other: "ConstantTermVector") -> "ConstantTermVector":
        return self.with_entries({key: tuple(a + b for a, b in zip(self.entries[key], other.entries[key]))
                                  for key in self.cusps})

    def scale(self, factor) -> "ConstantTermVector":
        """Multiply by a scalar or, coordinatewise, by a tuple."""
        if isinstance(factor, tuple):
            return self.with_entries({key: tuple(a * f for a, f in zip(v, factor)) for key, v in self.entries.items()})
        return self.with_entries({key: tuple(a * factor for a in v) for key, v in self.entries.items()})

    def is_zero(self) -> bool:
        return not any(bool(c) for v in self.entries.values() for c in v)

    def component(self, i: int) -> "ConstantTermVector":
        return ConstantTermVector(self.ctx, self.k, self.cusps,
                                  {key: (v[i],) for key, v in self.entries.items()}, self.modulus)

    def to_json(self) -> list:
        return [{"cusp": list(map(_jsonable, key)), "entry": [c.to_json() for c in self.entries[key]]}
                for key in self.keys()]


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    return x


def multiply(v: ConstantTermVector, w: ConstantTermVector) -> ConstantTermVector:
    """Entrywise product; weights add."""
    if set(v.cusps) != set(w.cusps):
        raise ValueError("different cusp sets")
    out = {key: tuple(a * b for a, b in zip(v.entries[key], w.entries[key])) for key in v.cusps}
    return v.with_entries(out, k=v.k + w.k)


def transport_sign(cusps: dict, C: CuspLabel, k: int) -> tuple[tuple, int]:
    """(key, s): the class of the label C and the factor s taking a scalar at C to one at its representative."""
    key, u, _ = canonical_key(C)
    if key not in cusps:
        raise KeyError(key)
    return key, _nsign(u / _rep_unit(cusps[key]), k)


def _rep_unit(cusp: Cusp) -> FieldElement:
    ctx = cusp.label.ctx
    cache = ctx.__dict__.setdefault("_rep_units", {})
    if cusp.key not in cache:
        cache[cusp.key] = canonical_key(cusp.label)[1]
    return cache[cusp.key]


def _action_table(v: ConstantTermVector, N: FractionalIdeal):
    """key -> (source key, sign) for [N], memoized per ideal, cusp set and parity of k."""
    ctx = v.ctx
    cache = ctx.__dict__.setdefault("_action_tables", {})
    ck = (N, frozenset(v.cusps), v.k % 2)
    if ck not in cache:
        Ninv = N.inverse()
        table = {}
        for key, cusp in v.cusps.items():
            table[key] = transport_sign(v.cusps, diamond_act(Ninv, cusp.label), v.k)
        cache[ck] = table
    return cache[ck]


def diamond_act_const(N: FractionalIdeal, v: ConstantTermVector, p: int | None = None) -> ConstantTermVector:
    """([N] v)_[C] = v_[C ⊗ N^-1], moved to the representative of [C].

    The identification N(a N^-1)^(-k) = N(a)^(-k) by |N(N)|^k sends
    canonical generators to canonical generators, so only the transport
    sign remains.
    """
    ctx = v.ctx
    bad = ctx.n if p is None else ctx.n * p
    if not ((N & ctx.O) + bad).is_unit() or not ((N.inverse() & ctx.O) + bad).is_unit():
        raise InvalidIdeal(f"{N} is not coprime to the level and p")
    table = _action_table(v, N)
    return v.with_entries({key: tuple(c * s for c in v.entries[src]) for key, (src, s) in table.items()})


def constant_cusps(ctx: LevelContext, p: int | None, k: int) -> dict:
    """Admissible p-unramified cusps, keyed by invariant tuple."""
    return {c.key: c for c in enumerate_p_unramified_cusps(ctx, p) if is_admissible(c.label, k)}


def basis_vector(ctx: LevelContext, cusps: dict, k: int, key, M: int = 1) -> ConstantTermVector:
    zero, one = Cyc(M, [0]), Cyc(M, [1])
    return ConstantTermVector(ctx, k, cusps, {c: ((one if c == key else zero),) for c in cusps})


def isotypic_project(v: ConstantTermVector, chi: Character, scaled: bool = True) -> ConstantTermVector:
    """sum_N chi(N)^-1 [N] v over G^+_n; divided by #G unless scaled."""
    par = chi.parity()
    if par is None or par != (-1) ** v.k:
        raise ParityError("sgn(psi) must equal (-1)^k")
    ctx = v.ctx
    G = ctx.Gn
    M = max(G.exponent, 2)
    out = None
    for g, N in sorted(class_ideals(ctx, None).items()):
        w = diamond_act_const(N, _lift(v, M)).scale(chi.inverse().value(g, M))
        out = w if out is None else out + w
    return out if scaled else out.scale(Fraction(1, G.order))


def _lift(v: ConstantTermVector, M: int) -> ConstantTermVector:
    """Re-express entries in Q(zeta_M) when they live in Q (order 1)."""
    def up(c: Cyc) -> Cyc:
        if c.M == M:
            return c
        if c.M == 1:
            return Cyc(M, [c.c[0]])
        raise ValueError("incompatible cyclotomic orders")
    return v.with_entries({key: tuple(up(c) for c in t) for key, t in v.entries.items()})


def isotypic_rank(ctx: LevelContext, p: int | None, k: int, chi: Character) -> int:
    """Rank of C_{p,k}(psi) computed from projections of basis vectors, one per orbit."""
    cusps = constant_cusps(ctx, p, k)
    M = max(ctx.Gn.exponent, 2)
    rank = 0
    for orb in orbits(list(cusps.values())):
        e = basis_vector(ctx, cusps, k, orb[0], M)
        if not isotypic_project(e, chi).is_zero():
            rank += 1
    return rank


def isotypic_rank_oracle(ctx: LevelContext, p: int | None, k: int, chi: Character) -> int:
    """Orbits on which chi * sgn^-k is trivial on the stabilizer."""
    cusps = constant_cusps(ctx, p, k)
    out = 0
    for orb in orbits(list(cusps.values())):
        stab = stabilizer(cusps[orb[0]])
        if all(chi.angle(s.cls) == (Fraction(1, 2) if s.sgn ** k == -1 else 0) for s in stab):
            out += 1
    return out


# --- the vector B

@dataclass
class BVector:
    vector: ConstantTermVector
    ring: GroupRingImage
    p: int | None


def build_B(ctx: LevelContext, p: int | None, k: int, eps: int, checks: bool = True,
            rng: random.Random | None = None) -> BVector:
    """The R-valued constant-term vector supported on the unramified cusps.

    At the label C_lambda ⊗ N^-1 the entry is psi(N) relative to |N(N^-1)|^-k;
    it is moved to the class representative by the transport sign.
    """
    if eps != (-1) ** k:
        raise ParityError("eps must equal (-1)^k")
    if not is_admissible_weight(ctx.F, ctx.n, k):
        raise ValueError(f"weight {k} is not admissible at this level")
    R = GroupRingImage(ctx, eps, p)
    cusps = constant_cusps(ctx, p, k)
    entries: dict = {key: R.zero() for key in cusps}
    assigned: dict = {}
    for lam in ctx.t_lambda:
        C = standard_label(ctx, lam)
        for g, N in sorted(ctx.Gn.representatives.items()):
            key, s = transport_sign(cusps, diamond_act(N.inverse(), C), k)
            val = tuple(x * s for x in R.psi_bold(N))
            if key in assigned:
                assert assigned[key] == val, "B is not well defined"
            assigned[key] = val
    for key, c in cusps.items():
        if c.label.is_unramified():
            assert key in assigned, "unramified cusp outside the standard orbit"
            entries[key] = assigned[key]
    vec = ConstantTermVector(ctx, k, cusps, entries, labels=tuple(chi.j for chi in R.chars))
    B = BVector(vec, R, p)
    if checks:
        check_well_defined(ctx, B, rng or random.Random(0))
        check_isotypic(ctx, B)
    return B


def check_well_defined(ctx: LevelContext, B: BVector, rng: random.Random, trials: int = 2) -> None:
    """Recompute entries from N' = alpha N with alpha = 1 mod n of random signs."""
    R, v, k = B.ring, B.vector, B.vector.k
    G = ctx.Gn
    for lam in ctx.t_lambda:
        C = standard_label(ctx, lam)
        for g, N in sorted(G.representatives.items()):
            for _ in range(trials):
                signs = (rng.choice((1, -1)), rng.choice((1, -1)))
                alpha = G.element_with(ctx.F.one + ctx.ring.m * ctx.F(rng.randint(-3, 3), rng.randint(-3, 3)), signs)
                N2 = N * alpha
                key, s = transport_sign(v.cusps, diamond_act(N2.inverse(), C), k)
                val = tuple(x * s for x in R.psi_bold(N2))
                assert v.entries[key] == val, "B depends on the orbit representative"


def check_isotypic(ctx: LevelContext, B: BVector) -> None:
    """[N'] B = psi(N') B for generators N' of G^+_n."""
    R, v = B.ring, B.vector
    for N in class_generators(ctx, B.p):
        lhs = diamond_act_const(N, v, B.p)
        rhs = v.scale(R.psi_bold(N))
        assert lhs == rhs, "B is not psi-isotypic"


# --- entries at presented cusps

def normalized_entry(v: ConstantTermVector, A, lam=None):
    """The entry of v at C_(A, lambda), relative to |N(a)|^-k for a = H ∩ L_infinity of that label."""
    try:
        C = presented_label(v.ctx, A, lam)
    except ValueError as exc:
        raise InvalidIdeal(f"invalid presentation: {exc}") from exc
    if not C.is_valid():
        raise InvalidIdeal("invalid presentation: gamma is not injective")
    key, s = transport_sign(v.cusps, C, v.k)
    return tuple(c * s for c in v.entries[key])


def presentation_ideal(ctx: LevelContext, A, lam=None) -> FractionalIdeal:
    """det(A)^-1 (a + c t^-1 d^-1), the inverse of H ∩ L_infinity for C_(A, lambda)."""
    (a, b), (c, d) = A
    det = a * d - b * c
    t = ctx.t_lambda[lam if lam is not None else ctx.Cl.pres.zero]
    terms = [x for x in (FractionalIdeal.principal(ctx.F, a) if a else None,
                         (t * ctx.diff).inverse() * c if c else None) if x is not None]
    J = terms[0] if len(terms) == 1 else terms[0] + terms[1]
    return J * det.inverse()


def is_normalized_presentation(ctx: LevelContext, A, lam=None) -> bool:
    """Unramified, with the a-component of gamma(1) equal to 1 modulo n a."""
    C = presented_label(ctx, A, lam)
    if not C.is_valid() or not C.is_unramified():
        return False
    s = C.split
    return (s.va - ctx.F.one) in ctx.n * s.a


def normalize_presentation(ctx: LevelContext, A, lam=None):
    """A diag(1, y) with C_(A diag(1, y), lambda) normalized, or None if C_(A, lambda) is ramified.

    Scaling the second column multiplies a and v_a by y and fixes v_b. With
    y = 1 / (z v_a), z = 1 mod n of the signs of v_a, the new a contains 1/z and
    the new v_a = 1/z is 1 modulo n/z; y is totally positive.
    """
    C = presented_label(ctx, A, lam)
    if not C.is_valid() or not C.is_unramified():
        return None
    va = C.split.va
    if not va:
        # level one: v_a is only defined modulo a, so any element of a represents it
        va = C.split.a.gens()[0]
    z = ctx.Gn.element_with(ctx.F.one, va.sign_vector())
    y = (z * va).inverse()
    (a, b), (c, d) = A
    return [[a, b * y], [c, d * y]]


# --- f_k

def ones_vector(ctx: LevelContext, k: int, modulus: int | None = None) -> ConstantTermVector:
    """All entries 1 on Cusp(n); odd k only modulo 2."""
    if k % 2 and modulus != 2:
        raise ValueError("odd weight needs characteristic 2")
    cusps = {c.key: c for c in enumerate_p_unramified_cusps(ctx, None)}
    one = Cyc(1, [1])
    return ConstantTermVector(ctx, k, cusps, {key: (one,) for key in cusps}, modulus)


# --- lifting

@dataclass
class LiftTarget:
    vector: ConstantTermVector
    quotient: Fraction     # #G / p^m
    valuation: int         # ord_p of the quotient


def lift_target(R: GroupRingImage, consts: dict, m: int) -> LiftTarget:
    """The R-valued vector with chi-component (#G / p^m) const(f_chi)."""
    p = R.p
    if p is None:
        raise ValueError("lifting needs a prime p")
    order = R.order
    if m < _ord_p(order, p):
        raise ValueError("m must be at least ord_p(#G)")
    pm = p ** m
    vecs = [consts.get(chi) for chi in R.chars]
    base = next(v for v in vecs if v is not None)
    zero = Cyc(R.M, [0])
    q = Fraction(order, pm)
    entries = {}
    for key in base.cusps:
        comp = []
        for v in vecs:
            x = zero if v is None else _lift(v, R.M).entries[key][0]
            if not (x / pm).is_p_integral(p):
                raise ValueError("constant term not divisible by p^m")
            comp.append(x * q)
        t = tuple(comp)
        assert R.contains(t), "lift target outside R"
        entries[key] = t
    vec = ConstantTermVector(base.ctx, base.k, base.cusps, entries, labels=tuple(c.j for c in R.chars))
    val = _ord_p(q.numerator, p) - _ord_p(q.denominator, p)
    return LiftTarget(vec, q, val)


def specialize(v: ConstantTermVector, R: GroupRingImage, chi: Character) -> ConstantTermVector:
    return v.component(R.chars.index(chi))
