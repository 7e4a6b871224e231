"""Component labels, cusp labels and cusps of level n.

A cusp label (H, v, sigma, L) is stored with H an O_F-lattice in F^2, v in H
the image of 1 under gamma (meaningful modulo nH), sigma the sign vector of
the positive cone of det(H) inside F, and L a line of F^2.

Choosing m' with det(m', l) = 1 and b m' in H splits H = b m' + a l with
a = H ∩ L and b = det(H, l).  In the coordinates (b-part, a-part) the
determinant is preserved, so the split label is (a, b, v_a, v_b, sigma).
Isomorphisms of split labels are the row-action matrices [[w, mu], [0, u]]
with u a1 = a2, w b1 = b2, mu in b1^-1 a2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

from .field import FieldElement, RealQuadraticField, field
from .groups import ResidueRing, UnitData, narrow_class_group, prime_ideals, ray_class_group, wide_class_reps
from .ideals import (FractionalIdeal, InvalidIdeal, Lattice2, _vec, box_points, canonical_line, det2, different,
                     find_generator)
from .zlinalg import solve


def _sign_mul(s, t) -> tuple[int, int]:
    return (s[0] * t[0], s[1] * t[1])


class LevelContext:
    """Data shared by all cusp computations at a fixed (F, n)."""

    def __init__(self, F: RealQuadraticField, n: FractionalIdeal):
        if not n.is_integral() or not n.norm():
            raise InvalidIdeal("level must be a nonzero integral ideal")
        self.F = F
        self.n = n
        self.O = FractionalIdeal.unit(F)
        self.ring = ResidueRing(n)
        self.units = UnitData(F, n)
        self.eps = F.fund_unit
        self.eps_norm = int(self.eps.norm())
        self.diff = different(F)
        self.class_reps = wide_class_reps(F.D)
        self.Gn = ray_class_group(F, n, narrow=True)
        self.Cl = narrow_class_group(F)
        # exponent period for units acting on residues mod n together with signs
        self.period = math.lcm(2, self.units.eps_order)
        units = []
        seen = set()
        for s in (1, -1):
            e = F.one * s
            for i in range(self.period):
                key = (self.ring.reduce(e), e.sign_vector())
                if key not in seen:
                    seen.add(key)
                    units.append((e, s, i))
                e = e * self.eps
        self.unit_reps = units
        self._class_cache: dict = {}

    # --- ideal classes
    def class_rep(self, I: FractionalIdeal):
        """(index, R, x) with R the chosen representative of the wide class of I and x I = R."""
        hit = self._class_cache.get(I.lat)
        if hit is None:
            Iinv = I.inverse()
            for idx, R in enumerate(self.class_reps):
                x = find_generator(R * Iinv)
                if x is not None:
                    hit = (idx, R, x)
                    break
            else:
                raise AssertionError("ideal class not found")
            self._class_cache[I.lat] = hit
        return hit

    @cached_property
    def t_lambda(self) -> dict[tuple[int, ...], FractionalIdeal]:
        """Representatives t_lambda of Cl^+(F), prime to n; the trivial class gets O_F."""
        Cl = self.Cl
        out = {Cl.pres.zero: self.O}
        norm_n = int(self.n.norm())
        for P in prime_ideals(self.F):
            if len(out) == Cl.order:
                break
            if math.gcd(int(P.norm()), norm_n) != 1:
                continue
            out.setdefault(Cl.dlog(P), P)
        return out

    def element_one_mod(self, N: FractionalIdeal) -> FieldElement:
        """x in N with x = 1 mod n, for N integral and coprime to n."""
        rows = [list(b) for b in N.basis] + [list(b) for b in self.n.basis]
        c = solve(rows, [1, 0])
        if c is None:
            raise InvalidIdeal(f"{N} is not coprime to the level")
        v = [sum(c[i] * rows[i][j] for i in range(2)) for j in range(2)]
        return self.F(v[0], v[1])


@lru_cache(maxsize=None)
def _context(D: int, lat) -> LevelContext:
    F = field(D)
    return LevelContext(F, FractionalIdeal(F, lat))


def level_context(F: RealQuadraticField, n: FractionalIdeal) -> LevelContext:
    return _context(F.D, n.lat)


@dataclass(frozen=True)
class Split:
    a: FractionalIdeal
    b: FractionalIdeal
    va: FieldElement
    vb: FieldElement
    tau: tuple[int, int]
    m_prime: tuple[FieldElement, FieldElement]


class CuspLabel:
    """A cusp label at level n; v is reduced to a canonical residue mod nH."""

    def __init__(self, ctx: LevelContext, H: Lattice2, v, sigma=(1, 1), line=None):
        F = ctx.F
        self.ctx = ctx
        self.H = H
        self.sigma = tuple(sigma)
        x, y = line if line is not None else (F.zero, F.one)
        self.line = canonical_line(x, y)
        if tuple(v) not in H:
            raise ValueError("gamma(1) must lie in H")
        nH = self.nH
        r = H.residue(nH, v)
        w = H.lat.element(r)
        self.v = (F(w[0], w[1]), F(w[2], w[3]))

    @cached_property
    def nH(self) -> Lattice2:
        return self.H.scale(self.ctx.n)

    @property
    def F(self) -> RealQuadraticField:
        return self.ctx.F

    def __repr__(self):
        return f"CuspLabel(H={self.H!r}, v={self.v}, sigma={self.sigma}, L={self.line})"

    @cached_property
    def split(self) -> Split:
        F = self.F
        l = self.line
        a = self.H.intersect_line(l)
        b = self.H.quotient_ideal(l)
        # M = {m : b m ⊂ H}
        M = None
        for s in b.gens():
            Ms = self.H.scale(FractionalIdeal.principal(F, s.inverse()))
            M = Ms if M is None else M.intersect(Ms)
        vs = M.vectors()
        rows = [_vec(det2(m, l)) for m in vs]
        den = math.lcm(*(q.denominator for r in rows for q in r))
        c = solve([[int(q * den) for q in r] for r in rows], [den, 0])
        assert c is not None, "no complement to the line"
        mp = (sum((m[0] * k for m, k in zip(vs, c)), F.zero),
              sum((m[1] * k for m, k in zip(vs, c)), F.zero))
        vb = det2(self.v, l)
        rest = (self.v[0] - vb * mp[0], self.v[1] - vb * mp[1])
        va = rest[0] / l[0] if l[0] else rest[1] / l[1]
        return Split(a, b, va, vb, self.sigma, mp)

    # --- predicates
    def is_valid(self) -> bool:
        """gamma is injective: the annihilator of v mod nH is exactly n."""
        s = self.split
        return annihilator(self.ctx, s) == self.ctx.n

    def is_unramified(self) -> bool:
        s = self.split
        return s.vb in self.ctx.n * s.b

    @cached_property
    def key(self):
        return canonical_key(self)[0]


def colon(target: FractionalIdeal, x: FieldElement) -> FractionalIdeal:
    """{y in O_F : y x in target}."""
    F = target.F
    O = FractionalIdeal.unit(F)
    if not x:
        return O
    return O & (target * x.inverse())


def annihilator(ctx: LevelContext, s: Split) -> FractionalIdeal:
    n = ctx.n
    return colon(n * s.a, s.va) & colon(n * s.b, s.vb)


# --- standard labels

def standard_lattice(ctx: LevelContext, t: FractionalIdeal) -> Lattice2:
    return Lattice2.direct_sum(t * ctx.diff, ctx.O)


def standard_label(ctx: LevelContext, lam=None) -> CuspLabel:
    """(alpha_lambda, L_infinity) for the narrow class lam (default: trivial class)."""
    t = ctx.t_lambda[lam if lam is not None else ctx.Cl.pres.zero]
    F = ctx.F
    return CuspLabel(ctx, standard_lattice(ctx, t), (F.zero, F.one))


def presented_label(ctx: LevelContext, A, lam=None) -> CuspLabel:
    """C_(A, lambda) = (A^-1 alpha_lambda, L_infinity) for A in GL2+(F)."""
    (a, b), (c, d) = A
    det = a * d - b * c
    if not det or not det.is_totally_positive():
        raise ValueError("det(A) must be totally positive")
    t = ctx.t_lambda[lam if lam is not None else ctx.Cl.pres.zero]
    H = standard_lattice(ctx, t).transform(A)
    return CuspLabel(ctx, H, (c, d))


def point_label(ctx: LevelContext, point, lam=None) -> CuspLabel:
    """The cusp of the component lambda at the point (x : y) of P^1(F)."""
    t = ctx.t_lambda[lam if lam is not None else ctx.Cl.pres.zero]
    F = ctx.F
    return CuspLabel(ctx, standard_lattice(ctx, t), (F.zero, F.one), line=point)


def from_split(ctx: LevelContext, a: FractionalIdeal, b: FractionalIdeal, vb, va, tau=(1, 1)) -> CuspLabel:
    """The label b + a (a on L_infinity) with gamma(1) = (vb, va)."""
    return CuspLabel(ctx, Lattice2.direct_sum(b, a), (vb, va), tau)


# --- equivalence

def _reduced(ctx: LevelContext, s: Split):
    ia, A, u0 = ctx.class_rep(s.a)
    ib, B, w0 = ctx.class_rep(s.b)
    return ia, A, u0, ib, B, w0


def _J(ctx: LevelContext, A, B, vb) -> FractionalIdeal:
    nA = ctx.n * A
    return nA + B.inverse() * A * vb if vb else nA


def canonical_key(label: CuspLabel):
    """(key, u, w): the invariant tuple of the cusp and the (a, b) scalings reaching it."""
    ctx = label.ctx
    s = label.split
    ia, A, u0, ib, B, w0 = _reduced(ctx, s)
    vb = w0 * s.vb
    va = u0 * s.va
    tau = _sign_mul(s.tau, (u0 * w0).sign_vector())
    nB = ctx.n * B
    best_b, W = None, []
    for w, _, _ in ctx.unit_reps:
        r = B.lat.residue(nB.lat, _vec(w * vb))
        if best_b is None or r < best_b:
            best_b, W = r, [w]
        elif r == best_b:
            W.append(w)
    J = _J(ctx, A, B, vb)
    # u only matters through u * va mod J, w only through its sign
    w_by_sign = {}
    for w in W:
        w_by_sign.setdefault(w.sign_vector(), w)
    best = None
    for u, _, _ in ctx.unit_reps:
        r = A.lat.residue(J.lat, _vec(u * va))
        su = u.sign_vector()
        for sw, w in w_by_sign.items():
            cand = (r, _sign_mul(tau, _sign_mul(su, sw)))
            if best is None or cand < best[0]:
                best = (cand, u, w)
    (ka, t), u, w = best
    return (ia, ib, best_b, ka, t), u * u0, w * w0


def is_isomorphism(ctx: LevelContext, s1: Split, s2: Split, u: FieldElement, w: FieldElement) -> bool:
    """Does some mu make [[w, mu], [0, u]] an isomorphism of split labels?"""
    if s1.a * u != s2.a or s1.b * w != s2.b:
        return False
    if _sign_mul(s1.tau, (u * w).sign_vector()) != s2.tau:
        return False
    n = ctx.n
    if (w * s1.vb - s2.vb) not in n * s2.b:
        return False
    J = _J(ctx, s2.a, s1.b, s1.vb)
    return (s2.va - u * s1.va) in J


def isomorphism_witness(ctx: LevelContext, s1: Split, s2: Split, u: FieldElement, w: FieldElement):
    """An explicit mu for an isomorphism (u, w); None if there is none."""
    if not is_isomorphism(ctx, s1, s2, u, w):
        return None
    n = ctx.n
    d = s2.va - u * s1.va
    # d = mu vb1 + x with mu in b1^-1 a2, x in n a2
    M = s1.b.inverse() * s2.a
    if not s1.vb:
        return ctx.F.zero
    gens = [g * s1.vb for g in M.gens()] + list((n * s2.a).gens())
    rows = [_vec(g) for g in gens]
    den = math.lcm(*(q.denominator for r in rows + [_vec(d)] for q in r))
    c = solve([[int(q * den) for q in r] for r in rows], [int(q * den) for q in _vec(d)])
    assert c is not None
    return sum((g * k for g, k in zip(M.gens(), c[:2])), ctx.F.zero)


def cusp_equiv(C1: CuspLabel, C2: CuspLabel, witness: bool = False):
    """Structural equivalence test via upper-triangular isomorphisms.

    Independent of the canonical key: u and w are searched among a fixed
    generator times the finite set of unit representatives.
    """
    if C1.ctx is not C2.ctx:
        raise ValueError("labels over different fields or levels")
    ctx = C1.ctx
    s1, s2 = C1.split, C2.split
    u_base = find_generator(s2.a * s1.a.inverse())
    w_base = find_generator(s2.b * s1.b.inverse())
    if u_base is None or w_base is None:
        return (False, None) if witness else False
    for e1, _, _ in ctx.unit_reps:
        for e2, _, _ in ctx.unit_reps:
            u, w = u_base * e1, w_base * e2
            if is_isomorphism(ctx, s1, s2, u, w):
                if witness:
                    return True, (u, w, isomorphism_witness(ctx, s1, s2, u, w))
                return True
    return (False, None) if witness else False


# --- the action of ideals prime to n

def diamond_act(N: FractionalIdeal, C: CuspLabel) -> CuspLabel:
    """C ⊗ N: module N H, same line and orientation, gamma twisted by N/nN = O/n."""
    ctx = C.ctx
    O = ctx.O
    N1 = N & O
    N2 = N.inverse() & O
    if not (N1 + ctx.n).is_unit() or not (N2 + ctx.n).is_unit():
        raise InvalidIdeal(f"{N} is not coprime to the level")
    x = ctx.element_one_mod(N1)
    H = C.H.scale(N)
    return CuspLabel(ctx, H, (x * C.v[0], x * C.v[1]), C.sigma, C.line)


def reduce_level(C: CuspLabel, P: FractionalIdeal) -> CuspLabel:
    """The image of C at a level P dividing n."""
    if not P.contains(C.ctx.n):
        raise InvalidIdeal("the new level must divide n")
    return CuspLabel(level_context(C.F, P), C.H, C.v, C.sigma, C.line)


def p_part(n: FractionalIdeal, p: int) -> FractionalIdeal:
    out = FractionalIdeal.unit(n.F)
    for P, e in n.factorization:
        if P.min_integer() == p:
            out = out * P ** e
    return out


def is_unramified(C: CuspLabel) -> bool:
    return C.is_unramified()


def is_p_unramified(C: CuspLabel, p: int) -> bool:
    return reduce_level(C, p_part(C.ctx.n, p)).is_unramified()


def split_label(ctx: LevelContext, a: FractionalIdeal, b: FractionalIdeal, vb, va, tau=(1, 1)) -> CuspLabel:
    """Like from_split, but the split is known and not recomputed."""
    C = from_split(ctx, a, b, vb, va, tau)
    F = ctx.F
    C.__dict__["split"] = Split(a, b, C.v[1], C.v[0], C.sigma, (F.one, F.zero))
    return C


# --- cusps

SIGNS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class Cusp:
    """An isomorphism class of cusp labels: its invariant tuple and a representative."""
    key: tuple
    label: CuspLabel

    def __lt__(self, other: "Cusp"):
        return self.key < other.key


def make_cusp(C: CuspLabel) -> Cusp:
    return Cusp(C.key, C)


def _dedupe(labels) -> list[Cusp]:
    out: dict = {}
    for C in labels:
        out.setdefault(C.key, C)
    return sorted(Cusp(k, C) for k, C in out.items())


def enumerate_cusps(ctx: LevelContext) -> list[Cusp]:
    """All of Cusp(n), by running over invariant tuples (a, b, tau, v_b, v_a)."""
    if "_all_cusps" not in ctx.__dict__:
        ctx._all_cusps = _enumerate_cusps(ctx)
    return list(ctx._all_cusps)


def _enumerate_cusps(ctx: LevelContext) -> list[Cusp]:
    labels = []
    n = ctx.n
    for A in ctx.class_reps:
        for B in ctx.class_reps:
            nB = n * B
            for rb in B.lat.coset_reps(nB.lat):
                wb = B.lat.element(rb)
                vb = ctx.F(wb[0], wb[1])
                J = _J(ctx, A, B, vb)
                for ra in A.lat.coset_reps(J.lat):
                    wa = A.lat.element(ra)
                    va = ctx.F(wa[0], wa[1])
                    for tau in SIGNS:
                        C = split_label(ctx, A, B, vb, va, tau)
                        if C.is_valid():
                            labels.append(C)
    return _dedupe(labels)


def enumerate_cusps_by_points(ctx: LevelContext, height: int) -> list[Cusp]:
    """Cusps reached by points (x : y) of P^1(F) with small integral coordinates."""
    F = ctx.F
    coords = range(-height, height + 1)
    elems = [F(a, b) for a in coords for b in coords]
    pts = set()
    for x in elems:
        for y in elems:
            if x or y:
                pts.add(canonical_line(x, y))
    labels = [point_label(ctx, p, lam) for lam in ctx.t_lambda for p in sorted(pts, key=str)]
    return _dedupe(labels)


def enumerate_unramified_cusps(ctx: LevelContext) -> list[Cusp]:
    """Orbit of the standard cusps under representatives of G^+_n."""
    if "_unr_cusps" not in ctx.__dict__:
        ctx._unr_cusps = _enumerate_unramified(ctx)
    return list(ctx._unr_cusps)


def _enumerate_unramified(ctx: LevelContext) -> list[Cusp]:
    reps = list(ctx.Gn.representatives.values())
    labels = [diamond_act(N, standard_label(ctx, lam)) for lam in ctx.t_lambda for N in reps]
    return _dedupe(labels)


def enumerate_p_unramified_cusps(ctx: LevelContext, p: int | None) -> list[Cusp]:
    if p is None:
        return enumerate_cusps(ctx)
    P = p_part(ctx.n, p)
    if P == ctx.n:
        return enumerate_unramified_cusps(ctx)
    return [c for c in enumerate_cusps(ctx) if is_p_unramified(c.label, p)]


def unramified_count_oracle(ctx: LevelContext) -> int:
    """#Cusp(1) * #((O/n)^* / image of O^*)."""
    h = len(ctx.class_reps)
    h_plus = ctx.Cl.order
    units = {ctx.ring.reduce(u) for u, _, _ in ctx.unit_reps}
    return h * h_plus * ctx.ring.unit_order() // len(units)


# --- automorphisms and derived data

@dataclass(frozen=True)
class CuspData:
    a: FractionalIdeal
    b: FractionalIdeal
    M_star: FractionalIdeal
    M: FractionalIdeal
    uc_exponent: int      # U_C = <eps^uc_exponent>
    uc_index: int         # [U^+ : U_C]
    eps_order: int        # 2 if some automorphism has N(w) = -1, else 1
    eps_factors: bool     # whether N(w) is a function of the image u/w in U_C


def _unit_table(ctx: LevelContext):
    F = ctx.F
    out = []
    for s in (1, -1):
        e = F.one * s
        for i in range(ctx.period):
            out.append((e, s, i))
            e = e * ctx.eps
    return out


def automorphism_units(C: CuspLabel):
    """Pairs ((u, s_u, i_u), (w, s_w, i_w)) of units giving automorphisms of C."""
    ctx = C.ctx
    s = C.split
    n = ctx.n
    J = _J(ctx, s.a, s.b, s.vb)
    nb = n * s.b
    table = _unit_table(ctx)
    ok_w = [t for t in table if (t[0] * s.vb - s.vb) in nb]
    ok_u = [t for t in table if ((ctx.F.one - t[0]) * s.va) in J]
    return [(u, w) for u in ok_u for w in ok_w if (u[0] * w[0]).is_totally_positive()]


def cusp_data(C: CuspLabel) -> CuspData:
    ctx = C.ctx
    s = C.split
    M_star = s.b.inverse() * s.a
    if s.vb:
        M_star = M_star & (ctx.n * s.a * s.vb.inverse())
    M = M_star.inverse() * ctx.diff.inverse()
    auts = automorphism_units(C)
    e = ctx.period
    norms: dict[int, set] = {}
    for (u, w) in auts:
        m = (u[2] - w[2]) % ctx.period
        e = math.gcd(e, m)
        norms.setdefault(m, set()).add(ctx.eps_norm ** w[2])
    # N(w) need not factor through u/w: for ramified labels [[u, mu], [0, u]]
    # can be an automorphism with u not 1 mod n
    factors = all(len(v) == 1 for v in norms.values())
    eps_order = 2 if any(-1 in v for v in norms.values()) else 1
    index = e if ctx.eps_norm == 1 else e // 2
    return CuspData(s.a, s.b, M_star, M, e, index, eps_order, factors)


def eps_value(u: FieldElement, w: FieldElement) -> int:
    """eps_C on the automorphism [[w, *], [0, u]]: the norm of the b-part w."""
    return int(w.norm())


def eps_of_matrix(M) -> int:
    """eps_C read off an upper-triangular matrix: the norm of its lower-right entry.

    On automorphisms both diagonal entries have the same norm, so this agrees
    with eps_value.
    """
    return int(M[1][1].norm())


def is_admissible(C: CuspLabel, k: int) -> bool:
    return k % 2 == 0 or cusp_data(C).eps_order == 1


# --- the action of G^+_n on cusps

def transport_units(C: CuspLabel):
    """(key, u, w): with the class representative R of C, (u, w) scale C onto R."""
    key, u, w = canonical_key(C)
    return key, u, w


def unit_exponent(ctx: LevelContext, x: FieldElement) -> tuple[int, int]:
    """(s, m) with x = s eps^m for a unit x."""
    a, _ = x.embeddings()
    le, _ = ctx.eps.embeddings()
    m = round(math.log(abs(a)) / math.log(abs(le)))
    base = ctx.eps ** m if m >= 0 else ctx.eps.inverse() ** (-m)
    for s in (1, -1):
        if x == base * s:
            return s, m
    raise AssertionError(f"{x} is not a unit")


@dataclass(frozen=True)
class StabilizerElement:
    cls: tuple            # coordinates in G^+_n
    ideal: FractionalIdeal
    sgn: int              # sgn N(u) for the generator u of N with C ⊗ N^-1 = C
    sgn_class: int        # the sign read off the class of N in ker(Cl^+ -> Cl)
    psi: int              # psi_C as an exponent of eps modulo uc_exponent
    ratio: FieldElement   # the unit by which C ⊗ N = C scales M_C
    in_K: bool            # whether [N] lies in ker(G^+_n -> G_n)


def kernel_subgroup(ctx: LevelContext) -> set:
    """ker(G^+_n -> G_n) as a set of coordinate tuples."""
    G = ctx.Gn
    K = {G.pres.zero}
    frontier = set(K)
    while frontier:
        new = {G.pres.add(a, b) for a in frontier for b in G.kernel_to_wide} - K
        K |= new
        frontier = new
    return K


def cusp_class_action(cusp: Cusp, N: FractionalIdeal):
    """(key of [C ⊗ N^-1], u) with u the a-part scaling from C ⊗ N^-1 to its class representative."""
    C2 = diamond_act(N.inverse(), cusp.label)
    key, u, _ = canonical_key(C2)
    return key, u


def stabilizer(cusp: Cusp) -> list[StabilizerElement]:
    """Stab_[C] in G^+_n by a sweep over class representatives."""
    C = cusp.label
    ctx = C.ctx
    data = cusp_data(C)
    K = kernel_subgroup(ctx)
    key0, u0, w0 = canonical_key(C)
    out = []
    for g, N in sorted(ctx.Gn.representatives.items()):
        key, u, w = canonical_key(diamond_act(N, C))
        if key != key0:
            continue
        # C ⊗ N -> C is (u/u0, w/w0) and scales M_C by the ratio below
        ratio = (u / u0) / (w / w0)
        _, m = unit_exponent(ctx, ratio)
        psi = m % data.uc_exponent
        if ctx.eps_norm == 1:
            alpha = find_generator(N)
            sgn_class = 1 if alpha.norm() > 0 else -1
        else:
            sgn_class = 1
        _, ui = cusp_class_action(cusp, N)
        sgn = 1 if (ui / u0).norm() > 0 else -1
        out.append(StabilizerElement(g, N, sgn, sgn_class, psi, ratio, g in K))
    return out


def orbits(cusps: list[Cusp]) -> list[list[tuple]]:
    """G^+_n-orbits of a G^+_n-stable list of cusps, as sorted lists of keys."""
    if not cusps:
        return []
    ctx = cusps[0].label.ctx
    reps = list(ctx.Gn.representatives.values())
    keys = {c.key for c in cusps}
    seen: set = set()
    out = []
    for c in cusps:
        if c.key in seen:
            continue
        orb = {canonical_key(diamond_act(N, c.label))[0] for N in reps}
        assert orb <= keys, "cusp list is not stable under G^+_n"
        seen |= orb
        out.append(sorted(orb))
    return out


# --- q-indices

def _orbit_rep(m: FieldElement, eta: FieldElement) -> FieldElement:
    """The element of minimal trace in m * eta^Z (ties broken by coordinates)."""
    eta_inv = eta.inverse()
    cur = m
    for step in (eta, eta_inv):
        while True:
            nxt = cur * step
            if nxt.trace() < cur.trace():
                cur = nxt
            else:
                break
    cands = [cur, cur * eta, cur * eta_inv]
    t = min(c.trace() for c in cands)
    return min((c for c in cands if c.trace() == t), key=lambda c: (c.x, c.y))


def q_index_reps(C: CuspLabel, trace_bound: int) -> list[FieldElement]:
    """U_C-orbit representatives of totally positive m in M_C with trace at most trace_bound."""
    ctx = C.ctx
    data = cusp_data(C)
    eta = ctx.eps ** data.uc_exponent
    v1, v2 = data.M.gens()
    reps = set()
    for m in box_points(v1, v2, trace_bound, trace_bound):
        if m and m.is_totally_positive() and m.trace() <= trace_bound:
            reps.add(_orbit_rep(m, eta))
    return sorted(reps, key=lambda c: (c.trace(), c.x, c.y))


def fixed_q_indices(cusp: Cusp, trace_bound: int, modulo_kernel: bool = True):
    """Pairs (g, m) with g in Stab_[C] fixing the nonzero index class of m.

    With modulo_kernel, elements of ker(G^+_n -> G_n) are skipped: they scale
    M_C trivially and so fix every index.
    """
    C = cusp.label
    eta = C.ctx.eps ** cusp_data(C).uc_exponent
    out = []
    reps = q_index_reps(C, trace_bound)
    for s in stabilizer(cusp):
        if s.cls == C.ctx.Gn.pres.zero or (modulo_kernel and s.in_K):
            continue
        for m in reps:
            if _orbit_rep(m * s.ratio, eta) == m:
                out.append((s.cls, m))
    return out
