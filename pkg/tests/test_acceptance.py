"""The ten acceptance criteria, one test each, each printing a PASS/FAIL line."""
import random
import time
from fractions import Fraction

from conftest import CATALOG
from cusp_forge.const_terms import (ConstantTermVector, GroupRingImage, basis_vector, build_B, class_generators,
                                    class_ideals, constant_cusps, diamond_act_const, is_normalized_presentation,
                                    lift_target, multiply, normalize_presentation, normalized_entry, ones_vector,
                                    presentation_ideal, specialize)
from cusp_forge.cusps import (cusp_equiv, diamond_act, enumerate_cusps, enumerate_cusps_by_points,
                              enumerate_unramified_cusps, fixed_q_indices, level_context, reduce_level, stabilizer)
from cusp_forge.cyclotomic import Cyc
from cusp_forge.field import field
from cusp_forge.groups import ResidueRing, wide_class_reps
from cusp_forge.hecke import compatible_characters, is_admissible_weight
from cusp_forge.ideals import FractionalIdeal, Lattice2, different, lattice_intersect_line, parse_ideal
from cusp_forge.rigidity import gl2_order, inertia_bound, injective_primes, is_rigid_full_level, unit_image_order


def report(capsys, number, ok, detail=""):
    with capsys.disabled():
        print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'}{' - ' + detail if detail else ''}")
    assert ok, detail


def ctx_for(D, n):
    F = field(D)
    return level_context(F, parse_ideal(F, n))


def rand_g(F, rng, height=10):
    while True:
        g = [[F(rng.randint(-height, height), rng.randint(-height, height)) for _ in range(2)] for _ in range(2)]
        det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        if det and det.is_totally_positive():
            return g, det


def test_criterion_1_normalizing_ideal(capsys):
    start = time.time()
    rng = random.Random(2024)
    count = bad = 0
    for D in (2, 3, 5, 13):
        F = field(D)
        reps = wide_class_reps(D)
        O = FractionalIdeal.unit(F)
        for _ in range(55):
            a_id = rng.choice(reps) * F(rng.randint(1, 3))
            b_id = rng.choice(reps) * different(F)
            g, det = rand_g(F, rng)
            (a, _), (c, _) = g
            terms = [x for x in (b_id * a if a else None, a_id * c if c else None) if x is not None]
            S = terms[0] if len(terms) == 1 else terms[0] + terms[1]
            formula = b_id * a_id * S.inverse() * det
            direct = lattice_intersect_line(Lattice2.direct_sum(b_id, a_id).transform(g), (F.zero, F.one))
            count += 1
            bad += formula != direct
    elapsed = time.time() - start
    report(capsys, 1, count >= 200 and bad == 0 and elapsed < 60,
           f"{count} matrices, {bad} mismatches, {elapsed:.1f}s")


def test_criterion_2_admissible_weights(capsys):
    F5, F3 = field(5), field(3)
    O5, O3 = FractionalIdeal.unit(F5), FractionalIdeal.unit(F3)
    ok = all(is_admissible_weight(F5, O5, k) == (k % 2 == 0) for k in range(0, 12))
    ok &= all(is_admissible_weight(F3, O3, k) for k in range(0, 12))
    report(capsys, 2, ok)


def test_criterion_3_compatible_characters(capsys):
    F = field(3)
    O = FractionalIdeal.unit(F)
    ok = True
    for k in range(0, 8):
        chars = compatible_characters(F, O, k)
        ok &= len(chars) == 1 and chars[0].is_trivial() == (k % 2 == 0)
    report(capsys, 3, ok)


def test_criterion_4_cusp_counts(capsys):
    ok = True
    details = []
    for D in (2, 3, 5, 13):
        ctx = ctx_for(D, "(1)")
        full = [c.key for c in enumerate_cusps(ctx)]
        pts = [c.key for c in enumerate_cusps_by_points(ctx, 2)]
        ok &= full == pts
        details.append(f"D={D}: {len(full)}")
    for D, n in ((5, "(6)"), (2, "(15)"), (13, "(6)")):
        ctx = ctx_for(D, n)
        F = ctx.F
        R = ResidueRing(ctx.n)
        units, p = set(), F.one
        for _ in range(4 * R.size + 4):
            units |= {R.reduce(p), R.reduce(-p)}
            p = p * F.fund_unit
        fiber = R.unit_order() // len(units)
        one = ctx_for(D, "(1)")
        sizes = {}
        for c in enumerate_unramified_cusps(ctx):
            key = reduce_level(c.label, one.n).key
            sizes[key] = sizes.get(key, 0) + 1
        ok &= set(sizes) == {c.key for c in enumerate_cusps(one)}
        ok &= set(sizes.values()) == {fiber}
        details.append(f"D={D} n={n}: fibers of {fiber}")
    report(capsys, 4, ok, "; ".join(details))


DIAMOND_LEVELS = sorted({(D, n) for D, n, _, _ in CATALOG})


def test_criterion_5_diamond_laws(capsys):
    rng = random.Random(5)
    ok = True
    for D, n in DIAMOND_LEVELS:
        ctx = ctx_for(D, n)
        F = ctx.F
        cusps = enumerate_cusps(ctx)
        reps = list(class_ideals(ctx, None).values())
        vec_cusps = constant_cusps(ctx, None, 2)
        for i in range(100):
            c = rng.choice(cusps)
            N1, N2 = rng.choice(reps), rng.choice(reps)
            alpha = ctx.Gn.element_with(F.one + ctx.ring.m * F(rng.randint(-3, 3), rng.randint(-3, 3)))
            P = FractionalIdeal.principal(F, alpha)
            ok &= diamond_act(ctx.O, c.label).key == c.key
            ok &= diamond_act(N1 * N2, c.label).key == diamond_act(N1, diamond_act(N2, c.label)).key
            moved = diamond_act(P, c.label)
            ok &= moved.key == c.key
            # the structural test is slower; it confirms the key on a sample
            if i % 10 == 0:
                ok &= cusp_equiv(c.label, moved)
            v = ConstantTermVector(ctx, 2, vec_cusps, {key: (Cyc(1, [rng.randint(-5, 5)]),) for key in vec_cusps})
            ok &= diamond_act_const(ctx.O, v) == v
            ok &= diamond_act_const(N1 * N2, v) == diamond_act_const(N1, diamond_act_const(N2, v))
            ok &= diamond_act_const(P, v) == v
    report(capsys, 5, ok, f"{len(DIAMOND_LEVELS)} levels x 100 cases")


def test_criterion_6_auxiliary_vector(capsys):
    ok = True
    total = 0
    for D, n, p, k in CATALOG:
        ctx = ctx_for(D, n)
        rng = random.Random(f"{D}{n}{p}{k}")
        try:
            B = build_B(ctx, p, k, (-1) ** k, checks=True, rng=rng)
        except AssertionError:
            ok = False
            continue
        F = ctx.F
        lams = list(ctx.t_lambda)
        hits = 0
        while hits < 50:
            lam = rng.choice(lams)
            gens = (ctx.n * ctx.t_lambda[lam] * ctx.diff).gens()
            c = sum((g * rng.randint(-3, 3) for g in gens), F.zero)
            a = F(rng.randint(-4, 4), rng.randint(-4, 4))
            d = F(rng.randint(-4, 4), rng.randint(-4, 4))
            if not c or not a:
                continue
            A = normalize_presentation(ctx, [[a, (a * d - 1) / c], [c, d]], lam)
            if A is None:
                continue
            hits += 1
            ok &= is_normalized_presentation(ctx, A, lam)
            ok &= normalized_entry(B.vector, A, lam) == B.ring.psi_bold(presentation_ideal(ctx, A, lam))
        total += hits
    report(capsys, 6, ok, f"{len(CATALOG)} catalog entries, {total} presentations")


def test_criterion_7_stabilizer_twist(capsys):
    ok = True
    checked = 0
    for D, n, p, k in CATALOG:
        ctx = ctx_for(D, n)
        cusps = constant_cusps(ctx, p, k)
        for key, c in cusps.items():
            e = basis_vector(ctx, cusps, k, key)
            for s in stabilizer(c):
                ok &= diamond_act_const(s.ideal, e).entries[key] == (Cyc(1, [s.sgn ** k]),)
                checked += 1
            ok &= fixed_q_indices(c, 10) == []
    report(capsys, 7, ok, f"{checked} stabilizer elements; freeness modulo ker(G+ -> G)")


def test_criterion_8_f_k_invariance(capsys):
    ok = True
    for D, n in DIAMOND_LEVELS:
        ctx = ctx_for(D, n)
        gens = class_generators(ctx, None)
        for k, mod in ((0, None), (2, None), (4, None), (1, 2)):
            f = ones_vector(ctx, k, modulus=mod)
            ok &= all(diamond_act_const(N, f) == f for N in gens)
        f1 = ones_vector(ctx, 1, modulus=2)
        ok &= multiply(f1, f1) == ones_vector(ctx, 2, modulus=2)
    report(capsys, 8, ok)


def test_criterion_9_group_ring(capsys):
    rng = random.Random(9)
    ok = True
    cases = 0
    for D, n, p, k in CATALOG:
        ctx = ctx_for(D, n)
        if ctx.Gn.order > 50:
            continue
        R = GroupRingImage(ctx, (-1) ** k, p)
        ok &= all(R.contains(R.scaled_idempotent(chi)) for chi in R.chars)
        B = build_B(ctx, p, k, (-1) ** k, checks=False)
        mmin = 0
        while R.order % p ** (mmin + 1) == 0:
            mmin += 1
        for m in (mmin, mmin + 1):
            consts = {chi: B.vector.component(i).scale(p ** m * rng.randint(1, 6)) for i, chi in enumerate(R.chars)}
            L = lift_target(R, consts, m)
            ok &= L.quotient == Fraction(R.order, p ** m)
            ok &= all(specialize(L.vector, R, chi) == consts[chi].scale(L.quotient) for chi in R.chars)
            cases += 1
    report(capsys, 9, ok, f"{cases} lifts")


RIGIDITY = [
    (5, "(7)"), (5, "(3)"), (2, "(7)"), (3, "(5)"), (13, "(3)"),
    (5, "(11)"), (2, "(5)"), (5, "(2)"), (5, "(21)"), (10, "(7)"),
]


def test_criterion_10_rigidity(capsys):
    start = time.time()
    ok = True
    for D, n in RIGIDITY:
        F = field(D)
        N = parse_ideal(F, n)
        R = ResidueRing(N)
        m = N.min_integer()
        cond1 = any(m % q == 0 for q in range(5, m + 1) if all(q % r for r in range(2, q)))
        eta = F.fund_unit if F.fund_unit.norm() == 1 else F.fund_unit ** 2
        order, x = 1, eta
        while R.reduce(x) != R.reduce(F.one):
            x, order = x * eta, order + 1
        cond2 = False
        for ell in range(3, order + 1, 2):
            if order % ell or any(ell % r == 0 for r in range(2, ell)):
                continue
            powers = {R.reduce(R.element(r) ** ell) for r in R.unit_residues}
            cond2 |= R.reduce(eta) not in powers
        ok &= is_rigid_full_level(F, N) == (cond1 and cond2)
        ok &= bool(injective_primes(F, N)) == cond2
        if not N.divides(parse_ideal(F, "(2)")):
            # the quoted product, with the unit image counted by brute force
            units, p = set(), F.one
            for _ in range(4 * R.size + 4):
                units |= {R.reduce(p), R.reduce(-p)}
                p = p * F.fund_unit
            b = inertia_bound(F, N)
            ok &= unit_image_order(N) == len(units)
            ok &= b % (gl2_order(N) // len(units)) == 0 and b % 2 == 0
            ok &= b // (gl2_order(N) // len(units)) in (1, 2)
    for D, a, b in ((5, "(3)", "(7)"), (2, "(3)", "(5)"), (13, "(2)", "(3)"), (5, "(2)", "(11)")):
        F = field(D)
        A, Bi = parse_ideal(F, a), parse_ideal(F, b)
        ok &= gl2_order(A * Bi) == gl2_order(A) * gl2_order(Bi)
    q = 9
    ok &= gl2_order(parse_ideal(field(5), "(3)")) == (q * q - 1) * (q * q - q)
    elapsed = time.time() - start
    report(capsys, 10, ok and elapsed < 10, f"{len(RIGIDITY)} levels, {elapsed:.1f}s")
