"""Weights and finite-order characters compatible with them.

A pair (k, chi) with chi a character of the narrow ray class group G^+_n is
compatible when chi((a)) = sgn(N a)^k for every a = 1 mod n. Generators of
the kernel of G^+_n -> G_n are enough to test this, so we keep explicit
witnesses a with prescribed signs.
"""
from __future__ import annotations

from fractions import Fraction

from .field import RealQuadraticField
from .groups import Character, RayClassGroup, UnitData, ray_class_group
from .ideals import FractionalIdeal


def is_admissible_weight(F: RealQuadraticField, n: FractionalIdeal, k: int) -> bool:
    """True when N(u)^k = 1 for every unit u = 1 mod n."""
    if k % 2 == 0:
        return True
    return all(N == 1 for N in UnitData(F, n).u1n_norms())


def compatibility_witnesses(G: RayClassGroup) -> list[tuple]:
    """(alpha, sign of N(alpha)) for the stored sign witnesses."""
    return [(a, int(a.norm() > 0) * 2 - 1) for a in G.sign_witnesses.values()]


def is_compatible(chi: Character, k: int) -> bool:
    G = chi.G
    for a, s in compatibility_witnesses(G):
        want = Fraction(0) if s == 1 or k % 2 == 0 else Fraction(1, 2)
        if chi(FractionalIdeal.principal(G.F, a)) != want:
            return False
    return True


def compatible_characters(F: RealQuadraticField, n: FractionalIdeal, k: int) -> list[Character]:
    if not is_admissible_weight(F, n, k):
        return []
    G = ray_class_group(F, n, narrow=True)
    return [chi for chi in G.characters() if is_compatible(chi, k)]
