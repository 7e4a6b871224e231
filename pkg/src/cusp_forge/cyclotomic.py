"""Exact arithmetic in Q(zeta_M), power basis reduced modulo Phi_M."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd


def _poly_divexact(a: list[int], b: list[int]) -> list[int]:
    """Exact quotient a / b of integer polynomials (coefficients low degree first)."""
    a = list(a)
    q = [0] * (len(a) - len(b) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = a[i + len(b) - 1] // b[-1]
        q[i] = c
        for j, bj in enumerate(b):
            a[i + j] -= c * bj
    assert not any(a), "inexact polynomial division"
    return q


@lru_cache(maxsize=None)
def cyclotomic_poly(M: int) -> tuple[int, ...]:
    num = [-1] + [0] * (M - 1) + [1]
    for d in range(1, M):
        if M % d == 0:
            num = _poly_divexact(num, list(cyclotomic_poly(d)))
    return tuple(num)


def euler_phi(M: int) -> int:
    return len(cyclotomic_poly(M)) - 1


class Cyc:
    """An element of Q(zeta_M)."""

    __slots__ = ("M", "c")

    def __init__(self, M: int, coeffs):
        self.M = M
        self.c = _reduce(M, [Fraction(x) for x in coeffs])

    @classmethod
    def root(cls, M: int, e: int) -> "Cyc":
        e %= M
        v = [0] * (e + 1)
        v[e] = 1
        return cls(M, v)

    @classmethod
    def scalar(cls, M: int, q) -> "Cyc":
        return cls(M, [q])

    def _coerce(self, other) -> "Cyc":
        if isinstance(other, Cyc):
            if other.M != self.M:
                raise ValueError("mismatched cyclotomic orders")
            return other
        return Cyc(self.M, [other])

    def __add__(self, other):
        o = self._coerce(other)
        return Cyc(self.M, [a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return Cyc(self.M, [-a for a in self.c])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        prod = [Fraction(0)] * (2 * len(self.c))
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    if b:
                        prod[i + j] += a * b
        return Cyc(self.M, prod)

    __rmul__ = __mul__

    def __truediv__(self, q):
        if isinstance(q, Cyc):
            raise TypeError("division only by rationals")
        q = Fraction(q)
        return Cyc(self.M, [a / q for a in self.c])

    def __pow__(self, k: int) -> "Cyc":
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = Cyc(self.M, [1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Cyc(self.M, [other])
        if not isinstance(other, Cyc):
            return NotImplemented
        return self.M == other.M and self.c == other.c

    def __hash__(self):
        return hash((self.M, tuple(self.c)))

    def __bool__(self):
        return any(self.c)

    def __repr__(self):
        return f"Cyc({self.M}, {[str(a) for a in self.c]})"

    def is_p_integral(self, p: int) -> bool:
        return all(a.denominator % p for a in self.c)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.c)

    def to_json(self) -> dict:
        return {"order": self.M, "coefficients": [str(a) for a in self.c]}

    def __str__(self):
        terms = []
        for i, a in enumerate(self.c):
            if a:
                terms.append(str(a) if i == 0 else f"{a}*z^{i}")
        return "+".join(terms) if terms else "0"


def _reduce(M: int, v: list[Fraction]) -> list[Fraction]:
    phi = cyclotomic_poly(M)
    n = len(phi) - 1
    v = v + [Fraction(0)] * max(0, n - len(v))
    # Phi_M is monic
    for i in range(len(v) - 1, n - 1, -1):
        c = v[i]
        if c:
            for j in range(n + 1):
                v[i - n + j] -= c * phi[j]
    return v[:n]


def root_of_unity_value(M: int, frac: Fraction) -> Cyc:
    """exp(2 pi i frac) as an element of Q(zeta_M); M * frac must be integral."""
    e = frac * M
    if e.denominator != 1:
        raise ValueError(f"{frac} is not in (1/{M})Z")
    return Cyc.root(M, int(e))


def common_order(*orders: int) -> int:
    out = 1
    for m in orders:
        out = out * m // gcd(out, m)
    return out
