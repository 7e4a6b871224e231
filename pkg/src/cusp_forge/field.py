"""Exact arithmetic in real quadratic fields Q(sqrt D)."""
from __future__ import annotations

import re
from fractions import Fraction
from functools import cached_property, lru_cache
from math import isqrt


def is_squarefree(n: int) -> bool:
    if n < 2:
        return n == 1
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


def _sign_of(p: Fraction, q: Fraction, D: int) -> int:
    """Sign of p + q*sqrt(D), decided without floating point."""
    if q == 0:
        return (p > 0) - (p < 0)
    if p == 0:
        return (q > 0) - (q < 0)
    if (p > 0) == (q > 0):
        return 1 if p > 0 else -1
    # opposite signs: compare p^2 with q^2 D
    big = p * p > q * q * D
    return (1 if p > 0 else -1) if big else (1 if q > 0 else -1)


class RealQuadraticField:
    """F = Q(sqrt D) with integral basis {1, omega}."""

    def __init__(self, D: int):
        D = int(D)
        if D <= 1 or not is_squarefree(D):
            raise ValueError(f"D must be a squarefree integer > 1, got {D}")
        self.D = D
        if D % 4 == 1:
            self.disc = D
            # omega = (1 + sqrt D)/2, omega^2 = omega + (D-1)/4
            self.trace_omega = 1
            self.norm_omega = (1 - D) // 4
        else:
            self.disc = 4 * D
            self.trace_omega = 0
            self.norm_omega = -D

    def __repr__(self):
        return f"RealQuadraticField({self.D})"

    def __eq__(self, other):
        return isinstance(other, RealQuadraticField) and other.D == self.D

    def __hash__(self):
        return hash(("RQF", self.D))

    def __call__(self, x=0, y=0) -> "FieldElement":
        return FieldElement(self, x, y)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1, 0)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0, 0)

    @property
    def omega(self) -> "FieldElement":
        return FieldElement(self, 0, 1)

    def sqrtD(self) -> "FieldElement":
        return 2 * self.omega - self.trace_omega if self.D % 4 == 1 else self.omega

    @cached_property
    def fund_unit(self) -> "FieldElement":
        return fundamental_unit(self)

    def parse(self, text: str) -> "FieldElement":
        return parse_element(self, text)


class FieldElement:
    """x + y*omega with exact rational coordinates."""

    __slots__ = ("F", "x", "y")

    def __init__(self, F: RealQuadraticField, x=0, y=0):
        self.F = F
        self.x = Fraction(x)
        self.y = Fraction(y)

    # --- basics
    @property
    def coords(self) -> tuple[Fraction, Fraction]:
        return (self.x, self.y)

    def __repr__(self):
        return f"FieldElement({self.F.D}: {format_element(self)})"

    def __str__(self):
        return format_element(self)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.F == other.F and self.x == other.x and self.y == other.y
        if isinstance(other, (int, Fraction)):
            return self.y == 0 and self.x == other
        return NotImplemented

    def __hash__(self):
        return hash((self.F.D, self.x, self.y))

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.F != self.F:
                raise ValueError("elements of different fields")
            return other
        return FieldElement(self.F, other, 0)

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.F, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.F, -self.x, -self.y)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        t, n = self.F.trace_omega, self.F.norm_omega
        # omega^2 = t*omega - n
        yy = self.y * o.y
        return FieldElement(self.F, self.x * o.x - n * yy, self.x * o.y + self.y * o.x + t * yy)

    __rmul__ = __mul__

    def conjugate(self) -> "FieldElement":
        return FieldElement(self.F, self.x + self.y * self.F.trace_omega, -self.y)

    def norm(self) -> Fraction:
        t, n = self.F.trace_omega, self.F.norm_omega
        return self.x * self.x + t * self.x * self.y + n * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x + self.F.trace_omega * self.y

    def inverse(self) -> "FieldElement":
        N = self.norm()
        if N == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conjugate()
        return FieldElement(self.F, c.x / N, c.y / N)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = self.F.one, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __bool__(self):
        return bool(self.x or self.y)

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    # --- real embeddings
    def _pq(self) -> tuple[Fraction, Fraction]:
        """p, q with self = p + q sqrt(D)."""
        if self.F.D % 4 == 1:
            return self.x + self.y / 2, self.y / 2
        return self.x, self.y

    def sign_vector(self) -> tuple[int, int]:
        """Signs at sqrt(D) -> +sqrt(D) and sqrt(D) -> -sqrt(D)."""
        p, q = self._pq()
        return (_sign_of(p, q, self.F.D), _sign_of(p, -q, self.F.D))

    def embeddings(self) -> tuple[float, float]:
        """Floating approximations; used only for search bounds, never predicates."""
        p, q = self._pq()
        r = self.F.D ** 0.5
        return (float(p) + float(q) * r, float(p) - float(q) * r)

    def is_totally_positive(self) -> bool:
        if not self:
            raise ValueError("zero has no sign")
        return self.sign_vector() == (1, 1)

    def floor(self) -> int:
        """Exact floor of the first real embedding."""
        p, q = self._pq()
        D = self.F.D
        # floor(p + q sqrt D); bracket with isqrt then correct exactly
        guess = int(p) + (isqrt(int(q * q * D)) if q > 0 else -isqrt(int(q * q * D)))
        for cand in range(guess + 3, guess - 5, -1):
            if _sign_of(p - cand, q, D) >= 0:
                return cand
        raise AssertionError("floor search failed")


def norm(e: FieldElement) -> Fraction:
    return e.norm()


def is_totally_positive(e: FieldElement) -> bool:
    return e.is_totally_positive()


def fundamental_unit(F: RealQuadraticField) -> FieldElement:
    """Fundamental unit > 1 via the continued fraction of omega.

    Convergents p/q of the expansion give elements p - q*omega of bounded norm;
    the first one of norm +-1 generates the unit group modulo torsion.
    """
    x = F.omega
    p0, p1 = 1, x.floor()
    q0, q1 = 0, 1
    a = p1
    x = x - a
    while True:
        x = x.inverse()
        a = x.floor()
        x = x - a
        u = F(p1, -q1)
        if abs(u.norm()) == 1:
            break
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
    cands = [u, -u, u.inverse(), -u.inverse()]
    best = [c for c in cands if c.sign_vector()[0] > 0 and (c - 1).sign_vector()[0] > 0]
    return best[0]


_TERM = re.compile(r"([+-]?)\s*(\d+(?:/\d+)?)?\s*\*?\s*(w|omega|sqrt)?")


def parse_element(F: RealQuadraticField, text: str) -> FieldElement:
    """Parse ``"3"``, ``"1+w"``, ``"2*w-1"``, ``"-w/2"``, ``"1+sqrt"`` (sqrt = sqrt(D))."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty element")
    out = F.zero
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse element {text!r}")
        sign, num, sym = m.groups()
        if num is None and sym is None:
            raise ValueError(f"cannot parse element {text!r}")
        end = m.end()
        if end < len(s) and s[end] == "/":
            m2 = re.match(r"/(\d+)", s[end:])
            if not m2:
                raise ValueError(f"cannot parse element {text!r}")
            div = int(m2.group(1))
            end += m2.end()
        else:
            div = 1
        c = Fraction(num if num else 1) / div
        if sign == "-":
            c = -c
        if sym in ("w", "omega"):
            out = out + F(0, c)
        elif sym == "sqrt":
            out = out + c * F.sqrtD()
        else:
            out = out + c
        pos = end
    return out


def format_element(e: FieldElement) -> str:
    x, y = e.x, e.y
    if y == 0:
        return str(x)
    ys = "w" if y == 1 else "-w" if y == -1 else f"{y}*w"
    if x == 0:
        return ys
    return f"{x}{'+' if not ys.startswith('-') else ''}{ys}"


@lru_cache(maxsize=None)
def field(D: int) -> RealQuadraticField:
    return RealQuadraticField(D)
