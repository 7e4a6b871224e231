"""Integer linear algebra: Hermite and Smith normal forms, kernels, and
Z-lattices with a common denominator.

Matrices are lists of rows of Python ints. All routines are exact.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    # keep the pivot row untouched when it already divides; otherwise
    # elimination loops can cycle
    if a and b % a == 0:
        return (abs(a), 1 if a > 0 else -1, 0)
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def lcm(*xs: int) -> int:
    out = 1
    for x in xs:
        out = out * x // gcd(out, x)
    return out


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> list[list]:
    if not a:
        return []
    return [[sum(r[k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for r in a]


def hnf(rows: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Row Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``U * rows == H``. Nonzero rows
    of ``H`` come first, have positive pivots, and entries above each pivot
    are reduced into ``[0, pivot)``.
    """
    A = [list(r) for r in rows]
    m = len(A)
    n = len(A[0]) if m else 0
    U = identity(m)
    r = 0
    pivots = []
    for c in range(n):
        if r == m:
            break
        for i in range(r + 1, m):
            if A[i][c] == 0:
                continue
            a, b = A[r][c], A[i][c]
            g, x, y = _xgcd(a, b)
            pa, pb = a // g, b // g
            Ar, Ai = A[r], A[i]
            A[r] = [x * s + y * t for s, t in zip(Ar, Ai)]
            A[i] = [-pb * s + pa * t for s, t in zip(Ar, Ai)]
            Ur, Ui = U[r], U[i]
            U[r] = [x * s + y * t for s, t in zip(Ur, Ui)]
            U[i] = [-pb * s + pa * t for s, t in zip(Ur, Ui)]
        if A[r][c] == 0:
            continue
        if A[r][c] < 0:
            A[r] = [-v for v in A[r]]
            U[r] = [-v for v in U[r]]
        p = A[r][c]
        for i in range(r):
            q = A[i][c] // p
            if q:
                A[i] = [s - q * t for s, t in zip(A[i], A[r])]
                U[i] = [s - q * t for s, t in zip(U[i], U[r])]
        pivots.append(c)
        r += 1
    return A, U


def rank(rows: Sequence[Sequence[int]]) -> int:
    H, _ = hnf(rows)
    return sum(1 for row in H if any(row))


def kernel(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Z-basis of the left kernel ``{k : k * rows == 0}``."""
    if not rows:
        return []
    H, U = hnf(rows)
    return [U[i] for i, row in enumerate(H) if not any(row)]


def solve(rows: Sequence[Sequence[int]], target: Sequence) -> list[int] | None:
    """Integer ``k`` with ``k * rows == target``, or None if none exists."""
    H, U = hnf(rows)
    nz = [i for i, row in enumerate(H) if any(row)]
    t = [Fraction(x) for x in target]
    y = []
    for i in nz:
        row = H[i]
        c = next(j for j, v in enumerate(row) if v)
        q = t[c] / row[c]
        if q.denominator != 1:
            return None
        q = int(q)
        y.append(q)
        t = [a - q * b for a, b in zip(t, row)]
    if any(t):
        return None
    k = [0] * len(rows)
    for q, i in zip(y, nz):
        k = [a + q * b for a, b in zip(k, U[i])]
    return k


def rat_solve(rows: Sequence[Sequence], target: Sequence) -> list[Fraction] | None:
    """Rational ``x`` with ``x * rows == target`` (rows assumed independent)."""
    m = len(rows)
    n = len(target)
    # transpose system: sum_i x_i rows[i][j] = target[j]
    M = [[Fraction(rows[i][j]) for i in range(m)] + [Fraction(target[j])] for j in range(n)]
    piv_cols = []
    r = 0
    for c in range(m):
        p = next((i for i in range(r, n) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(n):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        piv_cols.append(c)
        r += 1
    if any(M[i][m] != 0 for i in range(r, n)):
        return None
    x = [Fraction(0)] * m
    for i, c in enumerate(piv_cols):
        x[c] = M[i][m]
    return x


def snf(A: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form ``D = U A V`` with U, V unimodular.

    Diagonal entries are nonnegative and each divides the next.
    """
    D = [list(r) for r in A]
    m = len(D)
    n = len(D[0]) if m else 0
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(m, n):
        nonzero = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
        if not nonzero:
            break
        _, i, j = min(nonzero)
        swap_rows(t, i)
        swap_cols(t, j)
        done = False
        while not done:
            done = True
            for i in range(t + 1, m):
                if D[i][t]:
                    a, b = D[t][t], D[i][t]
                    g, x, y = _xgcd(a, b)
                    pa, pb = a // g, b // g
                    Rt, Ri = D[t], D[i]
                    D[t] = [x * s + y * u for s, u in zip(Rt, Ri)]
                    D[i] = [-pb * s + pa * u for s, u in zip(Rt, Ri)]
                    Ut, Ui = U[t], U[i]
                    U[t] = [x * s + y * u for s, u in zip(Ut, Ui)]
                    U[i] = [-pb * s + pa * u for s, u in zip(Ut, Ui)]
            for j in range(t + 1, n):
                if D[t][j]:
                    a, b = D[t][t], D[t][j]
                    g, x, y = _xgcd(a, b)
                    pa, pb = a // g, b // g
                    for M in (D, V):
                        for row in M:
                            s, u = row[t], row[j]
                            row[t], row[j] = x * s + y * u, -pb * s + pa * u
                    done = False
            if done:
                p = D[t][t]
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                            if D[i][j] % p), None)
                if bad is not None:
                    i = bad[0]
                    D[t] = [s + u for s, u in zip(D[t], D[i])]
                    U[t] = [s + u for s, u in zip(U[t], U[i])]
                    done = False
        if D[t][t] < 0:
            D[t] = [-v for v in D[t]]
            U[t] = [-v for v in U[t]]
        t += 1
    return D, U, V


def _clear(vectors: Iterable[Sequence]) -> tuple[list[list[int]], int]:
    vecs = [[Fraction(x) for x in v] for v in vectors]
    den = lcm(*(x.denominator for v in vecs for x in v)) if vecs else 1
    return [[int(x * den) for x in v] for v in vecs], den


class RatLattice:
    """Z-lattice in Q^d stored as an integer HNF basis over a denominator."""

    __slots__ = ("basis", "den", "dim")

    def __init__(self, basis, den, dim):
        self.basis = tuple(tuple(r) for r in basis)
        self.den = den
        self.dim = dim

    @classmethod
    def from_generators(cls, vectors, dim: int) -> "RatLattice":
        ints, den = _clear(vectors)
        if not ints:
            return cls((), 1, dim)
        H, _ = hnf(ints)
        rows = [r for r in H if any(r)]
        g = den
        for r in rows:
            for x in r:
                g = gcd(g, x)
        g = g or 1
        basis = tuple(tuple(x // g for x in r) for r in rows)
        return cls(basis, den // g, dim)

    def __eq__(self, other):
        return isinstance(other, RatLattice) and (self.basis, self.den) == (other.basis, other.den)

    def __hash__(self):
        return hash((self.basis, self.den))

    def __repr__(self):
        return f"RatLattice({[list(r) for r in self.basis]}/{self.den})"

    @property
    def rank(self) -> int:
        return len(self.basis)

    def vectors(self) -> list[list[Fraction]]:
        return [[Fraction(x, self.den) for x in r] for r in self.basis]

    def covolume(self) -> Fraction:
        """Absolute determinant of a full-rank basis."""
        assert self.rank == self.dim
        D, _, _ = snf([list(r) for r in self.basis])
        det = 1
        for i in range(self.dim):
            det *= D[i][i]
        return Fraction(det, self.den ** self.dim)

    def coords(self, v) -> list[int] | None:
        """Integer coordinates of ``v`` in the basis, or None if ``v`` is not in the lattice."""
        t = [Fraction(x) * self.den for x in v]
        if any(x.denominator != 1 for x in t):
            return None
        if not self.basis:
            return [] if not any(t) else None
        if self.rank == self.dim and _is_triangular(self.basis):
            return _triangular_coords(self.basis, t)
        return solve([list(r) for r in self.basis], t)

    def __contains__(self, v) -> bool:
        return self.coords(v) is not None

    def contains_lattice(self, other: "RatLattice") -> bool:
        return all(v in self for v in other.vectors())

    def __add__(self, other: "RatLattice") -> "RatLattice":
        return RatLattice.from_generators(self.vectors() + other.vectors(), self.dim)

    def intersect(self, other: "RatLattice") -> "RatLattice":
        if not self.basis or not other.basis:
            return RatLattice((), 1, self.dim)
        D = lcm(self.den, other.den)
        B1 = [[x * (D // self.den) for x in r] for r in self.basis]
        B2 = [[x * (D // other.den) for x in r] for r in other.basis]
        K = kernel(B1 + B2)
        gens = []
        for k in K:
            x = k[:len(B1)]
            gens.append([Fraction(sum(x[i] * B1[i][j] for i in range(len(B1))), D)
                         for j in range(self.dim)])
        return RatLattice.from_generators(gens, self.dim)

    def scale(self, q) -> "RatLattice":
        q = Fraction(q)
        return RatLattice.from_generators([[x * q for x in v] for v in self.vectors()], self.dim)

    def _sub_hnf(self, sub: "RatLattice") -> list[list[int]]:
        return _sub_hnf_cached(self, sub)

    def _sub_hnf_uncached(self, sub: "RatLattice") -> list[list[int]]:
        rows = []
        for v in sub.vectors():
            c = self.coords(v)
            if c is None:
                raise ValueError("not a sublattice")
            rows.append(c)
        H, _ = hnf(rows)
        return [r for r in H if any(r)]

    def index(self, sub: "RatLattice") -> int:
        H = self._sub_hnf(sub)
        if len(H) != self.rank:
            raise ValueError("infinite index")
        out = 1
        for i, r in enumerate(H):
            out *= r[i]
        return out

    def residue(self, sub: "RatLattice", v) -> tuple[int, ...]:
        """Canonical coordinates of ``v`` modulo a full-rank sublattice."""
        c = self.coords(v)
        if c is None:
            raise ValueError("vector not in lattice")
        H = self._sub_hnf(sub)
        for i, r in enumerate(H):
            q = c[i] // r[i]
            if q:
                c = [a - q * b for a, b in zip(c, r)]
        return tuple(c)

    def element(self, coords: Sequence[int]) -> list[Fraction]:
        return [Fraction(sum(c * r[j] for c, r in zip(coords, self.basis)), self.den)
                for j in range(self.dim)]

    def coset_reps(self, sub: "RatLattice") -> list[tuple[int, ...]]:
        """Coordinate tuples of a full set of coset representatives of ``self / sub``."""
        H = self._sub_hnf(sub)
        if len(H) != self.rank:
            raise ValueError("infinite index")
        reps = [()]
        for i in range(self.rank):
            reps = [r + (a,) for r in reps for a in range(H[i][i])]
        return reps


def _triangular_coords(basis, t) -> list[int] | None:
    """Solve c B = t for an upper triangular integer basis B (full rank)."""
    t = [int(x) for x in t]
    c = []
    for i, r in enumerate(basis):
        q, rem = divmod(t[i], r[i])
        if rem:
            return None
        c.append(q)
        if q:
            for j in range(i, len(t)):
                t[j] -= q * r[j]
    return c


@lru_cache(maxsize=65536)
def _sub_hnf_cached(lat: RatLattice, sub: RatLattice):
    return lat._sub_hnf_uncached(sub)


def _is_triangular(basis) -> bool:
    return all(basis[i][i] and not any(basis[i][:i]) for i in range(len(basis)))
