"""Half-integral symmetric matrices, the Fourier index set.

A matrix tau with integer diagonal and half-integer off-diagonal entries
is stored through its doubled matrix T = 2*tau (integer, even diagonal),
upper triangle only, row-major.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import gcd, isqrt
from typing import Iterator, Sequence

__all__ = [
    "HalfIntSymMat",
    "is_psd",
    "enumerate_psd",
    "level_ideal",
    "PD",
    "PSD",
    "INDEFINITE",
    "int_det",
]

PD = "positive_definite"
PSD = "positive_semidefinite"
INDEFINITE = "indefinite"


def int_det(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix (Bareiss)."""
    a = [list(map(int, row)) for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class HalfIntSymMat:
    n: int
    upper: tuple[int, ...]

    def __post_init__(self):
        if len(self.upper) != self.n * (self.n + 1) // 2:
            raise ValueError("wrong number of upper-triangle entries")
        for i in range(self.n):
            if self.entry2(i, i) % 2:
                raise ValueError("doubled matrix must have even diagonal")

    # constructors
    @classmethod
    def from_doubled(cls, t: Sequence[Sequence[int]]) -> "HalfIntSymMat":
        n = len(t)
        for i in range(n):
            for j in range(n):
                if t[i][j] != t[j][i]:
                    raise ValueError("matrix is not symmetric")
        return cls(n, tuple(int(t[i][j]) for i in range(n) for j in range(i, n)))

    @classmethod
    def from_tau(cls, tau: Sequence[Sequence]) -> "HalfIntSymMat":
        doubled = []
        for row in tau:
            r = []
            for x in row:
                v = 2 * Fraction(x)
                if v.denominator != 1:
                    raise ValueError("entry is not half-integral")
                r.append(int(v))
            doubled.append(r)
        return cls.from_doubled(doubled)

    @classmethod
    def scalar(cls, m: int) -> "HalfIntSymMat":
        return cls(1, (2 * m,))

    @classmethod
    def zero(cls, n: int) -> "HalfIntSymMat":
        return cls(n, (0,) * (n * (n + 1) // 2))

    @classmethod
    def diag(cls, *entries: int) -> "HalfIntSymMat":
        n = len(entries)
        return cls.from_doubled([[2 * entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    # access
    def _index(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return i * self.n - i * (i - 1) // 2 + (j - i)

    def entry2(self, i: int, j: int) -> int:
        return self.upper[self._index(i, j)]

    def entry(self, i: int, j: int) -> Fraction:
        return Fraction(self.entry2(i, j), 2)

    def doubled(self) -> list[list[int]]:
        return [[self.entry2(i, j) for j in range(self.n)] for i in range(self.n)]

    def tau(self) -> list[list[Fraction]]:
        return [[self.entry(i, j) for j in range(self.n)] for i in range(self.n)]

    @property
    def trace(self) -> int:
        return sum(self.entry2(i, i) for i in range(self.n)) // 2

    def sort_key(self):
        return (self.trace, self.upper)

    def __lt__(self, other: "HalfIntSymMat"):
        return self.sort_key() < other.sort_key()

    def det2(self) -> int:
        """det(2 tau)."""
        return int_det(self.doubled())

    def det(self) -> Fraction:
        return Fraction(self.det2(), 2 ** self.n)

    def pad(self, extra: int = 1) -> "HalfIntSymMat":
        """diag[tau, 0] with `extra` zero rows/columns appended."""
        m = self.n + extra
        t = [[0] * m for _ in range(m)]
        for i in range(self.n):
            for j in range(self.n):
                t[i][j] = self.entry2(i, j)
        return HalfIntSymMat.from_doubled(t)

    def block(self, k: int) -> "HalfIntSymMat":
        """Upper-left k x k block."""
        return HalfIntSymMat.from_doubled([row[:k] for row in self.doubled()[:k]])

    def is_padded(self, extra: int = 1) -> bool:
        """Whether the last `extra` rows and columns vanish."""
        for i in range(self.n - extra, self.n):
            for j in range(self.n):
                if self.entry2(i, j):
                    return False
        return True

    def __add__(self, other: "HalfIntSymMat") -> "HalfIntSymMat":
        if self.n != other.n:
            raise ValueError("degree mismatch")
        return HalfIntSymMat(self.n, tuple(a + b for a, b in zip(self.upper, other.upper)))

    def __sub__(self, other: "HalfIntSymMat") -> "HalfIntSymMat":
        return HalfIntSymMat(self.n, tuple(a - b for a, b in zip(self.upper, other.upper)))

    def __repr__(self):
        return f"HalfIntSymMat({self.doubled()})"


def _principal_minor(t, idx) -> int:
    return int_det([[t[i][j] for j in idx] for i in idx])


def is_psd(tau: HalfIntSymMat) -> str:
    """Classify by exact principal minors of the doubled matrix."""
    t = tau.doubled()
    n = tau.n
    if all(_principal_minor(t, range(k)) > 0 for k in range(1, n + 1)):
        return PD
    for k in range(1, n + 1):
        for idx in combinations(range(n), k):
            if _principal_minor(t, idx) < 0:
                return INDEFINITE
    return PSD


def _diagonals(n: int, budget: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for a in range(budget + 1):
        for rest in _diagonals(n - 1, budget - a):
            yield (a,) + rest


def enumerate_psd(n: int, bound: int) -> list[HalfIntSymMat]:
    """All positive semidefinite tau with tr(tau) <= bound, in (trace, lex) order."""
    if bound < 0:
        return []
    out = []
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for diag in _diagonals(n, bound):
        d2 = [2 * a for a in diag]
        ranges = []
        for i, j in pairs:
            b = isqrt(d2[i] * d2[j])
            ranges.append(range(-b, b + 1))
        for offs in product(*ranges):
            t = [[0] * n for _ in range(n)]
            for i in range(n):
                t[i][i] = d2[i]
            for (i, j), v in zip(pairs, offs):
                t[i][j] = t[j][i] = v
            m = HalfIntSymMat.from_doubled(t)
            if is_psd(m) != INDEFINITE:
                out.append(m)
    out.sort(key=HalfIntSymMat.sort_key)
    return out


def level_ideal(tau: HalfIntSymMat) -> int:
    """Smallest positive integer N with h^T (2 tau) h in (4/N) Z for all integral h.

    The gcd of the quadratic form's values is the gcd of its values on the
    basis vectors and on pairwise sums e_i + e_j.
    """
    if is_psd(tau) != PD:
        raise ValueError("level_ideal needs a positive definite matrix")
    t = tau.doubled()
    g = 0
    for i in range(tau.n):
        g = gcd(g, t[i][i])
        for j in range(i + 1, tau.n):
            g = gcd(g, t[i][i] + t[j][j] + 2 * t[i][j])
    return 4 // gcd(g, 4)
