"""Exact arithmetic in cyclotomic fields Q(zeta_N).

Elements are stored in the power basis 1, z, ..., z^(phi(N)-1) of
Q(zeta_N), i.e. as the remainder of a polynomial in z modulo the N-th
cyclotomic polynomial.  That remainder is unique, so two elements of the
same level are equal iff their coordinate tuples agree.  Elements of
different levels are compared after lifting both to the lcm level.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd, pi

__all__ = ["Cyclotomic", "cyclotomic_poly", "euler_phi", "as_exact", "zeta", "sqrt_rational"]


def _factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    r = n
    for p in _factor(n):
        r = r // p * (p - 1)
    return r


def _moebius(n: int) -> int:
    f = _factor(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        q[i] = c
        if c:
            for j, dj in enumerate(den):
                num[i + j] -= c * dj
    assert not any(num), "inexact polynomial division"
    return q


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = _poly_divexact(num, list(cyclotomic_poly(d)))
    return tuple(num)


@lru_cache(maxsize=None)
def _ramanujan(n: int, j: int) -> int:
    # trace of zeta_n^j down to Q
    g = gcd(j, n)
    m = n // g
    return _moebius(m) * euler_phi(n) // euler_phi(m)


def _reduce_int(acc: list[int], n: int) -> list[int]:
    """Remainder mod Phi_n of an integer vector already folded mod x^n - 1."""
    phi = cyclotomic_poly(n)
    deg = len(phi) - 1
    nz = [(j, c) for j, c in enumerate(phi[:deg]) if c]
    for i in range(n - 1, deg - 1, -1):
        c = acc[i]
        if c:
            base = i - deg
            for j, pj in nz:
                acc[base + j] -= c * pj
            acc[i] = 0
    return acc[:deg]


def _normalize(num: list[int], den: int) -> tuple[tuple[int, ...], int]:
    g = den
    for x in num:
        if x:
            g = gcd(g, x)
            if g == 1:
                break
    if den < 0:
        g = -g
    if g != 1:
        num = [x // g for x in num]
        den //= g
    return tuple(num), den


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


class Cyclotomic:
    """An element of Q(zeta_N), immutable.

    Internally an integer vector `num` of length phi(N) over a positive
    common denominator `den`, in lowest terms.
    """

    __slots__ = ("level", "num", "den", "_hash")

    def __init__(self, level: int, coords=(), *, _raw=None):
        if level < 1:
            raise ValueError("level must be positive")
        self.level = level
        self._hash = None
        if _raw is not None:
            self.num, self.den = _raw
            return
        fr = [Fraction(c) for c in coords]
        den = 1
        for c in fr:
            den = _lcm(den, c.denominator)
        acc = [0] * level
        for i, c in enumerate(fr):
            if c:
                acc[i % level] += c.numerator * (den // c.denominator)
        self.num, self.den = _normalize(_reduce_int(acc, level), den)

    @classmethod
    def _make(cls, level: int, acc: list[int], den: int, reduce: bool = True) -> "Cyclotomic":
        if reduce:
            acc = _reduce_int(acc, level)
        return cls(level, _raw=_normalize(acc, den))

    # constructors
    @classmethod
    def rational(cls, r, level: int = 1) -> "Cyclotomic":
        return cls(level, [Fraction(r)])

    @classmethod
    def zeta(cls, n: int, e: int = 1) -> "Cyclotomic":
        v = [0] * n
        v[e % n] = 1
        return cls._make(n, v, 1)

    @classmethod
    def from_exponents(cls, n: int, counts: dict[int, object]) -> "Cyclotomic":
        """Sum of c * zeta_n^e over the mapping e -> c."""
        fr = {e: Fraction(c) for e, c in counts.items()}
        den = 1
        for c in fr.values():
            den = _lcm(den, c.denominator)
        acc = [0] * n
        for e, c in fr.items():
            acc[e % n] += c.numerator * (den // c.denominator)
        return cls._make(n, acc, den)

    # structure
    @property
    def coords(self) -> tuple[Fraction, ...]:
        """Power-basis coordinates (length phi(N))."""
        return tuple(Fraction(x, self.den) for x in self.num)

    def padded(self) -> tuple[Fraction, ...]:
        """Coordinates against zeta_N^0..zeta_N^(N-1) (canonical, zero padded)."""
        return self.coords + (Fraction(0),) * (self.level - len(self.num))

    def lift(self, m: int) -> "Cyclotomic":
        if m == self.level:
            return self
        if m % self.level:
            raise ValueError(f"level {self.level} does not divide {m}")
        step = m // self.level
        v = [0] * m
        for j, c in enumerate(self.num):
            v[j * step] = c
        return Cyclotomic._make(m, v, self.den)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational number")
        return Fraction(self.num[0], self.den) if self.num else Fraction(0)

    def trace(self) -> Fraction:
        """Normalized trace Tr_{Q(zeta_N)/Q}(a)/phi(N); independent of N."""
        n = self.level
        t = sum(c * _ramanujan(n, j) for j, c in enumerate(self.num) if c)
        return Fraction(t, self.den * euler_phi(n))

    # arithmetic
    def _common(self, other: "Cyclotomic"):
        m = _lcm(self.level, other.level)
        return self.lift(m), other.lift(m), m

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, m = self._common(other)
        den = _lcm(a.den, b.den)
        fa, fb = den // a.den, den // b.den
        return Cyclotomic._make(m, [x * fa + y * fb for x, y in zip(a.num, b.num)], den, reduce=False)

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.level, _raw=(tuple(-c for c in self.num), self.den))

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _scale(self, r: Fraction) -> "Cyclotomic":
        r = Fraction(r)
        return Cyclotomic._make(self.level, [c * r.numerator for c in self.num],
                                self.den * r.denominator, reduce=False) if r else \
            Cyclotomic._make(self.level, [0] * len(self.num), 1, reduce=False)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._scale(other)
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_rational():
            return self._scale(other.to_fraction())
        if self.is_rational():
            return other._scale(self.to_fraction())
        a, b, m = self._common(other)
        prod = [0] * m
        bn = [(j, y) for j, y in enumerate(b.num) if y]
        for i, x in enumerate(a.num):
            if x:
                for j, y in bn:
                    k = i + j
                    if k >= m:
                        k -= m
                    prod[k] += x * y
        return Cyclotomic._make(m, prod, a.den * b.den)

    __rmul__ = __mul__

    def galois(self, t: int) -> "Cyclotomic":
        """Image under zeta_N -> zeta_N^t."""
        n = self.level
        if gcd(t, n) != 1:
            raise ValueError(f"t={t} is not coprime to the level {n}")
        v = [0] * n
        for j, c in enumerate(self.num):
            if c:
                v[(j * t) % n] += c
        return Cyclotomic._make(n, v, self.den)

    def conj(self) -> "Cyclotomic":
        return self.galois(-1)

    def norm(self) -> Fraction:
        """Product of all conjugates under (Z/N)^x."""
        n = self.level
        acc = Cyclotomic(n, [1])
        for t in range(1, n + 1):
            if gcd(t, n) == 1:
                acc = acc * self.galois(t)
        return acc.to_fraction()

    def inv(self) -> "Cyclotomic":
        if not self:
            raise ZeroDivisionError("inverse of zero cyclotomic number")
        if self.is_rational():
            return Cyclotomic(self.level, [1 / self.to_fraction()])
        n = self.level
        acc = Cyclotomic(n, [1])
        for t in range(2, n + 1):
            if gcd(t, n) == 1:
                acc = acc * self.galois(t)
        nm = (acc * self).to_fraction()
        return acc._scale(1 / nm)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self._scale(1 / Fraction(other))
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inv()

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        acc = Cyclotomic(self.level, [1])
        base = self
        while e:
            if e & 1:
                acc = acc * base
            base = base * base
            e >>= 1
        return acc

    # comparison
    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.level == other.level:
            return self.num == other.num and self.den == other.den
        if self.is_rational() and other.is_rational():
            return self.to_fraction() == other.to_fraction()
        a, b, _ = self._common(other)
        return a.num == b.num and a.den == b.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.trace())
        return self._hash

    def __bool__(self):
        return any(self.num)

    def __complex__(self):
        n = self.level
        return sum((c * cmath.exp(2j * pi * j / n) for j, c in enumerate(self.num) if c), 0j) / self.den

    def to_complex(self) -> complex:
        return complex(self)

    def __repr__(self):
        if self.is_rational():
            return f"Cyclotomic({self.to_fraction()})"
        terms = [f"{Fraction(c, self.den)}*z{self.level}^{j}" for j, c in enumerate(self.num) if c]
        return "Cyclotomic(" + " + ".join(terms) + ")"


def _coerce(x):
    if isinstance(x, Cyclotomic):
        return x
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return Cyclotomic(1, _raw=((x.numerator,), x.denominator))
    return NotImplemented


def zeta(n: int, e: int = 1) -> Cyclotomic:
    return Cyclotomic.zeta(n, e)


def as_exact(x):
    """Normalize an exact scalar: rational Cyclotomics collapse to Fraction."""
    if isinstance(x, Cyclotomic):
        return x.to_fraction() if x.is_rational() else x
    if isinstance(x, int):
        return Fraction(x)
    return x


def _sqrt_prime(p: int) -> Cyclotomic:
    """Positive square root of the prime p."""
    if p == 2:
        return Cyclotomic.zeta(8, 1) + Cyclotomic.zeta(8, 7)
    counts: dict[int, object] = {}
    for a in range(1, p):
        counts[a] = 1 if pow(a, (p - 1) // 2, p) == 1 else -1
    g = Cyclotomic.from_exponents(p, counts)
    if p % 4 == 3:
        g = g * Cyclotomic.zeta(4, 3)
    return g if complex(g).real > 0 else -g


def sqrt_rational(r) -> Fraction | Cyclotomic:
    """Square root of a rational: principal branch, exact in a cyclotomic field."""
    r = Fraction(r)
    if r == 0:
        return Fraction(0)
    a = abs(r.numerator) * r.denominator
    out = Fraction(1, r.denominator)
    root = Fraction(1)
    for p, e in _factor(a).items():
        out *= p ** (e // 2)
        if e % 2:
            root = root * _sqrt_prime(p)
    if r < 0:
        root = root * Cyclotomic.zeta(4, 1)
    return as_exact(root * out)
