"""Small integer helpers: factoring, primes, Kronecker symbol, Bernoulli numbers."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, gcd, isqrt

import numpy as np

from .cyclotomic import _factor as factor
from .cyclotomic import euler_phi

__all__ = [
    "factor",
    "euler_phi",
    "primes_upto",
    "is_prime",
    "kronecker",
    "squarefree_part",
    "fundamental_discriminant",
    "bernoulli",
    "bernoulli_poly",
    "valuation",
    "primitive_root",
]


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def is_prime(n: int) -> bool:
    return n >= 2 and factor(n) == {n: 1}


def valuation(x, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    a, b = x.numerator, x.denominator
    while a % p == 0:
        a //= p
        v += 1
    while b % p == 0:
        b //= p
        v -= 1
    return v


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n) for odd n > 0
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def squarefree_part(d: int) -> int:
    if d == 0:
        raise ValueError("zero has no squarefree part")
    sign = -1 if d < 0 else 1
    out = 1
    for p, e in factor(abs(d)).items():
        if e % 2:
            out *= p
    return sign * out


def fundamental_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt(d)); 1 when d is a square."""
    d0 = squarefree_part(d)
    if d0 == 1:
        return 1
    return d0 if d0 % 4 == 1 else 4 * d0


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli numbers with B_1 = -1/2."""
    if n == 0:
        return Fraction(1)
    return -sum((comb(n + 1, k) * bernoulli(k) for k in range(n)), Fraction(0)) / (n + 1)


def bernoulli_poly(n: int, x) -> Fraction:
    x = Fraction(x)
    return sum((comb(n, k) * bernoulli(k) * x ** (n - k) for k in range(n + 1)), Fraction(0))


@lru_cache(maxsize=None)
def primitive_root(pe: int, p: int) -> int:
    """Smallest generator of (Z/p^e)^x for odd p."""
    order = euler_phi(pe)
    qs = list(factor(order))
    for g in range(2, pe):
        if gcd(g, pe) != 1:
            continue
        if all(pow(g, order // q, pe) != 1 for q in qs):
            return g
    raise ValueError(f"no primitive root mod {pe}")
