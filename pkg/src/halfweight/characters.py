"""Dirichlet characters with exact values, character sums, parity data and L-values.

Characters are the ideal (Dirichlet) characters chi* of the text.  The Gauss
sum of the finite part uses phi_f^{-1}(a); for a > 0 coprime to the
conductor that equals chi*(a), because the Hecke character is trivial on
positive rationals.  So `gauss_sum` is the classical sum of chi(a) e(a/N).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from math import gcd

import numpy as np

from .arith import (bernoulli_poly, factor, fundamental_discriminant, kronecker,
                    primes_upto, primitive_root)
from .cyclotomic import Cyclotomic, as_exact, euler_phi
from .symmat import PD, HalfIntSymMat, is_psd

__all__ = [
    "DirichletCharacter",
    "ParityData",
    "gauss_sum",
    "jacobi_sum",
    "rho_tau",
    "period_identity",
    "parity_bundle",
    "dirichlet_L",
    "lambda_norm",
    "l_constituents",
    "characters_mod",
]


def _lcm(a, b):
    return a // gcd(a, b) * b


@lru_cache(maxsize=None)
def _components(n: int):
    """Canonical cyclic components of (Z/n)^x.

    Returns a list of (prime power, generator lifted mod n, order, dlog table)
    where the dlog table maps residues mod the prime power to exponents.
    For 2^e with e >= 3 there are two components, -1 and 5.
    """
    comps = []
    for p, e in sorted(factor(n).items()):
        pe = p ** e
        rest = n // pe

        def lift(g, pe=pe, rest=rest):
            # g mod pe, 1 mod rest
            if rest == 1:
                return g % n
            t = ((g - 1) * pow(rest, -1, pe)) % pe
            return (1 + rest * t) % n

        if p == 2:
            if e == 1:
                continue
            table = {}
            if e == 2:
                table = {1: 0, 3: 1}
                comps.append((pe, lift(pe - 1), 2, table, "sign"))
                continue
            sign_table = {}
            five_table = {}
            x = 1
            for t in range(pe // 4):
                sign_table[x] = 0
                sign_table[(-x) % pe] = 1
                five_table[x] = t
                five_table[(-x) % pe] = t
                x = x * 5 % pe
            comps.append((pe, lift(pe - 1), 2, sign_table, "sign"))
            comps.append((pe, lift(5), pe // 4, five_table, "five"))
        else:
            g = primitive_root(pe, p)
            order = pe // p * (p - 1)
            table = {}
            x = 1
            for t in range(order):
                table[x] = t
                x = x * g % pe
            comps.append((pe, lift(g), order, table, "cyclic"))
    return comps


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    exponents: tuple[int, ...]

    def __post_init__(self):
        comps = _components(self.modulus)
        if len(self.exponents) != len(comps):
            raise ValueError(f"modulus {self.modulus} needs {len(comps)} exponents")
        object.__setattr__(self, "exponents",
                           tuple(e % c[2] for e, c in zip(self.exponents, comps)))

    # construction
    @classmethod
    def trivial(cls, modulus: int = 1) -> "DirichletCharacter":
        return cls(modulus, (0,) * len(_components(modulus)))

    @classmethod
    def from_spec(cls, spec: str) -> "DirichletCharacter":
        """Parse "N:e1,e2,..." (exponents on the canonical generators)."""
        try:
            mod, _, rest = spec.partition(":")
            n = int(mod)
            exps = tuple(int(x) for x in rest.split(",") if x.strip()) if rest.strip() else ()
        except ValueError as err:
            raise ValueError(f"bad character spec {spec!r}") from err
        if not rest.strip():
            exps = (0,) * len(_components(n))
        return cls(n, exps)

    @classmethod
    def from_generator_values(cls, modulus: int, values) -> "DirichletCharacter":
        """Build from the values (roots of unity as complex or +-1) on the generators."""
        exps = []
        for comp, val in zip(_components(modulus), values):
            order = comp[2]
            ang = cmath.phase(complex(val)) / (2 * math.pi) * order
            e = round(ang) % order
            if abs(ang - round(ang)) > 1e-9 or abs(abs(complex(val)) - 1) > 1e-9:
                raise ValueError("value is not a root of unity of the component order")
            exps.append(e)
        return cls(modulus, tuple(exps))

    @classmethod
    def kronecker(cls, disc: int) -> "DirichletCharacter":
        """The character a -> (disc/a) modulo |disc| (disc a fundamental discriminant)."""
        if disc == 1:
            return cls.trivial(1)
        n = abs(disc)
        vals = [kronecker(disc, c[1]) for c in _components(n)]
        return cls.from_generator_values(n, vals)

    def spec(self) -> str:
        return f"{self.modulus}:" + ",".join(str(e) for e in self.exponents)

    # structure
    @property
    def components(self):
        return _components(self.modulus)

    @cached_property
    def order(self) -> int:
        o = 1
        for e, c in zip(self.exponents, self.components):
            o = _lcm(o, c[2] // gcd(e, c[2]))
        return o

    def is_trivial(self) -> bool:
        return self.order == 1

    def value_exponent(self, a: int) -> int | None:
        """k with chi(a) = zeta_order^k, or None when gcd(a, N) > 1."""
        n = self.modulus
        if gcd(a, n) != 1:
            return None
        o = self.order
        k = 0
        for e, (pe, _, order, table, _kind) in zip(self.exponents, self.components):
            if e:
                k += (e * o // order) * table[a % pe]
        return k % o

    def __call__(self, a: int):
        k = self.value_exponent(a)
        if k is None:
            return Fraction(0)
        if self.order <= 2:
            return Fraction(1 if k == 0 else -1)
        return as_exact(Cyclotomic.zeta(self.order, k))

    def value_complex(self, a: int) -> complex:
        k = self.value_exponent(a)
        if k is None:
            return 0j
        return cmath.exp(2j * math.pi * k / self.order)

    @cached_property
    def parity(self) -> int:
        return 1 if self.modulus <= 2 else int(self(self.modulus - 1))

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if self.modulus != other.modulus:
            raise ValueError("characters have different moduli")
        return DirichletCharacter(self.modulus, tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __pow__(self, k: int) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple(k * e for e in self.exponents))

    def conj(self) -> "DirichletCharacter":
        return self ** -1

    def galois(self, t: int) -> "DirichletCharacter":
        """chi^sigma for sigma: zeta -> zeta^t on the values."""
        if gcd(t, self.order) != 1:
            raise ValueError("t must be coprime to the character order")
        return self ** t

    @cached_property
    def conductor(self) -> int:
        f = 1
        comps = self.components
        by_prime: dict[int, list] = {}
        for e, c in zip(self.exponents, comps):
            by_prime.setdefault(c[0], []).append((e, c))
        for pe, items in by_prime.items():
            if pe % 2 == 0:
                sign_e = next((e for e, c in items if c[4] == "sign"), 0)
                five = [(e, c) for e, c in items if c[4] == "five"]
                if five and five[0][0] % five[0][1][2]:
                    e5, c5 = five[0]
                    o5 = c5[2] // gcd(e5, c5[2])
                    f *= 4 * o5
                elif sign_e:
                    f *= 4
            else:
                (e, c), = items
                o = c[2] // gcd(e, c[2])
                if o > 1:
                    p = next(iter(factor(pe)))
                    v = 0
                    while o % p == 0:
                        o //= p
                        v += 1
                    f *= p ** (v + 1)
        return f

    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def __repr__(self):
        return f"DirichletCharacter({self.spec()})"


def characters_mod(n: int) -> list[DirichletCharacter]:
    comps = _components(n)
    return [DirichletCharacter(n, e) for e in product(*(range(c[2]) for c in comps))]


def _sum_as_cyclotomic(level: int, counts: dict[int, int]):
    return as_exact(Cyclotomic.from_exponents(level, counts))


def gauss_sum(chi: DirichletCharacter):
    """sum_{a=1}^{N} chi(a) e(a/N), exact."""
    n = chi.modulus
    if not chi.is_primitive():
        warnings.warn(f"gauss_sum: {chi} is not primitive (conductor {chi.conductor})",
                      stacklevel=2)
    o = chi.order
    m = _lcm(n, o)
    counts: dict[int, int] = {}
    for a in range(1, n + 1):
        k = chi.value_exponent(a)
        if k is None:
            continue
        e = (k * (m // o) + a * (m // n)) % m
        counts[e] = counts.get(e, 0) + 1
    return _sum_as_cyclotomic(m, counts)


def jacobi_sum(chi1: DirichletCharacter, chi2: DirichletCharacter):
    """sum_{a mod c} chi1(a) chi2(1-a), characters vanishing on non-units."""
    if chi1.modulus != chi2.modulus:
        raise ValueError("jacobi_sum needs characters of a common modulus")
    c = chi1.modulus
    o1, o2 = chi1.order, chi2.order
    m = _lcm(o1, o2)
    counts: dict[int, int] = {}
    for a in range(c):
        k1 = chi1.value_exponent(a)
        k2 = chi2.value_exponent(1 - a)
        if k1 is None or k2 is None:
            continue
        e = (k1 * (m // o1) + k2 * (m // o2)) % m
        counts[e] = counts.get(e, 0) + 1
    return _sum_as_cyclotomic(m, counts)


def rho_tau(n: int, tau: HalfIntSymMat) -> DirichletCharacter:
    """Quadratic character of Q(i^[n/2] sqrt|2 tau|)."""
    if is_psd(tau) != PD:
        raise ValueError("rho_tau needs a positive definite matrix")
    d = (-1) ** (n // 2) * tau.det2()
    return DirichletCharacter.kronecker(fundamental_discriminant(d))


def period_identity(psi: DirichletCharacter, rho: DirichletCharacter, n: int) -> dict:
    """Compare G(eta) G(eta^(n-1)) with its Gauss/Jacobi factorization, eta = conj(psi) rho.

    The right side is G(pb) G(pb^(n-1)) G(rho)^n / (J(rho,rho)^(n-1) J(pb,rho) J(pb^(n-1),rho^(n-1)))
    with pb = conj(psi).  All sums are exact; "ok" is exact equality.
    """
    if psi.modulus != rho.modulus:
        raise ValueError("psi and rho need a common modulus")
    pb = psi.conj()
    eta = pb * rho
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lhs = as_exact(gauss_sum(eta) * gauss_sum(eta ** (n - 1)))
        num = gauss_sum(pb) * gauss_sum(pb ** (n - 1)) * gauss_sum(rho) ** n
    den = (as_exact(jacobi_sum(rho, rho)) ** (n - 1) * jacobi_sum(pb, rho)
           * jacobi_sum(pb ** (n - 1), rho ** (n - 1)))
    if den == 0:
        raise ZeroDivisionError("a Jacobi sum in the factorization vanishes")
    rhs = as_exact(num / den)
    return {"lhs": lhs, "rhs": rhs, "ok": lhs == rhs, "eta": eta}


@dataclass(frozen=True)
class ParityData:
    n: int
    k2: int
    epsilon: int
    mu: int
    delta: int
    char2_ok: bool


def parity_bundle(n: int, k2: int, psi: DirichletCharacter, chi: DirichletCharacter) -> ParityData:
    kfloor = k2 // 2
    t_psi = 0 if psi.parity == 1 else 1
    if psi.modulus == chi.modulus:
        t_pc = 0 if (psi * chi).parity == 1 else 1
    else:
        t_pc = (t_psi + (0 if chi.parity == 1 else 1)) % 2
    eps = (t_psi - kfloor) % 2
    mu = (t_pc - kfloor) % 2
    return ParityData(n, k2, eps, mu, n % 2, (n * eps) % 2 == 0)


# ---------------------------------------------------------------- L-values

def _is_nonpositive_int(s) -> bool:
    if isinstance(s, (int, Fraction)):
        return Fraction(s).denominator == 1 and s <= 0
    return False


def dirichlet_L(s, chi: DirichletCharacter, mode: str = "numeric", prime_bound: int = 100000):
    """L(s, chi) for the Dirichlet character chi (imprimitive: Euler factors at p | N absent).

    mode "exact": s a non-positive integer, returns -B_{n,chi}/n with n = 1 - s.
    mode "numeric": returns (value, error estimate).
    """
    if mode == "exact":
        if not _is_nonpositive_int(s):
            raise ValueError("exact mode needs a non-positive integer s")
        n = 1 - int(s)
        N = chi.modulus
        acc = Fraction(0)
        for a in range(1, N + 1):
            v = chi(a)
            if v != 0:
                acc = v * bernoulli_poly(n, Fraction(a, N)) + acc
        return as_exact(-(acc * Fraction(N) ** (n - 1)) / n)
    if mode != "numeric":
        raise ValueError(f"unknown mode {mode!r}")
    s = complex(s)
    sigma = s.real
    if sigma > 1:
        logv = 0j
        for p in primes_upto(prime_bound):
            v = chi.value_complex(p)
            if v:
                logv -= cmath.log(1 - v * p ** (-s))
        P = prime_bound
        tail = P ** (1 - sigma) / ((sigma - 1) * (1 - P ** (-sigma)))
        val = cmath.exp(logv)
        return val, abs(val) * (math.exp(tail) - 1)
    if sigma > 0 and not chi.is_trivial():
        # partial sums over whole periods plus the mean-value tail correction:
        # the tail is s * int A(u) u^(-s-1) du with A periodic of mean abar
        N = chi.modulus
        X = N * max(1, prime_bound // N)
        a = np.arange(1, X + 1)
        per = np.array([chi.value_complex(int(r)) for r in range(N)])
        terms = per[a % N] * np.exp(-s * np.log(a.astype(np.float64)))
        cum = np.concatenate([[0], np.cumsum(per[np.arange(1, N) % N])])
        abar = complex(cum.mean())
        val = complex(terms.sum()) + abar * X ** (-s)
        err = N * N * abs(s) * abs(s + 1) * X ** (-sigma - 1) + 1e-12 * abs(val)
        return val, err
    raise ValueError(f"L({s}, {chi}) is outside the numeric region (Re s > 1, or Re s > 0 for nontrivial chi)")


def l_constituents(n: int, kappa2: int, s, phi: DirichletCharacter):
    """(argument, character) pairs whose L-values multiply to Lambda^{n,kappa}(s, phi)."""
    s = Fraction(s) if isinstance(s, (int, Fraction, str)) else s
    phi2 = phi * phi
    if kappa2 % 2 == 0:
        out = [(2 * s, phi)]
        out += [(4 * s - 2 * i, phi2) for i in range(1, n // 2 + 1)]
    else:
        out = [(4 * s - 2 * i + 1, phi2) for i in range(1, (n + 1) // 2 + 1)]
    return out


def lambda_norm(n: int, kappa2: int, s, phi: DirichletCharacter, removed=(), prime_bound: int = 100000):
    """Lambda_a^{n,kappa}(s, phi) with the Euler factors at `removed` primes deleted."""
    total = 1 + 0j
    err = 0.0
    for arg, ch in l_constituents(n, kappa2, s, phi):
        try:
            if _is_nonpositive_int(arg):
                v = complex(dirichlet_L(arg, ch, "exact"))
                e = 0.0
            else:
                v, e = dirichlet_L(arg, ch, "numeric", prime_bound)
        except ValueError as err_:
            raise ValueError(f"factor L({arg}, {ch.spec()}) cannot be evaluated: {err_}") from err_
        for p in removed:
            v *= 1 - ch.value_complex(p) * p ** (-complex(arg))
            e *= abs(1 - ch.value_complex(p) * p ** (-complex(arg)))
        err = abs(total) * e + abs(v) * err + err * e
        total *= v
    return total, err
