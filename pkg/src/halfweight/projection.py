"""Matrix Gamma values, matrix-argument Gaussian integrals and holomorphic projection.

Also the special-value sets and the power-of-pi exponent bookkeeping.

Integrals over the cone Y of positive definite matrices use the invariant
measure d*y = |y|^(-(n+1)/2) dy throughout.  The one place a Lebesgue dy
integral enters is `holo_project`, which converts it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Sequence

from .characters import DirichletCharacter
from .cyclotomic import Cyclotomic, as_exact, sqrt_rational
from .fourier import FourierExpansion
from .polys import LaurentPoly
from .symmat import HalfIntSymMat

__all__ = [
    "GammaValue",
    "gamma_half",
    "gamma_n",
    "mu_constant",
    "MatrixGammaResult",
    "matrix_gamma_integral",
    "y_vars",
    "StructuredTerm",
    "StructuredNonholomorphic",
    "from_holomorphic",
    "holo_project",
    "exceptional_case",
    "OmegaSpec",
    "OMEGA_KINDS",
    "omega_set",
    "ExponentBundle",
    "exponent_bundle",
    "CASES",
]

HALF = Fraction(1, 2)


def _half(x) -> Fraction:
    x = Fraction(x)
    if (2 * x).denominator != 1:
        raise ValueError(f"{x} is not a half-integer")
    return x


def _rpow(x, e):
    """x^e for rational x > 0 and e in Z/2, exact (Fraction or Cyclotomic)."""
    x = Fraction(x)
    e = _half(e)
    if e.denominator == 1:
        return x ** int(e)
    if x <= 0:
        raise ValueError("half-integral power of a non-positive number")
    return as_exact(x ** int(e - HALF) * sqrt_rational(x))


# ---------------------------------------------------------------- Gamma values

@dataclass(frozen=True)
class GammaValue:
    """rational * pi^(q/4)."""

    rational: Fraction
    q: int = 0

    def __post_init__(self):
        object.__setattr__(self, "rational", Fraction(self.rational))
        object.__setattr__(self, "q", int(self.q))

    def __mul__(self, other):
        if isinstance(other, GammaValue):
            return GammaValue(self.rational * other.rational, self.q + other.q)
        return GammaValue(self.rational * Fraction(other), self.q)

    __rmul__ = __mul__

    def inv(self) -> "GammaValue":
        return GammaValue(1 / self.rational, -self.q)

    def __truediv__(self, other):
        if isinstance(other, GammaValue):
            return self * other.inv()
        return GammaValue(self.rational / Fraction(other), self.q)

    def __pow__(self, e: int):
        return GammaValue(self.rational ** e, self.q * e)

    def __float__(self):
        return float(self.rational) * math.pi ** (self.q / 4)

    @classmethod
    def pi_power(cls, e) -> "GammaValue":
        """pi^e for e in Z/4."""
        q = Fraction(e) * 4
        if q.denominator != 1:
            raise ValueError(f"pi^{e} is not a quarter-integral power")
        return cls(Fraction(1), int(q))

    def __repr__(self):
        return f"GammaValue({self.rational}, pi^({self.q}/4))"


@lru_cache(maxsize=None)
def gamma_half(s) -> GammaValue:
    """Gamma(s) for a positive half-integer s."""
    s = _half(s)
    if s <= 0:
        raise ValueError(f"Gamma has a pole or is not tabulated at {s}")
    if s.denominator == 1:
        return GammaValue(Fraction(math.factorial(int(s) - 1)))
    m = int(s - HALF)
    # Gamma(m + 1/2) = (2m)! / (4^m m!) sqrt(pi)
    return GammaValue(Fraction(math.factorial(2 * m), 4 ** m * math.factorial(m)), 2)


def gamma_n(n: int, s) -> GammaValue:
    """Siegel Gamma: pi^(n(n-1)/4) prod_{j<n} Gamma(s - j/2)."""
    s = _half(s)
    out = GammaValue(Fraction(1), n * (n - 1))
    for j in range(n):
        arg = s - Fraction(j, 2)
        if arg <= 0:
            raise ValueError(f"Gamma_{n}({s}) hits the pole at Gamma({arg})")
        out = out * gamma_half(arg)
    return out


def mu_constant(k, n: int) -> GammaValue:
    """Gamma_n(k - (n+1)/2) pi^(-n(k - (n+1)/2))."""
    a = _half(k) - Fraction(n + 1, 2)
    return gamma_n(n, a) * GammaValue.pi_power(-n * a)


# ---------------------------------------------------------------- matrix Gamma integrals

def y_vars(n: int, prefix: str = "y") -> tuple[str, ...]:
    return tuple(f"{prefix}{i + 1}{j + 1}" for i in range(n) for j in range(i, n))


@lru_cache(maxsize=None)
def _det_poly(n: int) -> LaurentPoly:
    names = y_vars(n, "u")
    idx = {}
    for i in range(n):
        for j in range(n):
            a, b = min(i, j), max(i, j)
            idx[i, j] = names.index(f"u{a + 1}{b + 1}")
    terms: dict = {}
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        e = [0] * len(names)
        for i in range(n):
            e[idx[i, perm[i]]] += 1
        terms[tuple(e)] = terms.get(tuple(e), 0) + sign
    return LaurentPoly(names, terms)


def _parse_monomial(P: LaurentPoly, n: int) -> list[tuple[dict[str, int], object]]:
    allowed = set(y_vars(n))
    for v in P.vars:
        if v not in allowed:
            raise ValueError(f"variable {v!r} is not an upper-triangular y_ij of degree {n}")
    out = []
    for e, c in P.terms.items():
        if any(x < 0 for x in e):
            raise ValueError("the polynomial has negative exponents")
        out.append(({v: x for v, x in zip(P.vars, e) if x}, c))
    return out


def _derive(n: int, c: Fraction, mono: dict[str, int]) -> dict[int, LaurentPoly]:
    """prod (d/dU_ij)^a_ij of |U|^c, as {j: Q_j} with result sum_j Q_j(U) |U|^(c-j)."""
    D = _det_poly(n)
    state = {0: LaurentPoly.const(1, D.vars)}
    for v, a in sorted(mono.items()):
        uv = "u" + v[1:]
        dD = D.diff(uv)
        for _ in range(a):
            new: dict[int, LaurentPoly] = {}
            for j, Q in state.items():
                dq = Q.diff(uv)
                if not dq.is_zero():
                    new[j] = new.get(j, LaurentPoly(D.vars)) + dq
                t = Q * dD * (c - j)
                if not t.is_zero():
                    new[j + 1] = new.get(j + 1, LaurentPoly(D.vars)) + t
            state = new
    return state


def _tau_entries(tau) -> list[list[Fraction]]:
    if isinstance(tau, HalfIntSymMat):
        return tau.tau()
    return [[Fraction(x) for x in row] for row in tau]


@dataclass(frozen=True)
class MatrixGammaResult:
    """gamma * coeff * det^det_exp, with det = |tau|."""

    n: int
    gamma: GammaValue
    coeff: object
    det: Fraction
    det_exp: Fraction

    def normalized(self):
        """|tau|^(n/2) gamma^-1 * value; exact when the total power of |tau| is integral."""
        e = self.det_exp + Fraction(self.n, 2)
        return as_exact(self.coeff * _rpow(self.det, e))

    def __float__(self):
        return float(self.gamma) * float(complex(self.coeff).real) * float(self.det) ** float(self.det_exp)

    def __complex__(self):
        return float(self.gamma) * complex(self.coeff) * float(self.det) ** float(self.det_exp)


def matrix_gamma_integral(P: LaurentPoly, tau, nu) -> MatrixGammaResult:
    """int_Y P(y) e^(-tr(tau y)) |y|^(nu - (n+1)/2) d*y, exactly.

    P is a polynomial in y11, y12, ..., ynn (upper triangle).  Each y_ii is
    -d/dU_ii and each y_ij (i < j) is -1/2 d/dU_ij applied to
    Gamma_n(s) |U|^(-s), s = nu - (n+1)/2, at U = tau.
    """
    T = _tau_entries(tau)
    n = len(T)
    nu = _half(nu)
    if not nu > n:
        raise ValueError(f"the integral needs nu > n, got nu = {nu} at n = {n}")
    s = nu - Fraction(n + 1, 2)
    c = -s
    D = _det_poly(n)
    at = {f"u{i + 1}{j + 1}": T[i][j] for i in range(n) for j in range(i, n)}
    det = D.evaluate(at)
    if det <= 0:
        raise ValueError("tau must be positive definite")
    total = Fraction(0)
    for mono, coef in _parse_monomial(P, n):
        scale = Fraction(1)
        for v, a in mono.items():
            scale *= Fraction(-1) ** a if v[1] == v[2] else Fraction(-1, 2) ** a
        acc = Fraction(0)
        for j, Q in _derive(n, c, mono).items():
            acc += Q.evaluate(at) * det ** (-j)
        total = as_exact(total + as_exact(coef) * scale * acc)
    return MatrixGammaResult(n, gamma_n(n, s), total, det, c)


# ---------------------------------------------------------------- holomorphic projection

@dataclass(frozen=True)
class StructuredTerm:
    """poly(pi y) |pi y|^(-r) e^(-2 pi tr(tau_exp y)) contributing to the coefficient at tau."""

    tau: HalfIntSymMat
    tau_exp: HalfIntSymMat
    poly: LaurentPoly
    r: Fraction = Fraction(0)


@dataclass
class StructuredNonholomorphic:
    degree: int
    weight2: int
    trunc: int
    terms: list[StructuredTerm] = field(default_factory=list)

    def indices(self) -> list[HalfIntSymMat]:
        return sorted({t.tau for t in self.terms}, key=HalfIntSymMat.sort_key)


def from_holomorphic(f: FourierExpansion) -> StructuredNonholomorphic:
    """Encode f as c_F(tau, y) = c_f(tau) e^(-2 pi tr(tau y)), positive definite tau only."""
    terms = []
    for tau, c in f.items():
        if tau.det() > 0:
            terms.append(StructuredTerm(tau, tau, LaurentPoly.const(c, y_vars(f.degree)), Fraction(0)))
    return StructuredNonholomorphic(f.degree, f.weight2, f.trunc, terms)


def _halve_vars(P: LaurentPoly) -> LaurentPoly:
    return LaurentPoly(P.vars, {e: c * Fraction(1, 2 ** sum(e)) for e, c in P.terms.items()})


def holo_project(F: StructuredNonholomorphic, k2: int | None = None, level=None, *,
                 mu_scale=1, enforce_weight_bound: bool = True) -> FourierExpansion:
    """c(tau) = mu(k,n)^-1 |4 tau|^(k-(n+1)/2) int_Y c_F(tau,y) e^(-2 pi tr(tau y)) |y|^(k-1-n) dy.

    Each term is reduced to `matrix_gamma_integral` by y -> w/(2 pi), which
    turns e^(-2 pi tr((tau + tau_exp) y)) into e^(-tr(V w)) with
    V = tau + tau_exp.  The dy-integral becomes a d*y-integral through
    dy = |y|^((n+1)/2) d*y.  The powers of pi cancel identically; the
    Gamma ratio must be rational, otherwise the coefficient is not
    algebraic and an error is raised.  mu_scale replaces mu(k,n) by
    mu_scale * mu(k,n).
    """
    n = F.degree
    k2 = F.weight2 if k2 is None else k2
    k = Fraction(k2, 2)
    if enforce_weight_bound and not k > 2 * n:
        raise ValueError(f"holomorphic projection needs k > 2n, got k = {k}, n = {n}")
    e = k - Fraction(n + 1, 2)
    mu_scale = as_exact(mu_scale)
    out: dict[HalfIntSymMat, object] = {}
    for idx, term in enumerate(F.terms):
        tau = term.tau
        if tau.trace > F.trunc:
            continue
        det_tau = tau.det()
        if det_tau <= 0:
            raise ValueError(f"term {idx}: index {tau} is not positive definite")
        r = _half(term.r)
        nu = k - r
        if not nu > n:
            raise ValueError(f"term {idx} at {tau}: the integral needs k - r > n, got k - r = {nu}")
        ratio = gamma_n(n, nu - Fraction(n + 1, 2)) / gamma_n(n, e)
        if ratio.q != 0:
            raise ValueError(f"term {idx} at {tau}: Gamma ratio {ratio} is not rational")
        V = tau + term.tau_exp
        res = matrix_gamma_integral(_halve_vars(term.poly), V.tau(), nu)
        # (2 pi)^(-n(nu-(n+1)/2)) from the substitution, pi^(-nr) from |pi y|^-r,
        # pi^(n e) from mu^-1: the pi powers cancel, leaving 2^(-n(nu-(n+1)/2)).
        val = (ratio.rational * res.coeff * _rpow(res.det, res.det_exp)
               * _rpow(Fraction(2), -n * (nu - Fraction(n + 1, 2)))
               * _rpow(Fraction(4) ** n * det_tau, e))
        out[tau] = as_exact(out.get(tau, 0) + as_exact(val) / mu_scale)
    return FourierExpansion(n, k2, F.trunc, out, level=level)


# ---------------------------------------------------------------- exceptional cases and sets

def _phi_trivial(phi) -> bool:
    return phi is None or phi.is_trivial()


def _phi_sq_trivial(phi) -> bool:
    return phi is None or phi.order <= 2


def exceptional_case(n: int, m, phi: DirichletCharacter | None = None) -> str:
    """'X', 'R1', 'R2' or 'none'; phi None means the trivial character."""
    m = Fraction(m)
    if m == n + 1 and _phi_sq_trivial(phi):
        return "X"
    if n == 1 and m == Fraction(3, 2) and _phi_trivial(phi):
        return "R1"
    if n > 1 and m == n + Fraction(3, 2) and _phi_sq_trivial(phi):
        return "R2"
    return "none"


OMEGA_KINDS = ("Omega0", "Omega'_g", "Omega'_nk", "Omega+", "Omega-")


@dataclass(frozen=True)
class OmegaSpec:
    """n, 2k, mu, optional 2l (default l = n/2 + mu) and whether g is a cusp form."""

    n: int
    k2: int
    mu: int = 0
    l2: int | None = None
    cusp: bool = False

    @property
    def k(self) -> Fraction:
        return Fraction(self.k2, 2)

    @property
    def ell(self) -> Fraction:
        return Fraction(self.l2, 2) if self.l2 is not None else Fraction(self.n, 2) + self.mu


def _is_int(x: Fraction) -> bool:
    return Fraction(x).denominator == 1


def _halves(lo: Fraction, hi: Fraction, lo_strict: bool, hi_strict: bool) -> Iterable[Fraction]:
    a = math.ceil(2 * lo)
    b = math.floor(2 * hi)
    for t in range(a, b + 1):
        x = Fraction(t, 2)
        if (lo_strict and x == lo) or (hi_strict and x == hi):
            continue
        yield x


def omega_set(spec: OmegaSpec, which: str) -> list[Fraction]:
    n, k, l, mu = spec.n, spec.k, spec.ell, spec.mu
    F = Fraction
    if which == "Omega0":
        q = F(n + 1, 4)
        win = _halves(F(n + 1) / 2 - (k - l) / 2, (k - l) / 2, False, False)
        return [s for s in win if _is_int(abs(s - q) + q - (k - l) / 2)]
    if which == "Omega'_g":
        lo = F(3 * n, 2) + 1
        if spec.cusp:
            win = _halves(lo, k - F(3 * n, 2), True, True)
            win = (m for m in win if m <= k - l + F(n, 2))
        else:
            win = _halves(lo, k - l - F(3 * n, 2), True, True)
        return [m for m in win if _is_int((n - 2 * m + 2 * k - 2 * l) / 4)]
    if which == "Omega'_nk":
        win = _halves(F(3 * n, 2) + 1, k - 2 * n - mu, True, True)
        return [m for m in win if _is_int((k - m - mu) / 2)]
    if which == "Omega+":
        win = _halves(F(n), k - mu, True, False)
        return [m for m in win if _is_int((m - k - mu) / 2)]
    if which == "Omega-":
        win = _halves(F(2 * n + 1) - k + mu, F(n), False, False)
        return [m for m in win if _is_int((m + k - mu - 1) / 2)]
    raise ValueError(f"unknown set {which!r}; expected one of {OMEGA_KINDS}")


# ---------------------------------------------------------------- exponent bundles

CASES = ("X", "R1", "R2", "generic_high", "generic_low")


@dataclass(frozen=True)
class ExponentBundle:
    n: int
    k: Fraction
    ell: Fraction
    m: Fraction
    case: str
    delta: int
    beta_m: Fraction
    r: Fraction
    m0: Fraction
    c_m: Fraction
    b: Fraction

    @property
    def closed_form(self) -> Fraction:
        return self.n * (self.k + self.m - self.n)

    @property
    def closed_form_ok(self) -> bool:
        return self.c_m == self.closed_form

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": str(self.k),
            "l": str(self.ell),
            "m": str(self.m),
            "case": self.case,
            "beta_m": str(self.beta_m),
            "r": str(self.r),
            "m0": str(self.m0),
            "c_m": str(self.c_m),
            "b": str(self.b),
            "c_m_closed_form_ok": self.closed_form_ok,
        }


def exponent_bundle(n: int, k2: int, l2: int, m, case: str | None = None,
                    phi: DirichletCharacter | None = None) -> ExponentBundle:
    """beta_m, r, m0, c_m and b for the given case.

    With case None the case is read off from m and phi: R1/R2 only when phi
    is given and matches, otherwise generic_high (m > n) or generic_low.
    """
    F = Fraction
    k, l, m = F(k2, 2), F(l2, 2), _half(m)
    delta = n % 2
    if case is None:
        exc = exceptional_case(n, m, phi) if phi is not None else "none"
        case = exc if exc != "none" else ("generic_high" if m > n else "generic_low")
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}")
    if case == "X":
        raise ValueError("case X is excluded: the Eisenstein series has no such expansion there")
    if case == "R1" and not (n == 1 and m == F(3, 2)):
        raise ValueError("case R1 needs n = 1 and m = 3/2")
    if case == "R2" and not (n > 1 and m == n + F(3, 2)):
        raise ValueError(f"case R2 needs n > 1 and m = n + 3/2 = {n + F(3, 2)}")
    if case == "generic_high" and not m > n:
        raise ValueError(f"generic_high needs m > n, got m = {m}")
    if case == "generic_low" and not m <= n:
        raise ValueError(f"generic_low needs m <= n, got m = {m}")
    beta = F(n, 2) * (k - l + m - n) + F(delta, 4)
    if case in ("R1", "R2"):
        r = (k - l) / 2 - (2 * m - n) / 4 + 1
    else:
        r = (k - l) / 2 - abs((2 * m - 2 * n - 1) / 4) - F(n + 1, 4)
    if case == "R1":
        m0 = (k + l - 3) / 2
    elif case == "R2":
        m0 = (2 * k + 2 * l + n - 1) / 4 - F(n + 1, 2)
    elif case == "generic_high":
        m0 = (2 * k + 2 * l + 2 * m - n) / 4 - F(n + 1, 2)
    else:
        m0 = (2 * k + 2 * l + 3 * n - 2 * m + 2) / 4 - F(n + 1, 2)
    if case in ("R1", "R2"):
        c = beta + n * (k - r) - F(n * n - 4 * n + delta, 4)
    elif case == "generic_high":
        c = beta + n * (k - r) - F(n * n + delta, 4)
    else:
        c = beta + n * (k + m - r) - F(5 * n * n + 2 * n + delta, 4)
    b = beta + n * (k - r) - F(n * n + delta, 4)
    return ExponentBundle(n, k, l, m, case, delta, beta, r, m0, c, b)
