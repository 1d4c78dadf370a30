"""Standard L-function Euler factors built from Satake parameters.

Everything is written in the variable T = p^(-s).  A character twist w(p)
multiplies T and never touches the coefficients, so identities between
local factors are identities of polynomials in T.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .arith import factor, primes_upto
from .characters import DirichletCharacter, l_constituents
from .cyclotomic import Cyclotomic, as_exact
from .hecke import satake_ladder
from .polys import LaurentPoly

__all__ = [
    "EulerFactor",
    "LSeriesData",
    "euler_factor",
    "ladder_local_check",
    "lseries_eval",
    "lambda_cy",
    "parse_params",
    "format_params",
]

VAR = "T"


def _linear(c) -> LaurentPoly:
    """1 - c T."""
    return LaurentPoly((VAR,), {(0,): 1, (1,): -as_exact(c)})


def _coeffs(P: LaurentPoly) -> list:
    P = P.with_vars((VAR,)) if P.vars != (VAR,) else P
    if any(e[0] < 0 for e in P.terms):
        raise ValueError("negative powers of T")
    deg = max((e[0] for e in P.terms), default=0)
    return [P.terms.get((i,), Fraction(0)) for i in range(deg + 1)]


@dataclass(frozen=True)
class EulerFactor:
    p: int
    poly: LaurentPoly

    def __post_init__(self):
        if self.poly.constant_term() != 1:
            raise ValueError("an Euler factor has constant term 1")

    @property
    def coeffs(self) -> list:
        return _coeffs(self.poly)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, t):
        """Value at T = t (exact for exact t, complex otherwise)."""
        if isinstance(t, (int, Fraction, Cyclotomic)):
            return self.poly.evaluate({VAR: as_exact(t)})
        t = complex(t)
        return sum(complex(c) * t ** i for i, c in enumerate(self.coeffs))

    def __eq__(self, other):
        return isinstance(other, EulerFactor) and self.p == other.p and self.poly == other.poly

    def __hash__(self):
        return hash((self.p, self.poly))


def euler_factor(params: Sequence, p: int, n: int, split: bool = True) -> EulerFactor:
    """prod_i (1 - p^n l_i T)(1 - p^n l_i^-1 T), or prod_i (1 - p^n l_i T) when p divides the level."""
    params = [as_exact(x) for x in params]
    if len(params) != n:
        raise ValueError(f"need {n} parameters, got {len(params)}")
    if any(x == 0 for x in params):
        raise ValueError("Satake parameters must be nonzero")
    pn = Fraction(p) ** n
    P = LaurentPoly.const(1, (VAR,))
    for lam in params:
        P = P * _linear(pn * lam)
        if split:
            P = P * _linear(pn * as_exact(1 / lam))
    return EulerFactor(p, P)


def _scale_var(P: LaurentPoly, c) -> LaurentPoly:
    """P(c T)."""
    c = as_exact(c)
    return LaurentPoly(P.vars, {e: coef * c ** e[0] for e, coef in P.terms.items()})


def ladder_local_check(n: int, k2: int, params_phi_f: Sequence, p: int, psi_at_p=1,
                       chi_p=None, last=None) -> dict:
    """Check L^n_p(wT) = L^(n-1)_p(w p T) (1 - chi(p) p^(2n-[k]) T)(1 - p^[k] T).

    The degree-n parameters are params_phi_f followed by `last`, which
    defaults to the ladder value psi(p)^-1 p^(n-[k]).  chi_p defaults to
    psi(p)^-2 and the twist is w = psi(p) chi(p).  Returns a dict with "ok",
    both sides, the three right-hand factors and the coefficient difference.
    """
    kk = k2 // 2
    psi_p = as_exact(psi_at_p)
    chi = as_exact(1 / (psi_p * psi_p)) if chi_p is None else as_exact(chi_p)
    w = as_exact(psi_p * chi)
    if last is None:
        full = satake_ladder(params_phi_f, k2, psi_p, n, p)
    else:
        full = tuple(as_exact(x) for x in params_phi_f) + (as_exact(last),)
    lhs = _scale_var(euler_factor(full, p, n).poly, w)
    lower = (_scale_var(euler_factor(params_phi_f, p, n - 1).poly, w * p)
             if n > 1 else LaurentPoly.const(1, (VAR,)))
    f2 = _linear(chi * Fraction(p) ** (2 * n - kk))
    f3 = _linear(Fraction(p) ** kk)
    rhs = lower * f2 * f3
    diff = lhs - rhs
    return {
        "ok": diff.is_zero(),
        "params": full,
        "lhs": lhs,
        "rhs": rhs,
        "factors": (lower, f2, f3),
        "diff": _coeffs(diff) if not diff.is_zero() else [],
    }


# ---------------------------------------------------------------- global products

@dataclass
class LSeriesData:
    """Data for prod_p L_p(w(p) p^-s)^-1.

    params maps p to the Satake parameters (a dict or a callable).  twist
    maps p to w(p) (default 1).  level decides the split/non-split branch.
    """

    n: int
    weight2: int
    params: Mapping[int, Sequence] | Callable[[int], Sequence]
    level: int = 1
    twist: Callable[[int], complex] | None = None
    primes: Iterable[int] | None = None
    factors: dict = field(default_factory=dict, repr=False)

    def params_at(self, p: int):
        src = self.params
        vals = src(p) if callable(src) else src.get(p)
        if vals is None:
            raise KeyError(f"no Satake parameters at p = {p}")
        return vals

    def factor_at(self, p: int) -> EulerFactor:
        if p not in self.factors:
            self.factors[p] = euler_factor(self.params_at(p), p, self.n, split=self.level % p != 0)
        return self.factors[p]


def lseries_eval(data: LSeriesData, s: float, prime_bound: int, lam_bound: float = 1.0,
                 check_region: bool = True) -> tuple[complex, float]:
    """Truncated Euler product over p <= prime_bound and a bound on the omitted tail.

    lam_bound bounds max(|l|, |l|^-1) over all parameters.  The log of each
    omitted factor is at most 2n p^n lam_bound p^-s (doubled for safety), and
    summing over integers x > P gives the returned relative error.
    """
    s = float(s)
    n = data.n
    if check_region and not s > 1.5 * n + 1:
        raise ValueError(f"s = {s} is outside the region of absolute convergence s > {1.5 * n + 1}")
    primes = sorted(data.primes) if data.primes is not None else primes_upto(prime_bound)
    primes = [p for p in primes if p <= prime_bound]
    logv = 0j
    for p in primes:
        w = complex(data.twist(p)) if data.twist else 1.0
        t = w * p ** (-s)
        logv -= cmath.log(data.factor_at(p)(t))
    val = cmath.exp(logv)
    if not primes:
        return val, 0.0
    expo = s - n - 1
    if expo <= 0:
        return val, math.inf
    P = max(prime_bound, 2)
    tail_log = 4 * n * lam_bound * P ** (-expo) / expo
    return val, abs(val) * math.expm1(tail_log)


def lambda_cy(s, eta: DirichletCharacter, c: int, y: int, n: int, kappa2: int):
    """(Lambda_c / Lambda_y)((2s - n)/4): the Euler factors at p | y, p not dividing c.

    Exact (Fraction or Cyclotomic) when every L-argument is an integer,
    complex otherwise.
    """
    arg = (Fraction(s) * 2 - n) / 4 if isinstance(s, (int, Fraction, str)) else (2 * s - n) / 4
    extra = sorted(p for p in factor(y) if c % p != 0)
    exact = all(isinstance(a, Fraction) and a.denominator == 1
                for a, _ in l_constituents(n, kappa2, arg, eta))
    out = Fraction(1) if exact else 1 + 0j
    for p in extra:
        for a, ch in l_constituents(n, kappa2, arg, eta):
            if exact:
                out = as_exact(out / (1 - as_exact(ch(p)) * Fraction(p) ** (-int(a))))
            else:
                out = out / (1 - ch.value_complex(p) * p ** (-complex(a)))
    return out


# ---------------------------------------------------------------- parameter files

_LINE = re.compile(r"^\s*(\d+)\s*:\s*(.*)$")


def parse_params(text: str) -> dict[int, tuple[Fraction, ...]]:
    """Lines 'p: l1 l2 ... ln' with rationals like 1/8 or decimals like 0.125; '#' starts a comment."""
    out: dict[int, tuple[Fraction, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"line {lineno}: expected 'p: l1 ... ln', got {raw!r}")
        p = int(m.group(1))
        try:
            vals = tuple(Fraction(tok) for tok in m.group(2).split())
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        if not vals:
            raise ValueError(f"line {lineno}: no parameters")
        if any(v == 0 for v in vals):
            raise ValueError(f"line {lineno}: parameters must be nonzero")
        if p in out:
            raise ValueError(f"line {lineno}: prime {p} repeated")
        out[p] = vals
    lengths = {len(v) for v in out.values()}
    if len(lengths) > 1:
        raise ValueError("all lines need the same number of parameters")
    return out


def format_params(params: Mapping[int, Sequence]) -> str:
    lines = []
    for p in sorted(params):
        lines.append(f"{p}: " + " ".join(str(Fraction(x)) for x in params[p]))
    return "\n".join(lines) + "\n"
