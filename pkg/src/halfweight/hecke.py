"""Local Hecke operators on Siegel expansions at a prime p.

A symplectic double coset D_p sigma D_p with sigma = diag(q^{-T}, q) is
listed as single cosets D_p alpha(d, s), alpha = [[d^{-T}, s d], [0, d]],
where d is upper triangular in Hermite normal form (diagonal p^{a_i},
above-diagonal entries reduced mod the column's diagonal) and s is a
symmetric matrix over Z[1/p] taken mod 1.  Two pairs give the same coset
iff they are equal, so the list is built by filtering the finite box of
candidates (p^E alpha integral, E the largest exponent in q) by p-adic
elementary divisors: alpha lies in D_p sigma D_p iff its elementary
divisor exponents equal those of sigma.

`check_cosets` re-derives completeness independently: the list must be
closed and transitive under right multiplication by generators of
Sp_n(Z).

Coset weights default to 1 (integral weight).  For degree 1 the
half-integral weights at odd p are available from `metaplectic_weights`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import floor, gcd
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .arith import kronecker
from .characters import DirichletCharacter
from .cyclotomic import Cyclotomic, as_exact
from .fourier import FourierExpansion, LazyExpansion
from .polys import LaurentPoly, TruncatedSeries
from .symmat import HalfIntSymMat, enumerate_psd

__all__ = [
    "GLCosetRep",
    "SpCosetData",
    "elementary_exponents",
    "gl_cosets",
    "sp_cosets",
    "hecke_types",
    "metaplectic_weights",
    "omega0p",
    "phi_p",
    "omega_p",
    "psi_map",
    "omega_psi",
    "phi_nu",
    "commuting_square",
    "satake_series",
    "satake_product",
    "satake_series_check",
    "satake_ladder",
    "satake_from_eigenvalue",
    "hecke_apply",
    "psi_apply",
    "eigenvalue_extract",
    "check_cosets",
    "export_cosets",
    "import_cosets",
]

Matrix = tuple[tuple[Fraction, ...], ...]


# ---------------------------------------------------------------- matrix helpers

def _mat(rows) -> Matrix:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0))
                       for j in range(len(b[0]))) for i in range(len(a)))


def _transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def _inv_upper(d: Matrix) -> Matrix:
    n = len(d)
    inv = [[Fraction(0)] * n for _ in range(n)]
    for j in range(n):
        inv[j][j] = 1 / d[j][j]
        for i in range(j - 1, -1, -1):
            acc = sum((d[i][k] * inv[k][j] for k in range(i + 1, j + 1)), Fraction(0))
            inv[i][j] = -acc / d[i][i]
    return tuple(tuple(r) for r in inv)


def _val(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _qval(x: Fraction, p: int) -> int:
    return _val(x.numerator, p) - _val(x.denominator, p)


def elementary_exponents(M: Sequence[Sequence], p: int) -> list[int]:
    """Exponents e with M in GL(Z_p) diag(p^e) GL(Z_p), sorted; M nonsingular over Q."""
    F = [[Fraction(x) for x in row] for row in M]
    n = len(F)
    shift = 0
    for row in F:
        for x in row:
            if x:
                shift = max(shift, -_qval(x, p))
    scale = Fraction(p) ** shift
    A = []
    for row in F:
        r = []
        for x in row:
            y = x * scale
            # p-integral now; clear the prime-to-p denominator, a unit
            r.append(y)
        A.append(r)
    den = 1
    for row in A:
        for x in row:
            den = den * x.denominator // gcd(den, x.denominator)
    ints = [[int(x * den) for x in row] for row in A]
    # den is prime to p, so it does not change valuations
    cap = 0
    for row in ints:
        for x in row:
            if x:
                cap = max(cap, _val(x, p))
    K = cap * n + n + 2
    mod = p ** K
    A = [[x % mod for x in row] for row in ints]
    out = []
    while A:
        best = None
        for i, row in enumerate(A):
            for j, x in enumerate(row):
                if x:
                    v = _val(x, p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            raise ValueError("matrix is singular")
        v, i, j = best
        A[0], A[i] = A[i], A[0]
        for row in A:
            row[0], row[j] = row[j], row[0]
        pv = p ** v
        uinv = pow(A[0][0] // pv, -1, mod)
        top = A[0]
        for r in range(1, len(A)):
            x = A[r][0]
            if x:
                f = (x // pv) * uinv % mod
                A[r] = [(a - f * b) % mod for a, b in zip(A[r], top)]
        out.append(v)
        A = [row[1:] for row in A[1:]]
    return sorted(e - shift for e in out)


# ---------------------------------------------------------------- GL cosets

@dataclass(frozen=True)
class GLCosetRep:
    """Upper-triangular Hermite normal form representative of GL_n(Z_p) d."""

    p: int
    matrix: Matrix

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(_qval(self.matrix[i][i], self.p) for i in range(self.n))

    def __repr__(self):
        rows = ["[" + " ".join(str(x) for x in r) + "]" for r in self.matrix]
        return f"GLCosetRep(p={self.p}, {''.join(rows)})"


def _hnf_candidates(n: int, p: int, exps_range, denom_exp: int):
    """All HNF upper-triangular d with diagonal exponents in exps_range and entries in p^-denom_exp Z."""
    for a in product(exps_range, repeat=n):
        slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
        ranges = [range(p ** (a[j] + denom_exp)) if a[j] + denom_exp >= 0 else range(0) for _, j in slots]
        for ks in product(*ranges):
            d = [[Fraction(0)] * n for _ in range(n)]
            for i in range(n):
                d[i][i] = Fraction(p) ** a[i]
            for (i, j), k in zip(slots, ks):
                d[i][j] = Fraction(k, p ** denom_exp)
            yield a, tuple(tuple(r) for r in d)


def gl_cosets(n: int, p: int, divisors: Sequence[int]) -> list[GLCosetRep]:
    """Right cosets GL_n(Z_p) d inside GL_n(Z_p) diag(p^a) GL_n(Z_p), in HNF."""
    target = sorted(divisors)
    if any(a < 0 for a in target):
        raise ValueError("exponents must be non-negative")
    total = sum(target)
    out = []
    for a, d in _hnf_candidates(n, p, range(0, max(target, default=0) + 1), 0):
        if sum(a) != total:
            continue
        if elementary_exponents(d, p) == target:
            out.append(GLCosetRep(p, d))
    return out


def omega0p(reps, n: int | None = None, p: int | None = None) -> LaurentPoly:
    """Sum of c * prod_i (p^-i x_i)^a_i over a weighted collection of GL cosets.

    `reps` is an iterable of GLCosetRep or a mapping rep -> weight.
    """
    items = reps.items() if isinstance(reps, dict) else ((r, 1) for r in reps)
    terms: dict = {}
    names = None
    for rep, w in items:
        if names is None:
            n = rep.n
            names = tuple(f"x{i + 1}" for i in range(n))
        a = rep.exponents
        c = Fraction(1)
        for i, ai in enumerate(a):
            c *= Fraction(rep.p) ** (-(i + 1) * ai)
        terms[a] = terms.get(a, 0) + as_exact(w) * c
    if names is None:
        names = tuple(f"x{i + 1}" for i in range(n or 0))
    return LaurentPoly(names, terms)


# ---------------------------------------------------------------- symplectic cosets

@dataclass(frozen=True)
class SpCosetData:
    """Single cosets D_p alpha(d, s) of one symplectic double coset (or a weighted sum)."""

    p: int
    n: int
    q: tuple[int, ...]
    pairs: tuple[tuple[Matrix, Matrix], ...]
    weights: tuple | None = None
    label: str = ""

    def __len__(self):
        return len(self.pairs)

    def weight(self, i: int):
        return 1 if self.weights is None else self.weights[i]

    def items(self):
        for i, (d, s) in enumerate(self.pairs):
            yield d, s, self.weight(i)

    def alpha(self, i: int) -> Matrix:
        d, s = self.pairs[i]
        return _alpha(d, s)

    def with_weights(self, weights, label: str | None = None) -> "SpCosetData":
        return SpCosetData(self.p, self.n, self.q, self.pairs, tuple(weights), label or self.label)

    def __add__(self, other: "SpCosetData") -> "SpCosetData":
        if (self.p, self.n) != (other.p, other.n):
            raise ValueError("cannot add coset data for different (p, n)")
        w = [self.weight(i) for i in range(len(self))] + [other.weight(i) for i in range(len(other))]
        return SpCosetData(self.p, self.n, self.q if self.q == other.q else (), self.pairs + other.pairs,
                           tuple(w), f"{self.label}+{other.label}")


def _alpha(d: Matrix, s: Matrix) -> Matrix:
    n = len(d)
    dt = _transpose(_inv_upper(d)) if n else ()
    sd = _matmul(s, d) if n else ()
    rows = []
    for i in range(n):
        rows.append(tuple(dt[i]) + tuple(sd[i]))
    for i in range(n):
        rows.append((Fraction(0),) * n + tuple(d[i]))
    return tuple(rows)


def _frac_mod1(x: Fraction) -> Fraction:
    return x - floor(x)


def _cache_path(p: int, n: int, q: tuple[int, ...]) -> Path | None:
    root = os.environ.get("HALFWEIGHT_CACHE_DIR")
    if not root:
        return None
    return Path(root) / f"cosets-p{p}-n{n}-q{'_'.join(map(str, q))}.txt"


@lru_cache(maxsize=None)
def sp_cosets(n: int, p: int, q: tuple[int, ...] | None = None) -> SpCosetData:
    """Single-coset list of D_p diag(q^{-T}, q) D_p with q = diag(p^{q_1}, ..., p^{q_n}).

    Default q = diag(1, ..., 1, p).
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    if q is None:
        q = (0,) * (n - 1) + (1,) if n else ()
    q = tuple(sorted(int(e) for e in q))
    if len(q) != n or any(e < 0 for e in q):
        raise ValueError(f"q must be {n} non-negative exponents, got {q}")
    if n > 2 or (n == 2 and max(q) > 2) or (n == 1 and max(q) > 4):
        raise ValueError(f"unsupported symplectic input n={n}, q={q} (desk scale: n <= 2)")
    path = _cache_path(p, n, q)
    if path is not None and path.exists():
        return import_cosets(path.read_text())
    E = max(q, default=0)
    label = f"A_q(p={p}, q=diag({', '.join(f'p^{e}' for e in q)}))"
    if E == 0:
        ident = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
        zero = tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))
        data = SpCosetData(p, n, q, ((ident, zero),), None, label)
    else:
        data = SpCosetData(p, n, q, tuple(_enumerate_sp(n, p, q, E)), None, label)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(export_cosets(data))
    return data


def _enumerate_sp(n: int, p: int, q: tuple[int, ...], E: int):
    target = sorted([-e for e in q] + list(q))
    L = p ** (2 * E)
    sym = [(i, j) for i in range(n) for j in range(i, n)]
    grid = np.array(list(product(range(L), repeat=len(sym))), dtype=np.int64)
    S = np.zeros((len(grid), n, n), dtype=np.int64)
    for c, (i, j) in enumerate(sym):
        S[:, i, j] = grid[:, c]
        S[:, j, i] = grid[:, c]
    out = []
    for _, d in _hnf_candidates(n, p, range(-E, E + 1), E):
        dti = _transpose(_inv_upper(d))
        if any((x * p ** E).denominator != 1 for row in dti for x in row):
            continue
        D = np.array([[int(x * p ** E) for x in row] for row in d], dtype=np.int64)
        ok = np.all((S @ D) % L == 0, axis=(1, 2))
        for idx in np.nonzero(ok)[0]:
            s = tuple(tuple(Fraction(int(S[idx, i, j]), L) for j in range(n)) for i in range(n))
            if elementary_exponents(_alpha(d, s), p) == target:
                out.append((d, s))
    return out


def hecke_types(n: int, m: int) -> list[tuple[int, ...]]:
    """Exponent vectors 0 <= q_1 <= ... <= q_n with sum m (the q with |q| = p^m)."""
    def rec(k, total, lo):
        if k == 0:
            if total == 0:
                yield ()
            return
        for e in range(lo, total + 1):
            for rest in rec(k - 1, total - e, e):
                yield (e,) + rest
    return list(rec(n, m, 0))


def hecke_pm(n: int, p: int, m: int) -> SpCosetData:
    """A(p^m): the sum of A_q over all q with |q| = p^m."""
    parts = [sp_cosets(n, p, q) for q in hecke_types(n, m)]
    out = parts[0]
    for extra in parts[1:]:
        out = out + extra
    return SpCosetData(out.p, out.n, (), out.pairs, out.weights, f"A(p^{m}) at p={p}, n={n}")


def metaplectic_weights(data: SpCosetData) -> SpCosetData:
    """Degree-1 half-integral weights at odd p.

    For alpha(p^a, s) in the double coset of diag(p^-m, p^m): the cosets
    with |a| = m get weight 1; for |a| < m one has s = B / p^(m+a) with p
    not dividing B, and the weight is the Legendre symbol (B/p)^(m+a).
    """
    if data.n != 1:
        raise NotImplementedError("half-integral coset weights are only available in degree 1")
    p = data.p
    if p == 2:
        raise NotImplementedError(
            "half-integral coset weights at p = 2 are undefined: 2 divides every level of "
            "half-integral weight, and the single middle coset of A(2) cannot carry a weight "
            "that makes the x^0 t^1 coefficient vanish")
    weights = []
    for i, (d, s) in enumerate(data.pairs):
        w = as_exact(data.weight(i))
        a = _qval(d[0][0], p)
        x = s[0][0]
        m = -min(_qval(v, p) for row in _alpha(d, s) for v in row if v)
        if abs(a) == m:
            weights.append(w)
            continue
        e = m + a
        if x == 0 or _qval(x, p) != -e:
            raise ValueError("unexpected middle coset shape")
        B = (x * p ** e).numerator
        weights.append(w * kronecker(B, p) ** e)
    return data.with_weights(weights, data.label + " [half-integral]")


# ---------------------------------------------------------------- Satake maps

def _hnf_of(d: Matrix, p: int) -> GLCosetRep:
    """Canonical HNF for GL_n(Z_p) d with d upper triangular over Z[1/p]."""
    n = len(d)
    rows = [list(r) for r in d]
    for i in range(n):
        # make the diagonal an exact power of p (left multiplication by a unit)
        v = _qval(rows[i][i], p)
        u = rows[i][i] / Fraction(p) ** v
        rows[i] = [x / u for x in rows[i]]
    for j in range(n):
        for i in range(j):
            # entries are in Z[1/p]; subtract the integer part of d_ij / p^a_j
            q = rows[i][j] / rows[j][j]
            k = q.numerator // q.denominator
            if k:
                rows[i] = [x - k * y for x, y in zip(rows[i], rows[j])]
    return GLCosetRep(p, tuple(tuple(r) for r in rows))


def phi_p(data: SpCosetData) -> dict[GLCosetRep, object]:
    """Formal sum of GL_n(Z_p) d with the coset weights."""
    out: dict = {}
    for d, s, w in data.items():
        rep = _hnf_of(d, data.p)
        out[rep] = out.get(rep, 0) + as_exact(w)
    return {k: v for k, v in out.items() if v != 0}


def omega_p(data: SpCosetData) -> LaurentPoly:
    return omega0p(phi_p(data), data.n, data.p)


def psi_map(data: SpCosetData) -> dict[tuple[Matrix, Matrix], LaurentPoly]:
    """Psi(A, u): (d', s') upper-left blocks weighted by (u p^-n)^(a_n), merged."""
    n, p = data.n, data.p
    if n < 1:
        raise ValueError("Psi needs degree >= 1")
    out: dict = {}
    for d, s, w in data.items():
        an = _qval(d[n - 1][n - 1], p)
        dp = tuple(tuple(r[: n - 1]) for r in d[: n - 1])
        sp = tuple(tuple(_frac_mod1(x) for x in r[: n - 1]) for r in s[: n - 1])
        mono = LaurentPoly(("u",), {(an,): as_exact(w) * Fraction(p) ** (-n * an)})
        key = (dp, sp)
        out[key] = out[key] + mono if key in out else mono
    return {k: v for k, v in out.items() if not v.is_zero()}


def omega_psi(image: dict, n: int, p: int) -> LaurentPoly:
    """(omega^{n-1} x 1) applied to a Psi image: a Laurent polynomial in x_1..x_{n-1}, u."""
    names = tuple(f"x{i + 1}" for i in range(n - 1)) + ("u",)
    total = LaurentPoly(names)
    for (dp, _sp), coeff in image.items():
        if n - 1:
            mono = omega0p({_hnf_of(dp, p): 1}, n - 1, p)
        else:
            mono = LaurentPoly((), {(): 1})
        total = total + (mono * coeff).with_vars(names)
    return total


def phi_nu(P: LaurentPoly, n: int) -> LaurentPoly:
    """x_i -> x_i for i < n and x_n -> u."""
    names = tuple(f"x{i + 1}" for i in range(n - 1)) + ("u",)
    u = LaurentPoly(("u",), {(1,): 1})
    return P.with_vars(tuple(f"x{i + 1}" for i in range(n))).subs({f"x{n}": u}).with_vars(names)


def commuting_square(data: SpCosetData) -> tuple[LaurentPoly, LaurentPoly]:
    """Both sides of (omega^{n-1} x 1) Psi(A, u) = phi_{n,u}(omega^n(A))."""
    lhs = omega_psi(psi_map(data), data.n, data.p)
    rhs = phi_nu(omega_p(data), data.n)
    return lhs, rhs


def satake_series(n: int, p: int, M: int, track: str = "half-integral") -> TruncatedSeries:
    """sum_{m <= M} omega_p(A(p^m)) t^m."""
    coeffs = []
    for m in range(M + 1):
        data = hecke_pm(n, p, m)
        if track == "half-integral":
            data = metaplectic_weights(data)
        elif track != "integral":
            raise ValueError(f"unknown track {track!r}")
        coeffs.append(omega_p(data))
    return TruncatedSeries(coeffs, M)


def satake_product(n: int, p: int, M: int) -> TruncatedSeries:
    """prod_i (1 - p^(2i-1) t^2) / ((1 - p^n x_i t)(1 - p^n x_i^-1 t)) through t^M."""
    names = tuple(f"x{i + 1}" for i in range(n))
    one = LaurentPoly.const(1, names)
    total = TruncatedSeries([one], M)
    for i in range(1, n + 1):
        e = [0] * n
        e[i - 1] = 1
        x = LaurentPoly(names, {tuple(e): 1})
        num = TruncatedSeries([one, LaurentPoly(names), one * (-Fraction(p) ** (2 * i - 1))], M)
        d1 = TruncatedSeries([one, x * (-Fraction(p) ** n)], M)
        d2 = TruncatedSeries([one, x.inv() * (-Fraction(p) ** n)], M)
        total = total * num / (d1 * d2)
    return total


def satake_series_check(n: int, p: int, M: int, track: str = "half-integral") -> dict:
    """Coefficientwise comparison of the Satake series with the rational product."""
    if n not in (1, 2):
        raise ValueError("degree must be 1 or 2")
    lhs = satake_series(n, p, M, track)
    rhs = satake_product(n, p, M)
    report = []
    for m in range(M + 1):
        a = lhs.coeffs[m]
        b = rhs.coeffs[m] if isinstance(rhs.coeffs[m], LaurentPoly) else LaurentPoly.const(rhs.coeffs[m], a.vars)
        report.append({"m": m, "equal": (a - b).is_zero(), "series": a, "product": b})
    return {"n": n, "p": p, "M": M, "track": track, "ok": all(r["equal"] for r in report), "terms": report}


def satake_ladder(params: Sequence, k2: int, psi_at_p, n: int, p: int) -> tuple:
    """Append psi_p(p)^-1 p^(n - [k]) to the Satake parameters of Phi f."""
    params = tuple(as_exact(x) for x in params)
    if len(params) != n - 1:
        raise ValueError(f"need {n - 1} parameters for degree {n}, got {len(params)}")
    if any(x == 0 for x in params) or as_exact(psi_at_p) == 0:
        raise ValueError("Satake parameters and psi_p(p) must be nonzero")
    kk = k2 // 2
    last = as_exact(1 / as_exact(psi_at_p)) * Fraction(p) ** (n - kk)
    return params + (as_exact(last),)


def satake_from_eigenvalue(data: SpCosetData, eigenvalue) -> list[Fraction]:
    """Rational x with omega_p(data)(x) = eigenvalue (degree 1)."""
    if data.n != 1:
        raise ValueError("parameter solving is implemented for degree 1")
    P = omega_p(data) - as_exact(eigenvalue)
    lo = min(e[0] for e in P.terms)
    hi = max(e[0] for e in P.terms)
    coeffs = [Fraction(P.terms.get((e,), 0)) for e in range(lo, hi + 1)]
    # clear denominators, then rational roots by the divisor test
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    while ints and ints[0] == 0:
        ints.pop(0)
    a0, an = ints[0], ints[-1]

    def divisors(x):
        x = abs(x)
        return [d for d in range(1, x + 1) if x % d == 0]

    roots = set()
    for u in divisors(a0):
        for v in divisors(an):
            for sgn in (1, -1):
                r = Fraction(sgn * u, v)
                if sum(c * r ** i for i, c in enumerate(ints)) == 0:
                    roots.add(r)
    return sorted(roots)


# ---------------------------------------------------------------- action on expansions

def _psi_scalar(psi, p: int):
    if psi is None:
        return Fraction(1)
    if isinstance(psi, DirichletCharacter):
        if psi.modulus % p == 0:
            raise ValueError(f"p = {p} divides the character modulus {psi.modulus}")
        return as_exact(psi(p))
    return as_exact(psi)


class _CosetAction:
    """Precomputed per-coset data for the coefficient formula."""

    def __init__(self, data: SpCosetData, k2: int, psi):
        if k2 % 2:
            raise NotImplementedError("half-integral action not implemented: the automorphy factor "
                                      "values J(alpha) are not available")
        self.n = data.n
        self.p = data.p
        k = k2 // 2
        ps = _psi_scalar(psi, data.p)
        self.terms = []
        L = 1
        for d, s, w in data.items():
            suma = sum(_qval(d[i][i], data.p) for i in range(self.n))
            factor = as_exact(as_exact(w) * ps ** (-suma) * Fraction(data.p) ** (-k * suma))
            for row in s:
                for x in row:
                    L = L * x.denominator // gcd(L, x.denominator)
            self.terms.append((d, _transpose(d), s, factor))
        self.level = L
        self.growth = max((_lam_max(d) for d, *_ in self.terms), default=1.0)

    def coefficient(self, f, tau: HalfIntSymMat):
        n = self.n
        T = [[Fraction(x) for x in row] for row in tau.doubled()]
        buckets: dict[int, object] = {}
        for d, dT, s, factor in self.terms:
            X = _matmul(_matmul(d, T), dT) if n else ()
            if any(x.denominator != 1 for row in X for x in row):
                continue
            if any(X[i][i] % 2 for i in range(n)):
                continue
            key = HalfIntSymMat(n, tuple(int(X[i][j]) for i in range(n) for j in range(i, n)))
            c = f.coeff(key)
            if c == 0:
                continue
            ph = sum((X[i][i] / 2 * s[i][i] for i in range(n)), Fraction(0))
            ph += sum((X[i][j] * s[i][j] for i in range(n) for j in range(i + 1, n)), Fraction(0))
            e = int(_frac_mod1(ph) * self.level)
            buckets[e] = buckets.get(e, 0) + factor * c
        if not buckets:
            return Fraction(0)
        if all(isinstance(v, (int, Fraction)) for v in buckets.values()):
            return as_exact(Cyclotomic.from_exponents(self.level, buckets))
        total = Fraction(0)
        for e, v in buckets.items():
            total = v * Cyclotomic.zeta(self.level, e) + total
        return as_exact(total)


def _lam_max(d: Matrix) -> float:
    if not d:
        return 1.0
    a = np.array([[float(x) for x in r] for r in d])
    return float(np.linalg.eigvalsh(a.T @ a).max())


def hecke_apply(f, data: SpCosetData, psi=None, bound: int | None = None):
    """f | A for the coset data: sum over (d, s) of psi(p)^-sum(a) det(d)^-k c(d T d^T) e(tr(d T d^T s)).

    Materialized input gives a materialized output whose bound guarantees
    every needed input index lies inside f's truncation; lazy input gives
    lazy output.
    """
    if f.degree != data.n:
        raise ValueError(f"degree mismatch: expansion {f.degree}, cosets {data.n}")
    if f.character is not None and f.character.modulus % data.p == 0:
        raise ValueError(f"p = {data.p} divides the level of the form")
    if f.level is not None and (Fraction(f.level[0]) * Fraction(f.level[1])).numerator % data.p == 0:
        raise ValueError(f"p = {data.p} divides the level of the form")
    act = _CosetAction(data, f.weight2, psi)
    if isinstance(f, LazyExpansion):
        out_trunc = None if f.trunc is None else int(floor(f.trunc / act.growth + 1e-9))
        return LazyExpansion(f.degree, f.weight2, lambda t: act.coefficient(f, t), out_trunc,
                             level=f.level, character=f.character, name=f"{f.name}|{data.label}")
    safe = int(floor(f.trunc / act.growth + 1e-9))
    B = safe if bound is None else bound
    if B > safe:
        raise ValueError(f"requested bound {B} exceeds the exact range {safe} for input truncation {f.trunc}")
    coeffs = {t: act.coefficient(f, t) for t in enumerate_psd(f.degree, B)}
    return FourierExpansion(f.degree, f.weight2, B, coeffs, level=f.level, character=f.character)


def psi_apply(g, image: dict, u, p: int, psi=None, bound: int | None = None):
    """g | Psi(A, u) for g of degree n-1, with u specialized to a scalar."""
    u = as_exact(u)
    pairs, weights = [], []
    n1 = g.degree
    for (dp, sp), poly in image.items():
        w = poly.evaluate({"u": u})
        if w != 0:
            pairs.append((dp, sp))
            weights.append(w)
    data = SpCosetData(p, n1, (), tuple(pairs), tuple(weights), f"Psi(u={u})")
    return hecke_apply(g, data, psi, bound)


def eigenvalue_extract(f, g, indices: Iterable[HalfIntSymMat] | None = None):
    """The scalar L with g = L f on the shared indices, plus the witnesses used."""
    if indices is None:
        if not (isinstance(f, FourierExpansion) and isinstance(g, FourierExpansion)):
            raise ValueError("lazy expansions need explicit indices")
        B = min(f.trunc, g.trunc)
        indices = enumerate_psd(f.degree, B)
    indices = list(indices)
    ratio = None
    first = None
    for t in indices:
        a = f.coeff(t)
        if a != 0:
            ratio = as_exact(as_exact(g.coeff(t)) / a)
            first = t
            break
    if ratio is None:
        raise ValueError("f vanishes on every shared index")
    witnesses = []
    for t in indices:
        a, b = f.coeff(t), g.coeff(t)
        if as_exact(b) != as_exact(ratio * a):
            raise ValueError(f"not an eigenvector: ratio at {first} is {ratio}, but at {t} "
                             f"f = {a} and g = {b}")
        if a != 0:
            witnesses.append(t)
    return ratio, witnesses


# ---------------------------------------------------------------- validation and export

def _sp_generators(n: int) -> list[np.ndarray]:
    I = np.eye(n, dtype=np.int64)
    Z = np.zeros((n, n), dtype=np.int64)
    gens = [np.block([[Z, -I], [I, Z]])]
    for i in range(n):
        for j in range(i, n):
            S = np.zeros((n, n), dtype=np.int64)
            S[i, j] = S[j, i] = 1
            gens.append(np.block([[I, S], [Z, I]]))
    for i in range(n):
        for j in range(n):
            if i != j:
                U = I.copy()
                U[i, j] = 1
                Uinv = I.copy()
                Uinv[i, j] = -1
                gens.append(np.block([[U, Z], [Z, Uinv.T]]))
    return gens


def check_cosets(data: SpCosetData) -> dict:
    """Closure and transitivity of the coset list under right Sp_n(Z) translates."""
    n, p = data.n, data.p
    N = len(data)
    if n == 0:
        return {"count": N, "closed": True, "transitive": True}
    alphas = [data.alpha(i) for i in range(N)]
    E = 0
    for a in alphas:
        for row in a:
            for x in row:
                if x:
                    E = max(E, -_qval(x, p))
    P = p ** E
    A = np.array([[[int(x * P) for x in row] for row in a] for a in alphas], dtype=np.int64)
    # inverse of a symplectic [[a, b], [c, d]] is [[d^T, -b^T], [-c^T, a^T]]
    Ainv = np.empty_like(A)
    Ainv[:, :n, :n] = np.transpose(A[:, n:, n:], (0, 2, 1))
    Ainv[:, :n, n:] = -np.transpose(A[:, :n, n:], (0, 2, 1))
    Ainv[:, n:, :n] = -np.transpose(A[:, n:, :n], (0, 2, 1))
    Ainv[:, n:, n:] = np.transpose(A[:, :n, :n], (0, 2, 1))
    gens = _sp_generators(n)
    closed = True
    edges: list[list[int]] = [[] for _ in range(N)]
    for i in range(N):
        for g in gens:
            prod = (A[i] @ g) @ Ainv
            hit = np.nonzero(np.all(prod % (P * P) == 0, axis=(1, 2)))[0]
            if len(hit) != 1:
                closed = False
                continue
            edges[i].append(int(hit[0]))
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in edges[i]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return {"count": N, "closed": closed, "transitive": len(seen) == N}


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def export_cosets(data: SpCosetData) -> str:
    """Text listing: header, then one line per coset "d | s | weight" (rows separated by ';')."""
    lines = [f"halfweight-cosets v1 p={data.p} n={data.n} q={','.join(map(str, data.q))} count={len(data)}"]
    for d, s, w in data.items():
        dm = ";".join(" ".join(_fmt(x) for x in row) for row in d)
        sm = ";".join(" ".join(_fmt(x) for x in row) for row in s)
        ws = _fmt(Fraction(w)) if not isinstance(w, Cyclotomic) else json.dumps(
            {"level": w.level, "coords": [_fmt(c) for c in w.coords]})
        lines.append(f"{dm} | {sm} | {ws}")
    return "\n".join(lines) + "\n"


def import_cosets(text: str) -> SpCosetData:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[:2] != ["halfweight-cosets", "v1"]:
        raise ValueError("not a coset listing")
    meta = dict(kv.split("=") for kv in head[2:])
    p, n = int(meta["p"]), int(meta["n"])
    q = tuple(int(x) for x in meta["q"].split(",") if x)
    pairs, weights = [], []
    for ln in lines[1:]:
        dm, sm, ws = (x.strip() for x in ln.split("|"))

        def parse(m):
            if not m:
                return ()
            return tuple(tuple(Fraction(x) for x in row.split()) for row in m.split(";"))

        pairs.append((parse(dm), parse(sm)))
        if ws.startswith("{"):
            obj = json.loads(ws)
            weights.append(as_exact(Cyclotomic(obj["level"], [Fraction(c) for c in obj["coords"]])))
        else:
            weights.append(Fraction(ws))
    w = None if all(x == 1 for x in weights) else tuple(weights)
    return SpCosetData(p, n, q, tuple(pairs), w, f"A_q(p={p}, q={q})")
