"""Truncated Fourier expansions of Siegel modular forms.

An expansion maps half-integral matrices tau >= 0 to exact coefficients
(Fraction or Cyclotomic).  `FourierExpansion` stores every nonzero
coefficient with tr(tau) <= trunc; absent keys inside the bound are zero.
`LazyExpansion` computes coefficients on demand and caches them; it is
what makes Hecke images at p = 3 affordable, since only the requested
indices are ever touched.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from . import _accel
from .characters import DirichletCharacter
from .cyclotomic import Cyclotomic, as_exact
from .symmat import INDEFINITE, HalfIntSymMat, enumerate_psd, int_det, is_psd

__all__ = [
    "FourierExpansion",
    "LazyExpansion",
    "GramMatrix",
    "GRAMS",
    "gram",
    "theta_lattice",
    "theta_lazy",
    "theta_chi",
    "constant_expansion",
    "mul",
    "siegel_phi",
    "galois_on_form",
    "eval_at",
    "dumps",
    "loads",
    "reduce_binary",
]

FORMAT_HEADER = "halfweight-expansion v1"


def _exact(c):
    c = as_exact(c)
    return c


def _galois_coeff(c, t: int):
    if isinstance(c, Cyclotomic):
        return as_exact(c.galois(t))
    return c


class _Base:
    degree: int
    weight2: int
    level: tuple | None
    character: DirichletCharacter | None

    def coeff(self, tau: HalfIntSymMat):
        raise NotImplementedError

    def __getitem__(self, tau):
        return self.coeff(tau)

    @property
    def is_half_integral(self) -> bool:
        return self.weight2 % 2 == 1


class FourierExpansion(_Base):
    """Materialized expansion: nonzero coefficients for tr(tau) <= trunc."""

    def __init__(self, degree: int, weight2: int, trunc: int, coeffs=None, *,
                 level=None, character: DirichletCharacter | None = None):
        self.degree = degree
        self.weight2 = weight2
        self.trunc = trunc
        self.level = level
        self.character = character
        clean = {}
        for tau, c in (coeffs or {}).items():
            if tau.n != degree:
                raise ValueError(f"index of degree {tau.n} in a degree-{degree} expansion")
            if tau.trace > trunc:
                continue
            if is_psd(tau) == INDEFINITE:
                raise ValueError(f"index {tau} is not positive semidefinite")
            c = _exact(c)
            if c != 0:
                clean[tau] = c
        self.coeffs = clean

    def coeff(self, tau: HalfIntSymMat):
        if tau.trace > self.trunc:
            raise KeyError(f"{tau} lies beyond the truncation bound {self.trunc}")
        return self.coeffs.get(tau, Fraction(0))

    def keys(self) -> list[HalfIntSymMat]:
        return sorted(self.coeffs, key=HalfIntSymMat.sort_key)

    def items(self):
        return [(t, self.coeffs[t]) for t in self.keys()]

    def truncate(self, bound: int) -> "FourierExpansion":
        return FourierExpansion(self.degree, self.weight2, min(bound, self.trunc), self.coeffs,
                                level=self.level, character=self.character)

    def map(self, fn: Callable) -> "FourierExpansion":
        return FourierExpansion(self.degree, self.weight2, self.trunc,
                                {t: fn(c) for t, c in self.coeffs.items()},
                                level=self.level, character=self.character)

    def scale(self, c) -> "FourierExpansion":
        c = as_exact(c)
        return self.map(lambda x: x * c)

    def __add__(self, other: "FourierExpansion") -> "FourierExpansion":
        _same_shape(self, other)
        b = min(self.trunc, other.trunc)
        out = dict(self.truncate(b).coeffs)
        for t, c in other.truncate(b).coeffs.items():
            out[t] = out.get(t, 0) + c
        return FourierExpansion(self.degree, self.weight2, b, out, level=self.level, character=self.character)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __eq__(self, other):
        """Equality of coefficients on the common truncation."""
        if not isinstance(other, FourierExpansion):
            return NotImplemented
        if self.degree != other.degree or self.weight2 != other.weight2:
            return False
        b = min(self.trunc, other.trunc)
        return self.truncate(b).coeffs == other.truncate(b).coeffs

    __hash__ = None

    def __repr__(self):
        return (f"FourierExpansion(degree={self.degree}, weight2={self.weight2}, "
                f"trunc={self.trunc}, nonzero={len(self.coeffs)})")


class LazyExpansion(_Base):
    """Coefficients computed on demand by `fn(tau)` and cached."""

    def __init__(self, degree: int, weight2: int, fn: Callable, trunc: int | None = None, *,
                 level=None, character=None, name: str = "lazy"):
        self.degree = degree
        self.weight2 = weight2
        self.trunc = trunc
        self.level = level
        self.character = character
        self.name = name
        self._fn = fn
        self._cache: dict = {}

    def coeff(self, tau: HalfIntSymMat):
        if tau.n != self.degree:
            raise ValueError(f"index of degree {tau.n} for a degree-{self.degree} expansion")
        if self.trunc is not None and tau.trace > self.trunc:
            raise KeyError(f"{tau} lies beyond the truncation bound {self.trunc}")
        c = self._cache.get(tau)
        if c is None:
            c = _exact(self._fn(tau))
            self._cache[tau] = c
        return c

    def materialize(self, bound: int) -> FourierExpansion:
        if self.trunc is not None and bound > self.trunc:
            raise ValueError(f"cannot materialize to {bound} beyond the truncation bound {self.trunc}")
        coeffs = {t: self.coeff(t) for t in enumerate_psd(self.degree, bound)}
        return FourierExpansion(self.degree, self.weight2, bound, coeffs,
                                level=self.level, character=self.character)

    def __repr__(self):
        return f"LazyExpansion({self.name}, degree={self.degree}, weight2={self.weight2}, trunc={self.trunc})"


def _same_shape(f, g):
    if f.degree != g.degree:
        raise ValueError(f"degree mismatch: {f.degree} vs {g.degree}")
    if f.weight2 != g.weight2:
        raise ValueError(f"weight mismatch: {f.weight2}/2 vs {g.weight2}/2")


def constant_expansion(degree: int, c=1, trunc: int = 0, weight2: int = 0) -> FourierExpansion:
    return FourierExpansion(degree, weight2, trunc, {HalfIntSymMat.zero(degree): c})


# ---------------------------------------------------------------- Gram matrices

def _frac_inverse(m) -> list[list[Fraction]]:
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        r = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[r] = a[r], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [row[n:] for row in a]


class GramMatrix:
    """Even positive-definite integral Gram matrix of a lattice."""

    def __init__(self, entries, name: str | None = None):
        m = [[int(x) for x in row] for row in entries]
        r = len(m)
        if any(len(row) != r for row in m):
            raise ValueError("Gram matrix must be square")
        for i in range(r):
            if m[i][i] % 2:
                raise ValueError("Gram matrix must have even diagonal")
            for j in range(r):
                if m[i][j] != m[j][i]:
                    raise ValueError("Gram matrix must be symmetric")
        if any(int_det([row[:k] for row in m[:k]]) <= 0 for k in range(1, r + 1)):
            raise ValueError("Gram matrix must be positive definite")
        self.entries = tuple(tuple(row) for row in m)
        self.rank = r
        self.name = name

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    @property
    def level(self) -> int:
        """Smallest N with N Q^-1 integral with even diagonal."""
        inv = _frac_inverse(self.entries)
        N = 1
        for i in range(self.rank):
            for j in range(self.rank):
                x = inv[i][j]
                need = x.denominator * (2 if i == j and (x * x.denominator).numerator % 2 else 1)
                N = N * need // math.gcd(N, need)
        return N

    def __repr__(self):
        return f"GramMatrix({self.name or list(map(list, self.entries))})"


_E8 = [
    [2, -1, 0, 0, 0, 0, 0, 0],
    [-1, 2, -1, 0, 0, 0, 0, 0],
    [0, -1, 2, -1, 0, 0, 0, -1],
    [0, 0, -1, 2, -1, 0, 0, 0],
    [0, 0, 0, -1, 2, -1, 0, 0],
    [0, 0, 0, 0, -1, 2, -1, 0],
    [0, 0, 0, 0, 0, -1, 2, 0],
    [0, 0, -1, 0, 0, 0, 0, 2],
]


def _block(a, b):
    n, m = len(a), len(b)
    out = [[0] * (n + m) for _ in range(n + m)]
    for i in range(n):
        out[i][:n] = a[i]
    for i in range(m):
        out[n + i][n:] = b[i]
    return out


GRAMS = {
    "rank1": [[2]],
    "diag22": [[2, 0], [0, 2]],
    "e8": _E8,
    "e8e8": _block(_E8, _E8),
}


def gram(name_or_entries) -> GramMatrix:
    if isinstance(name_or_entries, GramMatrix):
        return name_or_entries
    if isinstance(name_or_entries, str):
        if name_or_entries not in GRAMS:
            raise ValueError(f"unknown Gram matrix {name_or_entries!r}; built-ins: {', '.join(GRAMS)}")
        return GramMatrix(GRAMS[name_or_entries], name_or_entries)
    return GramMatrix(name_or_entries)


# ---------------------------------------------------------------- theta series

def reduce_binary(a2: int, b: int, c2: int) -> tuple[int, int, int]:
    """GL2(Z)-reduce the doubled form [[a2, b], [b, c2]] (positive semidefinite).

    Returns (A, B, C) with 0 <= 2B <= A <= C, or (0, 0, C) on the boundary.
    Representation numbers of a lattice are invariant under this action.
    """
    if a2 * c2 - b * b < 0 or a2 < 0 or c2 < 0:
        raise ValueError("form is not positive semidefinite")
    if a2 * c2 == b * b:
        # rank <= 1: the form is g * (u x + v y)^2 with values g * gcd(...)^2
        if a2 == 0 and c2 == 0:
            return 0, 0, 0
        g = math.gcd(a2, c2)
        return 0, 0, g
    A, B, C = a2, b, c2
    while True:
        k = (2 * B + A) // (2 * A)  # nearest integer to B / A
        if k:
            C, B = C - 2 * k * B + k * k * A, B - k * A
        if A > C:
            A, C = C, A
            continue
        break
    return A, abs(B), C


class _ThetaData:
    """Shared lattice data: norm counts and collected shells, grown on demand."""

    def __init__(self, Q: GramMatrix, backend=None):
        self.Q = Q
        self.backend = backend
        self._counts = np.zeros(1, np.int64)
        self._counts_bound = -1
        self._vecs = None
        self._norms = None
        self._vec_bound = -1
        self._hist: dict = {}

    def count(self, norm: int) -> int:
        if norm > self._counts_bound:
            bound = max(norm, 2 * self._counts_bound, 8)
            self._counts, _ = _accel.enumerate_short(self.Q.array(), bound, False, self.backend)
            self._counts_bound = bound
        return int(self._counts[norm])

    def shell(self, norm: int) -> np.ndarray:
        if norm > self._vec_bound:
            bound = max(norm, self._vec_bound + 2)
            _, vecs = _accel.enumerate_short(self.Q.array(), bound, True, self.backend)
            Qa = self.Q.array()
            self._vecs = vecs
            self._norms = np.einsum("ij,jk,ik->i", vecs, Qa, vecs)
            self._vec_bound = bound
        return self._vecs[self._norms == norm]

    def pair_counts(self, A: int, C: int) -> dict[int, int]:
        key = (A, C)
        if key not in self._hist:
            self._hist[key] = _accel.pair_histogram(self.shell(A), self.shell(C), self.Q.array(), self.backend)
        return self._hist[key]

    def coefficient(self, tau: HalfIntSymMat) -> int:
        n = tau.n
        if n == 0:
            return 1
        if n == 1:
            return self.count(tau.entry2(0, 0))
        if n == 2:
            A, B, C = reduce_binary(tau.entry2(0, 0), tau.entry2(0, 1), tau.entry2(1, 1))
            if A == 0:
                return self.count(C)
            return self.pair_counts(A, C).get(B, 0)
        return self._coefficient_general(tau)

    def _coefficient_general(self, tau: HalfIntSymMat) -> int:
        # columns x_1..x_n with <x_i, x_j> = T_ij, chosen one at a time
        T = tau.doubled()
        n = tau.n
        Qa = self.Q.array()
        shells = [self.shell(T[i][i]) for i in range(n)]
        grams = [s @ Qa for s in shells]

        def rec(i, chosen):
            if i == n:
                return 1
            cand = shells[i]
            mask = np.ones(len(cand), dtype=bool)
            for j, idx in enumerate(chosen):
                mask &= (grams[j][idx] @ cand.T) == T[j][i]
            total = 0
            for idx in np.nonzero(mask)[0]:
                total += rec(i + 1, chosen + [idx])
            return total

        return rec(0, [])


def theta_lazy(Q, n: int, backend: str | None = None) -> LazyExpansion:
    """Theta series of the lattice with Gram matrix Q in degree n, coefficients on demand."""
    Q = gram(Q)
    if n < 0:
        raise ValueError("degree must be non-negative")
    data = _ThetaData(Q, backend)

    def fn(tau):
        if is_psd(tau) == INDEFINITE:
            return 0
        return data.coefficient(tau)

    return LazyExpansion(n, Q.rank, fn, None, level=(Fraction(1), Fraction(Q.level)),
                         name=f"theta[{Q.name or 'gram'}]")


def theta_lattice(Q, n: int, B: int, backend: str | None = None) -> FourierExpansion:
    """Theta series sum over x in Z^{m x n} of e(tr(x^T Q x z / 2)), truncated at trace B."""
    return theta_lazy(Q, n, backend).materialize(B)


def theta_chi(n: int, tau0: HalfIntSymMat, mu: int, chi: DirichletCharacter, B: int) -> FourierExpansion:
    """Twisted theta series with coefficients sum chi(det x)^-1 det(x)^mu over x^T tau0 x = tau."""
    if mu not in (0, 1):
        raise ValueError("mu must be 0 or 1")
    if is_psd(tau0) != "positive_definite":
        raise ValueError("tau0 must be positive definite")
    if chi.parity != (-1) ** (n * mu):
        raise ValueError(f"parity condition fails: chi(-1) = {chi.parity} but (-1)^(n mu) = {(-1) ** (n * mu)}")
    G = np.array(tau0.doubled(), dtype=np.int64)
    _, vecs = _accel.enumerate_short(G, 2 * B, True)
    norms = np.einsum("ij,jk,ik->i", vecs, G, vecs)
    m = tau0.n
    # x has m rows and n columns; its columns are lattice vectors
    by_norm: dict[int, np.ndarray] = {}
    for v in np.unique(norms):
        by_norm[int(v)] = vecs[norms == v]
    acc: dict[HalfIntSymMat, object] = {}
    if m != n:
        raise ValueError("theta_chi needs a square x, so tau0 must have size n")

    def weight(x) -> object:
        d = int(round(np.linalg.det(x))) if n > 3 else int_det(x.tolist())
        val = chi(d % chi.modulus if d >= 0 else d)
        if val == 0:
            return 0
        return as_exact(1 / val if not isinstance(val, Fraction) else 1 / val) * Fraction(d) ** mu

    def rec(cols, T):
        i = len(cols)
        if i == n:
            x = np.array(cols).T
            w = weight(x)
            if w != 0:
                tau = HalfIntSymMat.from_doubled(T)
                acc[tau] = acc.get(tau, 0) + w
            return
        used = sum(T[j][j] for j in range(i))
        for nv, vs in by_norm.items():
            if used + nv > 2 * B:
                continue
            for v in vs:
                Tn = [row[:] + [0] for row in T] + [[0] * (i + 1)]
                gv = G @ v
                for j, c in enumerate(cols):
                    Tn[j][i] = Tn[i][j] = int(c @ gv)
                Tn[i][i] = nv
                rec(cols + [v], Tn)

    rec([], [])
    return FourierExpansion(n, n + 2 * mu, B, acc, character=chi)


# ---------------------------------------------------------------- operations

def mul(f: FourierExpansion, g: FourierExpansion) -> FourierExpansion:
    """Product of expansions: convolution over tau1 + tau2 = tau."""
    if f.degree != g.degree:
        raise ValueError(f"degree mismatch: {f.degree} vs {g.degree}")
    B = min(f.trunc, g.trunc)
    out: dict = {}
    gi = [(t, c) for t, c in g.coeffs.items() if t.trace <= B]
    for t1, c1 in f.coeffs.items():
        r = B - t1.trace
        if r < 0:
            continue
        for t2, c2 in gi:
            if t2.trace <= r:
                t = t1 + t2
                out[t] = out.get(t, 0) + c1 * c2
    return FourierExpansion(f.degree, f.weight2 + g.weight2, B, out)


def siegel_phi(f):
    """Coefficients at diag(tau', 0): the degree drops by one."""
    if f.degree < 1:
        raise ValueError("Siegel Phi needs degree >= 1")
    n = f.degree - 1
    if isinstance(f, LazyExpansion):
        return LazyExpansion(n, f.weight2, lambda t: f.coeff(t.pad(1)), f.trunc,
                             level=f.level, character=f.character, name=f"phi({f.name})")
    coeffs = {}
    for tau, c in f.coeffs.items():
        if tau.is_padded(1):
            coeffs[tau.block(n)] = c
    return FourierExpansion(n, f.weight2, f.trunc, coeffs, level=f.level, character=f.character)


def galois_on_form(f: FourierExpansion, t: int) -> FourierExpansion:
    """Apply zeta -> zeta^t to every coefficient (and to the character)."""
    chi = f.character.galois(t) if f.character is not None else None
    return FourierExpansion(f.degree, f.weight2, f.trunc,
                            {tau: _galois_coeff(c, t) for tau, c in f.coeffs.items()},
                            level=f.level, character=chi)


def eval_at(f: FourierExpansion, z) -> tuple[complex, float]:
    """(sum c(tau) e(tr(tau z)), crude tail bound)."""
    z = np.atleast_2d(np.asarray(z, dtype=np.complex128))
    if z.shape != (f.degree, f.degree):
        raise ValueError(f"z must be {f.degree}x{f.degree}")
    if f.degree == 0:
        return complex(f.coeff(HalfIntSymMat.zero(0))), 0.0
    Y = z.imag
    if not np.allclose(z, z.T):
        raise ValueError("z must be symmetric")
    lam = float(np.linalg.eigvalsh((Y + Y.T) / 2).min())
    if lam <= 0:
        raise ValueError("imaginary part of z must be positive definite")
    total = 0j
    cmax = 0.0
    for tau, c in f.coeffs.items():
        t = np.array([[float(x) for x in row] for row in tau.tau()])
        cc = complex(c)
        cmax = max(cmax, abs(cc))
        total += cc * cmath.exp(2j * math.pi * np.trace(t @ z))
    return total, math.exp(-2 * math.pi * lam * (f.trunc + 1)) * cmax


# ---------------------------------------------------------------- text format

def _fmt_frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _coeff_fields(c) -> list[str]:
    if isinstance(c, Cyclotomic):
        return [str(c.level)] + [_fmt_frac(x) for x in c.coords]
    return ["1", _fmt_frac(Fraction(c))]


def dumps(f: FourierExpansion) -> str:
    lines = [FORMAT_HEADER, f"degree {f.degree}", f"weight2 {f.weight2}", f"trunc {f.trunc}"]
    if f.level is not None:
        lines.append("level " + " ".join(_fmt_frac(Fraction(x)) for x in f.level))
    if f.character is not None:
        lines.append(f"character {f.character.spec()}")
    for tau, c in f.items():
        lines.append(" ".join([str(f.degree), str(f.weight2)] + [str(x) for x in tau.upper] + _coeff_fields(c)))
    return "\n".join(lines) + "\n"


def loads(text: str) -> FourierExpansion:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != FORMAT_HEADER:
        raise ValueError("not a halfweight expansion (bad header)")
    meta: dict[str, str] = {}
    records = []
    for ln in lines[1:]:
        head, _, rest = ln.partition(" ")
        if head in ("degree", "weight2", "trunc", "level", "character"):
            meta[head] = rest
        else:
            records.append(ln.split())
    try:
        n = int(meta["degree"])
        w2 = int(meta["weight2"])
        B = int(meta["trunc"])
    except KeyError as e:
        raise ValueError(f"missing header field {e}") from None
    level = tuple(Fraction(x) for x in meta["level"].split()) if "level" in meta else None
    chi = DirichletCharacter.from_spec(meta["character"]) if "character" in meta else None
    k = n * (n + 1) // 2
    coeffs = {}
    for rec in records:
        if int(rec[0]) != n or int(rec[1]) != w2:
            raise ValueError(f"record {' '.join(rec)} disagrees with the header")
        tau = HalfIntSymMat(n, tuple(int(x) for x in rec[2:2 + k]))
        lev = int(rec[2 + k])
        coords = [Fraction(x) for x in rec[3 + k:]]
        coeffs[tau] = coords[0] if lev == 1 else as_exact(Cyclotomic(lev, coords))
    return FourierExpansion(n, w2, B, coeffs, level=level, character=chi)


def iter_records(f: FourierExpansion) -> Iterable[dict]:
    """JSON-friendly coefficient records."""
    for tau, c in f.items():
        if isinstance(c, Cyclotomic):
            val = {"level": c.level, "coords": [_fmt_frac(x) for x in c.coords]}
        else:
            val = _fmt_frac(Fraction(c))
        yield {"tau2": tau.doubled(), "coeff": val}
