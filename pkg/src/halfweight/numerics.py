"""Degree-1 analytic checks: SL2(Z) reduction, Poincare series, Petersson products.

Also a numeric integrator over the cone of positive definite matrices
(n <= 2) used to cross-check the exact matrix Gamma integrals.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import gcd

import numpy as np
from scipy import integrate

from . import _accel
from .fourier import FourierExpansion
from .polys import LaurentPoly
from .symmat import HalfIntSymMat

__all__ = [
    "reduce_sl2z",
    "mobius",
    "coset_pairs",
    "poincare_eval",
    "eisenstein_expansion",
    "delta_expansion",
    "q_evaluate",
    "petersson_numeric",
    "FUNDAMENTAL_VOLUME",
    "cone_integral_numeric",
]

FUNDAMENTAL_VOLUME = math.pi / 3


def mobius(g, z: complex) -> complex:
    (a, b), (c, d) = g
    return (a * z + b) / (c * z + d)


def reduce_sl2z(z: complex, max_steps: int = 10000):
    """(z', g) with z' = g z in |Re z| <= 1/2, |z| >= 1; g an integer matrix of determinant 1."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("z must lie in the upper half plane")
    a, b, c, d = 1, 0, 0, 1
    for _ in range(max_steps):
        t = math.floor(z.real + 0.5)
        if t:
            z -= t
            a, b = a - t * c, b - t * d
        if abs(z) < 1 - 1e-15:
            z = -1 / z
            a, b, c, d = -c, -d, a, b
            continue
        break
    else:  # pragma: no cover
        raise RuntimeError("reduction did not terminate")
    if c < 0 or (c == 0 and d < 0):
        a, b, c, d = -a, -b, -c, -d
    return z, ((a, b), (c, d))


def coset_pairs(C: int):
    """Coprime (c, d) with 1 <= c <= C, |d| <= C, and a with a d = 1 mod c."""
    cs, ds, as_ = [], [], []
    for c in range(1, C + 1):
        for d in range(-C, C + 1):
            if gcd(c, d) == 1:
                cs.append(c)
                ds.append(d)
                as_.append(pow(d, -1, c) if c > 1 else 0)
    return np.array(cs, np.int64), np.array(ds, np.int64), np.array(as_, np.int64)


def poincare_eval(k: int, tau: int, z, C: int, backend: str | None = None):
    """G_tau(z) = sum over Gamma_inf \\ SL2(Z) of (cz+d)^-k e(tau gamma z), cut at |c|,|d| <= C.

    Returns (values, tail bound).  Needs integral k > 2.
    """
    if int(k) != k or k <= 2:
        raise ValueError(f"the Poincare series needs integral k > 2, got {k}")
    k = int(k)
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if np.any(z.imag <= 0):
        raise ValueError("points must lie in the upper half plane")
    cs, ds, as_ = coset_pairs(C)
    vals = _accel.poincare_sum(z, k, tau, cs, ds, as_, backend=backend)
    # |cz+d| >= r min(1/2, y/(2(1+|x|))) for r = max(|c|,|d|); at most 8r pairs have a given r
    m = np.minimum(0.5, z.imag / (2 * (1 + np.abs(z.real))))
    tail = 8 * m ** (-k) * C ** (2.0 - k) / (k - 2)
    return vals, tail


# ---------------------------------------------------------------- level-one expansions

def _sigma(m: int, r: int) -> int:
    return sum(d ** r for d in range(1, m + 1) if m % d == 0)


def eisenstein_expansion(k: int, B: int) -> list[int]:
    """Coefficients 0..B of E_4 (k=4) or E_6 (k=6) from divisor sums."""
    const = {4: 240, 6: -504}
    if k not in const:
        raise ValueError("only E_4 and E_6 are tabulated")
    return [1] + [const[k] * _sigma(m, k - 1) for m in range(1, B + 1)]


def _series_mul(a, b, B):
    out = [0] * (B + 1)
    for i, x in enumerate(a[:B + 1]):
        if x:
            for j, y in enumerate(b[:B + 1 - i]):
                out[i + j] += x * y
    return out


def delta_expansion(B: int) -> FourierExpansion:
    """(E_4^3 - E_6^2)/1728 as a weight-12 degree-1 expansion."""
    e4, e6 = eisenstein_expansion(4, B), eisenstein_expansion(6, B)
    cube = _series_mul(_series_mul(e4, e4, B), e4, B)
    sq = _series_mul(e6, e6, B)
    coeffs = {}
    for m in range(B + 1):
        num = cube[m] - sq[m]
        if num % 1728:
            raise ArithmeticError("E4^3 - E6^2 is not divisible by 1728")
        coeffs[HalfIntSymMat.scalar(m)] = Fraction(num // 1728)
    return FourierExpansion(1, 24, B, coeffs, level=(1, 1))


def _coeff_array(f: FourierExpansion) -> np.ndarray:
    if f.degree != 1:
        raise ValueError("degree-1 expansions only")
    arr = np.zeros(f.trunc + 1, np.complex128)
    for tau, c in f.coeffs.items():
        arr[tau.trace] = complex(c)
    return arr


def q_evaluate(f: FourierExpansion, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    c = _coeff_array(f)
    m = np.arange(len(c))
    return np.exp(2j * np.pi * np.outer(z, m)) @ c


# ---------------------------------------------------------------- Petersson products

def _domain_nodes(nx: int, ny: int, y_max: float):
    """Gauss-Legendre nodes and weights (dx dy) on |x| <= 1/2, sqrt(1-x^2) <= y <= y_max."""
    gx, wx = np.polynomial.legendre.leggauss(nx)
    gy, wy = np.polynomial.legendre.leggauss(ny)
    x = 0.5 * gx
    wx = 0.5 * wx
    lo = np.sqrt(1 - x * x)
    half = 0.5 * (y_max - lo)
    Y = lo[:, None] + half[:, None] * (gy[None, :] + 1)
    W = wx[:, None] * half[:, None] * wy[None, :]
    X = np.broadcast_to(x[:, None], Y.shape)
    return X.ravel(), Y.ravel(), W.ravel()


def petersson_numeric(f, g, k: int | None = None, *, y_max: float = 8.0, nx: int = 48, ny: int = 64,
                      normalize: bool = True):
    """<f, g> = Vol^-1 int_F f conj(g) y^k dx dy / y^2 over the truncated standard domain.

    f and g are degree-1 expansions or callables z -> values.  Returns
    (value, tail bound for y > y_max).  With normalize=False the Vol^-1
    factor is omitted.
    """
    def as_fn(h):
        if isinstance(h, FourierExpansion):
            if h.coeffs.get(HalfIntSymMat.scalar(0), 0) != 0:
                return None
            return lambda z: q_evaluate(h, z)
        return h

    F, G = as_fn(f), as_fn(g)
    if F is None and G is None:
        raise ValueError("the integrand does not decay: neither form is cuspidal")
    if F is None or G is None:
        raise ValueError("the integrand does not decay: one form is not cuspidal")
    if k is None:
        k = next(h.weight2 // 2 for h in (f, g) if isinstance(h, FourierExpansion))
    X, Y, W = _domain_nodes(nx, ny, y_max)
    Z = X + 1j * Y
    vals = F(Z) * np.conj(G(Z)) * Y ** (k - 2)
    total = complex(np.sum(vals * W))
    # beyond y_max both factors decay at least like e^(-2 pi y) times a bound read off at y_max
    zt = np.linspace(-0.5, 0.5, 9) + 1j * y_max
    amp = float(np.max(np.abs(F(zt) * np.conj(G(zt))))) * math.exp(4 * math.pi * y_max)
    tail = amp * float(integrate.quad(lambda y: math.exp(-4 * math.pi * y) * y ** (k - 2), y_max, math.inf)[0])
    if normalize:
        total /= FUNDAMENTAL_VOLUME
        tail /= FUNDAMENTAL_VOLUME
    return total, tail


# ---------------------------------------------------------------- cone quadrature

def cone_integral_numeric(P: LaurentPoly, tau, nu: float, epsrel: float = 1e-9) -> float:
    """int_Y P(y) e^(-tr(tau y)) |y|^(nu-(n+1)/2) d*y by adaptive quadrature, n in {1, 2}.

    For n = 2 the cone is parametrized by a = y11, b = y12 and the Schur
    complement c = y22 - b^2/a, which has unit Jacobian and |y| = a c.
    Diagonal variables are squared (a = s^2, c = w^2) so the boundary
    singularity of |y|^(nu-(n+1)/2) at small nu disappears.
    """
    T = [[float(Fraction(x)) for x in row] for row in tau]
    n = len(T)
    nu = float(nu)
    terms = [(dict(zip(P.vars, e)), complex(c).real) for e, c in P.terms.items()]

    def poly(vals):
        return sum(c * math.prod(vals[v] ** a for v, a in e.items()) for e, c in terms)

    opts = {"epsrel": epsrel, "epsabs": 0, "limit": 200}
    if n == 1:
        t = T[0][0]
        val, _ = integrate.quad(lambda s: 2 * poly({"y11": s * s}) * math.exp(-t * s * s) * s ** (2 * nu - 3),
                                0, math.inf, epsrel=epsrel, epsabs=0, limit=200)
        return val
    if n != 2:
        raise ValueError("numeric cone integrals are implemented for n <= 2")
    t11, t12, t22 = T[0][0], T[0][1], T[1][1]

    def fn(w, b, s):
        a, c = s * s, w * w
        y22 = c + b * b / a
        v = poly({"y11": a, "y12": b, "y22": y22})
        return 4 * v * math.exp(-(t11 * a + 2 * t12 * b + t22 * y22)) * (s * w) ** (2 * nu - 5)

    val, _ = integrate.nquad(fn, [[0, math.inf], [-math.inf, math.inf], [0, math.inf]], opts=opts)
    return val
