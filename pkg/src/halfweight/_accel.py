"""Hot loops: lattice enumeration, pair counting, Poincare sums.

Each kernel exists twice, once as a numba @njit function and once in plain
numpy.  The numba versions are used when numba imports and the environment
variable HALFWEIGHT_NUMBA is not "0".  Both produce identical integer
output; the float kernels agree to rounding.

Lattice enumeration prunes with floating-point Fincke-Pohst bounds widened
by a small slack, and decides membership at the leaves with exact integer
norms, so counts never depend on rounding.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba as nb
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    nb = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("HALFWEIGHT_NUMBA", "1") != "0"
BACKEND = "numba" if USE_NUMBA else "numpy"

_SLACK = 1e-7
_CHUNK = 1 << 18


def set_threads(n: int | None) -> None:
    if n and HAVE_NUMBA:
        nb.set_num_threads(max(1, min(int(n), nb.config.NUMBA_NUM_THREADS)))


def fp_form(Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients q_ij (i<j) and q_ii with Q(x) = sum_i q_ii (x_i + sum_j q_ij x_j)^2."""
    Q = np.asarray(Q, dtype=np.float64)
    m = Q.shape[0]
    q = Q.copy()
    for i in range(m):
        for j in range(i + 1, m):
            q[j, i] = q[i, j]
            q[i, j] = q[i, j] / q[i, i]
        for k in range(i + 1, m):
            for l in range(k, m):
                q[k, l] -= q[k, i] * q[i, l]
    qd = np.array([q[i, i] for i in range(m)])
    qu = np.triu(q, 1)
    return qu, qd


# ---------------------------------------------------------------- numba kernels

if HAVE_NUMBA:

    @nb.njit(cache=True)
    def _enum_nb(Q, qu, qd, max_norm, collect):
        m = Q.shape[0]
        counts = np.zeros(max_norm + 1, np.int64)
        cap = 1024 if collect else 1
        out = np.zeros((cap, m), np.int64)
        nout = 0
        x = np.zeros(m, np.int64)
        lo = np.zeros(m, np.int64)
        hi = np.zeros(m, np.int64)
        centre = np.zeros(m)
        rem = np.zeros(m + 1)
        # partial exact norms over trailing coordinates
        part = np.zeros(m + 1, np.int64)
        rem[m] = max_norm
        i = m - 1
        c = 0.0
        r2 = rem[m] / qd[i]
        r = np.sqrt(max(r2, 0.0)) + _SLACK
        centre[i] = c
        lo[i] = np.int64(np.ceil(c - r))
        hi[i] = np.int64(np.floor(c + r))
        x[i] = lo[i]
        while True:
            if x[i] > hi[i]:
                i += 1
                if i == m:
                    break
                x[i] += 1
                continue
            d = x[i] - centre[i]
            rem[i] = rem[i + 1] - qd[i] * d * d
            cross = 0
            for j in range(i + 1, m):
                cross += Q[i, j] * x[j]
            part[i] = part[i + 1] + Q[i, i] * x[i] * x[i] + 2 * x[i] * cross
            if i == 0:
                nrm = part[0]
                if nrm <= max_norm:
                    counts[nrm] += 1
                    if collect:
                        if nout == out.shape[0]:
                            grown = np.zeros((2 * nout, m), np.int64)
                            grown[:nout] = out
                            out = grown
                        out[nout] = x
                        nout += 1
                x[0] += 1
            else:
                i -= 1
                c = 0.0
                for j in range(i + 1, m):
                    c -= qu[i, j] * x[j]
                centre[i] = c
                r2 = rem[i + 1] / qd[i]
                r = np.sqrt(max(r2, 0.0)) + _SLACK
                lo[i] = np.int64(np.ceil(c - r))
                hi[i] = np.int64(np.floor(c + r))
                x[i] = lo[i]
        return counts, out[:nout]

    @nb.njit(cache=True)
    def _pair_hist_nb(VQ, W, lo, hi):
        h = np.zeros(hi - lo + 1, np.int64)
        a = VQ.shape[0]
        b = W.shape[0]
        m = W.shape[1]
        for s in range(a):
            for t in range(b):
                acc = 0
                for j in range(m):
                    acc += VQ[s, j] * W[t, j]
                h[acc - lo] += 1
        return h

    @nb.njit(cache=True, fastmath=False, parallel=True)
    def _poincare_nb(zr, zi, k, tau, cs, ds, as_):
        # points run in parallel; each point's coset sum is serial, so output is thread-count independent
        npts = zr.shape[0]
        out = np.zeros(npts, np.complex128)
        twopi = 2.0 * np.pi
        for s in nb.prange(npts):
            z = complex(zr[s], zi[s])
            acc = np.exp(1j * twopi * tau * z)
            for t in range(cs.shape[0]):
                c = cs[t]
                w = c * z + ds[t]
                inv = 1.0 / w
                pw = 1.0 + 0j
                for _ in range(k):
                    pw *= inv
                arg = tau * (as_[t] / c - inv / c)
                acc += pw * np.exp(1j * twopi * arg)
            out[s] = acc
        return out


# ---------------------------------------------------------------- numpy kernels

def _enum_np(Q, qu, qd, max_norm, collect):
    Q = np.asarray(Q, dtype=np.int64)
    m = Q.shape[0]
    counts = np.zeros(max_norm + 1, np.int64)
    found = []

    def expand(level, xs, rem):
        # xs: (rows, m) with coordinates > level fixed
        centre = -(xs[:, level + 1:] @ qu[level, level + 1:]) if level + 1 < m else np.zeros(len(xs))
        r = np.sqrt(np.maximum(rem / qd[level], 0.0)) + _SLACK
        lo = np.ceil(centre - r).astype(np.int64)
        hi = np.floor(centre + r).astype(np.int64)
        width = np.maximum(hi - lo + 1, 0)
        total = int(width.sum())
        if total == 0:
            return
        rows = np.repeat(np.arange(len(xs)), width)
        offs = np.arange(total) - np.repeat(np.cumsum(width) - width, width)
        vals = np.repeat(lo, width) + offs
        new = xs[rows].copy()
        new[:, level] = vals
        d = vals - centre[rows]
        newrem = rem[rows] - qd[level] * d * d
        if level == 0:
            nrm = np.einsum("ij,jk,ik->i", new, Q, new)
            keep = nrm <= max_norm
            counts[:] += np.bincount(nrm[keep], minlength=max_norm + 1)[: max_norm + 1]
            if collect:
                found.append(new[keep])
            return
        for start in range(0, len(new), _CHUNK):
            expand(level - 1, new[start:start + _CHUNK], newrem[start:start + _CHUNK])

    expand(m - 1, np.zeros((1, m), np.int64), np.array([float(max_norm)]))
    vecs = np.concatenate(found) if found else np.zeros((0, m), np.int64)
    if collect and len(vecs):
        # match the numba traversal order: lexicographic in (x_{m-1}, ..., x_0)
        order = np.lexsort(tuple(vecs[:, j] for j in range(m)))
        vecs = vecs[order]
    return counts, vecs


def _pair_hist_np(VQ, W, lo, hi):
    h = np.zeros(hi - lo + 1, np.int64)
    Wf = W.astype(np.float64).T
    step = max(1, _CHUNK // max(1, W.shape[0]))
    for start in range(0, VQ.shape[0], step):
        ip = np.rint(VQ[start:start + step].astype(np.float64) @ Wf).astype(np.int64)
        h += np.bincount((ip - lo).ravel(), minlength=hi - lo + 1)
    return h


def _poincare_np(zr, zi, k, tau, cs, ds, as_):
    z = zr + 1j * zi
    out = np.exp(2j * np.pi * tau * z)
    step = max(1, _CHUNK // max(1, len(z)))
    for start in range(0, len(cs), step):
        c = cs[start:start + step][None, :].astype(np.float64)
        d = ds[start:start + step][None, :].astype(np.float64)
        a = as_[start:start + step][None, :].astype(np.float64)
        w = c * z[:, None] + d
        arg = tau * (a / c - 1.0 / (c * w))
        out = out + (w ** (-k) * np.exp(2j * np.pi * arg)).sum(axis=1)
    return out


# ---------------------------------------------------------------- dispatch

def _pick(backend):
    backend = backend or BACKEND
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


def enumerate_short(Q, max_norm: int, collect: bool = True, backend: str | None = None):
    """All x in Z^m with x^T Q x <= max_norm: (counts by norm, vectors)."""
    Q = np.asarray(Q, dtype=np.int64)
    qu, qd = fp_form(Q)
    if _pick(backend) == "numba":
        counts, vecs = _enum_nb(Q, qu, qd, int(max_norm), collect)
    else:
        counts, vecs = _enum_np(Q, qu, qd, int(max_norm), collect)
    return counts, vecs


def pair_histogram(V, W, Q, backend: str | None = None) -> dict[int, int]:
    """Counts of v^T Q w over all pairs (v, w) from the rows of V and W."""
    V = np.asarray(V, dtype=np.int64)
    W = np.asarray(W, dtype=np.int64)
    if len(V) == 0 or len(W) == 0:
        return {}
    VQ = V @ np.asarray(Q, dtype=np.int64)
    nv = np.einsum("ij,ij->i", VQ, V).max()
    nw = np.einsum("ij,jk,ik->i", W, np.asarray(Q, dtype=np.int64), W).max()
    bound = int(np.ceil(np.sqrt(float(nv) * float(nw)))) + 1
    lo, hi = -bound, bound
    if _pick(backend) == "numba":
        h = _pair_hist_nb(VQ, W, lo, hi)
    else:
        h = _pair_hist_np(VQ, W, lo, hi)
    nz = np.nonzero(h)[0]
    return {int(i + lo): int(h[i]) for i in nz}


def poincare_sum(z, k: int, tau: int, cs, ds, as_, backend: str | None = None):
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    args = (np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag), int(k), float(tau),
            np.asarray(cs, np.int64), np.asarray(ds, np.int64), np.asarray(as_, np.int64))
    if _pick(backend) == "numba":
        return _poincare_nb(*args)
    return _poincare_np(*args)
