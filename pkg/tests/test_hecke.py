from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from halfweight.fourier import FourierExpansion, theta_lattice, theta_lazy
from halfweight.hecke import (SpCosetData, check_cosets, commuting_square, eigenvalue_extract, export_cosets, gl_cosets,
                              hecke_apply, hecke_pm, import_cosets, omega0p, omega_p, phi_nu, psi_map,
                              satake_from_eigenvalue, satake_ladder, satake_product, satake_series,
                              satake_series_check, sp_cosets)
from halfweight.numerics import delta_expansion
from halfweight.polys import LaurentPoly
from halfweight.symmat import HalfIntSymMat


def subspaces(n, k, p):
    """Number of k-dimensional subspaces of F_p^n, by listing row-reduced spans."""
    seen = set()
    vecs = list(product(range(p), repeat=n))
    for basis in product(vecs, repeat=k):
        span = set()
        for coeffs in product(range(p), repeat=k):
            span.add(tuple(sum(c * v[i] for c, v in zip(coeffs, basis)) % p for i in range(n)))
        if len(span) == p ** k:
            seen.add(frozenset(span))
    return len(seen)


def valuation(x, p):
    a, num, den = 0, x.numerator, x.denominator
    while num % p == 0:
        num //= p
        a += 1
    while den % p == 0:
        den //= p
        a -= 1
    return a


def poly1(P):
    return {e[0]: c for e, c in P.terms.items()}


# ---------------------------------------------------------------- GL cosets

def test_gl_degree1():
    reps = gl_cosets(1, 5, (1,))
    assert len(reps) == 1 and reps[0].matrix == ((5,),)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_gl_lines_in_plane(p):
    reps = gl_cosets(2, p, (0, 1))
    assert len(reps) == subspaces(2, 1, p) == p + 1
    assert len(set(reps)) == len(reps)


@pytest.mark.parametrize("p", [2, 3])
def test_gl_degree3(p):
    assert len(gl_cosets(3, p, (0, 0, 1))) == subspaces(3, 2, p)
    assert len(gl_cosets(3, p, (0, 1, 1))) == subspaces(3, 1, p)


def test_gl_central():
    reps = gl_cosets(2, 3, (1, 1))
    assert len(reps) == 1 and reps[0].matrix == ((3, 0), (0, 3))


def test_omega0p_examples():
    p = 3
    x1, x2 = LaurentPoly.gens("x1", "x2")
    assert omega0p(gl_cosets(1, p, (1,))) == LaurentPoly.gens("x1")[0] * F(1, p)
    assert omega0p(gl_cosets(2, p, (0, 1))) == x1 * F(1, p) + x2 * F(1, p)
    rep = gl_cosets(1, p, (1,))[0]
    assert omega0p({rep: 2}) == omega0p([rep]) * 2


# ---------------------------------------------------------------- symplectic cosets

def primitive_sl2_count(p):
    """Classical count of cosets in SL2(Z) diag(1, p^2) SL2(Z): [[a, b], [0, d]], ad = p^2, gcd(a, b, d) = 1."""
    from math import gcd
    n = 0
    for a in range(1, p * p + 1):
        if p * p % a:
            continue
        d = p * p // a
        n += sum(1 for b in range(d) if gcd(gcd(a, b), d) == 1)
    return n


@pytest.mark.parametrize("p", [2, 3, 5])
def test_sp_degree1_count(p):
    data = sp_cosets(1, p, (1,))
    assert len(data) == primitive_sl2_count(p) == p * p + p
    rep = check_cosets(data)
    assert rep["closed"] and rep["transitive"]


@pytest.mark.parametrize("p,count", [(2, 30), (3, 120)])
def test_sp_degree2_closed_transitive(p, count):
    data = sp_cosets(2, p, (0, 1))
    assert len(data) == count
    assert len(set(data.pairs)) == len(data)
    rep = check_cosets(data)
    assert rep["closed"] and rep["transitive"]


def test_sp_incomplete_list_detected():
    data = sp_cosets(1, 3, (1,))
    short = SpCosetData(data.p, data.n, data.q, data.pairs[:-1])
    assert not check_cosets(short)["closed"]


def test_sp_identity():
    data = sp_cosets(2, 3, (0, 0))
    assert len(data) == 1


def test_sp_unsupported():
    with pytest.raises(ValueError):
        sp_cosets(3, 2)


def test_export_import_roundtrip():
    data = sp_cosets(2, 2, (0, 1))
    back = import_cosets(export_cosets(data))
    assert back.pairs == data.pairs and back.p == 2 and back.n == 2


def test_cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("HALFWEIGHT_CACHE_DIR", str(tmp_path))
    sp_cosets.cache_clear()
    try:
        first = sp_cosets(1, 7, (1,))
        files = list(tmp_path.iterdir())
        assert len(files) == 1
        sp_cosets.cache_clear()
        assert sp_cosets(1, 7, (1,)).pairs == first.pairs
    finally:
        sp_cosets.cache_clear()


# ---------------------------------------------------------------- Satake maps

@pytest.mark.parametrize("p", [2, 3])
def test_omega_degree1_by_exponent_count(p):
    data = sp_cosets(1, p, (1,))
    # oracle: each coset contributes (x/p)^a with a the p-adic valuation of d
    want = {}
    for d, _, _ in data.items():
        a = valuation(d[0][0], p)
        want[a] = want.get(a, 0) + F(p) ** (-a)
    assert poly1(omega_p(data)) == want == {1: p, 0: p - 1, -1: p}


def test_phi_nu_examples():
    x1, x2 = LaurentPoly.gens("x1", "x2")
    u, = LaurentPoly.gens("u")
    got = phi_nu(x1 * x2, 2)
    assert got.coefficient(x1=1, u=1) == 1 and len(got.terms) == 1
    assert phi_nu(x2.inv(), 2).coefficient(x1=0, u=-1) == 1


@given(st.lists(st.integers(-2, 2), min_size=4, max_size=4), st.lists(st.integers(-3, 3), min_size=2, max_size=2))
def test_phi_nu_homomorphism(exps, cs):
    x1, x2 = LaurentPoly.gens("x1", "x2")
    a = x1 ** exps[0] * x2 ** exps[1] * cs[0] + 1
    b = x1 ** exps[2] * x2 ** exps[3] * cs[1] - x2
    assert phi_nu(a * b, 2) == phi_nu(a, 2) * phi_nu(b, 2)
    assert phi_nu(a + b, 2) == phi_nu(a, 2) + phi_nu(b, 2)


@pytest.mark.parametrize("p", [2, 3])
def test_commuting_square(p):
    lhs, rhs = commuting_square(sp_cosets(2, p, (0, 1)))
    assert (lhs - rhs).is_zero() and not lhs.is_zero()


def test_psi_map_degree1():
    p = 3
    image = psi_map(sp_cosets(1, p, (1,)))
    assert len(image) == 1
    (poly,) = image.values()
    assert {e[0]: c for e, c in poly.terms.items()} == {1: p, 0: p - 1, -1: p}


def test_psi_map_identity():
    image = psi_map(sp_cosets(1, 5, (0,)))
    (poly,) = image.values()
    assert {e[0]: c for e, c in poly.terms.items()} == {0: 1}


@pytest.mark.parametrize("n,p,M", [(1, 2, 3), (1, 3, 3), (2, 2, 2)])
def test_weyl_symmetry(n, p, M):
    for m in range(M + 1):
        P = omega_p(hecke_pm(n, p, m))
        flipped = P.subs({f"x{i + 1}": LaurentPoly.gens(f"x{i + 1}")[0].inv() for i in range(n)})
        assert (P - flipped.with_vars(P.vars)).is_zero(), m


def test_satake_series_half_integral_p3():
    rep = satake_series_check(1, 3, 3)
    assert rep["ok"]


def test_satake_series_order0():
    rep = satake_series_check(1, 5, 0)
    assert rep["ok"] and poly1(rep["terms"][0]["series"]) == {0: 1}


def test_satake_series_p2_half_integral_unavailable():
    with pytest.raises(NotImplementedError):
        satake_series(1, 2, 1)


def test_integral_track_differs_from_half_integral_product():
    rep = satake_series_check(1, 3, 2, "integral")
    assert rep["terms"][0]["equal"] and not rep["terms"][1]["equal"]


def test_satake_product_first_terms():
    s = satake_product(1, 3, 2)
    assert poly1(s.coeffs[1]) == {1: 3, -1: 3}
    # t^2: 9(x^2 + 1 + x^-2) - 3
    assert poly1(s.coeffs[2]) == {2: 9, 0: 6, -2: 9}


def test_satake_ladder():
    assert satake_ladder((), 9, 1, 1, 3) == (F(1, 3) ** 3,)
    assert satake_ladder((F(1, 8),), 8, 1, 2, 2) == (F(1, 8), F(1, 4))
    assert satake_ladder((F(1, 8),), 9, -1, 2, 2) == (F(1, 8), F(-1, 4))
    with pytest.raises(ValueError):
        satake_ladder((0,), 8, 1, 2, 2)


# ---------------------------------------------------------------- action on expansions

def classical_image(c, k, p, T):
    """Degree-1 coset sum written out by hand: three coset types a = 1, 0, -1."""
    def get(m):
        return c(m) if m.denominator == 1 else 0
    T = F(T)
    # a = 0: s = b/p with p not dividing b, giving sum_b e(T b / p) = p [p | T] - 1
    mid = (p if T % p == 0 else 0) - 1
    return F(p) ** (2 - k) * get(p * p * T) + mid * get(T) + F(p) ** k * get(T / (p * p))


@pytest.mark.parametrize("p", [2, 3])
def test_hecke_e8_degree1(p):
    top = {2: 4, 3: 2}[p]
    f = theta_lattice("e8", 1, top * p * p)
    A = sp_cosets(1, p, (1,))
    g = hecke_apply(f, A)
    assert g.trunc == top

    def c(m):
        return f[HalfIntSymMat.scalar(int(m))]
    for T in range(g.trunc + 1):
        assert g[HalfIntSymMat.scalar(T)] == classical_image(c, 4, p, T)
    lam, wit = eigenvalue_extract(f, g)
    assert lam == {2: F(69, 4), 3: F(748, 9)}[p]
    assert len(wit) == g.trunc + 1


def test_hecke_delta_eigenvalue():
    p = 2
    f = delta_expansion(20)
    g = hecke_apply(f, sp_cosets(1, p, (1,)))
    lam, _ = eigenvalue_extract(f, g)

    def c(m):
        return f[HalfIntSymMat.scalar(int(m))]
    assert lam == classical_image(c, 12, p, 1) / c(1)


def test_satake_from_eigenvalue_roots():
    A = sp_cosets(1, 2, (1,))
    assert sorted(satake_from_eigenvalue(A, F(69, 4))) == [F(1, 8), 8]


def test_hecke_identity_decomposition():
    f = FourierExpansion(2, 8, 3, {HalfIntSymMat.diag(1, 1): 5})
    g = hecke_apply(f, sp_cosets(2, 3, (0, 0)))
    assert g == f


def test_hecke_rejects_half_integral():
    f = theta_lattice("rank1", 1, 8)
    with pytest.raises(NotImplementedError):
        hecke_apply(f, sp_cosets(1, 3, (1,)))


def test_hecke_rejects_level_prime():
    f = theta_lattice("diag22", 1, 8)
    with pytest.raises(ValueError):
        hecke_apply(f, sp_cosets(1, 2, (1,)))


def test_hecke_bound_contract():
    f = theta_lattice("e8", 1, 8)
    with pytest.raises(ValueError):
        hecke_apply(f, sp_cosets(1, 2, (1,)), bound=3)


def test_hecke_e8_degree2_eigenform():
    f = theta_lazy("e8", 2)
    g = hecke_apply(f, sp_cosets(2, 2, (0, 1)))
    idx = [HalfIntSymMat.diag(1, 0), HalfIntSymMat.diag(1, 1), HalfIntSymMat.from_doubled([[2, 1], [1, 2]])]
    lam, wit = eigenvalue_extract(f, g, idx)
    assert len(wit) == 3 and lam != 0


def test_eigenvalue_extract_trivial():
    f = theta_lattice("e8", 1, 3)
    assert eigenvalue_extract(f, f.scale(3))[0] == 3
    zero = FourierExpansion(1, 8, 3, {})
    assert eigenvalue_extract(f, zero)[0] == 0


def test_eigenvalue_extract_inconsistent():
    f = theta_lattice("e8", 1, 3)
    g = f + FourierExpansion(1, 8, 3, {HalfIntSymMat.scalar(2): 1})
    with pytest.raises(ValueError, match="not an eigenvector"):
        eigenvalue_extract(f, g)
