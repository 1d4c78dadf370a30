import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from halfweight.arith import primes_upto
from halfweight.characters import DirichletCharacter, lambda_norm
from halfweight.cyclotomic import as_exact
from halfweight.lfunctions import (LSeriesData, euler_factor, format_params, ladder_local_check, lambda_cy,
                                   lseries_eval, parse_params)

nonzero = st.fractions(min_value=-9, max_value=9, max_denominator=9).filter(lambda x: x != 0)


def expand(factors):
    """Coefficients of a product of (1 - c T) factors."""
    out = [F(1)]
    for c in factors:
        nxt = out + [F(0)]
        for i, a in enumerate(out):
            nxt[i + 1] -= c * a
        out = nxt
    return out


def test_degree1_split():
    p, a = 3, F(2, 5)
    assert euler_factor((a,), p, 1).coeffs == [1, -p * (a + 1 / a), p * p]


def test_degree1_nonsplit():
    assert euler_factor((F(2, 5),), 3, 1, split=False).coeffs == [1, F(-6, 5)]


@given(st.integers(1, 3), st.sampled_from([2, 3, 5]), st.data())
def test_factor_degree_and_symmetry(n, p, data):
    params = data.draw(st.lists(nonzero, min_size=n, max_size=n))
    E = euler_factor(params, p, n)
    assert E.degree == 2 * n and E.coeffs[0] == 1
    assert euler_factor(params, p, n, split=False).degree == n
    flipped = [1 / x for x in params]
    assert euler_factor(flipped, p, n) == E
    assert E.coeffs == expand([F(p) ** n * x for lam in params for x in (lam, 1 / lam)])


def test_zero_parameter_rejected():
    with pytest.raises(ValueError):
        euler_factor((0,), 2, 1)


def test_ladder_degree1():
    p, k2 = 3, 8
    rep = ladder_local_check(1, k2, (), p)
    assert rep["ok"]
    assert rep["params"] == (F(p) ** (1 - 4),)
    assert rep["lhs"].terms == {(0,): 1, (1,): -(F(p) ** -2 + p ** 4), (2,): F(p) ** 2}


def test_ladder_degree2_e8_parameter():
    # degree-1 parameter of the E8 theta series at p = 2 (eigenvalue 69/4 gives x = 1/8)
    rep = ladder_local_check(2, 8, (F(1, 8),), 2)
    assert rep["ok"]
    full = rep["params"]
    assert full == (F(1, 8), F(1, 4))
    lhs = [rep["lhs"].terms.get((i,), 0) for i in range(5)]
    assert lhs == expand([4 * x for lam in full for x in (lam, 1 / lam)])


def test_ladder_negative_controls():
    rng = random.Random(5)
    for _ in range(30):
        p = rng.choice([2, 3, 5, 7])
        lam = F(rng.randint(1, 30), rng.randint(1, 30))
        k2 = rng.choice([8, 10, 12])
        assert ladder_local_check(2, k2, (lam,), p)["ok"]
        good = F(p) ** (2 - k2 // 2)
        bad = good * rng.choice([2, 3, F(1, 5)])
        assert not ladder_local_check(2, k2, (lam,), p, last=bad)["ok"]
        assert not ladder_local_check(2, k2, (lam,), p, last=bad)["diff"] == []


def test_ladder_with_character():
    chi = DirichletCharacter.from_spec("5:1")
    psi_p = chi(2)
    rep = ladder_local_check(2, 8, (F(1, 8),), 2, psi_at_p=psi_p)
    assert rep["ok"]


def test_lseries_toy_against_dirichlet_series():
    # all parameters 1 at n = 1: the product is zeta(s - 1)^2 = sum d(m) m^(1 - s)
    s = 4
    data = LSeriesData(1, 0, lambda p: (1,))
    val, err = lseries_eval(data, s, 20000)
    N = 20000
    d = [0] * (N + 1)
    for a in range(1, N + 1):
        for m in range(a, N + 1, a):
            d[m] += 1
    direct = sum(d[m] * m ** (1.0 - s) for m in range(1, N + 1))
    assert abs(val - direct) < 1e-6
    assert err < 1e-6


def test_lseries_empty_primes():
    data = LSeriesData(1, 0, lambda p: (1,), primes=[])
    assert lseries_eval(data, 5, 100) == (1, 0.0)


def test_lseries_region():
    with pytest.raises(ValueError):
        lseries_eval(LSeriesData(2, 8, lambda p: (1, 1)), 4, 100)


def test_global_ladder_assembly():
    k, s, P = 4, 8.0, 500
    lam = {p: F(p + 1, p + 2) for p in primes_upto(P)}
    upper = LSeriesData(2, 2 * k, lambda p: (lam[p], F(p) ** (2 - k)))
    lower = LSeriesData(1, 2 * k, lambda p: (lam[p],))
    lhs, _ = lseries_eval(upper, s, P)
    rhs, _ = lseries_eval(lower, s - 1, P, check_region=False)
    for p in primes_upto(P):
        rhs /= (1 - p ** (4 - k - s)) * (1 - p ** (k - s))
    assert abs(lhs - rhs) < 1e-10 * abs(lhs)


def test_lambda_cy_same_level():
    assert lambda_cy(4, DirichletCharacter.trivial(), 6, 6, 1, 9) == 1


def test_lambda_cy_single_prime():
    triv = DirichletCharacter.trivial()
    got = lambda_cy(4, triv, 1, 3, 1, 9)
    # the only constituent is L(2s - n - 1) = L(6)
    assert got == 1 / (1 - F(1, 3 ** 6))
    full, _ = lambda_norm(1, 9, F(7, 4), triv)
    removed, _ = lambda_norm(1, 9, F(7, 4), triv, removed=(3,))
    assert abs(float(got) - (full / removed).real) < 1e-12


def test_lambda_cy_galois():
    eta = DirichletCharacter.from_spec("5:1")
    val = as_exact(lambda_cy(3, eta, 1, 6, 2, 10))
    assert val.galois(3) == lambda_cy(3, eta.galois(3), 1, 6, 2, 10)


def test_params_roundtrip():
    text = "2: 1/8 4\n3: 0.25 -2  # comment\n\n"
    params = parse_params(text)
    assert params == {2: (F(1, 8), F(4)), 3: (F(1, 4), F(-2))}
    assert parse_params(format_params(params)) == params


@pytest.mark.parametrize("text", ["2 1/8\n", "2: 0\n", "2: 1\n2: 3\n", "2: 1\n3: 1 2\n", "2: x\n"])
def test_params_errors(text):
    with pytest.raises(ValueError):
        parse_params(text)
