import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from halfweight.characters import DirichletCharacter
from halfweight.cyclotomic import Cyclotomic
from halfweight.fourier import theta_lattice
from halfweight.numerics import cone_integral_numeric, delta_expansion
from halfweight.polys import LaurentPoly
from halfweight.projection import (GammaValue, OMEGA_KINDS, OmegaSpec, StructuredNonholomorphic, StructuredTerm,
                                   exceptional_case, exponent_bundle, from_holomorphic, gamma_n, holo_project,
                                   matrix_gamma_integral, mu_constant, omega_set, y_vars)
from halfweight.symmat import HalfIntSymMat


def siegel_gamma_float(n, s):
    return math.pi ** (n * (n - 1) / 4) * math.prod(math.gamma(s - j / 2) for j in range(n))


# ---------------------------------------------------------------- Gamma values

def test_gamma_examples():
    assert gamma_n(1, 1) == GammaValue(1, 0)
    assert gamma_n(1, F(1, 2)) == GammaValue(1, 2)
    assert gamma_n(2, F(5, 2)) == GammaValue(F(3, 4), 4)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("s2", [3, 4, 7, 10, 13])
def test_gamma_against_float(n, s2):
    s = F(s2, 2)
    if s - F(n - 1, 2) <= 0:
        pytest.skip("pole")
    assert float(gamma_n(n, s)) == pytest.approx(siegel_gamma_float(n, float(s)), rel=1e-12)


def test_gamma_pole():
    with pytest.raises(ValueError):
        gamma_n(2, F(1, 2))
    with pytest.raises(ValueError):
        gamma_n(1, F(1, 3))


def test_mu_constant():
    assert float(mu_constant(12, 1)) == pytest.approx(math.gamma(11) * math.pi ** -11, rel=1e-12)


# ---------------------------------------------------------------- matrix Gamma integrals

def one(n):
    return LaurentPoly.const(1, y_vars(n))


def gen(n, name):
    return LaurentPoly.gens(*y_vars(n))[y_vars(n).index(name)]


def test_gamma_integral_degree1_constant():
    res = matrix_gamma_integral(one(1), [[1]], F(7, 2))
    assert float(res) == pytest.approx(math.gamma(2.5), rel=1e-14)
    assert res.gamma == GammaValue(F(3, 4), 2) and res.coeff == 1


@pytest.mark.parametrize("t", [F(1), F(3, 2), F(5)])
def test_gamma_integral_degree1_linear(t):
    nu = F(9, 2)
    res = matrix_gamma_integral(gen(1, "y11"), [[t]], nu)
    s = float(nu) - 1
    closed = s * math.gamma(s) * float(t) ** (-s - 1)
    quad, _ = integrate.quad(lambda y: y * math.exp(-float(t) * y) * y ** (float(nu) - 1) / y, 0, math.inf,
                             epsabs=0, epsrel=1e-12)
    assert float(res) == pytest.approx(closed, rel=1e-12)
    assert float(res) == pytest.approx(quad, rel=1e-8)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_gamma_integral_degree2_identity():
    res = matrix_gamma_integral(one(2), [[1, 0], [0, 1]], 4)
    assert float(res) == pytest.approx(float(GammaValue(F(3, 4), 4)), rel=1e-14)
    assert float(res) == pytest.approx(cone_integral_numeric(one(2), [[1, 0], [0, 1]], 4, epsrel=1e-6), rel=1e-4)


def test_gamma_integral_needs_nu_above_n():
    with pytest.raises(ValueError):
        matrix_gamma_integral(one(2), [[1, 0], [0, 1]], 2)


def test_gamma_integral_rejects_foreign_variables():
    with pytest.raises(ValueError):
        matrix_gamma_integral(LaurentPoly.gens("y21")[0], [[1, 0], [0, 1]], 4)


def exact_value(P, tau, nu):
    return float(matrix_gamma_integral(P, tau, nu))


@pytest.mark.parametrize("var,i,j,factor", [("y11", 0, 0, -1), ("y22", 1, 1, -1), ("y12", 0, 1, F(-1, 2))])
def test_derivative_rule_by_finite_differences(var, i, j, factor):
    tau = [[F(3, 2), F(1, 3)], [F(1, 3), F(2)]]
    nu = F(9, 2)
    h = F(1, 10 ** 5)

    def shifted(sign):
        t = [row[:] for row in tau]
        t[i][j] += sign * h
        if i != j:
            t[j][i] += sign * h
        return exact_value(one(2), t, nu)

    fd = float(factor) * (shifted(1) - shifted(-1)) / (2 * float(h))
    assert exact_value(gen(2, var), tau, nu) == pytest.approx(fd, rel=1e-5)


def test_derivative_rule_second_order():
    tau = [[F(3, 2), F(1, 3)], [F(1, 3), F(2)]]
    nu = F(11, 2)
    P = gen(2, "y11") * gen(2, "y22") - gen(2, "y12") ** 2
    # |y| times the kernel is the kernel at nu + 1
    assert exact_value(P, tau, nu) == pytest.approx(exact_value(one(2), tau, nu + 1), rel=1e-12)


@st.composite
def cases(draw):
    n = draw(st.integers(1, 2))
    vals = [[F(0)] * n for _ in range(n)]
    for i in range(n):
        vals[i][i] = F(draw(st.integers(2, 9)), draw(st.integers(1, 3)))
    if n == 2:
        b = F(draw(st.integers(-3, 3)), 4)
        vals[0][1] = vals[1][0] = b
    exps = draw(st.lists(st.integers(0, 2), min_size=len(y_vars(n)), max_size=len(y_vars(n))))
    P = LaurentPoly(y_vars(n), {tuple(exps): draw(st.integers(1, 5))})
    nu = F(2 * n + 1 + 2 * draw(st.integers(0, 4)), 2)
    return P, vals, nu


@given(cases())
def test_normalized_value_is_rational(case):
    P, tau, nu = case
    res = matrix_gamma_integral(P, tau, nu)
    norm = res.normalized()
    assert not isinstance(norm, Cyclotomic) or norm.is_rational()


# ---------------------------------------------------------------- holomorphic projection

def test_idempotence_degree1():
    f = delta_expansion(6)
    assert holo_project(from_holomorphic(f)) == f


def test_idempotence_degree2():
    f = theta_lattice("e8", 2, 2)
    pd = {t: c for t, c in f.coeffs.items() if t.det() > 0}
    got = holo_project(from_holomorphic(f), enforce_weight_bound=False)
    assert got.coeffs == pd


def test_weight_bound_enforced():
    with pytest.raises(ValueError):
        holo_project(from_holomorphic(theta_lattice("e8", 2, 1)))


def test_zero_input():
    assert holo_project(StructuredNonholomorphic(1, 24, 5, [])).coeffs == {}


def test_single_term_against_quadrature():
    # c(1) = mu^-1 |4|^(k-1) int (pi y) e^(-2 pi y) e^(-2 pi y) y^(k-2) dy at n = 1
    k = 12
    tau = HalfIntSymMat.scalar(1)
    term = StructuredTerm(tau, tau, gen(1, "y11"), F(0))
    got = holo_project(StructuredNonholomorphic(1, 2 * k, 1, [term]))[tau]
    integral, _ = integrate.quad(lambda y: math.pi * y * math.exp(-4 * math.pi * y) * y ** (k - 2), 0, math.inf,
                                 epsabs=0, epsrel=1e-12)
    want = 4 ** (k - 1) * integral / float(mu_constant(k, 1))
    assert float(got) == pytest.approx(want, rel=1e-10)


def test_convergence_violation_names_term():
    tau = HalfIntSymMat.scalar(1)
    term = StructuredTerm(tau, tau, one(1), F(23, 2))
    with pytest.raises(ValueError, match="term 0"):
        holo_project(StructuredNonholomorphic(1, 24, 1, [term]))


# ---------------------------------------------------------------- exceptional cases and sets

def test_exceptional_cases():
    assert exceptional_case(1, F(3, 2), DirichletCharacter.trivial()) == "R1"
    assert exceptional_case(2, F(7, 2), DirichletCharacter.kronecker(-4)) == "R2"
    assert exceptional_case(2, 3, DirichletCharacter.from_spec("5:1")) == "none"
    assert exceptional_case(2, 3, DirichletCharacter.kronecker(5)) == "X"


def test_omega_plus_example():
    assert omega_set(OmegaSpec(1, 13, 0), "Omega+") == [F(5, 2), F(9, 2), F(13, 2)]


def test_omega_degenerate_empty():
    assert omega_set(OmegaSpec(2, 9, 0), "Omega'_nk") == []


def test_omega_unknown():
    with pytest.raises(ValueError):
        omega_set(OmegaSpec(1, 13), "Omega?")


@given(st.integers(1, 4), st.integers(1, 40), st.integers(0, 1))
def test_omega_plus_minus_disjoint(n, k2, mu):
    spec = OmegaSpec(n, k2, mu)
    plus, minus = omega_set(spec, "Omega+"), omega_set(spec, "Omega-")
    assert not set(plus) & set(minus)
    assert all(m > n for m in plus) and all(m <= n for m in minus)
    for kind in OMEGA_KINDS:
        got = omega_set(spec, kind)
        assert got == sorted(set(got))


def test_bundle_generic_high():
    b = exponent_bundle(1, 13, 1, F(13, 2), "generic_high")
    assert b.beta_m == F(1, 2) * (6 + F(13, 2) - 1) + F(1, 4)
    assert b.closed_form_ok


def test_bundle_r1_branch():
    k, l = F(13, 2), F(1, 2)
    b = exponent_bundle(1, 13, 1, F(3, 2), "R1")
    assert b.r == (k - l) / 2 - (2 * F(3, 2) - 1) / 4 + 1
    assert b.m0 == (k + l - 3) / 2


def test_bundle_case_errors():
    with pytest.raises(ValueError):
        exponent_bundle(1, 13, 1, F(3, 2), "X")
    with pytest.raises(ValueError):
        exponent_bundle(2, 13, 2, F(5, 2), "R2")
    with pytest.raises(ValueError):
        exponent_bundle(2, 13, 2, F(3, 2), "generic_high")


def test_bundle_json():
    js = exponent_bundle(2, 13, 2, F(7, 2)).to_json()
    assert js["case"] == "generic_high" and js["k"] == "13/2" and js["c_m_closed_form_ok"]
