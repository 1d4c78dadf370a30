import cmath
import math

import numpy as np
import pytest

from halfweight.numerics import (FUNDAMENTAL_VOLUME, delta_expansion, eisenstein_expansion, mobius, petersson_numeric,
                                 poincare_eval, q_evaluate, reduce_sl2z)
from halfweight.fourier import FourierExpansion
from halfweight.symmat import HalfIntSymMat

RAMANUJAN_TAU = [0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]


def j(g, z):
    return g[1][0] * z + g[1][1]


def in_domain(z):
    return abs(z.real) <= 0.5 + 1e-12 and abs(z) >= 1 - 1e-12


def test_reduce_identity():
    z, g = reduce_sl2z(1j)
    assert z == 1j and g == ((1, 0), (0, 1))


def test_reduce_translation():
    z, g = reduce_sl2z(5 + 1j)
    assert abs(z - 1j) < 1e-15 and g == ((1, -5), (0, 1))


def test_reduce_small_point():
    z0 = 0.1 + 0.1j
    z, g = reduce_sl2z(z0)
    assert z.imag >= math.sqrt(3) / 2 - 1e-12 and in_domain(z)
    assert abs(mobius(g, z0) - z) < 1e-12
    (a, b), (c, d) = g
    assert a * d - b * c == 1


def test_reduce_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        z0 = complex(rng.uniform(-3, 3), 10 ** rng.uniform(-3, 0.5))
        z, g = reduce_sl2z(z0)
        assert in_domain(z)
        assert abs(mobius(g, z0) - z) < 1e-8 * max(1, abs(z))


def test_reduce_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        reduce_sl2z(1 - 1j)


def test_delta_is_ramanujan():
    f = delta_expansion(10)
    assert [f[HalfIntSymMat.scalar(m)] for m in range(11)] == RAMANUJAN_TAU


def test_delta_against_product():
    # q prod (1 - q^m)^24 expanded directly
    B = 10
    coeffs = [0] * (B + 1)
    coeffs[1] = 1
    for m in range(1, B + 1):
        for _ in range(24):
            coeffs = [coeffs[i] - (coeffs[i - m] if i >= m else 0) for i in range(B + 1)]
    f = delta_expansion(B)
    assert [f[HalfIntSymMat.scalar(m)] for m in range(B + 1)] == coeffs


def test_eisenstein_only_tabulated():
    with pytest.raises(ValueError):
        eisenstein_expansion(8, 3)


def test_poincare_proportional_to_delta():
    # weight-12 level-1 cusp forms are one-dimensional, so G_1 / Delta is constant
    f = delta_expansion(40)
    zs = [0.1 + 1.0j, -0.4 + 0.9j, 0.25 + 1.5j, 0.0 + 2.0j]
    g, tail = poincare_eval(12, 1, zs, 300)
    ratios = g / q_evaluate(f, zs)
    assert np.all(np.abs(ratios - ratios[0]) < 1e-6 * abs(ratios[0]))
    assert np.all(tail < 1e-3 * np.abs(g))


def test_poincare_cosets_beyond_identity_dominate_high_up():
    # the c = 0 term is e(z); the others decay only like y^-12
    y = 6.0
    full, _ = poincare_eval(12, 1, [1j * y], 200)
    lead = math.exp(-2 * math.pi * y)
    cs_only = full[0] - lead
    assert abs(cs_only) > lead


def test_poincare_invariance():
    rng = np.random.default_rng(1)
    gammas = [((1, 1), (0, 1)), ((0, -1), (1, 0)), ((2, 1), (1, 1)), ((1, 0), (2, 1))]
    for g in gammas:
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 1.3))
        gz = mobius(g, z)
        a, _ = poincare_eval(12, 1, [z], 200)
        b, _ = poincare_eval(12, 1, [gz], 200)
        assert abs(abs(b[0]) - abs(j(g, z)) ** 12 * abs(a[0])) < 1e-6 * abs(b[0])


def test_poincare_rejects_small_weight():
    with pytest.raises(ValueError):
        poincare_eval(2, 1, [1j], 10)


def test_q_evaluate_matches_sum():
    f = delta_expansion(20)
    z = 0.2 + 0.9j
    direct = sum(c * cmath.exp(2j * math.pi * m * z) for m, c in enumerate(RAMANUJAN_TAU))
    assert abs(q_evaluate(f, [z])[0] - direct) < 1e-6


def test_petersson_positive_and_hermitian():
    f = delta_expansion(20)
    g = f.scale(3)
    ff, tail = petersson_numeric(f, f, nx=24, ny=32)
    assert ff.real > 0 and abs(ff.imag) < 1e-12 * ff.real and tail < 1e-6 * ff.real
    fg, _ = petersson_numeric(f, g, nx=24, ny=32)
    gf, _ = petersson_numeric(g, f, nx=24, ny=32)
    assert abs(fg - gf.conjugate()) < 1e-12 * abs(fg)


def test_petersson_quadrature_halving():
    f = delta_expansion(20)
    coarse, _ = petersson_numeric(f, f, nx=24, ny=32)
    fine, _ = petersson_numeric(f, f, nx=48, ny=64)
    assert abs(coarse - fine) < 1e-3 * abs(fine)


def test_petersson_integrand_invariance():
    f = delta_expansion(30)

    def integrand(z):
        v = q_evaluate(f, [z])[0]
        return abs(v) ** 2 * z.imag ** 12

    rng = np.random.default_rng(2)
    for _ in range(10):
        z0 = complex(rng.uniform(-2, 2), rng.uniform(0.3, 1.0))
        z, _ = reduce_sl2z(z0)
        assert abs(integrand(z) - integrand(z0)) < 1e-8 * integrand(z)


def test_petersson_needs_cusp_forms():
    e4 = FourierExpansion(1, 8, 5, {HalfIntSymMat.scalar(m): c for m, c in enumerate(eisenstein_expansion(4, 5))})
    with pytest.raises(ValueError):
        petersson_numeric(e4, e4)
    with pytest.raises(ValueError):
        petersson_numeric(e4, delta_expansion(5))


def test_volume():
    assert FUNDAMENTAL_VOLUME == pytest.approx(math.pi / 3)
