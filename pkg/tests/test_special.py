"""Gamma/digamma, the Mellin-inversion weights and their transforms,
Bessel kernels, and the bump template."""

from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.special

from lmoll.special import (
    DIGAMMA_QUARTER,
    GAMMA_QUARTER,
    MellinPrincipalPart,
    SmoothBump,
    WeightFunction,
    bessel_K0,
    bessel_Y0,
    digamma_complex,
    eval_weight,
    eval_weight_many,
    gamma_complex,
    kernel_abs_moment,
    mellin_principal_part,
    mellin_V,
    mellin_weight,
)

LOGQ = math.log(13 * math.sqrt(5) / math.pi)


def test_gamma_classical_values():
    assert abs(gamma_complex(0.5) - math.sqrt(math.pi)) < 1e-14
    assert abs(gamma_complex(1.0) - 1.0) < 1e-14
    assert abs(gamma_complex(5) - 24.0) < 1e-12
    assert abs(gamma_complex(0.25) - 3.625609908221908) < 1e-12
    assert abs(GAMMA_QUARTER - gamma_complex(0.25).real) < 1e-13


def test_gamma_pole_detection():
    for s in (0, -1, -2.0, -37):
        with pytest.raises(ValueError):
            gamma_complex(s)
        with pytest.raises(ValueError):
            digamma_complex(s)


def test_gamma_matches_reference_on_disk():
    # relative error < 1e-12 throughout |s| <= 50
    rng = np.random.default_rng(7)
    pts = rng.uniform(-50, 50, size=(400, 2))
    for re, im in pts:
        s = complex(re, im)
        if abs(s) > 50 or (im == 0 and re <= 0 and re == round(re)):
            continue
        ref = scipy.special.gamma(s)
        if abs(ref) == 0 or not np.isfinite(abs(ref)):
            continue
        assert abs(gamma_complex(s) - ref) / abs(ref) < 1e-12, s


def test_digamma_matches_reference():
    assert abs(digamma_complex(0.25) - DIGAMMA_QUARTER) < 1e-12
    rng = np.random.default_rng(11)
    pts = rng.uniform(-30, 30, size=(200, 2))
    for re, im in pts:
        s = complex(re, im)
        if im == 0 and re <= 0 and re == round(re):
            continue
        ref = scipy.special.psi(s)
        assert abs(digamma_complex(s) - ref) <= 1e-11 * max(1.0, abs(ref)), s


def test_mellin_V_closed_values():
    g34 = gamma_complex(0.75)
    assert abs(mellin_V(1) - g34**2 / GAMMA_QUARTER**2) < 1e-13
    assert abs(mellin_V(0.5) - 2 * math.pi / GAMMA_QUARTER**2) < 1e-13
    # s*transform(s) = B(s) = 1 + digamma(1/4) s + O(s^2), so the limit is 1
    # but the approach is linear in s
    assert abs(1e-9 * mellin_V(1e-9) - 1) < 1e-8
    s = 1e-4
    assert abs(s * mellin_V(s) - 1) < 2 * abs(DIGAMMA_QUARTER) * s
    with pytest.raises(ValueError):
        mellin_V(0)


def test_weight_function_validation():
    with pytest.raises(ValueError):
        WeightFunction("V3", 1.0)
    with pytest.raises(ValueError):
        WeightFunction("V1", 0.0)
    with pytest.raises(ValueError):
        eval_weight(WeightFunction("V1", LOGQ), -1.0)


def test_v1_equals_v2():
    w1 = WeightFunction("V1", LOGQ)
    w2 = WeightFunction("V2", LOGQ)
    for x in (0.1, 1.0, 10.0):
        assert abs(eval_weight(w1, x) - eval_weight(w2, x)) < 1e-10


def test_v_small_x_limit():
    # the sqrt(x) log x error term comes with constant 8/Gamma(1/4)^2; the
    # plain 2 x^0.4 envelope only holds once x^0.1 beats the log
    w = WeightFunction("V1", LOGQ)
    assert abs(eval_weight(w, 1e-8) - 1.0) <= 2 * (1e-8) ** 0.4
    euler = 0.5772156649015329
    for x in (1e-6, 1e-8):
        sharp = -8 * math.sqrt(x) * (2 - euler - math.log(x)) / GAMMA_QUARTER**2
        assert abs(eval_weight(w, x) - 1.0 - sharp) < 1e-12


def test_dv_small_x_limits():
    # dV kernels have a triple pole at s=-1/2, so the error scale is
    # sqrt(x) log^2 x
    for x in (1e-6, 1e-8):
        env = math.sqrt(x) * math.log(x) ** 2
        assert abs(eval_weight(WeightFunction("dV1", LOGQ), x)) <= env
        got = eval_weight(WeightFunction("dV2", LOGQ), x)
        assert abs(got - (-2 * DIGAMMA_QUARTER)) <= 2 * env


def test_w_small_x_asymptotes():
    for x in (1e-6, 1e-8):
        env = math.sqrt(x) * math.log(x) ** 2 / (2 * LOGQ)
        w1 = eval_weight(WeightFunction("W1", LOGQ), x)
        assert abs(w1 - (0.5 - math.log(x) / (2 * LOGQ))) <= env
        w2 = eval_weight(WeightFunction("W2", LOGQ), x)
        want = 0.5 + math.log(x) / (2 * LOGQ) - DIGAMMA_QUARTER / LOGQ
        assert abs(w2 - want) <= env


def test_mellin_inversion_consistency_shifted_line():
    # independent quadrature of the closed-form transform on Re(s) = -0.45,
    # residue 1 added, against the production evaluation
    w = WeightFunction("V1", LOGQ)
    sigma = -0.45
    for x in (1e-4, 1e-2, 0.5, 1.0, 3.0, 10.0):

        def integrand(t, x=x):
            s = sigma + 1j * t
            return (mellin_V(s) * x ** (-s)).real / (2 * math.pi)

        val, err = scipy.integrate.quad(
            integrand, -60, 60, limit=400, epsabs=1e-11, epsrel=1e-11
        )
        assert err < 1e-9
        assert abs((val + 1.0) - eval_weight(w, x)) < 1e-8, x


def test_weight_decay():
    w = WeightFunction("V1", LOGQ)
    for x in (1.0, 5.0, 20.0, 100.0, 1000.0):
        assert abs(eval_weight(w, x)) * (1 + x) ** 3 <= 10.0


def test_kernel_abs_moment_bounds_weight():
    w = WeightFunction("W1", LOGQ)
    for sigma in (2.0, 4.0):
        m = kernel_abs_moment("W1", LOGQ, sigma)
        for x in (2.0, 10.0, 50.0):
            assert abs(eval_weight(w, x)) <= m * x**-sigma + 1e-15


def test_principal_parts():
    v = mellin_principal_part(WeightFunction("V1", LOGQ))
    assert v == MellinPrincipalPart(0, 1)
    assert mellin_principal_part(WeightFunction("dV1", LOGQ)) == MellinPrincipalPart(0, 0)
    d2 = mellin_principal_part(WeightFunction("dV2", LOGQ))
    assert abs(d2.c1 - (-2 * DIGAMMA_QUARTER)) < 1e-14
    w1 = mellin_principal_part(WeightFunction("W1", LOGQ))
    assert abs(w1.c2 - 1 / (2 * LOGQ)) < 1e-15 and w1.c1 == 0.5
    # subtracting the principal part leaves a bounded function near s=0
    wf = WeightFunction("W2", LOGQ)
    pp = mellin_principal_part(wf)
    vals = []
    for s in (1e-3, 1e-4, 1e-5):
        h = mellin_weight(wf, s) - pp.c2 / s**2 - pp.c1 / s
        vals.append(h)
    assert abs(vals[1] - vals[2]) < 1e-2
    assert all(abs(v) < 10 for v in vals)


def test_w1_transform_closed_form_vs_numerical_mellin():
    # Mellin-transform the compositional W1 numerically and compare with the
    # closed form at two points
    L = LOGQ
    v1 = WeightFunction("V1", L)
    dv1 = WeightFunction("dV1", L)
    w1 = WeightFunction("W1", L)

    def w1_def(x: float) -> float:
        return (0.5 - math.log(x) / (2 * L)) * eval_weight(v1, x) + eval_weight(
            dv1, x
        ) / (2 * L)

    for s in (0.8, 1.5):
        lo, elo = scipy.integrate.quad(
            lambda u: w1_def(math.exp(-u)) * math.exp(-s * u),
            0, 60, limit=400, epsabs=1e-13,
        )
        hi, ehi = scipy.integrate.quad(
            lambda x: w1_def(x) * x ** (s - 1), 1, 40, limit=400, epsabs=1e-13
        )
        assert elo + ehi < 1e-8  # conservative quad estimates
        closed = mellin_weight(w1, s)
        assert abs((lo + hi) - closed) < 1e-10, s


def test_w2_production_matches_composition():
    L = LOGQ
    v2 = WeightFunction("V2", L)
    dv2 = WeightFunction("dV2", L)
    w2 = WeightFunction("W2", L)
    for x in (0.01, 0.5, 1.0, 2.0, 30.0):
        composed = (0.5 + math.log(x) / (2 * L)) * eval_weight(v2, x) + eval_weight(
            dv2, x
        ) / (2 * L)
        assert abs(eval_weight(w2, x) - composed) < 1e-11, x


def test_eval_weight_many_matches_scalar():
    w = WeightFunction("W1", LOGQ)
    xs = np.array([1e-6, 0.1, 1.0, 7.0, 300.0])
    many = eval_weight_many(w, xs)
    for x, v in zip(xs, many):
        assert v == eval_weight(w, float(x))


def _bessel_series(x: float, which: str) -> float:
    # power-series route, reliable to well below 1e-11 for x <= 5
    t = x * x / 4
    j = 1.0
    term = 1.0
    alt = 1.0
    hsum = 0.0
    corr = 0.0
    for k in range(1, 40):
        term *= t / k**2
        alt = -alt
        hsum += 1.0 / k
        j += alt * term if which == "Y0" else term
        corr += (-alt if which == "Y0" else 1.0) * hsum * term
    base = math.log(x / 2) + 0.5772156649015329
    if which == "Y0":
        return 2 / math.pi * (base * j + corr)
    return -base * j + corr


def test_bessel_against_series_oracle():
    for x in (0.3, 1.0, 2.5, 5.0):
        assert abs(bessel_Y0(x) - _bessel_series(x, "Y0")) < 1e-11
        assert abs(bessel_K0(x) - _bessel_series(x, "K0")) < 1e-11


def test_k0_integral_representation():
    val, err = scipy.integrate.quad(lambda t: math.exp(-math.cosh(t)), 0, 20)
    assert err < 1e-8
    assert abs(bessel_K0(1.0) - val) < 1e-11
    assert abs(val - 0.421024438240708) < 1e-11


def test_bessel_limits_and_bounds():
    x = 1e-4
    small = 2 / math.pi * (math.log(x / 2) + 0.5772156649015329)
    assert abs(bessel_Y0(x) - small) < 1e-6
    for x in (2.0, 5.0, 10.0, 50.0):
        assert bessel_K0(x) < math.exp(-x)
    with pytest.raises(ValueError):
        bessel_Y0(0.0)
    with pytest.raises(ValueError):
        bessel_K0(-1.0)


def test_bump_shape():
    b = SmoothBump(10.0, 100.0)
    assert b(10.0) == 0.0 and b(100.0) == 0.0 and b(5.0) == 0.0 and b(200.0) == 0.0
    assert abs(b(55.0) - 1.0) < 1e-15  # peak at midpoint
    xs = np.linspace(10, 100, 1001)
    vals = b(xs)
    assert np.all(vals >= 0) and np.all(vals <= 1.0)
    assert vals[1] < 1e-40  # flat to all orders at the edge
    with pytest.raises(ValueError):
        SmoothBump(3.0, 2.0)
