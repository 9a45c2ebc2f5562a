"""Exact arithmetic layer: factorization, characters, divisor-type sums,
Ramanujan and Kloosterman sums."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from lmoll.arith import (
    FactoredInt,
    RealCharacter,
    divisors,
    euler_phi,
    eval_rho,
    factor,
    is_prime,
    kloosterman,
    kronecker,
    lacunary_partial_sum,
    mobius,
    one_star_psi,
    one_star_psi_table,
    primes_up_to,
    ramanujan_sum,
    spf_table,
)


def test_factor_small():
    assert factor(1) == FactoredInt(1, ())
    assert factor(60).factors == ((2, 2), (3, 1), (5, 1))
    assert factor(2**10).factors == ((2, 10),)


def test_factor_large_prime():
    n = 10**9 + 7
    assert factor(n).factors == ((n, 1),)


def test_factor_large_semiprime():
    p, q = 1_000_003, 1_000_033
    assert factor(p * q).factors == ((p, 1), (q, 1))


def test_factor_rejects_out_of_range():
    for bad in (0, -5, 2**63):
        with pytest.raises(ValueError):
            factor(bad)


def test_factored_int_validates():
    with pytest.raises(ValueError):
        FactoredInt(6, ((3, 1), (2, 1)))  # primes out of order
    with pytest.raises(ValueError):
        FactoredInt(6, ((2, 1),))  # wrong product


def test_factor_multiplicativity_exhaustive():
    # recombining prime powers reproduces n for all n <= 10^4
    for n in range(1, 10**4 + 1):
        f = factor(n)
        prod = 1
        for p, e in f.factors:
            assert is_prime(p)
            prod *= p**e
        assert prod == n


def test_spf_table_agrees_with_factor():
    spf = spf_table(10**4)
    for n in range(2, 10**4 + 1):
        assert spf[n] == factor(n).factors[0][0]


def test_divisor_and_phi_helpers():
    assert divisors(28) == [1, 2, 4, 7, 14, 28]
    assert euler_phi(1) == 1
    assert euler_phi(10) == 4
    assert [mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]


def test_primes_up_to():
    assert primes_up_to(30) == (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)


def test_kronecker_against_quadratic_residues():
    # against Euler's criterion for odd primes
    for p in (3, 5, 7, 11, 13, 101):
        for a in range(1, p):
            euler = pow(a, (p - 1) // 2, p)
            expected = 1 if euler == 1 else -1
            assert kronecker(a, p) == expected
        assert kronecker(p, p) == 0


def test_kronecker_two_and_signs():
    assert [kronecker(a, 2) for a in (1, 3, 5, 7)] == [1, -1, -1, 1]
    assert kronecker(-1, 5) == 1
    assert kronecker(-1, 7) == -1  # via (−1/7) = (−1)^3
    assert kronecker(2, 15) == 1
    assert kronecker(5, 15) == 0


def test_real_character_d5_values():
    psi = RealCharacter(5)
    assert [psi(n) for n in range(10)] == [0, 1, -1, -1, 1, 0, 1, -1, -1, 1]
    assert psi(-1) == 1  # even
    assert psi.parity == 1


def test_real_character_periodic_and_multiplicative():
    for D in (5, 13, 17, 65):
        psi = RealCharacter(D)
        tab = psi.table()
        for n in range(1, 3 * D):
            assert psi(n) == tab[n % D]
        for m in range(1, 40):
            for n in range(1, 40):
                assert psi(m * n) == psi(m) * psi(n)


def test_real_character_rejects_bad_moduli():
    for bad in (1, 0, -5, 7, 12, 25, 45):  # wrong residue, not squarefree, tiny
        with pytest.raises(ValueError):
            RealCharacter(bad)


def test_one_star_psi_values():
    psi = RealCharacter(5)
    # (1*psi)(1)=1, (1*psi)(2)=1+psi(2)=0, (1*psi)(4)=1+psi(2)+psi(4)=1
    assert one_star_psi(psi, 1) == 1
    assert one_star_psi(psi, 2) == 0
    assert one_star_psi(psi, 4) == 1
    assert one_star_psi(psi, 5) == 1
    assert one_star_psi(psi, 11) == 2


def test_one_star_psi_against_direct_divisor_sum():
    for D in (5, 13):
        psi = RealCharacter(D)
        for n in range(1, 500):
            direct = sum(psi(d) for d in divisors(n))
            assert one_star_psi(psi, n) == direct
            assert direct >= 0


def test_one_star_psi_table_matches_pointwise():
    psi = RealCharacter(13)
    table = one_star_psi_table(psi, 2000)
    for n in range(1, 2001):
        assert table[n] == one_star_psi(psi, n)


def test_eval_rho_values():
    psi = RealCharacter(5)
    assert eval_rho(psi, 1) == 1
    assert eval_rho(psi, 2) == -(1 + psi(2))  # = 0
    assert eval_rho(psi, 3) == 0
    assert eval_rho(psi, 7) == 0
    assert eval_rho(psi, 11) == -2
    assert eval_rho(psi, 4) == psi(2)  # = -1
    assert eval_rho(psi, 8) == 0  # cube
    assert eval_rho(psi, 5) == -1
    assert eval_rho(psi, 25) == 0


def test_rho_is_dirichlet_inverse():
    # sum_{d|n} rho(d) (1*psi)(n/d) = [n == 1] for n <= 10^4
    for D in (5, 17):
        psi = RealCharacter(D)
        for n in range(1, 10**4 + 1):
            s = sum(eval_rho(psi, d) * one_star_psi(psi, n // d) for d in divisors(n))
            assert s == (1 if n == 1 else 0), n


def test_ramanujan_closed_forms():
    assert ramanujan_sum(1, 6) == mobius(6)
    assert ramanujan_sum(0, 6) == euler_phi(6)
    assert ramanujan_sum(4, 6) == -1  # mu(6)*1 + mu(3)*2 = 1 - 2
    assert ramanujan_sum(0, 1) == 1


def test_ramanujan_against_exponential_sum():
    for ell in list(range(1, 60)) + [128, 189, 300]:
        xs = np.array([x for x in range(ell) if math.gcd(x, ell) == 1])
        for r in range(-50, 51):
            direct = np.sum(np.exp(2j * np.pi * r * xs / ell)) if len(xs) else 1.0
            val = ramanujan_sum(r, ell)
            assert abs(direct - val) < 1e-8 * max(1, ell)
            assert abs(direct.imag) < 1e-9 * max(1, ell)


def test_kloosterman_small_closed_form():
    # x=2,3 invert each other mod 5 giving e(1)=1 twice; x=1,4 give e(2/5)+e(3/5)
    # so S(1,1;5) = 2 + 2 cos(4 pi/5) = (3 - sqrt 5)/2
    val = kloosterman(1, 1, 5)
    assert abs(val.imag) < 1e-12
    assert abs(val.real - (3 - math.sqrt(5)) / 2) < 1e-12


def test_kloosterman_degenerate_reductions():
    for c in (1, 2, 6, 12, 30):
        assert abs(kloosterman(0, 0, c) - euler_phi(c)) < 1e-9
    for ell in (1, 4, 9, 15, 210):
        assert abs(kloosterman(1, 0, ell) - mobius(ell)) < 1e-9
    for r in (-7, -1, 2, 9):
        for ell in (6, 10, 36):
            assert abs(kloosterman(r, 0, ell) - ramanujan_sum(r, ell)) < 1e-9


def test_kloosterman_real_and_symmetric():
    for m, n, c in [(1, 2, 7), (3, 5, 11), (2, 2, 9), (1, 1, 13)]:
        v = kloosterman(m, n, c)
        assert abs(v.imag) < 1e-10
        assert abs(v - kloosterman(n, m, c)) < 1e-10


def test_kloosterman_weil_bound():
    # |S(m,n;c)| <= tau(c) gcd(m,n,c)^(1/2) c^(1/2), via an independent
    # vectorized evaluation
    rng = np.random.default_rng(20240517)
    cs = list(range(1, 51)) + list(rng.integers(51, 201, size=25))
    for c in cs:
        c = int(c)
        xs = np.array([x for x in range(1, c + 1) if math.gcd(x, c) == 1] or [0])
        if c == 1:
            xs = np.array([0])
        xbars = np.array([pow(int(x), -1, c) if c > 1 else 0 for x in xs])
        tau_c = len(divisors(c))
        for m, n in [(1, 1), (-20, 3), (7, -7), (12, 18), (20, 20)]:
            direct = np.sum(np.exp(2j * np.pi * (m * xs + n * xbars) / c))
            val = kloosterman(m, n, c)
            assert abs(val - direct) < 1e-8 * c
            bound = tau_c * math.sqrt(math.gcd(m, math.gcd(n, c)) * c)
            assert abs(val) <= bound + 1e-8


def test_kloosterman_twist_modulus_check():
    psi = RealCharacter(5)
    with pytest.raises(ValueError):
        kloosterman(1, 1, 7, twist=psi)
    # matching modulus works and gives the character-twisted sum
    v = kloosterman(1, 1, 5, twist=psi)
    direct = sum(
        psi(x) * np.exp(2j * np.pi * (x + pow(x, -1, 5)) / 5) for x in range(1, 5)
    )
    assert abs(v - direct) < 1e-12


def test_lacunary_partial_sum_small():
    psi = RealCharacter(5)
    assert lacunary_partial_sum(psi, 1.0) == 1.0
    # exact rational oracle up to 2000
    acc = Fraction(0)
    for n in range(1, 2001):
        acc += Fraction(one_star_psi(psi, n), n)
    assert abs(lacunary_partial_sum(psi, 2000.0) - float(acc)) < 1e-12


def test_lacunary_partial_sum_rejects_small_x():
    with pytest.raises(ValueError):
        lacunary_partial_sum(RealCharacter(5), 0.5)
