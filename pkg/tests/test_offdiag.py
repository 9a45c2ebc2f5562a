"""Shifted convolution tests: brute lattice sums against the arithmetic
main term, plus the shift-series, G-series, and H-kernel identities.

Frozen constants were produced by the exact fsum evaluations and an
independent dense outer-product oracle before being written down.
"""
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.special import zeta

from lmoll.arith import RealCharacter, ramanujan_sum
from lmoll.offdiag import (
    ShiftedConvParams,
    _ramanujan_column,
    brute_shifted_conv,
    dirichlet_series_G,
    H_kernel,
    H_kernel_product_form,
    main_term,
    power_overlap_closed,
    power_overlap_integral,
    shifted_conv_r_decomposed,
    singular_series,
    singular_series_factored,
    singular_series_r_sum,
    singular_series_term,
)
from lmoll.special import SmoothBump

PSI5 = RealCharacter(5)

GOLDEN = dict(a=1, b=1, q=101, M=500.0, N=500.0, psi=PSI5)
GOLDEN_BOTH = 235.3561859024497
GOLDEN_PLUS = 67.97703012877889
GOLDEN_MINUS = 167.37915577367082


def dense_oracle(p: ShiftedConvParams) -> float:
    """Full m x n outer product, no residue stepping.  O(MN) memory."""
    from lmoll.arith import one_star_psi_table
    from lmoll.offdiag import _lattice_range

    m_lo, m_hi = _lattice_range(p.omega1, p.M)
    n_lo, n_hi = _lattice_range(p.omega2, p.N)
    tab = one_star_psi_table(p.psi, max(m_hi, n_hi)).astype(np.float64)
    m = np.arange(m_lo, m_hi + 1)
    n = np.arange(n_lo, n_hi + 1)
    w = np.outer(p.omega1(m / p.M) * tab[m], p.omega2(n / p.N) * tab[n])
    am = (p.a * m)[:, None]
    bn = (p.b * n)[None, :]
    off_diag = am != bn
    total = 0.0
    if p.sign in ("+", "both"):
        total += float(w[((am - bn) % p.q == 0) & off_diag].sum())
    if p.sign in ("-", "both"):
        total += float(w[((am + bn) % p.q == 0) & off_diag].sum())
    return total


class TestParams:
    def test_branch_encoding(self):
        assert ShiftedConvParams(**GOLDEN, sign="+").branches() == (1,)
        assert ShiftedConvParams(**GOLDEN, sign="-").branches() == (-1,)
        assert ShiftedConvParams(**GOLDEN).branches() == (1, -1)

    def test_validation(self):
        with pytest.raises(ValueError):
            ShiftedConvParams(2, 4, 7, 50.0, 50.0, PSI5)     # not coprime
        with pytest.raises(ValueError):
            ShiftedConvParams(5, 1, 7, 50.0, 50.0, PSI5)     # 5 | a
        with pytest.raises(ValueError):
            ShiftedConvParams(1, 1, 10, 50.0, 50.0, PSI5)    # composite q
        with pytest.raises(ValueError):
            ShiftedConvParams(3, 101, 101, 50.0, 50.0, PSI5)  # q | ab
        with pytest.raises(ValueError):
            ShiftedConvParams(1, 1, 7, 0.0, 50.0, PSI5)
        with pytest.raises(ValueError):
            ShiftedConvParams(1, 1, 7, 2e6, 50.0, PSI5)
        with pytest.raises(ValueError):
            ShiftedConvParams(1, 1, 7, 50.0, 50.0, PSI5, sign="x")


class TestBruteSum:
    def test_golden_value(self):
        assert abs(brute_shifted_conv(ShiftedConvParams(**GOLDEN)) - GOLDEN_BOTH) < 1e-10

    def test_sign_split(self):
        plus = brute_shifted_conv(ShiftedConvParams(**GOLDEN, sign="+"))
        minus = brute_shifted_conv(ShiftedConvParams(**GOLDEN, sign="-"))
        assert abs(plus - GOLDEN_PLUS) < 1e-10
        assert abs(minus - GOLDEN_MINUS) < 1e-10
        assert abs((plus + minus) - GOLDEN_BOTH) < 1e-10

    def test_matches_dense_oracle(self):
        p = ShiftedConvParams(1, 2, 7, 120.0, 95.0, PSI5)
        got = brute_shifted_conv(p)
        assert abs(got - dense_oracle(p)) < 1e-12 * abs(got)

    def test_threads_do_not_change_bits(self):
        p = ShiftedConvParams(**GOLDEN)
        assert brute_shifted_conv(p, threads=1) == brute_shifted_conv(p, threads=4)

    def test_r_route_identical(self):
        # every pair lands in exactly one r per branch, so the per-m term
        # multisets coincide and the two routes agree bit for bit
        p = ShiftedConvParams(**GOLDEN)
        assert shifted_conv_r_decomposed(p) == brute_shifted_conv(p)

    def test_empty_when_modulus_exceeds_box(self):
        p = ShiftedConvParams(1, 1, 211, 25.0, 25.0, PSI5)
        assert brute_shifted_conv(p) == 0.0
        assert shifted_conv_r_decomposed(p) == 0.0

    def test_swap_symmetry(self):
        # a*m = -+ b*n is symmetric under (a, M) <-> (b, N) for sign "both"
        p1 = ShiftedConvParams(2, 3, 11, 301.0, 203.0, PSI5)
        p2 = ShiftedConvParams(3, 2, 11, 203.0, 301.0, PSI5)
        s1, s2 = brute_shifted_conv(p1), brute_shifted_conv(p2)
        assert abs(s1 - s2) < 1e-9 * abs(s1)


class TestSingularSeries:
    def test_first_term_is_one(self):
        for a, b, r in [(1, 1, 1), (2, 3, 5), (4, 9, -7)]:
            assert singular_series_term(a, b, r, PSI5, 1) == 1.0

    def test_hand_term_ell_six(self):
        # ell = 6 at (a, b, r) = (2, 3, 1): ell_a = 3, ell_b = 2, both psi
        # values -1, c_6(1) = mu(6) = 1, so the term is 1/6 exactly
        assert singular_series_term(2, 3, 1, PSI5, 6) == 1.0 / 6.0

    def test_ramanujan_column_matches_scalar(self):
        col = _ramanujan_column(12, 50)
        for ell in range(1, 51):
            assert col[ell - 1] == ramanujan_sum(12, ell)

    def test_truncations_consistent(self):
        s1 = singular_series(1, 1, 1, PSI5, L_max=10000)
        s2 = singular_series(1, 1, 1, PSI5, L_max=100000)
        assert abs(s1.value - s2.value) <= s1.tail_bound + s2.tail_bound
        assert s2.tail_bound < s1.tail_bound

    @pytest.mark.parametrize("a,b,r,D", [
        (1, 1, 1, 5), (1, 1, 2, 5), (1, 1, -3, 5), (2, 3, 7, 5),
        (4, 9, 7, 5), (1, 1, 1, 65), (2, 3, 7, 65), (12, 35, 11, 13),
    ])
    def test_factored_route_agrees(self, a, b, r, D):
        psi = RealCharacter(D)
        direct = singular_series(a, b, r, psi, L_max=100000)
        assert abs(direct.value - singular_series_factored(a, b, r, psi)) <= direct.tail_bound

    def test_factored_route_preconditions(self):
        with pytest.raises(ValueError):
            singular_series_factored(1, 1, 4, PSI5)    # r not squarefree
        with pytest.raises(ValueError):
            singular_series_factored(1, 1, 5, PSI5)    # r shares a factor with D

    def test_guards(self):
        with pytest.raises(ValueError):
            singular_series(1, 1, 0, PSI5)
        with pytest.raises(ValueError):
            singular_series(1, 1, 1, PSI5, L_max=999)
        with pytest.raises(ValueError):
            singular_series_term(1, 1, 1, PSI5, 0)
        with pytest.raises(ValueError):
            singular_series(2, 4, 1, PSI5)


class TestGSeries:
    @pytest.mark.parametrize("a,b,D", [
        (1, 1, 5), (2, 3, 5), (4, 9, 5), (1, 1, 65), (6, 25, 13),
    ])
    def test_value_at_one(self, a, b, D):
        # the closed form has no truncation, so this is 6/pi^2 to roundoff
        got = dirichlet_series_G(a, b, 1.0, RealCharacter(D))
        assert abs(got - 6.0 / math.pi**2) < 1e-12

    def test_guards(self):
        with pytest.raises(ValueError):
            dirichlet_series_G(2, 4, 1.0, PSI5)
        with pytest.raises(ValueError):
            dirichlet_series_G(1, 1, 0.5, PSI5)


class TestRSum:
    def test_matches_per_r_route(self):
        R = 50
        swapped, _ = singular_series_r_sum(1, 1, R, PSI5)
        direct = math.fsum(
            singular_series(1, 1, r, PSI5).value / r**2 for r in range(1, R + 1)
        )
        # measured difference is exactly zero; allow roundoff headroom
        assert abs(swapped - direct) < 1e-13

    def test_truncation_error_halves(self):
        target = dirichlet_series_G(1, 1, 2.0, PSI5).real * zeta(2) * zeta(3)
        e1 = abs(singular_series_r_sum(1, 1, 1000, PSI5, L_max=200000)[0] - target)
        e2 = abs(singular_series_r_sum(1, 1, 2000, PSI5, L_max=200000)[0] - target)
        assert abs(e1 - 9.985641e-4) < 1e-9
        assert 0.45 < e2 / e1 < 0.55

    def test_guards(self):
        with pytest.raises(ValueError):
            singular_series_r_sum(1, 1, 0, PSI5)
        with pytest.raises(ValueError):
            singular_series_r_sum(1, 1, 10, PSI5, L_max=10)


H_GRID = [
    (0.1, 0.2),
    (0.35, -0.05),
    (-0.2, 0.45),
    (0.3 + 0.2j, 0.1 - 0.05j),
    (0.05 + 0.6j, 0.05 - 0.6j),
]


class TestHKernel:
    @pytest.mark.parametrize("u,v", H_GRID)
    def test_sum_matches_product_form(self, u, v):
        s = H_kernel(u, v)
        assert abs(s - H_kernel_product_form(u, v)) <= 1e-10 * max(1.0, abs(s))

    @pytest.mark.parametrize("v", [0.1, 0.2])
    def test_zero_line(self, v):
        assert abs(H_kernel(1.0 - v, v)) < 1e-10

    def test_symmetric(self):
        assert abs(H_kernel(0.11, 0.27) - H_kernel(0.27, 0.11)) < 1e-14

    def test_pole_guards(self):
        with pytest.raises(ValueError):
            H_kernel(0.3, -0.3)
        with pytest.raises(ValueError):
            H_kernel(-0.6, -0.4)
        with pytest.raises(ValueError):
            H_kernel(0.5, 0.1)


class TestOverlapIntegral:
    @pytest.mark.parametrize("T,u,v", [(2.0, 0.1, 0.1), (0.5, 0.3, 0.25)])
    def test_quadrature_matches_closed_form(self, T, u, v):
        got = power_overlap_integral(T, u, v)
        assert abs(got - power_overlap_closed(T, u, v)) < 1e-8

    def test_guards(self):
        for bad in [(0.0, 0.1, 0.1), (1.0, 0.1, 0.6), (1.0, -0.2, 0.1)]:
            with pytest.raises(ValueError):
                power_overlap_integral(*bad)
            with pytest.raises(ValueError):
                power_overlap_closed(*bad)


class TestMainTerm:
    def test_empty_box(self):
        value, tail = main_term(ShiftedConvParams(1, 1, 211, 25.0, 25.0, PSI5))
        assert value == 0.0 and tail == 0.0

    def test_swap_symmetry(self):
        v1, _ = main_term(ShiftedConvParams(2, 3, 11, 301.0, 203.0, PSI5))
        v2, _ = main_term(ShiftedConvParams(3, 2, 11, 203.0, 301.0, PSI5))
        assert abs(v1 - v2) < 1e-8 * abs(v1)

    def test_tracks_brute_sum(self):
        # fluctuations around the main term shrink slowly, roughly like
        # M^(-1/3); at this scale the measured deviation is 0.27%
        p = ShiftedConvParams(1, 1, 101, 2500.0, 2500.0, PSI5)
        brute = brute_shifted_conv(p, threads=4)
        value, tail = main_term(p)
        assert abs(brute - value) / brute < 0.02
        assert 0.0 < tail < 0.01 * brute

    def test_custom_bumps(self):
        narrow = SmoothBump(1.0, 1.5)
        p = ShiftedConvParams(1, 1, 31, 200.0, 200.0, PSI5,
                              omega1=narrow, omega2=narrow)
        got = brute_shifted_conv(p)
        assert abs(got - dense_oracle(p)) < 1e-12 * max(1.0, abs(got))
