"""Twisted summation formula for the divisor-convolved character weights.

For a smooth compactly supported g, the sum of (1 * psi)(n) e(an/c) g(n)
is evaluated two ways: directly over the support, and through its dual
expansion -- a constant term proportional to L(1, psi) plus two Bessel
sums (Y0 oscillatory, K0 exponentially decaying) over the convolution
coefficients of the factor characters psi1 mod (c, D) and psi2 mod D/(c, D).
All three coprimality regimes of (c, D) go through the same formula, with
trivial factor characters filling in the degenerate slots.

Oscillatory integrals use Gauss-Legendre panels sized to the cycle count,
targeting 1e-11 per integral; every truncated sum reports a tail estimate
and an insufficiency flag instead of failing silently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import k0 as bessel_k0
from scipy.special import y0 as bessel_y0

from .arith import RealCharacter, one_star_psi_table
from .characters import gauss_sum_real
from .lvalues import oracle_L
from .reduction import ordered_map
from .special import SmoothBump

__all__ = [
    "TrivialCharacter",
    "VoronoiCase",
    "VoronoiDual",
    "factor_character",
    "gauss_sum_any",
    "dual_coefficients",
    "voronoi_lhs",
    "voronoi_rhs",
]


@dataclass(frozen=True)
class TrivialCharacter:
    """The character mod 1: identically one, Gauss sum one by convention."""

    @property
    def modulus(self) -> int:
        return 1

    def __call__(self, n: int) -> int:
        return 1

    def table(self) -> np.ndarray:
        return np.ones(1, dtype=np.int8)


FactorCharacter = RealCharacter | TrivialCharacter


def gauss_sum_any(chi: FactorCharacter) -> complex:
    if isinstance(chi, TrivialCharacter):
        return 1.0 + 0j
    return gauss_sum_real(chi)


def _character_for(modulus: int) -> FactorCharacter:
    if modulus == 1:
        return TrivialCharacter()
    if modulus % 4 == 3:
        # the real primitive character mod this factor would be odd, and the
        # dual expansion below only covers the even case
        raise ValueError(f"factor modulus {modulus} carries an odd character")
    return RealCharacter(modulus)


@dataclass(frozen=True)
class VoronoiCase:
    """Twist geometry: c, a with (a, c) = 1, and the factored character.

    shared = (c, D) and D_c = D/shared are coprime because D is squarefree;
    psi1 lives mod shared, psi2 mod D_c, and psi = psi1 psi2 pointwise.
    """

    c: int
    a: int
    psi: RealCharacter
    psi1: FactorCharacter
    psi2: FactorCharacter
    shared: int
    D_c: int

    def __post_init__(self):
        if self.c < 1:
            raise ValueError("c must be positive")
        if math.gcd(self.a, self.c) != 1:
            raise ValueError("a must be coprime to c")
        if self.shared != math.gcd(self.c, self.psi.D):
            raise ValueError("shared must be gcd(c, D)")
        if self.shared * self.D_c != self.psi.D:
            raise ValueError("factor moduli must multiply to D")
        if math.gcd(self.shared, self.D_c) != 1:
            raise ValueError("factor moduli must be coprime")
        if self.psi1.modulus != self.shared or self.psi2.modulus != self.D_c:
            raise ValueError("factor characters live on the wrong moduli")
        t = self.psi.table()
        t1, t2 = self.psi1.table(), self.psi2.table()
        for n in range(1, 1001):
            if math.gcd(n, self.psi.D) == 1:
                if t[n % self.psi.D] != t1[n % self.shared] * t2[n % self.D_c]:
                    raise ValueError(f"character factorization fails at n = {n}")


def factor_character(psi: RealCharacter, c: int, a: int = 1) -> VoronoiCase:
    """Split psi across (c, D) and D/(c, D) and package the twist data."""
    shared = math.gcd(c, psi.D)
    return VoronoiCase(c=c, a=a, psi=psi,
                       psi1=_character_for(shared),
                       psi2=_character_for(psi.D // shared),
                       shared=shared, D_c=psi.D // shared)


@lru_cache(maxsize=32)
def _conv_table(d1: int, d2: int, limit: int) -> np.ndarray:
    """(psi1 * psi2)(m) for m = 1..limit by divisor sieve, index 0 unused."""
    t1 = _character_for(d1).table().astype(np.float64)
    t2 = _character_for(d2).table().astype(np.float64)
    out = np.zeros(limit + 1)
    for d in range(1, limit + 1):
        v1 = t1[d % d1]
        if v1 != 0.0:
            cof = np.arange(1, limit // d + 1)
            out[d::d] += v1 * t2[cof % d2]
    return out


def dual_coefficients(case: VoronoiCase, limit: int) -> np.ndarray:
    return _conv_table(case.shared, case.D_c, limit)


# ------------------------------------------------------------------ LHS


def voronoi_lhs(case: VoronoiCase, g: SmoothBump) -> complex:
    """Exact twisted sum over the integers in the support of g."""
    if g.hi > 1e6:
        raise ValueError("support cap is 1e6")
    n_lo = int(math.floor(g.lo)) + 1
    n_hi = int(math.ceil(g.hi)) - 1
    if n_hi < n_lo:
        return 0j
    tab = one_star_psi_table(case.psi, n_hi).astype(np.float64)
    n = np.arange(n_lo, n_hi + 1)
    roots = np.exp(2j * np.pi * np.arange(case.c) / case.c)
    terms = tab[n] * g(n.astype(np.float64)) * roots[(case.a % case.c) * n % case.c]
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


# ------------------------------------------------------------------ integrals

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _panel_integral(g: SmoothBump, t0: float, t1: float, alpha: float,
                    bessel, panels: int) -> float:
    edges = np.linspace(t0, t1, panels + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])[:, None]
    halfs = 0.5 * (edges[1:] - edges[:-1])[:, None]
    t = mids + halfs * _GL_NODES[None, :]
    vals = 2.0 * t * g(t * t) * bessel(alpha * t)
    return float((vals * (halfs * _GL_WEIGHTS[None, :])).sum())


_PANEL_CAP = 4000


def _oscillatory_integral(g: SmoothBump, t0: float, t1: float, alpha: float) -> float:
    """int 2t g(t^2) Y0(alpha t) dt with panel count tied to the cycle count.

    The cap kicks in only once the integral itself has decayed below the
    stopping threshold, where degraded panel resolution no longer matters.
    """
    cycles = alpha * (t1 - t0) / (2.0 * math.pi)
    return _panel_integral(g, t0, t1, alpha, bessel_y0,
                           max(40, min(int(4.0 * cycles) + 1, _PANEL_CAP)))


def _k0_upper(z: float) -> float:
    return math.sqrt(math.pi / (2.0 * z)) * math.exp(-z)


def _decaying_integral(g: SmoothBump, t0: float, t1: float,
                       alpha: float) -> tuple[float, float]:
    """int 2t g(t^2) K0(alpha t) dt, truncated where the kernel is spent.

    Returns the integral and a bound on the discarded piece (g <= 1).
    """
    t_hi = min(t1, t0 + 60.0 / alpha)
    value = _panel_integral(g, t0, t_hi, alpha, bessel_k0, 40)
    rem = 0.0 if t_hi >= t1 else _k0_upper(alpha * t_hi) * (t1 * t1 - t_hi * t_hi)
    return value, rem


def _k0_sum_tail(beta: float, m_from: int, scale: float) -> float:
    """Bound on sum_{m > m_from} m k0_upper(beta sqrt(m)) times scale.

    Uses d(m) <= m, the monotone integral comparison, and the closed form
    of int s^3 e^{-beta s} ds; valid once beta sqrt(m_from) > 2.
    """
    u = math.sqrt(m_from)
    if beta * u <= 2.0:
        return math.inf
    poly = (u**3 / beta + 3 * u**2 / beta**2 + 6 * u / beta**3 + 6 / beta**4
            + u / beta + 1 / beta**2)
    root = math.sqrt(math.pi / (2.0 * beta * u))
    return scale * root * 2.0 * math.exp(-beta * u) * poly


# ------------------------------------------------------------------ RHS

_Y_WINDOW = 40          # floor on the run of negligible integrals before stopping
_Y_EPS = 5e-13


def _settle_run(t0: float, alpha0: float, m: int) -> int:
    """Run length needed before the Y0 sum may stop at m.

    The integral oscillates in alpha with period ~ 2 pi / t, and alpha moves
    by alpha0/(2 sqrt(m)) per step, so a fixed-length run can sit inside a
    single null of the envelope; require the run to span several periods.
    """
    return max(_Y_WINDOW, int(6.0 * math.pi / t0 * 2.0 * math.sqrt(m) / alpha0) + 1)


@dataclass(frozen=True)
class VoronoiDual:
    """Dual-side evaluation: constant term plus the two Bessel sums."""

    value: complex
    main: complex
    dual_y: complex
    dual_k: complex
    tail_bound: float
    m_used_y: int
    m_used_k: int
    insufficient: bool


def voronoi_rhs(case: VoronoiCase, g: SmoothBump, m_max: int = 100000,
                threads: int = 1) -> VoronoiDual:
    """Constant term plus Y0/K0 dual sums, with tail accounting.

    The Y0 sum stops after a run of negligible integrals; zero convolution
    coefficients are skipped outright and extend a run already in progress.
    The K0 sum runs to where its analytic tail bound clears 1e-10.  Hitting
    m_max first sets the insufficient flag instead of raising.
    """
    c, D = case.c, case.psi.D
    D_c = case.D_c
    t0, t1 = math.sqrt(g.lo), math.sqrt(g.hi)
    g_mass = quad(g, g.lo, g.hi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]

    if case.shared == D:
        rho = gauss_sum_real(case.psi) * case.psi(case.a) / c
    else:
        rho = complex(case.psi(c)) / c
    main = rho * oracle_L(1.0, case.psi).real * g_mass

    tau2 = gauss_sum_any(case.psi2)
    psi2_c = case.psi2(c)
    pref_y = -2.0 * math.pi * tau2 * case.psi1(-case.a) * psi2_c / (c * D_c)
    pref_k = 4.0 * tau2 * case.psi1(case.a) * psi2_c / (c * D_c)

    inv = 0 if c == 1 else pow(case.a * D_c % c, -1, c)
    roots = np.exp(2j * np.pi * np.arange(c) / c)
    conv = dual_coefficients(case, m_max)
    alpha0 = 4.0 * math.pi / (c * math.sqrt(D_c))

    def y_one(mm: int) -> float:
        if conv[mm] == 0.0:
            return 0.0
        return _oscillatory_integral(g, t0, t1, alpha0 * math.sqrt(mm))

    y_terms: list[complex] = []
    trailing = 0.0
    small_run = 0
    m_used_y = 0
    y_settled = False
    m = 1
    while m <= m_max and not y_settled:
        block = list(range(m, min(m + 64, m_max + 1)))
        for mm, integral in zip(block, ordered_map(y_one, block, threads=threads)):
            m_used_y = mm
            if conv[mm] == 0.0:
                # contributes nothing; extends a run already under way but
                # cannot start one, so a zero-density stretch never stops us
                small_run = small_run + 1 if small_run > 0 else 0
            else:
                y_terms.append(conv[mm] * roots[-inv * mm % c] * integral)
                trailing = max(trailing, abs(integral)) if small_run > 0 else abs(integral)
                small_run = small_run + 1 if abs(integral) < _Y_EPS else 0
            if small_run >= _settle_run(t0, alpha0, mm):
                y_settled = True
                break
        m += 64
    # superpolynomial decay with divisor-sized coefficients: the unreached
    # terms are scored at the stopping level times an m log^2 m envelope
    y_tail = m_used_y * math.log(m_used_y + 2.0) ** 2 * max(trailing, _Y_EPS)
    dual_y = pref_y * complex(math.fsum(t.real for t in y_terms),
                              math.fsum(t.imag for t in y_terms))

    beta = alpha0 * t0
    m_stop_k = min(m_max, int((50.0 / beta) ** 2) + 1)

    def k_block(start: int) -> np.ndarray:
        stop = min(start + 64, m_stop_k + 1)
        out = np.zeros((stop - start, 2))
        for i, mm in enumerate(range(start, stop)):
            if conv[mm] != 0.0:
                out[i] = _decaying_integral(g, t0, t1, alpha0 * math.sqrt(mm))
        return out

    k_rows = ordered_map(k_block, list(range(1, m_stop_k + 1, 64)), threads=threads)
    k_vals = np.concatenate(k_rows) if k_rows else np.zeros((0, 2))
    k_terms = [conv[mm] * roots[inv * mm % c] * k_vals[mm - 1, 0]
               for mm in range(1, m_stop_k + 1)]
    dual_k = pref_k * complex(math.fsum(t.real for t in k_terms),
                              math.fsum(t.imag for t in k_terms))
    k_cut = float(np.dot(np.arange(1, m_stop_k + 1), k_vals[:, 1]))
    k_tail = _k0_sum_tail(beta, m_stop_k, g_mass) + k_cut

    insufficient = (not y_settled) or (m_stop_k == m_max and k_tail > 1e-10)
    tail = (abs(pref_y) * y_tail + abs(pref_k) * k_tail
            + 1e-11 * (m_used_y * abs(pref_y) + m_stop_k * abs(pref_k)))
    return VoronoiDual(value=main + dual_y + dual_k, main=main, dual_y=dual_y,
                       dual_k=dual_k, tail_bound=tail, m_used_y=m_used_y,
                       m_used_k=m_stop_k, insufficient=insufficient)
