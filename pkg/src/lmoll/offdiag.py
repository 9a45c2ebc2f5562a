"""Shifted convolution sums of the divisor-twisted coefficients.

Two independent evaluations of the same object: a brute-force lattice sum
over pairs (m, n) with a*m = +-b*n mod q and a*m != b*n, and the arithmetic
main term built from a singular series of Ramanujan sums times smooth
overlap integrals.  The singular series has a companion Dirichlet series in
the shift variable whose value at 1 is 1/zeta(2) exactly; the Mellin-side
kernel H(u, v) that controls the smooth integrals is checked against its
Gauss-product form.

Truncated quantities always travel with a computed tail bound.  The shift
series is only conditionally convergent, so partial sums are taken in
increasing modulus order and never reordered.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import rgamma

from .arith import RealCharacter, divisors, factor, is_prime, one_star_psi_table, spf_table
from .lvalues import oracle_L
from .reduction import ordered_map
from .special import SmoothBump, gamma_complex

__all__ = [
    "ShiftedConvParams",
    "SingularSeries",
    "brute_shifted_conv",
    "shifted_conv_r_decomposed",
    "singular_series",
    "singular_series_term",
    "singular_series_factored",
    "singular_series_r_sum",
    "dirichlet_series_G",
    "main_term",
    "H_kernel",
    "H_kernel_plus",
    "H_kernel_minus",
    "H_kernel_product_form",
    "power_overlap_integral",
    "power_overlap_closed",
]

_ZETA2 = math.pi * math.pi / 6.0
_SIGNS = ("+", "-", "both")


def _default_bump() -> SmoothBump:
    return SmoothBump(1.0, 2.0)


@dataclass(frozen=True)
class ShiftedConvParams:
    """Inputs for the congruence-restricted double sum.

    The weights omega1, omega2 are smooth bumps evaluated at m/M and n/N;
    with the default template the lattice support is (M, 2M) x (N, 2N).
    """

    a: int
    b: int
    q: int
    M: float
    N: float
    psi: RealCharacter
    sign: str = "both"
    omega1: SmoothBump = field(default_factory=_default_bump)
    omega2: SmoothBump = field(default_factory=_default_bump)

    def __post_init__(self):
        if self.a < 1 or self.b < 1 or math.gcd(self.a, self.b) != 1:
            raise ValueError("a, b must be coprime positive integers")
        if self.a % self.psi.D == 0 or self.b % self.psi.D == 0:
            raise ValueError("a, b must avoid the restriction modulus")
        if not is_prime(self.q):
            raise ValueError(f"q = {self.q} must be prime")
        # residue bookkeeping below needs a, b invertible mod q
        if (self.a * self.b) % self.q == 0:
            raise ValueError("q must not divide ab")
        if not (0 < self.M <= 1e6 and 0 < self.N <= 1e6):
            raise ValueError("scales must lie in (0, 1e6]")
        if self.sign not in _SIGNS:
            raise ValueError(f"sign must be one of {_SIGNS}")

    def branches(self) -> tuple[int, ...]:
        # +1 encodes a*m - b*n = qr, -1 encodes a*m + b*n = qr
        if self.sign == "+":
            return (1,)
        if self.sign == "-":
            return (-1,)
        return (1, -1)


def _lattice_range(bump: SmoothBump, scale: float) -> tuple[int, int]:
    lo = int(math.floor(bump.lo * scale)) + 1
    hi = int(math.ceil(bump.hi * scale)) - 1
    return lo, hi


def _weight_arrays(p: ShiftedConvParams):
    m_lo, m_hi = _lattice_range(p.omega1, p.M)
    n_lo, n_hi = _lattice_range(p.omega2, p.N)
    if m_hi < m_lo or n_hi < n_lo:
        return m_lo, m_hi, n_lo, n_hi, None, None
    tab = one_star_psi_table(p.psi, max(m_hi, n_hi)).astype(np.float64)
    m_all = np.arange(m_lo, m_hi + 1)
    n_all = np.arange(n_lo, n_hi + 1)
    wm = p.omega1(m_all / p.M) * tab[m_all]
    wn = p.omega2(n_all / p.N) * tab[n_all]
    return m_lo, m_hi, n_lo, n_hi, wm, wn


_BLOCK = 4096


def brute_shifted_conv(params: ShiftedConvParams, threads: int = 1) -> float:
    """Exact lattice sum over the support of the two bumps.

    Terms are grouped by m; each group is summed exactly (math.fsum), as is
    the final reduction over groups, so the result is independent of block
    layout and thread count.  The sign "both" counts a pair once per
    congruence branch it satisfies, so it equals the "+" and "-" values
    added together.
    """
    p = params
    m_lo, m_hi, n_lo, n_hi, wm, wn = _weight_arrays(p)
    if wm is None:
        return 0.0
    q = p.q
    binv = pow(p.b, -1, q)
    branches = p.branches()

    def block(start: int) -> np.ndarray:
        stop = min(start + _BLOCK, m_hi + 1)
        out = np.zeros(stop - start)
        for m in range(start, stop):
            w1 = wm[m - m_lo]
            if w1 == 0.0:
                continue
            am = p.a * m
            pieces = []
            for sgn in branches:
                t = (sgn * am * binv) % q
                first = n_lo + (t - n_lo) % q
                ns = np.arange(first, n_hi + 1, q)
                ns = ns[p.b * ns != am]  # the diagonal is excluded in both branches
                if ns.size:
                    pieces.append(w1 * wn[ns - n_lo])
            if pieces:
                out[m - start] = math.fsum(np.concatenate(pieces))
        return out

    starts = list(range(m_lo, m_hi + 1, _BLOCK))
    partials = ordered_map(block, starts, threads=threads)
    return math.fsum(np.concatenate(partials)) if partials else 0.0


def shifted_conv_r_decomposed(params: ShiftedConvParams) -> float:
    """The same sum rebuilt from its decomposition a*m -+ b*n = qr, r != 0.

    Intended as an independent route at test scale: every admissible pair
    (m, n) belongs to exactly one r per branch, so the per-m term multisets
    match the direct evaluation and the two routes agree bit for bit.
    """
    p = params
    m_lo, m_hi, n_lo, n_hi, wm, wn = _weight_arrays(p)
    if wm is None:
        return 0.0
    q = p.q
    m_all = np.arange(m_lo, m_hi + 1)
    per_m: dict[int, list[float]] = {}
    for sgn in p.branches():
        # qr = a*m - sgn * b*n over the support box
        if sgn == 1:
            qr_lo = p.a * m_lo - p.b * n_hi
            qr_hi = p.a * m_hi - p.b * n_lo
        else:
            qr_lo = p.a * m_lo + p.b * n_lo
            qr_hi = p.a * m_hi + p.b * n_hi
        for r in range(-(-qr_lo // q), qr_hi // q + 1):
            if r == 0:
                continue
            t = p.a * m_all - q * r if sgn == 1 else q * r - p.a * m_all
            ok = (t % p.b == 0)
            n = np.where(ok, t // p.b, -1)
            ok &= (n >= n_lo) & (n <= n_hi) & (p.b * n != p.a * m_all)
            for i in np.nonzero(ok)[0]:
                m = int(m_all[i])
                per_m.setdefault(m, []).append(float(wm[i] * wn[n[i] - n_lo]))
    groups = [math.fsum(per_m[m]) for m in sorted(per_m)]
    return math.fsum(groups)


# ------------------------------------------------------------------ series


@lru_cache(maxsize=8)
def _mobius_table(limit: int) -> np.ndarray:
    spf = spf_table(limit)
    mu = np.ones(limit + 1, dtype=np.int64)
    for n in range(2, limit + 1):
        p = int(spf[n])
        m = n // p
        mu[n] = 0 if m % p == 0 else -mu[m]
    return mu


def _ramanujan_column(r: int, limit: int) -> np.ndarray:
    """c_ell(r) for ell = 1..limit via sum_{d | (r,ell)} mu(ell/d) d."""
    mu = _mobius_table(limit)
    out = np.zeros(limit + 1, dtype=np.int64)
    for d in divisors(abs(r)):
        if d <= limit:
            out[d::d] += d * mu[1 : limit // d + 1]
    return out[1:]


def _series_check(a: int, b: int, r: int, psi: RealCharacter) -> None:
    if a < 1 or b < 1 or math.gcd(a, b) != 1:
        raise ValueError("a, b must be coprime positive integers")
    if r == 0:
        raise ValueError("shift r = 0 is excluded")
    del psi


def _series_terms(a: int, b: int, r: int, psi: RealCharacter, limit: int) -> np.ndarray:
    """Series terms for ell = 1..limit, in increasing-ell order.

    Term: (psi(ell_a ell_b) + [D | (ell_a, ell_b)] D psi(a'b')) c_ell(r)
    divided by ell_a ell_b, with ell_a = ell/(a,ell) and a' = a/(a,ell).
    """
    D = psi.D
    ell = np.arange(1, limit + 1, dtype=np.int64)
    ga = np.gcd(ell, a)
    gb = np.gcd(ell, b)
    ell_a = ell // ga
    ell_b = ell // gb
    tab = psi.table()
    chi_ell = tab[ell_a % D] * tab[ell_b % D]
    chi_red = tab[(a // ga) % D] * tab[(b // gb) % D]
    deep = np.gcd(ell_a, ell_b) % D == 0
    coeff = chi_ell + np.where(deep, D * chi_red, 0)
    return coeff * _ramanujan_column(r, limit) / (ell_a * ell_b).astype(np.float64)


def _series_tail(a: int, b: int, r: int, D: int, limit: int) -> float:
    # |c_ell(r)| <= (r, ell) and ell_a ell_b >= ell^2/(ab); sum the gcd by
    # divisor class: sum_{ell>L} (r,ell)/ell^2 <= sum_{d|r} (1/d)/floor(L/d)
    total = 0.0
    for d in divisors(abs(r)):
        total += (1.0 / d) * (_ZETA2 if d > limit else 1.0 / (limit // d))
    return (1 + D) * a * b * total


@dataclass(frozen=True)
class SingularSeries:
    """Truncated shift-series value with its tail bound."""

    a: int
    b: int
    r: int
    psi: RealCharacter
    L_max: int
    value: float
    tail_bound: float

    def __post_init__(self):
        if self.L_max < 1000:
            raise ValueError("L_max below 1000 gives useless tails")
        if self.tail_bound < 0:
            raise ValueError("tail bound must be nonnegative")


def singular_series(a: int, b: int, r: int, psi: RealCharacter,
                    L_max: int = 10000) -> SingularSeries:
    _series_check(a, b, r, psi)
    if L_max < 1000:
        raise ValueError("L_max below 1000 gives useless tails")
    value = math.fsum(_series_terms(a, b, r, psi, L_max))
    return SingularSeries(a, b, r, psi, L_max, value,
                          _series_tail(a, b, r, psi.D, L_max))


def singular_series_term(a: int, b: int, r: int, psi: RealCharacter, ell: int) -> float:
    """Single ell-term of the shift series, for hand cross-checks."""
    _series_check(a, b, r, psi)
    if ell < 1:
        raise ValueError("ell must be positive")
    return float(_series_terms(a, b, r, psi, ell)[-1])


def _local_term_sum(p: int, alpha: int, beta: int, vr: int, psi_p: int,
                    reduced: bool) -> float:
    """Local factor at p of one series piece, exact finite sum over e.

    reduced=False weights by psi(p) to the power max(e-alpha,0)+max(e-beta,0)
    (the ell part); reduced=True by the complementary power max(alpha-e,0)+
    max(beta-e,0) (the a'b' part) and, when p | D (psi_p == 0), restricts to
    e >= max(alpha, beta) + 1.  The e-range is finite because c_{p^e}(r)
    vanishes for e > vr + 1.
    """
    total = 0.0
    for e in range(0, vr + 2):
        if e <= vr:
            c = 1 if e == 0 else p ** e - p ** (e - 1)
        else:
            c = -(p ** vr)
        m = max(e - alpha, 0) + max(e - beta, 0)
        k = max(alpha - e, 0) + max(beta - e, 0) if reduced else m
        if reduced and psi_p == 0 and not (min(e - alpha, e - beta) >= 1):
            continue
        w = 1.0 if k == 0 else float(psi_p) ** k
        total += w * c * p ** (-float(m))
    return total


def singular_series_factored(a: int, b: int, r: int, psi: RealCharacter) -> float:
    """Euler-factored evaluation, valid for squarefree r prime to abD.

    The conditionally convergent ell-sum factors (per piece) over primes;
    outside p | rabD every local factor is 1 - 1/p^2, which regroups into
    1/zeta(2).  Used as the independent route against the direct sum.
    """
    _series_check(a, b, r, psi)
    D = psi.D
    rr = abs(r)
    fr = factor(rr)
    if not fr.is_squarefree() or math.gcd(rr, a * b * D) != 1:
        raise ValueError("factored route needs squarefree r prime to abD")
    piece1 = 1.0 / _ZETA2
    piece2 = float(D) / _ZETA2
    for p in sorted({f[0] for f in factor(rr * a * b * D).factors}):
        alpha = _valuation(a, p)
        beta = _valuation(b, p)
        vr = 1 if rr % p == 0 else 0
        psi_p = psi(p)
        generic = 1.0 - p ** -2.0
        piece1 *= _local_term_sum(p, alpha, beta, vr, psi_p, reduced=False) / generic
        piece2 *= _local_term_sum(p, alpha, beta, vr, psi_p, reduced=True) / generic
    return piece1 + piece2


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _series_weights(a: int, b: int, psi: RealCharacter, limit: int) -> np.ndarray:
    """Shift-free part of the series terms: coeff(ell)/(ell_a ell_b)."""
    D = psi.D
    ell = np.arange(1, limit + 1, dtype=np.int64)
    ga = np.gcd(ell, a)
    gb = np.gcd(ell, b)
    ell_a = ell // ga
    ell_b = ell // gb
    tab = psi.table()
    chi_ell = tab[ell_a % D] * tab[ell_b % D]
    chi_red = tab[(a // ga) % D] * tab[(b // gb) % D]
    deep = np.gcd(ell_a, ell_b) % D == 0
    coeff = chi_ell + np.where(deep, D * chi_red, 0)
    return coeff / (ell_a * ell_b).astype(np.float64)


def singular_series_r_sum(a: int, b: int, R: int, psi: RealCharacter,
                          L_max: int = 10000) -> tuple[float, float]:
    """sum_{r=1..R} of the truncated shift series over r^2, with tail bound.

    Swaps the finite double sum to ell-major order so the Ramanujan sums
    collapse to divisor sums against partial zeta(2) sums; identical to
    summing singular_series(r).value / r^2 up to roundoff.  The tail bound
    covers only the ell-truncation (the r-range is summed exactly).
    """
    _series_check(a, b, 1, psi)
    if R < 1:
        raise ValueError("R must be positive")
    if L_max < 1000:
        raise ValueError("L_max below 1000 gives useless tails")
    w = _series_weights(a, b, psi, L_max)
    mu = _mobius_table(L_max)
    h2 = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1, R + 1, dtype=np.float64) ** 2)))
    inner = np.zeros(L_max + 1)
    for d in range(1, L_max + 1):
        inner[d::d] += (h2[min(R // d, R)] / d) * mu[1 : L_max // d + 1]
    value = math.fsum(w * inner[1:])
    # per-r tails summed against 1/r^2, regrouped by the divisor d:
    # sum_{r<=R} tail_r/r^2 = (1+D)ab sum_d cap(d) d^{-3} H2(R//d)
    d_arr = np.arange(1, R + 1)
    cap = np.where(d_arr <= L_max, 1.0 / np.maximum(L_max // d_arr, 1), _ZETA2)
    tail = float((1 + psi.D) * a * b * np.dot(cap / d_arr.astype(np.float64) ** 3, h2[R // d_arr]))
    return value, tail


# ------------------------------------------------------------------ G series


def dirichlet_series_G(a: int, b: int, s: complex, psi: RealCharacter) -> complex:
    """Multiplicative part of sum_r (shift series)(r)/r^s.

    Closed form: every prime outside abD contributes
    (1 - p^{-2})/(1 - p^{-1-s}), which regroups against zeta into the exact
    prefactor below, so no truncation is involved and the value at s = 1 is
    1/zeta(2) identically.
    """
    if a < 1 or b < 1 or math.gcd(a, b) != 1:
        raise ValueError("a, b must be coprime positive integers")
    s = complex(s)
    if s.real < 0.7:
        raise ValueError("evaluation restricted to Re(s) >= 0.7")
    D = psi.D
    prefactor = 1.0 / _ZETA2
    piece1 = 1.0 + 0j
    piece2 = complex(D)
    for p in sorted({f[0] for f in factor(a * b * D).factors}):
        alpha = _valuation(a, p)
        beta = _valuation(b, p)
        prefactor *= (1 - _cpow(p, -1 - s)) / (1 - p ** -2.0)
        l1, l2 = _g_local_pair(p, alpha, beta, s, psi(p))
        piece1 *= l1
        piece2 *= l2
    return prefactor * (piece1 + piece2)


def _cpow(p: int, z: complex) -> complex:
    return cmath.exp(z * math.log(p))


def _g_local_pair(p: int, alpha: int, beta: int, s: complex,
                  psi_p: int) -> tuple[complex, complex]:
    """Local factors at p of the two series pieces, geometric tail in closed
    form beyond e = max(alpha, beta)."""
    E = max(alpha, beta)
    x = _cpow(p, -1 - s)
    shrink = 1 - _cpow(p, s - 1)
    tail_geom = p ** (alpha + beta) * shrink * x ** (E + 1) / (1 - x)

    def g_e(e: int) -> complex:
        if e == 0:
            return 1.0 + 0j
        return _cpow(p, e * (1 - s)) - _cpow(p, (e - 1) * (1 - s))

    l1 = 0j
    l2 = 0j
    for e in range(0, E + 1):
        m = max(e - alpha, 0) + max(e - beta, 0)
        k = max(alpha - e, 0) + max(beta - e, 0)
        base = p ** (-float(m)) * g_e(e)
        l1 += (1.0 if m == 0 else float(psi_p) ** m) * base
        if psi_p != 0:  # p | D forces the second piece into the tail range
            l2 += (1.0 if k == 0 else float(psi_p) ** k) * base
    # piece-1 tail weight is psi(p)^{2e-alpha-beta}, which dies when p | D
    l1 += (float(psi_p) ** (alpha + beta) if psi_p != 0 else 0.0) * tail_geom
    l2 += tail_geom
    return l1, l2


# ------------------------------------------------------------------ main term


def main_term(params: ShiftedConvParams, L_max: int = 100000) -> tuple[float, float]:
    """Arithmetic prediction for the congruence sum, with tail bound.

    L(1, psi)^2/(ab) times the shift series against the smooth overlap
    integrals int omega1(x/aM) omega2(-+(qr-x)/bN) dx, the r-range forced
    by the bump supports.  The tail bound aggregates the series tails
    weighted by |integral|; the r-truncation itself is exact.
    """
    p = params
    a, b, q = p.a, p.b, p.q
    aM, bN = a * p.M, b * p.N
    L1 = oracle_L(1.0, p.psi).real
    pref = L1 * L1 / (a * b)
    r_cap = int(4 * (aM + bN) / q) + 1
    terms: list[float] = []
    tail = 0.0
    for sgn in p.branches():
        lo1, hi1 = p.omega1.lo * aM, p.omega1.hi * aM
        for r in range(-r_cap, r_cap + 1):
            if r == 0:
                continue
            if sgn == 1:
                lo2, hi2 = q * r + p.omega2.lo * bN, q * r + p.omega2.hi * bN
            else:
                lo2, hi2 = q * r - p.omega2.hi * bN, q * r - p.omega2.lo * bN
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if hi <= lo:
                continue

            def integrand(x: float, _r=r, _sgn=sgn) -> float:
                first = p.omega1(x / aM)
                second = p.omega2((x - q * _r) / bN if _sgn == 1 else (q * _r - x) / bN)
                return float(first) * float(second)

            integral = quad(integrand, lo, hi, epsabs=1e-10, epsrel=1e-10, limit=200)[0]
            # density argument is r, not the lattice offset q*r: the two agree
            # only as q grows, so at fixed q this choice floors the relative
            # deviation from the brute sum near 1/q
            ss = singular_series(a, b, r, p.psi, L_max)
            terms.append(pref * ss.value * integral)
            tail += pref * ss.tail_bound * abs(integral)
    return math.fsum(terms), tail


# ------------------------------------------------------------------ H kernel


def _check_kernel_point(u: complex, v: complex) -> tuple[complex, complex]:
    u, v = complex(u), complex(v)
    w = u + v
    if w.imag == 0.0 and w.real <= 0.0 and w.real == round(w.real):
        raise ValueError(f"pole: u + v = {w.real:g} is a nonpositive integer")
    if u == 0.5 or v == 0.5:
        raise ValueError("pole: u, v = 1/2 excluded")
    return u, v


def H_kernel_plus(u: complex, v: complex) -> complex:
    u, v = _check_kernel_point(u, v)
    return gamma_complex(u + v) * (
        gamma_complex(0.5 - v) * complex(rgamma(0.5 + u))
        + gamma_complex(0.5 - u) * complex(rgamma(0.5 + v))
    )


def H_kernel_minus(u: complex, v: complex) -> complex:
    # reciprocal gamma keeps the zero at u + v = 1 exact
    u, v = _check_kernel_point(u, v)
    return gamma_complex(0.5 - u) * gamma_complex(0.5 - v) * complex(rgamma(1 - u - v))


def H_kernel(u: complex, v: complex) -> complex:
    return H_kernel_plus(u, v) + H_kernel_minus(u, v)


def H_kernel_product_form(u: complex, v: complex) -> complex:
    """Gauss-product route: sqrt(pi) times a ratio of half-argument gammas."""
    u, v = _check_kernel_point(u, v)
    num = gamma_complex((u + v) / 2) * gamma_complex((0.5 - u) / 2) * gamma_complex((0.5 - v) / 2)
    den = complex(rgamma((1 - u - v) / 2)) * complex(rgamma((0.5 + u) / 2)) * complex(rgamma((0.5 + v) / 2))
    return math.sqrt(math.pi) * num * den


# ------------------------------------------------------------------ integrals


def power_overlap_integral(T: float, u: float, v: float) -> float:
    """Quadrature of int_{x>T} x^{-(1/2+u)} (x-T)^{-(1/2+v)} dx.

    The endpoint singularity is removed by x = T + z^2 on the near piece;
    the far piece decays like x^{-1-u-v}.  Needs 0 < v < 1/2 and u + v > 0.
    """
    if not (T > 0 and 0 < v < 0.5 and u + v > 0):
        raise ValueError("need T > 0, 0 < v < 1/2, u + v > 0")

    def near(z: float) -> float:
        x = T + z * z
        return 2.0 * x ** (-(0.5 + u)) * z ** (-2.0 * v)

    def far(x: float) -> float:
        return x ** (-(0.5 + u)) * (x - T) ** (-(0.5 + v))

    first = quad(near, 0.0, math.sqrt(T), epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    second = quad(far, 2.0 * T, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    return first + second


def power_overlap_closed(T: float, u: float, v: float) -> float:
    """Gamma-ratio closed form of the same integral."""
    if not (T > 0 and 0 < v < 0.5 and u + v > 0):
        raise ValueError("need T > 0, 0 < v < 1/2, u + v > 0")
    value = gamma_complex(u + v) * gamma_complex(0.5 - v) * complex(rgamma(0.5 + u))
    return T ** (-(u + v)) * value.real
