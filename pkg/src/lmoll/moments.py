"""Mollified moments and the diagonal Euler-product algebra.

The mollifier coefficients are the Dirichlet inverse of the divisor-twisted
coefficients (1*psi), restricted to cutoff X and to indices prime to the
sign of restriction D | a.  First and second mollified moments over the
even primitive family are computed character by character; an independent
route expands the first moment through family orthogonality and Gauss-sum
squares, turning it into a double sum weighted by Kloosterman values.

The diagonal main term factors into three Euler products (over primes
dividing D, inert primes, and split primes); the split-prime factor carries
a finite correction sum built from a small family of multiplicative
functions evaluated here in closed form.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import (
    RealCharacter,
    divisors,
    eval_rho,
    factor,
    is_prime,
    one_star_psi_table,
    primes_up_to,
)
from .characters import (
    DirichletCharacter,
    build_group,
    enumerate_even_primitive,
    epsilon_real,
    phi_plus,
)
from .lvalues import AFEConfig, _afe_tables, afe_central, default_config, hurwitz_zeta_vec
from .reduction import kahan_sum, kahan_sum_complex, ordered_map

__all__ = [
    "MollifierTable",
    "MomentReport",
    "EulerProductFamily",
    "build_mollifier",
    "eval_mollifier",
    "mollified_moments",
    "first_moment_by_orthogonality",
    "census",
    "euler_product",
    "restricted_divisor_product_check",
    "g_family_eval",
    "tau4_table",
    "tau4_prime_power",
    "lacunary_divisor_sum",
]


# ---------------------------------------------------------------------------
# mollifier construction


@dataclass(frozen=True)
class MollifierTable:
    """Nonzero mollifier coefficients a -> rho(a) for a <= X, D not dividing a."""

    X: int
    coeffs: dict

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        keys = np.array(sorted(self.coeffs), dtype=np.int64)
        vals = np.array([self.coeffs[int(a)] for a in keys], dtype=np.float64)
        return keys, vals


def build_mollifier(psi: RealCharacter, X: int) -> MollifierTable:
    if X < 1:
        raise ValueError("cutoff must be positive")
    D = psi.D
    coeffs = {}
    for a in range(1, X + 1):
        if a % D == 0:
            continue
        r = eval_rho(psi, a)
        if r != 0:
            coeffs[a] = r
    return MollifierTable(X=X, coeffs=coeffs)


def eval_mollifier(table: MollifierTable, chi: DirichletCharacter) -> complex:
    """sum of rho(a) chi(a) / sqrt(a) over the stored coefficients."""
    keys, vals = table.arrays()
    chivals = chi.values_at(keys)
    return complex(np.dot(vals / np.sqrt(keys.astype(np.float64)), chivals))


# ---------------------------------------------------------------------------
# moment reports


@dataclass(frozen=True)
class MomentReport:
    q: int
    D: int
    X: int
    s1: complex
    s2: float
    ratio: float
    census_nonzero: int
    threshold: float

    def __post_init__(self):
        if not (0.0 <= self.ratio <= 1.0 + 1e-9):
            raise ValueError("ratio outside [0, 1]")
        if self.census_nonzero > phi_plus(self.q):
            raise ValueError("census exceeds family size")

    def to_json(self) -> str:
        payload = {
            "q": self.q,
            "D": self.D,
            "X": self.X,
            "s1_re": self.s1.real,
            "s1_im": self.s1.imag,
            "s2": self.s2,
            "ratio": self.ratio,
            "census_nonzero": self.census_nonzero,
            "phi_plus": phi_plus(self.q),
        }
        return json.dumps(payload, sort_keys=True)


def _moment_guards(q: int, psi: RealCharacter, X: int) -> None:
    if not is_prime(q):
        raise ValueError("modulus must be prime")
    if math.gcd(q, psi.D) != 1:
        raise ValueError("moduli must be coprime")
    if not 1 <= X <= q:
        raise ValueError("mollifier cutoff limited to X <= q")


def mollified_moments(q: int, psi: RealCharacter, X: int,
                      cfg: AFEConfig | None = None,
                      threshold: float = 1e-8,
                      threads: int = 1) -> MomentReport:
    """First and second mollified moments over the even primitive family.

    ratio is |S1|^2 / (phi_plus(q) S2), the Cauchy-Schwarz proportion; it is
    clamped into [0, 1 + 1e-9] to absorb roundoff at the boundary.
    census_nonzero counts characters whose product central value clears the
    threshold in absolute value.
    """
    _moment_guards(q, psi, X)
    if cfg is None:
        cfg = default_config(q, psi.D)
    table = build_mollifier(psi, X)
    family = enumerate_even_primitive(build_group(q))

    def one(chi: DirichletCharacter) -> tuple[complex, float, int]:
        pair = afe_central(chi, psi, cfg)
        t = pair.L_central * eval_mollifier(table, chi)
        return t, abs(t) ** 2, int(abs(pair.L_central) > threshold)

    rows = ordered_map(one, family, threads=threads)
    s1 = kahan_sum_complex([r[0] for r in rows])
    s2 = kahan_sum([r[1] for r in rows])
    nonzero = sum(r[2] for r in rows)
    denom = phi_plus(q) * s2
    ratio = abs(s1) ** 2 / denom if denom > 0 else 0.0
    ratio = min(max(ratio, 0.0), 1.0 + 1e-9)
    return MomentReport(q=q, D=psi.D, X=X, s1=s1, s2=s2, ratio=ratio,
                       census_nonzero=nonzero, threshold=threshold)


# ---------------------------------------------------------------------------
# orthogonality route for the first moment

# S(1, w; q) for w = 0..q-1; one shared inverse table, vectorized over x.
@lru_cache(maxsize=16)
def _kloosterman_row(q: int) -> np.ndarray:
    inv = np.array([0] + [pow(x, -1, q) for x in range(1, q)], dtype=np.int64)
    xs = np.arange(1, q, dtype=np.int64)
    row = np.empty(q, dtype=np.float64)
    for w in range(q):
        phases = (xs + w * inv[1:]) % q
        row[w] = np.exp(2j * np.pi * phases / q).sum().real
    return row


def first_moment_by_orthogonality(q: int, psi: RealCharacter, X: int,
                                  cfg: AFEConfig | None = None) -> complex:
    """The first mollified moment without looping over characters.

    Summing chi(an) over the even primitive family leaves congruence
    conditions an = +-1 mod q, and summing eps(chi)eps(chi psi) chi(a/n)
    reduces, through the square of the Gauss sum, to Kloosterman values
    S(1, +-n/(Da); q).  Truncations match afe_central exactly, so the two
    routes differ only by floating-point reordering.
    """
    _moment_guards(q, psi, X)
    D = psi.D
    if cfg is None:
        cfg = default_config(q, D)
    cols = _afe_tables(q, D, cfg.n_max, cfg.Q)
    v1col, v2col = cols["V1"], cols["V2"]
    n_mod = np.arange(1, cfg.n_max + 1, dtype=np.int64) % q
    unit = n_mod != 0
    kl = _kloosterman_row(q)
    phi_q = q - 1
    c_eps = complex(psi(q) * epsilon_real(psi)) / (2.0 * q)
    table = build_mollifier(psi, X)
    parts = []
    for a in sorted(table.coeffs):
        if a % q == 0:
            continue
        an_mod = (a * n_mod) % q
        hit = ((an_mod == 1) | (an_mod == q - 1)).astype(np.float64)
        t1 = v1col * (0.5 * phi_q * hit - 1.0)
        ainv = pow(D * a, -1, q)
        w = (n_mod * ainv) % q
        t2 = v2col * (c_eps * (phi_q * (kl[w] + kl[(q - w) % q]) - 2.0))
        contrib = complex(np.sum((t1 + t2)[unit]))
        parts.append(table.coeffs[a] / math.sqrt(a) * contrib)
    return kahan_sum_complex(parts)


# ---------------------------------------------------------------------------
# nonvanishing census


def census(q: int, psi: RealCharacter, threshold: float) -> tuple[int, int]:
    """Count even primitive chi mod q with the product central value, and
    with the plain central value, exceeding the threshold in absolute value.

    Values come from the Hurwitz-zeta oracle; the modulus-qD sum is grouped
    by residue mod q once so each character costs a length-q dot product.
    """
    if not is_prime(q) or q > 10**4:
        raise ValueError("census limited to prime q <= 10^4")
    D = psi.D
    if math.gcd(q, D) != 1:
        raise ValueError("moduli must be coprime")
    a = np.arange(1, q, dtype=np.float64)
    z_plain = hurwitz_zeta_vec(0.5, a / q)
    b = np.arange(1, q * D, dtype=np.int64)
    psivals = psi.values_array(b).astype(np.float64)
    zb = hurwitz_zeta_vec(0.5, b.astype(np.float64) / (q * D))
    grouped = np.zeros(q, dtype=np.float64)
    np.add.at(grouped, b % q, psivals * zb)
    twisted = grouped[1:]

    count_product = 0
    count_plain = 0
    for chi in enumerate_even_primitive(build_group(q)):
        chivals = chi.values()[1:]
        l_plain = q ** -0.5 * np.dot(chivals, z_plain)
        l_twist = (q * D) ** -0.5 * np.dot(chivals, twisted)
        if abs(l_plain) > threshold:
            count_plain += 1
        if abs(l_plain * l_twist) > threshold:
            count_product += 1
    return count_product, count_plain


# ---------------------------------------------------------------------------
# Euler products for the diagonal main term


@dataclass(frozen=True)
class EulerProductFamily:
    """One of the three diagonal factors with its shifts and truncation.

    which "A": finite product over p | D, truncation ignored.
    which "B": inert primes p <= truncation.
    which "C": split-prime product with correction sum over n <= truncation.
    """

    which: str
    u: complex
    v: complex
    truncation: int

    def __post_init__(self):
        if self.which not in ("A", "B", "C"):
            raise ValueError("family must be A, B, or C")
        # absolute convergence needs both shifts to the right of -1/4
        if min(complex(self.u).real, complex(self.v).real) <= -0.25 + 0.01:
            raise ValueError("shifts outside the convergence region")
        if self.truncation < 1:
            raise ValueError("truncation must be positive")


def _pow(p: int, z: complex) -> complex:
    return cmath.exp(z * math.log(p))


def euler_product(family: EulerProductFamily, psi: RealCharacter) -> complex:
    u, v = complex(family.u), complex(family.v)
    if family.which == "A":
        out = 1.0 + 0.0j
        for p, _ in factor(psi.D).factors:
            out *= (1 + 1 / p - _pow(p, -(1 + u)) - _pow(p, -(1 + v))) \
                / (1 - _pow(p, -(1 + u + v)))
        return out
    if family.which == "B":
        if family.truncation < 10**3:
            raise ValueError("inert-prime cutoff below 10^3")
        # tail of the log-product is below 2/cutoff throughout the region
        ps = np.array([p for p in primes_up_to(family.truncation) if psi(p) == -1],
                      dtype=np.float64)
        logs = np.log(ps)
        x2 = np.exp(-2 * (1 + u + v) * logs)
        xu = np.exp(-2 * (1 + u) * logs)
        xv = np.exp(-2 * (1 + v) * logs)
        factors = (1 + ps**-2.0 - xu - xv) / (1 - x2)
        return complex(np.prod(factors))
    # C: split-prime product times the truncated correction sum
    X = family.truncation
    p_cut = max(X, 10**4)
    ps = np.array([p for p in primes_up_to(p_cut) if psi(p) == 1], dtype=np.float64)
    logs = np.log(ps)
    factors = (1 - np.exp(-2 * (1 + u + v) * logs)) * (1 + ps**-2.0)
    prod = complex(np.prod(factors))
    terms = _split_smooth_terms(psi, X, u, v)
    return prod * kahan_sum_complex([t for _, t in terms])


def _split_smooth_terms(psi: RealCharacter, X: int, u: complex, v: complex):
    """(n, g3(n)/n) over n <= X supported on split primes, ascending in n."""
    ps = [p for p in primes_up_to(X) if psi(p) == 1]
    terms = [(1, 1.0 + 0.0j)]
    stack = [(0, 1, 1.0 + 0.0j)]
    while stack:
        i, n, val = stack.pop()
        for k in range(i, len(ps)):
            p = ps[k]
            m, j = n * p, 1
            while m <= X:
                g = val * g_family_eval("g3", p, j, u, v, psi)
                terms.append((m, g / m))
                stack.append((k + 1, m, g))
                m *= p
                j += 1
    terms.sort(key=lambda t: t[0])
    return terms


# ---------------------------------------------------------------------------
# the finite product identity over divisors of D


def _restricted_inverse_triple_sum(D: int, u: complex, v: complex) -> complex:
    """Triple sum over d, e, g | D with (e, g) = 1 of
    rho(de) rho(dg) / (d e^{1+u} g^{1+v}); rho kills every unsupported term."""
    psi = RealCharacter(D)
    total = 0.0 + 0.0j
    for d in divisors(D):
        for e in divisors(D):
            re = eval_rho(psi, d * e)
            if re == 0:
                continue
            for g in divisors(D):
                if math.gcd(e, g) != 1:
                    continue
                rg = eval_rho(psi, d * g)
                if rg == 0:
                    continue
                total += re * rg / (d * _pow(e, 1 + u) * _pow(g, 1 + v))
    return total


def restricted_divisor_product_check(D: int, u: complex, v: complex) -> float:
    """|triple sum - product over p|D of (1 + 1/p - p^{-1-u} - p^{-1-v})|."""
    f = factor(D)
    if not f.is_squarefree():
        raise ValueError("D must be squarefree")
    lhs = _restricted_inverse_triple_sum(D, complex(u), complex(v))
    rhs = 1.0 + 0.0j
    for p, _ in f.factors:
        rhs *= 1 + 1 / p - _pow(p, -(1 + complex(u))) - _pow(p, -(1 + complex(v)))
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# the multiplicative family feeding the split-prime factor


@lru_cache(maxsize=8)
def tau4_table(limit: int) -> np.ndarray:
    """tau4 = tau * tau by direct Dirichlet convolution, exact integers."""
    tau = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        tau[d::d] += 1
    out = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        out[d::d] += tau[d] * tau[1 : limit // d + 1]
    return out


def tau4_prime_power(j: int) -> int:
    # convolution tau * tau restricted to a prime power
    return sum((i + 1) * (j - i + 1) for i in range(j + 1))


def _require_split(name: str, psi: RealCharacter, p: int) -> None:
    if psi(p) != 1:
        raise ValueError(f"{name} defined only at split primes")


def g_family_eval(name: str, p: int, j: int, u: complex, v: complex,
                  psi: RealCharacter) -> complex:
    """Closed forms for the multiplicative helpers on prime powers p^j."""
    if not is_prime(p):
        raise ValueError("p must be prime")
    if j < 0:
        raise ValueError("exponent must be nonnegative")
    u, v = complex(u), complex(v)
    if j == 0:
        if name in ("h2", "h3", "g1", "g2", "g3", "f"):
            return 1.0 + 0.0j
        raise ValueError(f"unknown family member {name!r}")
    if name == "f":
        if psi(p) == 0:
            return 1.0 + 0.0j
        if psi(p) == -1:
            return complex(1 - j % 2)
        s = 1 + u + v
        return 1 + j * (_pow(p, s) - 1) / (_pow(p, s) + 1)
    if name == "h2":
        return 1.0 / (1 + p**-2)
    P = _pow(p, -(1 + u + v))
    h2 = 1.0 / (1 + p**-2)
    if name == "h3":
        _require_split(name, psi, p)
        if j != 1:
            raise ValueError("h3 is evaluated on squarefree arguments only")
        return 4 - (4 / p) * (_pow(p, -u) + _pow(p, -v)) / (1 + P)
    if name == "g1":
        _require_split(name, psi, p)
        if j == 1:
            return -4 * h2 * (_pow(p, -u) + _pow(p, -v)) / (1 + P)
        if j == 2:
            return h2 * (3 - P) * (_pow(p, -2 * u) + _pow(p, -2 * v)) / (1 + P)
        return 0.0 + 0.0j
    if name == "g2":
        _require_split(name, psi, p)
        if j == 1:
            return 4 * h2 - 4 * h2 * (1 + 1 / p) * (_pow(p, -u) + _pow(p, -v)) / (1 + P)
        if j == 2:
            return g_family_eval("g1", p, 2, u, v, psi)
        return 0.0 + 0.0j
    if name == "g3":
        _require_split(name, psi, p)
        w = _pow(p, -(u + v))
        if j == 1:
            return g_family_eval("g2", p, 1, u, v, psi) + 4 * w
        g2_1 = g_family_eval("g2", p, 1, u, v, psi)
        g2_2 = g_family_eval("g2", p, 2, u, v, psi)
        return (tau4_prime_power(j) * w**j
                + g2_1 * tau4_prime_power(j - 1) * w ** (j - 1)
                + g2_2 * tau4_prime_power(j - 2) * w ** (j - 2))
    raise ValueError(f"unknown family member {name!r}")


# ---------------------------------------------------------------------------
# lacunary divisor sum, exact


def lacunary_divisor_sum(psi: RealCharacter, A: int, k: int = 1) -> Fraction:
    """sum of tau(n)^k (1*psi)(n)/n over D^4 < n <= D^A as an exact rational.

    Common denominator lcm(1..D^A) keeps every addition integral; the one
    gcd happens at the end.
    """
    D = psi.D
    if A < 4:
        raise ValueError("upper exponent must be at least 4")
    hi = D**A
    if hi > 10**6:
        raise ValueError("range too large for exact summation")
    lo = D**4
    tau = np.zeros(hi + 1, dtype=np.int64)
    for d in range(1, hi + 1):
        tau[d::d] += 1
    ospi = one_star_psi_table(psi, hi)
    lcm = 1
    for n in range(lo + 1, hi + 1):
        lcm = math.lcm(lcm, n)
    num = 0
    for n in range(lo + 1, hi + 1):
        c = int(tau[n]) ** k * int(ospi[n])
        if c:
            num += c * (lcm // n)
    return Fraction(num, lcm)
