"""Central values of L(s,chi)L(s,chi psi) two independent ways.

The production route is the approximate functional equation: a coefficient
sum against the smooth weights of module `special`, truncated at n_max with
a certified tail bound.  The oracle route is Euler-Maclaurin Hurwitz zeta,
assembling L(s,chi) = q^{-s} sum_a chi(a) zeta_H(s, a/q); the two routes
share no code beyond the character tables.

The product character chi*psi is always evaluated pointwise as
chi(n) psi(n) (the moduli are coprime), never through a composite-modulus
group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import RealCharacter, one_star_psi_table
from .characters import DirichletCharacter, epsilon, epsilon_product_direct
from .special import (
    WeightFunction,
    _digamma_arr,
    eval_weight_many,
    gamma_complex,
    kernel_abs_moment,
)

# ---------------------------------------------------------------- oracle side

_BERNOULLI_EVEN = (
    1 / 6,
    -1 / 30,
    1 / 42,
    -1 / 30,
    5 / 66,
    -691 / 2730,
    7 / 6,
    -3617 / 510,
)
_EM_SHIFT = 50


def hurwitz_zeta_vec(s: complex, x: np.ndarray, shift: int = _EM_SHIFT) -> np.ndarray:
    """zeta_H(s, x_i) for an array of x in (0, 1], Euler-Maclaurin.

    shift terms summed directly, then the integral, half-term, and the
    Bernoulli corrections through B16 at the shifted point.
    """
    if s == 1:
        raise ValueError("pole at s=1")
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    k = np.arange(shift)[:, None]
    head = np.sum(np.exp(-s * np.log(k + x[None, :])), axis=0)
    w = shift + x
    lw = np.log(w)
    out = head + np.exp((1 - s) * lw) / (s - 1) + 0.5 * np.exp(-s * lw)
    rising = s  # (s)(s+1)...(s+2j-2), starts at j=1 with one factor
    factorial = 2.0
    power = np.exp((-s - 1) * lw)
    for j, b in enumerate(_BERNOULLI_EVEN, start=1):
        out = out + (b / factorial) * rising * power
        rising = rising * (s + 2 * j - 1) * (s + 2 * j)
        factorial *= (2 * j + 1) * (2 * j + 2)
        power = power / (w * w)
    return out


def hurwitz_zeta(s: complex, x: float, shift: int = _EM_SHIFT) -> complex:
    return complex(hurwitz_zeta_vec(s, np.array([x]), shift=shift)[0])


@dataclass(frozen=True)
class PrincipalCharacter:
    """chi_0 mod m: 1 on units, 0 elsewhere.  Oracle-side convenience."""

    modulus: int

    is_trivial = True

    def values(self) -> np.ndarray:
        m = self.modulus
        return np.array([1.0 if math.gcd(a, m) == 1 else 0.0 for a in range(m)],
                        dtype=np.complex128)


def _character_data(chi) -> tuple[int, np.ndarray, bool]:
    if isinstance(chi, RealCharacter):
        return chi.D, chi.table().astype(np.complex128), False
    if isinstance(chi, (DirichletCharacter, PrincipalCharacter)):
        return chi.modulus, chi.values(), bool(chi.is_trivial)
    raise TypeError(f"unsupported character type {type(chi)!r}")


def _dirichlet_L(s: complex, modulus: int, values: np.ndarray,
                 shift: int = _EM_SHIFT) -> complex:
    a = np.arange(1, modulus + 1, dtype=np.float64)
    vals = values[np.arange(1, modulus + 1) % modulus]
    if s == 1:
        # zeta_H(s,x) = 1/(s-1) - digamma(x) + O(s-1); the pole part carries
        # coefficient sum(chi) = 0 for non-principal chi
        if abs(complex(np.sum(vals))) > 1e-9:
            raise ValueError("pole at s=1")
        return complex(-np.dot(vals, _digamma_arr(a / modulus)) / modulus)
    zetas = hurwitz_zeta_vec(s, a / modulus, shift=shift)
    total = np.dot(vals, zetas)
    return complex(np.exp(-s * math.log(modulus)) * total)


def oracle_L(s: complex, chi, shift: int = _EM_SHIFT) -> complex:
    """L(s, chi) by Hurwitz zeta; pole flagged for the principal character."""
    modulus, values, principal = _character_data(chi)
    if principal and s == 1:
        raise ValueError("L(s, principal) has a pole at s=1")
    if not complex(s).real > 0:
        raise ValueError("oracle restricted to Re(s) > 0")
    return _dirichlet_L(s, modulus, values, shift=shift)


def product_character_values(chi: DirichletCharacter, psi: RealCharacter) -> np.ndarray:
    """(chi psi)(a) for a = 0..qD-1 by pointwise multiplicativity."""
    q, D = chi.modulus, psi.D
    if math.gcd(q, D) != 1:
        raise ValueError("moduli must be coprime")
    a = np.arange(q * D)
    return chi.values()[a % q] * psi.table()[a % D]


def oracle_product_at(s: complex, chi: DirichletCharacter, psi: RealCharacter,
                      shift: int = _EM_SHIFT) -> complex:
    """L(s,chi) L(s,chi psi), both factors by the Hurwitz route."""
    if chi.is_trivial:
        raise ValueError("principal character rejected")
    first = oracle_L(s, chi, shift=shift)
    second = _dirichlet_L(s, chi.modulus * psi.D,
                          product_character_values(chi, psi), shift=shift)
    return first * second


def oracle_product(chi: DirichletCharacter, psi: RealCharacter) -> complex:
    return oracle_product_at(0.5, chi, psi)


_STENCIL = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))


def oracle_product_derivative(chi: DirichletCharacter, psi: RealCharacter,
                              h: float = 1e-3) -> complex:
    """d/ds [L(s,chi)L(s,chi psi)] at s = 1/2, five-point stencil."""
    acc = 0j
    for k, c in _STENCIL:
        acc += c * oracle_product_at(0.5 + k * h, chi, psi)
    return acc / (12 * h)


# ------------------------------------------------------------------ AFE side


@dataclass(frozen=True)
class AFEConfig:
    Q: float
    n_max: int
    tail_budget: float = 1e-10

    def __post_init__(self):
        if not self.Q > 0:
            raise ValueError("Q must be positive")
        if self.n_max < math.ceil(self.Q):
            raise ValueError("n_max must be at least ceil(Q)")
        if not 0 < self.tail_budget <= 1e-10:
            raise ValueError("tail_budget must be in (0, 1e-10]")

    @property
    def logQ(self) -> float:
        return math.log(self.Q)


def default_config(q: int, D: int) -> AFEConfig:
    Q = q * math.sqrt(D) / math.pi
    n_max = math.ceil(Q * max(30.0, 10.0 * math.log(Q)))
    return AFEConfig(Q=Q, n_max=n_max)


@dataclass(frozen=True)
class CentralValuePair:
    L_central: complex
    L_combo: complex
    epsilon_product: complex


_TAIL_SIGMAS = (4.0, 6.0, 8.0, 10.0, 12.0)


def afe_tail_bound(kind: str, cfg: AFEConfig) -> float:
    """Certified bound on |sum_{n>n_max} (1*psi)(n) n^{-1/2} weight(n/Q)|.

    |weight(x)| <= moment(sigma) x^{-sigma} for x>1, and (1*psi)(n) <= d(n)
    <= 2 sqrt(n), so the tail is at most
    2 moment(sigma) Q^sigma n_max^{1-sigma}/(sigma-1), minimized over sigma.
    """
    best = math.inf
    for sigma in _TAIL_SIGMAS:
        m = kernel_abs_moment(kind, cfg.logQ, sigma)
        bound = 2 * m * cfg.Q**sigma * cfg.n_max ** (1 - sigma) / (sigma - 1)
        best = min(best, bound)
    return best


@lru_cache(maxsize=32)
def _afe_tables(q: int, D: int, n_max: int, Q: float):
    """Shared per-(q,D) arrays: coefficients and the four weight columns."""
    psi = RealCharacter(D)
    coeff = one_star_psi_table(psi, n_max)[1:].astype(np.float64)
    n = np.arange(1, n_max + 1, dtype=np.float64)
    coeff /= np.sqrt(n)
    logQ = math.log(Q)
    xs = n / Q
    cols = {}
    for kind in ("V1", "V2", "W1", "W2"):
        cols[kind] = coeff * eval_weight_many(WeightFunction(kind, logQ), xs)
    return cols


def afe_central(chi: DirichletCharacter, psi: RealCharacter,
                cfg: AFEConfig | None = None) -> CentralValuePair:
    """Central value and derivative combination for L(s,chi)L(s,chi psi).

    Truncation at cfg.n_max carries a certified tail bound; if the bound
    exceeds cfg.tail_budget this raises rather than return a doubtful value.
    """
    if chi.is_trivial:
        raise ValueError("principal character rejected")
    if not chi.is_even:
        raise ValueError("odd character rejected")
    q, D = chi.modulus, psi.D
    if math.gcd(q, D) != 1:
        raise ValueError("moduli must be coprime")
    if cfg is None:
        cfg = default_config(q, D)
    if abs(cfg.Q - q * math.sqrt(D) / math.pi) > 1e-9 * cfg.Q:
        raise ValueError("cfg.Q inconsistent with q sqrt(D)/pi")
    for kind in ("V1", "V2", "W1", "W2"):
        t = afe_tail_bound(kind, cfg)
        if t > cfg.tail_budget:
            raise ValueError(
                f"certified {kind} tail {t:.3e} exceeds budget {cfg.tail_budget:.3e}"
            )
    cols = _afe_tables(q, D, cfg.n_max, cfg.Q)
    chivals = chi.values_at(np.arange(1, cfg.n_max + 1))
    eps = epsilon(chi) * epsilon_product_direct(chi, psi)
    s_v1 = complex(np.dot(cols["V1"], chivals))
    s_v2 = complex(np.dot(cols["V2"], np.conj(chivals)))
    s_w1 = complex(np.dot(cols["W1"], chivals))
    s_w2 = complex(np.dot(cols["W2"], np.conj(chivals)))
    return CentralValuePair(
        L_central=s_v1 + eps * s_v2,
        L_combo=s_w1 + eps * s_w2,
        epsilon_product=eps,
    )


def epsilon_consistency_residual(chi: DirichletCharacter, psi: RealCharacter,
                                 alpha: float = 0.1) -> float:
    """|eps(chi)eps(chi psi) - ratio forced by the functional equation|.

    The completed product Q^s Gamma(s/2)^2 L(s,chi)L(s,chi psi) at
    s = 1/2 + alpha equals eps-product times its conjugate-character value
    at 1/2 - alpha, so the eps-product is a computable ratio of oracle
    values.
    """
    Q = chi.modulus * math.sqrt(psi.D) / math.pi
    num = oracle_product_at(0.5 + alpha, chi, psi)
    den = oracle_product_at(0.5 - alpha, chi.conjugate(), psi)
    gamma_ratio = (gamma_complex((0.5 + alpha) / 2) / gamma_complex((0.5 - alpha) / 2)) ** 2
    forced = Q ** (2 * alpha) * gamma_ratio * num / den
    eps = epsilon(chi) * epsilon_product_direct(chi, psi)
    return abs(eps - forced)
