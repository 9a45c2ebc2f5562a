"""Special functions for the central-value machinery.

Gamma and digamma by a fixed Lanczos approximation with reflection.  The
six smooth weights V1, V2, dV1, dV2, W1, W2 are inverse Mellin transforms

    weight(x) = (1/2 pi i) int K(s) x^{-s} ds

whose kernels K are explicit in terms of B(s) = Gamma(1/4+s/2)^2/Gamma(1/4)^2:

    V1 = V2:  B(s)/s
    dV1:      (digamma(1/4+s/2) - digamma(1/4)) B(s)/s
    dV2:      (-digamma(1/4+s/2) - digamma(1/4)) B(s)/s
    W1:       (B(s)/2) [ (1 - c/logQ)/s + 1/(logQ s^2) ]
    W2:       (B(s)/2) [ (1 - c/logQ)/s - 1/(logQ s^2) ]

with c = digamma(1/4).  The W kernels come from combining the V kernels
with d/ds acting on x^{-s}; the 1/s^2 sign is the only difference between
the two.  Quadrature runs on a vertical line: Re(s) = 1 for x > 1, and
Re(s) = -1/4 plus the residue at s = 0 for x <= 1, which keeps the line
integral O(x^{1/4}) and leaves the constant term to the exactly-known
residue.  Kernels decay like e^{-pi|t|/4}, so |t| <= 60 at step 1/64 is
far below double precision.

Also here: Y0/K0 Bessel kernels and a C-infinity bump template.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import k0 as _scipy_k0
from scipy.special import y0 as _scipy_y0

_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_nonpositive_integer(s: complex) -> bool:
    s = complex(s)
    return s.imag == 0.0 and s.real <= 0.0 and s.real == round(s.real)


def gamma_complex(s: complex) -> complex:
    """Gamma(s) by Lanczos (g=7, 9 terms), reflection for Re(s) < 1/2."""
    if _is_nonpositive_integer(s):
        raise ValueError(f"gamma pole at s={s}")
    s = complex(s)
    if s.real < 0.5:
        return math.pi / (cmath.sin(math.pi * s) * gamma_complex(1 - s))
    z = s - 1
    a = _LANCZOS_C[0]
    for k in range(1, 9):
        a += _LANCZOS_C[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * a


def digamma_complex(s: complex) -> complex:
    """digamma(s) from the same Lanczos data; reflection for Re(s) < 1/2."""
    if _is_nonpositive_integer(s):
        raise ValueError(f"digamma pole at s={s}")
    s = complex(s)
    if s.real < 0.5:
        return digamma_complex(1 - s) - math.pi / cmath.tan(math.pi * s)
    z = s - 1
    a = _LANCZOS_C[0]
    da = 0j
    for k in range(1, 9):
        a += _LANCZOS_C[k] / (z + k)
        da -= _LANCZOS_C[k] / (z + k) ** 2
    t = z + _LANCZOS_G + 0.5
    return cmath.log(t) + (z + 0.5) / t - 1 + da / a


def _gamma_arr(s: np.ndarray) -> np.ndarray:
    """Vectorized gamma on complex arrays, no pole checking."""
    s = np.asarray(s, dtype=np.complex128)
    refl = s.real < 0.5
    zs = np.where(refl, 1 - s, s) - 1
    a = np.full(s.shape, _LANCZOS_C[0], dtype=np.complex128)
    for k in range(1, 9):
        a += _LANCZOS_C[k] / (zs + k)
    t = zs + _LANCZOS_G + 0.5
    g = math.sqrt(2 * math.pi) * np.exp((zs + 0.5) * np.log(t) - t) * a
    out = np.where(refl, np.pi / (np.sin(np.pi * s) * g), g)
    return out


def _digamma_arr(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.complex128)
    refl = s.real < 0.5
    zs = np.where(refl, 1 - s, s) - 1
    a = np.full(s.shape, _LANCZOS_C[0], dtype=np.complex128)
    da = np.zeros(s.shape, dtype=np.complex128)
    for k in range(1, 9):
        a += _LANCZOS_C[k] / (zs + k)
        da -= _LANCZOS_C[k] / (zs + k) ** 2
    t = zs + _LANCZOS_G + 0.5
    psi = np.log(t) + (zs + 0.5) / t - 1 + da / a
    return np.where(refl, psi - np.pi / np.tan(np.pi * s), psi)


GAMMA_QUARTER = 3.6256099082219083  # Gamma(1/4)
DIGAMMA_QUARTER = -4.227453533376265  # digamma(1/4) = Gamma'(1/4)/Gamma(1/4)


WEIGHT_KINDS = ("V1", "V2", "dV1", "dV2", "W1", "W2")


@dataclass(frozen=True)
class WeightFunction:
    kind: str
    logQ: float

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if not self.logQ > 0:
            raise ValueError("logQ must be positive")


@dataclass(frozen=True)
class MellinPrincipalPart:
    """Coefficients of 1/s^2 and 1/s at s=0 for a weight's Mellin transform."""

    c2: complex
    c1: complex


def _b_arr(s: np.ndarray) -> np.ndarray:
    """B(s) = Gamma(1/4 + s/2)^2 / Gamma(1/4)^2."""
    return (_gamma_arr(0.25 + s / 2) / GAMMA_QUARTER) ** 2


def mellin_V(s: complex) -> complex:
    """Mellin transform of V1 (= of V2): B(s)/s."""
    if s == 0:
        raise ValueError("pole at s=0")
    return complex((gamma_complex(0.25 + s / 2) / GAMMA_QUARTER) ** 2) / s


def _kernel_arr(kind: str, logQ: float, s: np.ndarray) -> np.ndarray:
    b = _b_arr(s)
    if kind in ("V1", "V2"):
        return b / s
    if kind == "dV1":
        return (_digamma_arr(0.25 + s / 2) - DIGAMMA_QUARTER) * b / s
    if kind == "dV2":
        return (-_digamma_arr(0.25 + s / 2) - DIGAMMA_QUARTER) * b / s
    c_over = DIGAMMA_QUARTER / logQ
    if kind == "W1":
        return b / 2 * ((1 - c_over) / s + 1 / (logQ * s * s))
    if kind == "W2":
        return b / 2 * ((1 - c_over) / s - 1 / (logQ * s * s))
    raise ValueError(kind)


def mellin_weight(w: WeightFunction, s: complex) -> complex:
    """Closed-form Mellin transform of any of the six weights."""
    if s == 0:
        raise ValueError("pole at s=0")
    return complex(_kernel_arr(w.kind, w.logQ, np.array([s], dtype=complex))[0])


def mellin_principal_part(w: WeightFunction) -> MellinPrincipalPart:
    c = DIGAMMA_QUARTER
    L = w.logQ
    if w.kind in ("V1", "V2"):
        return MellinPrincipalPart(0, 1)
    if w.kind == "dV1":
        return MellinPrincipalPart(0, 0)
    if w.kind == "dV2":
        return MellinPrincipalPart(0, -2 * c)
    if w.kind == "W1":
        return MellinPrincipalPart(1 / (2 * L), 0.5)
    return MellinPrincipalPart(-1 / (2 * L), 0.5 - c / L)


_QUAD_T_MAX = 60.0
_QUAD_STEP = 1.0 / 64.0


@lru_cache(maxsize=256)
def _line_kernel(kind: str, logQ: float, sigma: float):
    """Kernel samples K(sigma + it) on the fixed t-grid, with the t-grid."""
    t = np.arange(-_QUAD_T_MAX, _QUAD_T_MAX + _QUAD_STEP / 2, _QUAD_STEP)
    s = sigma + 1j * t
    return t, _kernel_arr(kind, logQ, s)


def _residue_at_zero(w: WeightFunction, x: float) -> float:
    pp = mellin_principal_part(w)
    return float((pp.c1 - pp.c2 * math.log(x)).real)


def eval_weight(w: WeightFunction, x: float) -> float:
    """weight(x), absolute accuracy far below 1e-10 on [1e-8, 1e3].

    For x <= 1 the contour sits at Re(s) = -1/4 (staying right of the
    Gamma^2 poles at s = -1/2) and the s=0 residue is added exactly.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    sigma = 1.0 if x > 1 else -0.25
    t, kern = _line_kernel(w.kind, w.logQ, sigma)
    lx = math.log(x)
    integrand = kern * np.exp(-1j * t * lx)
    val = _QUAD_STEP / (2 * math.pi) * float(np.sum(integrand).real) * x**-sigma
    if x <= 1:
        val += _residue_at_zero(w, x)
    return val


def eval_weight_many(w: WeightFunction, xs: np.ndarray) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    out = np.empty(xs.shape, dtype=np.float64)
    flat = xs.ravel()
    res = out.ravel()
    for i, x in enumerate(flat):
        res[i] = eval_weight(w, float(x))
    return out


@lru_cache(maxsize=256)
def kernel_abs_moment(kind: str, logQ: float, sigma: float) -> float:
    """(1/2pi) int |K(sigma+it)| dt, so |weight(x)| <= moment * x^{-sigma}
    for x > 1 and any sigma > 0 (no pole crossed)."""
    _, kern = _line_kernel(kind, logQ, sigma)
    return _QUAD_STEP / (2 * math.pi) * float(np.sum(np.abs(kern)))


def bessel_Y0(x: float):
    if np.any(np.asarray(x) <= 0):
        raise ValueError("Y0 requires x > 0")
    return _scipy_y0(x)


def bessel_K0(x: float):
    if np.any(np.asarray(x) <= 0):
        raise ValueError("K0 requires x > 0")
    return _scipy_k0(x)


class SmoothBump:
    """C-infinity bump supported on [lo, hi], sup-normalized to peak 1.

    Template exp(1 + 1/((2y-3)^2 - 1)) on 1 < y < 2, zero outside, with
    y the affine map of [lo, hi] onto [1, 2]."""

    def __init__(self, lo: float, hi: float):
        if not 0 < lo < hi:
            raise ValueError("need 0 < lo < hi")
        self.lo = float(lo)
        self.hi = float(hi)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        y = 1.0 + (x - self.lo) / (self.hi - self.lo)
        out = np.zeros_like(y)
        inside = (y > 1.0) & (y < 2.0)
        u = (2.0 * y[inside] - 3.0) ** 2 - 1.0  # in [-1, 0)
        out[inside] = np.exp(1.0 + 1.0 / u)
        return out if out.shape else float(out)

    def grid(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        xs = np.linspace(self.lo, self.hi, n)
        return xs, self(xs)
