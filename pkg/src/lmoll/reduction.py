"""Deterministic accumulation helpers.

All reductions in this package must be reproducible bit-for-bit across runs
and across worker counts, so floating sums are compensated and parallel maps
always gather results in input order before reducing.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


class KahanSum:
    """Compensated running sum (Kahan–Neumaier)."""

    __slots__ = ("_s", "_c")

    def __init__(self, start: float = 0.0):
        self._s = float(start)
        self._c = 0.0

    def add(self, x: float) -> None:
        t = self._s + x
        if abs(self._s) >= abs(x):
            self._c += (self._s - t) + x
        else:
            self._c += (x - t) + self._s
        self._s = t

    @property
    def value(self) -> float:
        return self._s + self._c


def kahan_sum(values: Iterable[float]) -> float:
    acc = KahanSum()
    for v in values:
        acc.add(v)
    return acc.value


def kahan_sum_complex(values: Iterable[complex]) -> complex:
    re = KahanSum()
    im = KahanSum()
    for v in values:
        re.add(v.real)
        im.add(v.imag)
    return complex(re.value, im.value)


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Map fn over items, possibly on a thread pool, returning results in
    input order regardless of completion order.  threads=1 is a plain loop,
    and any threads value yields the identical result list."""
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
