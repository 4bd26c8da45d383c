"""Complex-multiply accounting for the transforms.

Counting is opt-in: wrap a block in :func:`counting` and every FFT executed by
this package inside that block is charged with the radix-2 cost
``(n/2) * log2(n)`` complex multiplies per length-``n`` transform.
"""

from __future__ import annotations

import contextvars
import math
from contextlib import contextmanager
from dataclasses import dataclass

_ACTIVE: contextvars.ContextVar["OpCounter | None"] = contextvars.ContextVar(
    "ddlink_opcounter", default=None
)


@dataclass
class OpCounter:
    complex_mults: int = 0
    fft_calls: int = 0

    def add(self, other: "OpCounter") -> None:
        self.complex_mults += other.complex_mults
        self.fft_calls += other.fft_calls


def radix2_mults(n: int) -> int:
    if n <= 1:
        return 0
    return int(round((n / 2) * math.log2(n)))


def record_fft(n: int, count: int) -> None:
    counter = _ACTIVE.get()
    if counter is not None:
        counter.fft_calls += count
        counter.complex_mults += count * radix2_mults(n)


def record_mults(count: int) -> None:
    counter = _ACTIVE.get()
    if counter is not None:
        counter.complex_mults += int(count)


@contextmanager
def counting(counter: OpCounter | None = None):
    """Activate ``counter`` (a fresh one by default) for the enclosed block."""
    counter = OpCounter() if counter is None else counter
    token = _ACTIVE.set(counter)
    try:
        yield counter
    finally:
        _ACTIVE.reset(token)
