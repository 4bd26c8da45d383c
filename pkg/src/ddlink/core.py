"""Frame geometry, signal containers, the ISFFT/SFFT pair and QAM mapping.

Layout convention: delay (DD) or frequency (TF) indexes rows, Doppler (DD) or
time slot (TF) indexes columns, so every grid is an ``M x N`` array.  Internal
helpers prefixed with an underscore operate on raw arrays whose last two axes
are ``(M, N)`` so that batches of grids can be pushed through in one call.

QAM Gray map
------------
Constellation index ``i`` carries the bits of ``i`` written MSB first.

4-QAM (bits ``b0 b1``; ``b0`` selects I, ``b1`` selects Q, 0 -> +, 1 -> -)::

    00 -> (+1 + 1j)/sqrt(2)     01 -> (+1 - 1j)/sqrt(2)
    10 -> (-1 + 1j)/sqrt(2)     11 -> (-1 - 1j)/sqrt(2)

16-QAM (bits ``b0 b1 b2 b3``; ``b0 b1`` -> I level, ``b2 b3`` -> Q level,
each pair through the Gray PAM-4 map ``00 -> +3, 01 -> +1, 11 -> -1,
10 -> -3``), scaled by ``1/sqrt(10)``.  Equidistant hard decisions resolve to
the lowest constellation index.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .opcount import record_fft

C0 = 2.99792458e8


@dataclass(frozen=True)
class LinkParams:
    """Frame geometry and physical constants of one link.

    ``T = 1/delta_f`` is the useful symbol duration; each transmitted symbol
    also carries ``cp_len`` prefix samples, so the symbol period on air is
    ``symbol_period = (M + cp_len) * T_s``.  The Doppler grid spacing uses the
    on-air period, which makes integer Doppler bins land exactly on DD bins.
    """

    M: int = 16
    N: int = 8
    delta_f: float = 15e3
    f_c: float = 0.95e9
    cp_len: int = 1
    pulse: str = "rect"
    c0: float = C0

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise InvalidArgumentError(f"M must be an integer >= 2, got {self.M}")
        if int(self.N) != self.N or self.N < 2:
            raise InvalidArgumentError(f"N must be an integer >= 2, got {self.N}")
        if not self.delta_f > 0:
            raise InvalidArgumentError("delta_f must be positive")
        if not self.f_c > 0:
            raise InvalidArgumentError("f_c must be positive")
        if int(self.cp_len) != self.cp_len or not 0 <= self.cp_len < self.M:
            raise InvalidArgumentError(f"cp_len must satisfy 0 <= cp_len < M, got {self.cp_len}")
        if self.pulse != "rect":
            raise InvalidArgumentError(f"only rectangular pulses are supported, got {self.pulse!r}")

    @property
    def T(self) -> float:
        return 1.0 / self.delta_f

    @property
    def T_s(self) -> float:
        return self.T / self.M

    @property
    def B(self) -> float:
        return self.M * self.delta_f

    @property
    def T_f(self) -> float:
        return self.N * self.T

    @property
    def symbol_len(self) -> int:
        return self.M + self.cp_len

    @property
    def frame_len(self) -> int:
        return self.N * self.symbol_len

    @property
    def symbol_period(self) -> float:
        return self.symbol_len * self.T_s

    @property
    def delay_resolution(self) -> float:
        return 1.0 / (self.M * self.delta_f)

    @property
    def doppler_resolution(self) -> float:
        return 1.0 / (self.N * self.symbol_period)

    def with_cp(self, cp_len: int) -> "LinkParams":
        return LinkParams(self.M, self.N, self.delta_f, self.f_c, cp_len, self.pulse, self.c0)


def _frozen_complex(data, shape=None, what="grid") -> np.ndarray:
    arr = np.array(data, dtype=np.complex128, copy=True)
    if shape is not None and arr.shape != shape:
        raise InvalidArgumentError(f"{what} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{what} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DDGrid:
    """Delay-Doppler samples ``X[l, k]``, shape ``(M, N)``."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen_complex(self.data, what="DDGrid")
        if arr.ndim != 2:
            raise InvalidArgumentError("DDGrid data must be two-dimensional")
        object.__setattr__(self, "data", arr)

    @property
    def shape(self):
        return self.data.shape

    def to_bytes(self) -> bytes:
        return grid_to_bytes(self.data)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "DDGrid":
        return cls(grid_from_bytes(blob))


@dataclass(frozen=True, eq=False)
class TFGrid:
    """Time-frequency samples ``X[m, n]``, shape ``(M, N)``."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen_complex(self.data, what="TFGrid")
        if arr.ndim != 2:
            raise InvalidArgumentError("TFGrid data must be two-dimensional")
        object.__setattr__(self, "data", arr)

    @property
    def shape(self):
        return self.data.shape

    def to_bytes(self) -> bytes:
        return grid_to_bytes(self.data)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "TFGrid":
        return cls(grid_from_bytes(blob))


@dataclass(frozen=True, eq=False)
class TimeSignal:
    samples: np.ndarray
    sample_period: float = field(default=1.0)

    def __post_init__(self):
        arr = _frozen_complex(self.samples, what="TimeSignal")
        if arr.ndim != 1:
            raise InvalidArgumentError("TimeSignal samples must be one-dimensional")
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size


# Grid serialization: u32 rows, u32 cols, then row-major (re, im) float64 pairs,
# all little-endian.
_HEADER = struct.Struct("<II")


def grid_to_bytes(data: np.ndarray) -> bytes:
    data = np.asarray(data, dtype=np.complex128)
    if data.ndim != 2:
        raise InvalidArgumentError("only two-dimensional grids can be serialized")
    rows, cols = data.shape
    pairs = np.empty((rows, cols, 2), dtype="<f8")
    pairs[..., 0] = data.real
    pairs[..., 1] = data.imag
    return _HEADER.pack(rows, cols) + pairs.tobytes(order="C")


def grid_from_bytes(blob: bytes) -> np.ndarray:
    if len(blob) < _HEADER.size:
        raise InvalidArgumentError("truncated grid header")
    rows, cols = _HEADER.unpack_from(blob)
    expected = _HEADER.size + rows * cols * 16
    if len(blob) != expected:
        raise InvalidArgumentError(f"grid payload is {len(blob)} bytes, expected {expected}")
    pairs = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).reshape(rows, cols, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]


def _check_grid(grid, cls, p: LinkParams) -> np.ndarray:
    if not isinstance(grid, cls):
        raise InvalidArgumentError(f"expected {cls.__name__}, got {type(grid).__name__}")
    if grid.shape != (p.M, p.N):
        raise InvalidArgumentError(f"{cls.__name__} shape {grid.shape} does not match (M, N) = ({p.M}, {p.N})")
    return grid.data


def fft(x: np.ndarray, axis: int, inverse: bool = False) -> np.ndarray:
    """Unitary (``norm='ortho'``) FFT along one axis, charged to the op counter."""
    n = x.shape[axis]
    record_fft(n, x.size // n)
    if inverse:
        return np.fft.ifft(x, axis=axis, norm="ortho")
    return np.fft.fft(x, axis=axis, norm="ortho")


def _isfft(x: np.ndarray) -> np.ndarray:
    # DFT over delay (e^{-j2pi ml/M}), IDFT over Doppler (e^{+j2pi nk/N})
    return fft(fft(x, axis=-2), axis=-1, inverse=True)


def _sfft(y: np.ndarray) -> np.ndarray:
    return fft(fft(y, axis=-2, inverse=True), axis=-1)


def isfft(x: DDGrid, p: LinkParams) -> TFGrid:
    """Map a delay-Doppler grid to the time-frequency grid (unitary)."""
    return TFGrid(_isfft(_check_grid(x, DDGrid, p)))


def sfft(y: TFGrid, p: LinkParams) -> DDGrid:
    """Exact inverse of :func:`isfft`."""
    return DDGrid(_sfft(_check_grid(y, TFGrid, p)))


# --- QAM -----------------------------------------------------------------

_PAM4_GRAY = {0b00: 3.0, 0b01: 1.0, 0b11: -1.0, 0b10: -3.0}


def _build_constellation(order: int) -> np.ndarray:
    if order == 4:
        pts = [complex(1 - 2 * (i >> 1), 1 - 2 * (i & 1)) for i in range(4)]
        return np.array(pts) / math.sqrt(2.0)
    if order == 16:
        pts = [complex(_PAM4_GRAY[i >> 2], _PAM4_GRAY[i & 3]) for i in range(16)]
        return np.array(pts) / math.sqrt(10.0)
    raise InvalidArgumentError(f"unsupported QAM order {order}; use 4 or 16")


_CONSTELLATIONS = {order: _build_constellation(order) for order in (4, 16)}
for _pts in _CONSTELLATIONS.values():
    _pts.setflags(write=False)


def constellation(order: int) -> np.ndarray:
    """Constellation points indexed by their bit label (MSB first)."""
    if order not in _CONSTELLATIONS:
        raise InvalidArgumentError(f"unsupported QAM order {order}; use 4 or 16")
    return _CONSTELLATIONS[order]


def bits_per_symbol(order: int) -> int:
    return int(math.log2(constellation(order).size))


def qam_modulate(bits, order: int) -> np.ndarray:
    points = constellation(order)
    k = bits_per_symbol(order)
    bits = np.asarray(bits)
    if bits.ndim != 1:
        raise InvalidArgumentError("bits must be a one-dimensional vector")
    if bits.size % k:
        raise InvalidArgumentError(f"bit count {bits.size} is not a multiple of {k}")
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise InvalidArgumentError("bits must be 0 or 1")
    weights = 1 << np.arange(k - 1, -1, -1)
    idx = bits.reshape(-1, k).astype(np.int64) @ weights
    return points[idx]


def qam_demodulate_hard(symbols, order: int) -> np.ndarray:
    """Minimum-distance hard decision; ties go to the lowest constellation index."""
    points = constellation(order)
    k = bits_per_symbol(order)
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    dist = np.abs(symbols[:, None] - points[None, :]) ** 2
    idx = np.argmin(dist, axis=1)
    shifts = np.arange(k - 1, -1, -1)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8).ravel()
