"""CP-OFDM modulator/demodulator and the one-tap zero-forcing equalizer."""

from __future__ import annotations

import numpy as np

from .core import LinkParams, TFGrid, TimeSignal, _check_grid, fft
from .errors import InvalidArgumentError

EPS_DIV = 1e-12


def _ofdm_modulate(x: np.ndarray, cp_len: int) -> np.ndarray:
    """(..., M, N) TF grid -> (..., N*(M+cp)) samples, one CP per symbol."""
    sym = fft(x, axis=-2, inverse=True)
    if cp_len:
        sym = np.concatenate([sym[..., -cp_len:, :], sym], axis=-2)
    sym = np.swapaxes(sym, -1, -2)
    return sym.reshape(sym.shape[:-2] + (-1,))


def _ofdm_demodulate(r: np.ndarray, M: int, N: int, cp_len: int) -> np.ndarray:
    sym = r.reshape(r.shape[:-1] + (N, M + cp_len))[..., cp_len:]
    return fft(np.swapaxes(sym, -1, -2), axis=-2)


def ofdm_modulate(x: TFGrid, p: LinkParams) -> TimeSignal:
    """IDFT each time slot (scaled ``1/sqrt(M)``) and prefix its last ``cp_len`` samples."""
    return TimeSignal(_ofdm_modulate(_check_grid(x, TFGrid, p), p.cp_len), p.T_s)


def ofdm_demodulate(r: TimeSignal, p: LinkParams) -> TFGrid:
    if not isinstance(r, TimeSignal):
        raise InvalidArgumentError("expected a TimeSignal")
    if len(r) != p.frame_len:
        raise InvalidArgumentError(f"signal has {len(r)} samples, frame needs {p.frame_len}")
    return TFGrid(_ofdm_demodulate(r.samples, p.M, p.N, p.cp_len))


def ofdm_equalize_zf(y: TFGrid, h_freq, p: LinkParams) -> tuple[TFGrid, int]:
    """Divide each TF sample by the channel; returns ``(grid, n_unequalized)``.

    Entries where ``|h| <= 1e-12`` are passed through untouched and counted.
    """
    ydata = _check_grid(y, TFGrid, p)
    h = np.asarray(h_freq, dtype=np.complex128)
    if h.shape != (p.M, p.N):
        raise InvalidArgumentError(f"h_freq shape {h.shape} does not match ({p.M}, {p.N})")
    ok = np.abs(h) > EPS_DIV
    out = ydata.copy()
    out[ok] = ydata[ok] / h[ok]
    return TFGrid(out), int((~ok).sum())
