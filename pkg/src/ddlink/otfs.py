"""OTFS on top of CP-OFDM, plus the perfect-CSI delay-Doppler LMMSE detector."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .channel import ChannelRealization, _apply_channel, _check_budget, realize
from .core import DDGrid, LinkParams, TimeSignal, _check_grid, _isfft, _sfft
from .errors import InvalidArgumentError, SingularMatrixError
from .ofdm import _ofdm_demodulate, _ofdm_modulate, ofdm_demodulate

# ZF is refused when the channel's condition number exceeds this
_COND_LIMIT = 1e12


def _otfs_modulate(x: np.ndarray, cp_len: int) -> np.ndarray:
    return _ofdm_modulate(_isfft(x), cp_len)


def _otfs_demodulate(r: np.ndarray, p: LinkParams) -> np.ndarray:
    return _sfft(_ofdm_demodulate(r, p.M, p.N, p.cp_len))


def otfs_modulate(x: DDGrid, p: LinkParams) -> TimeSignal:
    return TimeSignal(_otfs_modulate(_check_grid(x, DDGrid, p), p.cp_len), p.T_s)


def otfs_demodulate(r: TimeSignal, p: LinkParams) -> DDGrid:
    # length validation lives in ofdm_demodulate
    tf = ofdm_demodulate(r, p)
    return DDGrid(_sfft(tf.data))


def vec(grid: np.ndarray) -> np.ndarray:
    """Column-major vectorization over ``(l, k)``: index ``l + M*k``."""
    return np.asarray(grid).reshape(-1, order="F")


def unvec(v: np.ndarray, p: LinkParams) -> np.ndarray:
    return np.asarray(v).reshape((p.M, p.N), order="F")


def build_effective_channel(paths, p: LinkParams) -> np.ndarray:
    """Probe the modulate -> channel -> demodulate chain with every unit grid.

    Returns the ``MN x MN`` matrix ``H`` with ``vec(Y) = H @ vec(X)`` for the
    noiseless chain.  ``paths`` may be a list of :class:`PathSpec` or an
    existing :class:`ChannelRealization`.
    """
    ch = paths if isinstance(paths, ChannelRealization) else realize(paths, p)
    _check_budget(ch, p)
    MN = p.M * p.N
    if not ch.paths:
        return np.zeros((MN, MN), dtype=np.complex128)
    # probe j is the unit grid at vec index j, i.e. (l, k) = (j % M, j // M)
    probes = np.zeros((MN, p.M, p.N), dtype=np.complex128)
    j = np.arange(MN)
    probes[j, j % p.M, j // p.M] = 1.0
    tx = _otfs_modulate(probes, p.cp_len)
    rx = _apply_channel(tx, ch, p.T_s)
    out = _otfs_demodulate(rx, p)
    return np.transpose(out, (0, 2, 1)).reshape(MN, MN).T


def otfs_equalize_lmmse(y: DDGrid, H_eff, noise_var: float, p: LinkParams | None = None) -> DDGrid:
    """Solve ``(H^H H + noise_var I) x = H^H y`` for the DD symbol grid.

    With ``noise_var = 0`` this is zero forcing and a (numerically) singular
    ``H_eff`` raises :class:`SingularMatrixError`.
    """
    ydata = y.data if p is None else _check_grid(y, DDGrid, p)
    H = np.asarray(H_eff, dtype=np.complex128)
    MN = ydata.size
    if H.shape != (MN, MN):
        raise InvalidArgumentError(f"H_eff shape {H.shape} does not match ({MN}, {MN})")
    if not np.isfinite(noise_var) or noise_var < 0:
        raise InvalidArgumentError("noise_var must be finite and >= 0")
    Hh = H.conj().T
    if noise_var == 0:
        if np.linalg.cond(H) > _COND_LIMIT:
            raise SingularMatrixError("effective channel is singular; zero forcing is undefined")
        x = scipy.linalg.solve(H, vec(ydata), check_finite=False)
    else:
        A = Hh @ H + noise_var * np.eye(MN)
        x = scipy.linalg.solve(A, Hh @ vec(ydata), assume_a="pos", check_finite=False)
    return DDGrid(x.reshape(ydata.shape, order="F"))
