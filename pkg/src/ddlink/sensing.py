"""Delay/Doppler/speed estimation from an impulse-pilot OTFS frame.

Two stages: a matched-filter search over the integer DD grid, then a
Fibonacci-section refinement of delay and Doppler inside the winning cell.
Model responses are produced by the same modulate -> channel -> demodulate
chain used for communication, so the estimator sees exactly the leakage the
link produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import PathSpec, _apply_channel, realize
from .core import DDGrid, LinkParams, _check_grid, fft
from .errors import InvalidArgumentError, PreconditionError
from .opcount import record_mults
from .otfs import _otfs_demodulate, _otfs_modulate


@dataclass(frozen=True, eq=False)
class PilotFrame:
    """A DD grid holding a single unit-magnitude impulse at ``(l_p, k_p)``."""

    dd: DDGrid

    def __post_init__(self):
        nz = np.flatnonzero(self.dd.data)
        if nz.size != 1 or not math.isclose(abs(self.dd.data.flat[nz[0]]), 1.0, rel_tol=1e-12):
            raise InvalidArgumentError("pilot must contain exactly one unit-magnitude entry")

    @classmethod
    def impulse(cls, p: LinkParams, l_p: int = 0, k_p: int = 0) -> "PilotFrame":
        data = np.zeros((p.M, p.N), dtype=np.complex128)
        data[l_p, k_p] = 1.0
        return cls(DDGrid(data))

    @property
    def position(self) -> tuple[int, int]:
        l, k = np.unravel_index(np.flatnonzero(self.dd.data)[0], self.dd.shape)
        return int(l), int(k)


@dataclass(frozen=True)
class SensingEstimate:
    tau_hat: float
    nu_hat: float
    gain_hat: complex
    v_hat: float
    score: float
    converged: bool = True

    @property
    def range_hat(self) -> float:
        """Two-way range ``tau * c0 / 2`` in meters."""
        return self.tau_hat * 2.99792458e8 / 2


class RefineResult(NamedTuple):
    tau_hat: float
    nu_hat: float
    gain_hat: complex
    score: float
    rounds: int
    converged: bool


def estimate_speed(nu_hat: float, p: LinkParams) -> float:
    """Radial speed (m/s) from a two-way Doppler shift: ``nu * c0 / (2 f_c)``."""
    return nu_hat * p.c0 / (2 * p.f_c)


def fold_bin(k: int, N: int) -> int:
    """Map a Doppler index in ``[0, N)`` to the signed range ``(-N/2, N/2]``."""
    return k - N if k > N // 2 else k


def sense_response(tau: float, nu: float, p: LinkParams, pilot: PilotFrame) -> DDGrid:
    """Noiseless received DD grid for a unit-gain target at ``(tau, nu)``."""
    return DDGrid(_response(tau, nu, p, pilot.dd.data))


def _response(tau, nu, p, pilot_data):
    ch = realize([PathSpec(1.0, tau, nu)], p)
    if ch.max_delay > p.cp_len:
        raise PreconditionError(f"tau = {tau:.6g} s lies beyond the CP budget of {p.cp_len} samples")
    rx = _apply_channel(_otfs_modulate(pilot_data, p.cp_len), ch, p.T_s)
    return _otfs_demodulate(rx, p)


def _delay_count(p: LinkParams) -> int:
    """Integer delays searched by the MF step: those the CP can absorb."""
    return min(p.M, p.cp_len + 1)


def mf_objective_map(y: DDGrid, pilot: PilotFrame, p: LinkParams) -> np.ndarray:
    """``|<response(l, k), y>|^2`` for every searched integer cell.

    For an impulse pilot, the response to an integer-aligned target is the
    pilot cyclically shifted by ``(l, k)`` times unit-magnitude phases, so
    the objective is a 2D cyclic cross-correlation computed with FFTs.
    Rows cover delays ``0..min(M-1, cp_len)``; columns are raw Doppler
    indices ``0..N-1``.
    """
    ydata = _check_grid(y, DDGrid, p)
    P = pilot.dd.data
    Yf = fft(fft(ydata, axis=0), axis=1)
    Pf = fft(fft(P, axis=0), axis=1)
    record_mults(ydata.size)
    corr = fft(fft(Yf * np.conj(Pf), axis=0, inverse=True), axis=1, inverse=True)
    # unitary transforms: undo the 1/sqrt(MN) of the correlation theorem
    corr *= math.sqrt(ydata.size)
    return np.abs(corr[: _delay_count(p)]) ** 2


def _argmax_lex(obj: np.ndarray) -> tuple[int, int]:
    # np.argmax returns the first maximum in C order: smallest l, then k
    l, k = np.unravel_index(int(np.argmax(obj)), obj.shape)
    return int(l), int(k)


def mf_integer_search(y: DDGrid, pilot: PilotFrame, p: LinkParams) -> tuple[int, int, float]:
    """Integer-grid matched filter; returns ``(l_hat, k_hat, score)``.

    ``k_hat`` is the raw index in ``[0, N)``; :func:`fold_bin` gives its
    signed Doppler bin.
    """
    obj = mf_objective_map(y, pilot, p)
    l, k = _argmax_lex(obj)
    return l, k, float(obj[l, k])


def exhaustive_objective_map(y: DDGrid, pilot: PilotFrame, p: LinkParams) -> np.ndarray:
    """Reference for :func:`mf_objective_map`: one full chain run per cell."""
    ydata = _check_grid(y, DDGrid, p)
    out = np.empty((_delay_count(p), p.N))
    for l in range(out.shape[0]):
        for k in range(p.N):
            g = _response(l * p.delay_resolution, fold_bin(k, p.N) * p.doppler_resolution, p, pilot.dd.data)
            out[l, k] = abs(np.vdot(g, ydata)) ** 2
    return out


def _fib_numbers(limit: float) -> list[int]:
    fib = [1, 1]
    while fib[-1] < limit:
        fib.append(fib[-1] + fib[-2])
    return fib


def fibonacci_maximize(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Fibonacci-section search for the maximum of a unimodal ``f`` on ``[a, b]``.

    The final bracket is at most ``tol`` wide.  Returns the best evaluated
    point and its value.
    """
    if b - a <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    fib = _fib_numbers(2 * (b - a) / tol)
    n = len(fib) - 1
    x1 = a + fib[n - 2] / fib[n] * (b - a)
    x2 = a + fib[n - 1] / fib[n] * (b - a)
    f1, f2 = f(x1), f(x2)
    best = (x1, f1) if f1 >= f2 else (x2, f2)
    for i in range(n, 2, -1):
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = a + fib[i - 3] / fib[i - 1] * (b - a)
            f1 = f(x1)
            if f1 > best[1]:
                best = (x1, f1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + fib[i - 2] / fib[i - 1] * (b - a)
            f2 = f(x2)
            if f2 > best[1]:
                best = (x2, f2)
    return best


def fibonacci_refine(
    y: DDGrid,
    pilot: PilotFrame,
    l_hat: int,
    k_hat: int,
    p: LinkParams,
    tol: float = 0.01,
    max_rounds: int = 10,
) -> RefineResult:
    """Refine the integer estimate to fractional delay and Doppler.

    Maximizes the normalized correlation ``|<g, y>|^2 / ||g||^2`` over the
    +/- one-bin cell around ``(l_hat, k_hat)`` by alternating 1D Fibonacci
    searches on delay and Doppler.  ``tol`` is in bins; a tolerance of half
    a bin or more keeps the integer estimate.
    """
    ydata = _check_grid(y, DDGrid, p)
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    d_res, nu_res = p.delay_resolution, p.doppler_resolution

    def evaluate(tau, nu):
        g = _response(tau, nu, p, pilot.dd.data)
        record_mults(2 * g.size)
        corr = np.vdot(g, ydata)
        energy = float(np.vdot(g, g).real)
        return abs(corr) ** 2 / energy, corr / energy

    tau = l_hat * d_res
    nu = fold_bin(k_hat, p.N) * nu_res
    score, gain = evaluate(tau, nu)
    if tol >= 0.5:
        return RefineResult(tau, nu, gain, score, 0, True)

    # upper delay bound keeps the rounded delay inside the CP
    tau_lo = max(0.0, (l_hat - 1) * d_res)
    tau_hi = min((l_hat + 1) * d_res, (p.cp_len + 0.499) * p.T_s, p.T * (1 - 1e-12))
    half = p.delta_f / 2 * (1 - 1e-9)
    nu_lo = max(nu - nu_res, -half)
    nu_hi = min(nu + nu_res, half)

    rounds, converged = 0, False
    while rounds < max_rounds:
        rounds += 1
        t_new, s_t = fibonacci_maximize(lambda t: evaluate(t, nu)[0], tau_lo, tau_hi, tol * d_res)
        dt = 0.0
        if s_t > score:
            dt, tau, score = abs(t_new - tau) / d_res, t_new, s_t
        n_new, s_n = fibonacci_maximize(lambda v: evaluate(tau, v)[0], nu_lo, nu_hi, tol * nu_res)
        dn = 0.0
        if s_n > score:
            dn, nu, score = abs(n_new - nu) / nu_res, n_new, s_n
        if dt < tol and dn < tol:
            converged = True
            break
    score, gain = evaluate(tau, nu)
    return RefineResult(tau, nu, gain, score, rounds, converged)


def estimate_targets(
    y: DDGrid,
    pilot: PilotFrame,
    p: LinkParams,
    max_targets: int = 1,
    stop_ratio: float = 0.05,
    tol: float = 0.01,
) -> list[SensingEstimate]:
    """Successive matched-filter estimation and cancellation of targets."""
    if max_targets < 1:
        raise InvalidArgumentError("max_targets must be >= 1")
    if not 0 < stop_ratio < 1:
        raise InvalidArgumentError("stop_ratio must lie in (0, 1)")
    residual = _check_grid(y, DDGrid, p).copy()
    found: list[SensingEstimate] = []
    first_score = None
    while len(found) < max_targets:
        res_grid = DDGrid(residual)
        l, k, mf_score = mf_integer_search(res_grid, pilot, p)
        if first_score is None:
            first_score = mf_score
            if first_score == 0:
                break
        elif mf_score < stop_ratio * first_score:
            break
        r = fibonacci_refine(res_grid, pilot, l, k, p, tol)
        found.append(
            SensingEstimate(r.tau_hat, r.nu_hat, r.gain_hat, estimate_speed(r.nu_hat, p), r.score, r.converged)
        )
        residual = residual - r.gain_hat * _response(r.tau_hat, r.nu_hat, p, pilot.dd.data)
    return sorted(found, key=lambda e: -e.score)
