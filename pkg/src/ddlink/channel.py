"""Discrete linear time-varying multipath channel and calibrated AWGN.

A path with gain ``a``, discrete delay ``l`` (samples) and Doppler ``nu`` (Hz)
contributes ``a * exp(j*2*pi*nu*(q - l)*T_s) * s[q - l]`` to output sample
``q``; samples before the start of the frame are zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import LinkParams, TimeSignal
from .errors import InvalidArgumentError, PreconditionError

# 3GPP TS 36.101 Annex B, Extended Vehicular A
EVA_DELAYS_NS = (0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0)
EVA_POWERS_DB = (0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9)

PROFILES = ("eva", "single_path", "custom")


@dataclass(frozen=True)
class PathSpec:
    gain: complex
    delay: float
    doppler: float

    def __post_init__(self):
        if not self.delay >= 0:
            raise InvalidArgumentError(f"path delay must be >= 0, got {self.delay}")
        object.__setattr__(self, "gain", complex(self.gain))
        object.__setattr__(self, "delay", float(self.delay))
        object.__setattr__(self, "doppler", float(self.doppler))


@dataclass(frozen=True)
class ChannelRealization:
    paths: tuple[PathSpec, ...]
    discrete_delays: tuple[int, ...]
    seed: int | None = None

    @property
    def max_delay(self) -> int:
        return max(self.discrete_delays, default=0)


def discrete_delay(delay: float, p: LinkParams) -> int:
    """Nearest sample, halves rounded up."""
    return int(math.floor(delay / p.T_s + 0.5 + 1e-9))


def fold_doppler(nu: float, p: LinkParams) -> float:
    half = p.delta_f / 2
    if -half <= nu <= half:
        return float(nu)
    return float((nu + half) % p.delta_f - half)


def realize(paths, p: LinkParams, seed: int | None = None) -> ChannelRealization:
    """Quantize path delays to the sample grid and check the Doppler region."""
    paths = tuple(paths)
    for path in paths:
        if abs(path.doppler) > p.delta_f / 2:
            raise PreconditionError(
                f"|doppler| = {abs(path.doppler):.6g} Hz exceeds delta_f/2 = {p.delta_f / 2:.6g} Hz"
            )
    return ChannelRealization(paths, tuple(discrete_delay(pt.delay, p) for pt in paths), seed)


def default_cp_len(delays_s, p: LinkParams) -> int:
    """Smallest CP covering the largest delay: ``ceil(tau_max / T_s)``."""
    tau_max = max(delays_s, default=0.0)
    return int(math.ceil(tau_max / p.T_s - 1e-9))


def max_doppler(speed: float, p: LinkParams) -> float:
    """One-way Doppler ``f_c * v / c0`` for speed in m/s."""
    return p.f_c * speed / p.c0


def kmh_to_ms(v_kmh: float) -> float:
    return v_kmh / 3.6


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed, None
    return np.random.default_rng(seed), seed


def _rayleigh_paths(delays_s, powers_db, v, p, rng):
    powers = 10.0 ** (np.asarray(powers_db, dtype=float) / 10.0)
    powers = powers / powers.sum()
    gains = np.sqrt(powers / 2) * (rng.standard_normal(powers.size) + 1j * rng.standard_normal(powers.size))
    theta = rng.uniform(0.0, 2 * np.pi, powers.size)
    nu_max = max_doppler(v, p)
    return [
        PathSpec(g, d, fold_doppler(nu_max * math.cos(t), p) if v > 0 else 0.0)
        for g, d, t in zip(gains, delays_s, theta)
    ]


def make_eva_profile(v: float, p: LinkParams, seed=None) -> ChannelRealization:
    """Draw one EVA realization for a mobile moving at ``v`` m/s.

    Gains are circularly-symmetric Gaussian with the EVA powers normalized to
    unit total; each path gets Doppler ``f_c*v/c0 * cos(theta)`` with a uniform
    arrival angle.  ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if v < 0:
        raise InvalidArgumentError("speed must be >= 0")
    rng, seed_val = _rng(seed)
    delays = [d * 1e-9 for d in EVA_DELAYS_NS]
    return realize(_rayleigh_paths(delays, EVA_POWERS_DB, v, p, rng), p, seed_val)


def make_profile(name: str, v: float, p: LinkParams, seed=None, taps=None) -> ChannelRealization:
    """Channel factory used by the harness.

    ``single_path`` is a unit-gain line-of-sight path with the full one-way
    Doppler; ``custom`` takes ``taps`` as ``(delay_ns, power_db)`` pairs and
    draws them like EVA.
    """
    if name == "eva":
        return make_eva_profile(v, p, seed)
    if v < 0:
        raise InvalidArgumentError("speed must be >= 0")
    if name == "single_path":
        _, seed_val = _rng(seed)
        return realize([PathSpec(1.0, 0.0, fold_doppler(max_doppler(v, p), p))], p, seed_val)
    if name == "custom":
        if not taps:
            raise InvalidArgumentError("custom profile needs a non-empty tap list")
        rng, seed_val = _rng(seed)
        delays = [float(d) * 1e-9 for d, _ in taps]
        powers = [float(pw) for _, pw in taps]
        return realize(_rayleigh_paths(delays, powers, v, p, rng), p, seed_val)
    raise InvalidArgumentError(f"unknown channel profile {name!r}; choose from {PROFILES}")


def profile_delays(name: str, taps=None) -> list[float]:
    if name == "eva":
        return [d * 1e-9 for d in EVA_DELAYS_NS]
    if name == "single_path":
        return [0.0]
    if name == "custom":
        return [float(d) * 1e-9 for d, _ in (taps or [])]
    raise InvalidArgumentError(f"unknown channel profile {name!r}; choose from {PROFILES}")


def _check_budget(ch: ChannelRealization, p: LinkParams):
    if ch.max_delay > p.cp_len:
        raise PreconditionError(
            f"channel delay of {ch.max_delay} samples exceeds the CP budget of {p.cp_len}"
        )


def _apply_channel(s: np.ndarray, ch: ChannelRealization, T_s: float) -> np.ndarray:
    """Batched core of :func:`apply_channel` over the last axis of ``s``."""
    L = s.shape[-1]
    out = np.zeros(s.shape, dtype=np.complex128)
    q = np.arange(L)
    for path, l in zip(ch.paths, ch.discrete_delays):
        if l >= L:
            continue
        ramp = path.gain * np.exp(2j * np.pi * path.doppler * (q[l:] - l) * T_s)
        out[..., l:] += ramp * s[..., : L - l]
    return out


def apply_channel(s: TimeSignal, ch: ChannelRealization, p: LinkParams) -> TimeSignal:
    _check_budget(ch, p)
    return TimeSignal(_apply_channel(s.samples, ch, p.T_s), s.sample_period)


def noise_variance(signal_power: float, snr_db: float) -> float:
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return float(signal_power) / 10.0 ** (snr_db / 10.0)


def complex_noise(shape, var: float, rng: np.random.Generator) -> np.ndarray:
    scale = math.sqrt(var / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def add_awgn(s: TimeSignal, snr_db: float, rng: np.random.Generator, signal_power: float | None = None) -> TimeSignal:
    """Add circularly-symmetric white Gaussian noise at a per-sample SNR.

    The reference power defaults to the measured mean power of ``s``.  Link
    simulations pass the *transmitted* power instead, so fading on the
    received signal is not normalized away.  ``snr_db = inf`` is noiseless.
    """
    if len(s) == 0:
        raise InvalidArgumentError("cannot add noise to an empty signal")
    if math.isinf(snr_db) and snr_db > 0:
        return s
    power = float(np.mean(np.abs(s.samples) ** 2)) if signal_power is None else signal_power
    var = noise_variance(power, snr_db)
    return TimeSignal(s.samples + complex_noise(s.samples.shape, var, rng), s.sample_period)


def freq_response(ch: ChannelRealization, p: LinkParams, snapshot: str = "symbol") -> np.ndarray:
    """Per-subcarrier, per-slot channel response for the one-tap equalizer.

    ``snapshot="symbol"`` freezes the discrete impulse response at the middle
    of each symbol's useful (post-CP) samples.  ``snapshot="frame"`` freezes
    it once at the middle of the frame and repeats it for every slot, which
    models a receiver holding one channel estimate per frame.
    """
    if snapshot == "symbol":
        q_mid = np.arange(p.N) * p.symbol_len + p.cp_len + (p.M - 1) / 2
    elif snapshot == "frame":
        q_mid = np.full(p.N, (p.frame_len - 1) / 2)
    else:
        raise InvalidArgumentError(f"snapshot must be 'symbol' or 'frame', got {snapshot!r}")
    m = np.arange(p.M)[:, None]
    h = np.zeros((p.M, p.N), dtype=np.complex128)
    for path, l in zip(ch.paths, ch.discrete_delays):
        time_phase = np.exp(2j * np.pi * path.doppler * (q_mid - l) * p.T_s)[None, :]
        h += path.gain * time_phase * np.exp(-2j * np.pi * m * l / p.M)
    return h
