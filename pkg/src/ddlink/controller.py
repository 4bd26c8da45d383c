"""Speed-driven OFDM/OTFS switch and the per-frame link chain it drives."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import PathSpec, add_awgn, apply_channel, freq_response, make_profile, noise_variance, realize
from .core import DDGrid, LinkParams, TFGrid, bits_per_symbol, qam_demodulate_hard, qam_modulate
from .errors import InvalidArgumentError
from .ofdm import ofdm_demodulate, ofdm_equalize_zf, ofdm_modulate
from .opcount import OpCounter, counting
from .otfs import build_effective_channel, otfs_demodulate, otfs_equalize_lmmse, otfs_modulate
from .sensing import PilotFrame, estimate_targets

log = logging.getLogger(__name__)


class WaveformChoice(str, enum.Enum):
    OFDM = "ofdm"
    OTFS = "otfs"


@dataclass(frozen=True)
class SwitchPolicy:
    """Speed threshold (m/s) and optional hysteresis band (m/s)."""

    v_threshold: float
    hysteresis: float = 0.0

    def __post_init__(self):
        if not self.v_threshold > 0:
            raise InvalidArgumentError("v_threshold must be positive")
        if not self.hysteresis >= 0:
            raise InvalidArgumentError("hysteresis must be >= 0")

    @classmethod
    def from_kmh(cls, threshold_kmh: float, hysteresis_kmh: float = 0.0) -> "SwitchPolicy":
        return cls(threshold_kmh / 3.6, hysteresis_kmh / 3.6)


def select_waveform(v_hat: float, policy: SwitchPolicy, previous: WaveformChoice | None = None) -> WaveformChoice:
    """OFDM at or below the threshold, OTFS above it.

    With hysteresis, leaving ``previous`` requires overshooting the threshold
    by more than the band.
    """
    if v_hat < 0:
        raise InvalidArgumentError("v_hat must be >= 0")
    thr, h = policy.v_threshold, policy.hysteresis
    if previous is None or h == 0:
        return WaveformChoice.OFDM if v_hat <= thr else WaveformChoice.OTFS
    if previous is WaveformChoice.OFDM:
        return WaveformChoice.OTFS if v_hat > thr + h else WaveformChoice.OFDM
    return WaveformChoice.OFDM if v_hat < thr - h else WaveformChoice.OTFS


@dataclass(frozen=True)
class LinkScenario:
    """One adaptive-link run: true mobile speed, channel, SNRs and frame count."""

    speed_kmh: float
    snr_db: float = 15.0
    mod_order: int = 4
    frames: int = 1
    channel: str = "eva"
    taps: tuple = ()
    sensing_snr_db: float = 20.0
    sensing_cp_len: int | None = None
    tol_bins: float = 1e-3
    max_targets: int = 1
    stop_ratio: float = 0.05
    csi: str = "symbol"
    noiseless: bool = False

    def sensing_params(self, p: LinkParams) -> LinkParams:
        cp = p.M - 1 if self.sensing_cp_len is None else self.sensing_cp_len
        return p.with_cp(cp)


@dataclass
class LinkReport:
    waveform: WaveformChoice
    v_hat: float
    v_true: float
    bit_errors: int
    bits: int
    frames: int
    sensing_failed: bool = False
    ops: dict = field(default_factory=dict)

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0


@dataclass
class FrameStats:
    bit_errors: int = 0
    bits: int = 0
    frames: int = 0
    ops: OpCounter = field(default_factory=OpCounter)

    def add(self, other: "FrameStats") -> None:
        self.bit_errors += other.bit_errors
        self.bits += other.bits
        self.frames += other.frames
        self.ops.add(other.ops)


def run_data_frames(
    waveform: WaveformChoice | str,
    n_frames: int,
    speed_ms: float,
    snr_db: float,
    mod_order: int,
    p: LinkParams,
    rng: np.random.Generator,
    channel: str = "eva",
    taps=None,
    csi: str = "symbol",
) -> FrameStats:
    """Send ``n_frames`` random-data frames through one modem chain.

    Per frame: draw a channel, draw bits, modulate, pass the channel, add
    noise referenced to the transmitted power, equalize with perfect CSI and
    slice.  Only modulator/demodulator transforms are charged to ``ops``.
    The sequence of draws from ``rng`` is identical for both waveforms.
    """
    waveform = WaveformChoice(waveform)
    k = bits_per_symbol(mod_order)
    stats = FrameStats()
    for _ in range(n_frames):
        ch = make_profile(channel, speed_ms, p, rng, taps)
        bits = rng.integers(0, 2, p.M * p.N * k, dtype=np.uint8)
        grid = qam_modulate(bits, mod_order).reshape((p.M, p.N), order="F")
        with counting(stats.ops):
            if waveform is WaveformChoice.OFDM:
                tx = ofdm_modulate(TFGrid(grid), p)
            else:
                tx = otfs_modulate(DDGrid(grid), p)
        tx_power = float(np.mean(np.abs(tx.samples) ** 2))
        var = noise_variance(tx_power, snr_db)
        rx = add_awgn(apply_channel(tx, ch, p), snr_db, rng, signal_power=tx_power)
        if waveform is WaveformChoice.OFDM:
            with counting(stats.ops):
                y = ofdm_demodulate(rx, p)
            est, _ = ofdm_equalize_zf(y, freq_response(ch, p, csi), p)
        else:
            with counting(stats.ops):
                y = otfs_demodulate(rx, p)
            est = otfs_equalize_lmmse(y, build_effective_channel(ch, p), var, p)
        decided = qam_demodulate_hard(est.data.reshape(-1, order="F"), mod_order)
        stats.bit_errors += int(np.count_nonzero(decided != bits))
        stats.bits += bits.size
        stats.frames += 1
    return stats


def synthesize_echo(
    speed_ms: float,
    sp: LinkParams,
    pilot: PilotFrame,
    snr_db: float,
    rng: np.random.Generator,
) -> tuple[DDGrid, PathSpec]:
    """Received DD grid for one moving reflector (two-way delay and Doppler).

    The reflector gets a random phase and a random round-trip delay inside the
    sensing CP.  Noise is referenced to the transmitted pilot power.
    """
    nu = 2 * sp.f_c * speed_ms / sp.c0
    tau = rng.uniform(0.0, (sp.cp_len + 0.49) * sp.T_s)
    gain = np.exp(2j * np.pi * rng.uniform())
    path = PathSpec(gain, tau, nu)
    tx = otfs_modulate(pilot.dd, sp)
    tx_power = float(np.mean(np.abs(tx.samples) ** 2))
    rx = add_awgn(apply_channel(tx, realize([path], sp), sp), snr_db, rng, signal_power=tx_power)
    return otfs_demodulate(rx, sp), path


@dataclass(frozen=True)
class SpeedReading:
    v_hat: float
    failed: bool
    ops: OpCounter


def sense_speed(scenario: LinkScenario, p: LinkParams, rng: np.random.Generator) -> SpeedReading:
    """Run one sensing frame at the scenario's true speed and estimate |v|."""
    sp = scenario.sensing_params(p)
    pilot = PilotFrame.impulse(sp)
    snr = math.inf if scenario.noiseless else scenario.sensing_snr_db
    y, _ = synthesize_echo(scenario.speed_kmh / 3.6, sp, pilot, snr, rng)
    with counting() as ops:
        found = estimate_targets(y, pilot, sp, scenario.max_targets, scenario.stop_ratio, scenario.tol_bins)
    if not found or not found[0].converged:
        log.warning("sensing did not converge at %.1f km/h; falling back to OFDM", scenario.speed_kmh)
        return SpeedReading(0.0, True, ops)
    return SpeedReading(abs(found[0].v_hat), False, ops)


def _data_seeds(seed) -> tuple[np.random.Generator, np.random.Generator]:
    # explicit spawn keys: spawning from a shared SeedSequence would mutate it
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    data_ss, sense_ss = (np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (i,)) for i in (0, 1))
    return np.random.default_rng(data_ss), np.random.default_rng(sense_ss)


def run_fixed_link(waveform, scenario: LinkScenario, p: LinkParams, seed) -> LinkReport:
    """Single-waveform reference run drawing data from the same stream as
    :func:`run_adaptive_link` with the same seed."""
    data_rng, _ = _data_seeds(seed)
    snr = math.inf if scenario.noiseless else scenario.snr_db
    st = run_data_frames(
        waveform, scenario.frames, scenario.speed_kmh / 3.6, snr, scenario.mod_order, p, data_rng,
        scenario.channel, scenario.taps, scenario.csi,
    )
    return LinkReport(WaveformChoice(waveform), math.nan, scenario.speed_kmh / 3.6, st.bit_errors, st.bits,
                      st.frames, ops={"data": st.ops})


def run_adaptive_link(
    scenario: LinkScenario,
    p: LinkParams,
    policy: SwitchPolicy,
    seed,
    previous: WaveformChoice | None = None,
) -> LinkReport:
    """Sense, pick a waveform, then carry ``scenario.frames`` data frames.

    ``seed`` (int or ``SeedSequence``) is split into independent data and
    sensing streams, so the data path is bit-identical to
    :func:`run_fixed_link` whenever the same waveform is chosen.
    """
    data_rng, sense_rng = _data_seeds(seed)
    reading = sense_speed(scenario, p, sense_rng)
    choice = WaveformChoice.OFDM if reading.failed else select_waveform(reading.v_hat, policy, previous)
    snr = math.inf if scenario.noiseless else scenario.snr_db
    st = run_data_frames(
        choice, scenario.frames, scenario.speed_kmh / 3.6, snr, scenario.mod_order, p, data_rng,
        scenario.channel, scenario.taps, scenario.csi,
    )
    return LinkReport(choice, reading.v_hat, scenario.speed_kmh / 3.6, st.bit_errors, st.bits, st.frames,
                      reading.failed, {"sensing": reading.ops, "data": st.ops})
