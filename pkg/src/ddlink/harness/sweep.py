"""Seeded, parallel Monte Carlo BER sweep.

Cells are the (speed, SNR) pairs in row-major order of the scenario lists.
Cell ``i`` draws all of its randomness from ``splitmix64(seed, i)``, and
results are merged by cell index, so the table does not depend on the number
of workers or on completion order.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor

from ..controller import (
    FrameStats,
    SwitchPolicy,
    WaveformChoice,
    _data_seeds,
    run_data_frames,
    select_waveform,
    sense_speed,
)
from ..opcount import OpCounter
from .config import Scenario
from .results import BerRow, BerTable

log = logging.getLogger(__name__)

_MASK = (1 << 64) - 1


def splitmix64(master: int, index: int) -> int:
    """SplitMix64 output for state ``master + (index + 1) * golden_gamma``."""
    z = (master + (index + 1) * 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def cells(s: Scenario) -> list[tuple[int, float, float]]:
    return [
        (i * len(s.snr_db) + j, v, snr)
        for i, v in enumerate(s.speeds_kmh)
        for j, snr in enumerate(s.snr_db)
    ]


def run_cell(s: Scenario, index: int, speed_kmh: float, snr_db: float) -> BerRow:
    seed = splitmix64(s.seed, index)
    data_rng, sense_rng = _data_seeds(seed)
    snr = math.inf if s.noiseless else snr_db
    ls = s.link_scenario(speed_kmh, snr_db)
    policy = SwitchPolicy.from_kmh(s.threshold_kmh, s.hysteresis_kmh)
    total = FrameStats()
    ops = OpCounter()
    otfs_frames = 0
    previous = None
    while total.bits < s.min_bits:
        if s.waveform == "hybrid":
            reading = sense_speed(ls, s.link, sense_rng)
            ops.add(reading.ops)
            choice = WaveformChoice.OFDM if reading.failed else select_waveform(reading.v_hat, policy, previous)
            previous = choice
        else:
            choice = WaveformChoice(s.waveform)
        batch = run_data_frames(
            choice, s.frames, speed_kmh / 3.6, snr, s.mod_order, s.link, data_rng, s.channel, s.taps, s.csi
        )
        if choice is WaveformChoice.OTFS:
            otfs_frames += batch.frames
        total.add(batch)
    ops.add(total.ops)
    log.debug("cell %d (%.1f km/h, %.1f dB): %d/%d", index, speed_kmh, snr_db, total.bit_errors, total.bits)
    return BerRow(
        waveform=s.waveform,
        speed_kmh=float(speed_kmh),
        mod_order=s.mod_order,
        snr_db=float(snr),
        bits=total.bits,
        bit_errors=total.bit_errors,
        ber=total.bit_errors / total.bits,
        frames=total.frames,
        seed=seed,
        otfs_frames=otfs_frames,
        complex_mults=ops.complex_mults,
        fft_calls=ops.fft_calls,
    )


def _run_cell_args(args):
    return run_cell(*args)


def run_ber_sweep(s: Scenario, workers: int = 1) -> BerTable:
    """Run every (speed, SNR) cell of ``s``; ``workers > 1`` uses processes."""
    jobs = [(s, i, v, snr) for i, v, snr in cells(s)]
    if workers <= 1 or len(jobs) <= 1:
        rows = [run_cell(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell_args, jobs))
    # pool.map yields in submission order, i.e. by cell index
    return BerTable(tuple(rows))


def run_sensing_trials(s: Scenario, speed_kmh: float | None = None, trials: int | None = None) -> dict:
    """Speed-estimation accuracy over seeded single-target echoes."""
    speed_kmh = s.sensing.speed_kmh if speed_kmh is None else speed_kmh
    trials = s.sensing.trials if trials is None else trials
    ls = s.link_scenario(speed_kmh, math.inf)
    errors, failures = [], 0
    for i in range(trials):
        _, sense_rng = _data_seeds(splitmix64(s.seed, i))
        reading = sense_speed(ls, s.link, sense_rng)
        if reading.failed:
            failures += 1
            continue
        errors.append(abs(reading.v_hat * 3.6 - speed_kmh) / speed_kmh if speed_kmh else reading.v_hat * 3.6)
    return {
        "speed_kmh": speed_kmh,
        "sensing_snr_db": s.sensing.snr_db,
        "trials": trials,
        "failures": failures,
        "mean_rel_error": sum(errors) / len(errors) if errors else math.nan,
        "max_rel_error": max(errors, default=math.nan),
    }
