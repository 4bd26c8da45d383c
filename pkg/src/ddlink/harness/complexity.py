"""Instrumented operation counts for one OFDM frame, one OTFS frame and one MF-F estimate."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..channel import PathSpec, apply_channel, realize
from ..core import DDGrid, LinkParams, TFGrid
from ..ofdm import ofdm_demodulate, ofdm_modulate
from ..opcount import counting
from ..otfs import otfs_demodulate, otfs_modulate
from ..sensing import PilotFrame, estimate_targets

RATIO_TOLERANCE = 0.25


@dataclass(frozen=True)
class FrameCounts:
    M: int
    N: int
    log2_MN: float
    ofdm_frame: int
    otfs_frame: int
    mf_f: int
    ofdm_fft_calls: int
    otfs_fft_calls: int
    mf_f_fft_calls: int


@dataclass(frozen=True)
class ScalingCheck:
    name: str
    measured: float
    predicted: float
    model: str

    @property
    def relative_error(self) -> float:
        return abs(self.measured - self.predicted) / self.predicted

    @property
    def ok(self) -> bool:
        return self.relative_error <= RATIO_TOLERANCE


@dataclass(frozen=True)
class ComplexityReport:
    base: FrameCounts
    doubled: FrameCounts
    checks: tuple[ScalingCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "base": asdict(self.base),
            "doubled": asdict(self.doubled),
            "checks": [dict(asdict(c), relative_error=c.relative_error, ok=c.ok) for c in self.checks],
            "ok": self.ok,
        }


def ofdm_frame_mults(M: int, N: int) -> int:
    """Radix-2 count for N size-M transforms at each end of the link."""
    return int(2 * N * (M / 2) * math.log2(M))


def measure(p: LinkParams, tol_bins: float = 1e-3) -> FrameCounts:
    grid = np.ones((p.M, p.N), dtype=np.complex128)
    with counting() as ofdm_ops:
        ofdm_demodulate(ofdm_modulate(TFGrid(grid), p), p)
    with counting() as otfs_ops:
        otfs_demodulate(otfs_modulate(DDGrid(grid), p), p)

    # noiseless target at a fixed fractional cell position
    sp = p.with_cp(p.M - 1)
    pilot = PilotFrame.impulse(sp)
    path = PathSpec(1.0, 2 * sp.T_s, 0.37 * sp.doppler_resolution)
    y = otfs_demodulate(apply_channel(otfs_modulate(pilot.dd, sp), realize([path], sp), sp), sp)
    with counting() as mf_ops:
        estimate_targets(y, pilot, sp, max_targets=1, tol=tol_bins)
    return FrameCounts(
        p.M, p.N, math.log2(p.M * p.N),
        ofdm_ops.complex_mults, otfs_ops.complex_mults, mf_ops.complex_mults,
        ofdm_ops.fft_calls, otfs_ops.fft_calls, mf_ops.fft_calls,
    )


def count_ops_report(p: LinkParams | None = None) -> ComplexityReport:
    """Counts at ``(M, N)`` and ``(2M, 2N)`` with their predicted growth."""
    p = p or LinkParams()
    q = LinkParams(2 * p.M, 2 * p.N, p.delta_f, p.f_c, p.cp_len)
    a, b = measure(p), measure(q)

    def mn_log(M, N):
        return M * N * math.log2(M * N)

    checks = (
        ScalingCheck("ofdm_frame", b.ofdm_frame / a.ofdm_frame,
                     ofdm_frame_mults(q.M, q.N) / ofdm_frame_mults(p.M, p.N), "N_sym * M log2 M"),
        ScalingCheck("otfs_frame", b.otfs_frame / a.otfs_frame, mn_log(q.M, q.N) / mn_log(p.M, p.N), "MN log2(MN)"),
        ScalingCheck("mf_f", b.mf_f / a.mf_f, mn_log(q.M, q.N) / mn_log(p.M, p.N), "MN log2(MN)"),
    )
    return ComplexityReport(a, b, checks)
