import math

import numpy as np
import pytest

from conftest import random_grid
from ddlink.channel import PathSpec, apply_channel, freq_response, make_eva_profile, realize
from ddlink.core import LinkParams, TFGrid, TimeSignal, qam_demodulate_hard, qam_modulate
from ddlink.errors import InvalidArgumentError
from ddlink.ofdm import ofdm_demodulate, ofdm_equalize_zf, ofdm_modulate


def direct_signal(x, p):
    """Evaluate the multicarrier sum at t = nT + (j - cp) T_s for every on-air sample j."""
    M, N, cp = p.M, p.N, p.cp_len
    out = []
    for n in range(N):
        for j in range(M + cp):
            t_rel = (j - cp) * p.T_s
            out.append(sum(x[m, n] * np.exp(2j * np.pi * m * p.delta_f * t_rel) for m in range(M)) / math.sqrt(M))
    return np.array(out)


def test_dc_subcarrier_is_constant():
    p = LinkParams(cp_len=0)
    x = np.zeros((16, 8), complex)
    x[0, :] = 1
    s = ofdm_modulate(TFGrid(x), p).samples
    np.testing.assert_allclose(s, np.full(128, 1 / 4), atol=1e-15)


def test_cyclic_prefix_copies_tail(rng):
    p = LinkParams(cp_len=4)
    s = ofdm_modulate(TFGrid(random_grid(rng)), p).samples.reshape(8, 20)
    np.testing.assert_array_equal(s[:, :4], s[:, -4:])
    assert ofdm_modulate(TFGrid(random_grid(rng)), p).samples.size == 8 * 20


@pytest.mark.parametrize("cp", [0, 3])
def test_matches_direct_sum(cp, rng):
    p = LinkParams(cp_len=cp)
    x = random_grid(rng)
    np.testing.assert_allclose(ofdm_modulate(TFGrid(x), p).samples, direct_signal(x, p), atol=1e-12)


@pytest.mark.parametrize("cp", [0, 1, 5])
def test_round_trip(cp, rng):
    p = LinkParams(cp_len=cp)
    x = random_grid(rng)
    y = ofdm_demodulate(ofdm_modulate(TFGrid(x), p), p).data
    assert np.linalg.norm(y - x) <= 1e-12 * np.linalg.norm(x)


def test_energy_excluding_cp(rng):
    p = LinkParams(cp_len=3)
    x = random_grid(rng)
    s = ofdm_modulate(TFGrid(x), p).samples.reshape(8, 19)[:, 3:]
    assert np.sum(np.abs(s) ** 2) == pytest.approx(np.sum(np.abs(x) ** 2), rel=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_delay_within_cp_is_phase_slope(d, rng):
    p = LinkParams(cp_len=3)
    x = random_grid(rng)
    s = ofdm_modulate(TFGrid(x), p).samples
    delayed = np.concatenate([np.zeros(d), s[:-d]])
    y = ofdm_demodulate(TimeSignal(delayed), p).data
    m = np.arange(16)[:, None]
    np.testing.assert_allclose(y, x * np.exp(-2j * np.pi * m * d / 16), atol=1e-12)


def test_zero_in_zero_out(p):
    assert not np.any(ofdm_demodulate(TimeSignal(np.zeros(p.frame_len)), p).data)


def test_wrong_length(p):
    with pytest.raises(InvalidArgumentError):
        ofdm_demodulate(TimeSignal(np.zeros(p.frame_len - 1)), p)
    with pytest.raises(InvalidArgumentError):
        ofdm_modulate(TFGrid(np.zeros((8, 8))), p)


class TestZF:
    def test_identity_channel(self, p, rng):
        x = random_grid(rng)
        out, flagged = ofdm_equalize_zf(TFGrid(x), np.ones((16, 8)), p)
        np.testing.assert_array_equal(out.data, x)
        assert flagged == 0

    def test_scalar_channel(self, p, rng):
        x = random_grid(rng)
        out, _ = ofdm_equalize_zf(TFGrid(2 * x), np.full((16, 8), 2.0), p)
        np.testing.assert_allclose(out.data, x, rtol=1e-15)

    def test_tiny_entries_pass_through(self, p, rng):
        x = random_grid(rng)
        h = np.ones((16, 8), complex)
        h[3, 2] = 1e-13
        h[0, 0] = 0
        out, flagged = ofdm_equalize_zf(TFGrid(x), h, p)
        assert flagged == 2
        assert out.data[3, 2] == x[3, 2] and out.data[0, 0] == x[0, 0]

    def test_shape_mismatch(self, p):
        with pytest.raises(InvalidArgumentError):
            ofdm_equalize_zf(TFGrid(np.zeros((16, 8))), np.ones((16, 4)), p)

    def test_static_two_tap_channel_noiseless(self, rng):
        p = LinkParams(cp_len=2)
        ch = realize([PathSpec(0.9, 0.0, 0.0), PathSpec(0.4j, 2 * p.T_s, 0.0)], p)
        errors = bits_total = 0
        while bits_total < 100_000:
            bits = rng.integers(0, 2, 256)
            x = qam_modulate(bits, 4).reshape(16, 8)
            r = apply_channel(ofdm_modulate(TFGrid(x), p), ch, p)
            est, _ = ofdm_equalize_zf(ofdm_demodulate(r, p), freq_response(ch, p), p)
            np.testing.assert_allclose(est.data, x, atol=1e-9)
            errors += np.count_nonzero(qam_demodulate_hard(est.data.ravel(), 4) != bits)
            bits_total += bits.size
        assert errors == 0


def test_static_eva_is_diagonal(p, rng):
    ch = make_eva_profile(0.0, p, rng)
    x = random_grid(rng)
    y = ofdm_demodulate(apply_channel(ofdm_modulate(TFGrid(x), p), ch, p), p).data
    np.testing.assert_allclose(y, freq_response(ch, p) * x, atol=1e-9)
