import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddlink.channel import (
    EVA_POWERS_DB,
    PathSpec,
    add_awgn,
    apply_channel,
    default_cp_len,
    discrete_delay,
    fold_doppler,
    freq_response,
    make_eva_profile,
    make_profile,
    profile_delays,
    realize,
)
from ddlink.core import LinkParams, TimeSignal
from ddlink.errors import InvalidArgumentError, PreconditionError


def sig(rng, n=136):
    return TimeSignal(rng.standard_normal(n) + 1j * rng.standard_normal(n))


class TestEVA:
    def test_static_has_no_doppler(self, p):
        ch = make_eva_profile(0.0, p, 1)
        assert len(ch.paths) == 9
        assert all(path.doppler == 0.0 for path in ch.paths)

    def test_max_doppler_at_500kmh(self, p):
        # 0.95e9 * 138.889 / 2.99792458e8 = 440.119 Hz
        nu_max = 0.95e9 * (500 / 3.6) / 2.99792458e8
        assert nu_max == pytest.approx(440.119, abs=1e-3)
        for seed in range(20):
            ch = make_eva_profile(500 / 3.6, p, seed)
            assert max(abs(path.doppler) for path in ch.paths) <= 440.12

    def test_profile_normalized(self):
        powers = 10 ** (np.array(EVA_POWERS_DB) / 10)
        assert np.sum(powers / powers.sum()) == pytest.approx(1.0, abs=1e-12)

    def test_reproducible_from_seed(self, p):
        a, b = make_eva_profile(100.0, p, 42), make_eva_profile(100.0, p, 42)
        assert a == b and a.seed == 42

    def test_delays_quantize_to_one_sample(self, p):
        ch = make_eva_profile(0.0, p, 0)
        assert ch.discrete_delays == (0, 0, 0, 0, 0, 0, 0, 0, 1)
        assert default_cp_len(profile_delays("eva"), p) == 1

    def test_negative_speed(self, p):
        with pytest.raises(InvalidArgumentError):
            make_eva_profile(-1.0, p)

    def test_mean_gain_power(self, p):
        rng = np.random.default_rng(0)
        total = [sum(abs(path.gain) ** 2 for path in make_eva_profile(0.0, p, rng).paths) for _ in range(4000)]
        assert np.mean(total) == pytest.approx(1.0, abs=0.05)


def test_profiles(p):
    sp = make_profile("single_path", 100.0, p)
    assert len(sp.paths) == 1 and sp.paths[0].doppler == pytest.approx(p.f_c * 100 / p.c0)
    custom = make_profile("custom", 0.0, p, 3, taps=[(0, 0), (4000, -3)])
    assert custom.discrete_delays == (0, 1)
    with pytest.raises(InvalidArgumentError):
        make_profile("custom", 0.0, p, 3)
    with pytest.raises(InvalidArgumentError):
        make_profile("tdl-z", 0.0, p)


class TestApplyChannel:
    def test_identity(self, p, rng):
        s = sig(rng)
        out = apply_channel(s, realize([PathSpec(1, 0, 0)], p), p)
        np.testing.assert_array_equal(out.samples, s.samples)

    def test_pure_delay(self, rng):
        p = LinkParams(cp_len=3)
        s = sig(rng, p.frame_len)
        out = apply_channel(s, realize([PathSpec(1, 3 * p.T_s, 0)], p), p).samples
        np.testing.assert_array_equal(out[:3], 0)
        np.testing.assert_allclose(out[3:], s.samples[:-3])

    def test_pure_doppler(self, p, rng):
        s = sig(rng)
        nu = 321.0
        out = apply_channel(s, realize([PathSpec(1, 0, nu)], p), p).samples
        q = np.arange(s.samples.size)
        np.testing.assert_allclose(out, s.samples * np.exp(2j * np.pi * nu * q * p.T_s), atol=1e-14)

    def test_delay_budget(self, p, rng):
        with pytest.raises(PreconditionError):
            apply_channel(sig(rng), realize([PathSpec(1, 2 * p.T_s, 0)], p), p)

    def test_doppler_region(self, p):
        with pytest.raises(PreconditionError):
            realize([PathSpec(1, 0, 8000.0)], p)
        assert abs(fold_doppler(8000.0, p)) <= p.delta_f / 2

    def test_negative_delay_rejected(self):
        with pytest.raises(InvalidArgumentError):
            PathSpec(1, -1e-9, 0)

    def test_rounding(self, p):
        assert discrete_delay(0.49 * p.T_s, p) == 0
        assert discrete_delay(0.5 * p.T_s, p) == 1
        assert discrete_delay(2510e-9, p) == 1


@settings(max_examples=30, deadline=None)
@given(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    st.integers(0, 2**32 - 1),
)
def test_linearity(a, b, seed):
    p = LinkParams(cp_len=1)
    rng = np.random.default_rng(seed)
    ch = make_eva_profile(100.0, p, rng)
    s1, s2 = sig(rng), sig(rng)
    lhs = apply_channel(TimeSignal(a * s1.samples + b * s2.samples), ch, p).samples
    rhs = a * apply_channel(s1, ch, p).samples + b * apply_channel(s2, ch, p).samples
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + np.max(np.abs(rhs))))


def test_power_conservation_in_expectation(p):
    rng = np.random.default_rng(99)
    ratios = []
    for _ in range(1000):
        s = TimeSignal(np.exp(2j * np.pi * rng.uniform(size=p.frame_len)))
        ch = make_eva_profile(200 / 3.6, p, rng)
        ratios.append(np.mean(np.abs(apply_channel(s, ch, p).samples) ** 2))
    assert 0.9 <= np.mean(ratios) <= 1.1


class TestAWGN:
    def test_noiseless(self, rng):
        s = sig(rng)
        assert add_awgn(s, math.inf, rng) is s

    def test_zero_db_power(self):
        rng = np.random.default_rng(5)
        s = TimeSignal(np.exp(2j * np.pi * rng.uniform(size=1_000_000)))
        noise = add_awgn(s, 0.0, rng).samples - s.samples
        assert 0.97 <= np.mean(np.abs(noise) ** 2) <= 1.03

    def test_deterministic(self, rng):
        s = sig(rng)
        a = add_awgn(s, 7.0, np.random.default_rng(3)).samples
        b = add_awgn(s, 7.0, np.random.default_rng(3)).samples
        assert a.tobytes() == b.tobytes()

    def test_reference_power(self, rng):
        s = TimeSignal(np.full(200_000, 0.1 + 0j))
        noise = add_awgn(s, 10.0, rng, signal_power=1.0).samples - s.samples
        assert np.mean(np.abs(noise) ** 2) == pytest.approx(0.1, rel=0.02)

    def test_empty(self, rng):
        with pytest.raises(InvalidArgumentError):
            add_awgn(TimeSignal(np.zeros(0)), 10, rng)


class TestFreqResponse:
    def test_identity(self, p):
        np.testing.assert_array_equal(freq_response(realize([PathSpec(1, 0, 0)], p), p), np.ones((16, 8)))

    def test_static_delay(self):
        p = LinkParams(cp_len=2)
        tau = 2 * p.T_s
        h = freq_response(realize([PathSpec(1, tau, 0)], p), p)
        m = np.arange(16)[:, None]
        np.testing.assert_allclose(h, np.repeat(np.exp(-2j * np.pi * m * p.delta_f * tau), 8, axis=1), atol=1e-13)

    def test_doppler_frozen_at_symbol_midpoint(self, p):
        nu = 300.0
        h = freq_response(realize([PathSpec(1, 0, nu)], p), p)
        t_mid = (np.arange(8) * 17 + 1 + 7.5) * p.T_s
        np.testing.assert_allclose(h, np.exp(2j * np.pi * nu * t_mid)[None, :].repeat(16, 0), atol=1e-13)

    def test_frame_snapshot_is_constant_over_slots(self, p):
        h = freq_response(make_eva_profile(100.0, p, 4), p, snapshot="frame")
        np.testing.assert_allclose(h, h[:, :1].repeat(8, 1))
        with pytest.raises(InvalidArgumentError):
            freq_response(make_eva_profile(100.0, p, 4), p, snapshot="slot")
