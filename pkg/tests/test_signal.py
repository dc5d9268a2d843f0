import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbcom.signal import (
    FilterKind,
    FilterSpec,
    Spectrum,
    apply_bandpass,
    apply_lowpass,
    spectrum_of,
    wavelength_linewidth,
)

from conftest import FS, envelope, real, tone


def direct_dft_power(x):
    """O(N^2) DFT, independent of numpy.fft."""
    n = len(x)
    k = np.arange(n)
    basis = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return np.abs(basis @ x) ** 2 / n ** 2, np.where(k < (n + 1) // 2, k, k - n) * FS / n


class TestSpectrum:
    def test_dc_only(self):
        spec = spectrum_of(envelope(np.ones(1024)), 256)
        assert spec.total_power == pytest.approx(1.0, rel=1e-12)
        assert spec.power[spec.offsets_hz == 0][0] >= 0.999 * spec.total_power

    def test_tone_peak(self):
        spec = spectrum_of(envelope(tone(20e9, 2000)), 1000)
        assert spec.peak_offset_hz() == pytest.approx(20e9)

    def test_two_tones_match_direct_dft(self):
        x = tone(15e9, 400) + tone(-15e9, 400)
        oracle_power, oracle_freqs = direct_dft_power(x)
        share = oracle_power / oracle_power.sum()
        for f in (15e9, -15e9):
            assert share[np.isclose(oracle_freqs, f)][0] == pytest.approx(0.5, rel=0.01)

        spec = spectrum_of(envelope(x), 200)
        for f in (15e9, -15e9):
            got = spec.power[np.isclose(spec.offsets_hz, f)][0] / spec.total_power
            assert got == pytest.approx(0.5, rel=0.01)

    def test_empty_signal(self):
        with pytest.raises(ValueError, match="empty signal"):
            spectrum_of(envelope([]), 1)

    def test_segment_longer_than_record(self):
        with pytest.raises(ValueError):
            spectrum_of(envelope(np.ones(8)), 16)

    def test_frequencies_increase(self, rng):
        spec = spectrum_of(envelope(rng.normal(size=300)), 64)
        assert np.all(np.diff(spec.offsets_hz) > 0)
        assert isinstance(spec, Spectrum)

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(8, 600), seg=st.integers(1, 600), seed=st.integers(0, 2**31),
           window=st.sampled_from(["boxcar", "hann"]))
    def test_parseval(self, n, seg, seed, window):
        seg = min(seg, n)
        g = np.random.default_rng(seed)
        x = g.normal(size=n) + 1j * g.normal(size=n)
        spec = spectrum_of(envelope(x), seg, window)
        assert spec.total_power == pytest.approx(np.mean(np.abs(x) ** 2), rel=1e-6)
        assert spec.total_power == pytest.approx(np.sum(spec.power), rel=1e-9)


class TestBandpass:
    def test_carrier_passes(self):
        env = envelope(np.full(1000, 2.0))
        out = apply_bandpass(env, FilterSpec(20e9))
        assert out.mean_power == pytest.approx(env.mean_power, rel=1e-6)
        assert out.sample_rate_hz == env.sample_rate_hz
        assert out.center_freq_hz == env.center_freq_hz

    def test_out_of_band_tone_rejected(self):
        env = envelope(tone(25e9, 1000))
        out = apply_bandpass(env, FilterSpec(20e9))
        assert out.mean_power <= 1e-10 * env.mean_power

    def test_modulated_beam_keeps_only_carrier(self):
        # carrier plus sidebands spread over +-[10, 30] GHz; f_b = 10 GHz, f_o = 20 GHz
        n = 4000
        x = np.ones(n, dtype=complex)
        for f in np.arange(10e9, 30e9 + 1, 1e9):
            x += 0.05 * (tone(f, n) + tone(-f, n))
        out = apply_bandpass(envelope(x), FilterSpec(20e9))
        spec = spectrum_of(out, n)
        residual = spec.total_power - spec.band_power(-1, 1)
        assert residual <= 1e-8 * spec.total_power
        assert spec.band_power(-1, 1) == pytest.approx(1.0, rel=1e-9)

    def test_edge_line_rejected(self):
        out = apply_bandpass(envelope(tone(10e9, 1000)), FilterSpec(20e9))
        assert out.mean_power < 1e-20

    def test_beyond_nyquist(self):
        with pytest.raises(ValueError, match="filter exceeds Nyquist band"):
            apply_bandpass(envelope(np.ones(16)), FilterSpec(250e9))

    def test_butterworth_half_power_at_edge(self):
        spec = FilterSpec(20e9, order=3, kind="butterworth_magnitude")
        assert spec.kind is FilterKind.BUTTERWORTH_MAGNITUDE
        assert spec.magnitude(np.array([10e9]))[0] ** 2 == pytest.approx(0.5)
        assert spec.magnitude(np.array([0.0]))[0] == 1.0

    @pytest.mark.parametrize("kwargs", [dict(bandwidth_hz=0), dict(bandwidth_hz=1e9, order=0)])
    def test_invalid_spec(self, kwargs):
        with pytest.raises(ValueError):
            FilterSpec(**kwargs)

    def test_idempotent(self, rng):
        env = envelope(rng.normal(size=512) + 1j * rng.normal(size=512))
        once = apply_bandpass(env, FilterSpec(30e9, center_offset_hz=5e9))
        twice = apply_bandpass(once, FilterSpec(30e9, center_offset_hz=5e9))
        np.testing.assert_allclose(twice.samples, once.samples, atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31), a=st.floats(-3, 3), b=st.floats(-3, 3),
           kind=st.sampled_from(list(FilterKind)))
    def test_linearity(self, seed, a, b, kind):
        g = np.random.default_rng(seed)
        x = g.normal(size=256) + 1j * g.normal(size=256)
        y = g.normal(size=256) + 1j * g.normal(size=256)
        spec = FilterSpec(40e9, order=2, kind=kind)
        lhs = apply_bandpass(envelope(a * x + b * y), spec).samples
        rhs = a * apply_bandpass(envelope(x), spec).samples + b * apply_bandpass(envelope(y), spec).samples
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * (1 + np.abs(rhs).max()))


class TestLowpass:
    def test_dc_unchanged(self):
        out = apply_lowpass(real(np.full(500, 2.0)), 3e9)
        np.testing.assert_allclose(out.samples, 2.0, atol=1e-12)

    def test_inband_tone_passes(self):
        t = np.arange(1000) / FS
        out = apply_lowpass(real(np.cos(2 * np.pi * 5e9 * t)), 10e9)
        assert np.max(np.abs(out.samples)) >= 0.99

    def test_out_of_band_tone_removed(self):
        t = np.arange(1000) / FS
        x = np.cos(2 * np.pi * 35e9 * t)
        out = apply_lowpass(real(x), 10e9)
        assert np.mean(out.samples ** 2) <= 1e-10 * np.mean(x ** 2)

    @pytest.mark.parametrize("cutoff", [0.0, -1.0, 100e9, 150e9])
    def test_cutoff_range(self, cutoff):
        with pytest.raises(ValueError):
            apply_lowpass(real(np.ones(10)), cutoff)


class TestLinewidth:
    def test_20ghz_at_1064nm(self):
        assert wavelength_linewidth(20e9, 1064e-9) == pytest.approx(7.55e-11, rel=1e-3)
        assert abs(wavelength_linewidth(20e9, 1064e-9) * 1e9 - 0.075) < 0.001

    def test_zero_bandwidth(self):
        assert wavelength_linewidth(0.0, 1064e-9) == 0.0

    def test_ten_gigahertz(self):
        # (1.064e-6)^2 * 1e10 / 299792458 by hand
        assert wavelength_linewidth(10e9, 1064e-9) == pytest.approx(3.7763e-11, rel=1e-4)

    @pytest.mark.parametrize("args", [(-1.0, 1e-6), (1e9, 0.0), (1e9, -1e-6)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            wavelength_linewidth(*args)

    @settings(max_examples=50)
    @given(bw=st.floats(1e6, 1e12), lam=st.floats(1e-7, 1e-5), k=st.floats(0.1, 10))
    def test_scaling(self, bw, lam, k):
        base = wavelength_linewidth(bw, lam)
        assert wavelength_linewidth(k * bw, lam) == pytest.approx(k * base, rel=1e-12)
        assert wavelength_linewidth(bw, k * lam) == pytest.approx(k * k * base, rel=1e-12)


def test_envelope_rejects_nan():
    with pytest.raises(ValueError):
        envelope([1.0, np.nan])


def test_envelope_immutable():
    env = envelope(np.ones(4))
    with pytest.raises(ValueError):
        env.samples[0] = 2.0
