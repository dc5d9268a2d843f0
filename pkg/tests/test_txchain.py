import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbcom.signal import spectrum_of
from rbcom.txchain import (
    BasebandConfig,
    ModulatorConfig,
    add_dc_bias,
    build_drive,
    carrier,
    eoam_modulate,
    generate_baseband,
    linearize_drive,
    shift_baseband,
)

from conftest import FS, envelope, real


def rfft_share(x, fs, lo, hi):
    p = np.abs(np.fft.rfft(x)) ** 2
    f = np.fft.rfftfreq(len(x), 1 / fs)
    return p[(f >= lo) & (f <= hi)].sum() / p.sum()


class TestBaseband:
    def test_ook_all_ones_is_constant(self):
        cfg = BasebandConfig(scheme="OOK", pulse="rect", amplitude_volts=0.7, symbol_rate_hz=5e9)
        wave, sym = generate_baseband(cfg, 6, symbols=np.ones(6, dtype=int))
        np.testing.assert_allclose(wave.samples, 0.7)
        assert len(wave) == 6 * 40

    def test_pam4_levels_in_order(self):
        cfg = BasebandConfig(scheme="PAM4", pulse="rect", amplitude_volts=1.0, symbol_rate_hz=5e9)
        wave, _ = generate_baseband(cfg, 4, symbols=[0, 1, 2, 3])
        held = wave.samples.reshape(4, -1)
        np.testing.assert_allclose(held[:, 0], [-1, -1 / 3, 1 / 3, 1])
        assert np.all(held == held[:, :1])

    def test_raised_cosine_occupied_band(self):
        cfg = BasebandConfig(symbol_rate_hz=8e9, rolloff=0.25, bandwidth_hz=10e9, seed=3)
        wave, _ = generate_baseband(cfg, 1000)
        spec = spectrum_of(envelope(wave.samples), len(wave))
        inside = spec.band_power(-cfg.bandwidth_hz, cfg.bandwidth_hz) / spec.total_power
        assert inside >= 0.99
        # the pulse itself occupies (1 + rolloff) * Rs / 2 = 5 GHz
        assert spec.band_power(-5e9, 5e9) / spec.total_power >= 0.99

    def test_symbols_sit_on_levels(self):
        cfg = BasebandConfig(seed=9)
        wave, sym = generate_baseband(cfg, 300, guard_symbols=4)
        sps = cfg.samples_per_symbol
        picks = wave.samples[(4 + np.arange(300)) * sps]
        np.testing.assert_allclose(picks, cfg.levels[sym], atol=1e-9)

    def test_pam4_zero_mean(self):
        wave, _ = generate_baseband(BasebandConfig(seed=4, preamble=False), 20000)
        assert abs(np.mean(wave.samples)) < 0.01 * np.std(wave.samples)

    def test_exceeds_fb(self):
        with pytest.raises(ValueError, match="baseband exceeds f_b"):
            generate_baseband(BasebandConfig(symbol_rate_hz=20e9, bandwidth_hz=10e9), 10)

    def test_deterministic(self):
        a, sa = generate_baseband(BasebandConfig(seed=5), 200)
        b, sb = generate_baseband(BasebandConfig(seed=5), 200)
        c, _ = generate_baseband(BasebandConfig(seed=6), 200)
        np.testing.assert_array_equal(a.samples, b.samples)
        np.testing.assert_array_equal(sa, sb)
        assert not np.array_equal(a.samples, c.samples)

    def test_preamble_prefix(self):
        from rbcom.txchain import PREAMBLE
        _, sym = generate_baseband(BasebandConfig(scheme="OOK", seed=1), 100)
        np.testing.assert_array_equal(sym[:32], PREAMBLE)


class TestShift:
    def test_tone_splits_into_two_lines(self):
        n = 2000
        t = np.arange(n) / FS
        out = shift_baseband(real(np.cos(2 * np.pi * 3e9 * t)), 20e9)
        amp = np.abs(np.fft.rfft(out.samples)) * 2 / n
        f = np.fft.rfftfreq(n, 1 / FS)
        assert amp[np.isclose(f, 17e9)][0] == pytest.approx(0.5, rel=1e-9)
        assert amp[np.isclose(f, 23e9)][0] == pytest.approx(0.5, rel=1e-9)
        others = np.delete(amp, np.where(np.isclose(f, 17e9) | np.isclose(f, 23e9)))
        assert others.max() < 1e-9

    def test_dc_becomes_lo(self):
        n = 1000
        out = shift_baseband(real(np.ones(n)), 20e9)
        np.testing.assert_allclose(out.samples, np.cos(2 * np.pi * 20e9 * np.arange(n) / FS), atol=1e-12)

    def test_band_placement(self):
        cfg = BasebandConfig(seed=2)
        wave, _ = generate_baseband(cfg, 800)
        out = shift_baseband(wave, 20e9, cfg.bandwidth_hz)
        assert rfft_share(out.samples, FS, 10e9, 30e9) >= 0.99
        assert rfft_share(out.samples, FS, 0, 10e9 * 0.999) < 1e-6

    def test_nyquist(self):
        with pytest.raises(ValueError):
            shift_baseband(real(np.ones(100)), 95e9, 10e9)

    def test_lo_must_exceed_band(self):
        with pytest.raises(ValueError):
            shift_baseband(real(np.ones(100)), 5e9, 10e9)


class TestBias:
    def test_raises_to_positive(self):
        x = np.sin(np.linspace(0, 20, 400))
        out = add_dc_bias(real(x), 1.0)
        assert out.samples.min() >= 0 and out.samples.max() <= 2

    def test_zero_signal(self):
        np.testing.assert_allclose(add_dc_bias(real(np.zeros(10)), 0.5).samples, 0.5)

    def test_zero_bias_keeps_negative_and_eoam_rejects(self):
        out = add_dc_bias(real([-0.2, 0.3]), 0.0)
        assert out.samples.min() < 0
        with pytest.raises(ValueError, match="EOAM drive must be non-negative"):
            eoam_modulate(envelope(np.ones(2)), out, ModulatorConfig())

    def test_negative_bias(self):
        with pytest.raises(ValueError):
            add_dc_bias(real([0.0]), -1.0)


class TestEoam:
    cfg = ModulatorConfig(v_pi_volts=2.0)

    def test_full_transmission(self):
        beam = envelope(np.full(50, 1.5 + 0.5j))
        out = eoam_modulate(beam, real(np.full(50, 2.0)), self.cfg)
        np.testing.assert_allclose(out.samples, beam.samples, atol=1e-15)

    def test_full_extinction(self):
        out = eoam_modulate(envelope(np.ones(50)), real(np.zeros(50)), self.cfg)
        assert np.all(out.samples == 0)

    def test_pointwise_oracle(self):
        n = 1000
        t = np.arange(n) / FS
        v = 1.0 + 0.05 * np.sin(2 * np.pi * 5e9 * t)
        out = eoam_modulate(envelope(np.full(n, 2.0)), real(v), self.cfg)
        expected = [4.0 * np.sin(np.pi * vi / 4.0) ** 2 for vi in v]
        np.testing.assert_allclose(np.abs(out.samples) ** 2, expected, rtol=1e-12)
        # small-signal depth: d/dv sin^2(pi v/2Vpi) at quarter wave is pi/(2Vpi)
        tone_amp = np.abs(np.fft.rfft(np.abs(out.samples) ** 2))[25] * 2 / n
        assert tone_amp == pytest.approx(4.0 * np.pi * 0.05 / 4.0, rel=1e-3)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            eoam_modulate(envelope(np.ones(3)), real(np.ones(4)), self.cfg)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_passivity(self, seed):
        g = np.random.default_rng(seed)
        beam = envelope(g.normal(size=64) + 1j * g.normal(size=64))
        out = eoam_modulate(beam, real(g.uniform(0, 5, 64)), self.cfg)
        assert np.all(out.power <= beam.power * (1 + 1e-12))
        assert out.mean_power <= beam.mean_power * (1 + 1e-12)


def _section_vc_beam(seed=0, n_symbols=1024, linearize=True):
    bb = BasebandConfig(seed=seed)
    mod = ModulatorConfig(linearize=linearize)
    drive, sym, _ = build_drive(bb, mod, n_symbols)
    beam = eoam_modulate(carrier(len(drive), 1.0, FS), drive, mod)
    return spectrum_of(beam, len(beam))


class TestModulatedSpectrum:
    def test_symmetry(self):
        spec = _section_vc_beam()
        p = spec.power
        f = spec.offsets_hz
        pos = f > 0
        mirror = np.interp(-f[pos], f, p)
        significant = p[pos] > 1e-12 * spec.total_power
        rel = np.abs(p[pos] - mirror)[significant] / np.maximum(p[pos], mirror)[significant]
        assert rel.max() <= 0.01

    def test_gap(self):
        spec = _section_vc_beam()
        carrier_bin = spec.band_power(0, 0)
        sideband = spec.total_power - carrier_bin
        in_gap = spec.band_power(-9e9, 9e9) - carrier_bin
        assert in_gap <= 1e-6 * sideband

    def test_unlinearized_law_leaks_into_gap(self):
        spec = _section_vc_beam(linearize=False)
        carrier_bin = spec.band_power(0, 0)
        in_gap = spec.band_power(-9e9, 9e9) - carrier_bin
        assert in_gap > 1e-6 * (spec.total_power - carrier_bin)

    def test_linearized_field_is_affine_in_drive(self):
        mod = ModulatorConfig()
        ac = 0.1 * np.sin(np.linspace(0, 30, 500))
        v = linearize_drive(real(0.5 + ac), mod)
        field = np.sqrt(np.sin(np.pi * v.samples / 2) ** 2)
        np.testing.assert_allclose(field, np.sin(np.pi / 4) + np.pi / 2 * np.cos(np.pi / 4) * ac, atol=1e-12)
        assert v.samples.min() >= 0
