"""
Transmitter: baseband generation, LO frequency shifting, DC bias and the
electro-optic amplitude modulator (EOAM).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .signal import RealSignal, SampledEnvelope

# Fixed 32-symbol pattern (index into the level alphabet) used for timing and gain training.
PREAMBLE = (1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 0,
            0, 1, 1, 0, 1, 0, 0, 0, 1, 1, 1, 1, 0, 1, 0, 1)


class Scheme(str, Enum):
    OOK = "OOK"
    PAM4 = "PAM4"


class Pulse(str, Enum):
    RECT = "rect"
    RAISED_COSINE = "raised_cosine"


def scheme_levels(scheme: Scheme | str, amplitude: float = 1.0) -> np.ndarray:
    """Ideal voltage level for each symbol index."""
    scheme = Scheme(scheme)
    if scheme is Scheme.OOK:
        return np.array([0.0, amplitude])
    return amplitude * np.array([-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0])


@dataclass(frozen=True)
class BasebandConfig:
    bandwidth_hz: float = 10e9
    symbol_rate_hz: float = 8e9
    scheme: Scheme = Scheme.PAM4
    pulse: Pulse = Pulse.RAISED_COSINE
    rolloff: float = 0.25
    amplitude_volts: float = 0.1
    seed: int = 0
    sample_rate_hz: float = 200e9
    preamble: bool = True

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "pulse", Pulse(self.pulse))
        for name in ("bandwidth_hz", "symbol_rate_hz", "amplitude_volts", "sample_rate_hz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError("rolloff must lie in [0, 1]")

    @property
    def samples_per_symbol(self) -> int:
        sps = self.sample_rate_hz / self.symbol_rate_hz
        if abs(sps - round(sps)) > 1e-9 * sps:
            raise ValueError("sample_rate_hz must be an integer multiple of symbol_rate_hz")
        return int(round(sps))

    @property
    def nominal_bandwidth_hz(self) -> float:
        """One-sided occupied bandwidth of the pulse (first null for rect)."""
        if self.pulse is Pulse.RECT:
            return self.symbol_rate_hz
        return (1.0 + self.rolloff) * self.symbol_rate_hz / 2.0

    @property
    def levels(self) -> np.ndarray:
        return scheme_levels(self.scheme, self.amplitude_volts)

    @property
    def bits_per_symbol(self) -> int:
        return 1 if self.scheme is Scheme.OOK else 2


@dataclass(frozen=True)
class ModulatorConfig:
    """EOAM drive settings. ``linearize`` predistorts the drive so the field
    transmittance follows the small-signal tangent of the modulator law."""

    lo_freq_hz: float = 20e9
    dc_bias_volts: float = 0.5
    v_pi_volts: float = 1.0
    backward_modulation: bool = True
    linearize: bool = True
    lo_phase_rad: float = 0.0

    def __post_init__(self):
        if not self.lo_freq_hz > 0:
            raise ValueError("lo_freq_hz must be positive")
        if not self.v_pi_volts > 0:
            raise ValueError("v_pi_volts must be positive")
        if self.dc_bias_volts < 0:
            raise ValueError("dc_bias_volts must be non-negative")


def _raised_cosine_response(freqs: np.ndarray, symbol_rate: float, rolloff: float) -> np.ndarray:
    f = np.abs(freqs)
    edge_lo = (1.0 - rolloff) * symbol_rate / 2.0
    edge_hi = (1.0 + rolloff) * symbol_rate / 2.0
    h = np.where(f <= edge_lo, 1.0, 0.0)
    if rolloff > 0:
        band = (f > edge_lo) & (f < edge_hi)
        h[band] = 0.5 * (1.0 + np.cos(np.pi / (rolloff * symbol_rate) * (f[band] - edge_lo)))
    return h


def draw_symbols(cfg: BasebandConfig, n_symbols: int) -> np.ndarray:
    """Preamble followed by seeded random payload, ``n_symbols`` in total."""
    m = len(cfg.levels)
    rng = np.random.default_rng(cfg.seed)
    symbols = rng.integers(0, m, n_symbols)
    if cfg.preamble:
        pre = np.array(PREAMBLE[: min(n_symbols, len(PREAMBLE))])
        # PAM4 preamble uses the outer levels only
        symbols[: len(pre)] = pre * (m - 1)
    return symbols


def generate_baseband(cfg: BasebandConfig, n_symbols: int, symbols=None, guard_symbols: int = 0):
    """Return ``(waveform, symbols)``.

    Rect pulses hold each level for a full symbol period. Raised-cosine pulses
    are applied in the frequency domain over the whole record, so the symbol
    peaks sit at ``(guard_symbols + k) * samples_per_symbol``. Guard intervals
    are zero-volt periods on both ends that keep the cyclic pulse tails from
    wrapping around.
    """
    if cfg.nominal_bandwidth_hz > cfg.bandwidth_hz * (1 + 1e-12):
        raise ValueError("baseband exceeds f_b")
    if symbols is None:
        if n_symbols < 1:
            raise ValueError("n_symbols must be >= 1")
        symbols = draw_symbols(cfg, n_symbols)
    symbols = np.asarray(symbols, dtype=int)
    if symbols.ndim != 1 or len(symbols) < 1:
        raise ValueError("need at least one symbol")
    levels = cfg.levels
    if symbols.min() < 0 or symbols.max() >= len(levels):
        raise ValueError("symbol index outside the level alphabet")

    if guard_symbols < 0:
        raise ValueError("guard_symbols must be >= 0")
    sps = cfg.samples_per_symbol
    values = np.concatenate([np.zeros(guard_symbols), levels[symbols], np.zeros(guard_symbols)])
    if cfg.pulse is Pulse.RECT:
        wave = np.repeat(values, sps)
    else:
        impulses = np.zeros(len(values) * sps)
        impulses[::sps] = values * sps
        freqs = np.fft.fftfreq(len(impulses), d=1.0 / cfg.sample_rate_hz)
        h = _raised_cosine_response(freqs, cfg.symbol_rate_hz, cfg.rolloff)
        wave = np.real(np.fft.ifft(np.fft.fft(impulses) * h))
    return RealSignal(wave, cfg.sample_rate_hz), symbols


def occupied_bandwidth(sig: RealSignal, fraction: float = 0.99) -> float:
    """Smallest one-sided frequency below which ``fraction`` of the power lies."""
    spec = np.abs(np.fft.rfft(sig.samples)) ** 2
    spec[1:] *= 2.0
    total = spec.sum()
    if total == 0:
        return 0.0
    freqs = np.fft.rfftfreq(len(sig), d=1.0 / sig.sample_rate_hz)
    idx = int(np.searchsorted(np.cumsum(spec), fraction * total))
    return float(freqs[min(idx, len(freqs) - 1)])


def shift_baseband(bb: RealSignal, lo_freq_hz: float, bandwidth_hz: float | None = None,
                   phase_rad: float = 0.0) -> RealSignal:
    """Mix the baseband up to ``lo_freq_hz``: b(t) * cos(2 pi f_o t + phase)."""
    bw = occupied_bandwidth(bb) if bandwidth_hz is None else bandwidth_hz
    if lo_freq_hz + bw >= bb.sample_rate_hz / 2:
        raise ValueError("shifted signal violates Nyquist")
    if lo_freq_hz <= bw:
        raise ValueError("lo_freq_hz must exceed the baseband bandwidth")
    lo = np.cos(2 * np.pi * lo_freq_hz * bb.time_s + phase_rad)
    return bb.with_samples(bb.samples * lo)


def add_dc_bias(shifted: RealSignal, bias_volts: float) -> RealSignal:
    if bias_volts < 0:
        raise ValueError("bias must be non-negative")
    return shifted.with_samples(shifted.samples + bias_volts)


def eoam_transmittance(v, v_pi: float) -> np.ndarray:
    """Power transmittance sin^2(pi v / (2 V_pi))."""
    return np.sin(np.pi * np.asarray(v, dtype=float) / (2.0 * v_pi)) ** 2


def linearize_drive(biased: RealSignal, cfg: ModulatorConfig) -> RealSignal:
    """Predistort a biased drive so sqrt(T) is linear in the AC part.

    The field transmittance is set to the tangent line of sin(pi v / 2V_pi) at
    the bias point and mapped back through arcsin; output stays non-negative.
    """
    theta0 = np.pi * cfg.dc_bias_volts / (2.0 * cfg.v_pi_volts)
    slope = np.pi / (2.0 * cfg.v_pi_volts) * np.cos(theta0)
    target = np.sin(theta0) + slope * (biased.samples - cfg.dc_bias_volts)
    target = np.clip(target, 0.0, 1.0)
    return biased.with_samples(2.0 * cfg.v_pi_volts / np.pi * np.arcsin(target))


def eoam_modulate(beam: SampledEnvelope, drive: RealSignal, cfg: ModulatorConfig) -> SampledEnvelope:
    if len(beam) != len(drive):
        raise ValueError("beam and drive lengths differ")
    if beam.sample_rate_hz != drive.sample_rate_hz:
        raise ValueError("beam and drive sample rates differ")
    if np.any(drive.samples < 0):
        raise ValueError("EOAM drive must be non-negative")
    t = eoam_transmittance(drive.samples, cfg.v_pi_volts)
    return beam.with_samples(beam.samples * np.sqrt(t))


def build_drive(bb_cfg: BasebandConfig, mod_cfg: ModulatorConfig, n_symbols: int, symbols=None,
                guard_symbols: int = 16):
    """Full modulation chain up to the EOAM voltage.

    Returns ``(drive, symbols, baseband)``.
    """
    if mod_cfg.lo_freq_hz <= bb_cfg.bandwidth_hz:
        raise ValueError("lo_freq_hz must exceed the baseband bandwidth f_b")
    bb, symbols = generate_baseband(bb_cfg, n_symbols, symbols, guard_symbols)
    shifted = shift_baseband(bb, mod_cfg.lo_freq_hz, bb_cfg.nominal_bandwidth_hz, mod_cfg.lo_phase_rad)
    drive = add_dc_bias(shifted, mod_cfg.dc_bias_volts)
    if mod_cfg.linearize:
        drive = linearize_drive(drive, mod_cfg)
    return drive, symbols, bb


def carrier(n_samples: int, power_w: float, sample_rate_hz: float, center_freq_hz: float = 282e12) -> SampledEnvelope:
    return SampledEnvelope(np.full(n_samples, np.sqrt(power_w), dtype=complex), sample_rate_hz, center_freq_hz)
