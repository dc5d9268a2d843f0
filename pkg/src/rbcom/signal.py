"""
Sampled signal containers, spectral estimation and spectral-mask filters.

Optical fields are carried as complex envelopes around an absolute carrier
frequency; electrical signals are plain real sample records. All filters act
by multiplying the FFT of the whole record (cyclic convolution).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if arr.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError("samples must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampledEnvelope:
    """Complex baseband-equivalent optical field, in sqrt(W)."""

    samples: np.ndarray
    sample_rate_hz: float
    center_freq_hz: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(self.samples, complex))
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if self.center_freq_hz < 0:
            raise ValueError("center_freq_hz must be non-negative")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    @property
    def mean_power(self) -> float:
        return float(np.mean(self.power)) if len(self) else 0.0

    def with_samples(self, samples) -> "SampledEnvelope":
        return SampledEnvelope(samples, self.sample_rate_hz, self.center_freq_hz)

    def scaled(self, factor) -> "SampledEnvelope":
        return self.with_samples(self.samples * factor)


@dataclass(frozen=True, eq=False)
class RealSignal:
    """Real-valued electrical signal (volts or amperes)."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(self.samples, float))
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def time_s(self) -> np.ndarray:
        return np.arange(len(self)) / self.sample_rate_hz

    def with_samples(self, samples) -> "RealSignal":
        return RealSignal(samples, self.sample_rate_hz)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Averaged power spectrum; ``power`` is per bin, offsets relative to the carrier."""

    offsets_hz: np.ndarray
    power: np.ndarray
    total_power: float
    resolution_hz: float

    @property
    def psd(self) -> np.ndarray:
        return self.power / self.resolution_hz

    def band_power(self, low_hz: float, high_hz: float, *, inclusive: bool = True) -> float:
        f = self.offsets_hz
        if inclusive:
            mask = (f >= low_hz) & (f <= high_hz)
        else:
            mask = (f > low_hz) & (f < high_hz)
        return float(np.sum(self.power[mask]))

    def peak_offset_hz(self) -> float:
        return float(self.offsets_hz[np.argmax(self.power)])


class FilterKind(str, Enum):
    IDEAL_BRICKWALL = "ideal_brickwall"
    BUTTERWORTH_MAGNITUDE = "butterworth_magnitude"


@dataclass(frozen=True)
class FilterSpec:
    """Optical bandpass filter mask: full bandwidth ``bandwidth_hz`` around ``center_offset_hz``."""

    bandwidth_hz: float
    center_offset_hz: float = 0.0
    order: int = 1
    kind: FilterKind = FilterKind.IDEAL_BRICKWALL

    def __post_init__(self):
        object.__setattr__(self, "kind", FilterKind(self.kind))
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth_hz must be positive")
        if int(self.order) != self.order or self.order < 1:
            raise ValueError("order must be a positive integer")

    def magnitude(self, offsets_hz: np.ndarray) -> np.ndarray:
        """Field (amplitude) response at the given offsets from the envelope center."""
        detune = np.abs(np.asarray(offsets_hz, dtype=float) - self.center_offset_hz)
        if self.kind is FilterKind.IDEAL_BRICKWALL:
            # open interval: a line sitting exactly on the band edge is rejected
            return (detune < self.bandwidth_hz / 2).astype(float)
        x = 2.0 * detune / self.bandwidth_hz
        return 1.0 / np.sqrt(1.0 + x ** (2 * self.order))


def spectrum_of(env: SampledEnvelope, segment_length: int, window: str = "boxcar") -> Spectrum:
    """Welch-averaged periodogram over non-overlapping segments.

    Samples left over after the last full segment only enter through the power
    normalization, which pins ``total_power`` to the time-domain mean power.
    """
    x = np.asarray(env.samples)
    n = len(x)
    if n == 0:
        raise ValueError("empty signal")
    if segment_length < 1 or segment_length > n:
        raise ValueError("segment_length must be in [1, number of samples]")
    n_seg = n // segment_length
    segs = x[: n_seg * segment_length].reshape(n_seg, segment_length)
    if window == "boxcar":
        w = np.ones(segment_length)
    elif window == "hann":
        w = np.hanning(segment_length + 1)[:-1] if segment_length > 1 else np.ones(1)
    else:
        raise ValueError(f"unknown window {window!r}")
    spec = np.fft.fft(segs * w, axis=1)
    power = np.mean(np.abs(spec) ** 2, axis=0) / (segment_length * np.sum(w ** 2))

    mean_power = float(np.mean(np.abs(x) ** 2))
    if window != "boxcar" or n_seg * segment_length != n:
        total = np.sum(power)
        power = power * (mean_power / total) if total > 0 else power

    freqs = np.fft.fftfreq(segment_length, d=1.0 / env.sample_rate_hz)
    order = np.argsort(freqs, kind="stable")
    return Spectrum(
        offsets_hz=freqs[order],
        power=power[order],
        total_power=float(np.sum(power)),
        resolution_hz=env.sample_rate_hz / segment_length,
    )


def apply_bandpass(env: SampledEnvelope, spec: FilterSpec) -> SampledEnvelope:
    if len(env) == 0:
        raise ValueError("empty signal")
    nyquist = env.sample_rate_hz / 2
    if abs(spec.center_offset_hz) + spec.bandwidth_hz / 2 > nyquist:
        raise ValueError("filter exceeds Nyquist band")
    freqs = np.fft.fftfreq(len(env), d=1.0 / env.sample_rate_hz)
    out = np.fft.ifft(np.fft.fft(env.samples) * spec.magnitude(freqs))
    return env.with_samples(out)


def apply_lowpass(
    sig: RealSignal,
    cutoff_hz: float,
    kind: FilterKind | str = FilterKind.IDEAL_BRICKWALL,
    order: int = 4,
) -> RealSignal:
    nyquist = sig.sample_rate_hz / 2
    if not 0 < cutoff_hz < nyquist:
        raise ValueError(f"cutoff {cutoff_hz} Hz outside (0, {nyquist}) Hz")
    if len(sig) == 0:
        raise ValueError("empty signal")
    mask = FilterSpec(bandwidth_hz=2 * cutoff_hz, order=order, kind=kind)
    freqs = np.fft.rfftfreq(len(sig), d=1.0 / sig.sample_rate_hz)
    out = np.fft.irfft(np.fft.rfft(sig.samples) * mask.magnitude(freqs), n=len(sig))
    return sig.with_samples(out)


def wavelength_linewidth(bandwidth_hz: float, carrier_wavelength_m: float) -> float:
    """Spectral width in metres equivalent to ``bandwidth_hz`` at the given wavelength."""
    if bandwidth_hz < 0 or carrier_wavelength_m <= 0:
        raise ValueError("bandwidth and wavelength must be positive")
    return carrier_wavelength_m ** 2 * bandwidth_hz / SPEED_OF_LIGHT


def carrier_wavelength(freq_hz: float) -> float:
    return SPEED_OF_LIGHT / freq_hz
