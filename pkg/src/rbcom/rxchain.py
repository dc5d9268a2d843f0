"""
Receiver: square-law photodetection, DC blocking, coherent down-mixing,
lowpass filtering, symbol decisions and link-quality metrics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cavity import LinkRecord
from .signal import RealSignal, SampledEnvelope, apply_lowpass
from .txchain import PREAMBLE, BasebandConfig, Pulse, Scheme, generate_baseband

# Gray code for the PAM4 symbol indices
_GRAY_BITS = {
    Scheme.OOK: np.array([[0], [1]]),
    Scheme.PAM4: np.array([[0, 0], [0, 1], [1, 1], [1, 0]]),
}


class ThresholdMode(str, Enum):
    MIDPOINT = "midpoint"
    TRAINED = "trained"


@dataclass(frozen=True)
class ReceiverConfig:
    responsivity_a_per_w: float = 1.0
    lo_freq_hz: float = 20e9
    lowpass_cutoff_hz: float = 10e9
    noise_std_a: float = 0.0
    decision_threshold_mode: ThresholdMode = ThresholdMode.TRAINED
    lo_phase_rad: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "decision_threshold_mode", ThresholdMode(self.decision_threshold_mode))
        if not self.responsivity_a_per_w > 0:
            raise ValueError("responsivity_a_per_w must be positive")
        if not self.lo_freq_hz > 0:
            raise ValueError("lo_freq_hz must be positive")
        if not self.lowpass_cutoff_hz > 0:
            raise ValueError("lowpass_cutoff_hz must be positive")
        if self.noise_std_a < 0:
            raise ValueError("noise_std_a must be non-negative")


@dataclass(frozen=True)
class LinkMetrics:
    ber: float
    evm_rms: float
    snr_db: float
    carrier_amp_variance: float = 0.0
    n_symbols: int = 0

    def __post_init__(self):
        if not 0.0 <= self.ber <= 1.0:
            raise ValueError("ber must lie in [0, 1]")
        for name in ("ber", "evm_rms", "snr_db", "carrier_amp_variance"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def photodetect(beam: SampledEnvelope, cfg: ReceiverConfig, seed: int | None = None) -> RealSignal:
    if len(beam) == 0:
        raise ValueError("empty signal")
    current = cfg.responsivity_a_per_w * np.abs(beam.samples) ** 2
    if cfg.noise_std_a > 0:
        rng = np.random.default_rng(cfg.seed if seed is None else seed)
        current = current + rng.normal(0.0, cfg.noise_std_a, len(current))
    return RealSignal(current, beam.sample_rate_hz)


def dc_block(sig: RealSignal) -> RealSignal:
    """Ideal coupling capacitor: removes the record mean and nothing else."""
    if len(sig) == 0:
        raise ValueError("empty signal")
    return sig.with_samples(sig.samples - np.mean(sig.samples))


def downconvert(sig: RealSignal, cfg: ReceiverConfig) -> RealSignal:
    if len(sig) == 0:
        raise ValueError("empty signal")
    lo = np.cos(2 * np.pi * cfg.lo_freq_hz * sig.time_s + cfg.lo_phase_rad)
    return apply_lowpass(sig.with_samples(sig.samples * lo), cfg.lowpass_cutoff_hz)


def receive(beam: SampledEnvelope, cfg: ReceiverConfig, seed: int | None = None) -> RealSignal:
    """photodetect -> dc_block -> downconvert."""
    return downconvert(dc_block(photodetect(beam, cfg, seed)), cfg)


def estimate_delay(recovered: RealSignal, reference: np.ndarray, max_lag: int | None = None) -> int:
    """Lag maximizing |cross-correlation| between the record and a reference waveform."""
    y = recovered.samples
    ref = reference - np.mean(reference)
    if len(ref) > len(y):
        return 0
    corr = np.correlate(y - np.mean(y), ref, mode="valid")
    if max_lag is not None:
        corr = corr[: max_lag + 1]
    return int(np.argmax(np.abs(corr)))


def _refine_lag(y: np.ndarray, coarse: int, train_levels: np.ndarray, sps: int, offset: int) -> int:
    """Pick the lag within half a symbol of ``coarse`` whose samples best track the training levels."""
    best, best_score = coarse, -np.inf
    for lag in range(max(coarse - sps // 2, 0), coarse + sps // 2 + 1):
        idx = lag + offset + sps * np.arange(len(train_levels))
        if idx[-1] >= len(y):
            continue
        samples = y[idx]
        if np.std(samples) == 0 or np.std(train_levels) == 0:
            continue
        score = abs(np.corrcoef(samples, train_levels)[0, 1])
        if score > best_score:
            best, best_score = lag, score
    return best


def _affine_fit(y: np.ndarray, levels: np.ndarray):
    a, c = np.polyfit(levels, y, 1)
    return a, c


def _blind_fit(y: np.ndarray, alphabet: np.ndarray, iterations: int = 50):
    """Decision-directed affine fit with a non-inverting initial guess."""
    lo, hi = np.percentile(y, [1, 99])
    a = (hi - lo) / (alphabet[-1] - alphabet[0]) if hi > lo else 1.0
    c = lo - a * alphabet[0]
    for _ in range(iterations):
        idx = np.argmin(np.abs((y[:, None] - c) / a - alphabet[None, :]), axis=1)
        if len(np.unique(idx)) < 2:
            break
        a_new, c_new = _affine_fit(y, alphabet[idx])
        if a_new == 0 or (a_new == a and c_new == c):
            break
        a, c = a_new, c_new
    return a, c


def decide_and_score(recovered: RealSignal, truth, bb_cfg: BasebandConfig, rx_cfg: ReceiverConfig,
                     warmup_symbols: int = 0, max_lag: int | None = None) -> LinkMetrics:
    """Sample at symbol centres, slice and score against ``truth``.

    Timing comes from the known preamble; the level scale and offset come from
    the preamble (``trained``) or from decision-directed fitting (``midpoint``).
    EVM is normalized by the outer level magnitude.
    """
    truth = np.asarray(truth, dtype=int)
    sps = bb_cfg.samples_per_symbol
    alphabet = bb_cfg.levels
    n_train = min(len(PREAMBLE), len(truth))

    ref, _ = generate_baseband(bb_cfg, n_train, truth[:n_train])
    offset = sps // 2 if bb_cfg.pulse is Pulse.RECT else 0
    lag = _refine_lag(recovered.samples, estimate_delay(recovered, ref.samples, max_lag),
                      alphabet[truth[:n_train]], sps, offset)
    idx = lag + offset + sps * np.arange(len(truth))
    idx = idx[idx < len(recovered)]
    n = len(idx)
    if n - warmup_symbols < 10:
        raise ValueError("record too short")
    y = recovered.samples[idx]
    truth = truth[:n]

    if rx_cfg.decision_threshold_mode is ThresholdMode.TRAINED:
        a, c = _affine_fit(y[:n_train], alphabet[truth[:n_train]])
    else:
        a, c = _blind_fit(y, alphabet)
    if a == 0:
        raise ValueError("degenerate level fit")
    z = (y - c) / a

    if rx_cfg.decision_threshold_mode is ThresholdMode.TRAINED:
        # thresholds halfway between the trained per-level means where available
        means = alphabet.astype(float).copy()
        for k in range(len(alphabet)):
            sel = truth[:n_train] == k
            if np.any(sel):
                means[k] = np.mean(z[:n_train][sel])
        means = np.sort(means)
        thresholds = (means[1:] + means[:-1]) / 2
    else:
        thresholds = (alphabet[1:] + alphabet[:-1]) / 2
    decided = np.searchsorted(thresholds, z)

    keep = slice(warmup_symbols, n)
    bits = _GRAY_BITS[bb_cfg.scheme]
    bit_errors = np.sum(bits[decided[keep]] != bits[truth[keep]])
    ber = float(bit_errors) / (bits.shape[1] * len(truth[keep]))

    ideal = alphabet[truth[keep]]
    err = z[keep] - ideal
    outer = float(np.max(np.abs(alphabet)))
    evm = float(np.sqrt(np.mean(err ** 2))) / outer
    noise_power = max(float(np.mean(err ** 2)), np.finfo(float).tiny)
    signal_power = max(float(np.var(ideal)), np.finfo(float).tiny)
    snr_db = 10 * np.log10(signal_power / noise_power)
    return LinkMetrics(ber=ber, evm_rms=evm, snr_db=float(snr_db), n_symbols=len(ideal))


def carrier_amplitudes(record: LinkRecord, carrier_band_hz: float, which: str = "output") -> np.ndarray:
    """Per-trip field amplitude within +-carrier_band/2 of the carrier."""
    fields = record.output_field_per_trip if which == "output" else record.echo_field_per_trip
    if not fields:
        raise ValueError("empty record")
    amps = []
    for f in fields:
        spec = np.abs(np.fft.fft(f.samples)) ** 2 / len(f) ** 2
        freqs = np.fft.fftfreq(len(f), d=1.0 / f.sample_rate_hz)
        amps.append(np.sqrt(np.sum(spec[np.abs(freqs) <= carrier_band_hz / 2])))
    return np.array(amps)


def normalized_variance(values) -> float:
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        raise ValueError("empty record")
    mean = np.mean(values)
    return float(np.var(values) / mean ** 2) if mean != 0 else 0.0


def carrier_stability(record: LinkRecord, carrier_band_hz: float, which: str = "output",
                      min_trips: int = 10) -> float:
    """Variance of the per-trip carrier-band amplitude over its squared mean."""
    if len(record) == 0:
        raise ValueError("empty record")
    if len(record) < min_trips:
        raise ValueError(f"need at least {min_trips} round trips, got {len(record)}")
    return normalized_variance(carrier_amplitudes(record, carrier_band_hz, which))
