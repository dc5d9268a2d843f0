"""
Round-trip model of the resonant cavity formed by the transmitter
retroreflector (R1), the gain medium, the EOAM and the receiver's partial
retroreflector (R2).

The intracavity field is one round trip worth of samples. Propagation delay
is bookkept on a global sample clock: sample ``n`` of trip ``k`` crosses the
EOAM forward at absolute sample ``k*N + n`` and backward at ``(k+1)*N + n``,
so the record itself never needs to be shifted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .signal import SPEED_OF_LIGHT, FilterSpec, RealSignal, SampledEnvelope, apply_bandpass
from .txchain import ModulatorConfig, eoam_modulate, eoam_transmittance

log = logging.getLogger(__name__)


class GainResponse(str, Enum):
    INSTANTANEOUS = "instantaneous"
    SLOW_AVERAGE = "slow_average"


@dataclass(frozen=True)
class CavityConfig:
    small_signal_gain: float = 2.0
    saturation_power_w: float = 1.0
    r1_reflectivity: float = 0.99
    r2_reflectivity: float = 0.95
    r2_transmittance: float = 0.05
    distance_m: float = 3.07
    excess_loss: float = 0.1
    obpf_tx: FilterSpec | None = None
    obpf_rx: FilterSpec | None = None
    gain_response: GainResponse = GainResponse.SLOW_AVERAGE
    window_roundtrips: int = 1
    sample_rate_hz: float = 200e9
    center_freq_hz: float = 282e12

    def __post_init__(self):
        object.__setattr__(self, "gain_response", GainResponse(self.gain_response))
        if not self.small_signal_gain > 0:
            raise ValueError("small_signal_gain must be positive")
        if not self.saturation_power_w > 0:
            raise ValueError("saturation_power_w must be positive")
        if not 0 < self.r1_reflectivity <= 1:
            raise ValueError("r1_reflectivity must lie in (0, 1]")
        if not 0 < self.r2_reflectivity < 1:
            raise ValueError("r2_reflectivity must lie in (0, 1)")
        if not 0 < self.r2_transmittance < 1:
            raise ValueError("r2_transmittance must lie in (0, 1)")
        if self.r2_reflectivity + self.r2_transmittance > 1 + 1e-12:
            raise ValueError("r2_reflectivity + r2_transmittance must not exceed 1")
        if not 0 <= self.excess_loss < 1:
            raise ValueError("excess_loss must lie in [0, 1)")
        if not self.distance_m > 0:
            raise ValueError("distance_m must be positive")
        if self.window_roundtrips < 1:
            raise ValueError("window_roundtrips must be >= 1")
        if self.roundtrip_samples < 2:
            raise ValueError("cavity too short for the sample rate")

    @property
    def roundtrip_samples(self) -> int:
        return int(round(2.0 * self.distance_m / SPEED_OF_LIGHT * self.sample_rate_hz))

    @property
    def effective_distance_m(self) -> float:
        """Distance after quantizing the round-trip delay to whole samples."""
        return self.roundtrip_samples * SPEED_OF_LIGHT / (2.0 * self.sample_rate_hz)

    def survival_fraction(self, transmittance_fwd: float = 1.0, transmittance_bwd: float = 1.0) -> float:
        """Carrier power surviving one round trip, excluding the gain."""
        return (self.r1_reflectivity * transmittance_fwd * self.r2_reflectivity
                * transmittance_bwd * (1.0 - self.excess_loss))


def distance_for_samples(n_samples: int, sample_rate_hz: float) -> float:
    return n_samples * SPEED_OF_LIGHT / (2.0 * sample_rate_hz)


@dataclass(frozen=True, eq=False)
class CavityState:
    """Field arriving at R1; ``power_history`` holds gain-input power per trip."""

    intracavity_field: SampledEnvelope
    roundtrip_index: int = 0
    current_gain: float = 1.0
    power_history: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "power_history", tuple(float(p) for p in self.power_history))
        if len(self.power_history) != self.roundtrip_index:
            raise ValueError("power_history length must equal roundtrip_index")


@dataclass(eq=False)
class LinkRecord:
    output_field_per_trip: list
    echo_field_per_trip: list
    steady_state_reached: bool
    trips_to_converge: int
    warmup_state: CavityState | None = None

    def __post_init__(self):
        if len(self.output_field_per_trip) != len(self.echo_field_per_trip):
            raise ValueError("output and echo sequences differ in length")

    def __len__(self) -> int:
        return len(self.output_field_per_trip)

    def output_stream(self) -> SampledEnvelope:
        """Output beam of all recorded trips, concatenated in time."""
        first = self.output_field_per_trip[0]
        data = np.concatenate([f.samples for f in self.output_field_per_trip])
        return SampledEnvelope(data, first.sample_rate_hz, first.center_freq_hz)


def gain_factor(mean_power_w, small_signal_gain: float, saturation_power_w: float):
    """Homogeneous saturable power gain exp(g0 / (1 + P / P_sat))."""
    return np.exp(small_signal_gain / (1.0 + np.asarray(mean_power_w) / saturation_power_w))


def saturable_gain(env: SampledEnvelope, cfg: CavityConfig, state: CavityState):
    if len(env) == 0:
        raise ValueError("empty signal")
    if cfg.gain_response is GainResponse.SLOW_AVERAGE and state.power_history:
        p = float(np.mean(state.power_history[-cfg.window_roundtrips:]))
    else:
        p = env.mean_power
    g = float(gain_factor(p, cfg.small_signal_gain, cfg.saturation_power_w))
    return env.scaled(np.sqrt(g)), g


def round_trip(state: CavityState, cfg: CavityConfig, drive: RealSignal,
               modulator: ModulatorConfig | None = None, drive_back: RealSignal | None = None):
    """Advance the cavity by one round trip.

    ``drive`` is the EOAM voltage for this trip's forward pass and
    ``drive_back`` the one for the backward pass (one round trip later on the
    sample clock); it defaults to ``drive``. The receiver output is tapped
    ahead of the receiver OBPF, the echo is the filtered beam reflected by R2.

    Returns ``(new_state, output, echo)``.
    """
    modulator = modulator or ModulatorConfig()
    drive_back = drive if drive_back is None else drive_back
    fld = state.intracavity_field
    n = cfg.roundtrip_samples
    if len(fld) != n or len(drive) != n or len(drive_back) != n:
        raise ValueError(f"field and drive segments must be {n} samples long")

    x = fld.scaled(np.sqrt(cfg.r1_reflectivity))
    amplified, g = saturable_gain(x, cfg, state)
    if cfg.obpf_tx is not None:
        amplified = apply_bandpass(amplified, cfg.obpf_tx)
    at_rx = eoam_modulate(amplified, drive, modulator)

    output = at_rx.scaled(np.sqrt(cfg.r2_transmittance))
    reflected = apply_bandpass(at_rx, cfg.obpf_rx) if cfg.obpf_rx is not None else at_rx
    echo = reflected.scaled(np.sqrt(cfg.r2_reflectivity))

    back = eoam_modulate(echo, drive_back, modulator) if modulator.backward_modulation else echo
    back = back.scaled(np.sqrt(1.0 - cfg.excess_loss))

    new_state = CavityState(
        intracavity_field=back,
        roundtrip_index=state.roundtrip_index + 1,
        current_gain=g,
        power_history=state.power_history + (x.mean_power,),
    )
    return new_state, output, echo


def seed_state(cfg: CavityConfig, seed_power_w: float) -> CavityState:
    amp = np.sqrt(seed_power_w)
    fld = SampledEnvelope(np.full(cfg.roundtrip_samples, amp, dtype=complex),
                          cfg.sample_rate_hz, cfg.center_freq_hz)
    return CavityState(fld)


def constant_drive(cfg: CavityConfig, volts: float) -> RealSignal:
    return RealSignal(np.full(cfg.roundtrip_samples, float(volts)), cfg.sample_rate_hz)


def fixed_point_power(cfg: CavityConfig, survival: float) -> float:
    """Closed-form steady gain-input power for round-trip survival ``survival``."""
    if np.exp(cfg.small_signal_gain) * survival <= 1.0:
        return 0.0
    return cfg.saturation_power_w * (cfg.small_signal_gain / np.log(1.0 / survival) - 1.0)


def run_to_steady_state(cfg: CavityConfig, seed_power_w: float = 1e-9, max_trips: int = 5000,
                        tol: float = 1e-10, modulator: ModulatorConfig | None = None,
                        drive_volts: float | None = None, floor_w: float = 1e-15,
                        state: CavityState | None = None):
    """Iterate unmodulated round trips until the gain-input power settles.

    Settling means a relative change below ``tol`` or, below threshold, the
    power dropping under ``floor_w``. Returns ``(state, converged)``.
    """
    if seed_power_w <= 0:
        raise ValueError("seed_power_w must be positive")
    modulator = modulator or ModulatorConfig()
    volts = modulator.dc_bias_volts if drive_volts is None else drive_volts
    drive = constant_drive(cfg, volts)
    state = state or seed_state(cfg, seed_power_w)
    for _ in range(max_trips):
        state, _, _ = round_trip(state, cfg, drive, modulator)
        hist = state.power_history
        if hist[-1] < floor_w:
            return state, True
        if len(hist) >= 2 and abs(hist[-1] - hist[-2]) <= tol * hist[-1]:
            return state, True
    log.warning("no convergence after %d round trips", max_trips)
    return state, False


def simulate_link(cfg: CavityConfig, tx: RealSignal, warmup_trips: int = 3000,
                  modulator: ModulatorConfig | None = None, seed_power_w: float = 1e-9,
                  tol: float = 1e-12) -> LinkRecord:
    """Warm the cavity up with the bias drive, then run the modulated drive ``tx``.

    ``tx`` is padded with the bias voltage up to a whole number of round trips.
    """
    modulator = modulator or ModulatorConfig()
    if warmup_trips < 1:
        raise ValueError("warmup_trips must be >= 1")
    if tx.sample_rate_hz != cfg.sample_rate_hz:
        raise ValueError("drive and cavity sample rates differ")
    state, converged = run_to_steady_state(cfg, seed_power_w, warmup_trips, tol, modulator)
    trips_to_converge = state.roundtrip_index
    warm = state

    n = cfg.roundtrip_samples
    n_trips = -(-len(tx) // n)
    v = np.full((n_trips + 1) * n, modulator.dc_bias_volts)
    v[: len(tx)] = tx.samples
    segments = [RealSignal(v[k * n:(k + 1) * n], cfg.sample_rate_hz) for k in range(n_trips + 1)]

    outputs, echoes = [], []
    for k in range(n_trips):
        state, out, echo = round_trip(state, cfg, segments[k], modulator, segments[k + 1])
        outputs.append(out)
        echoes.append(echo)
    return LinkRecord(outputs, echoes, converged, trips_to_converge, warm)


def bias_survival(cfg: CavityConfig, modulator: ModulatorConfig) -> float:
    """Round-trip survival with the EOAM parked at its bias voltage."""
    t = float(eoam_transmittance(modulator.dc_bias_volts, modulator.v_pi_volts))
    return cfg.survival_fraction(t, t if modulator.backward_modulation else 1.0)
