"""Frequency-plan check for the carrier / LO / baseband / OBPF combination."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..signal import carrier_wavelength, wavelength_linewidth


@dataclass(frozen=True)
class DesignReport:
    fo_minus_fb_hz: float
    max_filter_bandwidth_hz: float
    configured_bf_hz: float
    linewidth_m: float
    sideband_ranges_hz: tuple[tuple[float, float], tuple[float, float]]
    passband_range_hz: tuple[float, float]
    verdict: str
    reasons: tuple[str, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sideband_ranges_hz"] = [list(r) for r in self.sideband_ranges_hz]
        d["passband_range_hz"] = list(self.passband_range_hz)
        d["reasons"] = list(self.reasons)
        d["linewidth_nm"] = self.linewidth_m * 1e9
        return d


def validate_design(fb_hz: float, fo_hz: float, bf_hz: float, fc_hz: float) -> DesignReport:
    """Sideband placement, OBPF passband and the largest usable filter bandwidth.

    The linewidth reported is that of the largest admissible bandwidth at the
    carrier wavelength.
    """
    for name, value in (("fb_hz", fb_hz), ("fo_hz", fo_hz), ("bf_hz", bf_hz), ("fc_hz", fc_hz)):
        if not value > 0:
            raise ValueError(f"{name} must be positive")
    gap = fo_hz - fb_hz
    max_bf = 2.0 * gap
    lower = (fc_hz - fo_hz - fb_hz, fc_hz - fo_hz + fb_hz)
    upper = (fc_hz + fo_hz - fb_hz, fc_hz + fo_hz + fb_hz)
    passband = (fc_hz - gap, fc_hz + gap)
    linewidth = wavelength_linewidth(max(max_bf, 0.0), carrier_wavelength(fc_hz))

    reasons = []
    if fo_hz <= fb_hz:
        reasons.append("no spectral gap: f_o must exceed f_b")
    elif bf_hz >= max_bf:
        reasons.append(f"B_f = {bf_hz:g} Hz must be smaller than 2(f_o - f_b) = {max_bf:g} Hz")
    return DesignReport(
        fo_minus_fb_hz=gap,
        max_filter_bandwidth_hz=max_bf,
        configured_bf_hz=bf_hz,
        linewidth_m=linewidth,
        sideband_ranges_hz=(lower, upper),
        passband_range_hz=passband,
        verdict="fail" if reasons else "pass",
        reasons=tuple(reasons),
    )
