"""
Distance attenuation of a collimated laser, a Lambertian LED and a resonant
beam link, each expressed relative to the power received at a reference
distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class ChannelKind(str, Enum):
    LASER = "laser"
    LED = "led"
    RBS = "rbs"


@dataclass(frozen=True)
class ChannelModel:
    kind: ChannelKind
    atmos_atten_per_m: float = 1e-3
    lambertian_order: float = 1.0
    aperture_area_m2: float = 1e-4
    excess_atten_per_m: float = 0.02
    fixed_loss: float = 0.5
    reference_distance_m: float = 1.6
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        if not self.label:
            object.__setattr__(self, "label", self.kind.value)
        if self.atmos_atten_per_m < 0 or self.excess_atten_per_m < 0:
            raise ValueError("attenuation coefficients must be non-negative")
        if self.lambertian_order < 1:
            raise ValueError("lambertian_order must be >= 1")
        if not self.aperture_area_m2 > 0:
            raise ValueError("aperture_area_m2 must be positive")
        if not 0 <= self.fixed_loss < 1:
            raise ValueError("fixed_loss must lie in [0, 1)")
        if not self.reference_distance_m > 0:
            raise ValueError("reference_distance_m must be positive")


def default_models(reference_distance_m: float = 1.6) -> list[ChannelModel]:
    return [ChannelModel(kind, reference_distance_m=reference_distance_m) for kind in ChannelKind]


def received_fraction(model: ChannelModel, distance_m: float) -> float:
    """Absolute fraction of transmitted power collected at ``distance_m``."""
    d = float(distance_m)
    if model.kind is ChannelKind.LASER:
        return float(np.exp(-model.atmos_atten_per_m * d))
    if model.kind is ChannelKind.LED:
        # on-axis Lambertian source, receiver facing the LED
        m = model.lambertian_order
        return (m + 1) * model.aperture_area_m2 / (2 * np.pi * d ** 2)
    return (1.0 - model.fixed_loss) * float(np.exp(-model.excess_atten_per_m * d))


def attenuation_db(model: ChannelModel, distance_m: float) -> float:
    """10 log10 of P_r(d) / P_r(d_ref)."""
    d_ref = model.reference_distance_m
    if distance_m < d_ref:
        raise ValueError(f"distance {distance_m} m is below the reference distance {d_ref} m")
    return float(10.0 * np.log10(received_fraction(model, distance_m) / received_fraction(model, d_ref)))


def compare_models(models, distances) -> list[tuple[str, float, float]]:
    """Rows of ``(model label, distance_m, attenuation_db)``, grouped by model."""
    refs = {m.reference_distance_m for m in models}
    if len(refs) > 1:
        raise ValueError("models must share one reference distance")
    return [(m.label, float(d), float(attenuation_db(m, d))) for m in models for d in distances]
