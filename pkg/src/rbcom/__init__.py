"""Discrete-time simulator for resonant beam communication links."""

from .signal import FilterKind, FilterSpec, RealSignal, SampledEnvelope, Spectrum

__version__ = "0.1.0"

__all__ = ["FilterKind", "FilterSpec", "RealSignal", "SampledEnvelope", "Spectrum"]
