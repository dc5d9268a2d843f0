"""
Experiment configuration: YAML loading, unit-suffixed quantities and
cross-module consistency checks.

Field names in the file match the dataclass fields one-to-one. Any field
ending in ``_hz`` also accepts strings such as ``"20 GHz"``.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import yaml

from ..cavity import CavityConfig
from ..pathloss import ChannelModel, default_models
from ..rxchain import ReceiverConfig
from ..signal import FilterSpec
from ..txchain import BasebandConfig, ModulatorConfig

_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12}
_QUANTITY = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([a-zA-Z]*)\s*$")


class Scenario(str, Enum):
    DESIGN_CHECK = "design_check"
    STEADY_STATE = "steady_state"
    ECHO_DEMO = "echo_demo"
    BER_SWEEP = "ber_sweep"
    PATHLOSS_TABLE = "pathloss_table"


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


def parse_frequency(value) -> float:
    if isinstance(value, bool):
        raise ValueError(f"not a frequency: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    m = _QUANTITY.match(str(value))
    if not m:
        raise ValueError(f"not a frequency: {value!r}")
    unit = m.group(2).lower() or "hz"
    if unit not in _UNITS:
        raise ValueError(f"unknown frequency unit {m.group(2)!r}")
    return float(m.group(1)) * _UNITS[unit]


def default_obpf() -> FilterSpec:
    return FilterSpec(bandwidth_hz=20e9)


@dataclass(frozen=True)
class RunSettings:
    n_symbols: int = 2048
    guard_symbols: int = 16
    warmup_trips: int = 3000
    metric_warmup_fraction: float = 0.05
    seed_power_w: float = 1e-9
    max_trips: int = 5000
    tol: float = 1e-10
    spectrum_segment: int = 4096
    seeds_per_point: int = 3
    distances_m: tuple = (1.6, 3.0, 6.0, 12.0, 24.0)
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "distances_m", tuple(float(d) for d in self.distances_m))
        if self.n_symbols < 10:
            raise ValueError("n_symbols must be >= 10")
        if not 0 <= self.metric_warmup_fraction < 1:
            raise ValueError("metric_warmup_fraction must lie in [0, 1)")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if "." not in self.parameter:
            raise ValueError("sweep parameter must be '<section>.<field>'")
        if not self.values:
            raise ValueError("sweep needs at least one value")


DEFAULT_NOISE_LADDER = (0.0, 2e-3, 4e-3, 8e-3, 1.6e-2)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario = Scenario.ECHO_DEMO
    baseband: BasebandConfig = field(default_factory=BasebandConfig)
    modulator: ModulatorConfig = field(default_factory=ModulatorConfig)
    cavity: CavityConfig = field(
        default_factory=lambda: CavityConfig(obpf_tx=default_obpf(), obpf_rx=default_obpf()))
    receiver: ReceiverConfig = field(default_factory=ReceiverConfig)
    channels: tuple = field(default_factory=lambda: tuple(default_models()))
    run: RunSettings = field(default_factory=RunSettings)
    output_dir: str = "rbcom-out"
    seed: int = 0
    sweep: Sweep | None = None

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "channels", tuple(self.channels))
        if self.baseband.seed != self.seed:
            object.__setattr__(self, "baseband", dataclasses.replace(self.baseband, seed=self.seed))
        problems = cross_validate(self)
        if problems:
            raise ConfigError(problems)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return dataclasses.replace(self, seed=seed)


def cross_validate(cfg: ExperimentConfig) -> list[str]:
    problems = []
    bb, mod, cav, rx = cfg.baseband, cfg.modulator, cfg.cavity, cfg.receiver
    if mod.lo_freq_hz != rx.lo_freq_hz:
        problems.append(f"receiver.lo_freq_hz: {rx.lo_freq_hz:g} Hz must equal "
                        f"modulator.lo_freq_hz {mod.lo_freq_hz:g} Hz")
    if bb.sample_rate_hz != cav.sample_rate_hz:
        problems.append(f"cavity.sample_rate_hz: {cav.sample_rate_hz:g} Hz must equal "
                        f"baseband.sample_rate_hz {bb.sample_rate_hz:g} Hz")
    if mod.lo_freq_hz <= bb.bandwidth_hz:
        problems.append(f"modulator.lo_freq_hz: f_o = {mod.lo_freq_hz:g} Hz must exceed "
                        f"f_b = {bb.bandwidth_hz:g} Hz")
    if bb.nominal_bandwidth_hz > bb.bandwidth_hz * (1 + 1e-12):
        problems.append("baseband.symbol_rate_hz: baseband exceeds f_b")
    try:
        bb.samples_per_symbol
    except ValueError as exc:
        problems.append(f"baseband.symbol_rate_hz: {exc}")
    nyquist = bb.sample_rate_hz / 2
    if mod.lo_freq_hz + bb.bandwidth_hz >= nyquist:
        problems.append("modulator.lo_freq_hz: f_o + f_b exceeds the Nyquist frequency")
    if rx.lowpass_cutoff_hz >= nyquist:
        problems.append("receiver.lowpass_cutoff_hz: cutoff must lie below Nyquist")
    return problems


# --- loading -----------------------------------------------------------------

def _line_index(node, path=(), out=None) -> dict:
    """Map key paths to 1-based source lines."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            p = path + (str(key_node.value),)
            out[p] = key_node.start_mark.line + 1
            _line_index(value_node, p, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            p = path + (str(i),)
            out[p] = item.start_mark.line + 1
            _line_index(item, p, out)
    return out


class _Builder:
    def __init__(self, lines: dict):
        self.lines = lines
        self.problems: list[str] = []

    def where(self, path) -> str:
        line = None
        for k in range(len(path), 0, -1):
            line = self.lines.get(tuple(path[:k]))
            if line is not None:
                break
        loc = ".".join(path) or "<root>"
        return f"{loc} (line {line})" if line else loc

    def fail(self, path, msg):
        self.problems.append(f"{self.where(path)}: {msg}")

    def build(self, cls, raw, path, defaults=None):
        defaults = dict(defaults or {})
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            self.fail(path, "expected a mapping")
            return None
        names = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = dict(defaults)
        for key, value in raw.items():
            key = str(key)
            if key not in names:
                self.fail(path + (key,), f"unknown field for {cls.__name__}")
                continue
            try:
                kwargs[key] = self.convert(key, value, path + (key,))
            except (ValueError, TypeError) as exc:
                self.fail(path + (key,), str(exc))
        try:
            return cls(**kwargs)
        except (ValueError, TypeError) as exc:
            self.fail(path, str(exc))
            return None

    def convert(self, key, value, path):
        if key.endswith("_hz"):
            return parse_frequency(value)
        if key in ("obpf_tx", "obpf_rx"):
            if value is None:
                return None
            spec = self.build(FilterSpec, value, path)
            if spec is None:
                raise ValueError("invalid filter")
            return spec
        return value


def config_from_dict(raw: dict, lines: dict | None = None) -> ExperimentConfig:
    b = _Builder(lines or {})
    if not isinstance(raw, dict):
        raise ConfigError(["<root>: expected a mapping"])
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for key in raw:
        if key not in known:
            b.fail((str(key),), "unknown section")

    kwargs = {}
    for key in ("scenario", "output_dir", "seed"):
        if key in raw:
            kwargs[key] = raw[key]
    if "scenario" in kwargs:
        try:
            kwargs["scenario"] = Scenario(kwargs["scenario"])
        except ValueError:
            b.fail(("scenario",), f"unknown scenario {raw['scenario']!r}; "
                                  f"choose from {[s.value for s in Scenario]}")
    if "seed" in kwargs and (not isinstance(kwargs["seed"], int) or isinstance(kwargs["seed"], bool)):
        b.fail(("seed",), "seed must be an integer")

    kwargs["baseband"] = b.build(BasebandConfig, raw.get("baseband"), ("baseband",))
    kwargs["modulator"] = b.build(ModulatorConfig, raw.get("modulator"), ("modulator",))
    kwargs["cavity"] = b.build(CavityConfig, raw.get("cavity"), ("cavity",),
                               defaults={"obpf_tx": default_obpf(), "obpf_rx": default_obpf()})
    kwargs["receiver"] = b.build(ReceiverConfig, raw.get("receiver"), ("receiver",))
    kwargs["run"] = b.build(RunSettings, raw.get("run"), ("run",))
    if "channels" in raw:
        items = raw["channels"]
        if not isinstance(items, list):
            b.fail(("channels",), "expected a list")
        else:
            kwargs["channels"] = tuple(
                b.build(ChannelModel, item, ("channels", str(i))) for i, item in enumerate(items))
    if raw.get("sweep") is not None:
        kwargs["sweep"] = b.build(Sweep, raw["sweep"], ("sweep",))

    if b.problems:
        raise ConfigError(b.problems)
    try:
        return ExperimentConfig(**kwargs)
    except ConfigError as exc:
        raise ConfigError([_locate(b, p) for p in exc.problems]) from None
    except (ValueError, TypeError) as exc:
        raise ConfigError([f"<root>: {exc}"]) from None


def _locate(b: _Builder, problem: str) -> str:
    head, _, msg = problem.partition(": ")
    return f"{b.where(tuple(head.split('.')))}: {msg}" if msg else problem


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        node = yaml.compose(text)
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError([f"{path}: {exc}"]) from None
    lines = _line_index(node) if node is not None else {}
    raw = dict(raw) if isinstance(raw, dict) else raw
    if overrides and isinstance(raw, dict):
        raw.update(overrides)
    return config_from_dict(raw, lines)


def _plain(value):
    if isinstance(value, Enum):
        return value.value
    if dataclasses.is_dataclass(value):
        return {f.name: _plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Resolved configuration as plain data (frequencies in Hz)."""
    return _plain(cfg)


def apply_override(cfg: ExperimentConfig, parameter: str, value) -> ExperimentConfig:
    """Copy of ``cfg`` with ``<section>.<field>`` replaced."""
    section, name = parameter.split(".", 1)
    sub = getattr(cfg, section)
    if name.endswith("_hz"):
        value = parse_frequency(value)
    return dataclasses.replace(cfg, **{section: dataclasses.replace(sub, **{name: value})})
