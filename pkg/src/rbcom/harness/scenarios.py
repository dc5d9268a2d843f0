"""
Scenario runners. Each writes CSV tables plus ``manifest.json`` into the
output directory and returns an exit status.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np

from ..cavity import bias_survival, run_to_steady_state, simulate_link
from ..pathloss import compare_models, received_fraction
from ..rxchain import carrier_stability, decide_and_score, receive
from ..signal import spectrum_of
from ..txchain import build_drive, carrier, eoam_modulate
from .config import DEFAULT_NOISE_LADDER, ExperimentConfig, Scenario, Sweep, apply_override, config_to_dict
from .design import validate_design
from .oracle import bisect_fixed_point

log = logging.getLogger(__name__)


class OutputExistsError(FileExistsError):
    pass


@dataclass
class ScenarioResult:
    status: int
    output_dir: Path
    files: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _unit_for(name: str) -> str:
    for suffix, unit in (("_hz", "Hz"), ("_w", "W"), ("_a", "A"), ("_m", "m"), ("_volts", "V"),
                         ("_m2", "m^2"), ("_per_m", "1/m")):
        if name.endswith(suffix):
            return unit
    return "-"


def _map(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def derived_seed(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


# --- shared link pieces ------------------------------------------------------

def build_link(cfg: ExperimentConfig, filtered: bool = True):
    """Run the modulated cavity link. Returns ``(drive, symbols, record)``."""
    cav = cfg.cavity if filtered else dataclasses.replace(cfg.cavity, obpf_tx=None, obpf_rx=None)
    drive, symbols, _ = build_drive(cfg.baseband, cfg.modulator, cfg.run.n_symbols,
                                    guard_symbols=cfg.run.guard_symbols)
    record = simulate_link(cav, drive, cfg.run.warmup_trips, cfg.modulator, cfg.run.seed_power_w,
                           tol=min(cfg.run.tol, 1e-12))
    return drive, symbols, record


def score_record(cfg: ExperimentConfig, record, symbols, noise_std_a: float | None = None,
                 noise_seed: int | None = None):
    rx = cfg.receiver if noise_std_a is None else dataclasses.replace(cfg.receiver, noise_std_a=noise_std_a)
    recovered = receive(record.output_stream(), rx, noise_seed)
    warm = int(round(cfg.run.metric_warmup_fraction * len(symbols)))
    return decide_and_score(recovered, symbols, cfg.baseband, rx, warmup_symbols=warm,
                            max_lag=cfg.cavity.roundtrip_samples)


def carrier_band_hz(cfg: ExperimentConfig) -> float:
    spec = cfg.cavity.obpf_rx or cfg.cavity.obpf_tx
    if spec is not None:
        return spec.bandwidth_hz
    return 2.0 * (cfg.modulator.lo_freq_hz - cfg.baseband.bandwidth_hz)


# --- scenarios ---------------------------------------------------------------

def _design_check(cfg: ExperimentConfig, out: Path) -> ScenarioResult:
    spec = cfg.cavity.obpf_rx or cfg.cavity.obpf_tx
    if spec is None:
        raise ValueError("design_check needs cavity.obpf_rx or cavity.obpf_tx")
    report = validate_design(cfg.baseband.bandwidth_hz, cfg.modulator.lo_freq_hz,
                             spec.bandwidth_hz, cfg.cavity.center_freq_hz)
    path = out / "design_report.json"
    path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return ScenarioResult(0 if report.passed else 1, out, [path], {"design": report.to_dict()})


def _steady_state(cfg: ExperimentConfig, out: Path) -> ScenarioResult:
    cav, mod, run = cfg.cavity, cfg.modulator, cfg.run
    state, converged = run_to_steady_state(cav, run.seed_power_w, run.max_trips, run.tol, mod)
    survival = bias_survival(cav, mod)
    oracle = bisect_fixed_point(cav.small_signal_gain, survival, cav.saturation_power_w)
    simulated = state.power_history[-1]
    rel = abs(simulated - oracle) / oracle if oracle > 0 else None
    path = write_csv(out / "power_history.csv", ["trip [-]", "gain_input_power [W]"],
                     enumerate(state.power_history))
    metrics = {
        "converged": converged,
        "trips": state.roundtrip_index,
        "threshold_product": float(np.exp(cav.small_signal_gain) * survival),
        "roundtrip_survival": survival,
        "p_star_simulated_w": simulated,
        "p_star_oracle_w": oracle,
        "relative_error": rel,
        "effective_distance_m": cav.effective_distance_m,
        "roundtrip_samples": cav.roundtrip_samples,
    }
    return ScenarioResult(0 if converged else 2, out, [path], metrics)


def _echo_run(args):
    cfg, filtered = args
    drive, symbols, record = build_link(cfg, filtered)
    metrics = score_record(cfg, record, symbols)
    variance = carrier_stability(record, carrier_band_hz(cfg))
    metrics = dataclasses.replace(metrics, carrier_amp_variance=variance)
    echo = record.echo_field_per_trip[0].with_samples(
        np.concatenate([e.samples for e in record.echo_field_per_trip]))
    echo_spec = spectrum_of(echo, min(cfg.run.spectrum_segment, len(echo)))
    return filtered, drive, metrics, echo_spec, record.trips_to_converge, record.steady_state_reached


def _echo_demo(cfg: ExperimentConfig, out: Path) -> ScenarioResult:
    if cfg.cavity.obpf_rx is None and cfg.cavity.obpf_tx is None:
        raise ValueError("echo_demo needs at least one OBPF in the cavity section")
    results = sorted(_map(_echo_run, [(cfg, True), (cfg, False)], cfg.run.jobs), key=lambda r: not r[0])
    (_, drive, m_f, spec_f, trips_f, conv_f), (_, _, m_u, spec_u, _, conv_u) = results

    rows = []
    for mode, m in (("filtered", m_f), ("unfiltered", m_u)):
        rows.append((mode, m.ber, m.evm_rms, m.snr_db, m.carrier_amp_variance, m.n_symbols))
    metrics_path = write_csv(
        out / "metrics.csv",
        ["mode [-]", "ber [-]", "evm_rms [-]", "snr [dB]", "carrier_amp_variance [-]", "symbols [-]"],
        rows)

    beam = eoam_modulate(carrier(len(drive), 1.0, cfg.cavity.sample_rate_hz, cfg.cavity.center_freq_hz),
                         drive, cfg.modulator)
    seg = min(cfg.run.spectrum_segment, len(beam), len(spec_f.offsets_hz))
    spec_beam = spectrum_of(beam, seg)
    spec_rows = zip(spec_beam.offsets_hz, spec_beam.psd, spec_f.psd, spec_u.psd) \
        if len(spec_f.psd) == seg else zip(spec_beam.offsets_hz, spec_beam.psd)
    header = ["offset [Hz]", "modulated_beam_psd [W/Hz]"]
    if len(spec_f.psd) == seg:
        header += ["echo_filtered_psd [W/Hz]", "echo_unfiltered_psd [W/Hz]"]
    spectrum_path = write_csv(out / "spectrum.csv", header, spec_rows)

    ratio_var = m_f.carrier_amp_variance / m_u.carrier_amp_variance if m_u.carrier_amp_variance else None
    ratio_evm = m_u.evm_rms / m_f.evm_rms if m_f.evm_rms else None
    summary = {
        "filtered": dataclasses.asdict(m_f),
        "unfiltered": dataclasses.asdict(m_u),
        "variance_ratio_filtered_over_unfiltered": ratio_var,
        "evm_ratio_unfiltered_over_filtered": ratio_evm,
        "warmup_trips_used": trips_f,
        "steady_state_reached": bool(conv_f and conv_u),
    }
    return ScenarioResult(0, out, [metrics_path, spectrum_path], summary)


def _sweep_point(args):
    cfg, value, rep, link = args
    _, symbols, record = link
    noise_seed = derived_seed(cfg.seed, rep)
    m = score_record(cfg, record, symbols, noise_seed=noise_seed)
    return value, rep, noise_seed, m


def _ber_sweep(cfg: ExperimentConfig, out: Path) -> ScenarioResult:
    sweep = cfg.sweep or Sweep("receiver.noise_std_a", DEFAULT_NOISE_LADDER)
    receiver_only = sweep.parameter.startswith("receiver.")
    if cfg.run.n_symbols * (1 - cfg.run.metric_warmup_fraction) < 1000:
        raise ValueError("ber_sweep needs at least 1000 scored symbols per point")
    shared = build_link(cfg) if receiver_only else None

    jobs = []
    for value in sweep.values:
        point = apply_override(cfg, sweep.parameter, value)
        link = shared if receiver_only else build_link(point)
        for rep in range(cfg.run.seeds_per_point):
            jobs.append((point, value, rep, link))
    results = sorted(_map(_sweep_point, jobs, cfg.run.jobs), key=lambda r: (r[0], r[1]))

    name = sweep.parameter.split(".", 1)[1]
    header = [f"{sweep.parameter} [{_unit_for(name)}]", "rep [-]", "noise_seed [-]", "snr [dB]",
              "ber [-]", "evm_rms [-]", "symbols [-]"]
    rows = [(v, rep, s, m.snr_db, m.ber, m.evm_rms, m.n_symbols) for v, rep, s, m in results]
    path = write_csv(out / "ber_sweep.csv", header, rows)

    mean_ber = {}
    for v, _, _, m in results:
        mean_ber.setdefault(v, []).append(m.ber)
    summary = {"parameter": sweep.parameter,
               "mean_ber": [[v, float(np.mean(b))] for v, b in sorted(mean_ber.items())]}
    return ScenarioResult(0, out, [path], summary)


def _pathloss_table(cfg: ExperimentConfig, out: Path) -> ScenarioResult:
    table = compare_models(cfg.channels, cfg.run.distances_m)
    by_label = {m.label: m for m in cfg.channels}
    rows = [(label, d, att, received_fraction(by_label[label], d)
             / received_fraction(by_label[label], by_label[label].reference_distance_m))
            for label, d, att in table]
    path = write_csv(out / "pathloss.csv",
                     ["model [-]", "distance [m]", "attenuation [dB]", "received_ratio [-]"], rows)
    return ScenarioResult(0, out, [path], {"rows": len(rows)})


_RUNNERS = {
    Scenario.DESIGN_CHECK: _design_check,
    Scenario.STEADY_STATE: _steady_state,
    Scenario.ECHO_DEMO: _echo_demo,
    Scenario.BER_SWEEP: _ber_sweep,
    Scenario.PATHLOSS_TABLE: _pathloss_table,
}


def prepare_output_dir(path, force: bool = False) -> Path:
    out = Path(path)
    if out.exists() and (not out.is_dir() or any(out.iterdir())) and not force:
        raise OutputExistsError(f"output directory {out} exists and is not empty (use --force)")
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_scenario(cfg: ExperimentConfig, output_dir=None, force: bool = False) -> ScenarioResult:
    out = prepare_output_dir(output_dir or cfg.output_dir, force)
    log.info("running %s into %s", cfg.scenario.value, out)
    result = _RUNNERS[cfg.scenario](cfg, out)
    manifest = {
        "scenario": cfg.scenario.value,
        "seed": cfg.seed,
        "code_version": _version(),
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "exit_status": result.status,
        "outputs": [p.name for p in result.files],
        "metrics": result.metrics,
        "config": config_to_dict(cfg),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")
    result.files.append(path)
    return result


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")
