"""Experiment runner: executes a RunConfig and writes tabular artifacts.

Artifacts per run: one or more CSV tables (single header row, fixed
column order, masked cells empty with the cause in a *_reasons.csv
sidecar), a key = value summary of headline metrics, and manifest.json
carrying the config echo, seed, per-point status, and a sha256 digest
of every artifact file.  Identical (config, seed) reruns produce
byte-identical tables and summaries regardless of worker count.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .backaction import (PulseEvent, backaction_report,
                         extract_fringe_frequency, fit_frequency_rise,
                         pulsed_mode_timeline, ramsey_surface)
from .config import RunConfig, dump_config
from .device import static_voltage, v_phi_curve
from .errors import ConfigError, OutputError, SlugSimError
from .scattering import scattering_map
from .twoport import two_port_sweep

SUMMARY_FILE = "summary.txt"
MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class RunManifest:
    experiment: str
    code_version: str
    seed: int
    workers: int
    wall_time_s: float
    config_text: str
    points_ok: int
    points_masked: int
    statuses: tuple          # rows (label, "ok" | reason)
    files: dict              # artifact name -> sha256 hex digest

    def to_json(self) -> str:
        payload = {
            "experiment": self.experiment,
            "code_version": self.code_version,
            "seed": self.seed,
            "workers": self.workers,
            "wall_time_s": round(self.wall_time_s, 3),
            "config": self.config_text,
            "points": {
                "ok": self.points_ok,
                "masked": self.points_masked,
                "statuses": [list(row) for row in self.statuses],
            },
            "files": dict(sorted(self.files.items())),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if not math.isfinite(v):
        return ""
    return f"{v:.12g}"


class _Table:
    def __init__(self, name: str, columns):
        self.name = name
        self.columns = list(columns)
        self.rows: list = []

    def add(self, *values):
        if len(values) != len(self.columns):
            raise SlugSimError(
                f"row width {len(values)} != {len(self.columns)} "
                f"in {self.name}")
        self.rows.append([_fmt(v) if not isinstance(v, str) else v
                          for v in values])

    def text(self) -> str:
        lines = [",".join(self.columns)]
        lines += [",".join(row) for row in self.rows]
        return "\n".join(lines) + "\n"


def _grid(bounds) -> np.ndarray:
    start, stop, count = bounds
    return np.linspace(start, stop, int(count))


def _require(config: RunConfig, attr: str):
    val = getattr(config, attr)
    if val is None:
        raise ConfigError(f"experiment {config.experiment!r} needs "
                          f"{attr} configured")
    return val


def _chain_inputs(config: RunConfig):
    """Static working point feeding the backaction chain."""
    bias = _require(config, "bias")
    qc = _require(config, "qubit_cavity")
    v_mean = static_voltage(config.device, bias, config.sim)
    return bias, qc, v_mean


def _run_vphi(config: RunConfig):
    bias = _require(config, "bias")
    flux = _grid(_require(config, "flux_sweep"))
    table = _Table("vphi.csv", ["flux_Phi0", "V_uV", "V_phi_mV_per_Phi0",
                                "V_se_uV"])
    reasons = _Table("vphi_reasons.csv", ["flux_Phi0", "reason"])
    if flux.size == 0:
        return [table, reasons], [], []
    statuses = [(f"flux={flux[k]:.6g}", "ok") for k in range(flux.size)]
    if flux.size < 3:
        # too few points for the centered-difference slope; static
        # voltages only, slope cells stay empty
        for k in range(flux.size):
            point = dataclasses.replace(bias, phi_a=float(flux[k]))
            v = static_voltage(config.device, point, config.sim)
            table.add(flux[k], v / 1e-6, None, None)
            reasons.add(flux[k], "gradient_undefined")
        return [table, reasons], [], statuses
    curve = v_phi_curve(config.device, bias.I_b, flux, config.sim,
                        topology="slug")
    for k in range(flux.size):
        table.add(curve.flux[k], curve.v_mean[k] / 1e-6,
                  curve.v_phi[k] / 1e-3, curve.v_se[k] / 1e-6)
    vpp = float(curve.v_mean.max() - curve.v_mean.min())
    k_best = int(np.argmax(np.abs(curve.v_phi)))
    summary = [
        ("V_pp_uV", _fmt(vpp / 1e-6)),
        ("max_abs_V_phi_mV_per_Phi0", _fmt(abs(curve.v_phi[k_best]) / 1e-3)),
        ("max_abs_V_phi_at_flux_Phi0", _fmt(curve.flux[k_best])),
    ]
    return [table, reasons], summary, statuses


def _z_columns(prefix):
    return [f"{prefix}_re_ohm", f"{prefix}_im_ohm"]


def _run_twoport(config: RunConfig):
    bias = _require(config, "bias")
    freq = _grid(_require(config, "freq_sweep"))
    cols = (["freq_GHz"] + _z_columns("Z11") + _z_columns("Z12")
            + _z_columns("Z21") + _z_columns("Z22")
            + ["se_Z11_ohm", "se_Z12_ohm", "se_Z21_ohm", "se_Z22_ohm",
               "V_phi_mV_per_Phi0", "V_uV", "T_e_K"])
    table = _Table("twoport.csv", cols)
    reasons = _Table("twoport_reasons.csv", ["freq_GHz", "reason"])
    if freq.size == 0:
        return [table, reasons], [], []
    sweep = two_port_sweep(
        config.device, bias.I_b, np.array([bias.phi_a]),
        2.0 * math.pi * freq, config.sim, workers=config.workers)
    statuses = []
    for j in range(freq.size):
        label = f"freq={freq[j] / 1e9:.6g}GHz"
        pt = sweep.points[0][j]
        reason = sweep.reasons[0][j]
        if pt is None:
            table.add(freq[j] / 1e9, *([None] * 15))
            reasons.add(freq[j] / 1e9, reason or "masked")
            statuses.append((label, reason or "masked"))
            continue
        table.add(freq[j] / 1e9,
                  pt.Z11.real, pt.Z11.imag, pt.Z12.real, pt.Z12.imag,
                  pt.Z21.real, pt.Z21.imag, pt.Z22.real, pt.Z22.imag,
                  *pt.se, pt.V_phi / 1e-3, pt.v_mean / 1e-6, pt.temperature)
        if reason:
            # present but flagged; the value stays in the table
            reasons.add(freq[j] / 1e9, reason)
        statuses.append((label, "ok"))
    best = max((j for j in range(freq.size) if sweep.points[0][j]),
               key=lambda j: abs(sweep.points[0][j].Z21), default=None)
    summary = [("V_phi_mV_per_Phi0", _fmt(sweep.V_phi[0] / 1e-3)),
               ("V_uV", _fmt(sweep.v_mean[0] / 1e-6)),
               ("T_e_K", _fmt(sweep.temperature[0]))]
    if best is not None:
        summary += [
            ("max_abs_Z21_ohm", _fmt(abs(sweep.points[0][best].Z21))),
            ("max_abs_Z21_at_freq_GHz", _fmt(freq[best] / 1e9)),
        ]
    return [table, reasons], summary, statuses


def _run_smatrix(config: RunConfig):
    bias = _require(config, "bias")
    network = _require(config, "network")
    flux = _grid(_require(config, "flux_sweep"))
    freq = _grid(_require(config, "freq_sweep"))
    table = _Table("smatrix.csv", ["flux_Phi0", "freq_GHz", "S21_dB",
                                   "S12_dB"])
    reasons = _Table("smatrix_reasons.csv", ["flux_Phi0", "freq_GHz",
                                             "reason"])
    statics = _Table("smatrix_flux.csv", ["flux_Phi0", "V_uV",
                                          "V_phi_mV_per_Phi0", "T_e_K"])
    if flux.size == 0 or freq.size == 0:
        return [table, reasons, statics], [], []
    smap = scattering_map(config.device, bias.I_b, flux, freq, network,
                          config.sim, workers=config.workers)
    statuses = []
    best21 = (None, -math.inf)
    best12 = (None, math.inf)
    n_masked = 0
    for k in range(flux.size):
        statics.add(flux[k], smap.v_mean[k] / 1e-6, smap.V_phi[k] / 1e-3,
                    smap.temperature[k])
        for j in range(freq.size):
            label = f"flux={flux[k]:.6g},freq={freq[j] / 1e9:.6g}GHz"
            reason = smap.reasons[k][j]
            masked = reason is not None and reason != "lockin_not_converged"
            if masked:
                table.add(flux[k], freq[j] / 1e9, None, None)
                reasons.add(flux[k], freq[j] / 1e9, reason)
                statuses.append((label, reason))
                n_masked += 1
                continue
            table.add(flux[k], freq[j] / 1e9, smap.S21_dB[k, j],
                      smap.S12_dB[k, j])
            if reason:
                reasons.add(flux[k], freq[j] / 1e9, reason)
            statuses.append((label, "ok"))
            if smap.S21_dB[k, j] > best21[1]:
                best21 = ((flux[k], freq[j]), smap.S21_dB[k, j])
            if smap.S12_dB[k, j] < best12[1]:
                best12 = ((flux[k], freq[j]), smap.S12_dB[k, j])
    summary = [("bias_current_uA", _fmt(bias.I_b / 1e-6)),
               ("masked_points", str(n_masked))]
    if best21[0] is not None:
        summary += [
            ("peak_S21_dB", _fmt(best21[1])),
            ("peak_S21_at_flux_Phi0", _fmt(best21[0][0])),
            ("peak_S21_at_freq_GHz", _fmt(best21[0][1] / 1e9)),
            ("min_S12_dB", _fmt(best12[1])),
            ("min_S12_at_flux_Phi0", _fmt(best12[0][0])),
            ("min_S12_at_freq_GHz", _fmt(best12[0][1] / 1e9)),
        ]
    return [table, reasons, statics], summary, statuses


def _run_backaction(config: RunConfig):
    bias, qc, v_mean = _chain_inputs(config)
    opts = config.backaction
    report = backaction_report(config.device, qc, bias, v_mean,
                               T_cold=opts.T_cold,
                               dephasing_method=opts.dephasing)
    table = _Table("backaction.csv", [
        "I_b_uA", "phi_a_Phi0", "V_uV", "P_nW", "T_e_K", "T_eff_K",
        "n_bar", "stark_shift_MHz", "dephasing_rate_per_us",
        "f_josephson_GHz"])
    table.add(bias.I_b / 1e-6, bias.phi_a, v_mean / 1e-6,
              report.P_dissipated / 1e-9, report.T_electron,
              report.T_cavity_effective, report.n_bar_steady,
              report.stark_shift / 1e6, report.dephasing_rate * 1e-6,
              report.f_josephson / 1e9)
    summary = [
        ("T_e", _fmt(report.T_electron)),
        ("T_eff", _fmt(report.T_cavity_effective)),
        ("n_bar", _fmt(report.n_bar_steady)),
        ("stark_shift", _fmt(report.stark_shift)),
        ("dephasing_rate", _fmt(report.dephasing_rate)),
        ("f_josephson", _fmt(report.f_josephson)),
        ("P_dissipated", _fmt(report.P_dissipated)),
    ]
    summary += [(f"note_{i}", note) for i, note in enumerate(report.notes)]
    return [table], summary, [("working_point", "ok")]


def _run_ramsey(config: RunConfig):
    bias, qc, v_mean = _chain_inputs(config)
    opts = config.backaction
    report = backaction_report(config.device, qc, bias, v_mean,
                               T_cold=opts.T_cold,
                               dephasing_method=opts.dephasing)
    grid = config.ramsey
    hs = _grid(grid.head_start)
    tau = np.linspace(0.0, grid.evolution[0], int(grid.evolution[1]))
    surface = ramsey_surface(qc, report.n_bar_steady, hs, tau,
                             dephasing_method=opts.dephasing)
    table = _Table("ramsey.csv", ["head_start_us", "tau_us", "signal"])
    for i in range(hs.size):
        for j in range(tau.size):
            table.add(hs[i] / 1e-6, tau[j] / 1e-6, surface[i, j])
    freqs = [extract_fringe_frequency(tau, surface[i], qc.ramsey_detuning)
             for i in range(hs.size)]
    fit = _Table("ramsey_frequency.csv", ["head_start_us",
                                          "fringe_freq_MHz"])
    for i in range(hs.size):
        fit.add(hs[i] / 1e-6, freqs[i] / 1e6)
    summary = [("n_bar", _fmt(report.n_bar_steady)),
               ("stark_shift", _fmt(report.stark_shift))]
    statuses = [(f"head_start={hs[i] / 1e-6:.6g}us", "ok")
                for i in range(hs.size)]
    if hs.size >= 3:
        try:
            f_inf, df, tau_rise = fit_frequency_rise(hs, freqs)
            summary += [("f_inf_MHz", _fmt(f_inf / 1e6)),
                        ("delta_f_MHz", _fmt(df / 1e6)),
                        ("tau_rise_ns", _fmt(tau_rise / 1e-9))]
        except RuntimeError:
            summary.append(("frequency_rise_fit", "did_not_converge"))
    return [table, fit], summary, statuses


def _run_pulsed(config: RunConfig):
    bias, qc, v_mean = _chain_inputs(config)
    opts = config.backaction
    report = backaction_report(config.device, qc, bias, v_mean,
                               T_cold=opts.T_cold,
                               dephasing_method=opts.dephasing)
    win = config.pulsed
    sep = win.pulse_separation
    events = [
        PulseEvent(kind="pi_half", t_start=0.0),
        PulseEvent(kind="pi_half", t_start=sep),
        PulseEvent(kind="slug_active", t_start=win.slug_window[0],
                   t_end=win.slug_window[1]),
        PulseEvent(kind="measurement", t_start=sep,
                   t_end=sep + win.measure_length),
    ]
    timeline = pulsed_mode_timeline(qc, report.n_bar_steady, events)
    table = _Table("pulsed.csv", ["t_start_us", "t_end_us", "slug_active",
                                  "n_start", "n_end"])
    for t0, t1, on, n0, n1 in timeline.segments:
        table.add(t0 / 1e-6, t1 / 1e-6, int(on), n0, n1)
    continuous = 2.0 * math.pi * (2.0 * qc.chi_over_2pi) \
        * report.n_bar_steady * sep
    summary = [
        ("n_bar_steady", _fmt(report.n_bar_steady)),
        ("photon_exposure_photon_s", _fmt(timeline.photon_exposure)),
        ("stark_phase_rad", _fmt(timeline.stark_phase)),
        ("continuous_stark_phase_rad", _fmt(continuous)),
    ]
    statuses = [(f"segment={k}", "ok")
                for k in range(timeline.segments.shape[0])]
    return [table], summary, statuses


_EXPERIMENTS = {
    "vphi": _run_vphi,
    "twoport": _run_twoport,
    "smatrix": _run_smatrix,
    "backaction": _run_backaction,
    "ramsey": _run_ramsey,
    "pulsed": _run_pulsed,
}


def _resolve_output_dir(config: RunConfig, override) -> Path:
    if override is not None:
        return Path(override)
    env = os.environ.get("SLUGSIM_OUTPUT_DIR")
    if env:
        return Path(env)
    return Path(config.output_dir)


def emit_artifacts(tables, summary, out_dir: Path) -> dict:
    """Write tables and the summary; returns name -> sha256."""
    digests = {}
    for table in tables:
        text = table.text()
        (out_dir / table.name).write_text(text)
        digests[table.name] = hashlib.sha256(text.encode()).hexdigest()
    lines = [f"{key} = {val}" for key, val in summary]
    text = "\n".join(lines) + "\n"
    (out_dir / SUMMARY_FILE).write_text(text)
    digests[SUMMARY_FILE] = hashlib.sha256(text.encode()).hexdigest()
    return digests


def run(config: RunConfig, output_dir=None) -> RunManifest:
    """Execute the configured experiment and write its artifacts.

    output_dir overrides the config (the SLUGSIM_OUTPUT_DIR environment
    variable sits between the two).  Per-point failures are masked in
    the tables; the run itself only aborts on config or I/O problems.
    """
    out_dir = _resolve_output_dir(config, output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as err:
        raise OutputError(
            f"output directory not writable: {err}") from err

    t0 = time.monotonic()
    tables, summary, statuses = _EXPERIMENTS[config.experiment](config)
    wall = time.monotonic() - t0

    digests = emit_artifacts(tables, summary, out_dir)
    manifest = RunManifest(
        experiment=config.experiment,
        code_version=__version__,
        seed=config.sim.seed,
        workers=config.workers,
        wall_time_s=wall,
        config_text=dump_config(config),
        points_ok=sum(1 for _, state in statuses if state == "ok"),
        points_masked=sum(1 for _, state in statuses if state != "ok"),
        statuses=tuple(statuses),
        files=digests,
    )
    (out_dir / MANIFEST_FILE).write_text(manifest.to_json())
    return manifest
