"""S-parameters of the matched amplifier.

Embeds an extracted two-port in its input matching section and the
50 Ohm source/load environment, computes forward and reverse scattering
versus flux and frequency, and carries the closed-form matched-gain
expressions used as analytic cross-checks.

The input section is a single-pole LC transformer: a shunt capacitor on
the source side followed by a series inductor into the device, so a
device input resistance of Z_char**2/Z_source is brought to a perfect
match at the design center frequency.  The output couples straight to
the load with no matching section, which is recorded in the map notes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .device import DeviceParams, SimConfig
from .errors import ParameterDomainError, PassivityViolationError
from .twoport import BiasConstants, TwoPortZ, two_port_sweep

DB_FLOOR = -120.0
_SHORT_Z21 = 1e-12  # Ohm; below this the device branch is an ideal short


@dataclass(frozen=True)
class MatchingNetwork:
    """Single-pole input transformer.

    L_m is the series inductance into the device, C_m the shunt
    capacitance across the source; Z_char = sqrt(L_m/C_m) is exposed as
    a derived attribute so it cannot drift from the element values.
    """

    L_m: float
    C_m: float
    f_center: float
    Z_source: float = 50.0
    Z_load: float = 50.0
    topology: str = "series-L/shunt-C"

    def __post_init__(self):
        for name in ("L_m", "C_m", "f_center", "Z_source", "Z_load"):
            if not getattr(self, name) > 0:
                raise ParameterDomainError(f"{name} must be positive")

    @property
    def Z_char(self) -> float:
        return math.sqrt(self.L_m / self.C_m)

    @classmethod
    def design(cls, Z_char: float = 2.0, f_center: float = 6e9,
               Z_source: float = 50.0, Z_load: float = 50.0
               ) -> "MatchingNetwork":
        """Element values for a given characteristic impedance: at
        f_center the section transforms Z_char**2/Z_source up to the
        source impedance."""
        if not Z_char > 0 or not f_center > 0:
            raise ParameterDomainError("Z_char and f_center must be positive")
        w = 2.0 * math.pi * f_center
        return cls(L_m=Z_char / w, C_m=1.0 / (w * Z_char),
                   f_center=f_center, Z_source=Z_source, Z_load=Z_load)

    def abcd(self, omega: float) -> np.ndarray:
        """Transmission matrix source -> device at angular frequency."""
        shunt = np.array([[1.0, 0.0], [1j * omega * self.C_m, 1.0]])
        series = np.array([[1.0, 1j * omega * self.L_m], [0.0, 1.0]])
        return shunt @ series


class SParams(NamedTuple):
    S21: complex
    S12: complex
    S11: complex
    S22: complex
    tag: str = ""


def ideal_matched_gain(two_port: TwoPortZ, constants: BiasConstants,
                       device: DeviceParams) -> tuple[float, float]:
    """Forward and reverse power gain with both ports conjugately
    matched: |Z21|^2/(4 R_i R_o) and |Z12|^2/(4 R_i R_o)."""
    w = two_port.omega
    r_in = constants.rho_i * (w * device.L) ** 2 / device.R
    r_out = constants.rho_o * device.R
    if r_in <= 0 or r_out <= 0:
        raise PassivityViolationError(
            f"matched gain needs dissipative ports (R_i = {r_in:.3e} Ohm, "
            f"R_o = {r_out:.3e} Ohm); the extraction is unusable here")
    scale = 1.0 / (4.0 * r_in * r_out)
    return (abs(two_port.Z21) ** 2 * scale, abs(two_port.Z12) ** 2 * scale)


def _sparams_from_abcd(abcd: np.ndarray, z_s: float, z_l: float) -> SParams:
    a, b = abcd[0]
    c, d = abcd[1]
    denom = a * z_l + b + c * z_s * z_l + d * z_s
    root = 2.0 * math.sqrt(z_s * z_l)
    return SParams(
        S21=root / denom,
        S12=root * (a * d - b * c) / denom,
        S11=(a * z_l + b - c * z_s * z_l - d * z_s) / denom,
        S22=(-a * z_l + b - c * z_s * z_l + d * z_s) / denom)


def cascade_s_parameters(two_port: TwoPortZ, network: MatchingNetwork,
                         omega: float) -> SParams:
    """Scattering of the matched chain, referenced to Z_source and
    Z_load.

    A transfer impedance too small to convert (a superconducting short
    in place of the device) yields the tagged ideal-short result: zero
    transmission, unit-magnitude reflection off the lossless input
    section, and full reflection at the output.
    """
    if not omega > 0:
        raise ParameterDomainError("omega must be positive")
    net = network.abcd(omega)
    if abs(two_port.Z21) < _SHORT_Z21:
        # reflection of the input section terminated in a short; the
        # B/(D*Zs) form stays regular at the section's parallel resonance
        b, d = net[0, 1], net[1, 1]
        s11 = (b - d * network.Z_source) / (b + d * network.Z_source)
        return SParams(S21=0j, S12=0j, S11=s11, S22=-1.0 + 0j,
                       tag="ideal_short")
    dz = two_port.Z11 * two_port.Z22 - two_port.Z12 * two_port.Z21
    dev = np.array([[two_port.Z11, dz], [1.0, two_port.Z22]]) / two_port.Z21
    return _sparams_from_abcd(net @ dev, network.Z_source, network.Z_load)


def _db(mag: float) -> float:
    if mag <= 0 or not math.isfinite(mag):
        return DB_FLOOR
    return max(20.0 * math.log10(mag), DB_FLOOR)


@dataclass(frozen=True)
class ScatteringMap:
    """Forward/reverse gain surfaces over flux and frequency.

    Entries are always finite; points without a usable working point
    sit at the dB floor with the cause in reasons (None where the entry
    is a real measurement).
    """

    flux_grid: np.ndarray
    freq_grid: np.ndarray
    S21_dB: np.ndarray
    S12_dB: np.ndarray
    bias_current: float
    reasons: tuple
    V_phi: np.ndarray
    v_mean: np.ndarray
    temperature: np.ndarray
    network: MatchingNetwork
    notes: tuple = ()

    def __post_init__(self):
        shape = (len(self.flux_grid), len(self.freq_grid))
        for name in ("S21_dB", "S12_dB"):
            if getattr(self, name).shape != shape:
                raise ParameterDomainError(f"{name} must have shape {shape}")
        if not (np.all(np.isfinite(self.S21_dB))
                and np.all(np.isfinite(self.S12_dB))):
            raise ParameterDomainError("map entries must be finite")


def scattering_map(device: DeviceParams, I_b: float, flux_grid,
                   freq_grid, network: MatchingNetwork, sim: SimConfig, *,
                   topology: str = "slug", temperature=None,
                   probe_amplitude=(3e-3, 3e-2), rel_tol: float = 0.05,
                   abs_floor=(0.05, 0.06, 0.08, 0.2),
                   block_time: float = 1500.0, min_blocks: int = 6,
                   max_blocks: int = 48, workers: int = 1) -> ScatteringMap:
    """Sweep the two-port over flux and frequency and cascade each
    point through the matching section.

    Flux points in the zero-voltage state are masked without probing;
    a point whose lock-in did not reach its error target keeps its
    value with the cause recorded alongside.
    """
    flux = np.asarray(flux_grid, dtype=float)
    freqs = np.asarray(freq_grid, dtype=float)
    if flux.size == 0 or freqs.size == 0:
        raise ParameterDomainError("flux and frequency grids are required")
    sweep = two_port_sweep(
        device, I_b, flux, 2.0 * math.pi * freqs, sim, topology=topology,
        probe_amplitude=probe_amplitude, rel_tol=rel_tol,
        abs_floor=abs_floor, block_time=block_time, min_blocks=min_blocks,
        max_blocks=max_blocks, temperature=temperature, workers=workers)

    s21 = np.full((flux.size, freqs.size), DB_FLOOR)
    s12 = np.full((flux.size, freqs.size), DB_FLOOR)
    for k in range(flux.size):
        for j in range(freqs.size):
            pt = sweep.points[k][j]
            if pt is None:
                continue
            sp = cascade_s_parameters(pt, network, 2.0 * math.pi * freqs[j])
            s21[k, j] = _db(abs(sp.S21))
            s12[k, j] = _db(abs(sp.S12))

    return ScatteringMap(
        flux_grid=flux, freq_grid=freqs, S21_dB=s21, S12_dB=s12,
        bias_current=I_b, reasons=sweep.reasons, V_phi=sweep.V_phi,
        v_mean=sweep.v_mean, temperature=sweep.temperature, network=network,
        notes=("output couples straight to the load with no matching "
               "section",))
