"""Small-signal two-port extraction from driven Langevin runs.

The working point is probed with a weak sinusoidal current on one port at a
time; lock-in demodulation of the junction voltages at the probe frequency
gives one column of the complex impedance matrix per probe,

    Z21 = dV_out/dI_in    Z11 = dV_in/dI_in     (input-current probe)
    Z12 = dV_in/dI_out    Z22 = dV_out/dI_out   (output-current probe)

where the output probe rides on the bias current and the input-port voltage
is reconstructed from the phase trajectory: for the direct-injection device
it is the voltage across the loop inductor (the junction phase-rate
difference), for the transformer-coupled model it is the mutual EMF of the
circulating current.  Two unprobed runs at slightly shifted flux provide the
static transfer slope V_phi and the mean voltage of the working point.

Averaging is organised in blocks covering an integer number of probe
periods; block scatter gives a standard error per matrix element and the
span is extended until every element meets its tolerance.  Closed-form
counterparts of the transimpedances and the forward/reverse ratio are
provided for comparison against the extracted values.

For the direct-injection device the port polarities follow the wiring in
which the forward transimpedance equals +L*V_phi and the passive
reverse transfer is inductive with a positive reactance; in that
orientation the coherent cancellation of the reverse coupling falls on
the negative-slope side of the transfer curve.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _engine
from .constants import PHI0
from .device import (BiasPoint, DeviceParams, SimConfig, _out_weights,
                     _scalars, normalize, resolve_noise_temperature)
from .errors import (BiasStateError, IntegrationStabilityError,
                     NonlinearityError, ParameterDomainError)

# Returned by directionality() at the exact cancellation point.
INFINITE_DIRECTIONALITY = math.inf

# (input flux probe in Phi0, output current probe in I0); well inside the
# linear window at default device parameters.
DEFAULT_PROBE = (1e-3, 1e-2)

_SUPERCURRENT_V = 1e-6  # V; mean voltages below this count as zero-voltage

# Task-index offsets inside one extraction (order: input probe, output
# probe, static at +dphi, static at -dphi, then the same four repeated for
# the half-amplitude linearity check).
_SLOTS = 8


@dataclass(frozen=True)
class TwoPortZ:
    """Complex two-port impedance matrix of the device at one working point.

    omega is the probe angular frequency in rad/s; Z21 the forward and Z12
    the reverse transimpedance, Z11 and Z22 the input and output impedances,
    all in ohms.  V_phi is the static transfer slope in V per flux quantum
    and v_mean the mean output voltage in V at the bias.  se holds the
    lock-in standard errors of (Z11, Z12, Z21, Z22); converged records
    whether every element met its tolerance within the averaging cap.
    """

    omega: float
    Z11: complex
    Z12: complex
    Z21: complex
    Z22: complex
    bias: BiasPoint
    V_phi: float
    v_mean: float = 0.0
    temperature: float = 0.0
    se: tuple = (0.0, 0.0, 0.0, 0.0)
    n_blocks: int = 0
    converged: bool = True


@dataclass(frozen=True)
class BiasConstants:
    """Dimensionless port constants of the matched-gain expressions.

    rho_i scales the input resistance R_i = rho_i (omega L)^2 / R, rho_o
    the output resistance R_o = rho_o R; chi_r is the reverse-coupling
    constant, None when the working point sits at the cancellation where
    it cannot be divided out.
    """

    rho_i: float
    rho_o: float
    chi_r: float | None


@dataclass
class _Targets:
    rel_tol: float
    floors: tuple  # absolute floors for (Z11, Z12, Z21, Z22) in ohm
    v_floor: float
    vphi_floor: float


def _probe_pair(probe_amplitude):
    if probe_amplitude is None:
        return DEFAULT_PROBE
    if isinstance(probe_amplitude, (int, float)):
        p = float(probe_amplitude)
        if p <= 0:
            raise ParameterDomainError("probe_amplitude must be positive")
        # keep the default flux:current ratio so halving scales both ports
        return (p, p * DEFAULT_PROBE[1] / DEFAULT_PROBE[0])
    flux_amp, bias_amp = probe_amplitude
    if flux_amp <= 0 or bias_amp <= 0:
        raise ParameterDomainError("probe amplitudes must be positive")
    return (float(flux_amp), float(bias_amp))


def _floors(abs_floor):
    if isinstance(abs_floor, (int, float)):
        return (float(abs_floor),) * 4
    floors = tuple(float(f) for f in abs_floor)
    if len(floors) != 4:
        raise ParameterDomainError(
            "abs_floor needs one value or four (Z11, Z12, Z21, Z22)")
    return floors


def _port_signs(topology: str) -> tuple[float, float]:
    """(flux_sign, input_sign) fixing the port orientation per topology.

    The direct-injection wiring is the opposite-handed one: its flux
    coil and input line run against the bias return, which mirrors the
    flux axis and reverses the input polarity relative to the symmetric
    layout.  This is the orientation described in the module docstring.
    """
    if topology == "slug":
        return (-1.0, -1.0)
    return (1.0, 1.0)


def _complex_se(blocks: np.ndarray) -> float:
    if blocks.size < 2:
        return math.inf
    n = blocks.size
    return math.sqrt((blocks.real.var(ddof=1) + blocks.imag.var(ddof=1)) / n)


def _scalar_se(blocks: np.ndarray) -> float:
    if blocks.size < 2:
        return math.inf
    return blocks.std(ddof=1) / math.sqrt(blocks.size)


class _ProbeReducer:
    """Turns one probe task's lock-in sums into its two Z elements.

    kind "in" yields (Z_trans, Z_port) = (Z21, Z11), kind "out" (Z12
    measured on the input port, Z22); denom is the dimensionless probe
    current amplitude in I0.
    """

    def __init__(self, kind, topology, device, norm, w_dim, denom, drive_flux):
        self.kind = kind
        self.topology = topology
        self.R = device.R
        self.beta_m = 2.0 * device.M * device.I0 / PHI0
        self.beta_l = norm.beta_L
        self.w_dim = w_dim
        self.denom = denom
        self.drive_flux = drive_flux  # flux-drive phasor seen by the loop
        self.w_out = _out_weights(topology)
        self.in_sign = _port_signs(topology)[1]

    def _v_phasors(self, v1, v2):
        vout = self.w_out[0] * v1 + self.w_out[1] * v2
        if self.topology == "slug":
            vin = self.in_sign * (v2 - v1)
        else:
            vin = (self.beta_m / self.beta_l) * (
                (v2 - v1) - 2j * math.pi * self.w_dim * self.drive_flux)
        return vout, vin

    def z_pair(self, x1, y1, x2, y2):
        vout, vin = self._v_phasors(x1 - 1j * y1, x2 - 1j * y2)
        if self.kind == "in":
            return (self.R * vout / self.denom, self.R * vin / self.denom)
        return (self.R * vin / self.denom, self.R * vout / self.denom)

    def z_blocks(self, table):
        vout, vin = self._v_phasors(table[:, 3] - 1j * table[:, 4],
                                    table[:, 5] - 1j * table[:, 6])
        if self.kind == "in":
            return (self.R * vout / self.denom, self.R * vin / self.denom)
        return (self.R * vin / self.denom, self.R * vout / self.denom)


def _static_v_blocks(table, topology):
    w1, w2 = _out_weights(topology)
    return w1 * table[:, 1] + w2 * table[:, 2]


class _Extraction:
    """Shared machinery: a batch of probe and static tasks advanced in
    period-aligned blocks until the per-element standard errors meet their
    targets, with converged tasks dropped from the batch as they finish."""

    def __init__(self, device, norm, scalars, sim, w_dim, targets,
                 block_time, min_blocks, max_blocks):
        self.device = device
        self.norm = norm
        self.scalars = scalars
        self.sim = sim
        self.w_dim = w_dim
        self.targets = targets
        self.min_blocks = min_blocks if sim.noise_enabled else 2
        self.max_blocks = max_blocks
        self.block_steps = _engine.block_steps_for(w_dim, sim.dt, block_time)
        self.tasks = []      # (task, reducer-or-None, static_group)
        self.reducers = {}   # task index -> _ProbeReducer
        self.static_groups = {}  # group key -> dict(indices, dphi)

    def noise_scale(self):
        if not self.sim.noise_enabled or self.norm.gamma_noise <= 0:
            return 0.0
        return math.sqrt(2.0 * self.norm.gamma_noise / self.sim.dt)

    def add_probe(self, kind, index, ib0, phia, flux_amp, bias_amp, topology):
        ns = self.noise_scale()
        if kind == "in":
            task = _engine.Task(index=index, ib0=ib0, phia=phia,
                                amp_flux=flux_amp, omega=self.w_dim,
                                noise_scale=ns)
            denom = _port_signs(topology)[1] * 2.0 * flux_amp / (
                2.0 * self.device.M * self.device.I0 / PHI0)
            drive_flux = flux_amp
        else:
            task = _engine.Task(index=index, ib0=ib0, phia=phia,
                                amp_bias=bias_amp, omega=self.w_dim,
                                noise_scale=ns)
            denom = bias_amp
            drive_flux = self.scalars.cbias * bias_amp
        self.tasks.append(task)
        self.reducers[index] = _ProbeReducer(
            kind, topology, self.device, self.norm, self.w_dim, denom,
            drive_flux)

    def add_statics(self, group, index0, ib0, phia, dphi, topology):
        # static tasks sit at user flux +-dphi; phia is already in engine
        # coordinates, so the offsets carry the topology's flux sign
        ns = self.noise_scale()
        sdphi = _port_signs(topology)[0] * dphi
        self.tasks.append(_engine.Task(index=index0, ib0=ib0,
                                       phia=phia + sdphi, omega=self.w_dim,
                                       noise_scale=ns))
        self.tasks.append(_engine.Task(index=index0 + 1, ib0=ib0,
                                       phia=phia - sdphi, omega=self.w_dim,
                                       noise_scale=ns))
        self.static_groups[group] = {
            "plus": index0, "minus": index0 + 1, "dphi": dphi,
            "topology": topology,
        }

    def _probe_converged(self, reducer, stat):
        zt, zp = reducer.z_blocks(stat.block_table())
        se_t, se_p = _complex_se(zt), _complex_se(zp)
        if reducer.kind == "in":
            f_trans, f_port = self.targets.floors[2], self.targets.floors[0]
        else:
            f_trans, f_port = self.targets.floors[0 + 1], self.targets.floors[3]
        mt = abs(zt.mean())
        mp = abs(zp.mean())
        ok_t = se_t <= max(self.targets.rel_tol * mt, f_trans)
        ok_p = se_p <= max(self.targets.rel_tol * mp, f_port)
        return ok_t and ok_p

    def _static_converged(self, group, stats_by_index):
        g = self.static_groups[group]
        sp = stats_by_index.get(g["plus"])
        sm = stats_by_index.get(g["minus"])
        if sp is None or sm is None:
            return False
        vu = self.norm.voltage_unit
        vp = _static_v_blocks(sp.block_table(), g["topology"]) * vu
        vm = _static_v_blocks(sm.block_table(), g["topology"]) * vu
        n = min(vp.size, vm.size)
        slope = (vp[:n] - vm[:n]) / (2.0 * g["dphi"])
        vbar = 0.5 * (vp[:n] + vm[:n])
        ok_s = _scalar_se(slope) <= max(
            self.targets.rel_tol * abs(slope.mean()), self.targets.vphi_floor)
        ok_v = _scalar_se(vbar) <= max(
            self.targets.rel_tol * abs(vbar.mean()), self.targets.v_floor)
        return ok_s and ok_v

    def run(self, seed):
        """Advance everything to convergence; returns ({index: stats}, bool).

        Statics in a group converge together; probes individually.  The
        flag reports whether every task finished under the block cap.
        """
        batch = _engine.Batch(self.scalars, self.tasks, seed, self.sim.dt)
        n_tr = int(round(max(self.sim.t_transient,
                             6.0 * math.pi / self.w_dim if self.w_dim > 0
                             else 0.0) / self.sim.dt))
        batch.advance(n_tr)
        batch.reset_accumulators()

        done: dict[int, _engine.TaskStats] = {}
        blocks = 0
        while batch.n:
            todo = self.min_blocks if blocks == 0 else max(4, blocks // 2)
            todo = min(todo, self.max_blocks - blocks)
            if todo <= 0:
                break
            for _ in range(todo):
                batch.advance(self.block_steps, record_block=True)
            blocks += todo

            live = {t.index: s for t, s in zip(batch.tasks, batch.stats)}
            finished = set()
            for idx, stat in live.items():
                red = self.reducers.get(idx)
                if red is not None and self._probe_converged(red, stat):
                    finished.add(idx)
            for group, g in self.static_groups.items():
                pool = {**done, **live}
                if (g["plus"] in live or g["minus"] in live) \
                        and self._static_converged(group, pool):
                    finished.update(i for i in (g["plus"], g["minus"])
                                    if i in live)
            if finished:
                keep = [t.index not in finished for t in batch.tasks]
                for task, stat in batch.drop(keep):
                    done[task.index] = stat
        converged = batch.n == 0
        for task, stat in zip(batch.tasks, batch.stats):
            done[task.index] = stat
        return done, converged

    def static_results(self, group, stats_by_index):
        """(v_mean V, V_phi V/Phi0, se_v, se_vphi) for one static pair."""
        g = self.static_groups[group]
        sp = stats_by_index[g["plus"]]
        sm = stats_by_index[g["minus"]]
        vu = self.norm.voltage_unit
        w1, w2 = _out_weights(g["topology"])
        vp_mean = (w1 * sp.v_means()[0] + w2 * sp.v_means()[1]) * vu
        vm_mean = (w1 * sm.v_means()[0] + w2 * sm.v_means()[1]) * vu
        v_mean = 0.5 * (vp_mean + vm_mean)
        v_phi = (vp_mean - vm_mean) / (2.0 * g["dphi"])
        vp = _static_v_blocks(sp.block_table(), g["topology"]) * vu
        vm = _static_v_blocks(sm.block_table(), g["topology"]) * vu
        n = min(vp.size, vm.size)
        se_v = _scalar_se(0.5 * (vp[:n] + vm[:n]))
        se_vphi = _scalar_se((vp[:n] - vm[:n]) / (2.0 * g["dphi"]))
        return v_mean, v_phi, se_v, se_vphi

    def probe_results(self, index, stats_by_index):
        """((Z_trans, Z_port), (se_trans, se_port)) for one probe task."""
        red = self.reducers[index]
        stat = stats_by_index[index]
        zt, zp = red.z_pair(*stat.quadratures())
        bt, bp = red.z_blocks(stat.block_table())
        return (zt, zp), (_complex_se(bt), _complex_se(bp))


def extract_two_port(device: DeviceParams, bias: BiasPoint, omega: float,
                     sim: SimConfig, probe_amplitude=None, *,
                     topology: str = "slug", temperature: float | None = None,
                     rel_tol: float = 0.02, abs_floor=0.02,
                     v_floor: float = 1e-7, vphi_floor: float = 2e-5,
                     dphi: float = 0.005, block_time: float = 2000.0,
                     min_blocks: int = 8, max_blocks: int = 1024,
                     require_gain: bool = False,
                     verify_linearity: bool = False,
                     index_base: int = 0) -> TwoPortZ:
    """Measure the two-port impedance matrix at a working point.

    Parameters
    ----------
    device, bias, sim : as in the device module.
    omega : float
        Probe angular frequency in rad/s.
    probe_amplitude : float, pair, or None
        Input-flux probe amplitude in Phi0 (paired with an output-current
        probe scaled by the default ratio), or an explicit (flux in Phi0,
        current in I0) pair.  None gives (1e-3, 1e-2).
    topology : "slug" or "symmetric"
        Injection geometry; sets how the input-port voltage is formed.
    temperature : float or None
        Electron temperature for the Johnson noise; None resolves it
        self-consistently from the dissipation at this bias.
    rel_tol, abs_floor : float or 4-tuple
        Averaging stops once each element's standard error is below
        rel_tol of its magnitude or the absolute floor (ohm), whichever
        is larger; floors may be given per element (Z11, Z12, Z21, Z22).
    require_gain : bool
        Demand a finite-voltage working point; raises a bias-state error
        when the mean voltage is indistinguishable from zero.
    verify_linearity : bool
        Repeat the extraction at half amplitude and reject the result if
        any element moves by more than 5%.

    Returns
    -------
    TwoPortZ
    """
    if omega <= 0:
        raise ParameterDomainError("omega must be positive")
    flux_amp, bias_amp = _probe_pair(probe_amplitude)
    if temperature is None:
        temperature = resolve_noise_temperature(device, bias, sim, topology)
    norm = normalize(device, temperature if sim.noise_enabled else 0.0)
    scalars = _scalars(device, norm, topology)
    targets = _Targets(rel_tol=rel_tol, floors=_floors(abs_floor),
                       v_floor=v_floor, vphi_floor=vphi_floor)

    w_dim = omega * norm.time_unit
    ib0 = bias.I_b / device.I0
    phia_task = _port_signs(topology)[0] * bias.phi_a - scalars.cbias * ib0

    ext = _Extraction(device, norm, scalars, sim, w_dim, targets,
                      block_time, min_blocks, max_blocks)
    ext.add_probe("in", index_base + 0, ib0, phia_task, flux_amp, bias_amp,
                  topology)
    ext.add_probe("out", index_base + 1, ib0, phia_task, flux_amp, bias_amp,
                  topology)
    ext.add_statics("bias", index_base + 2, ib0, phia_task, dphi, topology)
    stats, converged = ext.run(sim.seed)

    v_mean, v_phi, _, _ = ext.static_results("bias", stats)
    if require_gain and abs(v_mean) < _SUPERCURRENT_V:
        raise BiasStateError(
            f"zero-voltage working point (|V| = {abs(v_mean):.2e} V); "
            "gain extraction needs a finite-voltage bias")

    (z21, z11), (se21, se11) = ext.probe_results(index_base + 0, stats)
    (z12, z22), (se12, se22) = ext.probe_results(index_base + 1, stats)
    result = TwoPortZ(
        omega=omega, Z11=z11, Z12=z12, Z21=z21, Z22=z22, bias=bias,
        V_phi=v_phi, v_mean=v_mean, temperature=temperature,
        se=(se11, se12, se21, se22),
        n_blocks=max(s.blocks and len(s.blocks) or 0 for s in stats.values()),
        converged=converged)

    if verify_linearity:
        half = extract_two_port(
            device, bias, omega, sim, (flux_amp / 2.0, bias_amp / 2.0),
            topology=topology, temperature=temperature, rel_tol=rel_tol,
            abs_floor=abs_floor, v_floor=v_floor, vphi_floor=vphi_floor,
            dphi=dphi, block_time=block_time, min_blocks=min_blocks,
            max_blocks=max_blocks, index_base=index_base + _SLOTS // 2)
        drifts = []
        for name in ("Z11", "Z12", "Z21", "Z22"):
            a = getattr(result, name)
            b = getattr(half, name)
            scale = max(abs(a), 10.0 * max(targets.floors))
            drifts.append((name, abs(a - b) / scale))
        bad = [f"{n} {d:.1%}" for n, d in drifts if d > 0.05]
        if bad:
            raise NonlinearityError(
                "response shifts by more than 5% when the probe is halved: "
                + ", ".join(bad))
    return result


def analytic_Zf(device: DeviceParams, V_phi: float) -> float:
    """Forward transimpedance L * V_phi of the flux-to-voltage transfer.

    V_phi in V per flux quantum; returns ohms.
    """
    return device.L * V_phi / PHI0


def analytic_ImZr(device: DeviceParams, V_phi: float, omega: float,
                  chi_r: float) -> float:
    """Reverse reactance chi_r * omega*L * (1 + (L/R) V_phi) in ohms.

    The Faraday term omega*L and the quantum-interference term proportional
    to the transfer slope add coherently; at V_phi = -R/L they cancel
    exactly.  V_phi in V per flux quantum.
    """
    v_wb = V_phi / PHI0
    return chi_r * omega * device.L * (1.0 + device.L * v_wb / device.R)


def loaded_transfer_inductance(device: DeviceParams, omega: float) -> float:
    """Effective transfer inductance of the passive device at omega, in H.

    The junctions load the body inductance: with Z_j the parallel RL_J
    junction impedance and Z_L = j omega L, the passive reverse transfer
    is Z_L Z_j / (Z_L + 2 Z_j) and its reactance defines L_eff < L.  The
    reverse-coupling cancellation therefore sits at
    V_phi = -(R/L)(L_eff/L) per flux quantum rather than at -R/L.
    """
    if omega <= 0:
        raise ParameterDomainError("omega must be positive")
    L_J = PHI0 / (2.0 * math.pi * device.I0)
    Zj = 1.0 / (1.0 / (1j * omega * L_J) + 1.0 / device.R)
    ZL = 1j * omega * device.L
    return (ZL * Zj / (ZL + 2.0 * Zj)).imag / omega


def directionality(device: DeviceParams, V_phi: float, omega: float,
                   chi_r: float):
    """Forward/reverse power ratio of the matched amplifier.

    Returns (D, D_dB) with D = chi_r^-2 (V_phi/omega)^2 (1 + L V_phi/R)^-2,
    V_phi converted to V/Wb.  At the cancellation point both entries are
    the tagged INFINITE_DIRECTIONALITY value.
    """
    if omega <= 0:
        raise ParameterDomainError("omega must be positive")
    v_wb = V_phi / PHI0
    bracket = 1.0 + device.L * v_wb / device.R
    if abs(bracket) < 1e-9:
        return INFINITE_DIRECTIONALITY, INFINITE_DIRECTIONALITY
    d = (v_wb / omega) ** 2 / (chi_r ** 2 * bracket ** 2)
    return d, 10.0 * math.log10(d) if d > 0 else -math.inf


def extract_bias_constants(two_port: TwoPortZ,
                           device: DeviceParams) -> BiasConstants:
    """Dimensionless port constants from an extracted two-port.

    rho_i = Re[Z11] R / (omega L)^2, rho_o = Re[Z22] / R, and chi_r divides
    the measured Im[Z12] by the closed-form bracket; within 1e-3 of the
    cancellation the division is meaningless and chi_r comes back None.
    """
    wl = two_port.omega * device.L
    rho_i = two_port.Z11.real * device.R / wl ** 2
    rho_o = two_port.Z22.real / device.R
    bracket = 1.0 + device.L * (two_port.V_phi / PHI0) / device.R
    if abs(bracket) < 1e-3:
        return BiasConstants(rho_i=rho_i, rho_o=rho_o, chi_r=None)
    return BiasConstants(rho_i=rho_i, rho_o=rho_o,
                         chi_r=two_port.Z12.imag / (wl * bracket))


@dataclass
class TwoPortSweep:
    """Two-port matrices over a (flux x frequency) grid at fixed bias.

    points[k][j] holds the TwoPortZ at flux[k], omega[j] (None where the
    point was skipped or failed); reasons[k][j] carries the skip reason
    ("supercurrent_state", "lockin_not_converged", "numerical") or None.
    The static columns are per flux point.
    """

    flux: np.ndarray
    omega: np.ndarray
    bias_current: float
    points: list = field(default_factory=list)
    reasons: list = field(default_factory=list)
    v_mean: np.ndarray | None = None
    V_phi: np.ndarray | None = None
    temperature: np.ndarray | None = None


# Index namespaces for sweep tasks; keeps every (flux, frequency, probe)
# combination on its own deterministic noise stream however the work is
# chunked or threaded.
_SWEEP_STATIC_BASE = 1 << 21
_SWEEP_PROBE_STRIDE = 4


def two_port_sweep(device: DeviceParams, i_bias: float, flux_grid,
                   omega_grid, sim: SimConfig, *, topology: str = "slug",
                   probe_amplitude=(3e-3, 3e-2), rel_tol: float = 0.05,
                   abs_floor=(0.05, 0.06, 0.08, 0.2), dphi: float = 0.005,
                   block_time: float = 1500.0, min_blocks: int = 6,
                   max_blocks: int = 48, temperature: float | None = None,
                   workers: int = 1) -> TwoPortSweep:
    """Extract two-port matrices across a flux grid and a frequency grid.

    One pair of static runs per flux point supplies the working-point
    voltage and transfer slope shared by all frequencies; flux points in
    the zero-voltage state are masked instead of probed.  The per-task
    noise streams are fixed by grid position, so any `workers` count gives
    identical output.
    """
    flux = np.asarray(flux_grid, dtype=float)
    omegas = np.asarray(omega_grid, dtype=float)
    if flux.size == 0 or omegas.size == 0:
        raise ParameterDomainError("flux and frequency grids must be non-empty")
    if (omegas <= 0).any():
        raise ParameterDomainError("omega grid must be positive")
    flux_amp, bias_amp = _probe_pair(probe_amplitude)
    floors = _floors(abs_floor)

    # Per-flux electron temperature (the dissipation varies along the grid).
    temps = np.empty(flux.size)
    for k, phi in enumerate(flux):
        temps[k] = (temperature if temperature is not None else
                    resolve_noise_temperature(
                        device, BiasPoint(I_b=i_bias, phi_a=phi), sim,
                        topology))

    # Statics for every flux point run as one batch at omega = 0.
    norm0 = normalize(device, temps[0] if sim.noise_enabled else 0.0)
    scalars = _scalars(device, norm0, topology)
    ib0 = i_bias / device.I0
    targets = _Targets(rel_tol=rel_tol, floors=floors, v_floor=1e-7,
                       vphi_floor=2e-5)
    static_ext = _Extraction(device, norm0, scalars, sim, 0.0, targets,
                             block_time, min_blocks, max_blocks)
    norms = []
    for k, phi in enumerate(flux):
        norm_k = normalize(device, temps[k] if sim.noise_enabled else 0.0)
        norms.append(norm_k)
        static_ext.norm = norm_k  # noise scale for this pair's tasks
        static_ext.add_statics(
            k, _SWEEP_STATIC_BASE + 2 * k, ib0,
            _port_signs(topology)[0] * phi - scalars.cbias * ib0, dphi,
            topology)
    static_ext.norm = norm0
    static_stats, _ = static_ext.run(sim.seed)

    v_means = np.empty(flux.size)
    v_phis = np.empty(flux.size)
    for k in range(flux.size):
        static_ext.norm = norms[k]
        v_means[k], v_phis[k], _, _ = static_ext.static_results(
            k, static_stats)
    active = np.abs(v_means) >= _SUPERCURRENT_V

    def run_frequency(j):
        w = omegas[j]
        col_pts: list = [None] * flux.size
        col_rsn: list = [None] * flux.size
        kidx = [k for k in range(flux.size) if active[k]]
        if not kidx:
            for k in range(flux.size):
                col_rsn[k] = "supercurrent_state"
            return col_pts, col_rsn
        ext = _Extraction(device, norms[kidx[0]], scalars, sim,
                          w * norm0.time_unit, targets, block_time,
                          min_blocks, max_blocks)
        for k in kidx:
            ext.norm = norms[k]
            base = (j * flux.size + k) * _SWEEP_PROBE_STRIDE
            phia_task = (_port_signs(topology)[0] * flux[k]
                         - scalars.cbias * ib0)
            ext.add_probe("in", base + 0, ib0, phia_task, flux_amp,
                          bias_amp, topology)
            ext.add_probe("out", base + 1, ib0, phia_task, flux_amp,
                          bias_amp, topology)
        ext.norm = norms[kidx[0]]
        try:
            stats, _ = ext.run(sim.seed)
        except IntegrationStabilityError:
            for k in range(flux.size):
                col_rsn[k] = "numerical" if active[k] else "supercurrent_state"
            return col_pts, col_rsn
        for k in range(flux.size):
            if not active[k]:
                col_rsn[k] = "supercurrent_state"
                continue
            base = (j * flux.size + k) * _SWEEP_PROBE_STRIDE
            (z21, z11), (se21, se11) = ext.probe_results(base + 0, stats)
            (z12, z22), (se12, se22) = ext.probe_results(base + 1, stats)
            ses = (se11, se12, se21, se22)
            means = (abs(z11), abs(z12), abs(z21), abs(z22))
            fl = (floors[0], floors[1], floors[2], floors[3])
            ok = all(s <= max(rel_tol * m, f)
                     for s, m, f in zip(ses, means, fl))
            col_pts[k] = TwoPortZ(
                omega=w, Z11=z11, Z12=z12, Z21=z21, Z22=z22,
                bias=BiasPoint(I_b=i_bias, phi_a=flux[k]),
                V_phi=v_phis[k], v_mean=v_means[k], temperature=temps[k],
                se=ses, converged=ok)
            if not ok:
                col_rsn[k] = "lockin_not_converged"
        return col_pts, col_rsn

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(run_frequency, range(omegas.size)))
    else:
        columns = [run_frequency(j) for j in range(omegas.size)]

    sweep = TwoPortSweep(flux=flux, omega=omegas, bias_current=i_bias,
                         v_mean=v_means, V_phi=v_phis, temperature=temps)
    sweep.points = [[columns[j][0][k] for j in range(omegas.size)]
                    for k in range(flux.size)]
    sweep.reasons = [[columns[j][1][k] for j in range(omegas.size)]
                     for k in range(flux.size)]
    return sweep
