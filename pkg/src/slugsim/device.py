"""Device parameters, normalization, and Langevin dynamics of the SLUG loop.

The device is a superconducting loop with two resistively shunted Josephson
junctions.  In dimensionless junction units (time Phi0/(2*pi*I0*R), currents
I0, voltages I0*R, flux Phi0) the phases obey

    beta_C d1'' + d1' + sin d1 = i_b/2 + j + i_n1
    beta_C d2'' + d2' + sin d2 = i_b/2 - j + i_n2
    j = [(d2 - d1)/pi - 2 phi_tot] / beta_L

with independent Johnson noise currents i_n of spectral density 4 k_B T / R
per shunt.  Two bias-injection topologies are supported:

``"symmetric"``
    The input current couples flux M*I_in to the loop and nothing else:
    phi_tot = phi_a + (M/Phi0) I_in.  Output voltage is the junction average
    (d1' + d2')/2.  The transfer curve is even and Phi0-periodic in phi_a.

``"slug"``
    Direct injection, the low-inductance galvanometer geometry: the loop
    inductor carries the input current (in at the free inductor node, out
    at ground), and the bias current returns through the loop.  Flux
    quantization of the three-node circuit maps it onto the symmetric
    model with phi_tot picking up an extra -(L/2Phi0) I_b, output voltage
    taken across the grounded junction (d1'), and input voltage equal to
    the phase-rate difference (d2' - d1'), the voltage across the loop
    inductor in the input-line orientation.  Statics are identical to the
    symmetric model up to a flux offset, which this module compensates so
    that ``BiasPoint.phi_a`` always names the effective loop flux.

Public entry points integrate single trajectories (`integrate_langevin`) and
flux-transfer curves (`v_phi_curve`); all take and return physical SI values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _engine
from .constants import BOLTZMANN, PHI0
from .errors import GradientUndefinedError, ParameterDomainError

TOPOLOGIES = ("symmetric", "slug")

_RESOLVER_INDEX_BASE = 1 << 40  # task-index namespace for internal runs


@dataclass(frozen=True)
class DeviceParams:
    """Physical device parameters (SI units).

    Parameters
    ----------
    I0 : float
        Junction critical current in A.
    R : float
        Shunt resistance per junction in ohm.
    C : float
        Junction capacitance in F; 0 gives the overdamped model.
    L : float
        Loop inductance in H.
    M : float
        Input mutual inductance in H; equals L for direct injection.
    shunt_volume : float
        Normal-metal volume of each shunt in m^3 (hot-electron model).
    sigma_ep : float
        Electron-phonon coupling in W m^-3 K^-5.
    T_phonon : float
        Phonon (bath) temperature in K.
    T_electron_override : float or None
        Fixed electron temperature for the noise model; None computes it
        from the dissipated power.
    """

    I0: float = 20e-6
    R: float = 8.0
    C: float = 0.0
    L: float = 6.7e-12
    M: float = 6.7e-12
    shunt_volume: float = 5e-19
    sigma_ep: float = 1.2e9
    T_phonon: float = 0.1
    T_electron_override: float | None = None

    def __post_init__(self):
        for name in ("I0", "R", "L", "M", "shunt_volume", "sigma_ep"):
            if getattr(self, name) <= 0:
                raise ParameterDomainError(f"{name} must be positive")
        if self.C < 0:
            raise ParameterDomainError("C must be non-negative")
        if self.T_phonon < 0:
            raise ParameterDomainError("T_phonon must be non-negative")
        if self.T_electron_override is not None and self.T_electron_override < 0:
            raise ParameterDomainError("T_electron_override must be non-negative")


@dataclass(frozen=True)
class Normalization:
    """Dimensionless-unit system derived from device parameters.

    time_unit (s), voltage_unit (V), current_unit (A) and flux_unit (Wb)
    convert between physical and junction units; beta_L, beta_C and
    gamma_noise are the dimensionless loop, damping, and noise parameters.
    """

    time_unit: float
    voltage_unit: float
    current_unit: float
    flux_unit: float
    beta_L: float
    beta_C: float
    gamma_noise: float


def normalize(device: DeviceParams, temperature: float) -> Normalization:
    """Build the dimensionless unit system for a device at a noise temperature.

    Parameters
    ----------
    device : DeviceParams
    temperature : float
        Electron temperature in K entering the Johnson-noise strength
        gamma = 2 pi k_B T / (I0 Phi0).
    """
    if temperature < 0:
        raise ParameterDomainError("temperature must be non-negative")
    tau = PHI0 / (2.0 * math.pi * device.I0 * device.R)
    return Normalization(
        time_unit=tau,
        voltage_unit=device.I0 * device.R,
        current_unit=device.I0,
        flux_unit=PHI0,
        beta_L=2.0 * device.L * device.I0 / PHI0,
        beta_C=2.0 * math.pi * device.I0 * device.R**2 * device.C / PHI0,
        gamma_noise=2.0 * math.pi * BOLTZMANN * temperature / (device.I0 * PHI0),
    )


@dataclass(frozen=True)
class BiasPoint:
    """Static working point: bias current I_b (A) and loop flux phi_a (Phi0)."""

    I_b: float
    phi_a: float = 0.0


@dataclass(frozen=True)
class Drive:
    """Small sinusoidal probe on one port.

    port is "input_flux" (amplitude in Phi0 units, i.e. M*I_in/Phi0) or
    "output_current" (amplitude in A added to the bias current); frequency
    in Hz.
    """

    port: str
    amplitude: float
    frequency: float

    def __post_init__(self):
        if self.port not in ("input_flux", "output_current"):
            raise ParameterDomainError(f"unknown drive port {self.port!r}")
        if self.amplitude < 0:
            raise ParameterDomainError("drive amplitude must be non-negative")
        if self.frequency <= 0:
            raise ParameterDomainError("drive frequency must be positive")


@dataclass(frozen=True)
class SimConfig:
    """Integration controls, in dimensionless junction time.

    dt is the Heun step, t_total the full span, t_transient the discarded
    lead-in; seed feeds the per-task noise streams; noise_enabled switches
    the Johnson noise terms.
    """

    dt: float = 0.01
    t_total: float = 2e5
    t_transient: float = 1e3
    seed: int = 1
    noise_enabled: bool = True

    def __post_init__(self):
        if not 0.0 < self.dt <= 0.1:
            raise ParameterDomainError("dt must be in (0, 0.1]")
        if self.t_transient < 0 or self.t_transient >= self.t_total:
            raise ParameterDomainError("need 0 <= t_transient < t_total")


@dataclass(frozen=True)
class PhaseTrajectory:
    """Recorded phase dynamics (SI units at the boundary).

    times are sample times in s; delta1/delta2 are junction phases in rad at
    those times; v_inst is the output voltage in V averaged over each
    storage window (so v_inst.mean() is the exact time average); j_circ is
    the loop circulating current in A at the sample times; v_mean is the
    post-transient mean output voltage in V.
    """

    times: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray
    v_inst: np.ndarray
    j_circ: np.ndarray
    v_mean: float


@dataclass(frozen=True)
class TransferCurve:
    """Static flux-to-voltage transfer curve.

    flux in Phi0 units, v_mean in V, v_phi = dV/dphi_a in V/Phi0 by centered
    differences, v_se the standard error of each v_mean in V.
    """

    flux: np.ndarray
    v_mean: np.ndarray
    v_phi: np.ndarray
    v_se: np.ndarray


def _scalars(device: DeviceParams, norm: Normalization, topology: str,
             junctions_enabled: bool = True) -> _engine.EngineScalars:
    if topology not in TOPOLOGIES:
        raise ParameterDomainError(f"unknown topology {topology!r}")
    # Direct injection: the bias current returns through the loop inductor,
    # so it couples flux -beta_L/4 in the orientation where the input line
    # couples +M (flux quantization of the three-node loop).
    cbias = -0.25 * norm.beta_L if topology == "slug" else 0.0
    return _engine.EngineScalars(
        beta_l=norm.beta_L,
        beta_c=norm.beta_C,
        cbias=cbias,
        sin_scale=1.0 if junctions_enabled else 0.0,
    )


def _out_weights(topology: str) -> tuple[float, float]:
    return (1.0, 0.0) if topology == "slug" else (0.5, 0.5)


def resolve_noise_temperature(device: DeviceParams, bias: BiasPoint,
                              sim: SimConfig, topology: str = "symmetric",
                              iterations: int = 2) -> float:
    """Electron temperature used for the Johnson noise.

    Returns the override when one is set.  Otherwise the electron
    temperature is computed self-consistently from the static dissipation
    I_b * V at the working point: starting from the phonon temperature, a
    short simulation gives V, the hot-electron balance gives T_e, and the
    loop repeats.  The T^5 bath coupling makes two passes plenty.
    """
    if device.T_electron_override is not None:
        return device.T_electron_override
    probe_sim = SimConfig(dt=sim.dt, t_total=2e4, t_transient=5e2,
                          seed=sim.seed, noise_enabled=sim.noise_enabled)
    temperature = device.T_phonon
    for k in range(iterations):
        v_mean = _static_v_mean(device, bias, probe_sim, topology, temperature,
                                index=_RESOLVER_INDEX_BASE + k)
        power = abs(bias.I_b * v_mean)
        temperature = hot_electron_temperature(
            power, device.sigma_ep, device.shunt_volume, device.T_phonon)
    return temperature


def hot_electron_temperature(power: float, sigma_ep: float, volume: float,
                             T_phonon: float) -> float:
    """T_e from the T^5 electron-phonon balance P = sigma V (T_e^5 - T_p^5)."""
    if power < 0:
        raise ParameterDomainError("power must be non-negative")
    if sigma_ep <= 0 or volume <= 0:
        raise ParameterDomainError("sigma_ep and volume must be positive")
    if T_phonon < 0:
        raise ParameterDomainError("T_phonon must be non-negative")
    return (power / (sigma_ep * volume) + T_phonon**5) ** 0.2


def static_voltage(device: DeviceParams, bias: BiasPoint, sim: SimConfig,
                   topology: str = "slug",
                   temperature: float | None = None) -> float:
    """Mean output voltage at a working point, in V.

    With temperature None and noise enabled, the electron temperature is
    resolved self-consistently first; the dissipation chain feeds on the
    value returned here.
    """
    if sim.noise_enabled:
        if temperature is None:
            temperature = resolve_noise_temperature(device, bias, sim,
                                                    topology)
    else:
        temperature = 0.0
    return _static_v_mean(device, bias, sim, topology, temperature,
                          index=_RESOLVER_INDEX_BASE + 8)


def _static_v_mean(device, bias, sim, topology, temperature, index=0) -> float:
    """Mean output voltage in V from an accumulator-only run."""
    norm = normalize(device, temperature if sim.noise_enabled else 0.0)
    scalars = _scalars(device, norm, topology)
    dt = sim.dt
    ib0 = bias.I_b / device.I0
    task = _engine.Task(
        index=index, ib0=ib0, phia=bias.phi_a - scalars.cbias * ib0,
        noise_scale=math.sqrt(2.0 * norm.gamma_noise / dt)
        if sim.noise_enabled and norm.gamma_noise > 0 else 0.0)
    batch = _engine.Batch(scalars, [task], sim.seed, dt)
    n_tr = int(round(sim.t_transient / dt))
    n_main = int(round((sim.t_total - sim.t_transient) / dt))
    batch.advance(n_tr)
    batch.reset_accumulators()
    batch.advance(n_main)
    v1, v2 = batch.stats[0].v_means()
    w1, w2 = _out_weights(topology)
    return (w1 * v1 + w2 * v2) * norm.voltage_unit


def integrate_langevin(device: DeviceParams, bias: BiasPoint, sim: SimConfig,
                       drive: Drive | None = None, *,
                       topology: str = "symmetric",
                       temperature: float | None = None,
                       junctions_enabled: bool = True,
                       stability_bound: float = 1e3,
                       max_samples: int = 1 << 20) -> PhaseTrajectory:
    """Integrate the loop equations and return the recorded trajectory.

    Parameters
    ----------
    device, bias, sim
        Physical device, working point, and integration controls.
    drive : Drive, optional
        Single-tone probe on the input-flux or output-current port.
    topology : str
        "symmetric" or "slug" bias injection (see module docstring).
    temperature : float, optional
        Noise temperature in K; default resolves the electron temperature
        from the dissipation (or uses the device override).
    junctions_enabled : bool
        False removes the Josephson elements (the I0 -> 0 limit), leaving
        linear shunts; useful as an analytic cross-check.
    stability_bound : float
        Integration aborts when |d delta/dt| exceeds this, which signals a
        step too coarse for the device (only reachable with beta_C > 0).
    max_samples : int
        Cap on stored samples; longer runs store window-averaged velocities
        with a correspondingly larger stride.

    Identical device, bias, sim, and drive values produce a bit-identical
    trajectory; the noise stream is derived from (sim.seed, task index).
    """
    if sim.noise_enabled:
        if temperature is None:
            temperature = resolve_noise_temperature(device, bias, sim, topology)
    else:
        temperature = 0.0
    norm = normalize(device, temperature)
    scalars = _scalars(device, norm, topology, junctions_enabled)
    dt = sim.dt
    ib0 = bias.I_b / device.I0
    amp_flux = amp_bias = omega = 0.0
    if drive is not None:
        omega = 2.0 * math.pi * drive.frequency * norm.time_unit
        if drive.port == "input_flux":
            amp_flux = drive.amplitude
        else:
            amp_bias = drive.amplitude / device.I0
    task = _engine.Task(
        index=0, ib0=ib0, phia=bias.phi_a - scalars.cbias * ib0,
        amp_flux=amp_flux, amp_bias=amp_bias, omega=omega,
        noise_scale=math.sqrt(2.0 * norm.gamma_noise / dt)
        if sim.noise_enabled and norm.gamma_noise > 0 else 0.0)
    batch = _engine.Batch(scalars, [task], sim.seed, dt,
                          stability_bound=stability_bound)
    n_tr = int(round(sim.t_transient / dt))
    n_main = int(round((sim.t_total - sim.t_transient) / dt))
    if n_main < 1:
        raise ParameterDomainError("t_total leaves no post-transient span")
    stride = max(1, -(-n_main // max_samples))
    n_main -= n_main % stride
    st_d1, st_d2, st_v1, st_v2 = batch.run_trajectory(n_tr, n_main, stride)

    d1 = st_d1[:, 0]
    d2 = st_d2[:, 0]
    nstore = d1.shape[0]
    t_dl = sim.t_transient + (np.arange(1, nstore + 1)) * stride * dt
    w1, w2 = _out_weights(topology)
    v_inst = (w1 * st_v1[:, 0] + w2 * st_v2[:, 0]) * norm.voltage_unit
    # Circulating current at the sample times.  For the slug topology the
    # physical loop-inductor current is i_b/2 - i_in - j.
    ib_t = ib0 + amp_bias * np.cos(omega * t_dl)
    iin_t = amp_flux * np.cos(omega * t_dl) * 2.0 / (
        2.0 * device.M * device.I0 / PHI0)
    phi_tot = (task.phia + amp_flux * np.cos(omega * t_dl)
               + scalars.cbias * ib_t)
    j = ((d2 - d1) / math.pi - 2.0 * phi_tot) / norm.beta_L
    if topology == "slug":
        j = 0.5 * ib_t - iin_t - j
    return PhaseTrajectory(
        times=t_dl * norm.time_unit,
        delta1=d1.copy(),
        delta2=d2.copy(),
        v_inst=v_inst,
        j_circ=j * norm.current_unit,
        v_mean=float(v_inst.mean()),
    )


def v_phi_curve(device: DeviceParams, i_bias: float, flux_grid, sim: SimConfig,
                *, topology: str = "symmetric",
                temperature: float | None = None,
                n_blocks: int = 16) -> TransferCurve:
    """Static transfer curve V(phi_a) at fixed bias current.

    Runs one noise realization per flux point (independent streams derived
    from (sim.seed, point index)), averages the post-transient output
    voltage, and forms dV/dphi by centered differences on the grid.  The
    standard error per point comes from scatter across n_blocks sub-spans.

    Parameters
    ----------
    i_bias : float
        Bias current in A.
    flux_grid : array_like
        Effective loop flux points in Phi0 units; at least 3 points.
    """
    flux = np.asarray(flux_grid, dtype=float)
    if flux.ndim != 1 or flux.size < 3:
        raise GradientUndefinedError(
            "flux grid needs at least 3 points for centered differences")
    bias_ref = BiasPoint(I_b=i_bias, phi_a=0.25)
    if sim.noise_enabled:
        if temperature is None:
            temperature = resolve_noise_temperature(device, bias_ref, sim,
                                                    topology)
    else:
        temperature = 0.0
    norm = normalize(device, temperature)
    scalars = _scalars(device, norm, topology)
    dt = sim.dt
    ib0 = i_bias / device.I0
    noise_scale = (math.sqrt(2.0 * norm.gamma_noise / dt)
                   if sim.noise_enabled and norm.gamma_noise > 0 else 0.0)
    tasks = [
        _engine.Task(index=k, ib0=ib0, phia=phi - scalars.cbias * ib0,
                     noise_scale=noise_scale)
        for k, phi in enumerate(flux)
    ]
    batch = _engine.Batch(scalars, tasks, sim.seed, dt)
    n_tr = int(round(sim.t_transient / dt))
    n_main = int(round((sim.t_total - sim.t_transient) / dt))
    block = max(1, n_main // n_blocks)
    batch.advance(n_tr)
    batch.reset_accumulators()
    for _ in range(n_blocks):
        batch.advance(block, record_block=True)

    w1, w2 = _out_weights(topology)
    v_mean = np.empty(flux.size)
    v_se = np.empty(flux.size)
    for k, stat in enumerate(batch.stats):
        v1, v2 = stat.v_means()
        v_mean[k] = (w1 * v1 + w2 * v2) * norm.voltage_unit
        table = stat.block_table()
        bv = (w1 * table[:, 1] + w2 * table[:, 2]) * norm.voltage_unit
        v_se[k] = bv.std(ddof=1) / math.sqrt(len(bv))
    v_phi = np.gradient(v_mean, flux)
    return TransferCurve(flux=flux, v_mean=v_mean, v_phi=v_phi, v_se=v_se)
