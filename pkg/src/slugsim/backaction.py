"""Classical backaction of the amplifier on a dispersively read-out qubit.

The chain is: static dissipation in the shunts heats the electrons above the
phonon bath (T^5 hot-electron balance); the hot shunts radiate thermal
photons into the readout cavity, which together with the cold line defines
an effective cavity temperature; the resulting photon occupation Stark
shifts the qubit and dephases it.  A Ramsey fringe surface versus
amplifier-on head start reproduces the transient cavity fill, and a pulsed
timeline tracks the photon exposure of timed sequences.

All functions are closed-form; simulation enters only through the measured
mean voltage that sets the dissipated power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import curve_fit

from .constants import BOLTZMANN, PLANCK, PHI0
from .device import BiasPoint, DeviceParams, hot_electron_temperature
from .errors import ParameterDomainError, SequenceValidationError


@dataclass(frozen=True)
class QubitCavityParams:
    """Dispersive readout parameters.

    chi_over_2pi is chi/2pi in Hz, so the qubit-state-dependent cavity
    shift 2chi/2pi is twice this number and the Stark shift per photon is
    2 * chi_over_2pi.  kappa is the cavity energy decay rate in 1/s, T2 the
    intrinsic qubit dephasing time, ramsey_detuning the deliberate drive
    detuning of the fringe experiment.
    """

    f_cavity: float = 6.605e9
    chi_over_2pi: float = 0.75e6
    kappa: float = 1.0 / 350e-9
    f_qubit: float = 5.5e9
    T2: float = 10e-6
    ramsey_detuning: float = 1e6

    def __post_init__(self):
        if self.f_cavity <= 0 or self.kappa <= 0 or self.T2 <= 0:
            raise ParameterDomainError(
                "f_cavity, kappa, and T2 must be positive")


@dataclass(frozen=True)
class BackactionReport:
    """Summary of the backaction chain at one working point."""

    P_dissipated: float        # W
    T_electron: float          # K
    T_cavity_effective: float  # K
    n_bar_steady: float        # photons
    stark_shift: float         # Hz
    dephasing_rate: float      # 1/s
    f_josephson: float         # Hz, reported for context only
    fringe_surface: np.ndarray | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)


def static_dissipation(device: DeviceParams, bias: BiasPoint,
                       v_mean: float) -> float:
    """Power I_b * V dissipated in the shunts at the static working point."""
    return abs(bias.I_b * v_mean)


def electron_temperature(power: float, device: DeviceParams) -> float:
    """Hot-electron temperature from the T^5 electron-phonon balance.

    Solves P = sigma_ep * volume * (T_e^5 - T_p^5) for T_e with the bath
    parameters taken from the device.
    """
    return hot_electron_temperature(power, device.sigma_ep,
                                    device.shunt_volume, device.T_phonon)


def photon_occupation(temperature: float, frequency: float) -> float:
    """Bose-Einstein occupation of a mode at the given temperature."""
    if frequency <= 0:
        raise ParameterDomainError("frequency must be positive")
    if temperature < 0:
        raise ParameterDomainError("temperature must be non-negative")
    if temperature == 0.0:
        return 0.0
    x = PLANCK * frequency / (BOLTZMANN * temperature)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def occupation_temperature(n_bar: float, frequency: float) -> float:
    """Temperature whose Bose-Einstein occupation equals n_bar (inverse)."""
    if frequency <= 0:
        raise ParameterDomainError("frequency must be positive")
    if n_bar < 0:
        raise ParameterDomainError("n_bar must be non-negative")
    if n_bar == 0.0:
        return 0.0
    return PLANCK * frequency / (BOLTZMANN * math.log1p(1.0 / n_bar))


def effective_cavity_temperature(T_hot: float, T_cold: float,
                                 frequency: float) -> float:
    """Temperature of a cavity coupled equally to a hot and a cold bath.

    With symmetric coupling the steady occupation is the mean of the two
    Bose-Einstein occupations; the result is the temperature reproducing
    that mean at the cavity frequency.
    """
    n_mean = 0.5 * (photon_occupation(T_hot, frequency)
                    + photon_occupation(T_cold, frequency))
    return occupation_temperature(n_mean, frequency)


def stark_shift(n_bar: float, qc: QubitCavityParams) -> float:
    """Qubit frequency shift (2 chi / 2 pi) * n_bar in Hz."""
    if n_bar < 0:
        raise ParameterDomainError("n_bar must be non-negative")
    return 2.0 * qc.chi_over_2pi * n_bar


def dephasing_rate(n_bar: float, qc: QubitCavityParams,
                   method: str = "exact") -> float:
    """Thermal-photon dephasing rate of the qubit in 1/s.

    method "exact" uses the full expression valid at any chi/kappa,

        Gamma = (kappa/2) Re[sqrt((1 + 2i chi/kappa)^2
                                   + 8i chi n_bar/kappa) - 1],

    with chi the angular dispersive shift 2 pi chi_over_2pi.  Its limits
    are 4 chi^2 n (n+1) / kappa for chi << kappa and kappa*n for
    chi >> kappa (one thermal photon suffices to dephase).

    method "perturbative" is the common shot-noise estimate
    8 chi^2 n (n+1) / kappa.  It carries the coherent-field correlation
    time 2/kappa instead of the thermal 1/kappa, so it sits a factor 2
    above the exact weak-coupling rate and grows without bound instead of
    saturating when chi ~ kappa.
    """
    if n_bar < 0:
        raise ParameterDomainError("n_bar must be non-negative")
    chi_ang = 2.0 * math.pi * qc.chi_over_2pi
    kappa = qc.kappa
    if method == "perturbative":
        return 8.0 * chi_ang**2 * n_bar * (n_bar + 1.0) / kappa
    if method != "exact":
        raise ParameterDomainError(f"unknown dephasing method {method!r}")
    z = (1.0 + 2j * chi_ang / kappa) ** 2 + 8j * chi_ang * n_bar / kappa
    return 0.5 * kappa * (np.sqrt(z) - 1.0).real


def cavity_fill(n_steady: float, kappa: float, t):
    """Cavity occupation n_steady * (1 - exp(-kappa t)) after switch-on."""
    if n_steady < 0:
        raise ParameterDomainError("n_steady must be non-negative")
    if kappa <= 0:
        raise ParameterDomainError("kappa must be positive")
    t = np.asarray(t, dtype=float)
    out = n_steady * -np.expm1(-kappa * np.clip(t, 0.0, None))
    return out if out.ndim else float(out)


def _fill_integral(n_steady, kappa, t_hs, tau):
    """Closed form of the photon exposure int_0^tau n(t_hs + u) du."""
    return n_steady * (tau - np.exp(-kappa * t_hs)
                       * -np.expm1(-kappa * tau) / kappa)


def ramsey_surface(qc: QubitCavityParams, n_steady: float,
                   head_start_grid, evolution_grid, *,
                   dephasing_method: str = "exact") -> np.ndarray:
    """Ramsey fringe amplitude versus amplifier head start and free evolution.

    The amplifier turns on at t = -t_hs; the first pi/2 pulse happens at
    t = 0 while the cavity is still filling.  Fringe phase advances with the
    deliberate detuning plus the Stark shift of the instantaneous photon
    number; the envelope combines intrinsic T2 with the accumulated
    thermal-photon dephasing.  Returns shape (len(head_start), len(tau)).
    """
    if n_steady < 0:
        raise ParameterDomainError("n_steady must be non-negative")
    t_hs = np.asarray(head_start_grid, dtype=float)[:, None]
    tau = np.asarray(evolution_grid, dtype=float)[None, :]
    phase = 2.0 * math.pi * (
        qc.ramsey_detuning * tau
        + 2.0 * qc.chi_over_2pi * _fill_integral(n_steady, qc.kappa, t_hs, tau))
    n_inst = cavity_fill(n_steady, qc.kappa, t_hs + tau)
    rates = np.vectorize(
        lambda n: dephasing_rate(n, qc, dephasing_method))(n_inst)
    # Accumulated dephasing: integral of the instantaneous rate over tau.
    gamma_int = cumulative_trapezoid(rates, tau[0], axis=1, initial=0.0)
    envelope = np.exp(-tau / qc.T2 - gamma_int)
    return envelope * np.cos(phase)


def extract_fringe_frequency(evolution_grid, fringe, f_guess: float,
                             window: float | None = None) -> float:
    """Dominant early-time fringe frequency by decaying-cosine least squares.

    Fits A exp(-g tau) cos(2 pi f tau + p) over tau <= window (default
    150 ns) and returns f in Hz.
    """
    tau = np.asarray(evolution_grid, dtype=float)
    y = np.asarray(fringe, dtype=float)
    if window is None:
        window = 150e-9
    sel = tau <= window
    if sel.sum() < 8:
        sel = slice(0, max(8, tau.size // 4))

    def model(t, a, g, f, p):
        return a * np.exp(-g * t) * np.cos(2 * math.pi * f * t + p)

    p0 = (1.0, 1e6, f_guess, 0.0)
    popt, _ = curve_fit(model, tau[sel], y[sel], p0=p0, maxfev=20000)
    return abs(popt[2])


def fit_frequency_rise(head_start_grid, frequencies):
    """Fit f(t) = f_inf - df * exp(-t/tau) to extracted fringe frequencies.

    Returns (f_inf, df, tau).
    """
    t = np.asarray(head_start_grid, dtype=float)
    f = np.asarray(frequencies, dtype=float)

    def model(x, f_inf, df, tau):
        return f_inf - df * np.exp(-x / tau)

    p0 = (f[-1], max(f[-1] - f[0], 1.0), max(t[-1] / 3.0, 1e-9))
    popt, _ = curve_fit(model, t, f, p0=p0, maxfev=20000)
    return float(popt[0]), float(popt[1]), float(popt[2])


@dataclass(frozen=True)
class PulseEvent:
    """Timeline event: kind "slug_active", "pi_half", or "measurement".

    Intervals carry t_start < t_end; pi/2 pulses are instantaneous
    (t_end defaults to t_start).
    """

    kind: str
    t_start: float
    t_end: float | None = None

    def __post_init__(self):
        if self.kind not in ("slug_active", "pi_half", "measurement"):
            raise SequenceValidationError(f"unknown event kind {self.kind!r}")
        end = self.t_start if self.t_end is None else self.t_end
        object.__setattr__(self, "t_end", end)
        if self.t_start < 0:
            raise SequenceValidationError("event times must be non-negative")
        if self.kind == "pi_half":
            if end != self.t_start:
                raise SequenceValidationError("pi/2 pulses are instantaneous")
        elif end <= self.t_start:
            raise SequenceValidationError(
                f"{self.kind} interval must have t_end > t_start")


@dataclass(frozen=True)
class PulsedTimeline:
    """Evaluated pulse sequence.

    segments rows are (t_start, t_end, active, n_start, n_end); exposure is
    the integrated photon number between the two pi/2 pulses in photon*s;
    stark_phase is the Stark phase 2 pi chi * exposure accrued over the
    free evolution, in rad.
    """

    segments: np.ndarray
    photon_exposure: float
    stark_phase: float


def pulsed_mode_timeline(qc: QubitCavityParams, n_steady: float,
                         events) -> PulsedTimeline:
    """Propagate cavity occupation through a pulsed amplifier sequence.

    The amplifier is active during "slug_active" intervals (cavity relaxes
    toward n_steady with rate kappa) and idle otherwise (relaxes toward 0).
    Exactly two pi/2 pulses delimit the free evolution; the returned
    exposure integrates n(t) between them.
    """
    events = list(events)
    active = sorted((e for e in events if e.kind == "slug_active"),
                    key=lambda e: e.t_start)
    for a, b in zip(active, active[1:]):
        if b.t_start < a.t_end:
            raise SequenceValidationError(
                "slug_active intervals must not overlap")
    pulses = sorted(e.t_start for e in events if e.kind == "pi_half")
    if len(pulses) != 2:
        raise SequenceValidationError(
            f"need exactly two pi/2 pulses, got {len(pulses)}")
    if pulses[0] == pulses[1]:
        raise SequenceValidationError("pi/2 pulses must be time-ordered")

    edges = {0.0}
    for e in active:
        edges.add(e.t_start)
        edges.add(e.t_end)
    edges.update(pulses)
    for e in events:
        if e.kind == "measurement":
            edges.add(e.t_start)
            edges.add(e.t_end)
    times = sorted(edges)

    def is_active(t0, t1):
        mid = 0.5 * (t0 + t1)
        return any(e.t_start <= mid < e.t_end for e in active)

    kappa = qc.kappa
    segments = []
    n = 0.0
    exposure = 0.0
    for t0, t1 in zip(times, times[1:]):
        on = is_active(t0, t1)
        target = n_steady if on else 0.0
        span = t1 - t0
        n_end = target + (n - target) * math.exp(-kappa * span)
        lo = max(t0, pulses[0])
        hi = min(t1, pulses[1])
        if hi > lo:
            # exposure over the clipped sub-span [lo, hi]
            n_lo = target + (n - target) * math.exp(-kappa * (lo - t0))
            sub = hi - lo
            exposure += (target * sub
                         + (n_lo - target) * -math.expm1(-kappa * sub) / kappa)
        segments.append((t0, t1, float(on), n, n_end))
        n = n_end
    return PulsedTimeline(
        segments=np.asarray(segments),
        photon_exposure=exposure,
        stark_phase=2.0 * math.pi * (2.0 * qc.chi_over_2pi) * exposure,
    )


def backaction_report(device: DeviceParams, qc: QubitCavityParams,
                      bias: BiasPoint, v_mean: float, *,
                      T_cold: float = 0.05,
                      dephasing_method: str = "exact",
                      head_start_grid=None, evolution_grid=None
                      ) -> BackactionReport:
    """Full chain from a measured working point to qubit backaction numbers.

    device supplies the hot-electron parameters; bias and v_mean the static
    working point.  T_cold is the temperature of the cold input line that
    shares the cavity coupling.  Passing both grids also attaches the
    Ramsey fringe surface.
    """
    power = static_dissipation(device, bias, v_mean)
    t_e = electron_temperature(power, device)
    n_bar = 0.5 * (photon_occupation(t_e, qc.f_cavity)
                   + photon_occupation(T_cold, qc.f_cavity))
    t_eff = occupation_temperature(n_bar, qc.f_cavity)
    surface = None
    if head_start_grid is not None and evolution_grid is not None:
        surface = ramsey_surface(qc, n_bar, head_start_grid, evolution_grid,
                                 dephasing_method=dephasing_method)
    notes = ["thermal photon model: classical heating only, "
             "dressed-state readout corrections not modeled",
             "emission at the Josephson fundamental is reported as "
             "f_josephson but assumed filtered, no qubit coupling"]
    if dephasing_method == "exact":
        notes.append("dephasing: exact thermal-photon rate, valid at "
                     "any chi/kappa; model choice beyond the base "
                     "heating description")
    else:
        notes.append("dephasing: shot-noise estimate 8 chi^2 n(n+1)/kappa, "
                     "overestimates the thermal rate when chi ~ kappa; "
                     "model choice beyond the base heating description")
    return BackactionReport(
        P_dissipated=power,
        T_electron=t_e,
        T_cavity_effective=t_eff,
        n_bar_steady=n_bar,
        stark_shift=stark_shift(n_bar, qc),
        dephasing_rate=dephasing_rate(n_bar, qc, dephasing_method),
        f_josephson=abs(v_mean) / PHI0,
        fringe_surface=surface,
        notes=tuple(notes),
    )
