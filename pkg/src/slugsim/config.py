"""Run configuration: strict TOML loading and round-trip emission.

Keys carry their physical units in the name (I0_uA, L_pH, f_center_GHz)
and are converted to SI here, so everything past this boundary works in
plain SI.  Unknown keys anywhere are rejected with their dotted path;
sections required by the chosen experiment must be present, while keys
inside a present section fall back to the published device values.

Unit conversion is a decimal exponent shift performed on the number's
source text (captured through the parser's float hook), never a float
multiply, so serialize -> parse recovers every value bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ImportError:  # 3.10
    import tomli as tomllib

from .backaction import QubitCavityParams
from .device import BiasPoint, DeviceParams, SimConfig
from .errors import ConfigError, ParameterDomainError
from .scattering import MatchingNetwork

EXPERIMENTS = ("vphi", "twoport", "smatrix", "backaction", "ramsey",
               "pulsed")

# sections each experiment needs beyond [device]/[sim] (always optional)
_REQUIRED = {
    "vphi": ("bias", "sweep"),
    "twoport": ("bias", "sweep"),
    "smatrix": ("bias", "sweep", "network"),
    "backaction": ("bias", "qubit_cavity"),
    "ramsey": ("bias", "qubit_cavity"),
    "pulsed": ("bias", "qubit_cavity", "pulsed"),
}


class _Raw(float):
    """Float that remembers its source text for exact unit shifting."""

    def __new__(cls, text: str):
        obj = super().__new__(cls, text)
        obj.raw = text
        return obj


def _shift(text: str, k: int) -> str:
    """Multiply a decimal literal by 10**k, exactly, in string space."""
    s = text.strip().replace("_", "")
    mant, _, exp = s.partition("e") if "e" in s else s.partition("E")
    exponent = int(exp) if exp else 0
    return f"{mant}e{exponent + k}"


def _si(value, k: int) -> float:
    """Convert a config-unit number to SI (value * 10**k)."""
    if isinstance(value, _Raw):
        text = value.raw
    elif isinstance(value, int):
        text = str(value)
    else:
        text = repr(float(value))
    out = float(text) if k == 0 else float(_shift(text, k))
    if not math.isfinite(out):
        raise ParameterDomainError(
            f"value {text!r} overflows its SI unit")
    return out


def _cfg_units(si_value: float, k: int) -> str:
    """Render an SI float in config units (si * 10**-k), exactly."""
    return repr(float(si_value)) if k == 0 else _shift(repr(float(si_value)),
                                                       -k)


@dataclass(frozen=True)
class BackactionOptions:
    T_cold: float = 0.05
    dephasing: str = "exact"


@dataclass(frozen=True)
class RamseyGrid:
    head_start: tuple = (0.0, 1e-6, 5)    # (start s, stop s, count)
    evolution: tuple = (2e-6, 801)        # (stop s, count); starts at 0


@dataclass(frozen=True)
class PulsedWindows:
    pulse_separation: float = 1e-6
    slug_window: tuple = (1.05e-6, 3e-6)
    measure_length: float = 2e-6


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    device: DeviceParams
    sim: SimConfig
    output_dir: str = "slugsim-out"
    workers: int = 1
    bias: BiasPoint | None = None
    flux_sweep: tuple | None = None       # (start, stop, count) in Phi0
    freq_sweep: tuple | None = None       # (start, stop, count) in Hz
    network: MatchingNetwork | None = None
    qubit_cavity: QubitCavityParams | None = None
    backaction: BackactionOptions = field(default_factory=BackactionOptions)
    ramsey: RamseyGrid | None = None
    pulsed: PulsedWindows | None = None


class _Section:
    """Tracks which keys were consumed so leftovers can be rejected
    with their dotted path."""

    def __init__(self, name: str, data: dict):
        self.name = name
        self.data = dict(data)
        self.seen: set = set()

    def _fetch(self, key, default, kinds, kindname):
        self.seen.add(key)
        if key not in self.data:
            return default
        val = self.data[key]
        if isinstance(val, bool) and bool not in kinds:
            val = None  # bools are ints in python; keep them out of numbers
        if val is None or not isinstance(val, kinds):
            raise ConfigError(f"expected {kindname}", field=self._path(key))
        return val

    def number(self, key, k=0, default=None):
        """Numeric key converted to SI by the decimal shift 10**k."""
        v = self._fetch(key, None, (int, float), "a number")
        if v is None:
            return default
        if not math.isfinite(float(v)):
            raise ConfigError("expected a finite number",
                              field=self._path(key))
        return _si(v, k)

    def integer(self, key, default=None):
        return self._fetch(key, default, (int,), "an integer")

    def boolean(self, key, default=None):
        return self._fetch(key, default, (bool,), "a boolean")

    def string(self, key, default=None):
        return self._fetch(key, default, (str,), "a string")

    def has(self, key) -> bool:
        return key in self.data

    def _path(self, key):
        return f"{self.name}.{key}" if self.name else key

    def finish(self):
        unknown = sorted(set(self.data) - self.seen)
        if unknown:
            raise ConfigError("unknown key", field=self._path(unknown[0]))


def _positive(value, path, *, allow_zero=False):
    ok = value >= 0 if allow_zero else value > 0
    if not ok:
        raise ParameterDomainError(
            f"{path} must be {'non-negative' if allow_zero else 'positive'}"
            f" (got {value!r})")
    return value


def _device_from(sec: _Section) -> DeviceParams:
    kwargs = {}
    for key, attr, k, zero_ok in (
            ("I0_uA", "I0", -6, False), ("R_ohm", "R", 0, False),
            ("C_fF", "C", -15, True), ("L_pH", "L", -12, False),
            ("M_pH", "M", -12, False),
            ("shunt_volume_um3", "shunt_volume", -18, False),
            ("sigma_ep_W_per_m3K5", "sigma_ep", 0, False),
            ("T_phonon_K", "T_phonon", 0, True)):
        val = sec.number(key, k)
        if val is not None:
            kwargs[attr] = _positive(val, sec._path(key),
                                     allow_zero=zero_ok)
    t_e = sec.number("T_electron_K")
    if t_e is not None:
        kwargs["T_electron_override"] = _positive(
            t_e, sec._path("T_electron_K"), allow_zero=True)
    sec.finish()
    try:
        return DeviceParams(**kwargs)
    except ParameterDomainError as err:
        raise ParameterDomainError(f"device: {err}") from err


def _sim_from(sec: _Section, seed: int) -> SimConfig:
    kwargs = {"seed": seed}
    for key in ("dt", "t_total", "t_transient"):
        val = sec.number(key)
        if val is not None:
            kwargs[key] = val
    noise = sec.boolean("noise")
    if noise is not None:
        kwargs["noise_enabled"] = noise
    sec.finish()
    try:
        return SimConfig(**kwargs)
    except ParameterDomainError as err:
        raise ParameterDomainError(f"sim: {err}") from err


def _bias_from(sec: _Section) -> BiasPoint:
    i_b = sec.number("I_b_uA", -6)
    if i_b is None:
        raise ConfigError("missing required key", field="bias.I_b_uA")
    phi = sec.number("phi_a_Phi0", 0, 0.0)
    sec.finish()
    return BiasPoint(I_b=i_b, phi_a=phi)


def _sweeps_from(sec: _Section):
    flux = None
    if any(key.startswith("flux_") for key in sec.data):
        start = sec.number("flux_start_Phi0")
        stop = sec.number("flux_stop_Phi0")
        count = sec.integer("flux_count")
        if start is None or stop is None or count is None:
            raise ConfigError("flux sweep needs flux_start_Phi0, "
                              "flux_stop_Phi0 and flux_count", field="sweep")
        # count 0 is a legal empty sweep; the runner emits header-only tables
        _positive(count, "sweep.flux_count", allow_zero=True)
        flux = (start, stop, count)
    freq = None
    if any(key.startswith("freq_") for key in sec.data):
        start = sec.number("freq_start_GHz", 9)
        stop = sec.number("freq_stop_GHz", 9)
        count = sec.integer("freq_count")
        if start is None or stop is None or count is None:
            raise ConfigError("frequency sweep needs freq_start_GHz, "
                              "freq_stop_GHz and freq_count", field="sweep")
        _positive(start, "sweep.freq_start_GHz")
        _positive(stop, "sweep.freq_stop_GHz")
        _positive(count, "sweep.freq_count", allow_zero=True)
        freq = (start, stop, count)
    sec.finish()
    return flux, freq


def _network_from(sec: _Section) -> MatchingNetwork:
    f_center = sec.number("f_center_GHz", 9, 6e9)
    z_s = sec.number("Z_source_ohm", 0, 50.0)
    z_l = sec.number("Z_load_ohm", 0, 50.0)
    by_elements = sec.has("L_m_pH") or sec.has("C_m_pF")
    if by_elements and sec.has("Z_char_ohm"):
        raise ConfigError(
            "give either Z_char_ohm or the explicit L_m_pH/C_m_pF pair, "
            "not both", field="network.Z_char_ohm")
    try:
        if by_elements:
            l_m = sec.number("L_m_pH", -12)
            c_m = sec.number("C_m_pF", -12)
            if l_m is None or c_m is None:
                raise ConfigError("explicit elements need both L_m_pH and "
                                  "C_m_pF", field="network")
            sec.finish()
            return MatchingNetwork(L_m=l_m, C_m=c_m, f_center=f_center,
                                   Z_source=z_s, Z_load=z_l)
        z_char = sec.number("Z_char_ohm", 0, 2.0)
        sec.finish()
        return MatchingNetwork.design(Z_char=z_char, f_center=f_center,
                                      Z_source=z_s, Z_load=z_l)
    except ParameterDomainError as err:
        raise ParameterDomainError(f"network: {err}") from err


def _qubit_cavity_from(sec: _Section) -> QubitCavityParams:
    kwargs = {}
    for key, attr, k in (
            ("f_cavity_GHz", "f_cavity", 9),
            ("chi_over_2pi_MHz", "chi_over_2pi", 6),
            ("f_qubit_GHz", "f_qubit", 9), ("T2_us", "T2", -6),
            ("ramsey_detuning_MHz", "ramsey_detuning", 6)):
        val = sec.number(key, k)
        if val is not None:
            kwargs[attr] = val
    if sec.has("cavity_lifetime_ns") and sec.has("kappa_per_us"):
        raise ConfigError("give either cavity_lifetime_ns or kappa_per_us, "
                          "not both", field="qubit_cavity.kappa_per_us")
    lifetime = sec.number("cavity_lifetime_ns", -9)
    if lifetime is not None:
        _positive(lifetime, "qubit_cavity.cavity_lifetime_ns")
        kwargs["kappa"] = 1.0 / lifetime
    kappa = sec.number("kappa_per_us", 6)
    if kappa is not None:
        kwargs["kappa"] = kappa
    sec.finish()
    try:
        return QubitCavityParams(**kwargs)
    except ParameterDomainError as err:
        raise ParameterDomainError(f"qubit_cavity: {err}") from err


def _backaction_from(sec: _Section) -> BackactionOptions:
    t_cold = sec.number("T_cold_K", 0, 0.05)
    method = sec.string("dephasing", "exact")
    sec.finish()
    _positive(t_cold, "backaction.T_cold_K", allow_zero=True)
    if method not in ("exact", "perturbative"):
        raise ConfigError("dephasing must be 'exact' or 'perturbative'",
                          field="backaction.dephasing")
    return BackactionOptions(T_cold=t_cold, dephasing=method)


def _ramsey_from(sec: _Section) -> RamseyGrid:
    hs_start = sec.number("head_start_start_us", -6, 0.0)
    hs_stop = sec.number("head_start_stop_us", -6, 1e-6)
    hs_count = sec.integer("head_start_count", 5)
    ev_stop = sec.number("evolution_stop_us", -6, 2e-6)
    ev_count = sec.integer("evolution_count", 801)
    sec.finish()
    _positive(hs_count, "ramsey.head_start_count")
    _positive(ev_count, "ramsey.evolution_count")
    _positive(ev_stop, "ramsey.evolution_stop_us")
    if hs_start < 0 or hs_stop < hs_start:
        raise ParameterDomainError(
            "ramsey.head_start window must satisfy 0 <= start <= stop")
    return RamseyGrid(head_start=(hs_start, hs_stop, hs_count),
                      evolution=(ev_stop, ev_count))


def _pulsed_from(sec: _Section) -> PulsedWindows:
    sep = sec.number("pulse_separation_us", -6, 1e-6)
    s_start = sec.number("slug_start_us", -6, 1.05e-6)
    s_stop = sec.number("slug_stop_us", -6, 3e-6)
    measure = sec.number("measure_length_us", -6, 2e-6)
    sec.finish()
    _positive(sep, "pulsed.pulse_separation_us")
    _positive(measure, "pulsed.measure_length_us")
    if s_stop <= s_start:
        raise ParameterDomainError(
            "pulsed.slug_stop_us must exceed pulsed.slug_start_us")
    return PulsedWindows(pulse_separation=sep,
                         slug_window=(s_start, s_stop),
                         measure_length=measure)


def parse_config(text: str) -> RunConfig:
    """Validate config text into a RunConfig; see load_config."""
    try:
        raw = tomllib.loads(text, parse_float=_Raw)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"not parseable: {err}") from err

    top = _Section("", raw)
    experiment = top.string("experiment")
    if experiment is None:
        raise ConfigError("missing required key", field="experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; expected one of "
            + ", ".join(EXPERIMENTS), field="experiment")
    seed = top.integer("seed", 1)
    workers = top.integer("workers", 1)
    if workers < 1:
        raise ConfigError("workers must be >= 1", field="workers")
    output_dir = top.string("output_dir", "slugsim-out")

    sections = {}
    for name in ("device", "sim", "bias", "sweep", "network", "qubit_cavity",
                 "backaction", "ramsey", "pulsed"):
        top.seen.add(name)
        if name in raw:
            if not isinstance(raw[name], dict):
                raise ConfigError("expected a section", field=name)
            sections[name] = _Section(name, raw[name])
    top.finish()

    for name in _REQUIRED[experiment]:
        if name not in sections:
            raise ConfigError(
                f"experiment {experiment!r} requires this section",
                field=name)

    device = _device_from(sections.pop("device", _Section("device", {})))
    sim = _sim_from(sections.pop("sim", _Section("sim", {})), seed)

    cfg = {"experiment": experiment, "device": device, "sim": sim,
           "output_dir": output_dir, "workers": workers}
    if "bias" in sections:
        cfg["bias"] = _bias_from(sections.pop("bias"))
    if "sweep" in sections:
        flux, freq = _sweeps_from(sections.pop("sweep"))
        cfg["flux_sweep"], cfg["freq_sweep"] = flux, freq
    if "network" in sections:
        cfg["network"] = _network_from(sections.pop("network"))
    if "qubit_cavity" in sections:
        cfg["qubit_cavity"] = _qubit_cavity_from(sections.pop("qubit_cavity"))
    if "backaction" in sections:
        cfg["backaction"] = _backaction_from(sections.pop("backaction"))
    if "ramsey" in sections:
        cfg["ramsey"] = _ramsey_from(sections.pop("ramsey"))
    elif experiment == "ramsey":
        cfg["ramsey"] = RamseyGrid()
    if "pulsed" in sections:
        cfg["pulsed"] = _pulsed_from(sections.pop("pulsed"))

    _check_experiment_inputs(cfg)
    return RunConfig(**cfg)


def _check_experiment_inputs(cfg: dict):
    exp = cfg["experiment"]
    if exp in ("vphi", "smatrix") and cfg.get("flux_sweep") is None:
        raise ConfigError(f"experiment {exp!r} needs a flux sweep",
                          field="sweep")
    if exp in ("twoport", "smatrix") and cfg.get("freq_sweep") is None:
        raise ConfigError(f"experiment {exp!r} needs a frequency sweep",
                          field="sweep")


def load_config(path) -> RunConfig:
    """Read, parse and fully validate a run configuration file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text())


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dump_config(config: RunConfig) -> str:
    """Emit config text that parses back to an equal RunConfig."""
    out = [f"experiment = {_quote(config.experiment)}",
           f"seed = {config.sim.seed}",
           f"workers = {config.workers}",
           f"output_dir = {_quote(config.output_dir)}"]

    dev = config.device
    out += ["", "[device]",
            f"I0_uA = {_cfg_units(dev.I0, -6)}",
            f"R_ohm = {_cfg_units(dev.R, 0)}",
            f"C_fF = {_cfg_units(dev.C, -15)}",
            f"L_pH = {_cfg_units(dev.L, -12)}",
            f"M_pH = {_cfg_units(dev.M, -12)}",
            f"shunt_volume_um3 = {_cfg_units(dev.shunt_volume, -18)}",
            f"sigma_ep_W_per_m3K5 = {_cfg_units(dev.sigma_ep, 0)}",
            f"T_phonon_K = {_cfg_units(dev.T_phonon, 0)}"]
    if dev.T_electron_override is not None:
        out.append(f"T_electron_K = {_cfg_units(dev.T_electron_override, 0)}")

    sim = config.sim
    out += ["", "[sim]", f"dt = {_cfg_units(sim.dt, 0)}",
            f"t_total = {_cfg_units(sim.t_total, 0)}",
            f"t_transient = {_cfg_units(sim.t_transient, 0)}",
            f"noise = {'true' if sim.noise_enabled else 'false'}"]

    if config.bias is not None:
        out += ["", "[bias]",
                f"I_b_uA = {_cfg_units(config.bias.I_b, -6)}",
                f"phi_a_Phi0 = {_cfg_units(config.bias.phi_a, 0)}"]

    if config.flux_sweep is not None or config.freq_sweep is not None:
        out += ["", "[sweep]"]
        if config.flux_sweep is not None:
            a, b, n = config.flux_sweep
            out += [f"flux_start_Phi0 = {_cfg_units(a, 0)}",
                    f"flux_stop_Phi0 = {_cfg_units(b, 0)}",
                    f"flux_count = {n}"]
        if config.freq_sweep is not None:
            a, b, n = config.freq_sweep
            out += [f"freq_start_GHz = {_cfg_units(a, 9)}",
                    f"freq_stop_GHz = {_cfg_units(b, 9)}",
                    f"freq_count = {n}"]

    if config.network is not None:
        net = config.network
        out += ["", "[network]",
                f"L_m_pH = {_cfg_units(net.L_m, -12)}",
                f"C_m_pF = {_cfg_units(net.C_m, -12)}",
                f"f_center_GHz = {_cfg_units(net.f_center, 9)}",
                f"Z_source_ohm = {_cfg_units(net.Z_source, 0)}",
                f"Z_load_ohm = {_cfg_units(net.Z_load, 0)}"]

    if config.qubit_cavity is not None:
        qc = config.qubit_cavity
        out += ["", "[qubit_cavity]",
                f"f_cavity_GHz = {_cfg_units(qc.f_cavity, 9)}",
                f"chi_over_2pi_MHz = {_cfg_units(qc.chi_over_2pi, 6)}",
                f"kappa_per_us = {_cfg_units(qc.kappa, 6)}",
                f"f_qubit_GHz = {_cfg_units(qc.f_qubit, 9)}",
                f"T2_us = {_cfg_units(qc.T2, -6)}",
                f"ramsey_detuning_MHz = {_cfg_units(qc.ramsey_detuning, 6)}"]

    ba = config.backaction
    out += ["", "[backaction]", f"T_cold_K = {_cfg_units(ba.T_cold, 0)}",
            f"dephasing = {_quote(ba.dephasing)}"]

    if config.ramsey is not None:
        rg = config.ramsey
        out += ["", "[ramsey]",
                f"head_start_start_us = {_cfg_units(rg.head_start[0], -6)}",
                f"head_start_stop_us = {_cfg_units(rg.head_start[1], -6)}",
                f"head_start_count = {rg.head_start[2]}",
                f"evolution_stop_us = {_cfg_units(rg.evolution[0], -6)}",
                f"evolution_count = {rg.evolution[1]}"]

    if config.pulsed is not None:
        pw = config.pulsed
        out += ["", "[pulsed]",
                f"pulse_separation_us = "
                f"{_cfg_units(pw.pulse_separation, -6)}",
                f"slug_start_us = {_cfg_units(pw.slug_window[0], -6)}",
                f"slug_stop_us = {_cfg_units(pw.slug_window[1], -6)}",
                f"measure_length_us = {_cfg_units(pw.measure_length, -6)}"]

    return "\n".join(out) + "\n"
