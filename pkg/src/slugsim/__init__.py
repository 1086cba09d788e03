"""First-principles simulator of the SLUG microwave amplifier.

Junction-level Langevin dynamics give static characteristics and, via
lock-in demodulation of small probe tones, the small-signal two-port of the
device; embedding that two-port in matching networks yields S-parameter
maps versus bias, and the dissipated power at the working point drives a
classical model of amplifier backaction on a dispersively read qubit.
"""

__version__ = "0.1.0"

from .backaction import (
    BackactionReport,
    PulsedTimeline,
    PulseEvent,
    QubitCavityParams,
    backaction_report,
    cavity_fill,
    dephasing_rate,
    effective_cavity_temperature,
    electron_temperature,
    extract_fringe_frequency,
    fit_frequency_rise,
    occupation_temperature,
    photon_occupation,
    pulsed_mode_timeline,
    ramsey_surface,
    stark_shift,
    static_dissipation,
)
from .config import (
    BackactionOptions,
    PulsedWindows,
    RamseyGrid,
    RunConfig,
    dump_config,
    load_config,
    parse_config,
)
from .device import (
    BiasPoint,
    DeviceParams,
    Drive,
    Normalization,
    PhaseTrajectory,
    SimConfig,
    TransferCurve,
    hot_electron_temperature,
    integrate_langevin,
    normalize,
    resolve_noise_temperature,
    static_voltage,
    v_phi_curve,
)
from .errors import (
    BiasStateError,
    ConfigError,
    GradientUndefinedError,
    IntegrationStabilityError,
    NonlinearityError,
    OutputError,
    ParameterDomainError,
    PassivityViolationError,
    SequenceValidationError,
    SlugSimError,
)
from .runner import RunManifest, emit_artifacts, run
from .scattering import (
    MatchingNetwork,
    ScatteringMap,
    SParams,
    cascade_s_parameters,
    ideal_matched_gain,
    scattering_map,
)
from .twoport import (
    BiasConstants,
    TwoPortSweep,
    TwoPortZ,
    analytic_ImZr,
    analytic_Zf,
    directionality,
    extract_bias_constants,
    extract_two_port,
    loaded_transfer_inductance,
    two_port_sweep,
)

__all__ = [
    "BackactionOptions",
    "BackactionReport",
    "BiasConstants",
    "BiasPoint",
    "BiasStateError",
    "ConfigError",
    "DeviceParams",
    "Drive",
    "GradientUndefinedError",
    "IntegrationStabilityError",
    "MatchingNetwork",
    "NonlinearityError",
    "Normalization",
    "OutputError",
    "ParameterDomainError",
    "PassivityViolationError",
    "PhaseTrajectory",
    "PulseEvent",
    "PulsedTimeline",
    "PulsedWindows",
    "QubitCavityParams",
    "RamseyGrid",
    "RunConfig",
    "RunManifest",
    "SParams",
    "ScatteringMap",
    "SequenceValidationError",
    "SimConfig",
    "SlugSimError",
    "TransferCurve",
    "TwoPortSweep",
    "TwoPortZ",
    "analytic_ImZr",
    "analytic_Zf",
    "backaction_report",
    "cascade_s_parameters",
    "cavity_fill",
    "dephasing_rate",
    "directionality",
    "dump_config",
    "effective_cavity_temperature",
    "electron_temperature",
    "emit_artifacts",
    "extract_bias_constants",
    "extract_fringe_frequency",
    "extract_two_port",
    "fit_frequency_rise",
    "hot_electron_temperature",
    "ideal_matched_gain",
    "integrate_langevin",
    "load_config",
    "loaded_transfer_inductance",
    "normalize",
    "occupation_temperature",
    "parse_config",
    "photon_occupation",
    "pulsed_mode_timeline",
    "ramsey_surface",
    "resolve_noise_temperature",
    "run",
    "scattering_map",
    "stark_shift",
    "static_dissipation",
    "static_voltage",
    "two_port_sweep",
    "v_phi_curve",
]
