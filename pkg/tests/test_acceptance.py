"""Acceptance gate: one test per criterion, at the stated tolerance.

Run with -v for the one pass/fail line per criterion.  The scattering
map (criterion 8) dominates the runtime; everything else is seconds.
"""

import math

import numpy as np
import pytest

from slugsim import (BiasPoint, DeviceParams, MatchingNetwork,
                     QubitCavityParams, SimConfig, analytic_Zf,
                     directionality, electron_temperature,
                     extract_fringe_frequency, extract_two_port,
                     fit_frequency_rise, loaded_transfer_inductance,
                     occupation_temperature, parse_config,
                     photon_occupation, ramsey_surface, scattering_map,
                     stark_shift, two_port_sweep, v_phi_curve)
from slugsim.constants import PHI0
from slugsim.runner import run
from slugsim.scattering import _sparams_from_abcd

DEVICE = DeviceParams()
I_BIAS = 27e-6
NOISY = SimConfig(dt=0.02, t_total=4000.0, t_transient=500.0, seed=11)
QC = QubitCavityParams(f_cavity=6.605e9, chi_over_2pi=0.75e6,
                       kappa=1 / 350e-9, f_qubit=5.5e9, T2=10e-6,
                       ramsey_detuning=1e6)


def test_criterion_1_hot_electron_chain():
    """P = 1 nW over the default shunt heats the electrons to 1.10 K."""
    t_e = electron_temperature(1e-9, DEVICE)
    assert abs(t_e - 1.10) / 1.10 <= 0.02, f"T_e = {t_e:.4f} K"
    print(f"criterion 1 PASS: T_e(1 nW) = {t_e:.4f} K (1.10 K +/- 2%)")


def test_criterion_2_photon_occupation():
    """0.6 K at 6.605 GHz holds 1.46 thermal photons."""
    n_bar = photon_occupation(0.6, 6.605e9)
    assert abs(n_bar - 1.46) <= 0.05, f"n_bar = {n_bar:.4f}"
    print(f"criterion 2 PASS: n_bar(0.6 K) = {n_bar:.4f} (1.46 +/- 0.05)")


def test_criterion_3_stark_shift():
    """1.47 photons at 2 chi / 2 pi = 1.5 MHz shift the qubit 2.20 MHz."""
    shift = stark_shift(1.47, QC)
    assert abs(shift - 2.20e6) / 2.20e6 <= 0.05, f"shift = {shift:.4g}"
    print(f"criterion 3 PASS: stark = {shift / 1e6:.4f} MHz "
          "(2.20 MHz +/- 5%)")


def test_criterion_4_ramsey_frequency_rise():
    """Fringe frequency rises with the cavity fill time and saturates at
    the detuning plus the Stark shift."""
    n_bar = 1.47
    hs = np.linspace(0.0, 2e-6, 9)
    tau = np.linspace(0.0, 2e-6, 801)
    surface = ramsey_surface(QC, n_bar, hs, tau)
    freqs = [extract_fringe_frequency(tau, surface[i], QC.ramsey_detuning)
             for i in range(hs.size)]
    f_inf, _, tau_rise = fit_frequency_rise(hs, freqs)
    expected = QC.ramsey_detuning + stark_shift(n_bar, QC)
    assert abs(tau_rise - 350e-9) / 350e-9 <= 0.10, f"tau = {tau_rise:.3g}"
    assert abs(f_inf - expected) / expected <= 0.10, (
        f"f_inf = {f_inf:.4g} vs {expected:.4g}")
    print(f"criterion 4 PASS: rise tau = {tau_rise / 1e-9:.1f} ns "
          f"(350 +/- 10%), saturation = {f_inf / 1e6:.3f} MHz "
          f"(detuning + 2.2 MHz)")


def test_criterion_5_noise_free_iv_oracle():
    """Composite-junction V(I_b) at zero flux matches the closed form."""
    sim = SimConfig(dt=0.01, t_total=40000.0, t_transient=2000.0, seed=11,
                    noise_enabled=False)
    from slugsim import integrate_langevin
    worst = 0.0
    for i_b in (45e-6, 60e-6, 80e-6):
        traj = integrate_langevin(DEVICE, BiasPoint(I_b=i_b, phi_a=0.0),
                                  sim, topology="symmetric")
        expected = 0.5 * DEVICE.R * math.sqrt(i_b**2 - (2 * DEVICE.I0) ** 2)
        err = abs(traj.v_mean - expected) / expected
        worst = max(worst, err)
        assert err <= 0.01, f"I_b = {i_b}: {traj.v_mean} vs {expected}"
    print(f"criterion 5 PASS: V(I_b) within {worst:.2%} of "
          "(R/2) sqrt(I_b^2 - (2 I0)^2) at 45/60/80 uA (<= 1%)")


def test_criterion_6_transfer_curve_modulation():
    """Peak-to-peak modulation near the working bias, plus periodicity
    and parity within noise."""
    sim = SimConfig(dt=0.02, t_total=50000.0, t_transient=1000.0, seed=11)
    flux = np.linspace(0.0, 1.0, 21)
    curve = v_phi_curve(DEVICE, I_BIAS, flux, sim, topology="slug")
    vpp = float(curve.v_mean.max() - curve.v_mean.min())
    assert abs(vpp - 130e-6) / 130e-6 <= 0.30, f"V_pp = {vpp:.4g}"

    probes = np.array([-0.45, -0.35, -0.20, 0.20, 0.35, 0.45,
                       1.20, 1.35, 1.45])
    sym = v_phi_curve(DEVICE, I_BIAS, probes, sim, topology="slug")
    lookup = dict(zip(np.round(probes, 3), zip(sym.v_mean, sym.v_se)))
    for phi in (0.20, 0.35, 0.45):
        v_p, se_p = lookup[round(phi, 3)]
        v_m, se_m = lookup[round(-phi, 3)]
        v_1, se_1 = lookup[round(phi + 1.0, 3)]
        sigma_pm = math.hypot(se_p, se_m)
        sigma_p1 = math.hypot(se_p, se_1)
        assert abs(v_p - v_m) <= 3 * sigma_pm, (
            f"parity broken at {phi}: {v_p} vs {v_m} (3 sigma "
            f"{3 * sigma_pm:.3g})")
        assert abs(v_p - v_1) <= 3 * sigma_p1, (
            f"periodicity broken at {phi}: {v_p} vs {v_1} (3 sigma "
            f"{3 * sigma_p1:.3g})")
    print(f"criterion 6 PASS: V_pp = {vpp / 1e-6:.1f} uV "
          "(130 uV +/- 30%); parity and periodicity hold at 3 sigma")


def test_criterion_7_directionality_formula():
    """An 80 GHz slope probed at 6 GHz with a unity bracket gives about
    22.5 dB of directionality."""
    # huge shunt makes the loading bracket 1 + (L/R) V_phi negligible
    unity = DeviceParams(R=8e6)
    v_phi = 2 * math.pi * 80e9 * PHI0
    d, d_db = directionality(unity, v_phi, 2 * math.pi * 6e9, 1.0)
    assert 19.0 <= d_db <= 26.0, f"D = {d_db:.2f} dB"
    assert abs(d_db - 20 * math.log10(80 / 6)) < 0.01
    print(f"criterion 7 PASS: D = {d_db:.2f} dB (19..26 dB window)")


@pytest.fixture(scope="module")
def acceptance_map():
    flux = np.linspace(0.05, 0.95, 32)
    freq = np.linspace(4e9, 8e9, 16)
    network = MatchingNetwork.design(Z_char=2.0, f_center=6e9)
    return scattering_map(DEVICE, I_BIAS, flux, freq, network, NOISY,
                          rel_tol=0.10, block_time=1000.0, min_blocks=6,
                          max_blocks=24)


def test_criterion_8_scattering_maps(acceptance_map):
    """Forward-gain maxima on both shoulders; deepest reverse isolation
    on the negative-slope shoulder with a contiguous sub -15 dB band."""
    smap = acceptance_map
    flux, freq = smap.flux_grid, smap.freq_grid
    present = np.array(
        [[smap.reasons[k][j] is None
          or smap.reasons[k][j] == "lockin_not_converged"
          for j in range(freq.size)] for k in range(flux.size)])
    assert present.any(), "no usable points in the map"

    s21_best = np.where(present, smap.S21_dB, -np.inf).max(axis=1)
    left = flux < 0.5
    k_left = int(np.argmax(np.where(left, s21_best, -np.inf)))
    k_right = int(np.argmax(np.where(~left, s21_best, -np.inf)))
    assert 0.25 <= flux[k_left] <= 0.40, f"left max at {flux[k_left]:.3f}"
    assert 0.60 <= flux[k_right] <= 0.75, f"right max at {flux[k_right]:.3f}"

    s12 = np.where(present, smap.S12_dB, np.inf)
    k_min, j_min = np.unravel_index(np.argmin(s12), s12.shape)
    assert smap.V_phi[k_min] < 0, (
        f"S12 minimum at flux {flux[k_min]:.3f} where V_phi = "
        f"{smap.V_phi[k_min]:.3g} (expected negative slope)")

    # contiguous band of S12 <= -15 dB at the isolation bias
    below = s12[k_min] <= -15.0
    best_span = 0.0
    start = None
    for j, flag in enumerate(list(below) + [False]):
        if flag and start is None:
            start = j
        elif not flag and start is not None:
            best_span = max(best_span, freq[j - 1] - freq[start])
            start = None
    assert best_span >= 0.5e9, f"widest band {best_span / 1e9:.2f} GHz"
    print(f"criterion 8 PASS: S21 maxima at flux {flux[k_left]:.3f} and "
          f"{flux[k_right]:.3f}; min S12 = {s12[k_min, j_min]:.1f} dB at "
          f"flux {flux[k_min]:.3f} (V_phi < 0); "
          f"S12 <= -15 dB over {best_span / 1e9:.2f} GHz")


def test_criterion_9_property_suites(tmp_path):
    """Reciprocity, transfer consistency, cancellation crossing,
    unitarity, occupation round trip, and worker determinism."""
    omega = 2 * math.pi * 6e9

    # passive reciprocity at zero bias
    quiet = SimConfig(dt=0.01, t_total=40000.0, t_transient=2000.0,
                      seed=11, noise_enabled=False)
    passive = extract_two_port(DEVICE, BiasPoint(I_b=0.0, phi_a=0.0),
                               omega, quiet, topology="slug",
                               block_time=4000.0, min_blocks=8,
                               max_blocks=8)
    recip = abs(passive.Z12 - passive.Z21) / abs(passive.Z21)
    assert recip < 0.05, f"reciprocity error {recip:.2%}"

    # forward transimpedance tracks L * V_phi at a steep working point
    active = extract_two_port(DEVICE, BiasPoint(I_b=I_BIAS, phi_a=0.2691),
                              omega, NOISY, topology="slug", rel_tol=0.05,
                              abs_floor=(0.05, 0.06, 0.1, 0.3),
                              block_time=1500.0, min_blocks=8,
                              max_blocks=96)
    zf = analytic_Zf(DEVICE, active.V_phi)
    zf_err = abs(active.Z21.real - zf) / abs(zf)
    assert zf_err < 0.15, f"transfer consistency {zf_err:.2%}"

    # reverse-reactance zero crossing within one flux step of the
    # junction-loaded analytic slope
    step = 0.02
    flux = np.arange(0.64, 0.78, step)
    prof = two_port_sweep(DEVICE, I_BIAS, flux, np.array([omega]), NOISY,
                          topology="slug", rel_tol=0.08,
                          abs_floor=(0.05, 0.06, 0.1, 0.3),
                          block_time=1500.0, min_blocks=6, max_blocks=64)
    im = np.array([col[0].Z12.imag if col[0] is not None else np.nan
                   for col in prof.points])
    kk = np.flatnonzero(np.isfinite(im))
    sign_flip = np.flatnonzero(np.diff(np.sign(im[kk])))
    assert sign_flip.size >= 1, f"no crossing in {im}"
    k0, k1 = kk[sign_flip[0]], kk[sign_flip[0] + 1]
    t = im[k0] / (im[k0] - im[k1])
    phi_sim = flux[k0] + t * (flux[k1] - flux[k0])
    target = -(DEVICE.R / DEVICE.L) \
        * (loaded_transfer_inductance(DEVICE, omega) / DEVICE.L) * PHI0
    vphi = prof.V_phi
    bracket = np.flatnonzero((vphi[:-1] - target) * (vphi[1:] - target) < 0)
    assert bracket.size >= 1, f"analytic slope {target} not bracketed"
    b = bracket[0]
    s = (target - vphi[b]) / (vphi[b + 1] - vphi[b])
    phi_analytic = flux[b] + s * (flux[b + 1] - flux[b])
    assert abs(phi_sim - phi_analytic) <= step, (
        f"crossing {phi_sim:.3f} vs analytic {phi_analytic:.3f}")

    # lossless matching network is unitary
    worst_unitarity = 0.0
    for z_char in (0.5, 2.0, 20.0):
        net = MatchingNetwork.design(Z_char=z_char, f_center=6e9)
        for f in np.linspace(1e9, 12e9, 23):
            sp = _sparams_from_abcd(net.abcd(2 * math.pi * f), 50.0, 50.0)
            worst_unitarity = max(
                worst_unitarity,
                abs(abs(sp.S11) ** 2 + abs(sp.S21) ** 2 - 1.0))
    assert worst_unitarity < 1e-6

    # occupation/temperature round trip
    worst_bose = 0.0
    for n in (1e-4, 0.1, 1.46, 30.0):
        back = photon_occupation(occupation_temperature(n, 6.605e9),
                                 6.605e9)
        worst_bose = max(worst_bose, abs(back - n) / n)
    assert worst_bose < 1e-9

    # byte-identical artifacts for any worker count
    config_text = """
experiment = "smatrix"
seed = 11

[sim]
dt = 0.02
t_total = 4000.0
t_transient = 500.0

[bias]
I_b_uA = 27.0

[sweep]
flux_start_Phi0 = 0.28
flux_stop_Phi0 = 0.72
flux_count = 2
freq_start_GHz = 5.0
freq_stop_GHz = 7.0
freq_count = 2

[network]
Z_char_ohm = 2.0
"""
    cfg = parse_config(config_text)
    import dataclasses
    serial = run(cfg, output_dir=tmp_path / "w1")
    parallel = run(dataclasses.replace(cfg, workers=4),
                   output_dir=tmp_path / "w4")
    assert serial.files == parallel.files, "worker count changed artifacts"

    print("criterion 9 PASS: "
          f"reciprocity {recip:.2%} (<5%); transfer {zf_err:.2%} (<15%); "
          f"crossing {phi_sim:.3f} vs {phi_analytic:.3f} (one step); "
          f"unitarity {worst_unitarity:.1e} (<1e-6); "
          f"Bose round trip {worst_bose:.1e} (<1e-9); "
          "workers 1 and 4 byte-identical")
