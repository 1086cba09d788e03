"""Backaction chain: heating, photon occupation, dephasing, pulse timing."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slugsim import (BiasPoint, ParameterDomainError, PulseEvent,
                     QubitCavityParams, SequenceValidationError,
                     backaction_report, cavity_fill, dephasing_rate,
                     effective_cavity_temperature, electron_temperature,
                     extract_fringe_frequency, fit_frequency_rise,
                     occupation_temperature, photon_occupation,
                     pulsed_mode_timeline, ramsey_surface, stark_shift)
from slugsim.constants import BOLTZMANN, PHI0, PLANCK

QC = QubitCavityParams(f_cavity=6.605e9, chi_over_2pi=0.75e6,
                       kappa=1 / 350e-9, f_qubit=5.5e9, T2=10e-6,
                       ramsey_detuning=1e6)


class TestHeating:
    def test_nanowatt_heats_shunt_to_1p1_K(self, device, close):
        close(electron_temperature(1e-9, device), 1.1076, 1e-3)

    def test_fifth_power_balance(self, device, close):
        t = electron_temperature(3e-9, device)
        p_back = device.sigma_ep * device.shunt_volume * (
            t**5 - device.T_phonon**5)
        close(p_back, 3e-9, 1e-12)


class TestPhotonOccupation:
    def test_bose_einstein_value(self, close):
        x = PLANCK * 6.605e9 / (BOLTZMANN * 0.6)
        close(photon_occupation(0.6, 6.605e9), 1 / math.expm1(x), 1e-12)

    def test_zero_temperature(self):
        assert photon_occupation(0.0, 6.605e9) == 0.0

    @given(st.floats(1e-6, 1e3), st.floats(1e8, 2e10))
    @settings(max_examples=120, deadline=None)
    def test_round_trip(self, n_bar, freq):
        t = occupation_temperature(n_bar, freq)
        back = photon_occupation(t, freq)
        assert abs(back - n_bar) / n_bar < 1e-9

    def test_effective_temperature_averages_occupations(self, close):
        f = 6.605e9
        t_eff = effective_cavity_temperature(1.1, 0.05, f)
        n_expect = 0.5 * (photon_occupation(1.1, f)
                          + photon_occupation(0.05, f))
        close(photon_occupation(t_eff, f), n_expect, 1e-9)
        assert 0.05 < t_eff < 1.1

    def test_domain_errors(self):
        with pytest.raises(ParameterDomainError):
            photon_occupation(-0.1, 6e9)
        with pytest.raises(ParameterDomainError):
            photon_occupation(0.6, 0.0)
        with pytest.raises(ParameterDomainError):
            occupation_temperature(-1.0, 6e9)


class TestStarkAndDephasing:
    def test_stark_shift_linear_in_occupation(self, close):
        close(stark_shift(1.47, QC), 2 * 0.75e6 * 1.47, 1e-12)
        assert stark_shift(0.0, QC) == 0.0

    def test_exact_matches_weak_coupling_limit(self, close):
        weak = QubitCavityParams(f_cavity=6.605e9, chi_over_2pi=1e3,
                                 kappa=1 / 350e-9)
        n = 0.8
        chi = 2 * math.pi * weak.chi_over_2pi
        limit = 4 * chi**2 * n * (n + 1) / weak.kappa
        close(dephasing_rate(n, weak, "exact"), limit, 1e-3)
        # the shot-noise estimate carries twice the weak-coupling rate
        close(dephasing_rate(n, weak, "perturbative"), 2 * limit, 1e-12)

    def test_exact_saturates_in_strong_dispersive_regime(self):
        strong = QubitCavityParams(f_cavity=6.605e9, chi_over_2pi=50e6,
                                   kappa=1 / 350e-9)
        n = 1.5
        exact = dephasing_rate(n, strong, "exact")
        pert = dephasing_rate(n, strong, "perturbative")
        # exact rate is capped near kappa * n, the estimate blows up
        assert exact < 2 * strong.kappa * n
        assert pert > 10 * exact

    def test_unknown_method_rejected(self):
        with pytest.raises(ParameterDomainError):
            dephasing_rate(1.0, QC, "guesswork")


class TestCavityFill:
    def test_one_lifetime_fill_fraction(self, close):
        close(cavity_fill(1.0, QC.kappa, 1 / QC.kappa),
              -math.expm1(-1.0), 1e-12)

    def test_clips_negative_times(self):
        assert cavity_fill(2.0, QC.kappa, -1e-6) == 0.0

    def test_saturates_at_steady_state(self, close):
        close(cavity_fill(1.5098, QC.kappa, 1e-3), 1.5098, 1e-9)


class TestRamsey:
    def test_fringe_frequency_rises_to_detuning_plus_stark(self, close):
        n_steady = 1.5098
        hs = np.linspace(0.0, 2e-6, 9)
        tau = np.linspace(0.0, 2e-6, 801)
        surface = ramsey_surface(QC, n_steady, hs, tau)
        assert surface.shape == (9, 801)
        freqs = [extract_fringe_frequency(tau, surface[i], 1e6)
                 for i in range(9)]
        f_inf, df, tau_rise = fit_frequency_rise(hs, freqs)
        expected = QC.ramsey_detuning + stark_shift(n_steady, QC)
        close(f_inf, expected, 0.10, "saturated fringe frequency")
        close(tau_rise, 1 / QC.kappa, 0.15, "rise time")
        # cavity fills over the head start, so the early-window frequency
        # climbs monotonically from near the bare detuning to saturation
        assert QC.ramsey_detuning < freqs[0] < freqs[-1]
        assert freqs[-1] - freqs[0] > 0.5 * stark_shift(n_steady, QC)

    def test_surface_decays_with_evolution_time(self):
        tau = np.linspace(0.0, 2e-6, 401)
        surface = ramsey_surface(QC, 1.5, np.array([1e-6]), tau)
        env = np.abs(surface[0])
        assert env[0] == pytest.approx(1.0)
        assert env[-1] < 0.5

    def test_zero_occupation_gives_bare_fringe(self, close):
        tau = np.linspace(0.0, 1e-6, 201)
        surface = ramsey_surface(QC, 0.0, np.array([0.0, 1e-6]), tau)
        expected = np.exp(-tau / QC.T2) * np.cos(
            2 * math.pi * QC.ramsey_detuning * tau)
        assert np.allclose(surface[0], expected, atol=1e-12)
        assert np.allclose(surface[1], expected, atol=1e-12)


class TestPulsedTimeline:
    def test_gated_amplifier_accumulates_no_phase(self, close):
        sep = 1e-6
        events = [
            PulseEvent(kind="pi_half", t_start=0.0),
            PulseEvent(kind="pi_half", t_start=sep),
            PulseEvent(kind="slug_active", t_start=1.05e-6, t_end=3e-6),
            PulseEvent(kind="measurement", t_start=sep, t_end=sep + 2e-6),
        ]
        tl = pulsed_mode_timeline(QC, 1.5098, events)
        assert tl.photon_exposure == 0.0
        assert tl.stark_phase == 0.0

    def test_always_on_amplifier_exposure(self, close):
        sep = 1e-6
        events = [
            PulseEvent(kind="pi_half", t_start=0.0),
            PulseEvent(kind="pi_half", t_start=sep),
            PulseEvent(kind="slug_active", t_start=0.0, t_end=5e-6),
        ]
        n = 1.5098
        tl = pulsed_mode_timeline(QC, n, events)
        # cavity fills from empty at t=0; closed-form exposure integral
        expected = n * (sep - -math.expm1(-QC.kappa * sep) / QC.kappa)
        close(tl.photon_exposure, expected, 1e-9)
        close(tl.stark_phase,
              2 * math.pi * 2 * QC.chi_over_2pi * expected, 1e-12)

    def test_occupation_continuous_across_segments(self):
        events = [
            PulseEvent(kind="pi_half", t_start=0.0),
            PulseEvent(kind="pi_half", t_start=2e-6),
            PulseEvent(kind="slug_active", t_start=0.5e-6, t_end=1.5e-6),
        ]
        tl = pulsed_mode_timeline(QC, 2.0, events)
        seg = tl.segments
        assert np.allclose(seg[1:, 3], seg[:-1, 4])

    def test_event_validation(self):
        with pytest.raises(SequenceValidationError):
            pulsed_mode_timeline(QC, 1.0, [
                PulseEvent(kind="pi_half", t_start=0.0)])
        with pytest.raises(SequenceValidationError):
            pulsed_mode_timeline(QC, 1.0, [
                PulseEvent(kind="pi_half", t_start=0.0),
                PulseEvent(kind="pi_half", t_start=1e-6),
                PulseEvent(kind="slug_active", t_start=0.0, t_end=2e-6),
                PulseEvent(kind="slug_active", t_start=1e-6, t_end=3e-6)])

    def test_interval_needs_end_time(self):
        with pytest.raises(SequenceValidationError):
            PulseEvent(kind="slug_active", t_start=0.0)
        with pytest.raises(SequenceValidationError):
            PulseEvent(kind="pi_half", t_start=0.0, t_end=1e-6)


class TestReportChain:
    def test_report_composes_the_closed_forms(self, device, close):
        bias = BiasPoint(I_b=27e-6, phi_a=0.5)
        v = 104.8e-6
        rep = backaction_report(device, QC, bias, v, T_cold=0.05)
        close(rep.P_dissipated, 27e-6 * 104.8e-6, 1e-12)
        close(rep.T_electron, electron_temperature(rep.P_dissipated, device),
              1e-12)
        n_expect = 0.5 * (photon_occupation(rep.T_electron, QC.f_cavity)
                          + photon_occupation(0.05, QC.f_cavity))
        close(rep.n_bar_steady, n_expect, 1e-12)
        close(rep.stark_shift, stark_shift(n_expect, QC), 1e-12)
        close(rep.f_josephson, v / PHI0, 1e-12)
        assert rep.fringe_surface is None
        assert len(rep.notes) == 3

    def test_attaches_fringe_surface_when_grids_given(self, device):
        bias = BiasPoint(I_b=27e-6, phi_a=0.5)
        rep = backaction_report(device, QC, bias, 104.8e-6,
                                head_start_grid=np.linspace(0, 1e-6, 3),
                                evolution_grid=np.linspace(0, 1e-6, 51))
        assert rep.fringe_surface.shape == (3, 51)
