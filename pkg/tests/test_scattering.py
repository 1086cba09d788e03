"""Matching-network embedding and scattering identities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slugsim import (BiasPoint, DeviceParams, MatchingNetwork,
                     ParameterDomainError, PassivityViolationError, TwoPortZ,
                     cascade_s_parameters, extract_bias_constants,
                     ideal_matched_gain)
from slugsim.constants import PHI0
from slugsim.scattering import _sparams_from_abcd

OMEGA = 2 * math.pi * 6e9


def synthetic_point(device, omega, v_phi_mv, rho_i=3.0, rho_o=2.5,
                    chi_r=1.0):
    """Two-port built from the closed-form bias-constant parametrization."""
    v_wb = v_phi_mv * 1e-3 / PHI0
    wl = omega * device.L
    bracket = 1.0 + device.L * v_wb / device.R
    return TwoPortZ(
        omega=omega,
        Z11=complex(rho_i * wl**2 / device.R, 0.5 * wl),
        Z12=complex(0.0, chi_r * wl * bracket),
        Z21=complex(device.L * v_wb, 0.0),
        Z22=complex(rho_o * device.R, 0.0),
        bias=BiasPoint(I_b=27e-6, phi_a=0.3),
        V_phi=v_phi_mv * 1e-3,
        v_mean=5e-5,
        temperature=0.9,
    )


class TestMatchingNetwork:
    def test_design_hits_characteristic_impedance(self, close):
        net = MatchingNetwork.design(Z_char=2.0, f_center=6e9)
        close(net.Z_char, 2.0, 1e-12)
        w = 2 * math.pi * 6e9
        close(net.L_m, 2.0 / w, 1e-12)
        close(net.C_m, 1.0 / (2.0 * w), 1e-12)

    def test_rejects_nonpositive_elements(self):
        with pytest.raises(ParameterDomainError):
            MatchingNetwork(L_m=0.0, C_m=1e-12, f_center=6e9)
        with pytest.raises(ParameterDomainError):
            MatchingNetwork.design(Z_char=-2.0, f_center=6e9)

    @given(z_char=st.floats(0.5, 100.0), f_ghz=st.floats(1.0, 12.0))
    @settings(max_examples=60, deadline=None)
    def test_lossless_network_is_unitary(self, z_char, f_ghz):
        net = MatchingNetwork.design(Z_char=z_char, f_center=6e9)
        sp = _sparams_from_abcd(net.abcd(2 * math.pi * f_ghz * 1e9),
                                net.Z_source, net.Z_load)
        assert abs(abs(sp.S11) ** 2 + abs(sp.S21) ** 2 - 1.0) < 1e-6
        assert abs(abs(sp.S22) ** 2 + abs(sp.S12) ** 2 - 1.0) < 1e-6


class TestIdealMatchedGain:
    def test_gain_reduces_to_slope_over_frequency(self, device, close):
        # with Z21 = L V_phi, G = (V_phi / omega)^2 / (4 rho_i rho_o),
        # V_phi here per weber
        pt = synthetic_point(device, OMEGA, 2.0, rho_i=3.0, rho_o=2.5)
        consts = extract_bias_constants(pt, device)
        g_fwd, g_rev = ideal_matched_gain(pt, consts, device)
        v_wb = pt.V_phi / PHI0
        close(g_fwd, (v_wb / OMEGA) ** 2 / (4 * 3.0 * 2.5), 1e-9)
        assert g_rev < g_fwd

    def test_example_magnitude(self, device, close):
        # an 80 GHz-equivalent slope probed at 6 GHz with unit port
        # constants gives (80/6)^2/4, about 16.5 dB
        v_wb = 80e9 * 2 * math.pi
        pt = TwoPortZ(
            omega=OMEGA, Z11=complex(OMEGA * device.L ** 2 / device.R
                                     * OMEGA, 0.0),
            Z12=0j, Z21=complex(device.L * v_wb, 0.0),
            Z22=complex(device.R, 0.0),
            bias=BiasPoint(I_b=27e-6, phi_a=0.3), V_phi=v_wb * PHI0)
        consts = extract_bias_constants(pt, device)
        close(consts.rho_i, 1.0, 1e-9)
        close(consts.rho_o, 1.0, 1e-9)
        g_fwd, _ = ideal_matched_gain(pt, consts, device)
        close(10 * math.log10(g_fwd), 10 * math.log10((80 / 6) ** 2 / 4),
              1e-6)

    def test_negative_port_resistance_rejected(self, device):
        pt = synthetic_point(device, OMEGA, 2.0, rho_i=-0.5)
        consts = extract_bias_constants(pt, device)
        with pytest.raises(PassivityViolationError):
            ideal_matched_gain(pt, consts, device)


class TestCascade:
    def test_rejects_bad_frequency(self, device):
        net = MatchingNetwork.design()
        pt = synthetic_point(device, OMEGA, 2.0)
        with pytest.raises(ParameterDomainError):
            cascade_s_parameters(pt, net, 0.0)

    def test_network_preserves_forward_reverse_ratio(self, device):
        # the reciprocal network multiplies S21 and S12 by the same
        # factor, so S21/S12 equals Z21/Z12 exactly
        pt = synthetic_point(device, OMEGA, 2.0, chi_r=0.5)
        net = MatchingNetwork.design(Z_char=2.0)
        sp = cascade_s_parameters(pt, net, OMEGA)
        ratio_s = sp.S21 / sp.S12
        ratio_z = pt.Z21 / pt.Z12
        assert abs(ratio_s - ratio_z) / abs(ratio_z) < 1e-9

    def test_ratio_invariant_across_networks(self, device):
        pt = synthetic_point(device, OMEGA, 2.0, chi_r=0.7)
        a = cascade_s_parameters(pt, MatchingNetwork.design(Z_char=1.0),
                                 OMEGA)
        b = cascade_s_parameters(pt, MatchingNetwork.design(Z_char=5.0),
                                 OMEGA)
        da = 20 * math.log10(abs(a.S21) / abs(a.S12))
        db = 20 * math.log10(abs(b.S21) / abs(b.S12))
        assert abs(da - db) < 0.1

    def test_passive_device_stays_inside_unit_circle(self, device):
        # junctions as linear inductors: no source of power anywhere
        L_J = PHI0 / (2 * math.pi * device.I0)
        Zj = 1 / (1 / (1j * OMEGA * L_J) + 1 / device.R)
        ZL = 1j * OMEGA * device.L
        total = ZL + 2 * Zj
        pt = TwoPortZ(omega=OMEGA, Z11=ZL * 2 * Zj / total,
                      Z12=ZL * Zj / total, Z21=ZL * Zj / total,
                      Z22=Zj * (ZL + Zj) / total,
                      bias=BiasPoint(I_b=0.0, phi_a=0.0), V_phi=0.0)
        for z_char in (1.0, 2.0, 10.0):
            net = MatchingNetwork.design(Z_char=z_char)
            for f in (4e9, 6e9, 8e9):
                sp = cascade_s_parameters(pt, net, 2 * math.pi * f)
                for s in (sp.S11, sp.S12, sp.S21, sp.S22):
                    assert abs(s) <= 1.0 + 1e-9

    def test_shorted_transfer_tagged(self, device):
        pt = synthetic_point(device, OMEGA, 2.0)
        pt = TwoPortZ(omega=OMEGA, Z11=pt.Z11, Z12=pt.Z12, Z21=0j,
                      Z22=pt.Z22, bias=pt.bias, V_phi=pt.V_phi)
        net = MatchingNetwork.design(Z_char=2.0, f_center=6e9)
        sp = cascade_s_parameters(pt, net, OMEGA)
        assert sp.tag == "ideal_short"
        assert sp.S21 == 0j and sp.S12 == 0j
        # reflection stays regular even at the network's own resonance
        assert abs(abs(sp.S11) - 1.0) < 1e-9


class TestScatteringMapValidation:
    def test_shape_mismatch_rejected(self, device):
        from slugsim import ScatteringMap
        net = MatchingNetwork.design()
        with pytest.raises(ParameterDomainError):
            ScatteringMap(
                flux_grid=np.array([0.3, 0.4]), freq_grid=np.array([6e9]),
                S21_dB=np.zeros((3, 1)), S12_dB=np.zeros((2, 1)),
                bias_current=27e-6, reasons=((None,), (None,)),
                V_phi=np.zeros(2), v_mean=np.zeros(2),
                temperature=np.zeros(2), network=net)
