"""From shunt dissipation to qubit dephasing, step by step.

The chain: dissipated power heats the shunt electrons above the phonon
bath, the hot resistor populates the readout cavity, and the photon
number sets the Stark shift and the measurement-induced dephasing rate.
Instant.
"""

from slugsim import (BiasPoint, DeviceParams, QubitCavityParams, SimConfig,
                     backaction_report, dephasing_rate,
                     effective_cavity_temperature, electron_temperature,
                     photon_occupation, stark_shift, static_voltage)

device = DeviceParams()
qc = QubitCavityParams(f_cavity=6.605e9, chi_over_2pi=0.75e6,
                       kappa=1 / 350e-9, f_qubit=5.5e9, T2=10e-6,
                       ramsey_detuning=1e6)

print("hand-rolled chain at a fixed dissipation")
for p_nw in (0.5, 1.0, 2.0, 4.0):
    t_e = electron_temperature(p_nw * 1e-9, device)
    t_eff = effective_cavity_temperature(t_e, 0.05, qc.f_cavity)
    n_bar = photon_occupation(t_eff, qc.f_cavity)
    print(f"  P = {p_nw:4.1f} nW -> T_e = {t_e:5.3f} K -> "
          f"T_eff = {t_eff:5.3f} K -> n = {n_bar:5.2f} -> "
          f"stark = {stark_shift(n_bar, qc) / 1e6:5.2f} MHz, "
          f"dephasing = {dephasing_rate(n_bar, qc) / 1e6:5.2f} /us")

sim = SimConfig(dt=0.02, t_total=20000.0, t_transient=1000.0, seed=7)
bias = BiasPoint(I_b=27e-6, phi_a=0.5)
v_mean = static_voltage(device, bias, sim)
report = backaction_report(device, qc, bias, v_mean)

print()
print("full report at I_b = 27 uA, flux 0.5 (device simulated)")
print(f"  mean voltage      : {v_mean * 1e6:.2f} uV")
print(f"  dissipated power  : {report.P_dissipated * 1e9:.3f} nW")
print(f"  oscillation freq  : {report.f_josephson / 1e9:.1f} GHz")
print(f"  electron temp     : {report.T_electron:.3f} K")
print(f"  cavity temp       : {report.T_cavity_effective:.3f} K")
print(f"  photon number     : {report.n_bar_steady:.3f}")
print(f"  stark shift       : {report.stark_shift / 1e6:.3f} MHz")
print(f"  dephasing rate    : {report.dephasing_rate / 1e6:.3f} /us")
for note in report.notes:
    print(f"  note: {note}")
