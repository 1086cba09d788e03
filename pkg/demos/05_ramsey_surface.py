"""Ramsey fringes against the amplifier turn-on delay.

Delaying the evolution window after the amplifier switches on lets the
cavity fill before the qubit accumulates phase.  The extracted fringe
frequency therefore rises from the bare detuning toward detuning plus
the full Stark shift with the cavity time constant.  Instant.
"""

import numpy as np

from slugsim import (QubitCavityParams, extract_fringe_frequency,
                     fit_frequency_rise, ramsey_surface, stark_shift)

qc = QubitCavityParams(f_cavity=6.605e9, chi_over_2pi=0.75e6,
                       kappa=1 / 350e-9, f_qubit=5.5e9, T2=10e-6,
                       ramsey_detuning=1e6)
n_bar = 1.47

head_start = np.linspace(0.0, 2e-6, 9)
evolution = np.linspace(0.0, 2e-6, 801)
surface = ramsey_surface(qc, n_bar, head_start, evolution)

freqs = np.array([
    extract_fringe_frequency(evolution, surface[i], qc.ramsey_detuning)
    for i in range(head_start.size)])

print(f"{'head start (ns)':>16} {'fringe freq (MHz)':>18}")
for t, f in zip(head_start, freqs):
    print(f"{t * 1e9:16.0f} {f / 1e6:18.3f}")

f_inf, delta_f, tau = fit_frequency_rise(head_start, freqs)
print()
print(f"saturation frequency : {f_inf / 1e6:.3f} MHz "
      f"(detuning {qc.ramsey_detuning / 1e6:.1f} + "
      f"stark {stark_shift(n_bar, qc) / 1e6:.3f})")
print(f"rise time constant   : {tau * 1e9:.0f} ns "
      f"(cavity 1/kappa = {1e9 / qc.kappa:.0f} ns)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.8))
    im = ax1.pcolormesh(evolution * 1e6, head_start * 1e6, surface,
                        shading="nearest", cmap="RdBu")
    ax1.set_xlabel("evolution time (us)")
    ax1.set_ylabel("head start (us)")
    ax1.set_title("fringe surface")
    fig.colorbar(im, ax=ax1)
    ax2.plot(head_start * 1e9, freqs / 1e6, "o")
    ts = np.linspace(0, head_start[-1], 200)
    ax2.plot(ts * 1e9, (f_inf - delta_f * np.exp(-ts / tau)) / 1e6, "-")
    ax2.set_xlabel("head start (ns)")
    ax2.set_ylabel("fringe frequency (MHz)")
    ax2.set_title("frequency rise")
    fig.tight_layout()
    fig.savefig("05_ramsey_surface.png", dpi=120)
    print("wrote 05_ramsey_surface.png")
