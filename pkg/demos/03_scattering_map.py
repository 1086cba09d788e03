"""Scattering maps through the low-impedance matching network.

A coarse flux x frequency sweep at fixed bias shows forward gain on
both shoulders of the transfer curve and an isolation pocket on the
negative-slope side where the reverse coupling cancels.  A few minutes
on one core; enlarge the grids for smoother maps.
"""

import numpy as np

from slugsim import DeviceParams, MatchingNetwork, SimConfig, scattering_map

device = DeviceParams()
sim = SimConfig(dt=0.02, t_total=4000.0, t_transient=500.0, seed=7)
network = MatchingNetwork.design(Z_char=2.0, f_center=6e9)
flux = np.linspace(0.15, 0.85, 15)
freq = np.linspace(4.5e9, 7.5e9, 7)

smap = scattering_map(device, 27e-6, flux, freq, network, sim,
                      rel_tol=0.10, block_time=1000.0, min_blocks=6,
                      max_blocks=24)

present = np.array([[r is None or r == "lockin_not_converged"
                     for r in row] for row in smap.reasons])
s21 = np.where(present, smap.S21_dB, -np.inf)
s12 = np.where(present, smap.S12_dB, np.inf)

print("S21 (dB), rows = flux, cols = frequency")
header = "  flux " + " ".join(f"{f / 1e9:6.2f}" for f in freq)
print(header)
for k, phi in enumerate(flux):
    cells = " ".join(f"{v:6.1f}" if np.isfinite(v) else "     ."
                     for v in s21[k])
    print(f"{phi:6.2f} {cells}")

k, j = np.unravel_index(np.argmax(s21), s21.shape)
print(f"\npeak forward gain : {s21[k, j]:.1f} dB at flux {flux[k]:.2f}, "
      f"{freq[j] / 1e9:.2f} GHz")
k, j = np.unravel_index(np.argmin(s12), s12.shape)
print(f"best isolation    : {s12[k, j]:.1f} dB at flux {flux[k]:.2f}, "
      f"{freq[j] / 1e9:.2f} GHz (V_phi = {smap.V_phi[k] * 1e3:.2f} mV/Phi0)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, grid, label in ((axes[0], smap.S21_dB, "S21 (dB)"),
                            (axes[1], smap.S12_dB, "S12 (dB)")):
        im = ax.pcolormesh(freq / 1e9, flux, grid, shading="nearest")
        ax.set_xlabel("frequency (GHz)")
        ax.set_title(label)
        fig.colorbar(im, ax=ax)
    axes[0].set_ylabel("flux (Phi_0)")
    fig.tight_layout()
    fig.savefig("03_scattering_map.png", dpi=120)
    print("wrote 03_scattering_map.png")
