"""Static response of the two-junction loop: current-voltage curve at
zero applied flux, then the flux modulation of the mean voltage at a
working bias.  Runs in a few seconds.
"""

import math

import numpy as np

from slugsim import BiasPoint, DeviceParams, SimConfig, integrate_langevin, v_phi_curve

device = DeviceParams()
quiet = SimConfig(dt=0.01, t_total=20000.0, t_transient=2000.0, seed=7,
                  noise_enabled=False)

print("composite junction, zero flux, no noise")
print(f"{'I_b (uA)':>10} {'V sim (uV)':>12} {'V model (uV)':>13}")
bias_points = np.array([42e-6, 45e-6, 50e-6, 60e-6, 80e-6])
iv = []
for i_b in bias_points:
    traj = integrate_langevin(device, BiasPoint(I_b=i_b), quiet,
                              topology="symmetric")
    model = 0.5 * device.R * math.sqrt(i_b**2 - (2 * device.I0) ** 2)
    iv.append(traj.v_mean)
    print(f"{i_b * 1e6:10.1f} {traj.v_mean * 1e6:12.3f} {model * 1e6:13.3f}")

noisy = SimConfig(dt=0.02, t_total=30000.0, t_transient=1000.0, seed=7)
flux = np.linspace(0.0, 1.0, 41)
curve = v_phi_curve(device, 27e-6, flux, noisy, topology="slug")

k_peak = int(np.argmax(np.abs(curve.v_phi)))
print()
print("flux modulation at I_b = 27 uA, thermal noise on")
print(f"  peak-to-peak swing : {(curve.v_mean.max() - curve.v_mean.min()) * 1e6:.1f} uV")
print(f"  steepest response  : {curve.v_phi[k_peak] * 1e3:.2f} mV per flux quantum"
      f" at {curve.flux[k_peak]:.3f} Phi_0")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(bias_points * 1e6, np.array(iv) * 1e6, "o-")
    ax1.set_xlabel("I_b (uA)")
    ax1.set_ylabel("V (uV)")
    ax1.set_title("zero-flux IV")
    ax2.errorbar(curve.flux, curve.v_mean * 1e6, yerr=curve.v_se * 1e6)
    ax2.set_xlabel("flux (Phi_0)")
    ax2.set_ylabel("V (uV)")
    ax2.set_title("transfer curve, 27 uA")
    fig.tight_layout()
    fig.savefig("01_bias_response.png", dpi=120)
    print("wrote 01_bias_response.png")
