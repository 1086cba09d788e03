"""Small-signal two-port impedance along the flux axis at fixed bias.

The forward transimpedance tracks the transfer slope while the reverse
coupling stays near the bare inductive term, so the device is
directional.  On the negative-slope shoulder the reverse reactance
crosses zero; the loaded analytic estimate of that flux is printed for
comparison.  Takes a minute or two on one core.
"""

import math

import numpy as np

from slugsim import (DeviceParams, SimConfig, analytic_Zf, directionality,
                     loaded_transfer_inductance, two_port_sweep)
from slugsim.constants import PHI0

device = DeviceParams()
sim = SimConfig(dt=0.02, t_total=4000.0, t_transient=500.0, seed=7)
omega = 2 * math.pi * 6e9
flux = np.arange(0.54, 0.78, 0.02)

sweep = two_port_sweep(device, 27e-6, flux, np.array([omega]), sim,
                       rel_tol=0.08, abs_floor=(0.05, 0.06, 0.1, 0.3),
                       block_time=1500.0, min_blocks=6, max_blocks=64)

print(f"{'flux':>6} {'V_phi (mV/Phi0)':>16} {'Re Z21':>8} {'L V_phi':>8} "
      f"{'Im Z12':>8} {'D (dB)':>8}")
for k, phi in enumerate(flux):
    pt = sweep.points[k][0]
    if pt is None:
        print(f"{phi:6.2f} {'-':>16} ({sweep.reasons[k][0]})")
        continue
    zf = analytic_Zf(device, pt.V_phi)
    _, d_db = directionality(device, pt.V_phi, omega, 1.0)
    print(f"{phi:6.2f} {pt.V_phi * 1e3:16.3f} {pt.Z21.real:8.3f} "
          f"{zf:8.3f} {pt.Z12.imag:8.3f} {d_db:8.1f}")

l_eff = loaded_transfer_inductance(device, omega)
v_star = -(device.R / device.L) * (l_eff / device.L) * PHI0
print()
print(f"junction-loaded transfer inductance: {l_eff * 1e12:.3f} pH "
      f"(bare {device.L * 1e12:.1f} pH)")
print(f"reverse coupling cancels where V_phi = {v_star * 1e3:.3f} mV/Phi0;"
      " look for the Im Z12 sign change above")
