"""Pulsed amplifier operation around a Ramsey sequence.

Gating the amplifier off between the two pi/2 pulses removes the photon
exposure during free evolution, so the qubit picks up no Stark phase
from the readout cavity.  Running it continuously leaves the full
exposure in place.  Instant.
"""

from slugsim import PulseEvent, QubitCavityParams, pulsed_mode_timeline

qc = QubitCavityParams(f_cavity=6.605e9, chi_over_2pi=0.75e6,
                       kappa=1 / 350e-9, f_qubit=5.5e9, T2=10e-6,
                       ramsey_detuning=1e6)
n_steady = 1.9
separation = 10e-6

gated = [
    PulseEvent("pi_half", 0.0, 0.0),
    PulseEvent("pi_half", separation, separation),
    PulseEvent("slug_active", separation, separation + 4e-6),
    PulseEvent("measurement", separation, separation + 4e-6),
]
continuous = [
    PulseEvent("pi_half", 0.0, 0.0),
    PulseEvent("pi_half", separation, separation),
    PulseEvent("slug_active", 0.0, separation + 4e-6),
    PulseEvent("measurement", separation, separation + 4e-6),
]

for label, events in (("gated", gated), ("continuous", continuous)):
    timeline = pulsed_mode_timeline(qc, n_steady, events)
    print(f"{label} amplifier")
    print(f"{'t0 (us)':>9} {'t1 (us)':>9} {'on':>4} {'n start':>8} {'n end':>8}")
    for t0, t1, active, n0, n1 in timeline.segments:
        print(f"{t0 * 1e6:9.2f} {t1 * 1e6:9.2f} {'on' if active else 'off':>4} "
              f"{n0:8.3f} {n1:8.3f}")
    print(f"  photon exposure between pulses : "
          f"{timeline.photon_exposure * 1e6:.3f} photon us")
    print(f"  accumulated stark phase        : "
          f"{timeline.stark_phase:.3f} rad")
    print()
