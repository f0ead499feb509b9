"""Open-system fidelity of the geometric X_pi/2 loop on a 4-level transmon.

Run:  python demos/transmon_drag.py
"""
import numpy as np

from geotraj import optimize as opt
from geotraj.geometry import gate_unitary, named_gate_params, synth_five_segment
from geotraj.transmon import MHZ, DragSettings, TransmonParams, omega_sweep

p = TransmonParams(levels=4)  # default anharmonicity and coherence times
chi1, chi3, branch = opt.reference_point("Xpi2")
gate = named_gate_params("Xpi2", branch)


def make(om):
    return synth_five_segment(gate, chi1, chi3, omega_max=om)[0]


omegas = np.arange(16.0, 48.0 + 1e-9, 4.0) * MHZ
sweep = omega_sweep(make, gate_unitary(gate), p, omegas, DragSettings(True, 1.0, calibrate=True))

print(" Omega/2pi [MHz]   F (DRAG)   F (no DRAG)")
for om, a, b in zip(omegas / MHZ, sweep.infidelity_drag, sweep.infidelity_nodrag):
    print(f"{om:14.0f}   {1 - a:.5f}    {1 - b:.5f}")
# slow drives lose to decoherence, fast ones to leakage into |2>
