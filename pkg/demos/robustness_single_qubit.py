"""Detuning sensitivity of the geometric loops next to plain resonant pulses.

Run:  python demos/robustness_single_qubit.py
"""
import numpy as np

from geotraj import optimize as opt
from geotraj.fidelity import compare_curves, default_grid, sensitivity_curve
from geotraj.geometry import named_gate_params, synth_five_segment
from geotraj.pulse import synth_conventional_gate, target_unitary

grid = default_grid()
print(f"{'gate':6s} {'branch':>6s} {'geo @0.1':>10s} {'conv @0.1':>10s} {'gain':>6s}  dominates")
for name in ("I", "H", "Xpi", "Xpi2", "mYpi2"):
    chi1, chi3, branch = opt.reference_point(name)
    sched, _ = synth_five_segment(named_gate_params(name, branch), chi1, chi3)
    target = target_unitary(name)
    geo = sensitivity_curve(sched, target, grid=grid)
    conv = sensitivity_curve(synth_conventional_gate(name), target, grid=grid)
    rep = compare_curves(geo, conv)
    print(f"{name:6s} {branch:6d} {geo.at(0.1):10.2e} {conv.at(0.1):10.2e} "
          f"{conv.at(0.1) / geo.at(0.1):6.2f}  {bool(rep.dominates)}")

# the loop duration is the price paid for the flat response
chi1, chi3, branch = opt.reference_point("H")
sched, _ = synth_five_segment(named_gate_params("H", branch), chi1, chi3)
print(f"\nH loop: {len(sched.segments)} segments, {sched.total_time:.1f} ns at the default drive")
print("conventional H:", f"{synth_conventional_gate('H').total_time:.1f} ns")
