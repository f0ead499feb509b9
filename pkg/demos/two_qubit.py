"""Parametric iSWAP: effective-model robustness and a small (nu, beta) map.

Run:  python demos/two_qubit.py
"""
import numpy as np

from geotraj import optimize as opt
from geotraj import twoqubit as tq
from geotraj.transmon import MHZ

chi1, chi3, branch = opt.reference_point("iSWAP")
geo, conv = tq.sensitivity_two_qubit("iSWAP", chi1, chi3, branch=branch)
for d in (-0.1, -0.05, 0.05, 0.1):
    print(f"detuning error {d:+.2f}:  geometric {geo.at(d):.2e}   conventional {conv.at(d):.2e}")

p = tq.TwoQubitParams()
fmap = tq.scan_nu_beta("iSWAP", chi1, chi3, p, np.linspace(-10, 10, 5) * MHZ,
                       np.linspace(0.6, 1.4, 5), tq.default_decoherence(p=p), branch)
nu, beta, f = fmap.best()
print(f"\nbest of a 5x5 map: F = {f:.5f} at beta = {beta:.2f}")
