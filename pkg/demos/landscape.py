"""Coarse (chi1, chi3) landscape for the Hadamard loop, written as CSV + SVG.

Run:  python demos/landscape.py [outdir]
"""
import sys
from pathlib import Path

import numpy as np

from geotraj.geometry import named_gate_params
from geotraj.optimize import scan_landscape
from geotraj.report import heatmap_svg

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# 0.05 pi is coarse enough to finish in a few seconds
land = scan_landscape(named_gate_params("H", 1), resolution=0.05 * np.pi, refine=False)
land.to_csv(out / "landscape_H.csv")

heatmap_svg(out / "landscape_H.svg", land.chi1_grid / np.pi, land.chi3_grid / np.pi, land.metric,
            title="H, branch 1", xlabel="chi1 / pi", ylabel="chi3 / pi", zlabel="1-F", log=True)

c1, c3, v, _ = min(land.samples(), key=lambda row: row[2])
print(f"best cell: chi1={c1 / np.pi:.3f}pi chi3={c3 / np.pi:.3f}pi 1-F={v:.2e}; files in {out}/")
