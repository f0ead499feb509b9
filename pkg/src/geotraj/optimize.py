"""Grid search over the free waypoints (chi1, chi3) of the five-arc loop.

Each cell synthesizes the corrected loop, injects a systematic error and
records the gate infidelity. A coarse pass is followed by a fine pass around
the best few coarse cells. Cells whose loop cannot be built (equatorial
latitude arcs, loops enclosing no solid angle) are kept as NaN.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .exceptions import ParameterError
from .fidelity import gate_fidelity, parallel_map
from .geometry import GateParams, gate_unitary, named_gate_params, synth_five_segment
from .noise import error_of_kind
from .pulse import propagate_schedule

METRICS = ("probe", "mean", "max")

# integrator sizing for scans: accurate to ~1e-8 in the propagator
SCAN_STEPS = 16
SCAN_STEPS_PER_RAD = 20.0

# (chi1, chi3) -> (infidelity, total pulse area); raises ParameterError when infeasible
CellEvaluator = Callable[[float, float], tuple]


def probe_values(delta_probe: float, metric: str) -> tuple:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    return (delta_probe,) if metric == "probe" else (delta_probe, -delta_probe)


def reduce_metric(values: Sequence[float], metric: str) -> float:
    return float(max(values)) if metric == "max" else float(np.mean(values))


def single_qubit_evaluator(p: GateParams, error_kind: str = "detuning", delta_probe: float = 0.1,
                           metric: str = "probe", envelope: str = "sine",
                           steps: int = SCAN_STEPS, steps_per_rad: float = SCAN_STEPS_PER_RAD,
                           target=None) -> CellEvaluator:
    target = gate_unitary(p) if target is None else target
    errors = [error_of_kind(error_kind, d) for d in probe_values(delta_probe, metric)]

    def evaluate(chi1, chi3):
        sched, _ = synth_five_segment(p, chi1, chi3, envelope=envelope)
        vals = [1.0 - gate_fidelity(target, propagate_schedule(sched, e, steps, steps_per_rad=steps_per_rad))
                for e in errors]
        return reduce_metric(vals, metric), sched.total_area

    return evaluate


@dataclass
class Landscape:
    """Infidelity on a (chi1, chi3) grid; ``metric[i, j]`` belongs to (chi1_grid[i], chi3_grid[j]).

    ``refined`` holds extra (chi1, chi3, infidelity, area) samples from the
    fine pass; ``area`` mirrors ``metric`` with the total pulse area per cell.
    """

    chi1_grid: np.ndarray
    chi3_grid: np.ndarray
    metric: np.ndarray
    area: np.ndarray
    gate: GateParams
    refined: list = field(default_factory=list)

    def samples(self):
        """All finite samples as (chi1, chi3, infidelity, area) tuples."""
        out = []
        for i, c1 in enumerate(self.chi1_grid):
            for j, c3 in enumerate(self.chi3_grid):
                if np.isfinite(self.metric[i, j]):
                    out.append((float(c1), float(c3), float(self.metric[i, j]), float(self.area[i, j])))
        return out + list(self.refined)

    def to_csv(self, path) -> None:
        rows = [(c1, c3, m) for c1, c3, m, _ in self.samples()]
        # absent cells are reported too so the grid shape is recoverable
        for i, c1 in enumerate(self.chi1_grid):
            for j, c3 in enumerate(self.chi3_grid):
                if not np.isfinite(self.metric[i, j]):
                    rows.append((float(c1), float(c3), float("nan")))
        rows.sort(key=lambda r: (r[0], r[1]))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["chi1", "chi3", "infidelity"])
            for r in rows:
                w.writerow([repr(v) for v in r])


def axis_grid(lo: float, hi: float, resolution: float) -> np.ndarray:
    """Points lo, lo + res, ... up to and including hi (hi is appended if not hit)."""
    n = int(np.floor((hi - lo) / resolution + 1e-9))
    pts = lo + resolution * np.arange(n + 1)
    if hi - pts[-1] > 1e-9 * max(1.0, abs(hi)):
        pts = np.append(pts, hi)
    return pts


def _safe(evaluate: CellEvaluator, c1: float, c3: float):
    try:
        return evaluate(c1, c3)
    except ParameterError:
        return float("nan"), float("nan")


def _best_key(sample):
    c1, c3, m, a = sample
    # tie-breaks: metric, then shortest gate (area), then lexicographic
    return (round(m, 12), round(a, 9), c1, c3)


def scan_landscape(p: GateParams, resolution: float = 0.02 * np.pi, error_kind: str = "detuning",
                   delta_probe: float = 0.1, metric: str = "probe", envelope: str = "sine",
                   refine: bool = True, fine_resolution: float = 0.005 * np.pi, refine_cells: int = 5,
                   evaluator: Optional[CellEvaluator] = None, threads: int = 1) -> Landscape:
    """Scan chi1 in [0, chi0] and chi3 in [chi0, pi]; optionally refine around the best cells."""
    if resolution <= 0:
        raise ParameterError("resolution must be positive")
    if evaluator is None:
        evaluator = single_qubit_evaluator(p, error_kind, delta_probe, metric, envelope)
    g1 = axis_grid(0.0, p.chi0, resolution)
    g3 = axis_grid(p.chi0, np.pi, resolution)
    cells = [(a, b) for a in g1 for b in g3]
    res = parallel_map(lambda c: _safe(evaluator, *c), cells, threads)
    metric_m = np.array([r[0] for r in res], dtype=float).reshape(len(g1), len(g3))
    area_m = np.array([r[1] for r in res], dtype=float).reshape(len(g1), len(g3))
    land = Landscape(g1, g3, metric_m, area_m, p)
    if not np.isfinite(metric_m).any():
        raise ParameterError("no feasible (chi1, chi3) cell in the scan window")
    if refine and fine_resolution < resolution:
        land.refined = _refine(land, evaluator, resolution, fine_resolution, refine_cells, threads)
    return land


def _refine(land: Landscape, evaluator, resolution, fine_resolution, n_cells, threads) -> list:
    chi0 = land.gate.chi0
    coarse = sorted(land.samples(), key=_best_key)[:n_cells]
    offsets = fine_resolution * np.arange(-int(round(resolution / fine_resolution)) + 1,
                                          int(round(resolution / fine_resolution)))
    seen = {(round(c1, 12), round(c3, 12)) for c1, c3, _, _ in land.samples()}
    todo = []
    for c1, c3, _, _ in coarse:
        for d1 in offsets:
            for d3 in offsets:
                a, b = c1 + d1, c3 + d3
                if not (-1e-12 <= a <= chi0 + 1e-12 and chi0 - 1e-12 <= b <= np.pi + 1e-12):
                    continue
                a, b = min(max(a, 0.0), chi0), min(max(b, chi0), np.pi)
                key = (round(a, 12), round(b, 12))
                if key not in seen:
                    seen.add(key)
                    todo.append((a, b))
    res = parallel_map(lambda c: _safe(evaluator, *c), todo, threads)
    return [(a, b, m, ar) for (a, b), (m, ar) in zip(todo, res) if np.isfinite(m)]


def select_optimum(land: Landscape) -> tuple:
    """(chi1, chi3, infidelity) of the best sample."""
    samples = land.samples()
    if not samples:
        raise ParameterError("empty landscape")
    c1, c3, m, _ = min(samples, key=_best_key)
    return c1, c3, m


@dataclass(frozen=True)
class GateOptimum:
    name: str
    branch: int
    gate: GateParams
    chi1: float
    chi3: float
    infidelity: float
    landscape: Landscape

    def summary(self) -> dict:
        return {
            "gate": self.name,
            "branch": self.branch,
            "gamma_g": self.gate.gamma_g,
            "chi1": self.chi1,
            "chi3": self.chi3,
            "chi1_pi": self.chi1 / np.pi,
            "chi3_pi": self.chi3 / np.pi,
            "infidelity": self.infidelity,
        }


def optimize_gate(name: str, branches: Sequence[int] = (0, 1), evaluator_factory=None,
                  **scan_kwargs) -> GateOptimum:
    """Scan every requested gamma branch of a named gate and keep the best optimum.

    ``evaluator_factory(p)`` overrides the single-qubit cell evaluator, e.g.
    for the two-qubit effective model.
    """
    best = None
    for br in branches:
        p = named_gate_params(name, br)
        ev = evaluator_factory(p) if evaluator_factory is not None else None
        land = scan_landscape(p, evaluator=ev, **scan_kwargs)
        c1, c3, m = select_optimum(land)
        cand = GateOptimum(name, br, p, c1, c3, m, land)
        if best is None or (round(m, 12), br) < (round(best.infidelity, 12), best.branch):
            best = cand
    return best


def scan_four_segment(p: GateParams, chi2_grid, error_kind: str = "detuning", delta_probe: float = 0.1,
                      metric: str = "probe", envelope: str = "sine", threads: int = 1):
    """Metric of the four-arc loop (through the north pole) versus its free latitude chi2.

    Returns ``(chi2_grid, values, chi2_best)``; infeasible chi2 give NaN.
    """
    ev = single_qubit_evaluator(p, error_kind, delta_probe, metric, envelope)
    chi2_grid = np.asarray(chi2_grid, dtype=float)
    res = parallel_map(lambda c: _safe(ev, 0.0, c), list(chi2_grid), threads)
    vals = np.array([r[0] for r in res])
    samples = [(0.0, float(c), m, a) for c, (m, a) in zip(chi2_grid, res) if np.isfinite(m)]
    if not samples:
        raise ParameterError("no feasible chi2")
    return chi2_grid, vals, min(samples, key=_best_key)[1]


# Reference waypoints (chi1, chi3) in units of pi. H, the +-pi/2 rotations,
# iSWAP and CZ are the known optima; I, Xpi and Ypi come from our own
# probe-metric scans.
REFERENCE_WAYPOINTS = {
    "I": (0.35, 0.675),
    "H": (0.05, 0.73),
    "Xpi": (0.44, 0.565),
    "Ypi": (0.44, 0.565),
    "Xpi2": (0.1, 0.9),
    "Ypi2": (0.1, 0.9),
    "mXpi2": (0.1, 0.9),
    "mYpi2": (0.1, 0.9),
    "iSWAP": (0.27, 0.73),
    "CZ": (0.0, 0.9),
}


def branch_at(name: str, chi1: float, chi3: float, delta_probe: float = 0.1) -> int:
    """Gamma branch with the lower probe infidelity at (chi1, chi3).

    Both branches give the same gate; the loops differ, and so does their
    error sensitivity at a given waypoint.
    """
    if name in ("iSWAP", "CZ"):
        from .twoqubit import best_branch
        return best_branch(name, chi1, chi3, delta_probe)
    scores = []
    for br in (0, 1):
        ev = single_qubit_evaluator(named_gate_params(name, br), delta_probe=delta_probe)
        m, _ = _safe(ev, chi1, chi3)
        if np.isfinite(m):
            scores.append((m, br))
    if not scores:
        # surface the actual reason (singular drift, degenerate loop, ...)
        single_qubit_evaluator(named_gate_params(name, 0))(chi1, chi3)
        raise ParameterError(f"no feasible branch for {name} at ({chi1}, {chi3})")
    return min(scores)[1]


def reference_point(name: str) -> tuple:
    """(chi1, chi3, branch) used by default for the named gate."""
    try:
        c1, c3 = REFERENCE_WAYPOINTS[name]
    except KeyError:
        raise ParameterError(f"no reference waypoints for {name!r}") from None
    chi1, chi3 = c1 * np.pi, c3 * np.pi
    return chi1, chi3, branch_at(name, chi1, chi3)
