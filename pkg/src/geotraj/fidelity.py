"""Gate fidelity, error-sensitivity curves and curve comparison."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .exceptions import DimensionError
from .noise import error_of_kind
from .pulse import PulseSchedule, propagate_schedule

DEFAULT_DELTA_MAX = 0.1
DEFAULT_POINTS = 41


def default_grid(delta_max: float = DEFAULT_DELTA_MAX, points: int = DEFAULT_POINTS) -> np.ndarray:
    return np.linspace(-delta_max, delta_max, points)


def gate_fidelity(U_target, U_actual, mode: str = "abs") -> float:
    """Tr(U^dag U_e)/d with modulus (``mode="abs"``) or real part (``mode="re"``).

    The modulus form ignores global phase; the real-part form is the literal
    trace overlap and is phase sensitive.
    """
    U_target = np.asarray(U_target, dtype=complex)
    U_actual = np.asarray(U_actual, dtype=complex)
    if U_target.shape != U_actual.shape:
        raise DimensionError(f"shape mismatch {U_target.shape} vs {U_actual.shape}")
    tr = np.trace(U_target.conj().T @ U_actual) / U_target.shape[0]
    if mode == "abs":
        return float(abs(tr))
    if mode == "re":
        return float(tr.real)
    raise ValueError(f"unknown fidelity mode {mode!r}")


def average_gate_fidelity(U_target, block) -> float:
    """Haar-averaged gate fidelity of a (possibly non-unitary) subspace block.

    For a block M = U_target^dag B of a larger unitary, the average is
    (Tr(M M^dag) + |Tr M|^2) / (d (d + 1)); lost norm counts as error.
    """
    U_target = np.asarray(U_target, dtype=complex)
    block = np.asarray(block, dtype=complex)
    if U_target.shape != block.shape:
        raise DimensionError(f"shape mismatch {U_target.shape} vs {block.shape}")
    d = U_target.shape[0]
    M = U_target.conj().T @ block
    return float((np.trace(M @ M.conj().T).real + abs(np.trace(M)) ** 2) / (d * (d + 1)))


@dataclass
class SensitivityCurve:
    name: str
    grid: np.ndarray
    infidelity: np.ndarray
    kind: str = "detuning"

    def at(self, value: float) -> float:
        i = int(np.argmin(np.abs(self.grid - value)))
        return float(self.infidelity[i])

    def to_csv(self, path) -> None:
        write_columns(path, {"delta": self.grid, "infidelity": self.infidelity})


def write_columns(path, columns: dict) -> None:
    names = list(columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*(columns[n] for n in names)):
            w.writerow([repr(float(v)) for v in row])


def parallel_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Order-preserving map, threaded when ``threads > 1``."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def sensitivity_curve(schedule, target, kind: str = "detuning", grid=None, name: str = "",
                      propagator: Optional[Callable] = None, mode: str = "abs",
                      steps: int = 2000, threads: int = 1) -> SensitivityCurve:
    """1 - F_U of ``schedule`` against ``target`` over a grid of error sizes.

    ``schedule`` may also be a zero-argument callable producing the schedule.
    ``propagator(schedule, error)`` replaces the default two-level propagation,
    e.g. to embed an effective model into a larger space.
    """
    if callable(schedule) and not isinstance(schedule, PulseSchedule):
        schedule = schedule()
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if propagator is None:
        propagator = lambda s, e: propagate_schedule(s, e, steps=steps)

    def point(value):
        return 1.0 - gate_fidelity(target, propagator(schedule, error_of_kind(kind, value)), mode)

    infid = np.array(parallel_map(point, list(grid), threads))
    return SensitivityCurve(name, grid, infid, kind)


@dataclass
class DominanceReport:
    """Pointwise comparison of curve ``a`` against curve ``b``."""

    a_le_b: np.ndarray
    ties: np.ndarray
    max_ratio: float
    crossovers: list = field(default_factory=list)

    @property
    def dominates(self) -> bool:
        return bool(np.all(self.a_le_b))

    @property
    def all_tied(self) -> bool:
        return bool(np.all(self.ties))


def compare_curves(a: SensitivityCurve, b: SensitivityCurve, atol: float = 1e-12) -> DominanceReport:
    """Where a <= b (within ``atol``), the largest a/b ratio and sign changes of a - b."""
    if a.grid.shape != b.grid.shape or not np.allclose(a.grid, b.grid, rtol=0, atol=1e-15):
        raise DimensionError("curves are sampled on different grids")
    diff = a.infidelity - b.infidelity
    ties = np.abs(diff) <= atol
    le = diff <= atol
    positive = b.infidelity > atol
    ratio = float(np.max(a.infidelity[positive] / b.infidelity[positive])) if positive.any() else 0.0
    sign = np.where(ties, 0, np.sign(diff))
    crossovers = []
    last = 0
    for i, s in enumerate(sign):
        if s and last and s != last:
            crossovers.append(float(0.5 * (a.grid[i - 1] + a.grid[i])))
        if s:
            last = s
    return DominanceReport(le, ties, ratio, crossovers)
