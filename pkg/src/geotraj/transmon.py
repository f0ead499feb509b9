"""Driven multi-level transmon with DRAG and Lindblad decoherence.

Units are angular frequency in rad/ns and time in ns throughout. Density
matrices are vectorized row-major, so vec(A rho B) = (A kron B^T) vec(rho).

The master equation is integrated by Strang splitting: exact unitary steps
(fourth-order Magnus) alternate with the exact exponential of the static
dissipator. Both factors are completely positive and trace preserving, so
trace and positivity hold to rounding. A fixed-step RK4 integrator on the
full Liouvillian is kept as an independent cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from . import numkit
from .exceptions import DimensionError, DomainError, ParameterError
from .fidelity import average_gate_fidelity, parallel_map, write_columns
from .noise import NO_ERROR, ErrorModel
from .pulse import PulseSchedule, PulseSegment, segment_steps

TWO_PI = 2 * np.pi
MHZ = TWO_PI * 1e-3  # 2 pi x 1 MHz in rad/ns
US = 1e3  # 1 us in ns


@dataclass(frozen=True)
class TransmonParams:
    levels: int = 4
    alpha: float = 320 * MHZ
    t1: float = 50 * US
    tphi: float = 50 * US

    def __post_init__(self):
        if not 2 <= self.levels <= 6:
            raise ParameterError("levels must lie in [2, 6] (2 only for closed-system checks)")
        if self.alpha <= 0:
            raise ParameterError("anharmonicity must be positive")
        if self.t1 <= 0 or self.tphi <= 0:
            raise ParameterError("coherence times must be positive (use inf to disable)")

    @property
    def closed(self) -> bool:
        return np.isinf(self.t1) and np.isinf(self.tphi)


@dataclass(frozen=True)
class DragSettings:
    """First-order DRAG; with ``calibrate`` the scale is re-fitted per schedule.

    Calibration minimizes the closed-system gate error over scale in [0, 2],
    as one would tune the coefficient on hardware.
    """

    enabled: bool = True
    scale: float = 1.0
    calibrate: bool = False

    def __post_init__(self):
        if not 0.0 <= self.scale <= 2.0:
            raise ParameterError("DRAG scale must lie in [0, 2]")

    @property
    def effective_scale(self) -> float:
        return self.scale if self.enabled else 0.0


def lowering(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels)), 1).astype(complex)


def number(levels: int) -> np.ndarray:
    return np.diag(np.arange(levels)).astype(complex)


def collapse_operators(levels: int, t1: float, tphi: float) -> list:
    """Relaxation a/sqrt(T1) and dephasing sqrt(2/Tphi) a^dag a.

    With this dephasing operator the 0-1 coherence decays as exp(-t/Tphi).
    """
    ops = []
    if np.isfinite(t1):
        ops.append(lowering(levels) / np.sqrt(t1))
    if np.isfinite(tphi):
        ops.append(np.sqrt(2.0 / tphi) * number(levels))
    return ops


# ---------------------------------------------------------------------------
# Hamiltonian


def transmon_hamiltonians(seg: PulseSegment, t, p: TransmonParams, error: ErrorModel = NO_ERROR,
                          omega_m: float = 1.0) -> np.ndarray:
    """Stack of level-space Hamiltonians of one segment at local times ``t``.

    Level n sits at 1/2[(2n-1) Delta - n(n-1) alpha]; neighbouring levels are
    coupled by 1/2 sqrt(n) (Omega + c) e^{-i phi}, c being the DRAG correction.
    """
    om, phi, delta, corr = seg.controls(t, error, omega_m)
    n = np.arange(p.levels)
    t = np.asarray(t, dtype=float)
    H = np.zeros(t.shape + (p.levels, p.levels), dtype=complex)
    diag = 0.5 * ((2 * n - 1)[None, :] * np.asarray(delta)[..., None] - (n * (n - 1))[None, :] * p.alpha)
    H[..., n, n] = diag.reshape(t.shape + (p.levels,))
    drive = 0.5 * (om + corr) * np.exp(-1j * phi)
    for k in range(1, p.levels):
        H[..., k - 1, k] = np.sqrt(k) * drive
        H[..., k, k - 1] = np.sqrt(k) * np.conj(drive)
    return H


def build_full_hamiltonian(schedule: PulseSchedule, p: TransmonParams, t: float,
                           error: ErrorModel = NO_ERROR) -> np.ndarray:
    if p.levels < 3:
        raise ParameterError("leakage model needs at least 3 levels")
    i, tl = schedule.locate(t)
    seg = schedule.segments[i]
    if seg.degenerate:
        n = np.arange(p.levels)
        delta = (error.detuning + error.detuning_2q) * schedule.omega_m
        return np.diag(0.5 * ((2 * n - 1) * delta - n * (n - 1) * p.alpha)).astype(complex)
    return transmon_hamiltonians(seg, np.array([tl]), p, error, schedule.omega_m)[0]


def drag_correct(schedule: PulseSchedule, p: TransmonParams, s: DragSettings) -> PulseSchedule:
    """Apply first-order DRAG with coefficient scale / alpha to every segment.

    The complex drive eps = Omega e^{-i phi} becomes eps - i (scale/alpha) d(eps)/dt.
    For a constant phase that is the usual quadrature -scale dOmega/dt / alpha;
    on latitude arcs the phase drift adds an in-phase term as well.
    """
    scale = s.effective_scale
    if scale == 0 or p.levels < 3:
        # nothing to suppress without a leakage level
        return schedule
    if any(seg.envelope != "sine" and not seg.degenerate for seg in schedule.segments):
        raise ParameterError("DRAG needs differentiable (sine) envelopes")
    return schedule.map_segments(lambda seg: replace(seg, drag=scale / p.alpha))


def closed_propagator(schedule: PulseSchedule, p: TransmonParams, error: ErrorModel = NO_ERROR,
                      steps: int = 32, steps_per_rad: float = 8.0) -> np.ndarray:
    """Level-space unitary of ``schedule`` without decoherence."""
    U = np.eye(p.levels, dtype=complex)
    for seg in schedule.segments:
        if seg.degenerate:
            continue
        grid = numkit.TimeGrid(0.0, seg.duration, transmon_steps(seg, p, steps, steps_per_rad))
        U = numkit.propagate(lambda t, s=seg: transmon_hamiltonians(s, t, p, error, schedule.omega_m),
                             grid) @ U
    return U


def calibrate_drag_scale(schedule: PulseSchedule, target, p: TransmonParams,
                         bounds: tuple = (0.0, 2.0), xatol: float = 1e-3) -> float:
    """DRAG scale minimizing the closed-system qubit-block gate error."""
    target = np.asarray(target, dtype=complex)

    def cost(scale):
        U = closed_propagator(drag_correct(schedule, p, DragSettings(True, scale)), p)
        return 1.0 - average_gate_fidelity(target, U[:2, :2])

    res = scipy.optimize.minimize_scalar(cost, bounds=bounds, method="bounded", options={"xatol": xatol})
    # the bounded search never probes the end points exactly
    best = min([(res.fun, float(res.x))] + [(cost(b), float(b)) for b in bounds])
    return best[1]


def resolve_drag(schedule: PulseSchedule, target, p: TransmonParams, s: DragSettings) -> DragSettings:
    if s.enabled and s.calibrate:
        return DragSettings(True, calibrate_drag_scale(schedule, target, p))
    return s


# ---------------------------------------------------------------------------
# Liouville-space helpers


def hamiltonian_superop(H: np.ndarray) -> np.ndarray:
    d = H.shape[-1]
    eye = np.eye(d)
    return -1j * (np.kron(H, eye) - np.kron(eye, H.T))


def dissipator(ops: Sequence[np.ndarray], d: int) -> np.ndarray:
    eye = np.eye(d)
    D = np.zeros((d * d, d * d), dtype=complex)
    for L in ops:
        LdL = L.conj().T @ L
        D += np.kron(L, L.conj()) - 0.5 * np.kron(LdL, eye) - 0.5 * np.kron(eye, LdL.T)
    return D


def check_density(rho: np.ndarray, tol: float = 1e-10) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise DomainError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise DomainError("density matrix must have unit trace")
    if np.min(np.linalg.eigvalsh(rho)) < -tol:
        raise DomainError("density matrix is not positive semidefinite")


def _dissipative_map(D: np.ndarray, h: float) -> Optional[np.ndarray]:
    if not np.any(D):
        return None
    return scipy.linalg.expm(D * h)


def _apply_superop(P: Optional[np.ndarray], rhos: np.ndarray) -> np.ndarray:
    if P is None:
        return rhos
    k, d, _ = rhos.shape
    return (rhos.reshape(k, d * d) @ P.T).reshape(k, d, d)


def evolve_split(rhos: np.ndarray, step_unitaries: np.ndarray, h: float, D: np.ndarray,
                 chunk: int = 1) -> np.ndarray:
    """Strang-split evolution of a stack of operators.

    ``step_unitaries`` are the closed-system step propagators of size ``h``;
    ``chunk`` consecutive steps share one dissipative sub-step, which is
    accurate while the dissipation rate times ``chunk * h`` stays small.
    """
    n = step_unitaries.shape[0]
    chunk = max(1, min(chunk, n))
    starts = list(range(0, n, chunk))
    maps = {}

    def dmap(width):
        if width not in maps:
            maps[width] = _dissipative_map(D, width)
        return maps[width]

    for k, s in enumerate(starts):
        e = min(s + chunk, n)
        U = numkit.ordered_product(step_unitaries[s:e])
        width = (e - s) * h
        rhos = _apply_superop(dmap(width / 2), rhos)
        rhos = U @ rhos @ U.conj().T
        rhos = _apply_superop(dmap(width / 2), rhos)
    return rhos


def evolve_rk4(rhos: np.ndarray, sampler: Callable, t0: float, t1: float, steps: int,
               D: np.ndarray) -> np.ndarray:
    """Classical RK4 on vec(rho) with the time-dependent Liouvillian."""
    k, d, _ = rhos.shape
    v = rhos.reshape(k, d * d).T.copy()
    h = (t1 - t0) / steps

    def L(t):
        return hamiltonian_superop(np.asarray(sampler(np.array([t])))[0]) + D

    for i in range(steps):
        t = t0 + i * h
        La, Lb, Lc = L(t), L(t + h / 2), L(t + h)
        k1 = La @ v
        k2 = Lb @ (v + 0.5 * h * k1)
        k3 = Lb @ (v + 0.5 * h * k2)
        k4 = Lc @ (v + h * k3)
        v = v + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return v.T.reshape(k, d, d)


def lindblad_evolve(rho0, sampler: Callable, p: TransmonParams, grid: numkit.TimeGrid,
                    method: str = "split", chunk: int = 1, check: bool = True,
                    ops: Optional[Sequence[np.ndarray]] = None) -> np.ndarray:
    """Integrate the master equation for ``rho0`` under ``sampler`` (vectorized in t).

    ``rho0`` may be one density matrix or a stack; stacks are evolved linearly,
    which lets callers push operator bases through the same map. ``ops``
    overrides the transmon collapse operators.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    single = rho0.ndim == 2
    rhos = rho0[None] if single else rho0
    d = rhos.shape[-1]
    if check and single:
        check_density(rho0)
    ops = collapse_operators(d, p.t1, p.tphi) if ops is None else ops
    D = dissipator(ops, d)
    if method == "split":
        Us = numkit.step_unitaries(sampler, grid.t_start, grid.t_end, grid.steps)
        h = grid.duration / grid.steps
        out = evolve_split(rhos, Us, h, D, chunk)
    elif method == "rk4":
        out = evolve_rk4(rhos, sampler, grid.t_start, grid.t_end, grid.steps, D)
    else:
        raise ValueError(f"unknown Lindblad method {method!r}")
    return out[0] if single else out


# ---------------------------------------------------------------------------
# Schedules on the transmon


def transmon_steps(seg: PulseSegment, p: TransmonParams, steps: int, steps_per_rad: float) -> int:
    # resolve both the control rotation and the anharmonic phase winding
    n = segment_steps(seg, steps, steps_per_rad)
    return max(n, int(np.ceil(steps_per_rad * p.alpha * seg.duration * (p.levels - 1))))


def evolve_schedule(rhos, schedule: PulseSchedule, p: TransmonParams, error: ErrorModel = NO_ERROR,
                    steps: int = 32, steps_per_rad: float = 8.0, method: str = "split",
                    chunk: int = 64) -> np.ndarray:
    """Evolve a stack of level-space operators through every segment of ``schedule``."""
    rhos = np.asarray(rhos, dtype=complex)
    for seg in schedule.segments:
        if seg.degenerate:
            continue
        n = transmon_steps(seg, p, steps, steps_per_rad)
        grid = numkit.TimeGrid(0.0, seg.duration, n)
        sampler = lambda t, s=seg: transmon_hamiltonians(s, t, p, error, schedule.omega_m)
        rhos = lindblad_evolve(rhos, sampler, p, grid, method=method, chunk=chunk, check=False)
    return rhos


CARDINAL_STATES = (
    np.array([1, 0], dtype=complex),
    np.array([0, 1], dtype=complex),
    np.array([1, 1], dtype=complex) / np.sqrt(2),
    np.array([1, -1], dtype=complex) / np.sqrt(2),
    np.array([1, 1j], dtype=complex) / np.sqrt(2),
    np.array([1, -1j], dtype=complex) / np.sqrt(2),
)


def gate_fidelity_open(schedule: PulseSchedule, target, p: TransmonParams,
                       error: ErrorModel = NO_ERROR, **evolve_kwargs) -> float:
    """Mean state fidelity over the six cardinal qubit states.

    The final state is restricted to the qubit block without renormalizing,
    so population left outside {|0>, |1>} counts as error.
    """
    target = np.asarray(target, dtype=complex)
    if target.shape != (2, 2):
        raise DimensionError("target must be a 2x2 unitary")
    d = p.levels
    rhos = np.zeros((len(CARDINAL_STATES), d, d), dtype=complex)
    for k, psi in enumerate(CARDINAL_STATES):
        rhos[k, :2, :2] = np.outer(psi, psi.conj())
    final = evolve_schedule(rhos, schedule, p, error, **evolve_kwargs)
    fids = [np.real(np.vdot(target @ psi, final[k, :2, :2] @ (target @ psi)))
            for k, psi in enumerate(CARDINAL_STATES)]
    return float(np.mean(fids))


@dataclass
class OmegaSweep:
    omega_m: np.ndarray
    infidelity_nodrag: np.ndarray
    infidelity_drag: np.ndarray

    def best(self, drag: bool = True) -> tuple:
        curve = self.infidelity_drag if drag else self.infidelity_nodrag
        i = int(np.argmin(curve))
        return float(self.omega_m[i]), float(1.0 - curve[i])

    def to_csv(self, path) -> None:
        """omega_m is written in MHz (Omega_m / 2 pi)."""
        write_columns(path, {"omega_m": self.omega_m / MHZ, "infidelity_nodrag": self.infidelity_nodrag,
                             "infidelity_drag": self.infidelity_drag})


def omega_sweep(make_schedule: Callable[[float], PulseSchedule], target, p: TransmonParams,
                omega_grid, drag: DragSettings = DragSettings(), threads: int = 1,
                progress: Optional[Callable[[str], None]] = None, **evolve_kwargs) -> OmegaSweep:
    """Infidelity versus peak drive ``omega_m`` without and with DRAG.

    ``make_schedule(omega_m)`` builds the gate at the given peak amplitude.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    if np.any(omega_grid <= 0):
        raise ParameterError("omega_m grid must be positive")

    def point(om):
        sched = make_schedule(om)
        off = 1.0 - gate_fidelity_open(sched, target, p, **evolve_kwargs)
        settings = resolve_drag(sched, target, p, drag)
        on = 1.0 - gate_fidelity_open(drag_correct(sched, p, settings), target, p, **evolve_kwargs)
        if progress is not None:
            progress(f"omega_m = {om / MHZ:.2f} MHz x 2pi: 1-F {off:.3e} (no DRAG), {on:.3e} (DRAG)")
        return off, on

    res = parallel_map(point, list(omega_grid), threads)
    return OmegaSweep(omega_grid, np.array([r[0] for r in res]), np.array([r[1] for r in res]))
