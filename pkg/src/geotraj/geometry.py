"""Bloch-sphere trajectories, geometric phases and trajectory-to-pulse synthesis.

A cyclic trajectory starting at (chi0, xi0) built from longitude (constant xi)
and latitude (constant chi) arcs yields the gate

    U(chi0, xi0, gamma) = cos(gamma) I + i sin(gamma) n.sigma,
    n = (sin chi0 cos xi0, sin chi0 sin xi0, cos chi0),

when the dynamical phase vanishes. Latitude arcs keep it zero by tying the
detuning to the drive, Delta = -/+ tan(chi) Omega, while the drive phase
drifts in step with the accumulated area.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.integrate

from . import numkit
from .exceptions import (
    DegenerateLoopError,
    DomainError,
    ParameterError,
    SingularDriftError,
    TopologyError,
    UnknownGateError,
)
from .pulse import PulseSchedule, segment_from_area, two_level_hamiltonians

_EPS = 1e-12
LONGITUDE = "longitude"
LATITUDE = "latitude"


def wrap_angle(x):
    """Map angles to (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    y = np.where(np.isclose(y, -np.pi, atol=1e-15), np.pi, y)
    return float(y) if np.ndim(y) == 0 else y


@dataclass(frozen=True)
class GateParams:
    chi0: float
    xi0: float
    gamma_g: float

    def __post_init__(self):
        if not -_EPS <= self.chi0 <= np.pi + _EPS:
            raise ParameterError(f"chi0={self.chi0} outside [0, pi]")

    @property
    def axis(self) -> np.ndarray:
        c = self.chi0
        return np.array([np.sin(c) * np.cos(self.xi0), np.sin(c) * np.sin(self.xi0), np.cos(c)])

    @property
    def initial_state(self) -> np.ndarray:
        return np.array([np.cos(self.chi0 / 2), np.sin(self.chi0 / 2) * np.exp(1j * self.xi0)])


def gate_unitary(p: GateParams) -> np.ndarray:
    cg, sg = np.cos(p.gamma_g), np.sin(p.gamma_g)
    cc, sc = np.cos(p.chi0), np.sin(p.chi0)
    return np.array([
        [cg + 1j * sg * cc, 1j * sg * sc * np.exp(-1j * p.xi0)],
        [1j * sg * sc * np.exp(1j * p.xi0), cg - 1j * sg * cc],
    ], dtype=complex)


def gate_params_for(axis: str, angle: float, branch: int = 0) -> GateParams:
    """Rotation by ``angle`` about X or Y; ``branch=1`` adds pi to gamma_g."""
    if axis not in ("X", "Y"):
        raise ParameterError(f"axis must be 'X' or 'Y', got {axis!r}")
    if branch not in (0, 1):
        raise ParameterError("branch must be 0 or 1")
    if angle >= 0:
        xi0 = np.pi if axis == "X" else -np.pi / 2
    else:
        xi0 = 0.0 if axis == "X" else np.pi / 2
    return GateParams(np.pi / 2, xi0, abs(angle) / 2 + branch * np.pi)


def named_gate_params(name: str, branch: int = 0) -> GateParams:
    extra = branch * np.pi
    table = {
        "I": lambda: gate_params_for("X", 2 * np.pi, branch),
        "H": lambda: GateParams(np.pi / 4, 0.0, np.pi / 2 + extra),
        "Xpi": lambda: gate_params_for("X", np.pi, branch),
        "Ypi": lambda: gate_params_for("Y", np.pi, branch),
        "Xpi2": lambda: gate_params_for("X", np.pi / 2, branch),
        "Ypi2": lambda: gate_params_for("Y", np.pi / 2, branch),
        "mXpi2": lambda: gate_params_for("X", -np.pi / 2, branch),
        "mYpi2": lambda: gate_params_for("Y", -np.pi / 2, branch),
        # on a subspace of a larger register the branch sign is not a global
        # phase, so the alternates flip the axis (iSWAP) or the loop sense (CZ)
        "iSWAP": lambda: GateParams(np.pi / 2, branch * np.pi, np.pi / 2 + extra),
        "CZ": lambda: GateParams(np.pi / 2, 0.0, np.pi - 2 * extra),
    }
    try:
        return table[name]()
    except KeyError:
        raise UnknownGateError(name) from None


def bloch_coordinates(state) -> tuple:
    """(chi, xi) of a normalized two-component state; xi is 0 at the poles."""
    c = np.asarray(state, dtype=complex)
    norm = np.linalg.norm(c)
    if norm < _EPS:
        raise DomainError("zero vector has no Bloch coordinates")
    c = c / norm
    a0, a1 = abs(c[0]), abs(c[1])
    chi = 2 * np.arctan2(a1, a0)
    if a0 < 1e-12 or a1 < 1e-12:
        return float(chi), 0.0
    return float(chi), wrap_angle(np.angle(c[1]) - np.angle(c[0]))


# ---------------------------------------------------------------------------
# Trajectories


@dataclass(frozen=True)
class TrajectorySpec:
    """Closed Bloch-sphere loop of longitude/latitude arcs.

    ``kinds[k]`` describes the arc from ``waypoints[k]`` to ``waypoints[k+1]``.
    The loop closes when the last waypoint has the first one's chi and a xi
    congruent mod 2 pi.
    """

    waypoints: tuple
    kinds: tuple

    def __post_init__(self):
        wps = tuple((float(c), float(x)) for c, x in self.waypoints)
        object.__setattr__(self, "waypoints", wps)
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if len(self.kinds) != len(wps) - 1:
            raise TopologyError("need exactly one kind per arc")
        for (ca, xa), (cb, xb), kind in zip(wps[:-1], wps[1:], self.kinds):
            if not (-_EPS <= ca <= np.pi + _EPS):
                raise ParameterError(f"chi={ca} outside [0, pi]")
            if kind == LONGITUDE and abs(xb - xa) > 1e-12:
                raise TopologyError("longitude arc must keep xi constant")
            if kind == LATITUDE and abs(cb - ca) > 1e-12:
                raise TopologyError("latitude arc must keep chi constant")
            if kind not in (LONGITUDE, LATITUDE):
                raise TopologyError(f"unknown arc kind {kind!r}")

    @property
    def closed(self) -> bool:
        (c0, x0), (c1, x1) = self.waypoints[0], self.waypoints[-1]
        return abs(c1 - c0) < 1e-12 and abs(wrap_angle(x1 - x0)) < 1e-12

    @property
    def arcs(self):
        return list(zip(self.waypoints[:-1], self.waypoints[1:], self.kinds))


def geometric_phase(traj: TrajectorySpec, reduce: bool = False) -> float:
    """-sum over latitude arcs of (xi_end - xi_start)(1 - cos chi)/2."""
    if not traj.closed:
        raise TopologyError("geometric phase needs a closed trajectory")
    g = 0.0
    for (ca, xa), (_, xb), kind in traj.arcs:
        if kind == LATITUDE:
            g -= (xb - xa) * (1 - np.cos(ca)) / 2
    return wrap_angle(g) if reduce else g


def five_segment_trajectory(p: GateParams, chi1: float, chi3: float,
                            reduce_phase: bool = False) -> TrajectorySpec:
    """Loop P0 -> (chi1, xi0) -> (chi1, xi2) -> (chi3, xi2) -> (chi3, xi0) -> P0.

    xi2 - xi0 = 2 gamma / (cos chi1 - cos chi3). With ``reduce_phase`` gamma is
    first reduced to (-pi, pi], which leaves the gate unchanged and gives the
    shortest latitude arcs.
    """
    chi0 = p.chi0
    if not (-_EPS <= chi1 <= chi0 + _EPS and chi0 - _EPS <= chi3 <= np.pi + _EPS):
        raise ParameterError(f"need 0 <= chi1 <= chi0 <= chi3 <= pi, got ({chi1}, {chi0}, {chi3})")
    chi1 = min(max(chi1, 0.0), chi0)
    chi3 = min(max(chi3, chi0), np.pi)
    dc = np.cos(chi1) - np.cos(chi3)
    if abs(dc) < 1e-12:
        raise DegenerateLoopError("cos chi1 == cos chi3 encloses no solid angle")
    gamma = wrap_angle(p.gamma_g) if reduce_phase else p.gamma_g
    xi0 = p.xi0
    xi2 = xi0 + 2 * gamma / dc
    wps = [(chi0, xi0), (chi1, xi0), (chi1, xi2), (chi3, xi2), (chi3, xi0), (chi0, xi0)]
    kinds = [LONGITUDE, LATITUDE, LONGITUDE, LATITUDE, LONGITUDE]
    return TrajectorySpec(tuple(wps), tuple(kinds))


def three_segment_trajectory(p: GateParams) -> TrajectorySpec:
    """Orange-slice loop through both poles (the uncorrectable 3-arc case)."""
    return five_segment_trajectory(p, 0.0, np.pi)


def four_segment_trajectory(p: GateParams, chi2: float) -> TrajectorySpec:
    """Loop via the north pole with one free latitude at ``chi2``."""
    return five_segment_trajectory(p, 0.0, chi2)


def single_latitude_trajectory(chi0: float, xi0: float, span: float = 2 * np.pi) -> TrajectorySpec:
    return TrajectorySpec(((chi0, xi0), (chi0, xi0 + span)), (LATITUDE,))


def synth_n_segment(traj: TrajectorySpec, omega_max: float = 1.0, envelope: str = "sine") -> PulseSchedule:
    """Pulse schedule tracing a closed longitude/latitude loop at zero dynamical phase.

    Longitude arcs use a constant phase xi -/+ pi/2 (whichever gives positive
    area). Latitude arcs pick between the two phase conventions so that the
    area |dxi sin chi cos chi| is positive; their phase drifts with slope
    +/- 1/(sin chi cos chi) per unit area and the detuning is -/+ tan(chi) Omega.
    Arcs at the poles or of zero length become zero-duration placeholders.
    """
    if not traj.closed:
        raise TopologyError("trajectory must be closed")
    segs = []
    for (ca, xa), (cb, xb), kind in traj.arcs:
        if kind == LONGITUDE:
            dchi = cb - ca
            phase = xa - np.pi / 2 if dchi < 0 else xa + np.pi / 2
            segs.append(segment_from_area(abs(dchi), omega_max, envelope, phase_base=phase,
                                          kind=LONGITUDE))
            continue
        dxi = xb - xa
        s, c = np.sin(ca), np.cos(ca)
        if dxi == 0 or abs(s) < 1e-12:
            segs.append(segment_from_area(0.0, omega_max, envelope, phase_base=xa, kind=LATITUDE))
            continue
        if abs(c) < 1e-12:
            raise SingularDriftError("latitude arc on the equator needs an unbounded phase drift")
        sc = s * c
        sign = 1.0 if dxi * sc > 0 else -1.0
        segs.append(segment_from_area(
            abs(dxi * sc), omega_max, envelope,
            phase_base=xa + (np.pi if sign > 0 else 0.0),
            phase_slope=sign / sc,
            detune_factor=-sign * s / c,
            kind=LATITUDE,
        ))
    return PulseSchedule(tuple(segs), omega_max)


def synth_five_segment(p: GateParams, chi1: float, chi3: float, omega_max: float = 1.0,
                       envelope: str = "sine", reduce_phase: bool = False):
    """Schedule and trajectory of the corrected five-arc loop for gate ``p``."""
    traj = five_segment_trajectory(p, chi1, chi3, reduce_phase)
    return synth_n_segment(traj, omega_max, envelope), traj


def export_trajectory_csv(traj: TrajectorySpec, schedule: PulseSchedule, path) -> None:
    """Rows ``segment,kind,chi,xi_start,xi_end,area,detune_factor``; chi is the arc start."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["segment", "kind", "chi", "xi_start", "xi_end", "area", "detune_factor"])
        for k, (((ca, xa), (_, xb), kind), seg) in enumerate(zip(traj.arcs, schedule.segments)):
            w.writerow([k, kind, repr(ca), repr(xa), repr(xb), repr(seg.area), repr(seg.detune_factor)])


# ---------------------------------------------------------------------------
# Phase diagnostics


@dataclass(frozen=True)
class PhaseAccumulation:
    gamma: float
    gamma_d: float
    gamma_g: float


def _segment_states(schedule: PulseSchedule, psi0, steps: int):
    """Yield (local times, states, Hamiltonians) per live segment."""
    if steps % 2:
        steps += 1
    psi = np.asarray(psi0, dtype=complex)
    for seg in schedule.segments:
        if seg.degenerate:
            continue
        sampler = lambda t, s=seg: two_level_hamiltonians(s, t, omega_m=schedule.omega_m)
        H, h = numkit.step_hamiltonians(sampler, 0.0, seg.duration, steps)
        Us = numkit.expm_hermitian(H, h)
        states = np.empty((steps + 1, 2), dtype=complex)
        states[0] = psi
        for k in range(steps):
            states[k + 1] = Us[k] @ states[k]
        tl = np.linspace(0.0, seg.duration, steps + 1)
        yield tl, states, sampler(tl)
        psi = states[-1]


def dynamical_phase_check(schedule: PulseSchedule, p: GateParams, steps: int = 2000) -> float:
    """gamma_d = -int <psi1|H|psi1> dt along the propagated initial state of ``p``."""
    total = 0.0
    for tl, states, H in _segment_states(schedule, p.initial_state, steps):
        energy = np.einsum("ni,nij,nj->n", states.conj(), H, states).real
        total -= scipy.integrate.simpson(energy, x=tl)
    return float(total)


def overall_phase(schedule: PulseSchedule, p: GateParams, steps: int = 2000) -> float:
    """arg <psi1(0)|U|psi1(0)>, the phase a cyclic evolution imprints on psi1."""
    from .pulse import propagate_schedule

    psi = p.initial_state
    return float(np.angle(psi.conj() @ propagate_schedule(schedule, steps=steps) @ psi))


def phase_accumulation(schedule: PulseSchedule, traj: TrajectorySpec, p: GateParams,
                       steps: int = 2000) -> PhaseAccumulation:
    return PhaseAccumulation(
        overall_phase(schedule, p, steps),
        dynamical_phase_check(schedule, p, steps),
        geometric_phase(traj),
    )


def boundary_coordinates(schedule: PulseSchedule, p: GateParams, steps: int = 2000) -> list:
    """Bloch coordinates of the propagated initial state at every segment boundary."""
    out = [bloch_coordinates(p.initial_state)]
    live = iter(_segment_states(schedule, p.initial_state, steps))
    for seg in schedule.segments:
        if seg.degenerate:
            out.append(out[-1])
            continue
        _, states, _ = next(live)
        out.append(bloch_coordinates(states[-1]))
    return out
