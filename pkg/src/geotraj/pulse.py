"""Driven two-level Hamiltonian, piecewise pulse schedules and conventional gates.

The rotating-frame Hamiltonian is

    H(t) = 1/2 [[-Delta(t),            Omega(t) e^{-i phi(t)}],
                [Omega(t) e^{i phi(t)}, Delta(t)             ]]

A schedule is a list of segments, each carrying an envelope shape, a pulse
area, a phase law ``phi = base + slope * (area accumulated in the segment)``
and a detuning law ``Delta = detune_factor * Omega``.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from . import numkit
from .exceptions import DomainError, ParameterError, UnknownGateError
from .noise import NO_ERROR, ErrorModel

ENVELOPES = ("sine", "square")


@dataclass(frozen=True)
class PulseSegment:
    duration: float
    area: float
    envelope: str = "sine"
    phase_base: float = 0.0
    phase_slope: float = 0.0
    detune_factor: float = 0.0
    # DRAG coefficient k (time units): the complex drive eps = Omega e^{-i phi}
    # becomes eps - i k d(eps)/dt, so a constant-phase segment gets the
    # quadrature -k dOmega/dt
    drag: float = 0.0
    kind: str = "resonant"

    def __post_init__(self):
        if self.envelope not in ENVELOPES:
            raise ParameterError(f"unknown envelope {self.envelope!r}")
        if self.area < 0 or self.duration < 0:
            raise ParameterError("area and duration must be non-negative")
        if (self.area == 0) != (self.duration == 0):
            raise ParameterError("duration must be zero exactly when the area is zero")

    @property
    def degenerate(self) -> bool:
        return self.duration == 0

    @property
    def peak(self) -> float:
        if self.degenerate:
            return 0.0
        if self.envelope == "sine":
            return np.pi * self.area / (2.0 * self.duration)
        return self.area / self.duration

    def omega(self, t):
        t = np.asarray(t, dtype=float)
        if self.envelope == "sine":
            return self.peak * np.sin(np.pi * t / self.duration)
        return np.full_like(t, self.peak)

    def omega_dot(self, t):
        t = np.asarray(t, dtype=float)
        if self.envelope == "sine":
            return self.peak * np.pi / self.duration * np.cos(np.pi * t / self.duration)
        return np.zeros_like(t)

    @property
    def rotation_budget(self) -> float:
        """Upper bound on the Bloch-sphere rotation angle swept by the segment.

        Counts the drive, the detuning tied to it and the phase drift; used to
        size integrator steps so windings near the equator stay resolved.
        """
        return self.area * (np.hypot(1.0, self.detune_factor) + abs(self.phase_slope))

    def accumulated_area(self, t):
        t = np.asarray(t, dtype=float)
        if self.envelope == "sine":
            return self.peak * self.duration / np.pi * (1.0 - np.cos(np.pi * t / self.duration))
        return self.peak * t

    def phase(self, t):
        return self.phase_base + self.phase_slope * self.accumulated_area(t)

    def controls(self, t, error: ErrorModel = NO_ERROR, omega_m: float = 1.0):
        """Physical (Omega, phi, Delta, correction) at segment-local times ``t``.

        The complex drive is (Omega + correction) e^{-i phi}; the correction is
        the DRAG term and vanishes when ``drag`` is 0. Amplitude errors scale
        the whole waveform before the detuning law is applied; the phase
        program follows the nominal accumulated area.
        """
        gain = 1.0 + error.amplitude
        nominal = self.omega(t)
        om = gain * nominal
        phi = self.phase(t)
        delta = self.detune_factor * om + (error.detuning + error.detuning_2q) * omega_m
        if self.drag:
            phi_dot = self.phase_slope * nominal
            corr = -self.drag * gain * (phi_dot * nominal + 1j * self.omega_dot(t))
        else:
            corr = np.zeros(np.shape(om), dtype=complex)
        return om, phi, delta, corr


def segment_from_area(area: float, omega_max: float, envelope: str = "sine", **laws) -> PulseSegment:
    """Segment of the given area at fixed peak amplitude ``omega_max``."""
    if area < 0:
        raise ParameterError("area must be non-negative")
    if omega_max <= 0:
        raise ParameterError("omega_max must be positive")
    if area == 0:
        return PulseSegment(0.0, 0.0, envelope, **laws)
    duration = (np.pi / 2 if envelope == "sine" else 1.0) * area / omega_max
    return PulseSegment(float(duration), float(area), envelope, **laws)


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple = ()
    omega_m: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def total_time(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def total_area(self) -> float:
        return float(sum(s.area for s in self.segments))

    @property
    def boundaries(self) -> np.ndarray:
        """Segment start times followed by the end time, length len(segments)+1."""
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])

    def then(self, other: "PulseSchedule") -> "PulseSchedule":
        return PulseSchedule(self.segments + other.segments, self.omega_m)

    def map_segments(self, fn: Callable[[PulseSegment], PulseSegment]) -> "PulseSchedule":
        return PulseSchedule(tuple(fn(s) for s in self.segments), self.omega_m)

    def locate(self, t: float):
        """(segment index, local time) of absolute time ``t``."""
        tau = self.total_time
        if t < -1e-12 or t > tau + 1e-12 or not self.segments:
            raise DomainError(f"t={t} outside [0, {tau}]")
        b = self.boundaries
        live = [i for i, s in enumerate(self.segments) if not s.degenerate]
        if not live:
            return 0, 0.0
        for i in live:
            if t < b[i + 1] or i == live[-1]:
                return i, min(max(t - b[i], 0.0), self.segments[i].duration)
        raise AssertionError("unreachable")

    def to_dict(self) -> dict:
        return {"omega_m": self.omega_m, "segments": [asdict(s) for s in self.segments]}

    @classmethod
    def from_dict(cls, d: dict) -> "PulseSchedule":
        return cls(tuple(PulseSegment(**s) for s in d["segments"]), d["omega_m"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PulseSchedule":
        return cls.from_dict(json.loads(text))


def two_level_hamiltonians(seg: PulseSegment, t, error: ErrorModel = NO_ERROR,
                           omega_m: float = 1.0) -> np.ndarray:
    """Stack of 2x2 Hamiltonians of one segment at local times ``t``."""
    om, phi, delta, corr = seg.controls(t, error, omega_m)
    drive = 0.5 * (om + corr) * np.exp(-1j * phi)
    H = np.zeros(np.shape(t) + (2, 2), dtype=complex)
    H[..., 0, 0] = -0.5 * delta
    H[..., 1, 1] = 0.5 * delta
    H[..., 0, 1] = drive
    H[..., 1, 0] = np.conj(drive)
    return H


def sample_hamiltonian(schedule: PulseSchedule, t: float, error: ErrorModel = NO_ERROR) -> np.ndarray:
    i, tl = schedule.locate(t)
    seg = schedule.segments[i]
    if seg.degenerate:
        # only reachable for an all-degenerate schedule at t = 0: no drive
        delta = (error.detuning + error.detuning_2q) * schedule.omega_m
        return 0.5 * delta * np.diag([-1.0, 1.0]).astype(complex)
    return two_level_hamiltonians(seg, np.array([tl]), error, schedule.omega_m)[0]


def segment_steps(seg: PulseSegment, steps: int, steps_per_rad: Optional[float] = None) -> int:
    """``steps`` per segment, raised to ``steps_per_rad`` per radian of rotation budget."""
    if steps_per_rad is None:
        return steps
    return max(steps, int(np.ceil(steps_per_rad * seg.rotation_budget)))


def schedule_propagator(schedule: PulseSchedule, builder: Callable, dim: int,
                        steps: int = 2000, method: str = "magnus4",
                        steps_per_rad: Optional[float] = None) -> np.ndarray:
    """Propagator of a schedule for a per-segment Hamiltonian ``builder(seg, t_local)``.

    Segments are integrated separately since controls jump at boundaries.
    """
    U = np.eye(dim, dtype=complex)
    for seg in schedule.segments:
        if seg.degenerate:
            continue
        grid = numkit.TimeGrid(0.0, seg.duration, segment_steps(seg, steps, steps_per_rad))
        U = numkit.propagate(lambda t, s=seg: builder(s, t), grid, method) @ U
    return U


def propagate_schedule(schedule: PulseSchedule, error: ErrorModel = NO_ERROR,
                       steps: int = 2000, method: str = "magnus4",
                       steps_per_rad: Optional[float] = None) -> np.ndarray:
    """2x2 propagator of a schedule under the two-level Hamiltonian."""
    def builder(seg, t):
        return two_level_hamiltonians(seg, t, error, schedule.omega_m)
    return schedule_propagator(schedule, builder, 2, steps, method, steps_per_rad)


def state_trajectory(schedule: PulseSchedule, psi0, error: ErrorModel = NO_ERROR,
                     steps: int = 2000, method: str = "magnus4"):
    """States along the schedule at every integrator node.

    Returns ``(times, states, boundary_index)`` where ``boundary_index[k]`` is
    the node index at which segment ``k`` starts (degenerate segments share
    the index of their neighbour).
    """
    psi = np.asarray(psi0, dtype=complex)
    times, states, starts = [0.0], [psi], []
    t_off = 0.0
    for seg in schedule.segments:
        starts.append(len(states) - 1)
        if seg.degenerate:
            continue
        H, h = numkit.step_hamiltonians(
            lambda t, s=seg: two_level_hamiltonians(s, t, error, schedule.omega_m),
            0.0, seg.duration, steps, method)
        Us = numkit.expm_hermitian(H, h)
        for k in range(steps):
            psi = Us[k] @ psi
            states.append(psi)
        times.extend(t_off + h * np.arange(1, steps + 1))
        t_off += seg.duration
    starts.append(len(states) - 1)
    return np.array(times), np.array(states), starts


def export_schedule_csv(schedule: PulseSchedule, path, samples_per_segment: int = 2000,
                        error: ErrorModel = NO_ERROR) -> None:
    """Write ``t,omega,phi,delta`` rows on the integrator grid of each segment."""
    b = schedule.boundaries
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "omega", "phi", "delta"])
        for k, seg in enumerate(schedule.segments):
            if seg.degenerate:
                continue
            tl = np.linspace(0.0, seg.duration, samples_per_segment + 1)
            om, phi, delta, _ = seg.controls(tl, error, schedule.omega_m)
            for row in zip(b[k] + tl, om, phi, delta):
                w.writerow([repr(float(v)) for v in row])


# ---------------------------------------------------------------------------
# Conventional (resonant, constant-phase) gates


@dataclass(frozen=True)
class ConventionalGateSpec:
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if self.theta < 0:
            raise ParameterError("rotation angle must be non-negative")


def conventional_unitary(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s * np.exp(-1j * phi)],
                     [-1j * s * np.exp(1j * phi), c]], dtype=complex)


def synth_conventional(spec: ConventionalGateSpec, omega_max: float = 1.0,
                       envelope: str = "sine") -> PulseSchedule:
    """Single resonant segment of area theta and constant phase phi."""
    if spec.theta == 0:
        return PulseSchedule((), omega_max)
    seg = segment_from_area(spec.theta, omega_max, envelope, phase_base=spec.phi, kind="resonant")
    return PulseSchedule((seg,), omega_max)


# rotation specs in time order (first applied first)
_COMPOSITES = {
    "I": [(2 * np.pi, 0.0)],
    "H": [(np.pi, 0.0), (np.pi / 2, -np.pi / 2)],
    "Xpi": [(np.pi, 0.0)],
    "Ypi": [(np.pi, np.pi / 2)],
    "Xpi2": [(np.pi / 2, 0.0)],
    "Ypi2": [(np.pi / 2, np.pi / 2)],
    "mXpi2": [(np.pi / 2, np.pi)],
    "mYpi2": [(np.pi / 2, -np.pi / 2)],
}

SINGLE_QUBIT_GATES = tuple(_COMPOSITES)


def conventional_composite(name: str) -> list:
    try:
        return [ConventionalGateSpec(t, p) for t, p in _COMPOSITES[name]]
    except KeyError:
        raise UnknownGateError(name) from None


def synth_conventional_gate(name: str, omega_max: float = 1.0, envelope: str = "sine") -> PulseSchedule:
    sched = PulseSchedule((), omega_max)
    for spec in conventional_composite(name):
        sched = sched.then(synth_conventional(spec, omega_max, envelope))
    return sched


def target_unitary(name: str) -> np.ndarray:
    """Textbook matrix of a named gate.

    I and H are the plain identity and Hadamard; rotations are exp(-i theta n.sigma / 2).
    Constructions may differ from these by a global phase (conventional I is -1).
    """
    if name == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    if name == "I":
        return np.eye(2, dtype=complex)
    U = np.eye(2, dtype=complex)
    for spec in conventional_composite(name):
        U = conventional_unitary(spec.theta, spec.phi) @ U
    return U
