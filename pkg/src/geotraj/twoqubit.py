"""Two transmons coupled through a parametrically modulated frequency.

Qubit 1's frequency is modulated as omega_1 + eps sin(nu t + phi). In the
interaction picture the couplings of the basis {|01>, |10>, |02>, |11>, |20>}
pick up Bessel-weighted sidebands

    S(t) = g sum_m i^m J_m(beta) e^{i m (nu t + phi)},  beta = eps / nu,

on |01><10| (e^{i D1 t}), sqrt2 |02><11| (e^{i (D1 - a2) t}) and
sqrt2 |11><20| (e^{i (D1 + a1) t}), with D1 = omega_2 - omega_1. Tuning
nu near D1 (or D1 - a2) makes the m = -1 sideband resonant inside the single
(or double) excitation subspace, which then behaves as a driven two-level
system with coupling g' = 2 g J_1(beta) (or 2 sqrt2 g J_1(beta)).

Effective-model detuning laws Delta'(t) are realized through the modulation
phase: with Theta(t) = int Delta', the interaction-picture propagator equals
W(T) U_eff, W = exp(-i Theta sigma_z / 2) on the active pair. For iSWAP that
factor is a local Z rotation; for CZ it is an extra controlled phase Theta/2
on |11>, which the full-model target carries explicitly.

Units: rad/ns and ns.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.optimize

from . import numkit
from .exceptions import ConvergenceError, DomainError, ParameterError, UnknownGateError
from .fidelity import SensitivityCurve, default_grid, gate_fidelity, parallel_map, write_columns
from .geometry import GateParams, gate_unitary, named_gate_params, synth_five_segment
from .noise import NO_ERROR, ErrorModel, error_of_kind
from .pulse import (
    PulseSchedule,
    schedule_propagator,
    segment_from_area,
    two_level_hamiltonians,
)
from .transmon import MHZ, US, TransmonParams, dissipator, evolve_split

SQRT2 = np.sqrt(2.0)
J1_MAX_ARG = 1.8411837813406593  # first maximum of J_1
J1_MAX = 0.5818652242815964

BASIS5 = ("01", "10", "02", "11", "20")
BASIS6 = ("00",) + BASIS5
COMPUTATIONAL = ("00", "01", "10", "11")
SINGLE = "single_excitation"
DOUBLE = "two_excitation"
TWO_QUBIT_GATES = ("iSWAP", "CZ")


@dataclass(frozen=True)
class TwoQubitParams:
    g: float = 8 * MHZ
    delta1: float = 500 * MHZ
    alpha1: float = 320 * MHZ
    alpha2: float = 280 * MHZ
    m_cutoff: int = 7

    def __post_init__(self):
        if self.g <= 0:
            raise ParameterError("coupling g must be positive")
        if self.m_cutoff < 3:
            raise ParameterError("m_cutoff must be >= 3")
        if self.m_cutoff > 20:
            raise ParameterError("m_cutoff above 20 exceeds the Bessel routine's range")


@dataclass(frozen=True)
class ModulationParams:
    nu: float
    beta: float
    phi: float = 0.0

    def __post_init__(self):
        if self.nu <= 0:
            raise ParameterError("modulation frequency must be positive")
        if self.beta < 0:
            raise ParameterError("beta must be non-negative")

    @property
    def eps(self) -> float:
        return self.beta * self.nu


@dataclass(frozen=True)
class SubspaceSelect:
    """Which excitation manifold the resonant sideband drives, and its small detuning."""

    kind: str = SINGLE
    delta_s: float = 0.0

    def __post_init__(self):
        if self.kind not in (SINGLE, DOUBLE):
            raise ParameterError(f"unknown subspace {self.kind!r}")

    @property
    def factor(self) -> float:
        return 1.0 if self.kind == SINGLE else SQRT2

    @property
    def pair(self) -> tuple:
        """(effective |0>, effective |1>) as basis labels."""
        return ("01", "10") if self.kind == SINGLE else ("02", "11")

    def resonant_nu(self, p: TwoQubitParams) -> float:
        base = p.delta1 if self.kind == SINGLE else p.delta1 - p.alpha2
        return base + self.delta_s

    def g_prime(self, p: TwoQubitParams, beta: float) -> float:
        return float(2 * self.factor * p.g * numkit.bessel_j(1, beta))

    def beta_for(self, p: TwoQubitParams, g_prime: float) -> float:
        """Invert g' = 2 f g J_1(beta) on the rising branch beta in (0, 1.84)."""
        top = 2 * self.factor * p.g * J1_MAX
        if not 0 < g_prime <= top * (1 + 1e-12):
            raise ParameterError(f"g' = {g_prime:.4g} outside (0, {top:.4g}] reachable by one sideband")
        if g_prime >= top:
            return J1_MAX_ARG
        f = lambda b: 2 * self.factor * p.g * numkit.bessel_j(1, b) - g_prime
        return float(scipy.optimize.brentq(f, 0.0, J1_MAX_ARG, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def subspace_for(gate: str) -> SubspaceSelect:
    if gate == "iSWAP":
        return SubspaceSelect(SINGLE)
    if gate == "CZ":
        return SubspaceSelect(DOUBLE)
    raise UnknownGateError(gate)


# ---------------------------------------------------------------------------
# Full interaction Hamiltonian


def sideband_sum(p: TwoQubitParams, beta: float, phase, orders=None):
    """g sum_m i^m J_m(beta) e^{i m phase} for every entry of ``phase``; all |m| <= cutoff by default."""
    phase = np.asarray(phase, dtype=float)
    if orders is None:
        orders = range(-p.m_cutoff, p.m_cutoff + 1)
    total = np.zeros(phase.shape, dtype=complex)
    for m in orders:
        total += (1j ** m) * numkit.bessel_j(m, beta) * np.exp(1j * m * phase)
    return p.g * total


def _couplings(p: TwoQubitParams, sidebands: str, active: Optional[SubspaceSelect]):
    """(row, col, factor, frequency offset, sideband orders) of each coupling family kept."""
    families = [
        (0, 1, 1.0, p.delta1, SINGLE),
        (2, 3, SQRT2, p.delta1 - p.alpha2, DOUBLE),
        (3, 4, SQRT2, p.delta1 + p.alpha1, None),
    ]
    if sidebands == "all":
        orders = tuple(range(-p.m_cutoff, p.m_cutoff + 1))
        return [(r, c, f, w, orders) for r, c, f, w, _ in families]
    if sidebands == "resonant":
        if active is None:
            raise ParameterError("resonant-only sidebands need the active subspace")
        return [(r, c, f, w, (-1,)) for r, c, f, w, k in families if k == active.kind]
    raise ValueError(f"unknown sideband selection {sidebands!r}")


def build_interaction_hamiltonian(p: TwoQubitParams, m: ModulationParams, t, sidebands: str = "all",
                                  zz: float = 0.0, phase=None,
                                  active: Optional[SubspaceSelect] = None) -> np.ndarray:
    """5x5 Hamiltonian(s) on (|01>, |10>, |02>, |11>, |20>) at times ``t``.

    ``phase`` overrides the modulation phase with an array matching ``t``
    (programs whose phase changes in time). ``sidebands="resonant"`` keeps
    only the m = -1 term of the ``active`` transition: the effective model.
    """
    t = np.asarray(t, dtype=float)
    phi = m.phi if phase is None else np.asarray(phase, dtype=float)
    H = np.zeros(t.shape + (5, 5), dtype=complex)
    for r, c, f, w, orders in _couplings(p, sidebands, active):
        val = f * sideband_sum(p, m.beta, m.nu * t + phi, orders) * np.exp(1j * w * t)
        H[..., r, c] = val
        H[..., c, r] = np.conj(val)
    H[..., 3, 3] = zz
    return H


def max_frequency(p: TwoQubitParams, m: ModulationParams, sidebands: str = "all",
                  active: Optional[SubspaceSelect] = None, weight_floor: float = 1e-10) -> float:
    """Fastest phase rotation among sideband terms with |g J_m| above ``weight_floor``."""
    best = 0.0
    for _, _, _, w, orders in _couplings(p, sidebands, active):
        for mm in orders:
            if abs(p.g * numkit.bessel_j(mm, m.beta)) >= weight_floor:
                best = max(best, abs(w + mm * m.nu))
    return best


# ---------------------------------------------------------------------------
# Effective two-level model and the modulation program


@dataclass(frozen=True)
class ModSegment:
    """Constant (nu, beta) stretch with phase phi(t) = phase0 + phase_rate (t - t_start)."""

    t_start: float
    duration: float
    beta: float
    phase0: float
    phase_rate: float
    g_prime: float
    delta_prime: float


@dataclass(frozen=True)
class ModulationProgram:
    nu: float
    subspace: SubspaceSelect
    segments: tuple
    theta: float  # accumulated frame angle int Delta' dt

    @property
    def total_time(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def frame_factor(self) -> np.ndarray:
        """W(T) = exp(-i Theta sigma_z / 2) on the active pair, identity elsewhere (6x6)."""
        W = np.eye(6, dtype=complex)
        a, b = (BASIS6.index(x) for x in self.subspace.pair)
        W[a, a] = np.exp(-0.5j * self.theta)
        W[b, b] = np.exp(0.5j * self.theta)
        return W


def effective_two_level(p: TwoQubitParams, sub: SubspaceSelect, schedule: PulseSchedule) -> ModulationProgram:
    """Compile a square-envelope effective schedule into a modulation program.

    Each segment's g' fixes beta; nu sits on the chosen resonance offset by
    Delta_s, and the modulation phase
        phi(t) = phi_eff(t) + Theta(t) - Delta_s t + pi/2
    reproduces the effective phase law phi_eff and, through the frame W, the
    detuning law Delta' = detune_factor * g'.
    """
    nu = sub.resonant_nu(p)
    if nu <= 0:
        raise ParameterError("resonance condition gives non-positive nu")
    if abs(sub.delta_s) >= nu / 10:
        raise DomainError(f"|Delta_s| = {abs(sub.delta_s):.4g} must stay below nu/10 = {nu / 10:.4g}")
    segs = []
    t = 0.0
    theta = 0.0
    for seg in schedule.segments:
        if seg.degenerate:
            continue
        if seg.envelope != "square":
            raise ParameterError("two-qubit programs need constant g' per segment (square envelopes)")
        gp = seg.peak
        beta = sub.beta_for(p, gp)
        dprime = seg.detune_factor * gp
        phase0 = seg.phase_base + theta - sub.delta_s * t + np.pi / 2
        rate = seg.phase_slope * gp + dprime - sub.delta_s
        segs.append(ModSegment(t, seg.duration, beta, phase0, rate, gp, dprime))
        t += seg.duration
        theta += dprime * seg.duration
    return ModulationProgram(nu, sub, tuple(segs), theta)


def embed_effective(U2: np.ndarray, sub: SubspaceSelect, phase11: complex = 1.0) -> np.ndarray:
    """Computational-subspace (|00>, |01>, |10>, |11>) operator of an effective 2x2 propagator.

    For the double-excitation pair only the |11> -> |11> amplitude stays in
    the computational subspace. ``phase11`` multiplies |11> for the single
    pair (ZZ phase picked up outside the active subspace).
    """
    U4 = np.eye(4, dtype=complex)
    if sub.kind == SINGLE:
        U4[1:3, 1:3] = U2
        U4[3, 3] = phase11
    else:
        U4[3, 3] = U2[1, 1]
    return U4


def effective_propagator(schedule: PulseSchedule, sub: SubspaceSelect, error: ErrorModel = NO_ERROR,
                         steps: int = 16, steps_per_rad: Optional[float] = 20.0) -> np.ndarray:
    """4x4 computational block of the effective model, ZZ included as a |11> shift."""
    zz = error.zz

    def builder(seg, t):
        H = two_level_hamiltonians(seg, t, error, schedule.omega_m)
        if zz and sub.kind == DOUBLE:
            H[..., 1, 1] += zz
        return H

    U2 = schedule_propagator(schedule, builder, 2, steps, "magnus4", steps_per_rad)
    return embed_effective(U2, sub, np.exp(-1j * zz * schedule.total_time))


def effective_target(p_gate: GateParams, sub: SubspaceSelect) -> np.ndarray:
    return embed_effective(gate_unitary(p_gate), sub)


def conventional_two_qubit(gate: str, g_prime: float = 1.0) -> PulseSchedule:
    """Single resonant square pulse in the gate's subspace.

    iSWAP: area pi at phase pi, giving i sigma_x on {|01>, |10>}.
    CZ: area 2 pi, a full cycle that returns -|11>.
    """
    if gate == "iSWAP":
        area, phase = np.pi, np.pi
    elif gate == "CZ":
        area, phase = 2 * np.pi, 0.0
    else:
        raise UnknownGateError(gate)
    seg = segment_from_area(area, g_prime, "square", phase_base=phase, kind="resonant")
    return PulseSchedule((seg,), g_prime)


def two_qubit_gate_params(gate: str, branch: int = 0) -> GateParams:
    if gate not in TWO_QUBIT_GATES:
        raise UnknownGateError(gate)
    return named_gate_params(gate, branch)


def synth_effective(gate: str, chi1: float, chi3: float, branch: int = 0, g_prime: float = 1.0):
    """Square-envelope geometric schedule, trajectory and 4x4 target of a two-qubit gate."""
    pg = two_qubit_gate_params(gate, branch)
    sched, traj = synth_five_segment(pg, chi1, chi3, omega_max=g_prime, envelope="square")
    return sched, traj, effective_target(pg, subspace_for(gate))


def two_qubit_evaluator(gate: str, delta_probe: float = 0.1, metric: str = "probe",
                        error_kind: str = "detuning_2q"):
    """Optimizer cell-evaluator factory for the effective two-qubit model."""
    from .optimize import probe_values, reduce_metric

    sub = subspace_for(gate)

    def factory(pg: GateParams):
        target = effective_target(pg, sub)
        errors = [error_of_kind(error_kind, d) for d in probe_values(delta_probe, metric)]

        def evaluate(chi1, chi3):
            sched, _ = synth_five_segment(pg, chi1, chi3, envelope="square")
            vals = [1.0 - gate_fidelity(target, effective_propagator(sched, sub, e)) for e in errors]
            return reduce_metric(vals, metric), sched.total_area

        return evaluate

    return factory


def sensitivity_two_qubit(gate: str, chi1: float, chi3: float, grid=None, branch: int = 0,
                          error_kind: str = "detuning_2q", threads: int = 1, mode: str = "abs") -> tuple:
    """(geometric, conventional) sensitivity curves in the effective model."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    sub = subspace_for(gate)
    sched, _, target = synth_effective(gate, chi1, chi3, branch)
    conv = conventional_two_qubit(gate)

    def curve(s, name):
        vals = parallel_map(
            lambda d: 1.0 - gate_fidelity(target, effective_propagator(s, sub, error_of_kind(error_kind, d)), mode),
            list(grid), threads)
        return SensitivityCurve(name, grid, np.array(vals), error_kind)

    return curve(sched, f"{gate}_geometric"), curve(conv, f"{gate}_conventional")


def best_branch(gate: str, chi1: float, chi3: float, delta_probe: float = 0.1) -> int:
    """Gamma branch with the lower probe infidelity at (chi1, chi3)."""
    factory = two_qubit_evaluator(gate, delta_probe)
    vals = []
    for br in (0, 1):
        try:
            vals.append((factory(two_qubit_gate_params(gate, br))(chi1, chi3)[0], br))
        except ParameterError:
            continue
    if not vals:
        two_qubit_evaluator(gate, delta_probe)(two_qubit_gate_params(gate, 0))(chi1, chi3)
        raise ParameterError("no feasible branch")
    return min(vals)[1]


# ---------------------------------------------------------------------------
# Full open-system simulation


def six_level_ops() -> dict:
    """Lowering and number operators of both transmons on BASIS6."""
    idx = {s: k for k, s in enumerate(BASIS6)}
    a1 = np.zeros((6, 6), dtype=complex)
    a2 = np.zeros((6, 6), dtype=complex)
    for s in BASIS6:
        n1, n2 = int(s[0]), int(s[1])
        if n1 > 0:
            a1[idx[f"{n1 - 1}{n2}"], idx[s]] = np.sqrt(n1)
        if n2 > 0:
            a2[idx[f"{n1}{n2 - 1}"], idx[s]] = np.sqrt(n2)
    n1 = np.diag([int(s[0]) for s in BASIS6]).astype(complex)
    n2 = np.diag([int(s[1]) for s in BASIS6]).astype(complex)
    return {"a1": a1, "a2": a2, "n1": n1, "n2": n2}


def two_qubit_collapse_ops(q1: TransmonParams, q2: TransmonParams) -> list:
    ops = six_level_ops()
    out = []
    for a, n, q in ((ops["a1"], ops["n1"], q1), (ops["a2"], ops["n2"], q2)):
        if np.isfinite(q.t1):
            out.append(a / np.sqrt(q.t1))
        if np.isfinite(q.tphi):
            out.append(np.sqrt(2.0 / q.tphi) * n)
    return out


def program_step_unitaries(program: ModulationProgram, p: TwoQubitParams, sidebands: str = "all",
                           zz: float = 0.0, rad_per_step: float = 0.25, max_steps: int = 4_000_000,
                           nu: Optional[float] = None):
    """Per-step 6x6 unitaries of a modulation program and the step sizes.

    ``nu`` replaces the program's modulation frequency; the phase program is
    kept, so any offset from the compiled frequency acts as a detuning.
    """
    nu = program.nu if nu is None else float(nu)
    Us, hs = [], []
    total = 0
    for seg in program.segments:
        mp = ModulationParams(nu, seg.beta)
        w = max(max_frequency(p, mp, sidebands, program.subspace), seg.g_prime, abs(seg.phase_rate))
        n = max(16, int(np.ceil(seg.duration * w / rad_per_step)))
        total += n
        if total > max_steps:
            raise ConvergenceError(f"program needs more than {max_steps} integrator steps")

        def sampler(t, seg=seg, mp=mp):
            phase = seg.phase0 + seg.phase_rate * (t - seg.t_start)
            H5 = build_interaction_hamiltonian(p, mp, t, sidebands, zz, phase, program.subspace)
            H = np.zeros(np.shape(t) + (6, 6), dtype=complex)
            H[..., 1:, 1:] = H5
            return H

        H, h = numkit.step_hamiltonians(sampler, seg.t_start, seg.t_start + seg.duration, n, check=False)
        Us.append(numkit.expm_hermitian(H, h))
        hs.append(np.full(n, h))
    return Us, hs


@dataclass
class FullSimResult:
    fidelity: float
    leakage: float
    z_phases: tuple
    channel: np.ndarray = field(repr=False)  # E(|i><j|) for computational i, j, shape (4, 4, 6, 6)


def _overlap_form(channel: np.ndarray, target4: np.ndarray) -> tuple:
    """K[i, j] = <T_i| E(|i><j|) |T_j> on the computational block, and the population sum.

    With Z phases z applied after the target, the entanglement term is z^dag K z.
    """
    comp = [BASIS6.index(s) for s in COMPUTATIONAL]
    out = channel[:, :, comp][:, :, :, comp]  # (4, 4, 4, 4)
    K = np.einsum("ai,ijab,bj->ij", target4.conj(), out, target4)
    pops = float(sum(np.trace(out[i, i]).real for i in range(4)))
    return K, pops


def _z_vector(a: float, b: float) -> np.ndarray:
    # single-qubit Z phases on qubit 1 (a) and qubit 2 (b), applied after the gate
    return np.exp(1j * np.array([0.0, b, a, a + b]))


def _fidelity_from_form(K: np.ndarray, pops: float, z: np.ndarray) -> float:
    return float(((z.conj() @ K @ z).real + pops) / 20.0)


def simulate_full(program: ModulationProgram, target4: np.ndarray, p: TwoQubitParams,
                  decoherence: Optional[tuple] = None, sidebands: str = "all", zz: float = 0.0,
                  z_correct: bool = True, chunk_ns: float = 2.0, rad_per_step: float = 0.25,
                  nu: Optional[float] = None) -> FullSimResult:
    """Average gate fidelity of the full six-state model against ``target4``.

    ``target4`` is the computational-subspace gate in the interaction frame,
    normally W(T) applied to the effective target (see ``frame_target``).
    ``decoherence`` is a (qubit 1, qubit 2) pair of TransmonParams; None
    means closed evolution. With ``z_correct`` the fidelity is maximized over
    free single-qubit Z phases. ``nu`` is the applied modulation frequency
    (default: the one the program was compiled for).
    """
    Us, hs = program_step_unitaries(program, p, sidebands, zz, rad_per_step, nu=nu)
    comp = [BASIS6.index(s) for s in COMPUTATIONAL]
    rhos = np.zeros((16, 6, 6), dtype=complex)
    for i in range(4):
        for j in range(4):
            rhos[4 * i + j, comp[i], comp[j]] = 1.0
    ops = [] if decoherence is None else two_qubit_collapse_ops(*decoherence)
    D = dissipator(ops, 6)
    for U, h in zip(Us, hs):
        chunk = max(1, int(round(chunk_ns / h[0])))
        rhos = evolve_split(rhos, U, h[0], D, chunk)
    channel = rhos.reshape(4, 4, 6, 6)
    leak = 1.0 - np.mean([np.trace(channel[i, i][np.ix_(comp, comp)]).real for i in range(4)])
    K, pops = _overlap_form(channel, target4)
    f0 = _fidelity_from_form(K, pops, np.ones(4))
    if not z_correct:
        return FullSimResult(f0, float(leak), (0.0, 0.0), channel)
    # start from the phases of the dominant eigenvector of the Hermitian part
    v = np.linalg.eigh(0.5 * (K + K.conj().T))[1][:, -1]
    v = v * np.exp(-1j * np.angle(v[0]))
    guess = (float(np.angle(v[2])), float(np.angle(v[1])))
    res = scipy.optimize.minimize(lambda x: -_fidelity_from_form(K, pops, _z_vector(*x)), guess,
                                  method="Nelder-Mead", options={"xatol": 1e-8, "fatol": 1e-13})
    if -res.fun < f0:
        return FullSimResult(f0, float(leak), (0.0, 0.0), channel)
    return FullSimResult(float(-res.fun), float(leak), tuple(float(x) for x in res.x), channel)


def frame_target(program: ModulationProgram, effective_target4: np.ndarray) -> np.ndarray:
    """Interaction-frame gate W(T) U_eff restricted to the computational subspace."""
    comp = [BASIS6.index(s) for s in COMPUTATIONAL]
    W = program.frame_factor()[np.ix_(comp, comp)]
    return W @ effective_target4


def compile_gate(gate: str, chi1: float, chi3: float, p: TwoQubitParams, beta: float,
                 delta_s: float = 0.0, branch: int = 0):
    """(program, frame target) of a geometric two-qubit gate at modulation depth ``beta``."""
    if not 0 < beta <= J1_MAX_ARG:
        # past the first maximum of J_1 the same g' is reached at a smaller beta
        raise ParameterError(f"beta = {beta:.4g} outside (0, {J1_MAX_ARG:.4f}]")
    sub = SubspaceSelect(subspace_for(gate).kind, delta_s)
    gp = sub.g_prime(p, beta)
    sched, _, target = synth_effective(gate, chi1, chi3, branch, gp)
    prog = effective_two_level(p, sub, sched)
    return prog, frame_target(prog, target)


@dataclass
class NuBetaMap:
    nu: np.ndarray
    beta: np.ndarray
    fidelity: np.ndarray  # shape (len(nu), len(beta)); NaN where the program is invalid

    def best(self) -> tuple:
        i, j = np.unravel_index(np.nanargmax(self.fidelity), self.fidelity.shape)
        return float(self.nu[i]), float(self.beta[j]), float(self.fidelity[i, j])

    def to_csv(self, path) -> None:
        """nu is written in MHz (nu / 2 pi)."""
        nn, bb = np.meshgrid(self.nu / MHZ, self.beta, indexing="ij")
        write_columns(path, {"nu": nn.ravel(), "beta": bb.ravel(), "fidelity": self.fidelity.ravel()})


def default_decoherence(t1: float = 50 * US, tphi: float = 50 * US, p: Optional[TwoQubitParams] = None):
    p = TwoQubitParams() if p is None else p
    return (TransmonParams(3, p.alpha1, t1, tphi), TransmonParams(3, p.alpha2, t1, tphi))


def scan_nu_beta(gate: str, chi1: float, chi3: float, p: TwoQubitParams, nu_offsets, betas,
                 decoherence=None, branch: int = 0, threads: int = 1, sidebands: str = "all",
                 progress: Optional[Callable[[str], None]] = None, **sim_kwargs) -> NuBetaMap:
    """Full-model fidelity over applied modulation frequency and depth.

    The program for each beta is compiled on the nominal resonance; the
    applied nu = nu_res + offset then leaves the offset as a real detuning,
    which can cancel the sideband-induced level shifts.
    """
    nu_offsets = np.asarray(nu_offsets, dtype=float)
    betas = np.asarray(betas, dtype=float)
    nu_res = subspace_for(gate).resonant_nu(p)
    compiled = {}
    for b in betas:
        try:
            compiled[float(b)] = compile_gate(gate, chi1, chi3, p, b, 0.0, branch)
        except (ParameterError, DomainError):
            compiled[float(b)] = None
    cells = [(dn, float(b)) for dn in nu_offsets for b in betas]

    def cell(c):
        dn, b = c
        if compiled[b] is None:
            return float("nan")
        prog, target = compiled[b]
        return simulate_full(prog, target, p, decoherence, sidebands, nu=nu_res + dn, **sim_kwargs).fidelity

    out = []
    for k in range(0, len(cells), max(1, len(betas))):
        row = parallel_map(cell, cells[k:k + len(betas)], threads)
        out.extend(row)
        if progress is not None:
            arr = np.array(row, dtype=float)
            top = np.nanmax(arr) if np.isfinite(arr).any() else float("nan")
            progress(f"{gate}: nu offset {cells[k][0] / MHZ:+.2f} MHz (x 2pi), best fidelity {top:.5f}")
    fid = np.array(out, dtype=float).reshape(len(nu_offsets), len(betas))
    return NuBetaMap(nu_res + nu_offsets, betas, fid)
