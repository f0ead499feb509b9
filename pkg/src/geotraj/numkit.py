"""Dense complex linear algebra, time-ordered propagation and special functions.

Every physics module in the package funnels its matrix exponentials and
time-ordered products through here. Operators are plain ``numpy`` arrays;
batched routines take stacks of shape ``(n, d, d)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.special

from .exceptions import (
    ConvergenceError,
    DimensionError,
    DomainError,
    ModelError,
    PhaseUndefinedWarning,
)

MAX_DIM = 32
_SQRT3 = np.sqrt(3.0)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def _check_square(A: np.ndarray) -> None:
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise DimensionError(f"expected square matrix, got shape {A.shape}")
    if A.shape[-1] < 1:
        raise DimensionError("matrix dimension must be >= 1")


def mat_exp(A) -> np.ndarray:
    """Matrix exponential of a small dense matrix (scaling and squaring, Pade)."""
    A = np.asarray(A, dtype=complex)
    _check_square(A)
    if A.ndim != 2:
        raise DimensionError("mat_exp takes a single matrix; use expm_hermitian for stacks")
    if A.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {A.shape[0]} exceeds {MAX_DIM}")
    return scipy.linalg.expm(A)


def is_unitary(U, atol: float = 1e-8) -> bool:
    U = np.asarray(U)
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) < atol)


def expm_hermitian(H: np.ndarray, dt) -> np.ndarray:
    """exp(-i H dt) for a stack of Hermitian matrices ``H`` of shape (n, d, d).

    ``dt`` may be a scalar or an array broadcastable against the stack. 2x2
    inputs use the closed SU(2) form; larger ones go through ``eigh``.
    """
    H = np.asarray(H, dtype=complex)
    single = H.ndim == 2
    if single:
        H = H[None]
    dt = np.broadcast_to(np.asarray(dt, dtype=float), H.shape[:1])
    d = H.shape[-1]
    if d == 2:
        h0 = 0.5 * (H[:, 0, 0] + H[:, 1, 1]).real
        hz = 0.5 * (H[:, 0, 0] - H[:, 1, 1]).real
        hx = H[:, 1, 0].real
        hy = H[:, 1, 0].imag
        r = np.sqrt(hx * hx + hy * hy + hz * hz)
        c = np.cos(r * dt)
        # sin(r dt)/r without the r -> 0 singularity
        s = dt * np.sinc(r * dt / np.pi)
        ph = np.exp(-1j * h0 * dt)
        out = np.empty_like(H)
        out[:, 0, 0] = ph * (c - 1j * s * hz)
        out[:, 1, 1] = ph * (c + 1j * s * hz)
        out[:, 0, 1] = ph * (-1j * s * (hx - 1j * hy))
        out[:, 1, 0] = ph * (-1j * s * (hx + 1j * hy))
    else:
        w, v = np.linalg.eigh(H)
        phases = np.exp(-1j * w * dt[:, None])
        out = (v * phases[:, None, :]) @ v.conj().transpose(0, 2, 1)
    return out[0] if single else out


def ordered_product(mats: np.ndarray) -> np.ndarray:
    """Time-ordered product ``M[n-1] @ ... @ M[1] @ M[0]`` by pairwise reduction."""
    mats = np.asarray(mats)
    if mats.shape[0] == 0:
        raise DimensionError("empty product")
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            tail = mats[-1:]
            body = mats[:-1]
        else:
            tail = None
            body = mats
        paired = body[1::2] @ body[0::2]
        mats = paired if tail is None else np.concatenate([paired, tail])
    return mats[0]


@dataclass(frozen=True)
class TimeGrid:
    """Integration window with either a fixed step count or an adaptive tolerance.

    With ``tol`` set, the step count starts at ``steps`` and doubles until two
    successive propagators agree to ``tol`` in max norm, up to ``max_steps``.
    """

    t_start: float
    t_end: float
    steps: int = 2000
    tol: Optional[float] = None
    max_steps: int = 1 << 20

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise DomainError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        if self.steps < 1:
            raise DomainError("step count must be >= 1")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


def _sample(sampler, ts, vectorized):
    if vectorized:
        H = np.asarray(sampler(ts), dtype=complex)
    else:
        H = np.stack([np.asarray(sampler(float(t)), dtype=complex) for t in ts])
    if H.ndim != 3 or H.shape[0] != ts.shape[0]:
        raise DimensionError(f"sampler returned shape {H.shape} for {ts.shape[0]} times")
    return H


def check_hermitian(H: np.ndarray, rtol: float = 1e-10) -> None:
    scale = max(1.0, float(np.max(np.abs(H))))
    err = float(np.max(np.abs(H - np.conj(np.swapaxes(H, -1, -2)))))
    if err > rtol * scale:
        raise ModelError(f"sampled Hamiltonian is not Hermitian (residual {err:.3e})")


def step_hamiltonians(sampler, t0: float, t1: float, steps: int, method: str = "magnus4",
                      vectorized: bool = True, check: bool = True):
    """Effective Hamiltonians of each step so that U_k = exp(-i H_k h).

    Returns ``(H_eff, h)``. ``method`` is ``"midpoint"`` (order 2) or
    ``"magnus4"`` (two-point Gauss-Legendre Magnus, order 4).
    """
    h = (t1 - t0) / steps
    left = t0 + h * np.arange(steps)
    if method == "midpoint":
        H = _sample(sampler, left + 0.5 * h, vectorized)
        if check:
            check_hermitian(H)
        return H, h
    if method == "magnus4":
        c1, c2 = 0.5 - _SQRT3 / 6, 0.5 + _SQRT3 / 6
        ts = np.concatenate([left + c1 * h, left + c2 * h])
        H = _sample(sampler, ts, vectorized)
        if check:
            check_hermitian(H)
        H1, H2 = H[:steps], H[steps:]
        comm = H1 @ H2 - H2 @ H1
        return 0.5 * (H1 + H2) + 1j * (_SQRT3 * h / 12.0) * comm, h
    raise ValueError(f"unknown integration method {method!r}")


def step_unitaries(sampler, t0, t1, steps, method="magnus4", vectorized=True, check=True):
    H, h = step_hamiltonians(sampler, t0, t1, steps, method, vectorized, check)
    return expm_hermitian(H, h)


def propagate(sampler: Callable, grid: TimeGrid, method: str = "magnus4",
              vectorized: bool = True) -> np.ndarray:
    """Time-ordered propagator T exp(-i int H dt) over ``grid``.

    ``sampler`` maps an array of times to a stack of Hermitian matrices (or a
    single time to a single matrix when ``vectorized=False``).
    """
    def run(steps):
        Us = step_unitaries(sampler, grid.t_start, grid.t_end, steps, method, vectorized)
        return ordered_product(Us)

    U = run(grid.steps)
    if grid.tol is None:
        return U
    steps = grid.steps
    while True:
        steps *= 2
        if steps > grid.max_steps:
            raise ConvergenceError(f"no convergence to {grid.tol} within {grid.max_steps} steps")
        U2 = run(steps)
        if np.max(np.abs(U2 - U)) < grid.tol:
            return U2
        U = U2


def bessel_j(m: int, x) -> np.ndarray:
    """Bessel function of the first kind J_m(x) for integer 0 <= m <= 20, |x| <= 50.

    Negative orders are accepted through J_{-m} = (-1)^m J_m, which the
    sideband sums need.
    """
    if int(m) != m:
        raise DomainError("order must be an integer")
    m = int(m)
    if abs(m) > 20:
        raise DomainError(f"order {m} outside [0, 20]")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 50):
        raise DomainError("|x| must not exceed 50")
    if m < 0:
        return (-1) ** (-m) * scipy.special.jv(-m, x)
    return scipy.special.jv(m, x)


def distance_up_to_phase(U, V) -> float:
    """min over theta of max|e^{i theta} U - V|, with the phase taken from Tr(U^dag V).

    When the trace vanishes no phase can be aligned; the bare distance is
    returned and a :class:`PhaseUndefinedWarning` is emitted.
    """
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if U.shape != V.shape:
        raise DimensionError(f"shape mismatch {U.shape} vs {V.shape}")
    tr = np.trace(U.conj().T @ V)
    if abs(tr) < 1e-14:
        warnings.warn("Tr(U^dag V) = 0; returning phase-free distance", PhaseUndefinedWarning,
                      stacklevel=2)
        return float(np.max(np.abs(U - V)))
    return float(np.max(np.abs(U * (tr / abs(tr)) - V)))
