"""Systematic-error injectors."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ErrorModel:
    """Static control errors applied while sampling a Hamiltonian.

    detuning:    fraction of the reference amplitude added to the detuning,
                 Delta -> Delta + detuning * Omega_m.
    amplitude:   relative drive error, Omega -> (1 + amplitude) * Omega.
    zz:          ZZ crosstalk strength (rad per time unit), two-qubit models only.
    detuning_2q: two-qubit frequency drift, Delta' -> Delta' + detuning_2q * g'.
                 On an effective two-level schedule the reference amplitude
                 is g', so it enters exactly like ``detuning``.
    """

    detuning: float = 0.0
    amplitude: float = 0.0
    zz: float = 0.0
    detuning_2q: float = 0.0

    @property
    def is_zero(self) -> bool:
        return not (self.detuning or self.amplitude or self.zz or self.detuning_2q)


NO_ERROR = ErrorModel()

ERROR_KINDS = ("detuning", "amplitude", "zz", "detuning_2q")


def error_of_kind(kind: str, value: float) -> ErrorModel:
    if kind not in ERROR_KINDS:
        raise ValueError(f"unknown error kind {kind!r}; expected one of {ERROR_KINDS}")
    return ErrorModel(**{kind: float(value)})
