"""Geometric single- and two-qubit gates from closed longitude/latitude loops on the Bloch sphere.

The loop waypoints are free parameters; choosing them well makes the gate
insensitive to static detuning and amplitude errors. Submodules:

numkit      matrix exponentials, time-ordered propagation, Bessel functions
pulse       piecewise pulse schedules and the driven two-level model
geometry    loop construction, pulse synthesis and phase bookkeeping
noise       systematic error injectors
fidelity    gate fidelity and error-sensitivity curves
optimize    (chi1, chi3) waypoint scans
transmon    multi-level transmon with DRAG and Lindblad decoherence
twoqubit    parametrically coupled transmons, iSWAP and CZ
"""
from .exceptions import (
    ConvergenceError,
    DegenerateLoopError,
    DimensionError,
    DomainError,
    GeoTrajError,
    ModelError,
    ParameterError,
    PhaseUndefinedWarning,
    SingularDriftError,
    TopologyError,
    UnknownGateError,
)
from .fidelity import SensitivityCurve, compare_curves, gate_fidelity, sensitivity_curve
from .geometry import GateParams, gate_unitary, named_gate_params, synth_five_segment
from .noise import NO_ERROR, ErrorModel
from .pulse import PulseSchedule, PulseSegment, propagate_schedule

__version__ = "0.1.0"
