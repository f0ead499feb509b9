import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geotraj.exceptions import DomainError, ParameterError, UnknownGateError
from geotraj.noise import ErrorModel
from geotraj.numkit import distance_up_to_phase
from geotraj.pulse import (
    ConventionalGateSpec,
    PulseSchedule,
    PulseSegment,
    conventional_composite,
    conventional_unitary,
    export_schedule_csv,
    propagate_schedule,
    sample_hamiltonian,
    segment_from_area,
    synth_conventional,
    synth_conventional_gate,
    target_unitary,
)

from oracles import schedule_rk4

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def square(area=1.0, **laws):
    return PulseSchedule((segment_from_area(area, 1.0, "square", **laws),))


class TestSampleHamiltonian:
    def test_square_resonant(self):
        assert np.allclose(sample_hamiltonian(square(), 0.3), 0.5 * np.array([[0, 1], [1, 0]]))

    def test_detuning_error(self):
        H = sample_hamiltonian(square(), 0.3, ErrorModel(detuning=0.1))
        assert np.allclose(H, 0.5 * np.array([[-0.1, 1], [1, 0.1]]))

    def test_sine_peak(self):
        sched = PulseSchedule((PulseSegment(1.0, 2 / np.pi),))
        assert abs(sample_hamiltonian(sched, 0.5)[0, 1]) == pytest.approx(0.5)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            sample_hamiltonian(square(), 1.5)

    def test_hermitian_with_laws(self):
        sched = square(2.0, phase_base=0.3, phase_slope=1.7, detune_factor=-0.8)
        for t in np.linspace(0, 2, 7):
            H = sample_hamiltonian(sched, t)
            assert np.allclose(H, H.conj().T)


class TestSegments:
    def test_sine_area(self):
        seg = segment_from_area(np.pi, 2.0)
        assert seg.duration == pytest.approx(np.pi / 2 * np.pi / 2)
        assert seg.peak == pytest.approx(2.0)
        assert 2 * seg.peak * seg.duration / np.pi == pytest.approx(np.pi)
        assert seg.accumulated_area(seg.duration) == pytest.approx(np.pi)

    def test_degenerate(self):
        seg = segment_from_area(0.0, 1.0)
        assert seg.degenerate and seg.duration == 0

    def test_invariants(self):
        with pytest.raises(ParameterError):
            PulseSegment(1.0, 0.0)
        with pytest.raises(ParameterError):
            PulseSegment(1.0, 1.0, envelope="gauss")
        with pytest.raises(ParameterError):
            PulseSegment(-1.0, -1.0)

    def test_boundaries_and_total(self):
        sched = synth_conventional_gate("H", 2.0)
        assert sched.total_time == pytest.approx(sum(s.duration for s in sched.segments))
        assert np.all(np.diff(sched.boundaries) > 0)


class TestConventional:
    def test_x_pi(self):
        U = propagate_schedule(synth_conventional(ConventionalGateSpec(np.pi, 0.0)))
        assert np.max(np.abs(U - np.array([[0, -1j], [-1j, 0]]))) < 1e-8

    def test_two_pi_is_minus_identity(self):
        U = propagate_schedule(synth_conventional(ConventionalGateSpec(2 * np.pi, 0.0)))
        assert np.max(np.abs(U + np.eye(2))) < 1e-8

    def test_y_half(self):
        U = propagate_schedule(synth_conventional(ConventionalGateSpec(np.pi / 2, np.pi / 2)))
        r = np.sqrt(0.5)
        assert np.max(np.abs(U - np.array([[r, -r], [r, r]]))) < 1e-8

    def test_zero_angle_is_empty(self):
        sched = synth_conventional(ConventionalGateSpec(0.0, 1.0))
        assert sched.segments == ()
        assert np.allclose(propagate_schedule(sched), np.eye(2))

    def test_negative_angle(self):
        with pytest.raises(ParameterError):
            ConventionalGateSpec(-1.0)

    @pytest.mark.parametrize("envelope", ["sine", "square"])
    def test_random_rotations(self, envelope):
        rng = np.random.default_rng(11)
        for _ in range(50):
            th, ph = rng.uniform(0.01, 2 * np.pi), rng.uniform(-np.pi, np.pi)
            U = propagate_schedule(synth_conventional(ConventionalGateSpec(th, ph), 1.3, envelope))
            assert np.max(np.abs(U - conventional_unitary(th, ph))) < 1e-8

    def test_matches_rk4(self):
        sched = synth_conventional(ConventionalGateSpec(2.1, 0.4))
        err = ErrorModel(detuning=0.07, amplitude=-0.03)
        assert np.max(np.abs(propagate_schedule(sched, err) - schedule_rk4(sched, err))) < 1e-10

    def test_composites(self):
        specs = conventional_composite("H")
        assert [(s.theta, s.phi) for s in specs] == [(np.pi, 0.0), (np.pi / 2, -np.pi / 2)]
        assert [(s.theta, s.phi) for s in conventional_composite("I")] == [(2 * np.pi, 0.0)]
        assert [(s.theta, s.phi) for s in conventional_composite("mXpi2")] == [(np.pi / 2, np.pi)]
        U = propagate_schedule(synth_conventional_gate("H"))
        assert distance_up_to_phase(U, HADAMARD) < 1e-8
        with pytest.raises(UnknownGateError):
            conventional_composite("T")

    @pytest.mark.parametrize("name", ["I", "H", "Xpi", "Ypi", "Xpi2", "Ypi2", "mXpi2", "mYpi2"])
    def test_named_targets(self, name):
        U = propagate_schedule(synth_conventional_gate(name))
        assert distance_up_to_phase(U, target_unitary(name)) < 1e-8


class TestErrorInjection:
    def test_detuning_adds_everywhere(self):
        sched = square(1.0, detune_factor=2.0)
        H0 = sample_hamiltonian(sched, 0.4)
        H1 = sample_hamiltonian(sched, 0.4, ErrorModel(detuning=0.05))
        assert (H1[1, 1] - H0[1, 1]).real == pytest.approx(0.025)

    def test_amplitude_scales_detuning_law(self):
        sched = square(1.0, detune_factor=2.0)
        H0 = sample_hamiltonian(sched, 0.4)
        H1 = sample_hamiltonian(sched, 0.4, ErrorModel(amplitude=0.1))
        assert H1[1, 1].real == pytest.approx(1.1 * H0[1, 1].real)
        assert abs(H1[0, 1]) == pytest.approx(1.1 * abs(H0[0, 1]))

    def test_sensitivity_independent_of_peak(self):
        # resonant gate errors in units of Omega_m do not depend on Omega_m
        err = ErrorModel(detuning=0.1)
        a = propagate_schedule(synth_conventional_gate("Xpi", 1.0), err)
        b = propagate_schedule(synth_conventional_gate("Xpi", 7.0), err)
        assert np.max(np.abs(a - b)) < 1e-10


class TestSerialization:
    @given(st.lists(st.tuples(st.floats(0.01, 10), st.floats(-4, 4), st.floats(-3, 3), st.floats(-3, 3),
                              st.sampled_from(["sine", "square"])), min_size=1, max_size=5),
           st.floats(0.1, 50))
    def test_json_round_trip(self, segs, om):
        sched = PulseSchedule(tuple(segment_from_area(a, om, env, phase_base=p, phase_slope=s, detune_factor=f)
                                    for a, p, s, f, env in segs), om)
        assert PulseSchedule.from_json(sched.to_json()) == sched

    def test_csv_header(self, tmp_path):
        path = tmp_path / "s.csv"
        export_schedule_csv(synth_conventional_gate("H"), path, 10)
        rows = list(csv.reader(open(path)))
        assert rows[0] == ["t", "omega", "phi", "delta"]
        assert len(rows) == 1 + 2 * 11
