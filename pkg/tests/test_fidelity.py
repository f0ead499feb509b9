import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geotraj.exceptions import DimensionError
from geotraj.fidelity import (
    SensitivityCurve,
    average_gate_fidelity,
    compare_curves,
    default_grid,
    gate_fidelity,
    sensitivity_curve,
)
from geotraj.geometry import gate_unitary, named_gate_params, synth_five_segment
from geotraj.noise import ErrorModel, error_of_kind
from geotraj.numkit import mat_exp
from geotraj.pulse import synth_conventional_gate, target_unitary

from oracles import schedule_rk4

XPI = np.array([[0, -1j], [-1j, 0]])


def random_unitary(rng, d=2):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return mat_exp(-0.5j * (A + A.conj().T))


class TestGateFidelity:
    def test_examples(self):
        rng = np.random.default_rng(0)
        U = random_unitary(rng, 3)
        assert gate_fidelity(U, U) == pytest.approx(1.0)
        assert gate_fidelity(XPI, np.eye(2)) == pytest.approx(0.0)

    @given(st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
    def test_global_phase_invariance(self, a, b):
        rng = np.random.default_rng(4)
        U, V = random_unitary(rng), random_unitary(rng)
        assert gate_fidelity(np.exp(1j * a) * U, np.exp(1j * b) * V) == pytest.approx(gate_fidelity(U, V))

    def test_real_part_mode_is_phase_sensitive(self):
        assert gate_fidelity(np.eye(2), -np.eye(2), "re") == pytest.approx(-1.0)
        assert gate_fidelity(np.eye(2), -np.eye(2)) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            gate_fidelity(np.eye(2), np.eye(2), "bogus")

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            gate_fidelity(np.eye(2), np.eye(4))

    def test_x_pi_detuned_oracle(self):
        sched = synth_conventional_gate("Xpi")
        err = ErrorModel(detuning=0.1)
        curve = sensitivity_curve(sched, XPI, grid=[0.1])
        ref = 1 - gate_fidelity(XPI, schedule_rk4(sched, err, steps=8000))
        assert 0 < curve.infidelity[0] < 1
        assert curve.infidelity[0] == pytest.approx(ref, abs=1e-8)

    def test_average_fidelity(self):
        assert average_gate_fidelity(np.eye(2), np.eye(2)) == pytest.approx(1.0)
        assert average_gate_fidelity(np.eye(2), XPI) == pytest.approx(1 / 3)
        # losing half the norm of one state
        assert average_gate_fidelity(np.eye(2), np.diag([1, np.sqrt(0.5)])) < 1


class TestSensitivity:
    def test_zero_error(self):
        p = named_gate_params("H", 1)
        sched, _ = synth_five_segment(p, 0.05 * np.pi, 0.73 * np.pi)
        curve = sensitivity_curve(sched, gate_unitary(p), grid=[0.0])
        assert curve.infidelity[0] < 1e-8

    def test_identity_symmetric(self):
        sched = synth_conventional_gate("I")
        curve = sensitivity_curve(sched, target_unitary("I"), grid=default_grid())
        assert curve.at(0.1) > 0
        assert np.allclose(curve.infidelity, curve.infidelity[::-1], atol=1e-12)

    def test_symmetrized_average(self):
        sched = synth_conventional_gate("Xpi2")
        t = target_unitary("Xpi2")
        g = default_grid(0.1, 11)
        c = sensitivity_curve(sched, t, grid=g)
        assert np.allclose(0.5 * (c.infidelity + c.infidelity[::-1]), c.infidelity, atol=1e-12)

    def test_geometric_x_pi_dominates(self):
        p = named_gate_params("Xpi", 1)
        geo, _ = synth_five_segment(p, 0.44 * np.pi, 0.565 * np.pi)
        a = sensitivity_curve(geo, gate_unitary(p))
        b = sensitivity_curve(synth_conventional_gate("Xpi"), XPI)
        assert compare_curves(a, b).dominates

    def test_threads_identical(self):
        sched = synth_conventional_gate("H")
        a = sensitivity_curve(sched, target_unitary("H"), grid=default_grid(0.1, 9))
        b = sensitivity_curve(sched, target_unitary("H"), grid=default_grid(0.1, 9), threads=3)
        assert np.array_equal(a.infidelity, b.infidelity)

    def test_csv(self, tmp_path):
        c = SensitivityCurve("x", np.array([0.0, 0.1]), np.array([0.0, 1e-3]))
        c.to_csv(tmp_path / "c.csv")
        rows = list(csv.reader(open(tmp_path / "c.csv")))
        assert rows[0] == ["delta", "infidelity"] and float(rows[2][1]) == 1e-3

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            error_of_kind("phase", 0.1)


class TestCompare:
    def grid(self):
        return default_grid(0.1, 5)

    def test_self_ties(self):
        c = SensitivityCurve("a", self.grid(), np.array([1e-3, 1e-4, 0, 1e-4, 1e-3]))
        rep = compare_curves(c, c)
        assert rep.all_tied and rep.dominates and rep.max_ratio == pytest.approx(1.0)

    def test_zeros_dominate(self):
        z = SensitivityCurve("z", self.grid(), np.zeros(5))
        c = SensitivityCurve("c", self.grid(), np.full(5, 1e-3))
        rep = compare_curves(z, c)
        assert rep.dominates and not rep.all_tied and rep.max_ratio == 0.0

    def test_crossover(self):
        a = SensitivityCurve("a", self.grid(), np.array([1, 1, 1, 3, 3.0]))
        b = SensitivityCurve("b", self.grid(), np.array([2, 2, 2, 2, 2.0]))
        rep = compare_curves(a, b)
        assert not rep.dominates
        assert rep.crossovers == [pytest.approx(0.025)]

    def test_grid_mismatch(self):
        a = SensitivityCurve("a", self.grid(), np.zeros(5))
        b = SensitivityCurve("b", default_grid(0.2, 5), np.zeros(5))
        with pytest.raises(DimensionError):
            compare_curves(a, b)
