import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clvkit import (
    ArgumentError,
    NotFoundError,
    NumericError,
    builtin_systems,
    eval_field,
    eval_jacobian,
    fd_jacobian,
    make_system,
)

from conftest import max_abs


class TestPaper3dField:
    def test_origin_is_equilibrium(self, paper_system):
        assert np.all(eval_field(paper_system, [0.0, 0.0, 0.0]) == 0.0)

    def test_unit_x_point(self, paper_system):
        # arctan(0) = 0, so the rotation angle vanishes and the field is (Ax, 0, 0).
        g = eval_field(paper_system, [1.0, 0.0, 0.0])
        assert g == pytest.approx([2.0, 0.0, 0.0], abs=0.0)

    def test_high_z_axis_point(self, paper_system):
        g = eval_field(paper_system, [0.0, 0.0, 1000.0])
        assert g[0] == 0.0 and g[1] == 0.0
        assert g[2] == -math.atan(1000.0)
        assert g[2] == pytest.approx(-1.5698, abs=1e-4)

    @given(z=st.floats(-1e6, 1e6), a=st.floats(0.5, 3.0), d=st.floats(0.05, 1.0))
    @settings(max_examples=50, deadline=None)
    def test_z_axis_is_invariant(self, z, a, d):
        sysd = make_system("paper3d", {"A": a, "D": d})
        g = eval_field(sysd, [0.0, 0.0, z])
        assert g[0] == 0.0 and g[1] == 0.0

    def test_dimension_mismatch(self, paper_system):
        with pytest.raises(ArgumentError):
            eval_field(paper_system, [1.0, 2.0])

    def test_nonfinite_output(self, paper_system):
        with pytest.raises(NumericError):
            eval_field(paper_system, [1e308, 1e308, 0.0])


class TestPaper3dJacobian:
    def test_at_origin(self, paper_system):
        J = eval_jacobian(paper_system, [0.0, 0.0, 0.0])
        assert np.array_equal(J, np.diag([2.0, 1.0, -1.0]))

    @pytest.mark.parametrize("z", [0.5, 10.0, -3.0, 1000.0])
    def test_on_z_axis(self, paper_system, z):
        J = eval_jacobian(paper_system, [0.0, 0.0, z])
        assert J[2, 2] == pytest.approx(-1.0 / (1.0 + z * z), rel=1e-15)
        assert J[2, 0] == 0.0 and J[2, 1] == 0.0
        assert J[0, 2] == 0.0 and J[1, 2] == 0.0

    def test_random_parameter_tuples_at_origin(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a, b, c, d = rng.uniform(-3, 3, size=4)
            sysd = make_system("paper3d", {"A": a, "B": b, "C": c, "D": d})
            assert np.array_equal(eval_jacobian(sysd, [0.0, 0.0, 0.0]), np.diag([a, b, c]))


class TestFiniteDifferenceJacobian:
    def test_exact_for_linear_field(self, diag3):
        rng = np.random.default_rng(0)
        u = rng.uniform(-4, 4, size=3)
        J = fd_jacobian(diag3, u, h=0.37)
        assert max_abs(J - np.diag([2.0, 1.0, -1.0])) < 1e-12

    def test_matches_analytic_at_origin(self, paper_system):
        J = fd_jacobian(paper_system, [0.0, 0.0, 0.0], h=1e-6)
        assert max_abs(J - np.diag([2.0, 1.0, -1.0])) < 1e-6

    def test_z_derivative_value(self, paper_system):
        J = fd_jacobian(paper_system, [0.0, 0.0, 10.0], h=1e-6)
        assert J[2, 2] == pytest.approx(-1.0 / 101.0, abs=1e-8)

    def test_rejects_nonpositive_step(self, paper_system):
        with pytest.raises(ArgumentError):
            fd_jacobian(paper_system, [0.0, 0.0, 0.0], h=0.0)

    def test_agrees_with_analytic_for_all_builtins(self):
        # Cross-validation oracle: central differences against the hand-coded
        # Jacobian at 100 random points per system.
        rng = np.random.default_rng(42)
        for sysd in builtin_systems():
            for _ in range(100):
                u = rng.uniform(-8, 8, size=sysd.dim)
                t = rng.uniform(-1, 1)
                J = eval_jacobian(sysd, u, t)
                F = fd_jacobian(sysd, u, t)
                assert max_abs(J - F) < 1e-5


class TestRegistry:
    def test_paper3d_defaults(self):
        sysd = make_system("paper3d")
        assert sysd.params == {"A": 2.0, "B": 1.0, "C": -1.0, "D": 0.2}
        assert sysd.dim == 3

    def test_diag_linear_zero_rates(self):
        sysd = make_system("diag-linear", {"diag": [0.0, 0.0, 0.0]})
        rng = np.random.default_rng(3)
        for _ in range(5):
            assert np.all(eval_field(sysd, rng.uniform(-9, 9, size=3)) == 0.0)

    def test_unknown_name(self):
        with pytest.raises(NotFoundError):
            make_system("nope")

    def test_unknown_parameter(self):
        with pytest.raises(ArgumentError, match="'E'"):
            make_system("paper3d", {"E": 1.0})

    def test_builtins_present(self):
        names = {s.name for s in builtin_systems()}
        assert {"paper3d", "diag-linear", "rotation-saddle"} <= names

    def test_rotation_saddle_has_complex_pair(self):
        sysd = make_system("rotation-saddle")
        w = np.linalg.eigvals(eval_jacobian(sysd, [0.0, 0.0]))
        assert np.all(np.abs(w.imag) > 0.1)
