"""Reference-solution module: exact dam break, dispersion relations,
dense linear solver.  These are the independent routes the solver is
checked against, so they get their own self-consistency tests."""

import math

import numpy as np
import pytest

from boussamr import oracle
from boussamr.errors import ContractViolation, SingularSystemError


class TestExactDambreak:
    def test_middle_state_satisfies_both_wave_relations(self):
        """The bisected state must sit on the rarefaction invariant and
        the shock jump relation simultaneously."""
        h_left, h_right, g = 2.0, 1.0, 1.0
        s = oracle.dambreak_shock_speed(h_left, h_right, g)
        # Sample just behind the shock to read off the middle state.
        xi = s - 1e-9
        h_mid, u_mid = oracle.exact_dambreak(h_left, h_right, g, xi)
        c_left = math.sqrt(g * h_left)
        u_rare = 2.0 * (c_left - math.sqrt(g * h_mid))
        u_shock = (h_mid - h_right) * math.sqrt(
            g * (h_mid + h_right) / (2.0 * h_mid * h_right))
        assert abs(u_mid - u_rare) < 1e-10
        assert abs(u_mid - u_shock) < 1e-10

    def test_rankine_hugoniot_across_the_shock(self):
        """Mass and momentum jump conditions hold to 1e-10."""
        h_left, h_right, g = 2.0, 1.0, 1.0
        s = oracle.dambreak_shock_speed(h_left, h_right, g)
        h_m, u_m = oracle.exact_dambreak(h_left, h_right, g, s - 1e-9)
        # mass: s [h] = [hu]
        assert abs(s * (h_m - h_right) - h_m * u_m) < 1e-10
        # momentum: s [hu] = [hu^2 + g h^2 / 2]
        flux_m = h_m * u_m * u_m + 0.5 * g * h_m * h_m
        flux_r = 0.5 * g * h_right * h_right
        assert abs(s * h_m * u_m - (flux_m - flux_r)) < 1e-10

    def test_wave_structure_and_constant_states(self):
        h_left, h_right, g = 2.0, 1.0, 1.0
        c_left = math.sqrt(g * h_left)
        s = oracle.dambreak_shock_speed(h_left, h_right, g)
        xi = np.linspace(-2.0, 2.0, 801)
        h, u = oracle.exact_dambreak(h_left, h_right, g, xi)
        # Undisturbed states outside the wave fan.
        assert np.all(h[xi <= -c_left] == h_left)
        assert np.all(u[xi <= -c_left] == 0.0)
        assert np.all(h[xi >= s] == h_right)
        assert np.all(u[xi >= s] == 0.0)
        # Depth decreases monotonically from left to right.
        assert np.all(np.diff(h) <= 1e-12)
        assert np.all(h >= h_right) and np.all(h <= h_left)

    def test_dry_bed_front_speed(self):
        """Rarefaction onto a dry bed reaches exactly xi = 2 sqrt(g hL)."""
        h_left, g = 2.0, 9.81
        front = 2.0 * math.sqrt(g * h_left)
        h_in, u_in = oracle.exact_dambreak(h_left, 0.0, g, front * (1.0 - 1e-6))
        h_out, u_out = oracle.exact_dambreak(h_left, 0.0, g, front * (1.0 + 1e-6))
        assert h_in > 0.0
        assert h_out == 0.0 and u_out == 0.0
        assert abs(u_in - front) < 1e-4

    def test_scalar_input_gives_scalars(self):
        h, u = oracle.exact_dambreak(2.0, 1.0, 1.0, 0.0)
        assert isinstance(h, float) and isinstance(u, float)

    def test_rejects_bad_states(self):
        with pytest.raises(ContractViolation):
            oracle.exact_dambreak(1.0, 2.0, 1.0, 0.0)
        with pytest.raises(ContractViolation):
            oracle.exact_dambreak(2.0, 1.0, -1.0, 0.0)
        with pytest.raises(ContractViolation):
            oracle.exact_dambreak(0.0, 0.0, 1.0, 0.0)


class TestDispersionRelations:
    def test_reference_point_kh0_one(self):
        """c^2(k h0 = 1) = 16/21 for g = h0 = 1 and b1 = 1/15."""
        c = oracle.ms_dispersion(1.0, 1.0, 1.0)
        assert abs(c - math.sqrt(16.0 / 21.0)) < 1e-15
        assert abs(c - 0.8729) < 1e-4

    def test_long_wave_limit(self):
        assert oracle.ms_dispersion(0.0, 4000.0, 9.81) == math.sqrt(9.81 * 4000.0)
        assert oracle.airy_dispersion(0.0, 4000.0, 9.81) == math.sqrt(9.81 * 4000.0)

    def test_matches_airy_within_a_tenth_percent_up_to_kh0_one(self):
        h0, g = 1.0, 1.0
        k = np.linspace(1e-6, 1.0, 200) / h0
        c_model = oracle.ms_dispersion(k, h0, g)
        c_exact = oracle.airy_dispersion(k, h0, g)
        rel = np.abs(c_model - c_exact) / c_exact
        assert float(np.max(rel)) < 1e-3

    def test_other_curvature_coefficients_do_worse(self):
        """b1 = 1/15 is the tuned value; b1 = 0 misses Airy by much more."""
        k, h0, g = 1.0, 1.0, 1.0
        c_exact = oracle.airy_dispersion(k, h0, g)
        err_tuned = abs(oracle.ms_dispersion(k, h0, g) - c_exact)
        err_plain = abs(oracle.ms_dispersion(k, h0, g, b1=0.0) - c_exact)
        assert err_tuned < 0.1 * err_plain

    def test_phase_speed_decreases_with_k(self):
        k = np.linspace(0.0, 2.0, 50)
        c = oracle.ms_dispersion(k, 1.0, 1.0)
        assert np.all(np.diff(c) < 0.0)

    def test_rejects_nonpositive_depth(self):
        with pytest.raises(ContractViolation):
            oracle.ms_dispersion(1.0, 0.0, 9.81)


class TestDenseSolve:
    def test_diagonal_system(self):
        x = oracle.dense_solve([[2.0, 0.0], [0.0, 4.0]], [2.0, 4.0])
        assert np.array_equal(x, [1.0, 1.0])

    def test_random_systems_to_machine_residual(self):
        rng = np.random.default_rng(7)
        for n in (3, 8, 20):
            a = rng.uniform(-1.0, 1.0, (n, n)) + n * np.eye(n)
            b = rng.uniform(-1.0, 1.0, n)
            x = oracle.dense_solve(a, b)
            assert float(np.max(np.abs(a @ x - b))) < 1e-12

    def test_pivoting_handles_zero_leading_entry(self):
        a = [[0.0, 1.0], [1.0, 1.0]]
        x = oracle.dense_solve(a, [1.0, 2.0])
        assert np.allclose(x, [1.0, 1.0], atol=1e-14)

    def test_singular_matrix_raises(self):
        with pytest.raises(SingularSystemError):
            oracle.dense_solve([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0])

    def test_shape_mismatch_raises(self):
        with pytest.raises(ContractViolation):
            oracle.dense_solve([[1.0, 0.0]], [1.0, 2.0])
