"""Dispersive correction: operator stencil, activity mask, elliptic
assembly and the tridiagonal solver (checked against the dense oracle)."""

import math

import numpy as np
import pytest

from conftest import flat_profile, make_lake_patch
from boussamr import oracle
from boussamr.core import GHOST
from boussamr.dispersive import (B1_DEFAULT, TridiagonalSystem, apply_d11,
                                 assemble_elliptic, boussinesq_mask,
                                 solve_patch_psi, solve_tridiagonal)
from boussamr.errors import (ContractViolation, NumericalError,
                             SingularSystemError)
from boussamr.stepper import fill_physical


class TestApplyOperator:
    def test_quadratic_on_unit_depth(self):
        """D(x^2) with h0 = 1 and the default curvature is exactly 0.8:
        (b1 + 1/2) * 2 - (1/6) * 2 = 2/15 + 1 - 1/3."""
        x = (np.arange(8) + 0.5) * 1.0
        out = apply_d11(x * x, np.ones(8), 1.0)
        assert np.all(out[1:-1] == 0.8)
        assert out[0] == 0.0 and out[-1] == 0.0

    def test_degenerate_curvature_leaves_only_the_cubic_term(self):
        """b1 = -1/2 kills the first term: D(w) = -(1/6) h0^3 (w/h0)_xx."""
        rng = np.random.default_rng(3)
        w = rng.uniform(-1.0, 1.0, 12)
        out = apply_d11(w, np.ones(12), 0.5, b1=-0.5)
        ref = -(w[:-2] - 2.0 * w[1:-1] + w[2:]) / (0.5 * 0.5) / 6.0
        assert np.array_equal(out[1:-1], ref)

    def test_linear_functions_are_annihilated(self):
        x = (np.arange(10) + 0.5) * 2.0
        out = apply_d11(3.0 * x + 1.0, np.full(10, 5.0), 2.0)
        assert np.all(np.abs(out) < 1e-12)

    def test_dry_stencils_produce_zero(self):
        w = np.ones(6)
        h0 = np.array([1.0, 1.0, 0.0, 1.0, 1.0, 1.0])
        out = apply_d11(w, h0, 1.0)
        # Cells 1, 2, 3 all touch the dry cell 2.
        assert out[1] == 0.0 and out[2] == 0.0 and out[3] == 0.0

    def test_shape_mismatch_raises(self):
        with pytest.raises(ContractViolation):
            apply_d11(np.ones(4), np.ones(5), 1.0)


class TestActivityMask:
    def test_switch_depth_reference_case(self):
        mask = boussinesq_mask(np.array([4000.0, 4000.0, 5.0, 0.0]), 10.0)
        assert mask.tolist() == [True, True, False, False]

    def test_infinite_switch_disables_everything(self):
        mask = boussinesq_mask(np.full(6, 4000.0), math.inf)
        assert not mask.any()

    def test_zero_switch_enables_all_wet_cells_away_from_dry(self):
        h0 = np.array([4000.0, 4000.0, 0.0, 4000.0, 4000.0])
        mask = boussinesq_mask(h0, 0.0)
        # Dry cell and both neighbors of the dry cell are off.
        assert mask.tolist() == [True, False, False, False, True]

    def test_array_ends_do_not_deactivate(self):
        mask = boussinesq_mask(np.array([100.0, 100.0]), 10.0)
        assert mask.tolist() == [True, True]


class TestTridiagonalSystem:
    def _random_system(self, rng, n, cyclic=False):
        sub = rng.uniform(-1.0, 1.0, n)
        sup = rng.uniform(-1.0, 1.0, n)
        diag = np.abs(sub) + np.abs(sup) + rng.uniform(1.0, 2.0, n)
        rhs = rng.uniform(-1.0, 1.0, n)
        ct = cb = 0.0
        if cyclic:
            ct, cb = float(rng.uniform(-0.3, 0.3)), float(rng.uniform(-0.3, 0.3))
        else:
            sub = sub.copy()
            sup = sup.copy()
            sub[0] = 0.0
            sup[-1] = 0.0
        return TridiagonalSystem(sub=sub, diag=diag, sup=sup, rhs=rhs,
                                 cyclic=cyclic, corner_top=ct, corner_bot=cb)

    def test_dense_form_matches_matvec(self):
        rng = np.random.default_rng(11)
        for cyclic in (False, True):
            system = self._random_system(rng, 7, cyclic)
            x = rng.uniform(-1.0, 1.0, 7)
            assert np.allclose(system.dense() @ x, system.matvec(x), atol=1e-14)

    def test_solver_agrees_with_dense_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            system = self._random_system(rng, int(rng.integers(3, 30)))
            x = solve_tridiagonal(system)
            x_ref = oracle.dense_solve(system.dense(), system.rhs)
            assert float(np.max(np.abs(x - x_ref))) < 1e-12

    def test_cyclic_solver_agrees_with_dense_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            system = self._random_system(rng, int(rng.integers(3, 30)), cyclic=True)
            x = solve_tridiagonal(system)
            x_ref = oracle.dense_solve(system.dense(), system.rhs)
            assert float(np.max(np.abs(x - x_ref))) < 1e-12

    def test_structurally_singular_system_raises(self):
        system = TridiagonalSystem(
            sub=np.zeros(3), diag=np.zeros(3), sup=np.zeros(3),
            rhs=np.ones(3))
        with pytest.raises(SingularSystemError):
            solve_tridiagonal(system)

    def test_empty_system_returns_empty(self):
        system = TridiagonalSystem(sub=np.empty(0), diag=np.empty(0),
                                   sup=np.empty(0), rhs=np.empty(0))
        assert solve_tridiagonal(system).shape == (0,)


class TestAssembly:
    def test_still_water_has_zero_right_hand_side(self):
        n = 16
        n_tot = n + 2 * GHOST
        h0 = np.full(n_tot, 100.0)
        system = assemble_elliptic(
            h0.copy(), np.zeros(n_tot), np.zeros(n_tot), h0, 10.0, 9.81,
            B1_DEFAULT, np.ones(n, dtype=bool))
        assert np.all(system.rhs == 0.0)
        assert np.all(solve_tridiagonal(system) == 0.0)

    def test_inactive_rows_are_identity(self):
        n = 8
        n_tot = n + 2 * GHOST
        h0 = np.full(n_tot, 100.0)
        eta = 0.01 * np.sin(np.arange(n_tot))
        active = np.zeros(n, dtype=bool)
        active[2:5] = True
        system = assemble_elliptic(
            h0 + eta, np.zeros(n_tot), eta, h0, 10.0, 9.81, B1_DEFAULT, active)
        off = ~active
        assert np.all(system.diag[off] == 1.0)
        assert np.all(system.sub[off] == 0.0)
        assert np.all(system.sup[off] == 0.0)
        assert np.all(system.rhs[off] == 0.0)
        x = solve_tridiagonal(system)
        assert np.all(x[off] == 0.0)

    def test_diagonal_dominance_on_constant_depth(self):
        """Rows of [I - D] on uniform h0 dominate their off-diagonals,
        which is what lets the plain elimination run without pivoting."""
        n = 32
        n_tot = n + 2 * GHOST
        h0 = np.full(n_tot, 4000.0)
        system = assemble_elliptic(
            h0.copy(), np.zeros(n_tot), np.zeros(n_tot), h0, 1000.0, 9.81,
            B1_DEFAULT, np.ones(n, dtype=bool))
        assert np.all(np.abs(system.diag) >
                      np.abs(system.sub) + np.abs(system.sup) - 1e-12)

    def test_mismatched_mask_raises(self):
        n_tot = 8 + 2 * GHOST
        h0 = np.full(n_tot, 10.0)
        with pytest.raises(ContractViolation):
            assemble_elliptic(h0.copy(), np.zeros(n_tot), np.zeros(n_tot),
                              h0, 1.0, 9.81, B1_DEFAULT, np.ones(5, dtype=bool))


class TestPatchSolve:
    def test_still_lake_yields_identically_zero_psi(self):
        patch = make_lake_patch(n=32, depth=4000.0, x_hi=32_000.0)
        fill_physical(patch, "extrap", "extrap")
        solved = solve_patch_psi(patch, 9.81, B1_DEFAULT, switch_depth=10.0)
        assert solved
        assert np.all(patch.psi[patch.interior] == 0.0)

    def test_disabled_correction_zeroes_psi_and_reports_false(self):
        patch = make_lake_patch(n=32, depth=4000.0, x_hi=32_000.0)
        patch.psi[:] = 5.0
        solved = solve_patch_psi(patch, 9.81, B1_DEFAULT, switch_depth=10.0,
                                 boussinesq=False)
        assert not solved
        assert np.all(patch.psi[patch.interior] == 0.0)

    def test_everything_below_switch_depth_reports_false(self):
        patch = make_lake_patch(n=32, depth=5.0, x_hi=3200.0)
        fill_physical(patch, "extrap", "extrap")
        solved = solve_patch_psi(patch, 9.81, B1_DEFAULT, switch_depth=10.0)
        assert not solved
        assert np.all(patch.psi[patch.interior] == 0.0)

    def test_wave_produces_a_solve_meeting_the_residual_gate(self):
        patch = make_lake_patch(n=64, depth=4000.0, x_hi=64_000.0)
        x = patch.x_centers(include_ghosts=True)
        eta = 0.4 * np.sin(2.0 * np.pi * x / 64_000.0)
        patch.h[:] = np.maximum(0.0, eta - patch.b)
        patch.hu[:] = patch.h * eta * math.sqrt(9.81 / 4000.0)
        fill_physical(patch, "extrap", "extrap")
        solved = solve_patch_psi(patch, 9.81, B1_DEFAULT, switch_depth=10.0)
        assert solved
        psi = patch.psi[patch.interior]
        assert np.all(np.isfinite(psi))
        assert float(np.max(np.abs(psi))) > 0.0


class TestManufacturedSolution:
    def test_second_order_convergence(self):
        """Recovering a sine with the assembled operator converges at
        second order in the grid spacing."""
        from boussamr.validate import elliptic_mms_error
        errors = [elliptic_mms_error(n) for n in (32, 64, 128)]
        order = math.log2(errors[0] / errors[-1]) / 2.0
        assert 1.8 <= order <= 2.2
