"""Shallow-water step: Riemann solver, stability bound, balance, CFL."""

import math

import numpy as np
import pytest

from conftest import bumpy_profile, flat_profile, make_lake_patch
from boussamr.core import GHOST, CellState
from boussamr.errors import CflViolation, ContractViolation
from boussamr.stepper import fill_physical
from boussamr.swe import riemann_wellbalanced, stable_dt, swe_step


class TestStableDt:
    def test_reference_value_ocean_depth(self):
        """4000 m of still water on a 1 km grid at Courant 0.9."""
        patch = make_lake_patch(n=32, depth=4000.0, x_hi=32_000.0)
        dt = stable_dt(patch, 0.9, 9.81)
        assert dt == 0.9 * 1000.0 / math.sqrt(9.81 * 4000.0)
        assert abs(dt - 4.543) < 5e-4

    def test_doubling_dx_doubles_dt_exactly(self):
        p1 = make_lake_patch(n=32, depth=4000.0, x_hi=32_000.0)
        p2 = make_lake_patch(n=32, depth=4000.0, x_hi=64_000.0)
        assert stable_dt(p2, 0.9, 9.81) == 2.0 * stable_dt(p1, 0.9, 9.81)

    def test_dry_patch_imposes_no_constraint(self):
        patch = make_lake_patch(n=32, depth=4000.0, x_hi=32_000.0)
        patch.h[:] = 0.0
        assert stable_dt(patch, 0.9, 9.81) == math.inf

    def test_moving_water_tightens_the_bound(self):
        still = make_lake_patch(n=32, depth=100.0, x_hi=32_000.0)
        moving = make_lake_patch(n=32, depth=100.0, x_hi=32_000.0)
        moving.hu[:] = 100.0 * 5.0
        assert stable_dt(moving, 0.9, 9.81) < stable_dt(still, 0.9, 9.81)

    def test_rejects_bad_courant_target(self):
        patch = make_lake_patch(n=32, depth=100.0, x_hi=32_000.0)
        with pytest.raises(ContractViolation):
            stable_dt(patch, 0.0, 9.81)
        with pytest.raises(ContractViolation):
            stable_dt(patch, 1.5, 9.81)


class TestRiemannInterface:
    def test_still_water_over_a_bottom_step_is_exactly_quiet(self):
        """Equal surfaces across a bathymetry jump: zero fluctuations."""
        out = riemann_wellbalanced(
            CellState(4000.0, 0.0), CellState(3000.0, 0.0),
            b_left=-4000.0, b_right=-3000.0, g=9.81)
        assert np.all(out.left_going == 0.0)
        assert np.all(out.right_going == 0.0)
        assert out.max_speed > 0.0

    def test_dam_break_sends_mass_rightward(self):
        out = riemann_wellbalanced(
            CellState(2.0, 0.0), CellState(1.0, 0.0), 0.0, 0.0, g=1.0)
        # Cells update as q -= (dt/dx) * fluctuation, so a positive
        # left-going depth component drains the left cell and a negative
        # right-going one fills the right cell.
        assert out.left_going[0] > 0.0
        assert out.right_going[0] < 0.0
        # Both cells are pushed rightward.
        assert out.left_going[1] < 0.0
        assert out.right_going[1] < 0.0

    def test_speeds_bounded_by_einfeldt_estimate(self):
        out = riemann_wellbalanced(
            CellState(2.0, 1.0), CellState(1.0, -0.5), 0.0, 0.0, g=9.81)
        bound = abs(1.0 / 2.0) + abs(0.5 / 1.0) + math.sqrt(9.81 * 2.0)
        assert out.max_speed <= bound + 1e-12

    def test_rejects_negative_depth(self):
        bad = CellState(1.0, 0.0)
        bad.h = -1.0
        with pytest.raises(ContractViolation):
            riemann_wellbalanced(bad, CellState(1.0, 0.0), 0.0, 0.0, 9.81)


class TestSweStep:
    def test_lake_at_rest_is_preserved_bitwise(self):
        """Still water over bumpy bathymetry survives a step untouched."""
        patch = make_lake_patch(n=64, depth=4000.0, x_hi=100_000.0,
                                profile=bumpy_profile(4000.0))
        fill_physical(patch, "extrap", "extrap")
        h0 = patch.h.copy()
        dt = stable_dt(patch, 0.9, 9.81)
        swe_step(patch, dt, 9.81)
        assert np.array_equal(patch.h, h0)
        assert np.all(patch.hu == 0.0)

    def test_mass_is_conserved_with_walls(self):
        patch = make_lake_patch(n=200, depth=0.0, x_hi=1.0, profile=flat_profile(0.0))
        patch.b[:] = 0.0
        patch.h0[:] = 0.0
        x = patch.x_centers(include_ghosts=True)
        patch.h[:] = np.where(x < 0.5, 2.0, 1.0)
        mass0 = float(np.sum(patch.h[patch.interior]))
        for _ in range(20):
            fill_physical(patch, "wall", "wall")
            dt = stable_dt(patch, 0.9, 1.0)
            swe_step(patch, dt, 1.0)
        mass1 = float(np.sum(patch.h[patch.interior]))
        assert abs(mass1 - mass0) <= 1e-13 * mass0

    def test_converges_toward_exact_dam_break(self):
        """One coarse run lands within a loose band of the exact profile."""
        from boussamr import oracle
        n = 400
        patch = make_lake_patch(n=n, depth=0.0, x_hi=1.0, profile=flat_profile(0.0))
        x = patch.x_centers(include_ghosts=True) - 0.5
        patch.b[:] = 0.0
        patch.h0[:] = 0.0
        patch.h[:] = np.where(x < 0.0, 2.0, 1.0)
        t = 0.0
        t_final = 0.1
        while t < t_final - 1e-12:
            fill_physical(patch, "extrap", "extrap")
            dt = min(stable_dt(patch, 0.9, 1.0), t_final - t)
            swe_step(patch, dt, 1.0)
            t += dt
        xi = (patch.x_centers() - 0.5) / t_final
        h_exact = oracle.exact_dambreak(2.0, 1.0, 1.0, xi)[0]
        err = float(np.sum(np.abs(patch.h[patch.interior] - h_exact))) / n
        assert err < 5e-3

    def test_courant_violation_leaves_patch_untouched(self):
        patch = make_lake_patch(n=64, depth=4000.0, x_hi=64_000.0)
        patch.hu[:] = 4000.0 * 1.0
        fill_physical(patch, "extrap", "extrap")
        snap_h = patch.h.copy()
        snap_hu = patch.hu.copy()
        dt_ok = stable_dt(patch, 0.9, 9.81)
        with pytest.raises(CflViolation) as err:
            swe_step(patch, 10.0 * dt_ok, 9.81)
        assert err.value.courant > 1.0
        assert np.array_equal(patch.h, snap_h)
        assert np.array_equal(patch.hu, snap_hu)

    def test_rejects_nonpositive_dt(self):
        patch = make_lake_patch(n=32, depth=100.0, x_hi=3200.0)
        with pytest.raises(ContractViolation):
            swe_step(patch, 0.0, 9.81)

    def test_cover_mask_of_all_false_matches_no_mask(self):
        """The covered/uncovered split degenerates to the plain path."""
        def run(cover):
            patch = make_lake_patch(n=64, depth=0.0, x_hi=1.0,
                                    profile=flat_profile(0.0))
            x = patch.x_centers(include_ghosts=True)
            patch.b[:] = 0.0
            patch.h0[:] = 0.0
            patch.h[:] = np.where(x < 0.5, 2.0, 1.0)
            for _ in range(10):
                fill_physical(patch, "extrap", "extrap")
                dt = stable_dt(patch, 0.9, 1.0)
                swe_step(patch, dt, 1.0, cover=cover)
            return patch
        a = run(None)
        b = run(np.zeros(64, dtype=bool))
        assert np.array_equal(a.h, b.h)
        assert np.array_equal(a.hu, b.hu)

    def test_interface_mass_fluxes_are_recorded(self):
        patch = make_lake_patch(n=64, depth=0.0, x_hi=1.0, profile=flat_profile(0.0))
        x = patch.x_centers(include_ghosts=True)
        patch.b[:] = 0.0
        patch.h0[:] = 0.0
        patch.h[:] = np.where(x < 0.5, 2.0, 1.0)
        fill_physical(patch, "extrap", "extrap")
        swe_step(patch, stable_dt(patch, 0.9, 1.0), 1.0)
        assert patch.fmass is not None
        assert patch.fmass.shape[0] == patch.h.shape[0] - 1
        assert np.all(np.isfinite(patch.fmass))
