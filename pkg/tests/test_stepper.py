"""Boundary fills and the split single-grid step."""

import numpy as np
import pytest

from conftest import bumpy_profile, flat_profile, make_lake_patch
from boussamr.core import GHOST
from boussamr.dispersive import B1_DEFAULT
from boussamr.errors import ContractViolation
from boussamr.stepper import (apply_dispersive_source, boundary_conditions,
                              fill_physical, single_grid_step, solve_psi_phase)


class TestBoundaryFills:
    def _edge_patch(self):
        patch = make_lake_patch(n=16, depth=4000.0, x_hi=16_000.0)
        patch.h[patch.interior] = 4000.0
        patch.hu[patch.interior] = 7.0
        patch.psi[:] = 3.0
        return patch

    def test_extrapolation_copies_the_edge_state(self):
        patch = self._edge_patch()
        boundary_conditions(patch, "left", "extrap")
        assert patch.h[0] == 4000.0 and patch.h[1] == 4000.0
        assert patch.hu[0] == 7.0 and patch.hu[1] == 7.0
        assert patch.psi[0] == 0.0 and patch.psi[1] == 0.0
        boundary_conditions(patch, "right", "extrap")
        assert patch.h[-1] == 4000.0 and patch.h[-2] == 4000.0
        assert patch.hu[-1] == 7.0 and patch.hu[-2] == 7.0

    def test_wall_mirrors_depth_and_negates_momentum(self):
        patch = self._edge_patch()
        patch.h[GHOST] = 4000.0
        patch.h[GHOST + 1] = 3999.0
        boundary_conditions(patch, "left", "wall")
        assert patch.hu[1] == -7.0 and patch.hu[0] == -7.0
        assert patch.h[1] == 4000.0 and patch.h[0] == 3999.0
        assert patch.psi[0] == 0.0 and patch.psi[1] == 0.0

    def test_wall_mirrors_the_bathymetry_too(self):
        """The extended problem must be symmetric about the wall face,
        so the ghost bottom is the mirror image of the interior bottom."""
        patch = make_lake_patch(n=16, depth=100.0, x_hi=16_000.0,
                                profile=lambda x: -100.0 + 0.001 * np.asarray(x))
        b_edge = patch.b[GHOST]
        b_next = patch.b[GHOST + 1]
        boundary_conditions(patch, "left", "wall")
        assert patch.b[1] == b_edge
        assert patch.b[0] == b_next

    def test_periodic_wraps_state_and_bathymetry(self):
        patch = make_lake_patch(n=16, depth=100.0, x_hi=16_000.0,
                                profile=lambda x: -100.0 - 0.001 * np.asarray(x))
        patch.h[patch.interior] = np.arange(16, dtype=float) + 1.0
        boundary_conditions(patch, "left", "periodic")
        boundary_conditions(patch, "right", "periodic")
        n = patch.n
        assert np.array_equal(patch.h[0:GHOST], patch.h[n:n + GHOST])
        assert np.array_equal(patch.h[GHOST + n:], patch.h[GHOST:2 * GHOST])
        assert np.array_equal(patch.b[0:GHOST], patch.b[n:n + GHOST])

    def test_unknown_side_or_kind_raises(self):
        patch = self._edge_patch()
        with pytest.raises(ContractViolation):
            boundary_conditions(patch, "top", "extrap")
        with pytest.raises(ContractViolation):
            boundary_conditions(patch, "left", "reflecting")

    def test_flow_only_fill_preserves_psi_ghosts(self):
        patch = self._edge_patch()
        patch.psi[0:GHOST] = 11.0
        patch.psi[GHOST + patch.n:] = 13.0
        fill_physical(patch, "extrap", "extrap", components="flow")
        assert np.all(patch.psi[0:GHOST] == 11.0)
        assert np.all(patch.psi[GHOST + patch.n:] == 13.0)
        assert patch.h[0] == 4000.0  # flow ghosts were still refreshed

    def test_interior_patch_is_left_alone(self):
        geom = make_lake_patch(n=32, depth=10.0, x_hi=3200.0).geom
        from boussamr.core import Bathymetry, Patch
        bathy = Bathymetry(geom, flat_profile(10.0))
        patch = Patch(geom, bathy, 1, 8, 24)
        patch.h[:] = 1.0
        before = patch.h.copy()
        fill_physical(patch, "wall", "wall")
        assert np.array_equal(patch.h, before)


class TestSourceUpdate:
    def test_momentum_gains_dt_times_psi(self):
        patch = make_lake_patch(n=16, depth=100.0, x_hi=1600.0)
        patch.psi[:] = 2.0
        patch.hu[:] = 1.0
        apply_dispersive_source(patch, 0.25)
        assert np.all(patch.hu == 1.5)


class TestSingleGridStep:
    def test_lake_at_rest_with_active_correction_is_bitwise_steady(self):
        """psi solves to exactly zero on still water, so the split step
        reduces to the plain balanced step and changes nothing."""
        patch = make_lake_patch(n=64, depth=4000.0, x_hi=100_000.0,
                                profile=bumpy_profile(4000.0))
        h0 = patch.h.copy()
        counters = {}
        for _ in range(5):
            single_grid_step(patch, 2.0, 9.81, B1_DEFAULT, switch_depth=10.0,
                             dry_tol=1e-3, limiter="mc", boussinesq=True,
                             bc=("extrap", "extrap"), counters=counters)
        assert np.array_equal(patch.h, h0)
        assert np.all(patch.hu == 0.0)
        assert np.all(patch.psi[patch.interior] == 0.0)
        assert counters.get(1, 0) == 5
        assert patch.t == 10.0

    def test_boussinesq_off_never_counts_a_solve(self):
        patch = make_lake_patch(n=64, depth=4000.0, x_hi=100_000.0)
        counters = {}
        single_grid_step(patch, 2.0, 9.81, B1_DEFAULT, switch_depth=10.0,
                         dry_tol=1e-3, limiter="mc", boussinesq=False,
                         bc=("extrap", "extrap"), counters=counters)
        assert counters == {}

    def test_solve_phase_counter_increments_per_level(self):
        patch = make_lake_patch(n=32, depth=4000.0, x_hi=32_000.0)
        fill_physical(patch, "extrap", "extrap")
        counters = {}
        solve_psi_phase(patch, 9.81, B1_DEFAULT, switch_depth=10.0,
                        counters=counters)
        solve_psi_phase(patch, 9.81, B1_DEFAULT, switch_depth=10.0,
                        counters=counters)
        assert counters == {1: 2}
