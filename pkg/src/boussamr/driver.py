"""Run orchestration: config -> hierarchy -> time loop -> output files.

The driver owns dt selection (CFL target with reject/retry), the regrid
cadence, frame/gauge output, and the run manifest with its conservation
ledger.  All loops iterate patches in level/index order so repeated runs
of the same config are bit-identical.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import amr, io, scenarios, swe
from .config import RunConfig
from .core import Bathymetry, GridGeometry, Hierarchy, Patch, average_to_coarse
from .errors import CflViolation, NumericalError, SingularSystemError

#: Retry budget for CFL-rejected steps before giving up.
MAX_RETRIES = 10

#: Relative slack when deciding the run has reached t_final.
_TIME_EPS = 1e-12


@dataclass
class RunResult:
    """Summary of one completed (or aborted) run."""

    config: RunConfig
    hierarchy: Hierarchy
    out_dir: str | None
    n_coarse_steps: int
    t_end: float
    mass_initial: float
    mass_final: float
    mass_rel_drift: float
    elliptic_solves: dict
    max_abs_eta_initial: float
    max_abs_eta_peak: float
    max_abs_hu_final: float
    wall_time: float
    frames: list = field(default_factory=list)
    error: str | None = None


def max_abs_eta(hier: Hierarchy, dry_tol: float) -> float:
    """Largest |surface elevation| over wet cells of every patch."""
    peak = 0.0
    for p in hier.all_patches():
        s = p.interior
        h = p.h[s]
        wet = h > dry_tol
        if np.any(wet):
            peak = max(peak, float(np.max(np.abs((p.b[s] + h)[wet]))))
    return peak


def max_abs_hu(hier: Hierarchy) -> float:
    peak = 0.0
    for p in hier.all_patches():
        arr = p.hu[p.interior]
        if arr.size:
            peak = max(peak, float(np.max(np.abs(arr))))
    return peak


def max_abs_psi(hier: Hierarchy) -> float:
    peak = 0.0
    for p in hier.all_patches():
        arr = p.psi[p.interior]
        if arr.size:
            peak = max(peak, float(np.max(np.abs(arr))))
    return peak


class Simulation:
    """A configured hierarchy plus the time loop that advances it."""

    def __init__(self, cfg: RunConfig, setup: scenarios.ScenarioSetup | None = None):
        cfg.validate()
        self.cfg = cfg
        self.setup = setup if setup is not None else scenarios.build_scenario(cfg)
        self.geom = GridGeometry(cfg.x_lo, cfg.x_hi, cfg.base_cells, cfg.ratios)
        if cfg.bathymetry_file:
            self.bathy = Bathymetry.from_file(cfg.bathymetry_file, self.geom)
        else:
            self.bathy = Bathymetry(self.geom, self.setup.profile)
        self.hier = Hierarchy(self.geom, self.bathy)

        base = Patch(self.geom, self.bathy, 1, 0, cfg.base_cells, 0.0)
        self._init_patch(base)
        self.hier.levels[0] = [base]
        if cfg.max_levels > 1:
            amr.flag_and_regrid(self.hier, cfg, init_funcs=self._init_patch)
            self._sync_down()
        amr.fill_all_ghosts_synced(self.hier, cfg)

        self.gauges = io.GaugeRecorder(cfg.gauges)
        self.n_coarse_steps = 0
        self.mass_initial = self.hier.composite_mass()
        self.max_abs_eta_initial = max_abs_eta(self.hier, cfg.dry_tolerance)
        self.max_abs_eta_peak = self.max_abs_eta_initial

    def _init_patch(self, patch: Patch) -> None:
        self.setup.init_patch(patch, self.cfg.dry_tolerance)

    def _sync_down(self) -> None:
        """Average every fine level onto its parent (composite init state)."""
        for level in range(self.hier.geom.max_levels, 1, -1):
            for fp in self.hier.patches(level):
                for cp in self.hier.patches(level - 1):
                    average_to_coarse(fp, cp)

    @property
    def t(self) -> float:
        return self.hier.time()

    def stable_coarse_dt(self) -> float:
        """Coarse dt so every level meets the Courant target."""
        dt = math.inf
        for level in range(1, self.geom.max_levels + 1):
            refinement = self.geom.refinement(level)
            for p in self.hier.patches(level):
                sdt = swe.stable_dt(p, self.cfg.cfl_target, self.cfg.g, self.cfg.dry_tolerance)
                dt = min(dt, sdt * refinement)
        return dt

    def step(self, dt: float) -> float:
        """One coarse step with rollback/retry on CFL rejection.

        Returns the dt actually taken (the retry path shrinks it).
        """
        for _ in range(MAX_RETRIES):
            snaps = [(p, p.snapshot()) for p in self.hier.all_patches()]
            counters = dict(self.hier.elliptic_solves)
            try:
                amr.advance_hierarchy(self.hier, 1, dt, self.cfg)
            except CflViolation as err:
                for p, snap in snaps:
                    p.restore(snap)
                self.hier.elliptic_solves = counters
                dt = 0.9 * dt * self.cfg.cfl_target / err.courant
                continue
            self.n_coarse_steps += 1
            self.max_abs_eta_peak = max(
                self.max_abs_eta_peak, max_abs_eta(self.hier, self.cfg.dry_tolerance))
            return dt
        raise NumericalError(f"step rejected {MAX_RETRIES} times (dt={dt})")

    def maybe_regrid(self) -> None:
        cfg = self.cfg
        if cfg.max_levels > 1 and cfg.regrid_interval > 0 \
                and self.n_coarse_steps % cfg.regrid_interval == 0:
            amr.flag_and_regrid(self.hier, cfg)

    def advance(self, t_stop: float, n_steps: int | None = None,
                on_step=None) -> None:
        """March coarse steps until t_stop (or for exactly n_steps)."""
        steps_taken = 0
        scale = max(abs(t_stop), 1.0)
        while (n_steps is not None and steps_taken < n_steps) or \
                (n_steps is None and self.t < t_stop - _TIME_EPS * scale):
            dt = self.stable_coarse_dt()
            if math.isinf(dt):
                raise NumericalError("no wet cells anywhere; nothing to advance")
            if n_steps is None:
                dt = min(dt, t_stop - self.t)
            self.step(dt)
            steps_taken += 1
            self.gauges.record(self.hier)
            if on_step is not None:
                on_step(self)
            self.maybe_regrid()

    def run(self, out_dir: str | None = None, n_steps: int | None = None,
            quiet: bool = True) -> RunResult:
        """Advance to t_final (or n_steps), writing frames/gauges/manifest.

        On a numerical failure the last valid frame and the manifest
        are still flushed before the error propagates.
        """
        cfg = self.cfg
        t_start = time.perf_counter()
        frames: list = []
        frame_idx = 0

        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            frames.extend(io.write_frame(out_dir, frame_idx, self.hier))
            frame_idx += 1
        self.gauges.record(self.hier)

        out_times: list[float] = []
        if out_dir is not None and cfg.output_interval > 0.0 and n_steps is None:
            k = 1
            while k * cfg.output_interval < cfg.t_final * (1.0 - _TIME_EPS):
                out_times.append(k * cfg.output_interval)
                k += 1
        error: str | None = None
        try:
            if n_steps is not None:
                self.advance(math.inf, n_steps=n_steps)
            else:
                for t_out in out_times:
                    self.advance(t_out)
                    if out_dir is not None:
                        frames.extend(io.write_frame(out_dir, frame_idx, self.hier))
                        frame_idx += 1
                self.advance(cfg.t_final)
        except (NumericalError, SingularSystemError) as err:
            error = f"{type(err).__name__}: {err}"
        if out_dir is not None:
            frames.extend(io.write_frame(out_dir, frame_idx, self.hier))

        wall = time.perf_counter() - t_start
        mass_final = self.hier.composite_mass()
        denom = abs(self.mass_initial) if self.mass_initial != 0.0 else 1.0
        result = RunResult(
            config=cfg,
            hierarchy=self.hier,
            out_dir=out_dir,
            n_coarse_steps=self.n_coarse_steps,
            t_end=self.t,
            mass_initial=self.mass_initial,
            mass_final=mass_final,
            mass_rel_drift=abs(mass_final - self.mass_initial) / denom,
            elliptic_solves=dict(self.hier.elliptic_solves),
            max_abs_eta_initial=self.max_abs_eta_initial,
            max_abs_eta_peak=self.max_abs_eta_peak,
            max_abs_hu_final=max_abs_hu(self.hier),
            wall_time=wall,
            frames=frames,
            error=error,
        )
        if out_dir is not None:
            self.gauges.write(out_dir)
            io.write_manifest(out_dir, cfg, self._ledger(result))
        if error is not None:
            raise NumericalError(error)
        if not quiet:
            print(f"{cfg.scenario}: {self.n_coarse_steps} coarse steps to "
                  f"t={self.t:g}, mass drift {result.mass_rel_drift:.3e}, "
                  f"{wall:.2f}s")
        return result

    def _ledger(self, result: RunResult) -> dict:
        from .kernels import backend_name

        return {
            "t_end": result.t_end,
            "n_coarse_steps": result.n_coarse_steps,
            "mass_initial": result.mass_initial,
            "mass_final": result.mass_final,
            "mass_rel_drift": result.mass_rel_drift,
            "elliptic_solves": {str(k): v for k, v in result.elliptic_solves.items()},
            "max_abs_eta_initial": result.max_abs_eta_initial,
            "max_abs_eta_peak": result.max_abs_eta_peak,
            "max_abs_hu_final": result.max_abs_hu_final,
            "wall_time": result.wall_time,
            "kernel_backend": backend_name(),
            "status": "aborted" if result.error else "completed",
            "error": result.error,
        }


def run_config(cfg: RunConfig, out_dir: str | None = None,
               n_steps: int | None = None, quiet: bool = True) -> RunResult:
    """Convenience wrapper: build a Simulation and run it."""
    return Simulation(cfg).run(out_dir=out_dir, n_steps=n_steps, quiet=quiet)
