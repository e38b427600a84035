"""Patch-based mesh refinement: subcycled advance, ghost exchange, regridding.

One coarse step with a finer level present runs as:

1. fill coarse ghosts, solve coarse psi (elliptic solve #1), snapshot
   Q^N with that fresh psi;
2. source + hyperbolic step on the coarse level;
3. re-fill ghosts at the new time and solve a provisional psi~ on the
   post-step state (elliptic solve #2), snapshot Q~;
4. advance the fine level r times with dt/r; each fine sub-step fills
   its ghosts from the time interpolant
       (1 - theta) I(Q^N) + theta I(Q~),   theta = elapsed/dt,
   where I is the spatial interpolation to fine cells;
5. force the fine time stamps to the coarse time and average fine
   (h, hu) onto covered coarse cells.  psi is never averaged; the
   provisional psi~ is discarded when the next coarse step re-solves.

Applied recursively, every level with a finer neighbor pays exactly two
elliptic solves per step on that level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import stepper
from .core import (GHOST, Hierarchy, LevelSource, Patch, absorb_deficit,
                   average_to_coarse,
                   interpolate_to_fine)
from .errors import ContractViolation, SynchronizationError


@dataclass
class LevelContext:
    """Parent-level time bracket used to fill a fine level's ghosts."""

    snap_start: LevelSource
    snap_end: LevelSource
    t_start: float
    dt: float

    def theta(self, t_query: float) -> float:
        th = (t_query - self.t_start) / self.dt
        if th < -1e-6 or th > 1.0 + 1e-6:
            raise ContractViolation(f"ghost query time outside coarse bracket (theta={th})")
        return min(max(th, 0.0), 1.0)


def fine_ghost_bc(fine: Patch, t_query: float, snap_start: LevelSource,
                  snap_end: LevelSource, t_start: float, dt: float,
                  dry_tol: float = 1e-3, targets=None) -> dict:
    """Fill a fine patch's ghost cells from the coarse time bracket.

    Interpolates each snapshot to the fine cells, then blends with
    theta = (t_query - t_start)/dt.  theta = 0 and 1 return the pure
    spatial interpolants exactly (no blend arithmetic).  Returns the
    ghost values and writes them into the patch.
    """
    ctx = LevelContext(snap_start, snap_end, t_start, dt)
    theta = ctx.theta(t_query)
    if targets is None:
        geom = fine.geom
        n_level = geom.ncells(fine.level)
        cand = np.concatenate([np.arange(fine.i_lo - GHOST, fine.i_lo),
                               np.arange(fine.i_hi, fine.i_hi + GHOST)])
        targets = cand[(cand >= 0) & (cand < n_level)]
    targets = np.asarray(targets, dtype=int)
    if theta == 0.0:
        return interpolate_to_fine(snap_start, fine, targets, dry_tol=dry_tol)
    if theta == 1.0:
        return interpolate_to_fine(snap_end, fine, targets, dry_tol=dry_tol)
    v0 = interpolate_to_fine(snap_start, fine, targets, dry_tol=dry_tol)
    v1 = interpolate_to_fine(snap_end, fine, targets, dry_tol=dry_tol)
    # Blend in difference form: when the two interpolants agree bitwise
    # (a steady state) the ghost value reproduces them exactly for any
    # theta, so time interpolation cannot disturb an equilibrium.
    h = v0["h"] + theta * (v1["h"] - v0["h"])
    hu = v0["hu"] + theta * (v1["hu"] - v0["hu"])
    psi = v0["psi"] + theta * (v1["psi"] - v0["psi"])
    dry = h <= dry_tol
    hu = np.where(dry, 0.0, hu)
    psi = np.where(dry, 0.0, psi)
    local = fine.local(targets)
    fine.h[local] = h
    fine.hu[local] = hu
    fine.psi[local] = psi
    return {"h": h, "hu": hu, "psi": psi}


def _sibling_fill(patch: Patch, siblings: list[Patch]) -> np.ndarray:
    """Copy ghost values covered by sibling interiors; return their indices."""
    geom = patch.geom
    n_level = geom.ncells(patch.level)
    cand = np.concatenate([np.arange(patch.i_lo - GHOST, patch.i_lo),
                           np.arange(patch.i_hi, patch.i_hi + GHOST)])
    cand = cand[(cand >= 0) & (cand < n_level)]
    covered = np.zeros(cand.shape, dtype=bool)
    for sib in siblings:
        if sib is patch:
            continue
        sel = (cand >= sib.i_lo) & (cand < sib.i_hi)
        if np.any(sel):
            src = cand[sel] - (sib.i_lo - GHOST)
            dst = patch.local(cand[sel])
            patch.h[dst] = sib.h[src]
            patch.hu[dst] = sib.hu[src]
            patch.psi[dst] = sib.psi[src]
            covered[sel] = True
    return cand[~covered]


def fill_level_ghosts(hier: Hierarchy, level: int, cfg, ctx: LevelContext | None) -> None:
    """Two-phase ghost fill for every patch of a level.

    Priority: sibling interiors > coarse interpolation (time bracket) >
    physical boundary conditions for out-of-domain ghosts.  All patches
    are filled before any is stepped, so the exchange is order
    independent.
    """
    patches = hier.patches(level)
    for p in patches:
        stepper.fill_physical(p, cfg.boundary_left, cfg.boundary_right)
        remaining = _sibling_fill(p, patches)
        if remaining.size:
            if level == 1:
                continue  # level 1 has no coarser data; physical fill covered it
            if ctx is None:
                raise ContractViolation("fine level needs a coarse time bracket")
            fine_ghost_bc(p, p.t, ctx.snap_start, ctx.snap_end, ctx.t_start, ctx.dt,
                          dry_tol=cfg.dry_tolerance, targets=remaining)


def fill_level_ghosts_synced(hier: Hierarchy, level: int, cfg) -> None:
    """Ghost fill when all levels sit at the same time (no time bracket)."""
    patches = hier.patches(level)
    for p in patches:
        stepper.fill_physical(p, cfg.boundary_left, cfg.boundary_right)
        remaining = _sibling_fill(p, patches)
        if remaining.size and level > 1:
            src = LevelSource([q for q in hier.patches(level - 1)])
            interpolate_to_fine(src, p, remaining, dry_tol=cfg.dry_tolerance)


def fill_all_ghosts_synced(hier: Hierarchy, cfg) -> None:
    for level in range(1, hier.geom.max_levels + 1):
        if hier.patches(level):
            fill_level_ghosts_synced(hier, level, cfg)


def advance_hierarchy(hier: Hierarchy, level: int, dt: float, cfg,
                      ctx: LevelContext | None = None) -> float:
    """Advance one level (and, recursively, all finer ones) by dt.

    Returns the maximum wave speed observed anywhere below this level,
    for the driver's next dt estimate.  Raises CflViolation if any
    patch exceeded the stable Courant number; the caller owns rollback.
    """
    patches = hier.patches(level)
    if not patches:
        return 0.0
    geom = hier.geom
    finer = hier.patches(level + 1) if level < geom.max_levels else []
    t0 = patches[0].t
    cyclic = (level == 1 and len(patches) == 1
              and cfg.boundary_left == "periodic" and cfg.boundary_right == "periodic")

    fill_level_ghosts(hier, level, cfg, ctx)
    solved = [stepper.solve_psi_phase(p, cfg.g, cfg.b1, cfg.switch_depth,
                                      dry_tol=cfg.dry_tolerance, boussinesq=cfg.boussinesq,
                                      cyclic=cyclic, counters=hier.elliptic_solves)
              for p in patches]
    snap_start = hier.snapshot_level(level) if finer else None

    max_speed = 0.0
    bc = (cfg.boundary_left, cfg.boundary_right)
    covers = _cover_masks(patches, finer, geom.ratio_to_finer(level) if finer else 1)
    for p, s, cov in zip(patches, solved, covers):
        speed = stepper.hyperbolic_phase(p, dt, s, cfg.g, dry_tol=cfg.dry_tolerance,
                                         limiter=cfg.limiter, bc=bc, cover=cov)
        max_speed = max(max_speed, speed)

    if level >= 2:
        # Edge-flux tallies for the parent's conservation fixup.
        for p in patches:
            p.mass_flux_left += dt * p.fmass[GHOST - 1]
            p.mass_flux_right += dt * p.fmass[GHOST + p.n - 1]

    if finer:
        # Provisional elliptic solve on the post-step state: the second
        # coarse-level solve of the step, defining the theta = 1 end of
        # the fine-ghost time bracket.
        fill_level_ghosts(hier, level, cfg, ctx)
        for p in patches:
            stepper.solve_psi_phase(p, cfg.g, cfg.b1, cfg.switch_depth,
                                    dry_tol=cfg.dry_tolerance, boussinesq=cfg.boussinesq,
                                    cyclic=cyclic, counters=hier.elliptic_solves)
        snap_end = hier.snapshot_level(level)
        sub_ctx = LevelContext(snap_start, snap_end, t0, dt)
        r = geom.ratio_to_finer(level)
        for fp in finer:
            fp.mass_flux_left = 0.0
            fp.mass_flux_right = 0.0
        for _ in range(r):
            speed = advance_hierarchy(hier, level + 1, dt / r, cfg, sub_ctx)
            max_speed = max(max_speed, speed)
        # Accumulated fine sub-step times can differ from the coarse
        # time by rounding; stamp every finer level (the recursion has
        # already finished below us) with this level's time.
        for deeper in hier.levels[level:]:
            for fp in deeper:
                fp.t = patches[0].t
        for fp in finer:
            for cp in patches:
                average_to_coarse(fp, cp)
        _mass_reflux(hier, level, dt, finer)
    return max_speed


def _owner_patch(patches: list[Patch], cell: int) -> Patch | None:
    for p in patches:
        if p.i_lo <= cell < p.i_hi:
            return p
    return None


def _cover_masks(patches: list[Patch], finer: list[Patch],
                 r: int) -> list[np.ndarray | None]:
    """Per-patch bool masks (one entry per interior cell) of finer coverage.

    None for a patch with no covered cells, so the single-grid clamp
    path stays bit-identical.
    """
    masks: list[np.ndarray | None] = []
    for p in patches:
        mask = None
        for fp in finer:
            lo = max(fp.i_lo // r, p.i_lo)
            hi = min(fp.i_hi // r, p.i_hi)
            if lo < hi:
                if mask is None:
                    mask = np.zeros(p.n, dtype=bool)
                mask[lo - p.i_lo:hi - p.i_lo] = True
        masks.append(mask)
    return masks


def _mass_reflux(hier: Hierarchy, level: int, dt: float, finer: list[Patch]) -> None:
    """Conservation fixup at coarse/fine edges.

    The uncovered coarse cell next to each fine-patch edge saw the
    coarse interface flux during its own step; replace that flux's mass
    contribution by the time-accumulated fine edge fluxes, so the
    composite total of h*dx telescopes exactly.
    """
    geom = hier.geom
    r = geom.ratio_to_finer(level)
    dxc = geom.dx(level)
    n_level = geom.ncells(level)
    patches = hier.patches(level)
    # A patch edge abutting a sibling patch is interior to the fine
    # level: the neighbor coarse cell is covered, its averaged value is
    # already authoritative, and it must not be flux-corrected.
    fine_cover = np.zeros(n_level, dtype=bool)
    for fp in finer:
        fine_cover[fp.i_lo // r:fp.i_hi // r] = True
    touched = []
    for fp in finer:
        gl = fp.i_lo // r
        gr = fp.i_hi // r
        if gl > 0 and not fine_cover[gl - 1]:
            cp = _owner_patch(patches, gl - 1)
            if cp is not None and cp.fmass is not None:
                k = gl - cp.i_lo + GHOST
                cp.h[k - 1] += (dt * cp.fmass[k - 1] - fp.mass_flux_left) / dxc
                touched.append(cp)
        if gr < n_level and not fine_cover[gr]:
            cp = _owner_patch(patches, gr)
            if cp is not None and cp.fmass is not None:
                k = gr - cp.i_lo + GHOST
                cp.h[k] += (fp.mass_flux_right - dt * cp.fmass[k - 1]) / dxc
                touched.append(cp)
    # An edge cell that is nearly dry can be driven below zero by the
    # fixup; drain the deficit from the patch's deepest *uncovered*
    # cells (the fixup only writes uncovered cells, and a drain from a
    # covered cell would be erased by the fine average, changing the
    # composite total).
    for cp in touched:
        s = cp.interior
        h_int = cp.h[s]
        unc = np.flatnonzero(~fine_cover[cp.i_lo:cp.i_hi])
        sub = h_int[unc]
        if sub.size and float(np.min(sub)) < 0.0:
            deficit = float(np.sum(np.minimum(sub, 0.0)))
            np.maximum(sub, 0.0, out=sub)
            absorb_deficit(sub, deficit)
            h_int[unc] = sub
            cp.hu[s][unc[sub <= 0.0]] = 0.0


# ---------------------------------------------------------------------------
# Regridding


def flag_cells(patch: Patch, cfg) -> np.ndarray:
    """Global indices of interior cells needing refinement.

    A wet cell is flagged when its surface deviates from still water by
    more than amplitude_tol or jumps by more than gradient_tol across a
    neighboring face.  Ghosts must be filled.
    """
    s = patch.interior
    eta = patch.b + patch.h
    wet = patch.h > cfg.dry_tolerance
    wet_l = wet[GHOST - 1:GHOST - 1 + patch.n]
    wet_r = wet[GHOST + 1:GHOST + 1 + patch.n]
    amp = np.abs(eta[s]) > cfg.amplitude_tol
    jump_l = wet_l & (np.abs(eta[s] - eta[GHOST - 1:GHOST - 1 + patch.n]) > cfg.gradient_tol)
    jump_r = wet_r & (np.abs(eta[GHOST + 1:GHOST + 1 + patch.n] - eta[s]) > cfg.gradient_tol)
    flagged = wet[s] & (amp | jump_l | jump_r)
    return np.arange(patch.i_lo, patch.i_hi)[flagged]


def _region_cells(geom, level: int, x0: float, x1: float) -> tuple[int, int]:
    dx = geom.dx(level)
    i0 = int(np.floor((x0 - geom.x_lo) / dx))
    i1 = int(np.ceil((x1 - geom.x_lo) / dx))
    return max(i0, 0), min(i1, geom.ncells(level))


def _cluster(flag_idx: np.ndarray, gap: int = 2) -> list[tuple[int, int]]:
    """Greedy 1D clustering: merge flagged runs separated by <= gap."""
    if flag_idx.size == 0:
        return []
    runs = []
    start = prev = int(flag_idx[0])
    for i in flag_idx[1:]:
        i = int(i)
        if i - prev <= gap + 1:
            prev = i
        else:
            runs.append((start, prev + 1))
            start = prev = i
    runs.append((start, prev + 1))
    return runs


def _coverage_mask(geom, level: int, patches: list[Patch]) -> np.ndarray:
    mask = np.zeros(geom.ncells(level), dtype=bool)
    for p in patches:
        mask[p.i_lo:p.i_hi] = True
    return mask


def flag_and_regrid(hier: Hierarchy, cfg, init_funcs=None) -> Hierarchy:
    """Rebuild levels 2..max from fresh flags; returns the hierarchy.

    Requires a synchronized hierarchy.  New patches are initialized
    analytically when ``init_funcs`` is given (initial construction),
    otherwise by copying old same-level data where it existed and
    interpolating from the new parent level elsewhere.  An empty flag
    set removes the level (and implicitly everything finer).
    """
    geom = hier.geom
    t_all = [p.t for lev in hier.levels for p in lev]
    if t_all and (max(t_all) != min(t_all)):
        raise SynchronizationError("regridding requires a synchronized hierarchy")
    t_now = t_all[0] if t_all else 0.0

    fill_all_ghosts_synced(hier, cfg)

    for level in range(1, geom.max_levels):
        parents = hier.patches(level)
        fine_level = level + 1
        old_fine = hier.patches(fine_level)
        if not parents:
            hier.levels[fine_level - 1] = []
            continue

        flags = np.zeros(geom.ncells(level), dtype=bool)
        for p in parents:
            flags[flag_cells(p, cfg)] = True
        for x0, x1, min_lev, max_lev in cfg.static_regions:
            i0, i1 = _region_cells(geom, level, x0, x1)
            if min_lev >= fine_level:
                flags[i0:i1] = True
        if np.any(flags):
            idx = np.flatnonzero(flags)
            lo = np.maximum(idx - cfg.flag_buffer, 0)
            hi = np.minimum(idx + cfg.flag_buffer + 1, geom.ncells(level))
            buffered = np.zeros_like(flags)
            for a, b in zip(lo, hi):
                buffered[a:b] = True
            flags = buffered
        for x0, x1, min_lev, max_lev in cfg.static_regions:
            if max_lev < fine_level:
                i0, i1 = _region_cells(geom, level, x0, x1)
                flags[i0:i1] = False
        # Proper nesting: stop one parent cell short of any parent-patch
        # edge (domain boundaries excepted).  A fine edge coinciding
        # with a parent edge leaves no uncovered parent cell to receive
        # the conservation fixup, and the flux mismatch leaks mass.
        cover = _coverage_mask(geom, level, parents)
        allow = cover.copy()
        allow[1:] &= cover[:-1]
        allow[:-1] &= cover[1:]
        flags &= allow

        runs = _cluster(np.flatnonzero(flags))
        r = geom.ratio_to_finer(level)
        new_patches = []
        for a, b in runs:
            fp = Patch(geom, hier.bathy, fine_level, a * r, b * r, t_now)
            _init_new_patch(fp, hier, old_fine, level, cfg, init_funcs)
            new_patches.append(fp)
        hier.levels[fine_level - 1] = new_patches
        if new_patches:
            fill_level_ghosts_synced(hier, fine_level, cfg)

    hier.check_nesting()
    return hier


def _init_new_patch(fp: Patch, hier: Hierarchy, old_fine: list[Patch],
                    level: int, cfg, init_funcs) -> None:
    """Fill a regridded patch: analytic at t=0, else copy/interpolate."""
    if init_funcs is not None:
        init_funcs(fp)
        s = fp.interior
        dry = fp.h[s] <= cfg.dry_tolerance
        fp.hu[GHOST:GHOST + fp.n][dry] = 0.0
        fp.psi[s] = 0.0
        return
    interior = np.arange(fp.i_lo, fp.i_hi)
    missing = np.ones(interior.shape, dtype=bool)
    for old in old_fine:
        sel = missing & (interior >= old.i_lo) & (interior < old.i_hi)
        if np.any(sel):
            src = interior[sel] - (old.i_lo - GHOST)
            dst = fp.local(interior[sel])
            fp.h[dst] = old.h[src]
            fp.hu[dst] = old.hu[src]
            fp.psi[dst] = old.psi[src]
            missing[sel] = False
    if np.any(missing):
        src = LevelSource(hier.patches(level))
        cells = interior[missing]
        interpolate_to_fine(src, fp, cells, dry_tol=cfg.dry_tolerance)
        _match_parent_mass(fp, src, cells, hier.geom.ratio_to_finer(level),
                           cfg.dry_tolerance)


def _match_parent_mass(fp: Patch, src: LevelSource, cells: np.ndarray,
                       r: int, dry_tol: float) -> None:
    """Force each parent cell's interpolated children to its exact mean depth.

    The wet/dry fallback in interpolation can mix per-child linear and
    piecewise-constant values, so the children's mean can differ from
    the parent depth; the difference would surface as a mass jump when
    the fine level is next averaged down.  Shrink wet children
    proportionally (never wetting a dry cell) or spread a shortfall
    evenly, then re-zero momentum in cells left dry.
    """
    if r == 1 or cells.size == 0:
        return
    parents, counts = np.unique(cells // r, return_counts=True)
    for j, cnt in zip(parents, counts):
        if cnt != r:
            continue  # partial parent (should not happen for aligned runs)
        hc = float(src.gather("h", np.array([j]))[0])
        lo = fp.local(j * r)
        v = fp.h[lo:lo + r]
        target = r * hc
        s = float(np.sum(v))
        if s == target:
            continue
        if s > target and s > 0.0:
            v *= target / s
        else:
            v += (target - s) / r
        dry = v <= dry_tol
        fp.hu[lo:lo + r][dry] = 0.0
        fp.psi[lo:lo + r][dry] = 0.0
