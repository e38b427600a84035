"""Grid hierarchy data model: patches, bathymetry, inter-level transfer.

The solution lives on a hierarchy of logically rectangular 1D patches.
Level 1 covers the whole domain; each finer level refines the previous
one by an integer factor in both space and time.  Every patch stores
cell averages of (h, hu, psi) with two ghost cells on each side, plus
the bottom elevation B and the still-water depth h0 = max(0, -B) on the
same footprint.

Bathymetry is sampled once at the finest resolution and coarsened by
arithmetic averaging, so that averaging a fine lake-at-rest state onto
a coarse patch reproduces the coarse lake-at-rest state exactly in
floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, NestingError, SynchronizationError

#: Ghost-cell width on each side of a patch.
GHOST = 2


@dataclass
class CellState:
    """Cell-averaged state: depth, momentum, dispersive source."""

    h: float
    hu: float
    psi: float = 0.0

    def validate(self, dry_tol: float = 1e-3) -> None:
        if not np.isfinite([self.h, self.hu, self.psi]).all():
            raise ContractViolation("non-finite cell state")
        if self.h < 0.0:
            raise ContractViolation(f"negative depth {self.h}")
        if self.h <= dry_tol and (self.hu != 0.0 or self.psi != 0.0):
            raise ContractViolation("dry cell carries momentum or source")


@dataclass(frozen=True)
class GridGeometry:
    """Index arithmetic for the refinement hierarchy."""

    x_lo: float
    x_hi: float
    n_base: int
    ratios: tuple[int, ...]

    def __post_init__(self):
        if self.x_hi <= self.x_lo:
            raise ContractViolation("domain has non-positive extent")
        if self.n_base < 1:
            raise ContractViolation("base grid needs at least one cell")
        if any(r < 1 for r in self.ratios):
            raise ContractViolation("refinement ratios must be >= 1")

    @property
    def max_levels(self) -> int:
        return len(self.ratios) + 1

    def refinement(self, level: int) -> int:
        """Cumulative refinement of `level` relative to level 1."""
        r = 1
        for k in range(level - 1):
            r *= self.ratios[k]
        return r

    def ratio_to_finer(self, level: int) -> int:
        return self.ratios[level - 1]

    def ncells(self, level: int) -> int:
        return self.n_base * self.refinement(level)

    def dx(self, level: int) -> float:
        return (self.x_hi - self.x_lo) / self.ncells(level)

    def centers(self, level: int, i_lo: int, i_hi: int) -> np.ndarray:
        dx = self.dx(level)
        return self.x_lo + (np.arange(i_lo, i_hi) + 0.5) * dx


class Bathymetry:
    """Cell-centered bottom elevation on every level of the hierarchy.

    The finest level is sampled from a profile callable (or a two-column
    table); each coarser level is the arithmetic mean of its children,
    taken with the same reduction used to average solution data between
    levels.  h0 = max(0, -B) is derived per level.
    """

    def __init__(self, geom: GridGeometry, profile):
        self.geom = geom
        finest = geom.max_levels
        x_fine = geom.centers(finest, 0, geom.ncells(finest))
        b = np.asarray(profile(x_fine), dtype=float)
        if b.shape != x_fine.shape:
            raise ContractViolation("bathymetry profile must return one value per cell")
        if not np.isfinite(b).all():
            raise ContractViolation("bathymetry contains non-finite values")
        self._b: dict[int, np.ndarray] = {finest: b}
        for level in range(finest - 1, 0, -1):
            r = geom.ratio_to_finer(level)
            self._b[level] = coarsen_mean(self._b[level + 1], r)
        self._h0 = {lev: np.maximum(0.0, -arr) for lev, arr in self._b.items()}

    @classmethod
    def from_file(cls, path, geom: GridGeometry) -> "Bathymetry":
        """Load a two-column "x B" table and interpolate linearly."""
        data = np.loadtxt(path, dtype=float, comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ContractViolation(f"bathymetry file {path} must have two columns (x B)")
        xs, bs = data[:, 0], data[:, 1]
        if np.any(np.diff(xs) <= 0.0):
            raise ContractViolation(f"bathymetry file {path} must have strictly increasing x")
        return cls(geom, lambda x: np.interp(x, xs, bs))

    def slab(self, level: int, i_lo: int, i_hi: int, field_name: str = "b") -> np.ndarray:
        """Values on [i_lo - GHOST, i_hi + GHOST), constant beyond the domain."""
        arr = self._b[level] if field_name == "b" else self._h0[level]
        idx = np.clip(np.arange(i_lo - GHOST, i_hi + GHOST), 0, arr.shape[0] - 1)
        return arr[idx].copy()

    def level_array(self, level: int, field_name: str = "b") -> np.ndarray:
        return self._b[level] if field_name == "b" else self._h0[level]


def coarsen_mean(fine: np.ndarray, r: int) -> np.ndarray:
    """Average groups of r fine cells onto their parent coarse cells."""
    if fine.shape[0] % r != 0:
        raise ContractViolation("fine array length is not a multiple of the ratio")
    if r == 1:
        return fine.copy()
    return fine.reshape(-1, r).mean(axis=1)


def absorb_deficit(h: np.ndarray, deficit: float) -> float:
    """Subtract a (negative) mass deficit from the deepest cells of h.

    Drains cells deepest-first so small clamp deficits never push a
    cell negative; h is modified in place.  Returns the unabsorbed
    remainder (zero unless the whole array holds less water than the
    deficit).
    """
    if deficit >= 0.0:
        return 0.0
    for idx in np.argsort(h)[::-1]:
        take = min(float(h[idx]), -deficit)
        if take <= 0.0:
            break
        h[idx] -= take
        deficit += take
        if deficit >= 0.0:
            return 0.0
    return deficit


class Patch:
    """One logically rectangular slab of a level, with ghost cells.

    Interior cells are global indices [i_lo, i_hi) on the patch's level;
    storage includes GHOST cells per side.  Arrays: h, hu, psi, b, h0.
    """

    def __init__(self, geom: GridGeometry, bathy: Bathymetry, level: int,
                 i_lo: int, i_hi: int, t: float = 0.0):
        if i_hi <= i_lo:
            raise ContractViolation("patch has non-positive width")
        if i_lo < 0 or i_hi > geom.ncells(level):
            raise ContractViolation("patch extends outside the domain")
        self.geom = geom
        self.level = level
        self.i_lo = i_lo
        self.i_hi = i_hi
        self.dx = geom.dx(level)
        self.t = t
        n = i_hi - i_lo + 2 * GHOST
        self.h = np.zeros(n)
        self.hu = np.zeros(n)
        self.psi = np.zeros(n)
        self.b = bathy.slab(level, i_lo, i_hi, "b")
        self.h0 = bathy.slab(level, i_lo, i_hi, "h0")
        # Interface mass fluxes of the most recent hyperbolic step and
        # the time-accumulated edge fluxes (conservation fixup).
        self.fmass: np.ndarray | None = None
        self.mass_flux_left = 0.0
        self.mass_flux_right = 0.0

    @property
    def n(self) -> int:
        return self.i_hi - self.i_lo

    @property
    def interior(self) -> slice:
        return slice(GHOST, GHOST + self.n)

    @property
    def at_domain_left(self) -> bool:
        return self.i_lo == 0

    @property
    def at_domain_right(self) -> bool:
        return self.i_hi == self.geom.ncells(self.level)

    def x_centers(self, include_ghosts: bool = False) -> np.ndarray:
        if include_ghosts:
            return self.geom.x_lo + (np.arange(self.i_lo - GHOST, self.i_hi + GHOST) + 0.5) * self.dx
        return self.geom.centers(self.level, self.i_lo, self.i_hi)

    def eta(self, include_ghosts: bool = False) -> np.ndarray:
        if include_ghosts:
            return self.b + self.h
        s = self.interior
        return self.b[s] + self.h[s]

    def local(self, global_idx) -> np.ndarray:
        """Map global cell indices to positions in this patch's arrays."""
        return np.asarray(global_idx) - (self.i_lo - GHOST)

    def snapshot(self) -> "PatchSnapshot":
        return PatchSnapshot(self.i_lo, self.i_hi, self.t,
                             self.h.copy(), self.hu.copy(), self.psi.copy(), self.b)

    def restore(self, snap: "PatchSnapshot") -> None:
        self.h[:] = snap.h
        self.hu[:] = snap.hu
        self.psi[:] = snap.psi
        self.t = snap.t


@dataclass
class PatchSnapshot:
    """Frozen copy of a patch's state, ghosts included."""

    i_lo: int
    i_hi: int
    t: float
    h: np.ndarray
    hu: np.ndarray
    psi: np.ndarray
    b: np.ndarray  # shared reference; bathymetry is immutable

class LevelSource:
    """Read-only gather view over one level's patches or snapshots.

    Interior data wins over ghost data; ghost zones are consulted only
    for indices no patch interior covers (patch edges at the domain
    boundary, or slope stencils reaching one cell past a patch).
    """

    def __init__(self, records):
        self.records = sorted(records, key=lambda r: r.i_lo)

    def gather(self, name: str, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx)
        out = np.empty(idx.shape, dtype=float)
        missing = np.ones(idx.shape, dtype=bool)
        for rec in self.records:
            arr = getattr(rec, name)
            sel = missing & (idx >= rec.i_lo) & (idx < rec.i_hi)
            if np.any(sel):
                out[sel] = arr[idx[sel] - rec.i_lo + GHOST]
                missing[sel] = False
        if np.any(missing):
            for rec in self.records:
                arr = getattr(rec, name)
                sel = missing & (idx >= rec.i_lo - GHOST) & (idx < rec.i_hi + GHOST)
                if np.any(sel):
                    out[sel] = arr[idx[sel] - rec.i_lo + GHOST]
                    missing[sel] = False
        if np.any(missing):
            bad = np.asarray(idx)[missing]
            raise NestingError(f"no coarse data under cells {bad.tolist()}")
        return out

    @property
    def t(self) -> float:
        return self.records[0].t if self.records else 0.0


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b <= 0.0, 0.0, np.where(np.abs(a) < np.abs(b), a, b))


def interpolate_to_fine(coarse, fine: Patch, targets=None, dry_tol: float = 1e-3):
    """Conservative-in-spirit interpolation of coarse data to fine cells.

    ``coarse`` is a Patch, a PatchSnapshot, a list of either, or a
    LevelSource.  ``targets`` are global fine-level indices (default:
    the fine patch's ghost cells that lie inside the domain).  Surface
    elevation, momentum, and psi are interpolated with minmod-limited
    slopes; depth is recovered as eta - B_fine.  Near wet/dry stencils,
    or when the recovered depth would be negative, the transfer falls
    back to a piecewise-constant copy.  Returns {"h":, "hu":, "psi":}
    and writes the values into the fine patch arrays.

    Raises NestingError if a target is not covered by the coarse data.
    """
    src = coarse if isinstance(coarse, LevelSource) else LevelSource(
        coarse if isinstance(coarse, (list, tuple)) else [coarse])
    geom = fine.geom
    if fine.level < 2:
        raise ContractViolation("interpolation target must be a refined level")
    r = geom.ratio_to_finer(fine.level - 1)

    if targets is None:
        n_level = geom.ncells(fine.level)
        cand = np.concatenate([np.arange(fine.i_lo - GHOST, fine.i_lo),
                               np.arange(fine.i_hi, fine.i_hi + GHOST)])
        targets = cand[(cand >= 0) & (cand < n_level)]
    targets = np.asarray(targets, dtype=int)
    if targets.size == 0:
        return {"h": np.empty(0), "hu": np.empty(0), "psi": np.empty(0)}

    j = targets // r
    local = fine.local(targets)

    if r == 1:
        h_f = src.gather("h", j)
        hu_f = src.gather("hu", j)
        psi_f = src.gather("psi", j)
    else:
        vals = {}
        for name in ("h", "hu", "psi", "b"):
            vals[name] = [src.gather(name, j - 1), src.gather(name, j), src.gather(name, j + 1)]
        eta3 = [vals["b"][k] + vals["h"][k] for k in range(3)]
        wet3 = ((vals["h"][0] > dry_tol) & (vals["h"][1] > dry_tol) & (vals["h"][2] > dry_tol))

        xi = ((targets - j * r) + 0.5) / r - 0.5
        s_eta = _minmod(eta3[1] - eta3[0], eta3[2] - eta3[1])
        s_hu = _minmod(vals["hu"][1] - vals["hu"][0], vals["hu"][2] - vals["hu"][1])
        s_psi = _minmod(vals["psi"][1] - vals["psi"][0], vals["psi"][2] - vals["psi"][1])

        b_f = fine.b[local]
        eta_f = eta3[1] + s_eta * xi
        h_lin = eta_f - b_f
        pc = ~wet3 | (h_lin < 0.0)
        h_f = np.where(pc, vals["h"][1], h_lin)
        hu_f = np.where(pc, vals["hu"][1], vals["hu"][1] + s_hu * xi)
        psi_f = np.where(pc, vals["psi"][1], vals["psi"][1] + s_psi * xi)
        h_f = np.maximum(h_f, 0.0)

    dry_f = h_f <= dry_tol
    hu_f = np.where(dry_f, 0.0, hu_f)
    psi_f = np.where(dry_f, 0.0, psi_f)

    fine.h[local] = h_f
    fine.hu[local] = hu_f
    fine.psi[local] = psi_f
    return {"h": h_f, "hu": hu_f, "psi": psi_f}


def average_to_coarse(fine: Patch, coarse: Patch) -> None:
    """Replace covered coarse cells by the mean of their fine children.

    Only h and hu are averaged; psi is re-derived from its own elliptic
    solve at the start of the next coarse step and is left alone.  Both
    patches must carry the same time stamp.
    """
    if fine.level != coarse.level + 1:
        raise ContractViolation("average_to_coarse expects adjacent levels")
    if fine.t != coarse.t:
        raise SynchronizationError(
            f"averaging levels at different times ({fine.t!r} vs {coarse.t!r})")
    r = fine.geom.ratio_to_finer(coarse.level)
    if fine.i_lo % r != 0 or fine.i_hi % r != 0:
        raise ContractViolation("fine patch is not aligned to coarse cell boundaries")
    j0 = max(fine.i_lo // r, coarse.i_lo)
    j1 = min(fine.i_hi // r, coarse.i_hi)
    if j1 <= j0:
        return
    f0 = fine.local(j0 * r)
    f1 = fine.local(j1 * r)
    c0 = coarse.local(j0)
    c1 = coarse.local(j1)
    coarse.h[c0:c1] = coarsen_mean(fine.h[f0:f1], r)
    coarse.hu[c0:c1] = coarsen_mean(fine.hu[f0:f1], r)


class Hierarchy:
    """All levels of the patch hierarchy plus run-wide counters."""

    def __init__(self, geom: GridGeometry, bathy: Bathymetry):
        self.geom = geom
        self.bathy = bathy
        self.levels: list[list[Patch]] = [[] for _ in range(geom.max_levels)]
        self.elliptic_solves: dict[int, int] = {lev: 0 for lev in range(1, geom.max_levels + 1)}

    def patches(self, level: int) -> list[Patch]:
        return self.levels[level - 1]

    @property
    def nlevels(self) -> int:
        return self.geom.max_levels

    def all_patches(self):
        for level_patches in self.levels:
            yield from level_patches

    @property
    def finest_active_level(self) -> int:
        for level in range(self.geom.max_levels, 0, -1):
            if self.levels[level - 1]:
                return level
        return 0

    def time(self) -> float:
        return self.levels[0][0].t

    def coverage(self, level: int) -> list[tuple[int, int]]:
        """Sorted interior index ranges covered by a level's patches."""
        return sorted((p.i_lo, p.i_hi) for p in self.patches(level))

    def composite_mass(self, dry_tol: float = 0.0) -> float:
        """Total water volume, evaluated on level 1 after synchronization."""
        total = 0.0
        for p in self.patches(1):
            total += float(np.sum(p.h[p.interior])) * p.dx
        return total

    def check_nesting(self) -> None:
        """Every fine interior, coarsened and padded by one parent cell,
        must lie inside its parent level (domain boundaries excepted).

        The one-cell margin guarantees each fine-patch edge abuts an
        uncovered parent cell, so the edge-flux conservation fixup
        always has a cell to correct.
        """
        for level in range(2, self.geom.max_levels + 1):
            r = self.geom.ratio_to_finer(level - 1)
            parent = self.coverage(level - 1)
            n_parent = self.geom.ncells(level - 1)
            for p in self.patches(level):
                lo, hi = p.i_lo // r, -(-p.i_hi // r)
                lo = max(lo - 1, 0)
                hi = min(hi + 1, n_parent)
                if not _range_covered(lo, hi, parent):
                    raise NestingError(
                        f"level {level} patch [{p.i_lo},{p.i_hi}) not nested in level {level - 1}")

    def snapshot_level(self, level: int) -> LevelSource:
        return LevelSource([p.snapshot() for p in self.patches(level)])


def _range_covered(lo: int, hi: int, ranges) -> bool:
    pos = lo
    for a, b in ranges:
        if a <= pos < b:
            pos = b
        if pos >= hi:
            return True
    return pos >= hi
