"""Well-balanced shallow-water finite-volume layer.

Wave-propagation form with an f-wave decomposition at each interface:
the bottom slope enters the interface momentum jump as g*hbar*(eta_R -
eta_L), so a lake at rest yields exact zero fluctuations and stays
still to machine precision over arbitrary bathymetry.  Second-order
limited corrections apply away from wet/dry fronts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import GHOST, CellState, Patch, absorb_deficit
from .errors import CflViolation, ContractViolation, NumericalError

#: Courant slack: a step is rejected only if it exceeds 1 by more than this.
_CFL_EPS = 1e-12


@dataclass
class RiemannFluctuations:
    """Left- and right-going f-wave fluctuations at one interface."""

    left_going: np.ndarray   # (dh, dhu) entering the left cell
    right_going: np.ndarray  # (dh, dhu) entering the right cell
    max_speed: float


def _limiter_code(name: str) -> int:
    if name == "minmod":
        return kernels.LIMITER_MINMOD
    if name == "mc":
        return kernels.LIMITER_MC
    raise ContractViolation(f"unknown limiter {name!r} (want 'mc' or 'minmod')")


def riemann_wellbalanced(q_left: CellState, q_right: CellState,
                         b_left: float, b_right: float,
                         g: float, dry_tol: float = 1e-3) -> RiemannFluctuations:
    """Solve one interface Riemann problem with topography source terms."""
    if q_left.h < 0.0 or q_right.h < 0.0:
        raise ContractViolation("negative input depth in Riemann problem")
    h = np.array([q_left.h, q_right.h])
    hu = np.array([q_left.hu, q_right.hu])
    b = np.array([b_left, b_right])
    amdq_h, amdq_hu, apdq_h, apdq_hu, _, _, s1, s2 = kernels.fwave_fluctuations(h, hu, b, g, dry_tol)
    return RiemannFluctuations(
        left_going=np.array([amdq_h[0], amdq_hu[0]]),
        right_going=np.array([apdq_h[0], apdq_hu[0]]),
        max_speed=float(max(abs(s1[0]), abs(s2[0]))),
    )


def swe_step(patch: Patch, dt: float, g: float, dry_tol: float = 1e-3,
             limiter: str = "mc", cover: np.ndarray | None = None) -> float:
    """Advance a patch's (h, hu) by one hyperbolic step of size dt.

    Ghost cells must be filled beforehand.  Only interior cells are
    committed.  Raises CflViolation (leaving the patch untouched) when
    the observed Courant number exceeds one; raises NumericalError if
    the update produced a meaningfully negative depth.  Returns the
    maximum wave speed seen during the sweep and stores the interface
    mass fluxes on the patch (patch.fmass) for the coarse/fine
    conservation fixup.

    ``cover`` (bool, one entry per interior cell) marks cells covered by
    a finer level.  Negative-depth deficits are then drained within each
    coverage class separately: a drain that crossed the covered/
    uncovered boundary would be erased when the fine average overwrites
    the covered cells, silently changing the composite total.
    """
    if dt <= 0.0:
        raise ContractViolation("dt must be positive")
    h_new, hu_new, max_speed, fmass = kernels.swe_sweep(
        patch.h, patch.hu, patch.b, g, patch.dx, dt, dry_tol, _limiter_code(limiter))
    courant = max_speed * dt / patch.dx
    if courant > 1.0 + _CFL_EPS:
        raise CflViolation(max_speed, courant)

    s = patch.interior
    h_int = h_new[s]
    hu_int = hu_new[s]
    if not (np.all(np.isfinite(h_int)) and np.all(np.isfinite(hu_int))):
        raise NumericalError("non-finite state after hyperbolic step")
    min_h = float(np.min(h_int)) if h_int.size else 0.0
    if min_h < 0.0:
        # Small negative depths are routine overshoots at wet/dry
        # fronts: zero them and drain the deficit from the deepest
        # cells so total mass is unchanged.  A deficit that is a
        # meaningful fraction of the patch's water is a blown-up
        # solution, not a front artifact.
        deficit = float(np.sum(np.minimum(h_int, 0.0)))
        total = float(np.sum(np.maximum(h_int, 0.0)))
        if -deficit > 1e-6 * max(total, 1.0):
            raise NumericalError(f"negative depth {min_h:.3e} after hyperbolic step")
        classes = [slice(None)] if cover is None else [~cover, cover]
        for sel in classes:
            sub = h_int[sel]
            d = float(np.sum(np.minimum(sub, 0.0))) if sub.size else 0.0
            if d < 0.0:
                np.maximum(sub, 0.0, out=sub)
                absorb_deficit(sub, d)
                h_int[sel] = sub
    dry = h_int <= dry_tol
    if np.any(dry):
        hu_int = np.where(dry, 0.0, hu_int)
    # Cap residual velocities in nearly-dry cells.
    shallow = ~dry & (h_int < 10.0 * dry_tol)
    if np.any(shallow):
        cap = kernels.FROUDE_CAP * np.sqrt(g * h_int) * h_int
        hu_int = np.where(shallow, np.minimum(np.maximum(hu_int, -cap), cap), hu_int)
    patch.h[s] = h_int
    patch.hu[s] = hu_int
    patch.fmass = fmass
    return max_speed


def stable_dt(patch: Patch, cfl_target: float, g: float, dry_tol: float = 1e-3) -> float:
    """Largest dt meeting the Courant target on this patch.

    Uses the shallow-water speed bound |u| + sqrt(g h) over wet interior
    cells (the dispersive correction does not enlarge it).  A fully dry
    patch imposes no constraint, reported as math.inf.
    """
    if not (0.0 < cfl_target <= 1.0):
        raise ContractViolation("cfl_target must lie in (0, 1]")
    s = patch.interior
    h = patch.h[s]
    hu = patch.hu[s]
    wet = h > dry_tol
    if not np.any(wet):
        return math.inf
    u = kernels.capped_velocity(h, hu, g, dry_tol)
    speed = float(np.max(np.abs(u[wet]) + np.sqrt(g * h[wet])))
    if speed <= 0.0:
        return math.inf
    return cfl_target * patch.dx / speed
