"""Fractional-step time integration on a single patch.

Order of operations per step, with the elliptic solve first so the
stored psi always corresponds to the pre-step state:

1. solve [I - D] psi = rhs(h, hu) on the current state;
2. source update (hu)* = hu + dt * psi (depth unchanged);
3. hyperbolic shallow-water step on (h, hu)*.

With psi frozen over the step the source update is exact for any
explicit integrator, so 'euler' and 'rk2' coincide; both names are
accepted by the configuration layer.
"""

from __future__ import annotations

import numpy as np

from . import dispersive, swe
from .core import GHOST, Patch
from .errors import ContractViolation

_SIDES = ("left", "right")
_BC_KINDS = ("extrap", "wall", "periodic")


def boundary_conditions(patch: Patch, side: str, kind: str) -> None:
    """Fill one side's physical ghost cells.

    extrap: zero-order extrapolation of (h, hu), psi ghosts 0.
    wall: mirror (h even, hu odd) about the boundary face, psi ghosts 0.
    periodic: wrap interior values from the opposite side.
    """
    if side not in _SIDES:
        raise ContractViolation(f"unknown side {side!r}")
    if kind not in _BC_KINDS:
        raise ContractViolation(f"unknown boundary kind {kind!r}")
    n = patch.n
    if kind == "extrap":
        if side == "left":
            patch.h[0] = patch.h[1] = patch.h[GHOST]
            patch.hu[0] = patch.hu[1] = patch.hu[GHOST]
            patch.psi[0] = patch.psi[1] = 0.0
        else:
            edge = GHOST + n - 1
            patch.h[edge + 1] = patch.h[edge + 2] = patch.h[edge]
            patch.hu[edge + 1] = patch.hu[edge + 2] = patch.hu[edge]
            patch.psi[edge + 1] = patch.psi[edge + 2] = 0.0
    elif kind == "wall":
        # Mirror the bathymetry along with the flow state so the
        # extended problem is exactly symmetric about the wall face:
        # every interface flux then cancels its image and the wall is
        # watertight to the last bit.
        if side == "left":
            patch.h[1] = patch.h[GHOST]
            patch.h[0] = patch.h[GHOST + 1]
            patch.hu[1] = -patch.hu[GHOST]
            patch.hu[0] = -patch.hu[GHOST + 1]
            patch.b[1] = patch.b[GHOST]
            patch.b[0] = patch.b[GHOST + 1]
            patch.psi[0] = patch.psi[1] = 0.0
        else:
            edge = GHOST + n - 1
            patch.h[edge + 1] = patch.h[edge]
            patch.h[edge + 2] = patch.h[edge - 1]
            patch.hu[edge + 1] = -patch.hu[edge]
            patch.hu[edge + 2] = -patch.hu[edge - 1]
            patch.b[edge + 1] = patch.b[edge]
            patch.b[edge + 2] = patch.b[edge - 1]
            patch.psi[edge + 1] = patch.psi[edge + 2] = 0.0
    else:
        if n < GHOST:
            raise ContractViolation("periodic fill needs at least GHOST interior cells")
        for arr in (patch.h, patch.hu, patch.psi, patch.b):
            if side == "left":
                arr[0:GHOST] = arr[n:n + GHOST]
            else:
                arr[GHOST + n:GHOST + n + GHOST] = arr[GHOST:GHOST + GHOST]


def fill_physical(patch: Patch, bc_left: str, bc_right: str,
                  components: str = "all") -> None:
    """Apply physical boundary conditions on the sides this patch owns.

    ``components`` = "flow" limits the fill to (h, hu), used to refresh
    ghosts after the source update without touching the psi Dirichlet
    values.  Patches not touching a domain boundary are left alone.
    """
    if not (patch.at_domain_left or patch.at_domain_right):
        return
    if components == "flow":
        psi_saved_lo = patch.psi[0:GHOST].copy()
        psi_saved_hi = patch.psi[GHOST + patch.n:].copy()
    if patch.at_domain_left:
        boundary_conditions(patch, "left", bc_left)
    if patch.at_domain_right:
        boundary_conditions(patch, "right", bc_right)
    if components == "flow":
        patch.psi[0:GHOST] = psi_saved_lo
        patch.psi[GHOST + patch.n:] = psi_saved_hi


def apply_dispersive_source(patch: Patch, dt: float) -> None:
    """Momentum source update hu += dt * psi over the whole slab."""
    np.add(patch.hu, dt * patch.psi, out=patch.hu)


def solve_psi_phase(patch: Patch, g: float, b1: float, switch_depth: float,
                    dry_tol: float = 1e-3, boussinesq: bool = True,
                    cyclic: bool = False, counters: dict | None = None) -> bool:
    """Elliptic solve for psi; returns whether any cell was active."""
    solved = dispersive.solve_patch_psi(
        patch, g, b1, switch_depth, dry_tol=dry_tol, cyclic=cyclic, boussinesq=boussinesq)
    if solved and counters is not None:
        counters[patch.level] = counters.get(patch.level, 0) + 1
    return solved


def hyperbolic_phase(patch: Patch, dt: float, solved: bool, g: float,
                     dry_tol: float = 1e-3, limiter: str = "mc",
                     bc: tuple[str, str] | None = None,
                     cover: np.ndarray | None = None) -> float:
    """Source update (if psi is live) plus one shallow-water step.

    Skipping the source entirely when nothing was solved keeps an
    all-inactive dispersive step bit-identical to a plain SWE step.
    Advances patch.t by dt; returns the maximum wave speed.  ``cover``
    is forwarded to the shallow-water step's negative-depth fixup.
    """
    if solved:
        apply_dispersive_source(patch, dt)
        if bc is not None:
            fill_physical(patch, bc[0], bc[1], components="flow")
    max_speed = swe.swe_step(patch, dt, g, dry_tol=dry_tol, limiter=limiter,
                             cover=cover)
    patch.t += dt
    return max_speed


def single_grid_step(patch: Patch, dt: float, g: float, b1: float,
                     switch_depth: float, dry_tol: float = 1e-3,
                     limiter: str = "mc", boussinesq: bool = True,
                     bc: tuple[str, str] = ("extrap", "extrap"),
                     counters: dict | None = None) -> float:
    """One full fractional step on a stand-alone patch.

    Fills physical ghosts, solves for psi, applies the momentum source,
    and takes the hyperbolic step.  Returns the maximum wave speed.
    """
    cyclic = bc[0] == "periodic" and bc[1] == "periodic"
    fill_physical(patch, bc[0], bc[1])
    solved = solve_psi_phase(patch, g, b1, switch_depth, dry_tol=dry_tol,
                             boussinesq=boussinesq, cyclic=cyclic, counters=counters)
    return hyperbolic_phase(patch, dt, solved, g, dry_tol=dry_tol, limiter=limiter, bc=bc)
