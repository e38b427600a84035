"""Dispersive correction: elliptic operator, assembly, and solves.

The Boussinesq-type momentum correction is carried as a third solution
component psi obtained from a tridiagonal elliptic system

    [I - D](psi) = -D(F) + g h0^2 b1 d2/dx2 (h0 eta_x)

where D(w) = (b1 + 1/2) h0^2 w_xx - (1/6) h0^3 (w/h0)_xx acts on the
still-water depth h0, and F = (h u^2)_x + g h eta_x is the flux-plus-
source gradient of the momentum equation.  Cells switch to plain
shallow water (identity rows, psi = 0) in water shallower than a
threshold depth and anywhere the five-point stencil touches a dry cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import GHOST, Patch
from .errors import ContractViolation, NumericalError, SingularSystemError

#: Curvature coefficient matching the exact dispersion relation to
#: fourth order in kh0.
B1_DEFAULT: float = 1.0 / 15.0

#: Solve accuracy demanded of every elliptic solve.
RESIDUAL_RTOL = 1e-12
RESIDUAL_ATOL = 1e-14


@dataclass
class TridiagonalSystem:
    """Tridiagonal (optionally cyclic) linear system for psi.

    sub[i], diag[i], sup[i] are the couplings of unknown i to i-1, i,
    i+1; sub[0] and sup[-1] are unused unless the system is cyclic, in
    which case corner_top couples unknown 0 to n-1 and corner_bot
    couples n-1 to 0.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray
    cyclic: bool = False
    corner_top: float = 0.0
    corner_bot: float = 0.0

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[1:] += self.sub[1:] * x[:-1]
        y[:-1] += self.sup[:-1] * x[1:]
        if self.cyclic:
            y[0] += self.corner_top * x[-1]
            y[-1] += self.corner_bot * x[0]
        return y

    def residual(self, x: np.ndarray) -> float:
        return float(np.max(np.abs(self.matvec(x) - self.rhs))) if self.n else 0.0

    def dense(self) -> np.ndarray:
        """Dense matrix form, for cross-checking against the oracle."""
        a = np.zeros((self.n, self.n))
        idx = np.arange(self.n)
        a[idx, idx] = self.diag
        a[idx[1:], idx[:-1]] = self.sub[1:]
        a[idx[:-1], idx[1:]] = self.sup[:-1]
        if self.cyclic:
            a[0, -1] += self.corner_top
            a[-1, 0] += self.corner_bot
        return a


def apply_d11(w: np.ndarray, h0: np.ndarray, dx: float, b1: float = B1_DEFAULT) -> np.ndarray:
    """Apply the dispersive operator D to a cell array.

    D(w) = (b1 + 1/2) h0^2 w_xx - (1/6) h0^3 (w/h0)_xx with centered
    second differences.  Returns an array of the same length with zeros
    in the first and last entry (no one-sided closure) and zeros
    wherever h0 vanishes on the stencil.
    """
    w = np.asarray(w, dtype=float)
    h0 = np.asarray(h0, dtype=float)
    if w.shape != h0.shape:
        raise ContractViolation("w and h0 must have matching shapes")
    out = np.zeros_like(w)
    if w.shape[0] < 3:
        return out
    inv_dx2 = 1.0 / (dx * dx)
    ok = (h0[1:-1] > 0.0) & (h0[:-2] > 0.0) & (h0[2:] > 0.0)
    safe = np.where(h0 > 0.0, h0, 1.0)
    v = w / safe
    wxx = (w[:-2] - 2.0 * w[1:-1] + w[2:]) * inv_dx2
    vxx = (v[:-2] - 2.0 * v[1:-1] + v[2:]) * inv_dx2
    h0c = h0[1:-1]
    out[1:-1] = np.where(ok, (b1 + 0.5) * (h0c * h0c) * wxx - (h0c * h0c * h0c) * vxx / 6.0, 0.0)
    return out


def boussinesq_mask(h0: np.ndarray, switch_depth: float) -> np.ndarray:
    """Cells where the dispersive correction is active.

    Active where the still-water depth exceeds the switch depth and no
    immediate neighbor is dry (h0 = 0); missing neighbors at the array
    ends do not deactivate a cell.
    """
    h0 = np.asarray(h0, dtype=float)
    deep = h0 > switch_depth
    left_ok = np.ones(h0.shape, dtype=bool)
    right_ok = np.ones(h0.shape, dtype=bool)
    left_ok[1:] = h0[:-1] > 0.0
    right_ok[:-1] = h0[1:] > 0.0
    return deep & left_ok & right_ok


def _guarded_gradient(q: np.ndarray, wet: np.ndarray, dx: float) -> np.ndarray:
    """Centered d/dx falling back to one-sided differences at dry cells.

    Entries for dry cells, and for wet cells with both neighbors dry,
    are zero.  The first and last entry are zero (no outside neighbor).
    """
    n = q.shape[0]
    out = np.zeros(n)
    if n < 3:
        return out
    lok = wet[:-2]
    rok = wet[2:]
    c = wet[1:-1]
    centered = (q[2:] - q[:-2]) / (2.0 * dx)
    right = (q[2:] - q[1:-1]) / dx
    left = (q[1:-1] - q[:-2]) / dx
    out[1:-1] = np.where(c, np.where(lok & rok, centered,
                         np.where(rok, right, np.where(lok, left, 0.0))), 0.0)
    return out


def assemble_elliptic(h: np.ndarray, hu: np.ndarray, eta: np.ndarray, h0: np.ndarray,
                      dx: float, g: float, b1: float, active: np.ndarray,
                      psi_ghost_left: float = 0.0, psi_ghost_right: float = 0.0,
                      cyclic: bool = False, dry_tol: float = 1e-3) -> TridiagonalSystem:
    """Build the tridiagonal system for psi on one patch.

    Arrays carry GHOST cells per side (ghosts filled); unknowns are the
    interior cells.  ``active`` flags interior cells; inactive rows are
    identity with zero right-hand side.  Dirichlet psi values adjacent
    to the first/last interior cell enter through the ghost arguments
    unless the system is cyclic.
    """
    n = h.shape[0] - 2 * GHOST
    if n < 1:
        raise ContractViolation("assemble_elliptic needs at least one interior cell")
    if active.shape[0] != n:
        raise ContractViolation("active mask must cover exactly the interior")

    wet = h > dry_tol
    u = kernels.capped_velocity(h, hu, g, dry_tol)
    fm = hu * u

    # F = (h u^2)_x + g h eta_x, with one-sided differences at dry
    # neighbors; needed on the interior plus one ghost layer.
    grad_fm = _guarded_gradient(fm, wet, dx)
    grad_eta = _guarded_gradient(eta, wet, dx)
    f_arr = grad_fm + g * h * grad_eta
    f_arr[~wet] = 0.0

    # G = d2/dx2 (h0 eta_x), the linear dispersive forcing.
    phi = h0 * grad_eta
    inv_dx2 = 1.0 / (dx * dx)

    lo, hi = GHOST, GHOST + n
    d11_f = apply_d11(f_arr, h0, dx, b1)
    gpp = np.zeros_like(phi)
    gpp[1:-1] = (phi[:-2] - 2.0 * phi[1:-1] + phi[2:]) * inv_dx2
    h0i = h0[lo:hi]
    rhs = -d11_f[lo:hi] + g * (h0i * h0i) * b1 * gpp[lo:hi]

    # Matrix rows of [I - D] restricted to active cells.
    coeff = inv_dx2
    h0m = h0[lo - 1:hi - 1]
    h0p = h0[lo + 1:hi + 1]
    safe_m = np.where(h0m > 0.0, h0m, 1.0)
    safe_p = np.where(h0p > 0.0, h0p, 1.0)
    diag = 1.0 + 2.0 * (b1 + 1.0 / 3.0) * (h0i * h0i) * coeff
    sub = -((b1 + 0.5) * (h0i * h0i) - (h0i * h0i * h0i) / (6.0 * safe_m)) * coeff
    sup = -((b1 + 0.5) * (h0i * h0i) - (h0i * h0i * h0i) / (6.0 * safe_p)) * coeff

    act = active.astype(bool)
    diag = np.where(act, diag, 1.0)
    sub = np.where(act, sub, 0.0)
    sup = np.where(act, sup, 0.0)
    rhs = np.where(act, rhs, 0.0)

    corner_top = 0.0
    corner_bot = 0.0
    if cyclic:
        corner_top = float(sub[0])
        corner_bot = float(sup[-1])
    else:
        # Dirichlet closure: fold the known ghost psi into the rhs.
        rhs[0] -= sub[0] * psi_ghost_left
        rhs[-1] -= sup[-1] * psi_ghost_right
    sub[0] = 0.0
    sup[-1] = 0.0

    return TridiagonalSystem(sub=sub, diag=diag, sup=sup, rhs=rhs,
                             cyclic=cyclic, corner_top=corner_top, corner_bot=corner_bot)


def solve_tridiagonal(system: TridiagonalSystem) -> np.ndarray:
    """Solve the elliptic system to the module's residual tolerance.

    Plain Thomas elimination first; a small pivot defers to the
    partial-pivoting variant; a structurally singular system raises
    SingularSystemError naming the offending cell.  Cyclic systems are
    reduced to two non-cyclic solves by a rank-one (Sherman-Morrison)
    update.  The residual is verified after every solve.
    """
    if system.n == 0:
        return np.empty(0)
    if system.cyclic:
        x = _solve_cyclic(system)
    else:
        x = _solve_plain(system.sub, system.diag, system.sup, system.rhs)
    scale = float(np.max(np.abs(system.rhs))) if system.n else 0.0
    res = system.residual(x)
    if not res <= RESIDUAL_RTOL * scale + RESIDUAL_ATOL:
        raise NumericalError(f"elliptic solve residual {res:.3e} exceeds tolerance")
    return x


def _solve_plain(sub, diag, sup, rhs) -> np.ndarray:
    x, bad = kernels.thomas_solve(sub, diag, sup, rhs)
    if x is None:
        x, bad = kernels.thomas_pivot_solve(sub, diag, sup, rhs)
        if x is None:
            raise SingularSystemError(bad)
    return x


def _solve_cyclic(system: TridiagonalSystem) -> np.ndarray:
    """Sherman-Morrison reduction of a cyclic tridiagonal system."""
    n = system.n
    if n < 3:
        raise ContractViolation("cyclic solve needs at least three unknowns")
    ct, cb = system.corner_top, system.corner_bot
    if ct == 0.0 and cb == 0.0:
        return _solve_plain(system.sub, system.diag, system.sup, system.rhs)
    gamma = -system.diag[0]
    diag = system.diag.copy()
    diag[0] = system.diag[0] - gamma
    diag[-1] = system.diag[-1] - ct * cb / gamma
    u = np.zeros(n)
    u[0] = gamma
    u[-1] = cb
    y = _solve_plain(system.sub, diag, system.sup, system.rhs)
    q = _solve_plain(system.sub, diag, system.sup, u)
    vty = y[0] + (ct / gamma) * y[-1]
    vtq = q[0] + (ct / gamma) * q[-1]
    denom = 1.0 + vtq
    if denom == 0.0:
        raise SingularSystemError(0, "cyclic reduction degenerate")
    return y - q * (vty / denom)


def solve_patch_psi(patch: Patch, g: float, b1: float, switch_depth: float,
                    dry_tol: float = 1e-3, cyclic: bool = False,
                    boussinesq: bool = True) -> bool:
    """Solve for psi on a patch in place.

    Ghosts of (h, hu, psi) must be filled: the interpolated or boundary
    psi ghost values act as Dirichlet data.  Returns True when a solve
    actually ran (some cell was active), False when the correction is
    off or inactive everywhere, in which case interior psi is zeroed.
    """
    s = patch.interior
    if not boussinesq:
        patch.psi[s] = 0.0
        return False
    mask_full = boussinesq_mask(patch.h0, switch_depth)
    active = mask_full[s].copy()
    if np.any(active):
        # Deactivate rows whose five-point data stencil touches a
        # currently dry cell; the assembly differences need valid state.
        wet_full = patch.h > dry_tol
        wet_c = wet_full[s]
        wet_m = wet_full[GHOST - 1:GHOST - 1 + patch.n]
        wet_p = wet_full[GHOST + 1:GHOST + 1 + patch.n]
        active &= wet_c & wet_m & wet_p
    if not np.any(active):
        patch.psi[s] = 0.0
        return False
    system = assemble_elliptic(
        patch.h, patch.hu, patch.b + patch.h, patch.h0, patch.dx, g, b1, active,
        psi_ghost_left=float(patch.psi[GHOST - 1]),
        psi_ghost_right=float(patch.psi[GHOST + patch.n]),
        cyclic=cyclic, dry_tol=dry_tol)
    patch.psi[s] = solve_tridiagonal(system)
    return True
