"""Pure-NumPy implementations of the hot numerical kernels.

This module is the reference semantics: the compiled extension in
``_kernels_cy`` mirrors the arithmetic here operation for operation, in
the same order, so the two backends produce identical floating-point
results.  Any change to a formula in this file must be reflected in the
.pyx twin.

Kernels:

* ``fwave_fluctuations`` - the well-balanced f-wave Riemann sweep over
  all interfaces of a 1D slab (wet/dry walls, overtopping, Einfeldt
  speeds).
* ``swe_sweep`` - one full finite-volume update: fluctuations plus
  limited second-order correction fluxes.
* ``thomas_solve`` / ``thomas_pivot_solve`` - tridiagonal elimination,
  plain and with partial pivoting.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

#: Velocity limiter for nearly-dry cells: |u| <= FROUDE_CAP * sqrt(g h).
FROUDE_CAP = 20.0

#: Relative pivot tolerance below which plain Thomas elimination defers
#: to the pivoting variant.
PIVOT_TOL = 1e-12

LIMITER_MINMOD = 0
LIMITER_MC = 1


def capped_velocity(h, hu, g, dry_tol):
    """u = hu/h with dry cells at rest and a speed cap where h is tiny."""
    wet = h > dry_tol
    safe_h = np.where(wet, h, 1.0)
    u = np.where(wet, hu / safe_h, 0.0)
    shallow = wet & (h < 10.0 * dry_tol)
    if np.any(shallow):
        cap = FROUDE_CAP * np.sqrt(g * h)
        u = np.where(shallow, np.minimum(np.maximum(u, -cap), cap), u)
    return u


def fwave_fluctuations(h, hu, b, g, dry_tol):
    """Well-balanced f-wave decomposition at every interior interface.

    Interface k sits between cells k and k+1.  Returns
    (amdq_h, amdq_hu, apdq_h, apdq_hu, beta1, beta2, s1, s2), each of
    length n-1.  The momentum jump is taken in the form

        delta2 = (hu u)_R - (hu u)_L + g * hbar * (eta_R - eta_L)

    so a lake at rest produces exact floating-point zeros.  A dry cell
    that the wet side cannot overtop acts as a wall (mirror state, and
    nothing is transmitted into the dry side).
    """
    wet = h > dry_tol
    u = capped_velocity(h, hu, g, dry_tol)
    fm = hu * u
    eta = b + h

    hL, hR = h[:-1], h[1:]
    huL, huR = hu[:-1], hu[1:]
    uL, uR = u[:-1], u[1:]
    bL, bR = b[:-1], b[1:]
    etaL, etaR = eta[:-1], eta[1:]
    fmL, fmR = fm[:-1], fm[1:]
    wetL, wetR = wet[:-1], wet[1:]

    both_dry = ~wetL & ~wetR
    wall_r = wetL & ~wetR & (etaL <= bR)
    wall_l = wetR & ~wetL & (etaR <= bL)
    ovt_r = wetL & ~wetR & ~wall_r
    ovt_l = wetR & ~wetL & ~wall_l

    # Mirror the wet state across a non-overtoppable dry cell.
    HL = np.where(wall_l, hR, hL)
    UL = np.where(wall_l, -uR, uL)
    MUL = np.where(wall_l, -huR, huL)
    EL = np.where(wall_l, etaR, etaL)
    FL = np.where(wall_l, fmR, fmL)
    HR = np.where(wall_r, hL, hR)
    UR = np.where(wall_r, -uL, uR)
    MUR = np.where(wall_r, -huL, huR)
    ER = np.where(wall_r, etaL, etaR)
    FR = np.where(wall_r, fmL, fmR)

    cL = np.sqrt(g * HL)
    cR = np.sqrt(g * HR)
    sqL = np.sqrt(HL)
    sqR = np.sqrt(HR)
    den = sqL + sqR
    uhat = np.where(den > 0.0, (sqL * UL + sqR * UR) / np.where(den > 0.0, den, 1.0), 0.0)
    chat = np.sqrt(0.5 * g * (HL + HR))

    s1 = np.minimum(UL - cL, uhat - chat)
    s2 = np.maximum(UR + cR, uhat + chat)
    # Dry-front speeds when a wet cell floods its dry neighbor.
    s2 = np.where(ovt_r, np.maximum(s2, UL + 2.0 * cL), s2)
    s1 = np.where(ovt_l, np.minimum(s1, UR - 2.0 * cR), s1)

    d1 = MUR - MUL
    d2 = (FR - FL) + g * (0.5 * (HL + HR)) * (ER - EL)

    ds = s2 - s1
    usable = ~both_dry & (ds > 0.0)
    dsafe = np.where(ds > 0.0, ds, 1.0)
    beta1 = np.where(usable, (s2 * d1 - d2) / dsafe, 0.0)
    beta2 = np.where(usable, (d2 - s1 * d1) / dsafe, 0.0)

    am1 = np.where(s1 < 0.0, 1.0, np.where(s1 > 0.0, 0.0, 0.5))
    am2 = np.where(s2 < 0.0, 1.0, np.where(s2 > 0.0, 0.0, 0.5))
    ap1 = 1.0 - am1
    ap2 = 1.0 - am2

    amdq_h = am1 * beta1 + am2 * beta2
    amdq_hu = am1 * (beta1 * s1) + am2 * (beta2 * s2)
    apdq_h = ap1 * beta1 + ap2 * beta2
    apdq_hu = ap1 * (beta1 * s1) + ap2 * (beta2 * s2)

    # A wall transmits nothing into its dry side.
    apdq_h = np.where(wall_r, 0.0, apdq_h)
    apdq_hu = np.where(wall_r, 0.0, apdq_hu)
    amdq_h = np.where(wall_l, 0.0, amdq_h)
    amdq_hu = np.where(wall_l, 0.0, amdq_hu)

    return amdq_h, amdq_hu, apdq_h, apdq_hu, beta1, beta2, s1, s2


def _limited_wave(beta, s, limiter):
    """Limit an f-wave family against its upwind neighbor interface."""
    m = beta.shape[0]
    limited = np.zeros(m)
    if m < 3:
        return limited
    bc = beta[1:-1]
    bup = np.where(s[1:-1] > 0.0, beta[0:-2], beta[2:])
    bsafe = np.where(bc != 0.0, bc, 1.0)
    theta = np.where(bc != 0.0, bup / bsafe, 0.0)
    if limiter == LIMITER_MINMOD:
        phi = np.maximum(0.0, np.minimum(1.0, theta))
    else:
        phi = np.maximum(0.0, np.minimum(np.minimum(0.5 * (1.0 + theta), 2.0), 2.0 * theta))
    limited[1:-1] = phi * bc
    return limited


def swe_sweep(h, hu, b, g, dx, dt, dry_tol, limiter):
    """One finite-volume shallow-water update over a slab with ghosts.

    Updates cells 1..n-2 (everything with two complete interface
    neighborhoods); the caller commits whatever slice it owns.  Returns
    (h_new, hu_new, max_speed, fmass) without modifying the inputs;
    fmass[k] is the effective mass flux through interface k (between
    cells k and k+1), used by the coarse/fine conservation fixup.
    """
    n = h.shape[0]
    nu = dt / dx
    amdq_h, amdq_hu, apdq_h, apdq_hu, beta1, beta2, s1, s2 = fwave_fluctuations(h, hu, b, g, dry_tol)

    wet = h > dry_tol
    m = n - 1
    # Second-order correction fluxes, suppressed within one cell of a
    # dry state so fronts stay first-order.
    smooth = np.zeros(m, dtype=bool)
    if m >= 3:
        smooth[1:-1] = wet[0:-3] & wet[1:-2] & wet[2:-1] & wet[3:]
    wl1 = np.where(smooth, _limited_wave(beta1, s1, limiter), 0.0)
    wl2 = np.where(smooth, _limited_wave(beta2, s2, limiter), 0.0)
    sgn1 = np.sign(s1)
    sgn2 = np.sign(s2)
    w1 = 0.5 * sgn1 * (1.0 - nu * np.abs(s1)) * wl1
    w2 = 0.5 * sgn2 * (1.0 - nu * np.abs(s2)) * wl2
    f_h = w1 + w2
    f_hu = w1 * s1 + w2 * s2

    h_new = h.copy()
    hu_new = hu.copy()
    inc_h = (apdq_h[:-1] + amdq_h[1:]) + (f_h[1:] - f_h[:-1])
    inc_hu = (apdq_hu[:-1] + amdq_hu[1:]) + (f_hu[1:] - f_hu[:-1])
    h_new[1:-1] = h[1:-1] - nu * inc_h
    hu_new[1:-1] = hu[1:-1] - nu * inc_hu

    # Effective interface mass flux: f(q_left) plus the left-going
    # fluctuation plus the correction flux.  At a wet/dry wall this is
    # hu + (-hu) = exact zero, so it is single-valued at every interface.
    fmass = hu[:-1] + amdq_h + f_h

    max_speed = float(np.max(np.maximum(np.abs(s1), np.abs(s2)))) if m > 0 else 0.0
    return h_new, hu_new, max_speed, fmass


def thomas_solve(sub, diag, sup, rhs):
    """Plain Thomas elimination.

    Returns (x, -1) on success or (None, i) when the running pivot at
    row i falls below PIVOT_TOL relative to its row scale, in which case
    the caller should retry with the pivoting variant.
    """
    n = diag.shape[0]
    x = np.empty(n)
    cp = np.empty(n)
    dp = np.empty(n)

    piv = diag[0]
    scale = abs(diag[0]) + abs(sup[0])
    if not abs(piv) > PIVOT_TOL * (scale if scale > 0.0 else 1.0):
        return None, 0
    cp[0] = sup[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i] * cp[i - 1]
        scale = abs(sub[i]) + abs(diag[i]) + abs(sup[i])
        if not abs(piv) > PIVOT_TOL * (scale if scale > 0.0 else 1.0):
            return None, i
        cp[i] = sup[i] / piv
        dp[i] = (rhs[i] - sub[i] * dp[i - 1]) / piv
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x, -1


def thomas_pivot_solve(sub, diag, sup, rhs):
    """Tridiagonal elimination with partial pivoting.

    Row swaps introduce a second superdiagonal of fill-in.  Returns
    (x, -1) on success or (None, i) if a pivot is exactly zero (the
    system is structurally singular at row i).
    """
    n = diag.shape[0]
    a = sub.astype(float).copy()
    bb = diag.astype(float).copy()
    c = sup.astype(float).copy()
    d = rhs.astype(float).copy()
    e = np.zeros(n)

    for i in range(n - 1):
        if abs(a[i + 1]) > abs(bb[i]):
            # Swap rows i and i+1, then eliminate.
            piv = a[i + 1]
            row_b, row_c, row_e, row_d = bb[i], c[i], e[i], d[i]
            bb[i], c[i], e[i], d[i] = a[i + 1], bb[i + 1], c[i + 1], d[i + 1]
            factor = row_b / piv
            bb[i + 1] = row_c - factor * c[i]
            c[i + 1] = row_e - factor * e[i]
            d[i + 1] = row_d - factor * d[i]
        else:
            if bb[i] == 0.0:
                return None, i
            factor = a[i + 1] / bb[i]
            bb[i + 1] = bb[i + 1] - factor * c[i]
            c[i + 1] = c[i + 1] - factor * e[i]
            d[i + 1] = d[i + 1] - factor * d[i]

    x = np.empty(n)
    if bb[n - 1] == 0.0:
        return None, n - 1
    x[n - 1] = d[n - 1] / bb[n - 1]
    if n >= 2:
        if bb[n - 2] == 0.0:
            return None, n - 2
        x[n - 2] = (d[n - 2] - c[n - 2] * x[n - 1]) / bb[n - 2]
    for i in range(n - 3, -1, -1):
        if bb[i] == 0.0:
            return None, i
        x[i] = (d[i] - c[i] * x[i + 1] - e[i] * x[i + 2]) / bb[i]
    return x, -1
