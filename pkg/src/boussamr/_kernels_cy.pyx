# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the hot kernels in ``_kernels_py``.

The scalar loops here perform the same IEEE operations in the same
order as the NumPy reference, so both backends produce bit-identical
results.  Any formula change must be made in both files.
"""

import numpy as np

from libc.math cimport fabs, sqrt

BACKEND = "cython"

FROUDE_CAP = 20.0
PIVOT_TOL = 1e-12
LIMITER_MINMOD = 0
LIMITER_MC = 1

cdef double C_FROUDE_CAP = 20.0
cdef double C_PIVOT_TOL = 1e-12


cdef inline double dmin(double a, double b) nogil:
    return a if a < b else b


cdef inline double dmax(double a, double b) nogil:
    return a if a > b else b


cdef inline double dsign(double a) nogil:
    if a > 0.0:
        return 1.0
    if a < 0.0:
        return -1.0
    return a  # preserves signed zero like np.sign


def capped_velocity(h, hu, double g, double dry_tol):
    """u = hu/h with dry cells at rest and a speed cap where h is tiny."""
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef double[::1] huv = np.ascontiguousarray(hu, dtype=np.float64)
    cdef Py_ssize_t n = hv.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] uv = out
    cdef Py_ssize_t i
    cdef double cap, u
    for i in range(n):
        if hv[i] > dry_tol:
            u = huv[i] / hv[i]
            if hv[i] < 10.0 * dry_tol:
                cap = C_FROUDE_CAP * sqrt(g * hv[i])
                u = dmin(dmax(u, -cap), cap)
            uv[i] = u
        else:
            uv[i] = 0.0
    return out


def fwave_fluctuations(h, hu, b, double g, double dry_tol):
    """Well-balanced f-wave decomposition at every interior interface.

    Same contract as the pure-Python twin: returns
    (amdq_h, amdq_hu, apdq_h, apdq_hu, beta1, beta2, s1, s2).
    """
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef double[::1] huv = np.ascontiguousarray(hu, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = hv.shape[0]
    cdef Py_ssize_t m = n - 1

    u_arr = capped_velocity(h, hu, g, dry_tol)
    cdef double[::1] uv = u_arr

    amdq_h = np.empty(m); amdq_hu = np.empty(m)
    apdq_h = np.empty(m); apdq_hu = np.empty(m)
    beta1 = np.empty(m); beta2 = np.empty(m)
    s1a = np.empty(m); s2a = np.empty(m)
    cdef double[::1] amh = amdq_h
    cdef double[::1] amhu = amdq_hu
    cdef double[::1] aph = apdq_h
    cdef double[::1] aphu = apdq_hu
    cdef double[::1] b1v = beta1
    cdef double[::1] b2v = beta2
    cdef double[::1] s1v = s1a
    cdef double[::1] s2v = s2a

    cdef Py_ssize_t k
    cdef bint wetL, wetR, both_dry, wall_r, wall_l, ovt_r, ovt_l, usable
    cdef double hL, hR, huL, huR, uL, uR, bL, bR, etaL, etaR, fmL, fmR
    cdef double HL, UL, MUL, EL, FL, HR, UR, MUR, ER, FR
    cdef double cL, cR, sqL, sqR, den, uhat, chat, s1, s2
    cdef double d1, d2, ds, bt1, bt2, am1, am2, ap1, ap2

    for k in range(m):
        hL = hv[k]; hR = hv[k + 1]
        huL = huv[k]; huR = huv[k + 1]
        uL = uv[k]; uR = uv[k + 1]
        bL = bv[k]; bR = bv[k + 1]
        etaL = bL + hL; etaR = bR + hR
        fmL = huL * uL; fmR = huR * uR
        wetL = hL > dry_tol
        wetR = hR > dry_tol

        both_dry = (not wetL) and (not wetR)
        wall_r = wetL and (not wetR) and (etaL <= bR)
        wall_l = wetR and (not wetL) and (etaR <= bL)
        ovt_r = wetL and (not wetR) and (not wall_r)
        ovt_l = wetR and (not wetL) and (not wall_l)

        if wall_l:
            HL = hR; UL = -uR; MUL = -huR; EL = etaR; FL = fmR
        else:
            HL = hL; UL = uL; MUL = huL; EL = etaL; FL = fmL
        if wall_r:
            HR = hL; UR = -uL; MUR = -huL; ER = etaL; FR = fmL
        else:
            HR = hR; UR = uR; MUR = huR; ER = etaR; FR = fmR

        cL = sqrt(g * HL)
        cR = sqrt(g * HR)
        sqL = sqrt(HL)
        sqR = sqrt(HR)
        den = sqL + sqR
        if den > 0.0:
            uhat = (sqL * UL + sqR * UR) / den
        else:
            uhat = 0.0
        chat = sqrt(0.5 * g * (HL + HR))

        s1 = dmin(UL - cL, uhat - chat)
        s2 = dmax(UR + cR, uhat + chat)
        if ovt_r:
            s2 = dmax(s2, UL + 2.0 * cL)
        if ovt_l:
            s1 = dmin(s1, UR - 2.0 * cR)

        d1 = MUR - MUL
        d2 = (FR - FL) + g * (0.5 * (HL + HR)) * (ER - EL)

        ds = s2 - s1
        usable = (not both_dry) and (ds > 0.0)
        if usable:
            bt1 = (s2 * d1 - d2) / ds
            bt2 = (d2 - s1 * d1) / ds
        else:
            bt1 = 0.0
            bt2 = 0.0

        if s1 < 0.0:
            am1 = 1.0
        elif s1 > 0.0:
            am1 = 0.0
        else:
            am1 = 0.5
        if s2 < 0.0:
            am2 = 1.0
        elif s2 > 0.0:
            am2 = 0.0
        else:
            am2 = 0.5
        ap1 = 1.0 - am1
        ap2 = 1.0 - am2

        if wall_l:
            amh[k] = 0.0
            amhu[k] = 0.0
        else:
            amh[k] = am1 * bt1 + am2 * bt2
            amhu[k] = am1 * (bt1 * s1) + am2 * (bt2 * s2)
        if wall_r:
            aph[k] = 0.0
            aphu[k] = 0.0
        else:
            aph[k] = ap1 * bt1 + ap2 * bt2
            aphu[k] = ap1 * (bt1 * s1) + ap2 * (bt2 * s2)

        b1v[k] = bt1
        b2v[k] = bt2
        s1v[k] = s1
        s2v[k] = s2

    return amdq_h, amdq_hu, apdq_h, apdq_hu, beta1, beta2, s1a, s2a


cdef inline double limited_value(double bc, double bup, int limiter) nogil:
    cdef double theta, phi
    if bc != 0.0:
        theta = bup / bc
    else:
        theta = 0.0
    if limiter == 0:  # minmod
        phi = dmax(0.0, dmin(1.0, theta))
    else:  # MC
        phi = dmax(0.0, dmin(dmin(0.5 * (1.0 + theta), 2.0), 2.0 * theta))
    return phi * bc


def swe_sweep(h, hu, b, double g, double dx, double dt, double dry_tol, int limiter):
    """One finite-volume shallow-water update over a slab with ghosts.

    Same contract as the pure-Python twin: returns
    (h_new, hu_new, max_speed, fmass), inputs untouched.
    """
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef double[::1] huv = np.ascontiguousarray(hu, dtype=np.float64)
    cdef Py_ssize_t n = hv.shape[0]
    cdef Py_ssize_t m = n - 1
    cdef double nu = dt / dx

    amdq_h, amdq_hu, apdq_h, apdq_hu, beta1, beta2, s1a, s2a = \
        fwave_fluctuations(h, hu, b, g, dry_tol)
    cdef double[::1] amh = amdq_h
    cdef double[::1] amhu = amdq_hu
    cdef double[::1] aph = apdq_h
    cdef double[::1] aphu = apdq_hu
    cdef double[::1] b1v = beta1
    cdef double[::1] b2v = beta2
    cdef double[::1] s1v = s1a
    cdef double[::1] s2v = s2a

    f_h = np.empty(m); f_hu = np.empty(m)
    cdef double[::1] fhv = f_h
    cdef double[::1] fhuv = f_hu

    cdef Py_ssize_t k, i
    cdef bint smooth
    cdef double wl1, wl2, bup1, bup2, w1, w2, s1, s2
    for k in range(m):
        smooth = (1 <= k) and (k <= m - 2)
        if smooth:
            smooth = (hv[k - 1] > dry_tol) and (hv[k] > dry_tol) and \
                     (hv[k + 1] > dry_tol) and (hv[k + 2] > dry_tol)
        if smooth:
            s1 = s1v[k]
            s2 = s2v[k]
            bup1 = b1v[k - 1] if s1 > 0.0 else b1v[k + 1]
            bup2 = b2v[k - 1] if s2 > 0.0 else b2v[k + 1]
            wl1 = limited_value(b1v[k], bup1, limiter)
            wl2 = limited_value(b2v[k], bup2, limiter)
            w1 = 0.5 * dsign(s1) * (1.0 - nu * fabs(s1)) * wl1
            w2 = 0.5 * dsign(s2) * (1.0 - nu * fabs(s2)) * wl2
            fhv[k] = w1 + w2
            fhuv[k] = w1 * s1 + w2 * s2
        else:
            fhv[k] = 0.0
            fhuv[k] = 0.0

    h_new = np.array(h, dtype=np.float64, copy=True)
    hu_new = np.array(hu, dtype=np.float64, copy=True)
    cdef double[::1] hnv = h_new
    cdef double[::1] hunv = hu_new
    for i in range(1, n - 1):
        hnv[i] = hv[i] - nu * ((aph[i - 1] + amh[i]) + (fhv[i] - fhv[i - 1]))
        hunv[i] = huv[i] - nu * ((aphu[i - 1] + amhu[i]) + (fhuv[i] - fhuv[i - 1]))

    fmass = np.empty(m)
    cdef double[::1] fmv = fmass
    for k in range(m):
        fmv[k] = huv[k] + amh[k] + fhv[k]

    cdef double max_speed = 0.0
    for k in range(m):
        max_speed = dmax(max_speed, dmax(fabs(s1v[k]), fabs(s2v[k])))
    if m == 0:
        max_speed = 0.0
    return h_new, hu_new, max_speed, fmass


def thomas_solve(sub, diag, sup, rhs):
    """Plain Thomas elimination; (x, -1) or (None, bad_row)."""
    cdef double[::1] a = np.ascontiguousarray(sub, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(diag, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(sup, dtype=np.float64)
    cdef double[::1] r = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    x_arr = np.empty(n)
    cp_arr = np.empty(n)
    dp_arr = np.empty(n)
    cdef double[::1] x = x_arr
    cdef double[::1] cp = cp_arr
    cdef double[::1] dp = dp_arr
    cdef Py_ssize_t i
    cdef double piv, scale

    piv = d[0]
    scale = fabs(d[0]) + fabs(c[0])
    if not fabs(piv) > C_PIVOT_TOL * (scale if scale > 0.0 else 1.0):
        return None, 0
    cp[0] = c[0] / piv
    dp[0] = r[0] / piv
    for i in range(1, n):
        piv = d[i] - a[i] * cp[i - 1]
        scale = fabs(a[i]) + fabs(d[i]) + fabs(c[i])
        if not fabs(piv) > C_PIVOT_TOL * (scale if scale > 0.0 else 1.0):
            return None, i
        cp[i] = c[i] / piv
        dp[i] = (r[i] - a[i] * dp[i - 1]) / piv
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x_arr, -1


def thomas_pivot_solve(sub, diag, sup, rhs):
    """Tridiagonal elimination with partial pivoting; (x, -1) or (None, bad_row)."""
    a_arr = np.array(sub, dtype=np.float64, copy=True)
    b_arr = np.array(diag, dtype=np.float64, copy=True)
    c_arr = np.array(sup, dtype=np.float64, copy=True)
    d_arr = np.array(rhs, dtype=np.float64, copy=True)
    cdef double[::1] a = a_arr
    cdef double[::1] bb = b_arr
    cdef double[::1] c = c_arr
    cdef double[::1] d = d_arr
    cdef Py_ssize_t n = bb.shape[0]
    e_arr = np.zeros(n)
    cdef double[::1] e = e_arr
    cdef Py_ssize_t i
    cdef double piv, factor, row_b, row_c, row_e, row_d

    for i in range(n - 1):
        if fabs(a[i + 1]) > fabs(bb[i]):
            piv = a[i + 1]
            row_b = bb[i]; row_c = c[i]; row_e = e[i]; row_d = d[i]
            bb[i] = a[i + 1]; c[i] = bb[i + 1]; e[i] = c[i + 1]; d[i] = d[i + 1]
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

    x_arr = np.empty(n)
    cdef double[::1] x = x_arr
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
    return x_arr, -1
