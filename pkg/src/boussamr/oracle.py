"""Independent reference solutions used to validate the solver.

Everything in this module is deliberately implemented with different
algorithms than the production code paths it checks: the dam-break
solution comes from a bisection on the exact wave relations, the linear
solver is dense Gaussian elimination with partial pivoting written out
by hand, and the dispersion relation is a closed form.  None of these
routines share stencils, kernels, or linear-algebra code with the
solver modules, so agreement between the two routes is meaningful.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ContractViolation, SingularSystemError

#: Default curvature coefficient of the dispersive model, the value that
#: matches the exact linear phase speed to fourth order in kh0.
B1_OPTIMAL: float = 1.0 / 15.0


def exact_dambreak(h_left: float, h_right: float, g: float, xi):
    """Exact similarity solution of the classical dam-break problem.

    Initial data: still water of depth ``h_left`` for x < 0 and depth
    ``h_right`` >= 0 for x > 0 over a flat bottom.  ``xi`` is the
    similarity coordinate x/t (scalar or array).  Returns ``(h, u)``.

    For a wet bed the wave structure is a left rarefaction plus a right
    shock; the intermediate depth is found by bisection on the depth
    function to machine-level residual.  For a dry bed the solution is a
    pure rarefaction whose front travels at 2*sqrt(g*h_left).
    """
    if not (h_left > 0.0 and h_right >= 0.0 and h_left > h_right):
        raise ContractViolation("exact_dambreak needs h_left > h_right >= 0")
    if g <= 0.0:
        raise ContractViolation("gravity must be positive")

    xi_arr = np.asarray(xi, dtype=float)
    c_left = math.sqrt(g * h_left)

    if h_right == 0.0:
        # Pure rarefaction onto a dry bed; the front is at xi = 2*c_left.
        h = np.zeros_like(xi_arr)
        u = np.zeros_like(xi_arr)
        fan = (xi_arr >= -c_left) & (xi_arr <= 2.0 * c_left)
        c_fan = (2.0 * c_left - xi_arr[fan]) / 3.0
        h[fan] = c_fan * c_fan / g
        u[fan] = xi_arr[fan] + c_fan
        left = xi_arr < -c_left
        h[left] = h_left
        return (h, u) if h.ndim else (float(h), float(u))

    h_mid, u_mid = _dambreak_middle_state(h_left, h_right, g)
    s_shock = h_mid * u_mid / (h_mid - h_right)
    c_mid = math.sqrt(g * h_mid)

    h = np.full_like(xi_arr, h_right)
    u = np.zeros_like(xi_arr)
    left = xi_arr <= -c_left
    fan = (xi_arr > -c_left) & (xi_arr < u_mid - c_mid)
    mid = (xi_arr >= u_mid - c_mid) & (xi_arr < s_shock)
    h[left] = h_left
    c_fan = (2.0 * c_left - xi_arr[fan]) / 3.0
    h[fan] = c_fan * c_fan / g
    u[fan] = xi_arr[fan] + c_fan
    h[mid] = h_mid
    u[mid] = u_mid
    return (h, u) if h.ndim else (float(h), float(u))


def dambreak_shock_speed(h_left: float, h_right: float, g: float) -> float:
    """Shock speed of the wet-bed dam break, from mass conservation."""
    h_mid, u_mid = _dambreak_middle_state(h_left, h_right, g)
    return h_mid * u_mid / (h_mid - h_right)


def _dambreak_middle_state(h_left: float, h_right: float, g: float):
    """Bisect for the depth between the rarefaction and the shock.

    The middle state satisfies both the left rarefaction invariant
    u = 2(sqrt(g h_left) - sqrt(g h)) and the right shock relation
    u = (h - h_right) sqrt(g (h + h_right) / (2 h h_right)); their
    difference is monotone in h and changes sign on (h_right, h_left).
    """
    c_left = math.sqrt(g * h_left)

    def depth_function(h: float) -> float:
        u_rare = 2.0 * (c_left - math.sqrt(g * h))
        u_shock = (h - h_right) * math.sqrt(g * (h + h_right) / (2.0 * h * h_right))
        return u_rare - u_shock

    lo, hi = h_right, h_left
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if depth_function(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    h_mid = 0.5 * (lo + hi)
    residual = abs(depth_function(h_mid))
    if not residual < 1e-12 * max(1.0, c_left):
        raise ContractViolation(f"dam-break bisection did not converge (residual {residual:.3e})")
    u_mid = 2.0 * (c_left - math.sqrt(g * h_mid))
    return h_mid, u_mid


def ms_dispersion(k, h0: float, g: float, b1: float = B1_OPTIMAL):
    """Phase speed of the dispersive model's linearized equations.

    c(k)^2 = g h0 (1 + b1 (k h0)^2) / (1 + (b1 + 1/3) (k h0)^2)

    k = 0 returns the long-wave limit sqrt(g h0).  With b1 = 1/15 this
    matches the exact (Airy) speed to within a tenth of a percent up to
    k h0 = 1.
    """
    if h0 <= 0.0 or g <= 0.0:
        raise ContractViolation("ms_dispersion needs positive depth and gravity")
    k_arr = np.asarray(k, dtype=float)
    kh2 = (k_arr * h0) ** 2
    c2 = g * h0 * (1.0 + b1 * kh2) / (1.0 + (b1 + 1.0 / 3.0) * kh2)
    c = np.sqrt(c2)
    return c if c.ndim else float(c)


def airy_dispersion(k, h0: float, g: float):
    """Exact linear water-wave phase speed sqrt(g tanh(k h0)/k)."""
    k_arr = np.asarray(k, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.sqrt(np.where(k_arr > 0.0, g * np.tanh(k_arr * h0) / np.where(k_arr > 0.0, k_arr, 1.0), g * h0))
    return c if c.ndim else float(c)


def dense_solve(matrix, rhs):
    """Solve a dense linear system by Gaussian elimination with pivoting.

    Reference route for checking the tridiagonal production solver; kept
    free of numpy.linalg on purpose.
    """
    a = np.array(matrix, dtype=float, copy=True)
    b = np.array(rhs, dtype=float, copy=True)
    n = b.shape[0]
    if a.shape != (n, n):
        raise ContractViolation(f"matrix shape {a.shape} does not match rhs length {n}")

    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(a[col:, col])))
        if a[pivot_row, col] == 0.0:
            raise SingularSystemError(col, f"dense system is singular at column {col}")
        if pivot_row != col:
            a[[col, pivot_row]] = a[[pivot_row, col]]
            b[[col, pivot_row]] = b[[pivot_row, col]]
        for row in range(col + 1, n):
            factor = a[row, col] / a[col, col]
            if factor != 0.0:
                a[row, col:] -= factor * a[col, col:]
                b[row] -= factor * b[col]

    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - np.dot(a[row, row + 1:], x[row + 1:])) / a[row, row]
    return x
