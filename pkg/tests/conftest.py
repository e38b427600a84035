"""Shared helpers for the test suite: tiny grids, lakes, patches."""

import numpy as np

from boussamr.core import Bathymetry, GridGeometry, Patch


def flat_profile(depth):
    """Bathymetry callable for a constant-depth basin."""

    def profile(x):
        return np.full_like(np.asarray(x, dtype=float), -depth)

    return profile


def bumpy_profile(depth, bump=300.0, length=100_000.0):
    """Smoothly varying basin floor, nowhere dry."""

    def profile(x):
        x = np.asarray(x, dtype=float)
        return -depth + bump * np.sin(2.0 * np.pi * x / length) \
            + 0.3 * bump * np.cos(6.0 * np.pi * x / length)

    return profile


def make_geometry(n=32, x_hi=32_000.0, ratios=()):
    return GridGeometry(0.0, x_hi, n, tuple(ratios))


def make_lake_patch(n=32, depth=4000.0, x_hi=32_000.0, profile=None,
                    ratios=(), level=1, i_lo=0, i_hi=None, geom=None,
                    bathy=None):
    """A single patch initialized to still water (eta = 0 where wet)."""
    if geom is None:
        geom = make_geometry(n, x_hi, ratios)
    if bathy is None:
        bathy = Bathymetry(geom, profile or flat_profile(depth))
    patch = Patch(geom, bathy, level, i_lo, geom.ncells(level) if i_hi is None else i_hi)
    patch.h[:] = np.maximum(0.0, -patch.b)
    patch.hu[:] = 0.0
    patch.psi[:] = 0.0
    return patch
