"""Canonical scenario generators: bathymetry, initial state, defaults.

Each scenario supplies a bathymetry profile, analytic initial
conditions (evaluated directly on every level of the initial
hierarchy), and default configuration values that explicit config keys
override.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import oracle
from .config import RunConfig
from .core import GHOST, Patch
from .errors import ConfigError, ContractViolation


def crater_initial(x, center: float, depth: float, diameter: float) -> np.ndarray:
    """Parabolic transient-crater surface displacement.

    eta(r) = depth * (r^2/R^2 - 1) for r <= sqrt(2) R with R =
    diameter/2: a bowl of the given depth with a raised rim, returning
    to zero at r = sqrt(2) R and beyond.  Volume-neutral under the
    radial measure (the lip exactly balances the bowl).
    """
    if depth <= 0.0 or diameter <= 0.0:
        raise ContractViolation("crater depth and diameter must be positive")
    x = np.asarray(x, dtype=float)
    radius = 0.5 * diameter
    r = np.abs(x - center)
    eta = depth * (r * r / (radius * radius) - 1.0)
    return np.where(r <= math.sqrt(2.0) * radius, eta, 0.0)


def outgoing_velocity_init(x, eta, h0, g: float, center: float,
                           mode: str = "nonlinear") -> np.ndarray:
    """Depth-averaged velocity radiating a disturbance away from center.

    nonlinear: u = sign(x - center) * 2 (sqrt(g (h0 + eta)) - sqrt(g h0))
    linearized: u = sign(x - center) * sqrt(g / h0) * eta

    Cells with no still water (h0 = 0) or no displacement get u = 0.
    Returns u (not hu).
    """
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    h0 = np.asarray(h0, dtype=float)
    if mode not in ("nonlinear", "linearized"):
        raise ContractViolation(f"unknown velocity init mode {mode!r}")
    wet = h0 > 0.0
    total = np.maximum(h0 + eta, 0.0)
    sign = np.sign(x - center)
    if mode == "nonlinear":
        u = 2.0 * (np.sqrt(g * total) - np.sqrt(g * h0))
    else:
        safe = np.where(wet, h0, 1.0)
        u = np.sqrt(g / safe) * eta
    return np.where(wet, sign * u, 0.0)


@dataclass
class ScenarioSetup:
    """Everything the driver needs to realize one scenario."""

    name: str
    profile: Callable[[np.ndarray], np.ndarray]
    eta_init: Callable[[np.ndarray], np.ndarray]
    u_init: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

    def init_patch(self, patch: Patch, dry_tol: float = 1e-3) -> None:
        """Evaluate the initial conditions on a patch, ghosts included."""
        x = patch.x_centers(include_ghosts=True)
        eta = self.eta_init(x)
        h = np.maximum(0.0, eta - patch.b)
        u = self.u_init(x, eta, patch.h0)
        hu = h * u
        dry = h <= dry_tol
        hu[dry] = 0.0
        patch.h[:] = h
        patch.hu[:] = hu
        patch.psi[:] = 0.0


_SCENARIO_DEFAULTS: dict[str, dict] = {
    "lake_at_rest_bumpy": dict(
        x_lo=0.0, x_hi=100_000.0, base_cells=200, t_final=200.0,
        ocean_depth=4000.0, amplitude_tol=0.05, gradient_tol=0.05),
    "dam_break": dict(
        x_lo=-0.5, x_hi=0.5, base_cells=1000, t_final=0.25, g=1.0,
        boussinesq=False, switch_depth=0.0, amplitude_tol=0.05, gradient_tol=0.05),
    "periodic_linear_wave": dict(
        base_cells=64, boundary_left="periodic", boundary_right="periodic",
        switch_depth=0.0, ocean_depth=4000.0, amplitude_tol=1e9, gradient_tol=1e9),
    "sloping_beach_crater": dict(
        x_lo=0.0, x_hi=260_000.0, base_cells=650, t_final=1200.0,
        ocean_depth=4000.0, amplitude_tol=1.0, gradient_tol=2.0),
    "gaussian_pulse": dict(
        x_lo=0.0, x_hi=120_000.0, base_cells=300, t_final=300.0,
        ocean_depth=4000.0, amplitude_tol=0.5, gradient_tol=1.0),
}


def apply_scenario_defaults(cfg: RunConfig, explicit: set) -> RunConfig:
    """Overlay scenario defaults onto config keys the user did not set."""
    defaults = dict(_SCENARIO_DEFAULTS.get(cfg.scenario, {}))
    if cfg.scenario == "periodic_linear_wave":
        # Domain is one wavelength; default run time is one period.
        lam = 2.0 * math.pi * cfg.ocean_depth / cfg.wave_kh0
        defaults.setdefault("x_lo", 0.0)
        defaults["x_hi"] = lam
        c = oracle.ms_dispersion(cfg.wave_kh0 / cfg.ocean_depth, cfg.ocean_depth, cfg.g, cfg.b1)
        defaults.setdefault("t_final", lam / c)
    if cfg.scenario == "sloping_beach_crater":
        defaults.setdefault("crater_center", 80_000.0)
    if cfg.scenario == "gaussian_pulse":
        defaults.setdefault("pulse_center", 30_000.0)
    for key, val in defaults.items():
        if key not in explicit:
            setattr(cfg, key, val)
    if math.isnan(cfg.crater_center):
        cfg.crater_center = 0.5 * (cfg.x_lo + cfg.x_hi)
    if math.isnan(cfg.pulse_center):
        cfg.pulse_center = 0.5 * (cfg.x_lo + cfg.x_hi)
    return cfg


def build_scenario(cfg: RunConfig) -> ScenarioSetup:
    """Construct the scenario named by the config.

    Unknown names raise ConfigError.  When ``bathymetry_file`` is set it
    replaces the scenario's analytic profile (the initial surface and
    velocity fields are unchanged).
    """
    name = cfg.scenario
    if name == "lake_at_rest_bumpy":
        setup = _lake_at_rest(cfg)
    elif name == "dam_break":
        setup = _dam_break(cfg)
    elif name == "periodic_linear_wave":
        setup = _periodic_wave(cfg)
    elif name == "sloping_beach_crater":
        setup = _sloping_beach(cfg)
    elif name == "gaussian_pulse":
        setup = _gaussian_pulse(cfg)
    else:
        raise ConfigError(f"unknown scenario {name!r}")
    return setup


def _still(x, eta, h0):
    return np.zeros_like(np.asarray(x, dtype=float))


def _lake_at_rest(cfg: RunConfig) -> ScenarioSetup:
    span = cfg.x_hi - cfg.x_lo
    d = cfg.ocean_depth

    def profile(x):
        s = (x - cfg.x_lo) / span
        b = (-d
             + 0.30 * d * np.exp(-((s - 0.35) / 0.06) ** 2)
             + 0.20 * d * np.exp(-((s - 0.60) / 0.04) ** 2)
             - 0.125 * d * np.exp(-((s - 0.15) / 0.05) ** 2))
        # A shoal crossing the dispersive switch depth and an island
        # poking above the surface: the balance must survive both.
        b = b + (d - 8.0) * np.exp(-((s - 0.72) / 0.015) ** 2)
        b = b + (d + 50.0) * np.exp(-((s - 0.88) / 0.01) ** 2)
        return b

    return ScenarioSetup(cfg.scenario, profile,
                         lambda x: np.zeros_like(np.asarray(x, dtype=float)), _still)


def _dam_break(cfg: RunConfig) -> ScenarioSetup:
    h_l, h_r = cfg.dam_h_left, cfg.dam_h_right
    if not (h_l > h_r >= 0.0):
        raise ConfigError("dam break needs dam_h_left > dam_h_right >= 0")
    base = max(h_r, 1e-6)

    def profile(x):
        return np.full_like(np.asarray(x, dtype=float), -base)

    def eta0(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0.0, h_l - base, h_r - base)

    return ScenarioSetup(cfg.scenario, profile, eta0, _still)


def _periodic_wave(cfg: RunConfig) -> ScenarioSetup:
    h0 = cfg.ocean_depth
    k = cfg.wave_kh0 / h0
    amp = cfg.wave_amplitude_rel * h0
    c = oracle.ms_dispersion(k, h0, cfg.g, cfg.b1)

    def profile(x):
        return np.full_like(np.asarray(x, dtype=float), -h0)

    def eta0(x):
        return amp * np.sin(k * (np.asarray(x, dtype=float) - cfg.x_lo))

    def u0(x, eta, h0_arr):
        # Project onto the model's right-going linear mode.
        wet = h0_arr > 0.0
        safe = np.where(wet, h0_arr, 1.0)
        return np.where(wet, c * eta / safe, 0.0)

    return ScenarioSetup(cfg.scenario, profile, eta0, u0)


def _sloping_beach(cfg: RunConfig) -> ScenarioSetup:
    d = cfg.ocean_depth
    span = cfg.x_hi - cfg.x_lo
    shelf_start = cfg.x_lo + 160_000.0 * (span / 260_000.0)
    shore = cfg.x_lo + 240_000.0 * (span / 260_000.0)
    top = 10.0

    def profile(x):
        x = np.asarray(x, dtype=float)
        b = np.full_like(x, -d)
        rising = (x >= shelf_start) & (x < shore)
        b[rising] = -d + (d + top) * (x[rising] - shelf_start) / (shore - shelf_start)
        b[x >= shore] = top
        return b

    def eta0(x):
        return crater_initial(x, cfg.crater_center, cfg.crater_depth, cfg.crater_diameter)

    def u0(x, eta, h0_arr):
        return outgoing_velocity_init(x, eta, h0_arr, cfg.g, cfg.crater_center,
                                      mode=cfg.velocity_init)

    return ScenarioSetup(cfg.scenario, profile, eta0, u0)


def _gaussian_pulse(cfg: RunConfig) -> ScenarioSetup:
    d = cfg.ocean_depth

    def profile(x):
        return np.full_like(np.asarray(x, dtype=float), -d)

    def eta0(x):
        x = np.asarray(x, dtype=float)
        arg = (x - cfg.pulse_center) / cfg.pulse_width
        return cfg.pulse_amplitude * np.exp(-arg * arg)

    def u0(x, eta, h0_arr):
        # Pure right-mover: radiate away from the left domain edge.
        return outgoing_velocity_init(x, eta, h0_arr, cfg.g, cfg.x_lo - 1.0,
                                      mode=cfg.velocity_init)

    return ScenarioSetup(cfg.scenario, profile, eta0, u0)


def canonical_scenarios(name: str, **overrides) -> tuple:
    """Build a named scenario with defaults; returns (config, setup).

    Convenience wrapper used by tests and the validation suites; the
    config file path through load_config hits the same code.
    """
    from .config import make_config

    values = dict(overrides)
    values["scenario"] = name
    cfg = make_config(values)
    return cfg, build_scenario(cfg)
