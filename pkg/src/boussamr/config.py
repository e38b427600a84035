"""Run configuration: flat key = value files, defaults, validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from .errors import ConfigError

SCENARIOS = ("lake_at_rest_bumpy", "dam_break", "periodic_linear_wave",
             "sloping_beach_crater", "gaussian_pulse")
_BC_KINDS = ("extrap", "wall", "periodic")
_LIMITERS = ("mc", "minmod")
_INTEGRATORS = ("euler", "rk2")
_VELOCITY_INITS = ("nonlinear", "linearized")


@dataclass
class RunConfig:
    """Everything a run needs, echoed verbatim into the output manifest.

    Scenario generators supply their own defaults for domain extent and
    physical parameters; explicit keys in the config file win.
    """

    scenario: str = ""
    x_lo: float = math.nan          # nan: defer to the scenario default
    x_hi: float = math.nan
    base_cells: int = 200
    max_levels: int = 1
    ratios: tuple[int, ...] = ()
    t_final: float = 0.0
    output_interval: float = 0.0    # 0: write only initial and final frames
    gauges: tuple[float, ...] = ()

    g: float = 9.81
    b1: float = 1.0 / 15.0
    switch_depth: float = 10.0
    dry_tolerance: float = 1e-3
    cfl_target: float = 0.9
    limiter: str = "mc"
    source_integrator: str = "euler"
    boussinesq: bool = True
    velocity_init: str = "nonlinear"

    boundary_left: str = "extrap"
    boundary_right: str = "extrap"

    amplitude_tol: float = 0.05
    gradient_tol: float = 0.05
    flag_buffer: int = 2
    regrid_interval: int = 4
    static_regions: tuple[tuple[float, float, int, int], ...] = ()

    ocean_depth: float = 4000.0
    crater_depth: float = 1000.0
    crater_diameter: float = 3000.0
    crater_center: float = math.nan
    wave_kh0: float = 1.0
    wave_amplitude_rel: float = 1e-4
    pulse_amplitude: float = 5.0
    pulse_width: float = 2000.0
    pulse_center: float = math.nan
    dam_h_left: float = 2.0
    dam_h_right: float = 1.0
    bathymetry_file: str = ""

    def validate(self) -> "RunConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.base_cells < 16:
            raise ConfigError(f"base_cells must be at least 16, got {self.base_cells}")
        if self.max_levels < 1:
            raise ConfigError("max_levels must be at least 1")
        if len(self.ratios) != self.max_levels - 1:
            raise ConfigError(
                f"ratios must list max_levels-1 = {self.max_levels - 1} factors, got {len(self.ratios)}")
        if any(r < 1 for r in self.ratios):
            raise ConfigError("refinement ratios must be >= 1")
        if not (0.0 < self.cfl_target <= 1.0):
            raise ConfigError("cfl_target must lie in (0, 1]")
        if self.g <= 0.0:
            raise ConfigError("g must be positive")
        if self.dry_tolerance <= 0.0:
            raise ConfigError("dry_tolerance must be positive")
        if self.switch_depth < 0.0:
            raise ConfigError("switch_depth must be non-negative")
        if self.t_final < 0.0:
            raise ConfigError("t_final must be non-negative")
        if self.output_interval < 0.0:
            raise ConfigError("output_interval must be non-negative")
        if self.limiter not in _LIMITERS:
            raise ConfigError(f"limiter must be one of {_LIMITERS}")
        if self.source_integrator not in _INTEGRATORS:
            raise ConfigError(f"source_integrator must be one of {_INTEGRATORS}")
        if self.velocity_init not in _VELOCITY_INITS:
            raise ConfigError(f"velocity_init must be one of {_VELOCITY_INITS}")
        for side, kind in (("boundary_left", self.boundary_left),
                           ("boundary_right", self.boundary_right)):
            if kind not in _BC_KINDS:
                raise ConfigError(f"{side} must be one of {_BC_KINDS}")
        periodic = (self.boundary_left == "periodic", self.boundary_right == "periodic")
        if any(periodic):
            if not all(periodic):
                raise ConfigError("periodic boundaries must be set on both sides")
            if self.max_levels != 1:
                raise ConfigError("periodic boundaries support single-level runs only")
        if self.flag_buffer < 0 or self.regrid_interval < 0:
            raise ConfigError("flag_buffer must be >= 0 and regrid_interval >= 0 "
                              "(0 disables regridding)")
        for region in self.static_regions:
            x0, x1, lo, hi = region
            if not (x1 > x0):
                raise ConfigError(f"static region {region} has non-positive extent")
            if not (1 <= lo <= hi <= self.max_levels):
                raise ConfigError(f"static region {region} levels outside 1..{self.max_levels}")
        if not math.isnan(self.x_lo) and not math.isnan(self.x_hi) and self.x_hi <= self.x_lo:
            raise ConfigError("x_hi must exceed x_lo")
        return self

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = [list(item) if isinstance(item, tuple) else item for item in v]
            out[f.name] = v
        return out


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in ("ratios",):
        return tuple(int(tok) for tok in raw.split(",") if tok.strip()) if raw else ()
    if key in ("gauges",):
        return tuple(float(tok) for tok in raw.split(",") if tok.strip()) if raw else ()
    if key == "static_regions":
        regions = []
        for chunk in raw.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = chunk.split(":")
            if len(parts) != 4:
                raise ConfigError(f"static region {chunk!r} must be x_lo:x_hi:min_level:max_level")
            regions.append((float(parts[0]), float(parts[1]), int(parts[2]), int(parts[3])))
        return tuple(regions)
    if key == "boussinesq":
        low = raw.lower()
        if low in ("true", "on", "yes", "1"):
            return True
        if low in ("false", "off", "no", "0"):
            return False
        raise ConfigError(f"boussinesq must be a boolean, got {raw!r}")
    default = getattr(RunConfig(), key)
    if isinstance(default, bool):
        return raw.lower() in ("true", "on", "yes", "1")
    if isinstance(default, int):
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {raw!r}") from exc
    if isinstance(default, float):
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{key} must be a number, got {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key = value, got {line.strip()!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown configuration key {key!r}")
        values[key] = _parse_value(key, raw)
    return values


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Read a config file, apply overrides, validate."""
    with open(path, "r", encoding="utf-8") as fh:
        values = parse_config_text(fh.read())
    if overrides:
        values.update(overrides)
    return make_config(values)


def make_config(values: dict) -> RunConfig:
    for key in values:
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key {key!r}")
    cfg = RunConfig(**values)
    from .scenarios import apply_scenario_defaults  # deferred: scenarios imports config

    cfg = apply_scenario_defaults(cfg, set(values))
    return cfg.validate()
