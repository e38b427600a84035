"""Config parsing, scenario defaults, and validation diagnostics."""

import math

import pytest

from boussamr.config import (RunConfig, SCENARIOS, load_config, make_config,
                             parse_config_text)
from boussamr.errors import ConfigError


class TestParsing:
    def test_comments_and_blank_lines_are_skipped(self):
        text = """
        # leading comment
        scenario = gaussian_pulse

        t_final = 120.0  # trailing comment
        """
        values = parse_config_text(text)
        assert values == {"scenario": "gaussian_pulse", "t_final": 120.0}

    def test_typed_values(self):
        values = parse_config_text(
            "base_cells = 640\n"
            "cfl_target = 0.45\n"
            "limiter = minmod\n"
            "boussinesq = off\n"
            "ratios = 2,4\n"
            "gauges = 1000.0, 2500\n")
        assert values["base_cells"] == 640
        assert values["cfl_target"] == 0.45
        assert values["limiter"] == "minmod"
        assert values["boussinesq"] is False
        assert values["ratios"] == (2, 4)
        assert values["gauges"] == (1000.0, 2500.0)

    def test_static_region_syntax(self):
        values = parse_config_text(
            "static_regions = 1000:2000:2:3; 5000:9000:1:2\n")
        assert values["static_regions"] == ((1000.0, 2000.0, 2, 3),
                                            (5000.0, 9000.0, 1, 2))

    def test_static_region_needs_four_fields(self):
        with pytest.raises(ConfigError) as err:
            parse_config_text("static_regions = 1000:2000:2\n")
        assert "x_lo:x_hi:min_level:max_level" in str(err.value)

    def test_unknown_key_reports_line_number(self):
        with pytest.raises(ConfigError) as err:
            parse_config_text("scenario = dam_break\nvorpal = 3\n")
        assert "line 2" in str(err.value)
        assert "vorpal" in str(err.value)

    def test_missing_equals_sign_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config_text("just some words\n")
        assert "key = value" in str(err.value)

    def test_bad_number_names_the_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config_text("base_cells = many\n")
        assert "base_cells" in str(err.value)
        with pytest.raises(ConfigError):
            parse_config_text("t_final = soon\n")

    def test_bad_boolean_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("boussinesq = maybe\n")


class TestValidation:
    def _base(self, **kw):
        values = dict(scenario="gaussian_pulse")
        values.update(kw)
        return values

    def test_every_builtin_scenario_validates(self):
        for name in SCENARIOS:
            cfg = make_config({"scenario": name})
            assert cfg.scenario == name
            assert cfg.x_hi > cfg.x_lo
            assert not math.isnan(cfg.x_lo)

    def test_scenario_required(self):
        with pytest.raises(ConfigError) as err:
            make_config({})
        assert "scenario" in str(err.value)

    def test_minimum_base_cells(self):
        with pytest.raises(ConfigError) as err:
            make_config(self._base(base_cells=8))
        assert "base_cells" in str(err.value)

    def test_ratios_must_match_levels(self):
        with pytest.raises(ConfigError) as err:
            make_config(self._base(max_levels=3, ratios=(2,)))
        assert "ratios" in str(err.value)
        cfg = make_config(self._base(max_levels=3, ratios=(2, 4)))
        assert cfg.ratios == (2, 4)

    def test_cfl_target_range(self):
        with pytest.raises(ConfigError) as err:
            make_config(self._base(cfl_target=1.5))
        assert "cfl_target" in str(err.value)
        with pytest.raises(ConfigError):
            make_config(self._base(cfl_target=0.0))

    def test_one_sided_periodic_rejected(self):
        with pytest.raises(ConfigError) as err:
            make_config(self._base(boundary_left="periodic"))
        assert "both sides" in str(err.value)

    def test_periodic_refinement_rejected(self):
        with pytest.raises(ConfigError) as err:
            make_config(self._base(boundary_left="periodic",
                                   boundary_right="periodic",
                                   max_levels=2, ratios=(2,)))
        assert "single-level" in str(err.value)

    def test_static_region_levels_checked(self):
        with pytest.raises(ConfigError) as err:
            make_config(self._base(max_levels=2, ratios=(2,),
                                   static_regions=((0.0, 1000.0, 1, 3),)))
        assert "levels" in str(err.value)
        with pytest.raises(ConfigError):
            make_config(self._base(static_regions=((5000.0, 1000.0, 1, 1),)))

    def test_domain_orientation_checked(self):
        with pytest.raises(ConfigError) as err:
            make_config(self._base(x_lo=10.0, x_hi=-10.0))
        assert "x_hi" in str(err.value)

    def test_bogus_limiter_and_bc_names(self):
        with pytest.raises(ConfigError):
            make_config(self._base(limiter="superbee"))
        with pytest.raises(ConfigError):
            make_config(self._base(boundary_left="reflecting"))
        with pytest.raises(ConfigError):
            make_config(self._base(velocity_init="impulsive"))

    def test_unknown_key_rejected_by_make_config(self):
        with pytest.raises(ConfigError):
            make_config({"scenario": "dam_break", "warp_factor": 9})


class TestDefaultsAndOverrides:
    def test_scenario_defaults_fill_unset_keys(self):
        cfg = make_config({"scenario": "lake_at_rest_bumpy"})
        assert cfg.x_lo == 0.0
        assert cfg.x_hi == 100_000.0
        assert cfg.base_cells == 200
        assert cfg.t_final == 200.0

    def test_explicit_keys_beat_scenario_defaults(self):
        cfg = make_config({"scenario": "lake_at_rest_bumpy",
                           "base_cells": 512, "t_final": 33.0})
        assert cfg.base_cells == 512
        assert cfg.t_final == 33.0
        assert cfg.x_hi == 100_000.0

    def test_dam_break_turns_dispersion_off_by_default(self):
        cfg = make_config({"scenario": "dam_break"})
        assert cfg.g == 1.0
        assert cfg.boussinesq is False
        cfg = make_config({"scenario": "dam_break", "g": 2.0})
        assert cfg.g == 2.0

    def test_crater_center_defaults_to_midpoint_when_unset(self):
        cfg = make_config({"scenario": "gaussian_pulse"})
        assert cfg.pulse_center == 30_000.0
        cfg = make_config({"scenario": "dam_break"})
        assert cfg.crater_center == 0.5 * (cfg.x_lo + cfg.x_hi)

    def test_load_config_applies_overrides(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("scenario = gaussian_pulse\n"
                        "base_cells = 300\n"
                        "t_final = 50\n")
        cfg = load_config(path)
        assert cfg.base_cells == 300 and cfg.t_final == 50.0
        cfg = load_config(path, overrides={"base_cells": 96})
        assert cfg.base_cells == 96
        assert cfg.t_final == 50.0

    def test_to_dict_round_trips_through_make_config(self):
        cfg = make_config({"scenario": "sloping_beach_crater",
                           "max_levels": 2, "ratios": (2,),
                           "static_regions": ((1000.0, 2000.0, 1, 2),),
                           "gauges": (120_000.0,)})
        d = cfg.to_dict()
        assert d["ratios"] == [2]
        assert d["static_regions"] == [[1000.0, 2000.0, 1, 2]]
        rebuilt = make_config({k: tuple(tuple(i) if isinstance(i, list) else i
                                        for i in v) if isinstance(v, list) else v
                               for k, v in d.items()})
        assert rebuilt.to_dict() == d

    def test_runconfig_defaults_are_sane(self):
        cfg = RunConfig()
        assert cfg.g == 9.81
        assert cfg.b1 == pytest.approx(1.0 / 15.0, abs=0.0)
        assert cfg.switch_depth == 10.0
        assert cfg.cfl_target == 0.9
        assert cfg.flag_buffer == 2
        assert cfg.regrid_interval == 4
