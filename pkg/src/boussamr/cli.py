"""Command-line interface.

Subcommands:
  run          advance a configured scenario and write frames/gauges/manifest
  validate     run a named validation suite and report PASS/FAIL per check
  convergence  grid-refinement study printing L1 errors and observed orders
  plot         render frame files from a run directory to SVG

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure (the last valid frame is still flushed).
"""

from __future__ import annotations

import argparse
import sys

from . import __version__, io, validate
from .config import make_config, parse_config_text
from .driver import run_config
from .errors import ConfigError, NumericalError, SingularSystemError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _collect_values(args) -> dict:
    """Merge --config file contents with key=value overrides."""
    values = {}
    if args.config:
        with open(args.config) as fh:
            values.update(parse_config_text(fh.read()))
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError("override %r is not of the form key=value" % item)
        key, _, raw = item.partition("=")
        values.update(parse_config_text("%s = %s" % (key.strip(), raw.strip())))
    if args.scenario:
        values["scenario"] = args.scenario
    return values


def cmd_run(args) -> int:
    values = _collect_values(args)
    if "scenario" not in values:
        raise ConfigError("field 'scenario': missing (pass --scenario or a config file)")
    cfg = make_config(values)
    result = run_config(cfg, out_dir=args.out, quiet=args.quiet)
    if not args.quiet and args.out:
        print("wrote %d frames to %s" % (len(result.frames), args.out))
    return EXIT_OK


def cmd_validate(args) -> int:
    checks = validate.run_suite(args.suite)
    failed = 0
    for check in checks:
        print(check.line())
        failed += 0 if check.passed else 1
    print("%d/%d checks passed" % (len(checks) - failed, len(checks)))
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def cmd_convergence(args) -> int:
    resolutions = [int(tok) for tok in args.cells.split(",") if tok.strip()]
    overrides = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError("override %r is not of the form key=value" % item)
        key, _, raw = item.partition("=")
        overrides.update(parse_config_text("%s = %s" % (key.strip(), raw.strip())))
    report = validate.convergence_study(args.scenario, resolutions, overrides)
    print("scenario: %s" % report["scenario"])
    print("%10s  %14s  %8s" % ("cells", "L1 error", "order"))
    errors, orders = report["errors"], report["orders"]
    for idx, err in enumerate(errors):
        order = "%8.2f" % orders[idx - 1] if idx > 0 else "%8s" % "-"
        print("%10d  %14.6e  %s" % (report["resolutions"][idx], err, order))
    return EXIT_OK


def cmd_plot(args) -> int:
    written = io.plot_frames(args.frame_dir, plot_dir=args.out, quiet=args.quiet)
    if not args.quiet:
        print("rendered %d frame plots" % len(written))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boussamr",
        description="dispersive shallow-water solver with adaptive refinement")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario")
    p_run.add_argument("--config", help="path to a key = value config file")
    p_run.add_argument("--scenario", help="scenario name (overrides the config file)")
    p_run.add_argument("--out", help="output directory for frames/gauges/manifest")
    p_run.add_argument("--quiet", action="store_true", help="suppress progress output")
    p_run.add_argument("overrides", nargs="*", metavar="key=value",
                       help="config overrides")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="run a validation suite")
    p_val.add_argument("suite", nargs="?", default="all",
                       help="suite name (default: all); one of %s"
                       % ", ".join(sorted(validate.SUITES)))
    p_val.set_defaults(func=cmd_validate)

    p_conv = sub.add_parser("convergence", help="grid-refinement study")
    p_conv.add_argument("scenario", help="scenario name")
    p_conv.add_argument("--cells", default="64,128,256",
                        help="comma-separated resolution ladder")
    p_conv.add_argument("overrides", nargs="*", metavar="key=value",
                        help="config overrides")
    p_conv.set_defaults(func=cmd_convergence)

    p_plot = sub.add_parser("plot", help="render frames from a run directory")
    p_plot.add_argument("frame_dir", help="directory containing frame files")
    p_plot.add_argument("--out", help="directory for SVG output (default: frame_dir)")
    p_plot.add_argument("--quiet", action="store_true")
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    # argparse cannot intermix optionals with the trailing key=value
    # positionals (e.g. "convergence dam_break --cells 100,200 t_final=0.1"),
    # so fold leftover override-shaped tokens back in by hand.
    args, extra = parser.parse_known_args(argv)
    if extra:
        if hasattr(args, "overrides") and \
                all("=" in tok and not tok.startswith("-") for tok in extra):
            args.overrides = list(args.overrides) + extra
        else:
            parser.error("unrecognized arguments: %s" % " ".join(extra))
    try:
        return args.func(args)
    except ConfigError as err:
        print("config error: %s" % err, file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, SingularSystemError) as err:
        print("numerical failure: %s" % err, file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
