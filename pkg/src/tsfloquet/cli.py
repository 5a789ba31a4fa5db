"""Command line interface.

    tsfloquet analyze --config cfg.json [--report out.json] [--samples out.csv]
                      [--figures dir | --no-figures] [--tol key=value ...]
    tsfloquet verify  --config cfg.json [--tol key=value ...]

Exit codes: 0 success, 1 config error, 2 periodicity verification failure,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import SCHEMA_VERSION, load_config
from .errors import ConfigError, TimeScaleError
from .pipeline import emit_report, emit_samples, run_analysis
from .shifts import verify_periodicity

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PERIODICITY = 2
EXIT_NUMERIC = 3


def _parse_tols(pairs: list[str]) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"--tol expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise ConfigError(f"tolerance {key!r} needs a number, got {val!r}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsfloquet",
        description="Floquet analysis of linear dynamic systems on "
                    "shift-periodic time scales")
    parser.add_argument("--version", action="version",
                        version=f"tsfloquet {__version__} (report schema {SCHEMA_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analyze", help="run the full analysis pipeline")
    p_an.add_argument("--config", required=True, help="path to the JSON config")
    p_an.add_argument("--report", default=None, help="override the report path")
    p_an.add_argument("--samples", default=None, help="override the CSV path")
    p_an.add_argument("--figures", default=None, help="override the figure directory")
    p_an.add_argument("--no-figures", action="store_true",
                      help="skip figure rendering")
    p_an.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                      help="override one tolerance (repeatable)")

    p_ve = sub.add_parser("verify", help="run only the periodicity checks")
    p_ve.add_argument("--config", required=True)
    p_ve.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE")
    return parser


def cmd_analyze(args) -> int:
    cfg = load_config(args.config, overrides=_parse_tols(args.tol))
    if args.report:
        cfg.report_path = Path(args.report)
    if args.samples:
        cfg.samples_path = Path(args.samples)
    if args.figures:
        cfg.figures_dir = Path(args.figures)
    if args.no_figures:
        cfg.figures_dir = None

    result = run_analysis(cfg)
    emit_report(result, cfg.report_path)
    if result.verification_failed:
        bad = [name for name, rep in result.report["verification"].items()
               if isinstance(rep, dict) and not rep.get("pass", True)]
        print(f"periodicity verification failed ({', '.join(bad)}); "
              f"report written to {cfg.report_path}", file=sys.stderr)
        return EXIT_PERIODICITY

    emit_samples(result, cfg.samples_path)
    figure_paths = []
    if cfg.figures_dir is not None:
        from .plots import render_figures

        figure_paths = render_figures(result, cfg.figures_dir)
    stab = result.report["stability"]
    print(f"report:  {cfg.report_path}")
    print(f"samples: {cfg.samples_path} ({len(result.sample_rows)} rows)")
    for p in figure_paths:
        print(f"figure:  {p}")
    print(f"verdicts: tracks={stab['verdict_tracks']} "
          f"multipliers={stab['verdict_multipliers']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_config(args.config, overrides=_parse_tols(args.tol))
    tol = cfg.tolerances["periodicity"]
    checks = {
        "scale": verify_periodicity(cfg.shifts, cfg.window, mode="scale", rel_tol=tol),
        "axioms": verify_periodicity(cfg.shifts, cfg.window, mode="axioms", rel_tol=tol),
        "system": verify_periodicity(cfg.shifts, cfg.window, f=cfg.system,
                                     mode="delta_function", rel_tol=tol),
    }
    if cfg.forcing is not None:
        checks["forcing"] = verify_periodicity(cfg.shifts, cfg.window,
                                               f=cfg.forcing,
                                               mode="delta_function", rel_tol=tol)
    ok = True
    for name, rep in checks.items():
        status = "pass" if rep.passed else "FAIL"
        print(f"{name:8s} {status}  ({rep.checked} checks, "
              f"{len(rep.violations)} violations)")
        for v in rep.violations[:10]:
            print(f"    {v.check} at {v.where}: residual {v.residual:.3e}")
        ok = ok and rep.passed
    return EXIT_OK if ok else EXIT_PERIODICITY


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_analyze(args)
        return cmd_verify(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TimeScaleError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
