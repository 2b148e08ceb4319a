"""Command-line entry point: ``excitonkerr run|compare|presets|version``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import load_config
from .errors import ConfigError, ExcitonKerrError
from .presets import preset, preset_names
from .runner import compare, report_summary, run, with_overrides


def _pair(kind, cast):
    def parse(text):
        parts = text.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"{kind} must look like 'a,b', got {text!r}")
        try:
            return cast[0](parts[0]), cast[1](parts[1])
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad {kind} {text!r}: {exc}") from None
    return parse


def _resolve(target: str):
    # a preset name or a path to a TOML/JSON scenario
    if target in preset_names() and not Path(target).exists():
        return preset(target)
    return load_config(target)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="excitonkerr",
        description="Photon-exciton Kerr model: analytic witnesses, exact dynamics, comparisons.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_common(p):
        p.add_argument("config", help="scenario file (.toml or .json) or a preset name")
        p.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
        p.add_argument("--grid", type=_pair("grid", (float, int)), metavar="T_MAX,N",
                       help="uniform grid on [0, T_MAX] with N points")
        p.add_argument("--dims", type=_pair("dims", (int, int)), metavar="NA,NC",
                       help="Fock truncation of the exciton and photon modes")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker processes for sweeps")

    add_common(sub.add_parser("run", help="run a scenario and write CSV + sidecar"))
    add_common(sub.add_parser("compare", help="analytic vs exact closed evolution report"))
    p = sub.add_parser("presets", help="list presets or print one as JSON")
    p.add_argument("name", nargs="?")
    sub.add_parser("version", help="print the package version")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "version":
            print(__version__)
            return 0
        if args.verb == "presets":
            if args.name is None:
                for name in preset_names():
                    print(name)
            else:
                print(json.dumps(preset(args.name).to_json_dict(), indent=2, sort_keys=True))
            return 0
        config = with_overrides(_resolve(args.config), grid=args.grid, dims=args.dims, out=args.out)
        if args.verb == "run":
            for result in run(config, workers=args.jobs):
                for path in result.files:
                    print(path)
        else:
            for result in compare(config, workers=args.jobs):
                print(report_summary(result.name, result.report))
                for path in result.files:
                    print(path)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ExcitonKerrError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
