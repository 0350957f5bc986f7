"""Entry point for the dw-hubbard command-line tool."""
from __future__ import annotations

import argparse
import logging
import sys

from pydantic import ValidationError

from dwhubbard import __version__
from dwhubbard.config import defaults, settings
from dwhubbard.core import DomainError, NumericError
from dwhubbard.runconfig import ConfigError, load_presets, parse_sweep, resolve_config
from dwhubbard.runner import COMMANDS, run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _setup_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, defaults.log_level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run document")
    common.add_argument("--preset", help="named preset from the presets file")
    common.add_argument("--out", help=f"output directory (default: {settings.output_dir})")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--threads", type=int, help="sweep workers")
    common.add_argument("--model", choices=["fermion", "boson"])
    common.add_argument("--init", choices=["same-site", "split", "split-antisymmetric"])
    common.add_argument("--sweep", help="PARAM=START:STOP:STEP, PARAM in U/J, a_s, V0")
    common.add_argument("--u-over-j", type=float, dest="u_over_j", help="on-site U in units of J")
    common.add_argument("--t-max", type=float, dest="t_max", help="evolution time in 1/J")
    common.add_argument("--dt", type=float, help="time step in 1/J")

    parser = argparse.ArgumentParser(prog="dw-hubbard", description="Two-site double-well Hubbard toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "trap": "single-particle doublet, modes and tunneling",
        "scatter": "phase shifts and effective-range fit of the model potential",
        "params": "Hubbard couplings from localized modes",
        "pair": "on-site U from the interacting pair in a harmonic well",
        "spectrum": "two-particle eigenenergies",
        "dynamics": "occupancies and tunneling probabilities in time",
        "entropy": "entanglement entropies and Q parameters",
        "fluct": "ground-state number and phase fluctuations",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    data: dict = {}
    if args.format:
        data.setdefault("output", {})["format"] = args.format
    if args.model:
        data.setdefault("model", {})["statistics"] = args.model
    if args.u_over_j is not None:
        data.setdefault("model", {})["U"] = {"value": args.u_over_j, "unit": "J"}
    if args.init:
        data.setdefault("dynamics", {})["init"] = args.init
    if args.t_max is not None:
        data.setdefault("dynamics", {})["t_max"] = {"value": args.t_max, "unit": "1/J"}
    if args.dt is not None:
        data.setdefault("dynamics", {})["step"] = {"value": args.dt, "unit": "1/J"}
    if args.sweep:
        data["sweep"] = parse_sweep(args.sweep)
    return data


def _preset(name: str | None, command: str) -> dict | None:
    if not name:
        return None
    presets = load_presets(defaults.presets_path)
    if name not in presets:
        raise ConfigError(f"Unknown preset: {name}", [f"preset: available {', '.join(sorted(presets)) or 'none'}"])
    preset = presets[name]
    if preset["command"] and preset["command"] != command:
        logger.warning("Preset %s is meant for '%s', running '%s'", name, preset["command"], command)
    return preset["config"]


def cli(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(_preset(args.preset, args.command), args.config, _overrides(args))
        paths = run(args.command, config, args.out, args.threads)
    except (ConfigError, DomainError, ValidationError) as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_CONFIG
    except NumericError as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERIC
    for p in paths:
        logger.info("Output: %s", p)
    return EXIT_OK


def main() -> None:
    _setup_logging()
    sys.exit(cli())


if __name__ == "__main__":
    main()
