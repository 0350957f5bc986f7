#!/usr/bin/env python3
"""Run the shipped presets and check that repeated runs are byte-identical.

Usage:
    # every preset, twice, into ./out/presets/{first,second}
    python scripts/run_presets.py

    # selected presets only
    python scripts/run_presets.py fig4 fig5a

    # also compare a multi-worker run against the single-worker one
    python scripts/run_presets.py --threads 4

    # list presets without running
    python scripts/run_presets.py --list
"""
from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from pathlib import Path

from dwhubbard.config import defaults, settings
from dwhubbard.runconfig import load_presets, resolve_config
from dwhubbard.runner import run

logger = logging.getLogger(__name__)


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_preset(name: str, preset: dict, out_root: Path, threads: int) -> bool:
    config = resolve_config(preset["config"])
    first = run(preset["command"], config, str(out_root / "first"), threads=1)
    second = run(preset["command"], config, str(out_root / "second"), threads=threads)

    ok = True
    for a, b in zip(first, second):
        if _digest(a) != _digest(b):
            print(f"  MISMATCH {a.name}")
            ok = False
    print(f"{name}: {'ok' if ok else 'differs'} ({', '.join(p.name for p in first)})")
    return ok


def main() -> None:
    parser = argparse.ArgumentParser(description="Run dw-hubbard presets twice and compare outputs")
    parser.add_argument("names", nargs="*", help="presets to run (default: all)")
    parser.add_argument("--out", default=str(Path(settings.output_dir) / "presets"))
    parser.add_argument("--threads", type=int, default=1, help="workers for the second run")
    parser.add_argument("--list", action="store_true")
    args = parser.parse_args()

    logging.basicConfig(level=logging.WARNING, format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")
    presets = load_presets(defaults.presets_path)
    if args.list:
        for name, preset in presets.items():
            if preset["alias_of"] is None:
                aliases = [a for a, p in presets.items() if p["alias_of"] == name]
                print(f"{name:14s} {preset['command']:9s} {preset['description']} [{', '.join(aliases)}]")
        return

    names = args.names or [n for n, p in presets.items() if p["alias_of"] is None]
    unknown = [n for n in names if n not in presets]
    if unknown:
        print(f"Unknown presets: {', '.join(unknown)}")
        sys.exit(2)

    failures = 0
    for name in names:
        try:
            ok = run_preset(name, presets[name], Path(args.out) / name, args.threads)
        except Exception as e:
            print(f"{name}: failed: {e}")
            ok = False
        failures += not ok
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
