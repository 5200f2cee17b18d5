"""``timesplit`` command line: evaluate, importance, chemspace, leakage, synth.

Exit codes: 0 success, 1 runtime failure, 2 config or validation failure.
Failures print one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import pipeline
from .pipeline import ConfigError
from .synthetic import SyntheticError, SyntheticSpec, generate_synthetic, write_synthetic

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

_COMMANDS = {
    "evaluate": (pipeline.run_evaluate, ("labels", "dates")),
    "importance": (pipeline.run_importance, ("labels", "dates")),
    "chemspace": (pipeline.run_chemspace, ("dates",)),
    "leakage": (pipeline.run_leakage, ("labels", "dates", "approvals", "publications")),
}


def _error(kind: str, messages: list[str], code: int) -> int:
    json.dump({"error": kind, "exit_code": code, "messages": messages}, sys.stderr, sort_keys=True)
    sys.stderr.write("\n")
    return code


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _jobs(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("--jobs must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timesplit", description="Time-split versus random-split evaluation toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*_COMMANDS, "synth"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "synth", help="JSON run config (synth: JSON synthetic spec)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--jobs", type=_jobs, default=1)
        p.add_argument("--seed", type=_seed, help="base seed (overrides the config)")
        p.add_argument("--explain", action="store_true", help="print the resolved config and exit")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _synth(args) -> int:
    raw = {}
    if args.config:
        if not os.path.isfile(args.config):
            return _error("config", [f"missing config file: {os.path.abspath(args.config)}"], EXIT_CONFIG)
        with open(args.config, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                return _error("config", [f"config is not valid JSON: {exc}"], EXIT_CONFIG)
    if args.seed is not None:
        raw["seed"] = args.seed
    try:
        spec = SyntheticSpec.from_dict(raw)
        spec.validate()
    except (SyntheticError, TypeError, ValueError) as exc:
        return _error("config", [str(exc)], EXIT_CONFIG)
    if args.explain:
        print(json.dumps(spec.to_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    if not args.out:
        return _error("config", ["output_dir is not set (use --out)"], EXIT_CONFIG)
    write_synthetic(generate_synthetic(spec), args.out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            return _synth(args)
        run, required = _COMMANDS[args.command]
        out = args.out if args.out is not None else (None if not args.explain else ".")
        cfg = pipeline.load_config(args.config, args.seed, out, required)
        if args.explain:
            print(json.dumps(cfg, indent=2, sort_keys=True))
            return EXIT_OK
        paths = run(cfg, jobs=args.jobs)
    except ConfigError as exc:
        return _error("config", exc.messages, EXIT_CONFIG)
    except FileNotFoundError as exc:
        return _error("config", [str(exc)], EXIT_CONFIG)
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        logging.getLogger(__name__).debug("failure", exc_info=True)
        return _error("runtime", [f"{type(exc).__name__}: {exc}"], EXIT_RUNTIME)
    if args.verbose:
        for key, path in sorted(paths.items()):
            print(f"{key}: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
