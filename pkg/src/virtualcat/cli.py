"""Command-line entry point.

    virtualcat simulate <scenario> --config <path> [--out DIR] [--fock-cutoff N] [--seedless] [--no-dissipation]
    virtualcat calibrate --config <path>
    virtualcat verify
    virtualcat emit-config <scenario>

Exit codes: 0 success, 2 config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import SCENARIOS, default_config, emit_config, load_config
from .errors import ConfigError, NumericalError, TruncationError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("virtualcat")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="virtualcat", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and write CSV + metadata.json")
    sim.add_argument("scenario", choices=SCENARIOS)
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", default=None, help="output directory (default: output.directory of the config)")
    sim.add_argument("--fock-cutoff", type=int, default=None)
    # Nothing in the simulation is random; the flag only records that fact in metadata.
    sim.add_argument("--seedless", action="store_true")
    sim.add_argument("--no-dissipation", action="store_true")

    cal = sub.add_parser("calibrate", help="calibrate the multi-tone pi-pulse amplitude")
    cal.add_argument("--config", required=True)

    sub.add_parser("verify", help="run the fast invariant checks")

    emit = sub.add_parser("emit-config", help="print the default config of a scenario")
    emit.add_argument("scenario", choices=SCENARIOS)
    return parser


def _simulate(args) -> int:
    from .io import write_results
    from .scenarios import run_scenario

    cfg = load_config(args.config, args.scenario)
    if args.fock_cutoff is not None:
        cfg.model.fock_cutoff = args.fock_cutoff
    if args.no_dissipation:
        cfg.dissipation.enabled = False
    cfg.validate()
    result = run_scenario(cfg)
    result.metadata["seedless"] = bool(args.seedless)
    out = args.out or cfg.output.directory
    for path in write_results(result, out):
        print(path)
    return EXIT_OK


def _calibrate(args) -> int:
    from .scenarios import calibrated_amplitude, model_params

    cfg = load_config(args.config)
    cfg.pulse.amplitude = None
    p = model_params(cfg)
    amp, summary = calibrated_amplitude(cfg, p, None)
    print(json.dumps({"coupling": p.coupling, "n_tones": cfg.pulse.n_tones, "amplitude": amp, **summary}))
    return EXIT_OK


def _verify(args) -> int:
    from .verify import run_checks

    results = run_checks()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NUMERICAL


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "calibrate":
            return _calibrate(args)
        if args.command == "verify":
            return _verify(args)
        sys.stdout.write(emit_config(default_config(args.scenario)))
        return EXIT_OK
    except (ConfigError, TruncationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
