"""Command line: hcmu check|synthesize|sample|verify|energy --config FILE [--bundle FILE] [--out FILE].

Exit codes: 0 pass, 1 domain failure (infeasible plan, failed check), 2 usage
or input error (bad JSON, missing bundle).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

from . import io as hio
from .errors import ConfigError, HCMUError
from .existence import check_plan
from .verify import energy_table, run_audit

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _emit_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_bytes(text.encode())


def _metric(args, strict: bool):
    if not args.bundle:
        raise ConfigError("--bundle is required for this command")
    return hio.metric_from_bundle(hio.load_json(args.bundle), strict=strict)


def cmd_check(cfg: hio.RunConfig, args) -> int:
    report = check_plan(cfg.plan)
    hio.write_json(hio.report_to_dict(report), args.out, sys.stdout)
    return EXIT_OK if report.feasible else EXIT_FAIL


def cmd_synthesize(cfg: hio.RunConfig, args) -> int:
    real, params = hio.synthesize(cfg)
    hio.write_json(hio.bundle_from(real, params), args.out, sys.stdout)
    for w in real.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_sample(cfg: hio.RunConfig, args) -> int:
    _emit_text(hio.sample_csv(_metric(args, True), cfg.sampling), args.out)
    return EXIT_OK


def cmd_verify(cfg: hio.RunConfig, args) -> int:
    # lenient load: an inconsistent bundle should be reported as failing, not rejected
    report = run_audit(_metric(args, False), cfg.tolerances, cfg.seed, cfg.quadrature)
    hio.write_json(report.to_dict(), args.out, sys.stdout)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_energy(cfg: hio.RunConfig, args) -> int:
    n_max = args.n_max if args.n_max is not None else cfg.tolerances.energy_n_max
    rows = energy_table(_metric(args, True), n_max, cfg.quadrature)
    hio.write_json([asdict(r) for r in rows], args.out, sys.stdout)
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "synthesize": cmd_synthesize,
    "sample": cmd_sample,
    "verify": cmd_verify,
    "energy": cmd_energy,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hcmu", description="HCMU metrics with cusps and cone points on the sphere")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="run configuration (JSON)")
    p.add_argument("--bundle", help="metric bundle written by 'synthesize'")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--n-max", type=int, default=None, help="energy: highest moment (default from config)")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = hio.load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HCMUError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
