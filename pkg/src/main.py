"""Command-line entry point for hk-twistor.

Subcommands:
- verify: run every check on a structure file and write a JSON report
- reconstruct: write the grid-sampled metric and its signature
- sweep: write a CSV of zeta-dependent quantities at one chart point
- zoo: write the structure file of a built-in model
- sections: check real twistor sections at one chart point

Exit codes: 0 when every check passes, 1 when a check fails, 2 on input or
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from collections.abc import Sequence
from typing import Any

from loguru import logger
from pydantic import ValidationError

from src import __version__
from src.core.configs import settings
from src.core.errors import InputError, TwistorError
from src.core.logging import setup_logging
from src.models.schemas import CheckRecord, RunReport, Signature
from src.services.structure_files import (
    canonical_json,
    load_family,
    structure_for_model,
    write_output,
)
from src.twistor.chart_fields import (
    reconstruct_metric_field,
    roundtrip_check,
    section_checks,
    verify_chart,
    zeta_sweep,
)
from src.twistor.zoo import get_model, list_models

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


# --- Helpers ---
def _config_echo(**overrides: Any) -> dict[str, Any]:
    config = {
        "tolerances": settings.tolerances.model_dump(mode="json"),
        "finite_difference": settings.finite_difference.model_dump(mode="json"),
        "sampling": settings.sampling.model_dump(mode="json"),
    }
    config["overrides"] = {k: v for k, v in overrides.items() if v is not None}
    return config


def _run_report(
    command: str,
    checks: list[CheckRecord],
    started: float,
    *,
    digest: str | None = None,
    seed: int | None = None,
    signature: Signature | None = None,
    **overrides: Any,
) -> RunReport:
    return RunReport(
        tool_version=__version__,
        command=command,
        input_digest=digest,
        seed=seed,
        config=_config_echo(**overrides),
        checks=checks,
        signature=signature,
        passed=all(check.passed for check in checks),
        wall_time=time.perf_counter() - started,
    )


def _finish(report: RunReport, out: str | None) -> int:
    write_output(canonical_json(report), out)
    if not report.passed:
        failed = [check.name for check in report.checks if not check.passed]
        logger.warning(f"{report.command}: failed checks {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _parse_point(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise InputError(f"--point must be comma-separated numbers, got '{text}'") from exc


def _parse_params(pairs: Sequence[str]) -> dict[str, Any]:
    params: dict[str, Any] = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise InputError(f"--param expects key=value, got '{pair}'")
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    return params


# --- Subcommands ---
def cmd_verify(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    family, model, digest = load_family(args.file)
    seed = settings.sampling.seed if args.seed is None else args.seed
    report = verify_chart(family, tol=args.tol, zeta_samples=args.samples, seed=seed)
    checks = list(report.checks)
    if model is not None:
        checks.extend(roundtrip_check(model, chart=family.chart))
    run = _run_report(
        "verify",
        checks,
        started,
        digest=digest,
        seed=seed,
        signature=report.signature,
        tol=args.tol,
        samples=args.samples,
    )
    return _finish(run, args.out)


def cmd_reconstruct(args: argparse.Namespace) -> int:
    family, _, _ = load_family(args.file)
    grid = reconstruct_metric_field(family)
    write_output(canonical_json(grid), args.out)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    family, _, _ = load_family(args.file)
    rows = zeta_sweep(family, _parse_point(args.point), args.zeta_grid)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["zeta_re", "zeta_im", "check", "value"])
    for zeta, check, value in rows:
        writer.writerow([repr(zeta.real), repr(zeta.imag), check, repr(value)])
    write_output(buffer.getvalue(), args.out)
    return EXIT_OK


def cmd_zoo(args: argparse.Namespace) -> int:
    model = get_model(args.name, _parse_params(args.param))
    write_output(canonical_json(structure_for_model(model)), args.out)
    return EXIT_OK


def cmd_sections(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    family, _, digest = load_family(args.file)
    seed = settings.sampling.seed if args.seed is None else args.seed
    checks = section_checks(family, _parse_point(args.point), args.count, seed)
    run = _run_report("sections", checks, started, digest=digest, seed=seed, count=args.count)
    return _finish(run, args.out)


# --- Argument Parsing ---
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hk", description="Twistor reconstruction and verification of pseudo-hyper-Kähler structures."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Override HK_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="Run every check on a structure file")
    verify.add_argument("file")
    verify.add_argument("--tol", type=float, default=None, help="Identity tolerance")
    verify.add_argument("--samples", type=int, default=None, help="Random zeta values per point")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--out", default=None, help="Report path (stdout when omitted)")
    verify.set_defaults(handler=cmd_verify)

    reconstruct = sub.add_parser("reconstruct", help="Write the reconstructed metric on the grid")
    reconstruct.add_argument("file")
    reconstruct.add_argument("--out", default=None)
    reconstruct.set_defaults(handler=cmd_reconstruct)

    sweep = sub.add_parser("sweep", help="CSV of zeta-dependent quantities at one point")
    sweep.add_argument("file")
    sweep.add_argument("--zeta-grid", type=int, default=8, help="N, for N^2 zeta values")
    sweep.add_argument("--point", default=None, help="x0,x1,... (chart centre when omitted)")
    sweep.add_argument("--out", default=None)
    sweep.set_defaults(handler=cmd_sweep)

    zoo = sub.add_parser("zoo", help=f"Write a built-in model: {', '.join(list_models())}")
    zoo.add_argument("name")
    zoo.add_argument("--param", action="append", default=[], help="key=value (JSON value)")
    zoo.add_argument("--out", default=None)
    zoo.set_defaults(handler=cmd_zoo)

    sections = sub.add_parser("sections", help="Check real twistor sections at one point")
    sections.add_argument("file")
    sections.add_argument("--count", type=int, default=10)
    sections.add_argument("--seed", type=int, default=None)
    sections.add_argument("--point", default=None, help="x0,x1,... (chart centre when omitted)")
    sections.add_argument("--out", default=None)
    sections.set_defaults(handler=cmd_sections)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help/--version
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT_ERROR
    setup_logging(args.log_level or settings.log_level, settings.log_file)
    logger.debug(f"hk {__version__}: {args.command}")
    try:
        return int(args.handler(args))
    except InputError as exc:
        print(f"hk {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ValidationError as exc:
        print(f"hk {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except TwistorError as exc:
        print(f"hk {args.command}: check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
