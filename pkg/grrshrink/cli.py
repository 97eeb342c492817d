"""Command-line front end: fit, trace and simulate."""

from __future__ import annotations

import argparse
import dataclasses
import logging
from pathlib import Path

import colorlog
import voluptuous as vol

from . import __version__
from .config import COMMANDS, OUTPUT_FORMATS, RunConfig, format_errors
from .const import DOMAIN, RISK_OK, PathKind, TraceKind
from .design import analyze, load_csv
from .exceptions import DataError, GRRError
from .shrinkage import PathSpec
from .simulate import load_scenario, run_mc, write_report
from .trace import (
    RISK_TRACES,
    build_trace,
    emit_csv,
    emit_json,
    emit_profile_svg,
    emit_svg,
    fit_summary,
    summary_dict,
)

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_CONFIG = 2


def setup_logging(verbose: bool) -> None:
    """Colored console output on the package logger."""

    handler = colorlog.StreamHandler()
    handler.setFormatter(
        colorlog.ColoredFormatter(
            "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"
        )
    )

    logger = logging.getLogger(DOMAIN)
    logger.handlers = [handler]
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="headered CSV of numeric columns")
    common.add_argument("--response", help="response column (default: last column)")
    common.add_argument("--path", choices=[kind.value for kind in PathKind])
    common.add_argument("--qmin", type=float)
    common.add_argument("--qmax", type=float)
    common.add_argument("--qstep", type=float)
    common.add_argument("--steps", type=int, help="grid steps per unit of m")
    common.add_argument(
        "--no-standardize-y", dest="standardize_y", action="store_false", default=None
    )
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument(
        "--format", dest="formats", action="append", choices=OUTPUT_FORMATS
    )
    common.add_argument(
        "--trace",
        dest="traces",
        action="append",
        choices=[kind.value for kind in TraceKind],
    )
    common.add_argument("--scenario", help="scenario JSON file for simulate")
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    parser = argparse.ArgumentParser(
        prog=DOMAIN, description="Maximum likelihood generalized ridge shrinkage."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    for command in COMMANDS:
        commands.add_parser(command, parents=[common])

    return parser


def _fit(config: RunConfig, out: Path) -> None:
    raw = load_csv(config.data, config.response)
    analysis = analyze(raw, config.standardize_y)
    path = PathSpec(
        kind=config.path,
        grid_steps_per_unit_m=config.steps,
        qmin=config.qmin,
        qmax=config.qmax,
        qstep=config.qstep,
    )
    table = build_trace(analysis.design, analysis.decomp, analysis.comps, path)

    _LOGGER.info(
        "%s path: m_ml=%.4f (n=%i, p=%i, R2=%.4f)",
        path.name,
        table.m_ml,
        analysis.n,
        analysis.p,
        analysis.comps.R2,
    )

    if config.command == "fit":
        for fmt in config.formats:
            if fmt != "json":
                _LOGGER.warning("fit only writes json, ignoring format %s", fmt)
        if "json" in config.formats:
            emit_json(fit_summary(analysis, table), out / "fit.json")
        return

    if "csv" in config.formats:
        emit_csv(table, out / "trace.csv")
    if "json" in config.formats:
        emit_json(summary_dict(analysis, table), out / "trace.json")
    if "svg" not in config.formats:
        return

    for kind in config.traces:
        if kind in RISK_TRACES and table.risk_status != RISK_OK:
            _LOGGER.warning("Skipping %s trace: %s", kind, table.risk_status)
            continue
        emit_svg(table, kind, out / f"{kind.value}.svg")
    emit_profile_svg(table, out / "profile.svg")


def _simulate(config: RunConfig, out: Path) -> None:
    for fmt in config.formats:
        if fmt not in ("csv", "json"):
            _LOGGER.warning("simulate only writes csv and json, ignoring format %s", fmt)

    scenario = dataclasses.replace(load_scenario(config.scenario), seed=config.seed)
    report = run_mc(scenario)

    for risk in report.estimators:
        _LOGGER.info(
            "%-12s mse=%.6g (se %.2g) ratio=%.4f (se %.2g)",
            risk.name,
            risk.mse,
            risk.mse_se,
            risk.ratio,
            risk.ratio_se,
        )

    write_report(report, out, config.formats)


def run(config: RunConfig) -> int:
    """Execute one command and return its exit status."""

    out = Path(config.out)

    try:
        out.mkdir(parents=True, exist_ok=True)

        if config.command == "simulate":
            _simulate(config, out)
        else:
            _fit(config, out)
    except vol.MultipleInvalid as err:
        for message in format_errors(err):
            _LOGGER.error("Invalid configuration: %s", message)
        return EXIT_CONFIG
    except DataError as err:
        _LOGGER.error("Invalid input: %s", err)
        return EXIT_CONFIG
    except GRRError as err:
        _LOGGER.error("%s failed (%s): %s", config.command, err.status, err)
        return EXIT_NUMERIC
    except OSError as err:
        _LOGGER.error("Cannot write to %s: %s", out, err)
        return EXIT_NUMERIC

    _LOGGER.info("Wrote %s output to %s", config.command, out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """Parse arguments, validate them and run the command."""

    args = build_parser().parse_args(argv)
    data = {key: value for key, value in vars(args).items() if value is not None}
    setup_logging(bool(data.get("verbose")))

    try:
        config = RunConfig.from_dict(data)
    except vol.MultipleInvalid as err:
        for message in format_errors(err):
            _LOGGER.error("Invalid configuration: %s", message)
        return EXIT_CONFIG

    return run(config)
