"""Validation of run configurations and simulation scenarios."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import voluptuous as vol

from .const import (
    DEFAULT_QMAX,
    DEFAULT_QMIN,
    DEFAULT_QSTEP,
    DEFAULT_STEPS_PER_UNIT,
    PathKind,
    TraceKind,
)

COMMANDS = ["fit", "trace", "simulate"]
OUTPUT_FORMATS = ["csv", "json", "svg"]
ORIENTATIONS = ["explicit", "major_axis", "minor_axis"]

DEFAULT_FORMATS = {
    "fit": ["json"],
    "trace": ["csv", "json", "svg"],
    "simulate": ["csv", "json"],
}

POSITIVE_FLOAT = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))

Q_SCHEMA = {
    vol.Optional("qmin", default=DEFAULT_QMIN): vol.Coerce(float),
    vol.Optional("qmax", default=DEFAULT_QMAX): vol.Coerce(float),
    vol.Optional("qstep", default=DEFAULT_QSTEP): POSITIVE_FLOAT,
}

RUN_CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required("command"): vol.In(COMMANDS),
        vol.Optional("data", default=None): vol.Any(None, str),
        vol.Optional("response", default=None): vol.Any(None, str),
        vol.Optional("path", default=PathKind.QM.value): vol.In([kind.value for kind in PathKind]),
        **Q_SCHEMA,
        vol.Optional("steps", default=DEFAULT_STEPS_PER_UNIT): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional("standardize_y", default=True): bool,
        vol.Optional("out", default="."): str,
        vol.Optional("seed", default=None): vol.Any(
            None, vol.All(vol.Coerce(int), vol.Range(min=0))
        ),
        vol.Optional("formats", default=None): vol.Any(None, [vol.In(OUTPUT_FORMATS)]),
        vol.Optional("traces", default=None): vol.Any(
            None, [vol.In([kind.value for kind in TraceKind])]
        ),
        vol.Optional("scenario", default=None): vol.Any(None, str),
        vol.Optional("verbose", default=False): bool,
    }
)

SCENARIO_SCHEMA = vol.Schema(
    {
        vol.Optional("name", default="scenario"): str,
        vol.Required("p"): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Required("n"): vol.All(vol.Coerce(int), vol.Range(min=3)),
        vol.Optional("orientation", default="major_axis"): vol.In(ORIENTATIONS),
        vol.Optional("beta", default=None): vol.Any(None, [vol.Coerce(float)]),
        vol.Required("spectrum"): [POSITIVE_FLOAT],
        vol.Required("sigma2"): vol.All(vol.Coerce(float), vol.Range(min=0)),
        vol.Optional("target_r2", default=None): vol.Any(
            None,
            vol.All(
                vol.Coerce(float),
                vol.Range(min=0, max=1, min_included=False, max_included=False),
            ),
        ),
        vol.Optional("beta_norm", default=1.0): vol.All(vol.Coerce(float), vol.Range(min=0)),
        vol.Optional("replications", default=1000): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional("seed", default=0): vol.All(vol.Coerce(int), vol.Range(min=0)),
        **Q_SCHEMA,
    }
)


def _q_order(data: dict) -> list[vol.Invalid]:
    if float(data["qmin"]) < float(data["qmax"]):
        return []
    return [vol.Invalid("qmin must be below qmax", path=["qmin"])]


def _seed_for_simulate(data: dict) -> list[vol.Invalid]:
    has_seed = data.get("seed") is not None

    if data["command"] == "simulate" and not has_seed:
        return [vol.Invalid("simulate requires a seed", path=["seed"])]
    if data["command"] != "simulate" and has_seed:
        return [vol.Invalid("a seed is only accepted by simulate", path=["seed"])]
    return []


def _inputs_for_command(data: dict) -> list[vol.Invalid]:
    if data["command"] == "simulate":
        if data.get("scenario") is None:
            return [vol.Invalid("simulate requires a scenario file", path=["scenario"])]
        return []

    if data.get("data") is None:
        return [vol.Invalid(f"{data['command']} requires a data file", path=["data"])]
    return []


def _spectrum_length(data: dict) -> list[vol.Invalid]:
    if len(data["spectrum"]) == int(data["p"]):
        return []
    return [vol.Invalid("spectrum must hold p eigenvalues", path=["spectrum"])]


def _beta_orientation(data: dict) -> list[vol.Invalid]:
    beta = data.get("beta")

    if data.get("orientation", "major_axis") != "explicit":
        if beta is not None:
            return [vol.Invalid("beta is only accepted with orientation explicit", path=["beta"])]
        return []

    if beta is None:
        return [vol.Invalid("orientation explicit requires beta", path=["beta"])]
    if len(beta) != int(data["p"]):
        return [vol.Invalid("beta must hold p coefficients", path=["beta"])]
    return []


def _defaults(schema: vol.Schema) -> dict:
    """Default of every optional field that declares one."""

    return {
        str(key): key.default()
        for key in schema.schema
        if isinstance(key, vol.Optional) and key.default is not vol.UNDEFINED
    }


def _validate(
    schema: vol.Schema, data: dict, checks: list[Callable[[dict], list[vol.Invalid]]]
) -> dict:
    """Run the schema and every cross-field check, then report all failures."""

    errors: list[vol.Invalid] = []

    try:
        validated = schema(data)
    except vol.MultipleInvalid as err:
        errors.extend(err.errors)
        validated = {**_defaults(schema), **data}

    failed = {tuple(error.path[:1]) for error in errors}

    for check in checks:
        try:
            found = check(validated)
        except (KeyError, TypeError, ValueError):
            # A field the check needs already failed its own validation.
            continue
        errors.extend(error for error in found if tuple(error.path[:1]) not in failed)

    if errors:
        raise vol.MultipleInvalid(errors)

    return validated


def validate_run_config(data: dict[str, Any]) -> dict[str, Any]:
    """Validated run configuration with defaults filled in."""
    return _validate(
        RUN_CONFIG_SCHEMA, data, [_q_order, _seed_for_simulate, _inputs_for_command]
    )


def validate_scenario(data: dict[str, Any]) -> dict[str, Any]:
    """Validated scenario definition with defaults filled in."""
    return _validate(SCENARIO_SCHEMA, data, [_q_order, _spectrum_length, _beta_orientation])


def format_errors(err: vol.MultipleInvalid) -> list[str]:
    """One line per failure, suitable for the console."""
    return [str(error) for error in err.errors]


@dataclass(frozen=True)
class RunConfig:
    """Everything a single command-line run needs."""

    command: str
    data: str | None = None
    response: str | None = None
    path: PathKind = PathKind.QM
    qmin: float = DEFAULT_QMIN
    qmax: float = DEFAULT_QMAX
    qstep: float = DEFAULT_QSTEP
    steps: int = DEFAULT_STEPS_PER_UNIT
    standardize_y: bool = True
    out: str = "."
    seed: int | None = None
    formats: tuple[str, ...] = ()
    traces: tuple[TraceKind, ...] = ()
    scenario: str | None = None
    verbose: bool = False

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        """Validate a raw dictionary and build the configuration from it."""

        config = validate_run_config(data)
        formats = config["formats"] or DEFAULT_FORMATS[config["command"]]
        traces = config["traces"] or [kind.value for kind in TraceKind]

        return cls(
            command=config["command"],
            data=config["data"],
            response=config["response"],
            path=PathKind(config["path"]),
            qmin=config["qmin"],
            qmax=config["qmax"],
            qstep=config["qstep"],
            steps=config["steps"],
            standardize_y=config["standardize_y"],
            out=config["out"],
            seed=config["seed"],
            formats=tuple(dict.fromkeys(formats)),
            traces=tuple(TraceKind(kind) for kind in dict.fromkeys(traces)),
            scenario=config["scenario"],
            verbose=config["verbose"],
        )
