"""Run configuration, YAML loading and console logging."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import StrEnum
from pathlib import Path
from typing import TYPE_CHECKING, Any, ClassVar

import colorlog
import voluptuous as vol
import yaml

from .const import (
    CLI_EPS_CLASS,
    LOG_FORMAT,
    LOGGER,
    NAME,
    PROBE_MIN_STEPS,
    PROBE_RADIUS,
    PROBE_STEPS,
    SOLVER_MAX_ITER,
    SOLVER_TOL,
)

if TYPE_CHECKING:
    from collections.abc import Mapping

_HANDLER_NAME = f"{NAME}-console"


class ConfigError(ValueError):
    """Exception raised for an unreadable or invalid configuration."""

    def __init__(self, source: str, reason: str) -> None:
        """Initialize ConfigError with the offending source."""
        super().__init__(f"Invalid configuration in {source}: {reason}")


class Subcommand(StrEnum):
    """CLI subcommands."""

    BUILD = "build"
    CLASSIFY = "classify"
    PROBE = "probe"
    WITNESS_NONCONVEX = "witness-nonconvex"
    MINKOWSKI = "minkowski"
    CHECK_CLOSURE = "check-closure"


class OutputFormat(StrEnum):
    """File formats the CLI writes."""

    JSON = "json"
    OFF = "off"
    CSV = "csv"


LOG_LEVELS = ("debug", "info", "warning", "error", "critical")

_POSITIVE = vol.All(vol.Coerce(float), vol.Range(min=0.0, min_included=False))
_LEVEL = vol.All(str, vol.Lower, vol.In(LOG_LEVELS))

RUN_SCHEMA = vol.Schema(
    {
        vol.Optional("eps_class"): _POSITIVE,
        vol.Optional("solver_tol"): _POSITIVE,
        vol.Optional("solver_max_iter"): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional("probe_radius"): _POSITIVE,
        vol.Optional("probe_steps"): vol.All(
            vol.Coerce(int), vol.Range(min=PROBE_MIN_STEPS)
        ),
        vol.Optional("output_format"): vol.Coerce(OutputFormat),
    }
)

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional(NAME, default={}): vol.Any(None, RUN_SCHEMA),
        vol.Optional("logger", default={}): vol.Any(
            None,
            {
                vol.Optional("default"): _LEVEL,
                vol.Optional("logs"): vol.Any(None, {str: _LEVEL}),
            },
        ),
    }
)


@dataclass(frozen=True)
class RunConfig:
    """Tunable values for one CLI run; file values first, flags on top."""

    subcommand: Subcommand | None = None
    input_path: Path | None = None
    output_path: Path | None = None
    eps_class: float = CLI_EPS_CLASS
    solver_tol: float = SOLVER_TOL
    solver_max_iter: int = SOLVER_MAX_ITER
    probe_radius: float = PROBE_RADIUS
    probe_steps: int = PROBE_STEPS
    output_format: OutputFormat = OutputFormat.JSON
    log_default: str = "info"
    log_levels: Mapping[str, str] = field(default_factory=dict)

    TUNABLE: ClassVar[tuple[str, ...]] = (
        "eps_class",
        "solver_tol",
        "solver_max_iter",
        "probe_radius",
        "probe_steps",
        "output_format",
    )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None) -> RunConfig:
        """Build from the parsed YAML document."""
        try:
            valid = CONFIG_SCHEMA(dict(data or {}))
        except vol.Invalid as err:
            raise ConfigError("document", str(err)) from err
        run = valid[NAME] or {}
        logger = valid["logger"] or {}
        return cls(
            **run,
            log_default=logger.get("default", "info"),
            log_levels=dict(logger.get("logs") or {}),
        )

    def with_overrides(self, **overrides: Any) -> RunConfig:
        """Return a copy with the non-None overrides applied and validated."""
        given = {key: value for key, value in overrides.items() if value is not None}
        tunable = {key: value for key, value in given.items() if key in self.TUNABLE}
        try:
            checked = RUN_SCHEMA(tunable)
        except vol.Invalid as err:
            raise ConfigError("command line", str(err)) from err
        return replace(self, **{**given, **checked})


def load_config(path: Path | None) -> RunConfig:
    """Read a YAML config file, or return the defaults when ``path`` is None."""
    if path is None:
        return RunConfig()
    try:
        document = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise ConfigError(str(path), err.strerror or str(err)) from err
    except yaml.YAMLError as err:
        raise ConfigError(str(path), str(err)) from err
    if document is not None and not isinstance(document, dict):
        raise ConfigError(str(path), "top level must be a mapping")
    try:
        config = RunConfig.from_dict(document)
    except ConfigError as err:
        raise ConfigError(str(path), str(err.__cause__)) from err
    LOGGER.debug("Loaded configuration from %s", path)
    return config


def setup_logging(config: RunConfig, *, verbose: bool = False) -> None:
    """Attach the colored console handler and apply the configured levels."""
    handler = colorlog.StreamHandler()
    handler.set_name(_HANDLER_NAME)
    handler.setFormatter(colorlog.ColoredFormatter(LOG_FORMAT))
    for existing in list(LOGGER.handlers):
        if existing.get_name() == _HANDLER_NAME:
            LOGGER.removeHandler(existing)
    LOGGER.addHandler(handler)

    levels = {NAME: config.log_default, **config.log_levels}
    if verbose:
        levels[NAME] = "debug"
    for name, level in levels.items():
        logging.getLogger(name).setLevel(level.upper())
