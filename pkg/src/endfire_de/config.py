"""Run configuration: defaults, JSON config files and command-line overrides."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from .de import DEConfig
from .em import ModelParams
from .workflows import GAP_BOUNDS, SensitivitySpec, default_de_config

__all__ = ["ConfigError", "RunConfig", "parse_config", "config_hash"]

OPTIMIZE_COMMANDS = ("optimize-active", "optimize-parasitic")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""

    def __init__(self, key: str, msg: str):
        super().__init__(f"{key}: {msg}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI command needs.  Field names double as config-file keys.

    ``NP`` and ``iterations`` left at ``None`` follow the size-dependent
    defaults.  ``feed`` is ``"sweep"`` or a 1-based port number.
    """

    command: str = "evaluate"
    N: int = 5
    seed: int = 0
    # model
    f_hz: float = 3.5e9
    length_lambda: float = 0.5
    radius_lambda: float = 1 / 200
    sigma_c: float = 5.8e7
    P_t: float = 0.5
    Z0: float = 73.0
    self_reactance: str = "resonant"
    reflection_weighting: str = "current"
    active_reflection: str = "standard"
    # optimizer
    NP: Optional[int] = None
    iterations: Optional[int] = None
    CR: float = 0.8
    F: float = 0.7
    gap_min_lambda: float = GAP_BOUNDS[0]
    gap_max_lambda: float = GAP_BOUNDS[1]
    init_draws: int = 1000
    feed: Any = "sweep"
    # explicit designs
    mode: str = "parasitic"
    design: Optional[str] = None
    positions_lambda: Optional[Sequence[float]] = None
    loads_ohm: Optional[Sequence[Optional[float]]] = None
    spacing_lambda: float = 0.5
    # sensitivity / pattern
    scale: float = 0.05
    samples: int = 21
    cut: str = "azimuth"
    resolution: float = 1.0
    # output
    out: Optional[str] = None
    format: str = "json"

    def model_params(self) -> ModelParams:
        try:
            return ModelParams.from_wavelengths(
                f=self.f_hz,
                length=self.length_lambda,
                radius=self.radius_lambda,
                sigma_c=self.sigma_c,
                P_t=self.P_t,
                Z0=self.Z0,
                self_reactance=self.self_reactance,
                reflection_weighting=self.reflection_weighting,
                active_reflection=self.active_reflection,
            )
        except ValueError as exc:
            raise ConfigError("model", str(exc)) from None

    def de_config(self, mode: str) -> DEConfig:
        over = {"CR": self.CR, "F": self.F, "init_draws": self.init_draws}
        if self.NP is not None:
            over["NP"] = self.NP
        if self.iterations is not None:
            over["iterations"] = self.iterations
        try:
            return default_de_config(
                self.N, mode, seed=self.seed,
                gap_bounds=(self.gap_min_lambda, self.gap_max_lambda), **over,
            )
        except ValueError as exc:
            raise ConfigError("optimizer", str(exc)) from None

    def sensitivity_spec(self) -> SensitivitySpec:
        try:
            return SensitivitySpec(scale=self.scale, samples=self.samples)
        except ValueError as exc:
            raise ConfigError("scale" if "scale" in str(exc) else "samples", str(exc)) from None

    @property
    def feed_index(self):
        """Feed as used by the library: ``"sweep"`` or a 0-based index."""
        return self.feed if self.feed == "sweep" else int(self.feed) - 1

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("positions_lambda", "loads_ohm"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INT_KEYS = {"N", "seed", "NP", "iterations", "samples", "init_draws"}
_FLOAT_KEYS = {
    "f_hz", "length_lambda", "radius_lambda", "sigma_c", "P_t", "Z0", "CR", "F",
    "gap_min_lambda", "gap_max_lambda", "spacing_lambda", "scale", "resolution",
}
_CHOICES = {
    "format": ("json", "csv"),
    "cut": ("azimuth", "sphere"),
    "mode": ("active", "parasitic"),
}


def _coerce(key: str, value):
    if key in _INT_KEYS:
        if value is None and key in ("NP", "iterations"):
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return int(value)
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(key, "must be finite")
        return float(value)
    if key in _CHOICES and value not in _CHOICES[key]:
        raise ConfigError(key, f"must be one of {', '.join(_CHOICES[key])}")
    if key == "feed":
        if value == "sweep":
            return value
        try:
            port = int(value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected 'sweep' or a port number, got {value!r}") from None
        if port < 1:
            raise ConfigError(key, "port numbers start at 1")
        return port
    if key == "positions_lambda" and value is not None:
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError(key, "expected a list of numbers") from None
    if key == "loads_ohm" and value is not None:
        try:
            return tuple(None if v is None else float(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError(key, "expected a list of numbers or nulls") from None
    return value


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.command in OPTIMIZE_COMMANDS and cfg.N < 2:
        raise ConfigError("N", "optimization needs N >= 2")
    if cfg.N < 1:
        raise ConfigError("N", "need at least one element")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed", "must be a 64-bit unsigned integer")
    if cfg.gap_min_lambda <= 0 or cfg.gap_min_lambda >= cfg.gap_max_lambda:
        raise ConfigError("gap_min_lambda", "need 0 < gap_min_lambda < gap_max_lambda")
    if cfg.feed != "sweep" and cfg.command in OPTIMIZE_COMMANDS and cfg.feed > cfg.N:
        raise ConfigError("feed", f"port {cfg.feed} does not exist for N={cfg.N}")
    if not 0.1 <= cfg.resolution <= 10:
        raise ConfigError("resolution", "must lie in [0.1, 10] degrees")
    if cfg.spacing_lambda <= 0:
        raise ConfigError("spacing_lambda", "must be positive")
    cfg.model_params()
    if cfg.command in OPTIMIZE_COMMANDS:
        cfg.de_config("active" if cfg.command == "optimize-active" else "parasitic")
    cfg.sensitivity_spec()
    return cfg


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} must hold a JSON object")
    return data


def parse_config(
    file_values: Optional[Mapping[str, Any]] = None,
    flags: Optional[Mapping[str, Any]] = None,
    command: Optional[str] = None,
) -> RunConfig:
    """Resolve defaults, then file values, then explicit flags.

    Unknown keys and out-of-range values raise :class:`ConfigError`.
    """
    merged = {}
    for source in (file_values or {}), (flags or {}):
        for key, value in source.items():
            if key not in _FIELDS or key == "command":
                raise ConfigError(key, "unknown key")
            merged[key] = _coerce(key, value)
    if command is not None:
        merged["command"] = command
    return _validate(replace(RunConfig(), **merged))


def config_hash(cfg: RunConfig) -> str:
    """SHA-256 over the resolved settings, excluding output location and format."""
    d = cfg.to_dict()
    d.pop("out")
    d.pop("format")
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode()).hexdigest()
