"""Run configuration: one flat record of every tunable the pipeline reads.

Values resolve in three layers, each overriding the last: defaults, a JSON
config file, environment variables (STAF_<FIELD>), and finally explicit
overrides such as command-line flags. Bad values raise ConfigError naming
the offending field, whichever layer it came from.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields

from .body import BodyTopology, default_topology
from .inference import InferenceParams
from .tracking import TrackerParams

ENV_PREFIX = "STAF_"


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class RunConfig:
    variant: str = "B"
    sigma: float = 7.0
    radius: float = 8.0
    n_samples: int = 10
    alpha: float = 0.5
    peak_threshold: float = 0.1
    min_connection_score: float = 0.05
    min_valid_fraction: float = 0.4
    min_keypoints: int = 3
    min_id_votes: int = 2
    max_misses: int = 0
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.variant not in ("A", "B", "C"):
            raise ConfigError("variant", "must be A, B, or C")
        if self.sigma <= 0:
            raise ConfigError("sigma", "must be positive")
        if self.radius <= 0:
            raise ConfigError("radius", "must be positive")
        if self.n_samples < 2:
            raise ConfigError("n_samples", "must be >= 2")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha", "must lie in [0, 1]")
        if not 0.0 < self.peak_threshold < 1.0:
            raise ConfigError("peak_threshold", "must lie in (0, 1)")
        if self.min_connection_score < 0:
            raise ConfigError("min_connection_score", "must be >= 0")
        if not 0.0 <= self.min_valid_fraction <= 1.0:
            raise ConfigError("min_valid_fraction", "must lie in [0, 1]")
        if self.min_keypoints < 1:
            raise ConfigError("min_keypoints", "must be >= 1")
        if self.min_id_votes < 1:
            raise ConfigError("min_id_votes", "must be >= 1")
        if self.max_misses < 0:
            raise ConfigError("max_misses", "must be >= 0")
        return self

    def inference_params(self) -> InferenceParams:
        return InferenceParams(
            peak_threshold=self.peak_threshold,
            n_samples=self.n_samples,
            min_valid_fraction=self.min_valid_fraction,
            min_connection_score=self.min_connection_score,
            min_keypoints=self.min_keypoints,
            alpha=self.alpha,
        )

    def tracker_params(self) -> TrackerParams:
        return TrackerParams(
            min_id_votes=self.min_id_votes, max_misses=self.max_misses
        )

    def topology(self) -> BodyTopology:
        return default_topology(self.variant)

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(RunConfig)}


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, value, kind: str):
    try:
        if kind == "int":
            if isinstance(value, bool):
                raise ValueError
            return int(value)
        if kind == "float":
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if kind == "str":
            if not isinstance(value, str):
                raise ValueError
            return value
    except (TypeError, ValueError):
        pass
    raise ConfigError(name, f"expected {kind}, got {value!r}")


def load_config(
    path=None,
    env: dict | None = None,
    overrides: dict | None = None,
) -> RunConfig:
    """Resolve a RunConfig from file, environment, and explicit overrides.

    Unknown keys in any layer are rejected so typos fail loudly.
    """
    values = {f.name: getattr(RunConfig, f.name) for f in fields(RunConfig)}

    if path is not None:
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError("config", f"{path} is not valid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise ConfigError("config", f"{path}: expected a JSON object")
        for key, value in obj.items():
            if key not in values:
                raise ConfigError(key, "unknown config field")
            values[key] = _coerce(key, value, _FIELD_TYPES[key])

    env = os.environ if env is None else env
    for name in values:
        raw = env.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _coerce(name, raw, _FIELD_TYPES[name])

    if overrides:
        for key, value in overrides.items():
            if key not in values:
                raise ConfigError(key, "unknown config field")
            if value is not None:
                values[key] = _coerce(key, value, _FIELD_TYPES[key])

    return RunConfig(**values).validate()


def save_config(config: RunConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
