"""Run-config files: JSON with an explicit schema.

Schema (all keys optional unless noted):

* ``preset``      -- name from presets.PRESETS; env/agents default from it
* ``env``         -- environment kind (required when no preset)
* ``agents``      -- roster of agent kinds (required when no preset)
* ``episodes``    -- episode count
* ``seed``        -- integer seed
* ``out_dir``     -- run directory
* ``checkpoint_every`` -- episodes between checkpoints (0 = end only)
* ``hyper``       -- HyperParams field overrides
* ``env_overrides`` -- EnvConfig field overrides
"""

from __future__ import annotations

import dataclasses
import json

import jsonschema

from .envs.base import ENV_KINDS, EnvConfig
from .errors import ConfigError
from .presets import preset_run_config
from .trainer import HyperParams, RunConfig

_HYPER_FIELDS = {f.name for f in dataclasses.fields(HyperParams)}
_ENV_FIELDS = {f.name for f in dataclasses.fields(EnvConfig)} - {"kind"}

RUN_CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "preset": {"type": "string"},
        "env": {"type": "string", "enum": list(ENV_KINDS)},
        "agents": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "episodes": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "out_dir": {"type": "string"},
        "checkpoint_every": {"type": "integer", "minimum": 0},
        "hyper": {
            "type": "object",
            "properties": {name: {"type": ["number", "integer", "array"]}
                           for name in _HYPER_FIELDS},
            "additionalProperties": False,
        },
        "env_overrides": {
            "type": "object",
            "properties": {name: {"type": ["number", "integer"]}
                           for name in _ENV_FIELDS},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


def validate_run_config(data: dict) -> None:
    """Schema-check a raw config dict; errors name the offending key path."""
    try:
        jsonschema.validate(data, RUN_CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from exc
    if "preset" not in data and ("env" not in data or "agents" not in data):
        raise ConfigError("config invalid at <root>: need either 'preset' or both "
                          "'env' and 'agents'")


def run_config_from_dict(data: dict) -> RunConfig:
    validate_run_config(data)
    hyper_overrides = dict(data.get("hyper", {}))
    if "hidden_sizes" in hyper_overrides:
        hyper_overrides["hidden_sizes"] = tuple(hyper_overrides["hidden_sizes"])
    if "preset" in data:
        cfg = preset_run_config(data["preset"], seed=data.get("seed", 0),
                                episodes=data.get("episodes"),
                                out_dir=data.get("out_dir"), **hyper_overrides)
        if "env" in data:
            cfg = dataclasses.replace(cfg, env_kind=data["env"])
        if "agents" in data:
            cfg = dataclasses.replace(cfg, roster=list(data["agents"]))
    else:
        cfg = RunConfig(
            env_kind=data["env"],
            roster=list(data["agents"]),
            hyper=HyperParams.ssd(**hyper_overrides) if data["env"] != "ipd"
            else HyperParams.ipd(**hyper_overrides),
            episodes=data.get("episodes", 1000),
            seed=data.get("seed", 0),
            out_dir=data.get("out_dir"),
        )
    if "env_overrides" in data:
        cfg = dataclasses.replace(cfg, env_overrides=dict(data["env_overrides"]))
    if "checkpoint_every" in data:
        cfg = dataclasses.replace(cfg, checkpoint_every=data["checkpoint_every"])
    return cfg


def load_run_config(path: str) -> RunConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return run_config_from_dict(data)
