"""Environment registry."""

from __future__ import annotations

from ..errors import ConfigError
from .base import ENV_KINDS, EnvConfig, StepResult, resolve_moves
from .cleanup import CleanupEnv
from .coingame import CoingameEnv
from .ipd import IpdEnv, ipd_payoff
from .snowdrift import SnowdriftEnv
from .staghunt import StagHuntEnv

_GRID_CLASSES = {
    "coingame": CoingameEnv,
    "cleanup": CleanupEnv,
    "cleanup-extn": CleanupEnv,
    "ssh": StagHuntEnv,
    "ssg": SnowdriftEnv,
    "ssg-extn": SnowdriftEnv,
}


def make_env(config: EnvConfig, seed: int = 0):
    """Instantiate the environment described by ``config``."""
    if config.kind == "ipd":
        return IpdEnv(config, seed)
    if config.kind in _GRID_CLASSES:
        return _GRID_CLASSES[config.kind](config, seed)
    raise ConfigError(f"unknown environment kind {config.kind!r}; choose from {ENV_KINDS}")


__all__ = [
    "ENV_KINDS", "EnvConfig", "StepResult", "resolve_moves", "make_env",
    "IpdEnv", "CoingameEnv", "CleanupEnv", "StagHuntEnv", "SnowdriftEnv",
    "ipd_payoff",
]
