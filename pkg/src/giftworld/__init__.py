"""Empathic reward gifting in mixed-motive games.

Decentralized agents that split their extrinsic rewards with co-players in
proportion to inferred social relationships, plus the closed-form two-player
matrix-game dynamics, five gridworld dilemmas, baselines, and experiment
tooling.
"""

from .envs import EnvConfig, make_env
from .errors import ConfigError, ContractViolation, DomainError, GiftworldError
from .matrix import (DynamicsConfig, GameParams, PolicyPoint, classify_game,
                     simulate_to_convergence, sweep_heatmap)
from .metrics import equality, gift_weight_mean, schelling_diagram, verify_ssd
from .presets import PRESETS, preset_run_config
from .sri import SRNetworks, full_gift_matrix, gift_weight
from .trainer import (HyperParams, RunConfig, TrajectoryBuffer, evaluate,
                      redistribute, run_episode, train)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ContractViolation", "DomainError", "GiftworldError",
    "EnvConfig", "make_env",
    "DynamicsConfig", "GameParams", "PolicyPoint", "classify_game",
    "simulate_to_convergence", "sweep_heatmap",
    "equality", "gift_weight_mean", "schelling_diagram", "verify_ssd",
    "PRESETS", "preset_run_config",
    "SRNetworks", "full_gift_matrix", "gift_weight",
    "HyperParams", "RunConfig", "TrajectoryBuffer", "evaluate", "redistribute",
    "run_episode", "train",
    "__version__",
]
