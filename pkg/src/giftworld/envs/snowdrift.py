"""Sequential snowdrift: removal pays everyone, the remover bears the cost."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .base import EnvConfig, GridEnv, StepResult

REMOVE = 5


class SnowdriftEnv(GridEnv):
    # channels: one per agent, snowdrift, mask
    object_channels = ("snowdrift",)
    n_actions = 6

    def __init__(self, config: EnvConfig, seed: int = 0):
        super().__init__(config, seed)
        self.drifts: set[tuple[int, int]] = set()

    def _object_cells(self, channel: str) -> set[tuple[int, int]]:
        return self.drifts

    def reset(self, seed: int | None = None) -> list[np.ndarray]:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.timestep = 0
        self.active = [True] * self.n_agents
        self.drifts = set(self._sample_cells(self.config.n_snowdrifts))
        self.positions = self._sample_cells(self.n_agents, exclude=self.drifts)
        return self.observations()

    def step(self, joint: Sequence[int]) -> StepResult:
        actions = self._check_joint(joint)
        self._move_agents(actions)
        rewards = np.zeros(self.n_agents)
        removed = 0
        for i, a in enumerate(actions):
            if a == REMOVE and self.positions[i] in self.drifts:
                self.drifts.discard(self.positions[i])
                removed += 1
                rewards += self.config.drift_reward
                rewards[i] -= self.config.removal_cost
        self.timestep += 1
        done = self.timestep >= self.episode_len
        return StepResult(self.observations(), rewards, done,
                          info={"drifts_removed": removed,
                                "drifts_left": len(self.drifts)})
