"""Sequential stag hunt: stags need two or more simultaneous hunters.

Agents may overlap here (a stag hunt needs several hunters on the prey's
cell); hunters are removed from the map after a successful hunt and the
episode ends early once everyone is out.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .base import EnvConfig, GridEnv, StepResult

HUNT_HARE, HUNT_STAG = 5, 6


class StagHuntEnv(GridEnv):
    # channels: one per agent, hare, stag, mask
    object_channels = ("hare", "stag")
    n_actions = 7
    allow_overlap = True

    def __init__(self, config: EnvConfig, seed: int = 0):
        super().__init__(config, seed)
        self.stags: set[tuple[int, int]] = set()
        self.hares: set[tuple[int, int]] = set()

    def _object_cells(self, channel: str) -> set[tuple[int, int]]:
        return self.hares if channel == "hare" else self.stags

    def reset(self, seed: int | None = None) -> list[np.ndarray]:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.timestep = 0
        self.active = [True] * self.n_agents
        prey = self._sample_cells(self.config.n_stags + self.config.n_hares)
        self.stags = set(prey[: self.config.n_stags])
        self.hares = set(prey[self.config.n_stags:])
        self.positions = self._sample_cells(self.n_agents)
        return self.observations()

    def step(self, joint: Sequence[int]) -> StepResult:
        actions = self._check_joint(joint)
        self._move_agents(actions)
        rewards = np.zeros(self.n_agents)
        hunted_stags = 0
        hunted_hares = 0
        # stags: every cell with >= 2 hunters pays out and removes them
        for cell in sorted(self.stags):
            hunters = [i for i in range(self.n_agents)
                       if self.active[i] and self.positions[i] == cell
                       and actions[i] == HUNT_STAG]
            if len(hunters) >= 2:
                share = self.config.stag_reward / len(hunters)
                for i in hunters:
                    rewards[i] += share
                    self.active[i] = False
                self.stags.discard(cell)
                hunted_stags += 1
        # hares: simultaneous hunters on one cell split the single point
        for cell in sorted(self.hares):
            hunters = [i for i in range(self.n_agents)
                       if self.active[i] and self.positions[i] == cell
                       and actions[i] == HUNT_HARE]
            if hunters:
                share = self.config.hare_reward / len(hunters)
                for i in hunters:
                    rewards[i] += share
                    self.active[i] = False
                self.hares.discard(cell)
                hunted_hares += 1
        self.timestep += 1
        done = self.timestep >= self.episode_len or not any(self.active)
        return StepResult(self.observations(), rewards, done,
                          info={"stags_hunted": hunted_stags, "hares_hunted": hunted_hares})
