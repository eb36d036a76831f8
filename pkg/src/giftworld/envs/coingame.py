"""Two-player coin collection; wrong-color pickups cost the owner two points."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .base import EnvConfig, GridEnv, StepResult

BLUE, RED = 0, 1  # agent 0 is blue, agent 1 is red


class CoingameEnv(GridEnv):
    # channels: blue agent, red agent, blue coin, red coin, mask
    object_channels = ("blue_coin", "red_coin")
    n_actions = 4

    def __init__(self, config: EnvConfig, seed: int = 0):
        super().__init__(config, seed)
        self.coin_pos: tuple[int, int] | None = None
        self.coin_color = BLUE

    def _object_cells(self, channel: str) -> set[tuple[int, int]]:
        color = BLUE if channel == "blue_coin" else RED
        if self.coin_pos is not None and self.coin_color == color:
            return {self.coin_pos}
        return set()

    def _spawn_coin(self) -> None:
        # a coin never lands on an agent; exactly one coin exists at all times
        occupied = set(self.positions)
        self.coin_pos = self._sample_cells(1, exclude=occupied)[0]
        self.coin_color = int(self.rng.integers(2))

    def reset(self, seed: int | None = None) -> list[np.ndarray]:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.timestep = 0
        self.active = [True] * self.n_agents
        self.positions = self._sample_cells(self.n_agents)
        self._spawn_coin()
        return self.observations()

    def step(self, joint: Sequence[int]) -> StepResult:
        actions = self._check_joint(joint)
        self._move_agents(actions)
        rewards = np.zeros(self.n_agents)
        picked = 0
        mismatched = 0
        for i, pos in enumerate(self.positions):
            if pos == self.coin_pos:
                rewards[i] += 1.0
                picked += 1
                if self.coin_color != i:
                    rewards[1 - i] -= 2.0
                    mismatched += 1
                self._spawn_coin()
                break  # single occupancy: at most one agent can sit on the coin
        self.timestep += 1
        done = self.timestep >= self.episode_len
        return StepResult(self.observations(), rewards, done,
                          info={"coins_picked": picked, "wrong_color_pickups": mismatched})
