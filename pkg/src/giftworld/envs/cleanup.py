"""Cleanup: river waste suppresses apple growth; cleaning requires co-location."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .base import EnvConfig, GridEnv, StepResult

CLEAN, PICK = 5, 6


class CleanupEnv(GridEnv):
    # channels: one per agent, waste, apple, mask
    object_channels = ("waste", "apple")
    n_actions = 7

    def __init__(self, config: EnvConfig, seed: int = 0):
        super().__init__(config, seed)
        self.waste: set[tuple[int, int]] = set()
        self.apples: set[tuple[int, int]] = set()
        self.river_rows = config.river_rows

    # -- geography -----------------------------------------------------------

    def _river_cells(self) -> list[tuple[int, int]]:
        return [(r, c) for r in range(self.river_rows) for c in range(self.map_size)]

    @property
    def river_cell_count(self) -> int:
        return self.river_rows * self.map_size

    @property
    def waste_density(self) -> float:
        return len(self.waste) / self.river_cell_count

    def apple_spawn_probability(self) -> float:
        """Per empty orchard cell per step; zero once density reaches the threshold."""
        d = self.waste_density
        thr = self.config.threshold_depletion
        if d >= thr:
            return 0.0
        return self.config.apple_respawn_probability * max(0.0, 1.0 - d / thr)

    def _object_cells(self, channel: str) -> set[tuple[int, int]]:
        return self.waste if channel == "waste" else self.apples

    # -- lifecycle -----------------------------------------------------------

    def reset(self, seed: int | None = None) -> list[np.ndarray]:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.timestep = 0
        self.active = [True] * self.n_agents
        self.apples = set()
        river = self._river_cells()
        idx = self.rng.choice(len(river), size=self.config.init_waste_count, replace=False)
        self.waste = {river[int(i)] for i in idx}
        self.positions = self._sample_cells(self.n_agents)
        return self.observations()

    def _spawn_waste(self) -> None:
        if self.rng.random() >= self.config.waste_spawn_probability:
            return
        empty = [c for c in self._river_cells() if c not in self.waste]
        if empty:
            self.waste.add(empty[int(self.rng.integers(len(empty)))])

    def _spawn_apples(self) -> None:
        p = self.apple_spawn_probability()
        if p <= 0.0:
            return
        orchard = [(r, c) for r in range(self.river_rows, self.map_size)
                   for c in range(self.map_size) if (r, c) not in self.apples]
        hits = self.rng.random(len(orchard)) < p
        for cell, hit in zip(orchard, hits):
            if hit:
                self.apples.add(cell)

    def step(self, joint: Sequence[int]) -> StepResult:
        actions = self._check_joint(joint)
        self._move_agents(actions)
        rewards = np.zeros(self.n_agents)
        cleaned = np.zeros(self.n_agents, dtype=int)
        picked = np.zeros(self.n_agents, dtype=int)
        for i, a in enumerate(actions):
            pos = self.positions[i]
            if a == CLEAN and pos in self.waste:
                self.waste.discard(pos)
                cleaned[i] = 1
            elif a == PICK and pos in self.apples:
                self.apples.discard(pos)
                rewards[i] += 1.0
                picked[i] = 1
        self._spawn_waste()
        self._spawn_apples()
        self.timestep += 1
        done = self.timestep >= self.episode_len
        return StepResult(self.observations(), rewards, done,
                          info={"waste_cleaned": cleaned.tolist(),
                                "apples_picked": picked.tolist(),
                                "waste_density": self.waste_density})
