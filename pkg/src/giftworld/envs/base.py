"""Shared gridworld machinery: configs, movement, egocentric observations."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..errors import ConfigError, ContractViolation

ENV_KINDS = ("ipd", "coingame", "cleanup", "ssh", "ssg", "cleanup-extn", "ssg-extn")

# movement actions shared by all grid games
UP, DOWN, LEFT, RIGHT, STAY = 0, 1, 2, 3, 4
MOVE_DELTAS = {UP: (-1, 0), DOWN: (1, 0), LEFT: (0, -1), RIGHT: (0, 1)}


@dataclass(frozen=True)
class EnvConfig:
    kind: str
    map_size: int = 0
    n_agents: int = 2
    episode_len: int = 100
    view_size: int = 5
    # cleanup family
    apple_respawn_probability: float = 0.4
    waste_spawn_probability: float = 0.5
    threshold_depletion: float = 0.5
    threshold_restoration: float = 0.0
    init_waste_count: int = 8
    river_rows: int = 2
    # stag hunt
    n_stags: int = 2
    n_hares: int = 4
    stag_reward: float = 10.0
    hare_reward: float = 1.0
    # snowdrift
    n_snowdrifts: int = 6
    drift_reward: float = 6.0
    removal_cost: float = 4.0

    @classmethod
    def preset(cls, kind: str, **overrides) -> "EnvConfig":
        """Built-in per-game parameterizations."""
        base = {
            "ipd": cls(kind="ipd", map_size=0, n_agents=2, episode_len=100, view_size=0),
            "coingame": cls(kind="coingame", map_size=5, n_agents=2, episode_len=100),
            "cleanup": cls(kind="cleanup", map_size=8, n_agents=4, episode_len=100),
            "ssh": cls(kind="ssh", map_size=8, n_agents=4, episode_len=30),
            "ssg": cls(kind="ssg", map_size=8, n_agents=4, episode_len=50),
            "cleanup-extn": cls(kind="cleanup-extn", map_size=12, n_agents=8,
                                episode_len=150, view_size=7, init_waste_count=16),
            "ssg-extn": cls(kind="ssg-extn", map_size=12, n_agents=8,
                            episode_len=70, view_size=7, n_snowdrifts=12),
        }
        if kind not in base:
            raise ConfigError(f"unknown environment kind {kind!r}; choose from {ENV_KINDS}")
        cfg = base[kind]
        return replace(cfg, **overrides) if overrides else cfg


@dataclass
class StepResult:
    observations: list[np.ndarray]
    rewards: np.ndarray
    done: bool
    info: dict = field(default_factory=dict)


def resolve_moves(current: list[tuple[int, int]], targets: list[tuple[int, int]],
                  active: list[bool], rng: np.random.Generator) -> list[tuple[int, int]]:
    """Simultaneous movement with single-occupancy conflicts.

    Agents whose target equals their current cell are anchored and always keep
    it. Among movers contesting one free cell a uniform random winner is
    picked; losers bounce back to (and then anchor) their original cells, so
    the fixpoint loop terminates after at most n_agents passes. Two agents
    swapping cells produce no multi-claimed cell and are allowed through.
    """
    final = list(targets)
    for i, a in enumerate(active):
        if not a:
            final[i] = current[i]
    while True:
        claims: dict[tuple[int, int], list[int]] = {}
        for i, a in enumerate(active):
            if a:
                claims.setdefault(final[i], []).append(i)
        bounced = False
        for cell in sorted(claims):
            ids = claims[cell]
            if len(ids) < 2:
                continue
            anchored = [i for i in ids if final[i] == current[i]]
            if anchored:
                movers = [i for i in ids if final[i] != current[i]]
            else:
                winner = ids[int(rng.integers(len(ids)))]
                movers = [i for i in ids if i != winner]
            for i in movers:
                final[i] = current[i]
                bounced = True
        if not bounced:
            return final


def move_target(pos: tuple[int, int], action: int, map_size: int) -> tuple[int, int]:
    """Intended cell for a movement action; walls and non-moves keep the cell."""
    if action in MOVE_DELTAS:
        dr, dc = MOVE_DELTAS[action]
        r, c = pos[0] + dr, pos[1] + dc
        if 0 <= r < map_size and 0 <= c < map_size:
            return (r, c)
    return pos


class GridEnv:
    """Base for the four gridworld games."""

    allow_overlap = False
    object_channels: tuple[str, ...] = ()
    n_actions = 4

    def __init__(self, config: EnvConfig, seed: int = 0):
        self.config = config
        self.map_size = config.map_size
        self.n_agents = config.n_agents
        self.view_size = config.view_size
        self.episode_len = config.episode_len
        self.rng = np.random.default_rng(seed)
        self.positions: list[tuple[int, int]] = []
        self.active: list[bool] = []
        self.timestep = 0

    # -- layout helpers ------------------------------------------------------

    @property
    def n_channels(self) -> int:
        return self.n_agents + len(self.object_channels) + 1  # + mask

    @property
    def obs_shape(self) -> tuple[int, int, int]:
        return (self.n_channels, self.view_size, self.view_size)

    @property
    def obs_dim(self) -> int:
        c, v, _ = self.obs_shape
        return c * v * v

    def _sample_cells(self, n: int, exclude: set[tuple[int, int]] = frozenset()):
        """n distinct uniform cells avoiding ``exclude``."""
        free = [(r, c) for r in range(self.map_size) for c in range(self.map_size)
                if (r, c) not in exclude]
        idx = self.rng.choice(len(free), size=n, replace=False)
        return [free[int(i)] for i in idx]

    def _object_cells(self, channel: str) -> set[tuple[int, int]]:
        raise NotImplementedError

    def _channel_grid(self) -> np.ndarray:
        g = np.zeros((self.n_channels, self.map_size, self.map_size))
        for i, pos in enumerate(self.positions):
            if self.active[i]:
                g[i, pos[0], pos[1]] = 1.0
        for k, name in enumerate(self.object_channels):
            for (r, c) in self._object_cells(name):
                g[self.n_agents + k, r, c] = 1.0
        return g

    def observe(self, agent_id: int, grid: np.ndarray | None = None) -> np.ndarray:
        """Egocentric view_size window; mask channel marks off-map cells.

        Inactive agents observe an all-zero tensor with a full mask.
        """
        v = self.view_size
        out = np.zeros((self.n_channels, v, v))
        if not self.active[agent_id]:
            out[-1] = 1.0
            return out
        if grid is None:
            grid = self._channel_grid()
        half = v // 2
        r0, c0 = self.positions[agent_id]
        out[-1] = 1.0
        for wr in range(v):
            gr = r0 - half + wr
            if not (0 <= gr < self.map_size):
                continue
            lo = max(0, c0 - half)
            hi = min(self.map_size - 1, c0 + half)
            w_lo = lo - (c0 - half)
            w_hi = w_lo + (hi - lo)
            out[:-1, wr, w_lo:w_hi + 1] = grid[:-1, gr, lo:hi + 1]
            out[-1, wr, w_lo:w_hi + 1] = 0.0
        return out

    def observations(self) -> list[np.ndarray]:
        grid = self._channel_grid()
        return [self.observe(i, grid) for i in range(self.n_agents)]

    # -- stepping ------------------------------------------------------------

    def _check_joint(self, joint: Sequence[int]) -> list[int]:
        if len(joint) != self.n_agents:
            raise ContractViolation(
                f"joint action has {len(joint)} entries for {self.n_agents} agents")
        acts = [int(a) for a in joint]
        for a in acts:
            if not (0 <= a < self.n_actions):
                raise ContractViolation(f"action {a} outside 0..{self.n_actions - 1}")
        return acts

    def _move_agents(self, actions: list[int]) -> None:
        targets = [move_target(self.positions[i], actions[i], self.map_size)
                   for i in range(self.n_agents)]
        if self.allow_overlap:
            final = [targets[i] if self.active[i] else self.positions[i]
                     for i in range(self.n_agents)]
        else:
            final = resolve_moves(self.positions, targets, self.active, self.rng)
        self.positions = final

    def reset(self, seed: int | None = None) -> list[np.ndarray]:
        raise NotImplementedError

    def step(self, joint: Sequence[int]) -> StepResult:
        raise NotImplementedError
