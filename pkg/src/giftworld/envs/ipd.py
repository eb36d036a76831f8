"""Memory-1 iterated prisoner's dilemma with payoffs [R,S,T,P] = [1,-0.2,1.2,0]."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ContractViolation
from .base import EnvConfig, StepResult

COOPERATE, DEFECT = 0, 1
IPD_PAYOFFS = {
    (COOPERATE, COOPERATE): (1.0, 1.0),
    (COOPERATE, DEFECT): (-0.2, 1.2),
    (DEFECT, COOPERATE): (1.2, -0.2),
    (DEFECT, DEFECT): (0.0, 0.0),
}
# state one-hot layout: [CC, CD, DC, DD, s0]
STATE_S0 = 4


def ipd_payoff(joint: tuple[int, int]) -> tuple[float, float]:
    """Payoff pair for one round."""
    if joint not in IPD_PAYOFFS:
        raise ContractViolation(f"actions must be in {{C,D}}^2, got {joint}")
    return IPD_PAYOFFS[joint]


class IpdEnv:
    """Fully observable: both agents see the previous round's joint action."""

    n_actions = 2
    allow_overlap = True

    def __init__(self, config: EnvConfig, seed: int = 0):
        self.config = config
        self.n_agents = 2
        self.episode_len = config.episode_len
        self.rng = np.random.default_rng(seed)
        self.state_index = STATE_S0
        self.timestep = 0
        self.active = [True, True]

    @property
    def obs_dim(self) -> int:
        return 5

    def _state_vec(self) -> np.ndarray:
        v = np.zeros(5)
        v[self.state_index] = 1.0
        return v

    def observe(self, agent_id: int) -> np.ndarray:
        return self._state_vec()

    def observations(self) -> list[np.ndarray]:
        return [self._state_vec(), self._state_vec()]

    def reset(self, seed: int | None = None) -> list[np.ndarray]:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.state_index = STATE_S0
        self.timestep = 0
        return self.observations()

    def step(self, joint: Sequence[int]) -> StepResult:
        if len(joint) != 2:
            raise ContractViolation("IPD takes exactly two actions")
        a1, a2 = int(joint[0]), int(joint[1])
        r1, r2 = ipd_payoff((a1, a2))
        self.state_index = 2 * a1 + a2
        self.timestep += 1
        done = self.timestep >= self.episode_len
        return StepResult(self.observations(), np.array([r1, r2]), done,
                          info={"cooperations": int(a1 == COOPERATE) + int(a2 == COOPERATE)})
