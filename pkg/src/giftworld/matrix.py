"""Closed-form two-player gifting dynamics in iterated matrix games.

Payoffs are the (R, S, T, P) quadruple normalized to R=1, P=0 with T in
[0, 2] and S in [-1, 1]. Each agent holds a cooperation probability theta and
a prediction theta_hat of the co-player; under accurate predictions the
update rule is deterministic, so convergence and the (T, S) phase sweep are
exact computations rather than RL runs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from .errors import ConfigError, DomainError

LR_OUTCOMES = ("CC", "CD", "DC", "DD")


class Outcome(IntEnum):
    CC = 0
    CD = 1
    DC = 2
    DD = 3


@dataclass(frozen=True)
class GameParams:
    """Payoff quadruple; mutual cooperation R, sucker S, temptation T, punishment P."""

    t: float
    s: float
    r: float = 1.0
    p: float = 0.0

    def validate(self) -> None:
        if not (0.0 <= self.t <= 2.0 and -1.0 <= self.s <= 1.0):
            raise DomainError(f"T={self.t}, S={self.s} outside T in [0,2], S in [-1,1]")
        if self.r != 1.0 or self.p != 0.0:
            raise DomainError("normalized games require R=1 and P=0")


IPD_PARAMS = GameParams(t=1.2, s=-0.2)


def classify_game(params: GameParams) -> str:
    """Dilemma class from the fear/greed boundaries.

    Boundary values (T == 1 or S == 0) are assigned to harmony; the class is
    reporting metadata and never feeds back into the dynamics.
    """
    params.validate()
    t, s = params.t, params.s
    if t > 1.0 and 1.0 > s > 0.0:
        return "sg"
    if 1.0 > t > 0.0 > s:
        return "sh"
    if t > 1.0 and 0.0 > s and t + s < 2.0:
        return "pd"
    return "harmony"


@dataclass(frozen=True)
class PolicyPoint:
    """Cooperation probabilities and cross-predictions for the two agents.

    ``that1`` is agent 2's prediction of agent 1, ``that2`` agent 1's
    prediction of agent 2.
    """

    theta1: float
    theta2: float
    that1: float
    that2: float

    @classmethod
    def symmetric(cls, theta1: float, theta2: float) -> "PolicyPoint":
        """Accurate-prediction point (that_i == theta_i)."""
        return cls(theta1, theta2, theta1, theta2)

    def clamped(self) -> "PolicyPoint":
        def c(v: float) -> float:
            return min(1.0, max(0.0, v))
        return PolicyPoint(c(self.theta1), c(self.theta2), c(self.that1), c(self.that2))


@dataclass(frozen=True)
class DynamicsConfig:
    alpha: float = 1e-3
    gamma: float = 0.99
    max_iters: int = 1_000_000
    convergence_tol: float = 1e-8
    rng_seed: int = 0
    accurate_predictions: bool = True

    def validate(self) -> None:
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        if not (0.0 <= self.gamma < 1.0):
            raise ConfigError("gamma must be in [0, 1)")


def outcome_distribution(theta1: float, theta2: float) -> np.ndarray:
    """Probabilities of (CC, CD, DC, DD) under independent cooperation probs."""
    return np.array([
        theta1 * theta2,
        theta1 * (1.0 - theta2),
        (1.0 - theta1) * theta2,
        (1.0 - theta1) * (1.0 - theta2),
    ])


def closed_form_gift_weight(outcome: Outcome | int, that_other: float) -> float:
    """Gifter's weight toward the co-player for one joint outcome.

    The co-player cooperating (CC, DC from the gifter's seat) yields
    1 - theta_hat; a defecting co-player yields a raw -theta_hat which clamps
    to zero.
    """
    if not (0.0 <= that_other <= 1.0):
        raise DomainError("theta_hat must lie in [0, 1]")
    if Outcome(outcome) in (Outcome.CC, Outcome.DC):
        return 1.0 - that_other
    return max(0.0, -that_other)


def total_reward_vectors(params: GameParams, that1: float, that2: float):
    """Per-outcome post-gift rewards for both agents.

    The DC entry for agent 1 is that2*T (and symmetrically that1*T for agent
    2's CD entry): the gifter keeps theta_hat of the temptation payoff.
    """
    r, s, t, p = params.r, params.s, params.t, params.p
    r1 = np.array([that2 * r + (1.0 - that1) * r,
                   s + (1.0 - that1) * t,
                   that2 * t,
                   p])
    r2 = np.array([that1 * r + (1.0 - that2) * r,
                   that1 * t,
                   s + (1.0 - that2) * t,
                   p])
    return r1, r2


def value(params: GameParams, point: PolicyPoint, gamma: float) -> tuple[float, float]:
    """Discounted values V1, V2 of the repeated game at a policy point."""
    if gamma >= 1.0:
        raise ConfigError("gamma must be < 1 for a finite value")
    p = outcome_distribution(point.theta1, point.theta2)
    r1, r2 = total_reward_vectors(params, point.that1, point.that2)
    scale = 1.0 / (1.0 - gamma)
    return scale * float(p @ r1), scale * float(p @ r2)


def _gradients(params: GameParams, t1, t2, h1, h2):
    """Simultaneous ascent directions (g1, g2); works on scalars or arrays."""
    r, s, t, p = params.r, params.s, params.t, params.p
    g2 = (h1 * r + (1.0 - h2) * r - h1 * t) * t1 + (s + (1.0 - h2) * t - p) * (1.0 - t1)
    g1 = (h2 * r + (1.0 - h1) * r - h2 * t) * t2 + (s + (1.0 - h1) * t - p) * (1.0 - t2)
    return g1, g2


def update_step(params: GameParams, point: PolicyPoint, config: DynamicsConfig) -> PolicyPoint:
    """One simultaneous update of both thetas using pre-step values throughout."""
    config.validate()
    if config.accurate_predictions:
        point = PolicyPoint.symmetric(point.theta1, point.theta2)
    lr = config.alpha / (1.0 - config.gamma)
    g1, g2 = _gradients(params, point.theta1, point.theta2, point.that1, point.that2)
    new = PolicyPoint(point.theta1 + lr * g1, point.theta2 + lr * g2,
                      point.that1, point.that2).clamped()
    if config.accurate_predictions:
        new = PolicyPoint.symmetric(new.theta1, new.theta2)
    return new


@dataclass(frozen=True)
class SimResult:
    point: PolicyPoint
    iterations: int
    converged: bool


def simulate_to_convergence(params: GameParams, init: PolicyPoint,
                            config: DynamicsConfig) -> SimResult:
    """Iterate update_step until max |dtheta| < tol or the iteration cap."""
    point = init.clamped()
    for k in range(config.max_iters):
        new = update_step(params, point, config)
        delta = max(abs(new.theta1 - point.theta1), abs(new.theta2 - point.theta2))
        point = new
        if delta < config.convergence_tol:
            return SimResult(point, k + 1, True)
    return SimResult(point, config.max_iters, False)


def random_inits(n: int, rng: np.random.Generator) -> np.ndarray:
    """(n, 2) uniform inits kept off the clamp boundaries."""
    return rng.uniform(0.05, 0.95, size=(n, 2))


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    step: float

    def values(self) -> np.ndarray:
        if self.step <= 0:
            raise ConfigError("grid step must be positive")
        n = int(round((self.hi - self.lo) / self.step))
        return np.round(self.lo + self.step * np.arange(n + 1), 12)


@dataclass
class SweepResult:
    t_values: np.ndarray
    s_values: np.ndarray
    mean_cooperation: np.ndarray  # (len(s_values), len(t_values))


def _simulate_batch(t: np.ndarray, s: np.ndarray, t1: np.ndarray, t2: np.ndarray,
                    config: DynamicsConfig) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized accurate-prediction dynamics over many (T, S, init) cells.

    Elementwise identical arithmetic to simulate_to_convergence; converged
    entries are frozen so late iterations cannot disturb them.
    """
    lr = config.alpha / (1.0 - config.gamma)
    t1 = t1.copy()
    t2 = t2.copy()
    active = np.ones(t1.shape, dtype=bool)
    for _ in range(config.max_iters):
        g1 = (t2 * 1.0 + (1.0 - t1) * 1.0 - t2 * t) * t2 + (s + (1.0 - t1) * t) * (1.0 - t2)
        g2 = (t1 * 1.0 + (1.0 - t2) * 1.0 - t1 * t) * t1 + (s + (1.0 - t2) * t) * (1.0 - t1)
        n1 = np.clip(t1 + lr * g1, 0.0, 1.0)
        n2 = np.clip(t2 + lr * g2, 0.0, 1.0)
        delta = np.maximum(np.abs(n1 - t1), np.abs(n2 - t2))
        t1 = np.where(active, n1, t1)
        t2 = np.where(active, n2, t2)
        active &= delta >= config.convergence_tol
        if not active.any():
            break
    return t1, t2


def sweep_heatmap(t_range: GridSpec, s_range: GridSpec, seeds_per_cell: int,
                  config: DynamicsConfig) -> SweepResult:
    """Mean converged cooperation probability over a (T, S) grid.

    Each cell runs ``seeds_per_cell`` simulations from uniform random inits
    and records the mean of (theta1 + theta2) / 2 at convergence.
    """
    config.validate()
    ts = t_range.values()
    ss = s_range.values()
    rng = np.random.default_rng(config.rng_seed)
    n_cells = len(ss) * len(ts)
    inits = random_inits(n_cells * seeds_per_cell, rng)
    tt = np.repeat(np.tile(ts, len(ss)), seeds_per_cell)
    sv = np.repeat(ss, len(ts) * seeds_per_cell)
    f1, f2 = _simulate_batch(tt, sv, inits[:, 0], inits[:, 1], config)
    coop = (f1 + f2) / 2.0
    grid = coop.reshape(len(ss), len(ts), seeds_per_cell).mean(axis=2)
    return SweepResult(ts, ss, grid)


def write_sweep_csv(result: SweepResult, path) -> None:
    """Row-major CSV: header row of T values, first column of S values."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s\\t"] + [repr(float(t)) for t in result.t_values])
        for i, s in enumerate(result.s_values):
            writer.writerow([repr(float(s))] +
                            [repr(float(v)) for v in result.mean_cooperation[i]])
