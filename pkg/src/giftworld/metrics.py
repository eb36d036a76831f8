"""Evaluation metrics: equality, gift-weight statistics, Schelling diagrams."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .agents import (BalancedCleanerPolicy, ApplePickerPolicy, DriftRemoverPolicy,
                     DriftWaiterPolicy, GreedyCollectorPolicy, HareSeekerPolicy,
                     OwnColorCollectorPolicy, ScriptedPolicy, StagSeekerPolicy)
from .envs import EnvConfig, make_env
from .errors import ConfigError, ContractViolation, DomainError


def equality(returns) -> float:
    """One minus the Gini index of per-agent returns; 1 means perfectly equal."""
    r = np.asarray(returns, dtype=np.float64)
    total = r.sum()
    if total <= 0:
        raise DomainError(f"equality needs a positive total return, got {total}")
    n = len(r)
    pairwise = np.abs(r[:, None] - r[None, :]).sum()
    return float(1.0 - pairwise / (2.0 * n * total))


@dataclass(frozen=True)
class GiftStats:
    mean: float
    std: float  # per-pair std over the window, averaged over pairs
    window: int


def gift_weight_mean(gift_series: np.ndarray, window: int) -> GiftStats:
    """Trailing-window mean/std of off-diagonal gift weights.

    ``gift_series`` is (E, N, N) of per-episode mean gift matrices.
    """
    series = np.asarray(gift_series, dtype=np.float64)
    if series.ndim != 3 or series.shape[1] != series.shape[2]:
        raise ContractViolation("gift series must be (episodes, N, N)")
    if window > len(series):
        raise ContractViolation("window longer than the run")
    tail = series[-window:]
    n = series.shape[1]
    off = ~np.eye(n, dtype=bool)
    mean = float(tail[:, off].mean())
    if len(tail) > 1:
        per_pair_std = tail[:, off].std(axis=0, ddof=1)
        std = float(per_pair_std.mean())
    else:
        std = 0.0
    return GiftStats(mean=mean, std=std, window=window)


# ---------------------------------------------------------------------------
# Schelling diagrams
# ---------------------------------------------------------------------------

SCHELLING_ENVS = ("cleanup", "coingame", "ssh", "ssg")


def _role_policies(env_kind: str, cooperator_ids: list[int]) -> tuple[ScriptedPolicy, ScriptedPolicy]:
    if env_kind == "cleanup":
        return BalancedCleanerPolicy(), ApplePickerPolicy()
    if env_kind == "ssh":
        return StagSeekerPolicy(cooperator_ids), HareSeekerPolicy()
    if env_kind == "ssg":
        return DriftRemoverPolicy(cooperator_ids), DriftWaiterPolicy()
    if env_kind == "coingame":
        return OwnColorCollectorPolicy(), GreedyCollectorPolicy()
    raise ConfigError(f"no scripted role policies for {env_kind!r}; "
                      f"choose from {SCHELLING_ENVS}")


@dataclass
class SchellingCurve:
    """Mean payoffs by role as a function of the cooperator count l.

    ``rc[l]`` is the average cooperator payoff with l cooperators (undefined,
    NaN, at l=0) and ``rd[l]`` the average defector payoff (NaN at l=N).
    ``rc_samples[l]``/``rd_samples[l]`` keep the per-episode role means behind
    each point for error estimation.
    """

    env_kind: str
    n_agents: int
    episodes_per_point: int
    seed: int
    rc: np.ndarray
    rd: np.ndarray
    rc_samples: list
    rd_samples: list


def schelling_diagram(env_kind: str, episodes_per_point: int, seed: int,
                      env_overrides: dict | None = None) -> SchellingCurve:
    """Estimate the role-payoff curves from scripted mixed groups."""
    cfg = EnvConfig.preset(env_kind, **(env_overrides or {}))
    n = cfg.n_agents
    rc = np.full(n + 1, np.nan)
    rd = np.full(n + 1, np.nan)
    rc_samples: list = [None] * (n + 1)
    rd_samples: list = [None] * (n + 1)
    for n_coop in range(n + 1):
        coop_ids = list(range(n_coop))
        coop_policy, defect_policy = _role_policies(env_kind, coop_ids)
        env = make_env(cfg, seed=seed + 1000 * n_coop)
        rng = np.random.default_rng(seed + 1000 * n_coop + 1)
        episode_returns = np.zeros((episodes_per_point, n))
        for ep in range(episodes_per_point):
            env.reset()
            done = False
            while not done:
                joint = []
                for i in range(n):
                    policy = coop_policy if i < n_coop else defect_policy
                    joint.append(policy.act(env, i, rng))
                result = env.step(joint)
                episode_returns[ep] += result.rewards
                done = result.done
        if n_coop > 0:
            rc_samples[n_coop] = episode_returns[:, :n_coop].mean(axis=1)
            rc[n_coop] = rc_samples[n_coop].mean()
        if n_coop < n:
            rd_samples[n_coop] = episode_returns[:, n_coop:].mean(axis=1)
            rd[n_coop] = rd_samples[n_coop].mean()
    return SchellingCurve(env_kind, n, episodes_per_point, seed, rc, rd,
                          rc_samples, rd_samples)


@dataclass(frozen=True)
class SsdReport:
    """Which dilemma conditions hold for an estimated Schelling curve.

    Fear and greed compare the two plotted curves Rc(l+1) and Rd(l) at the
    extremes of the shared x-axis (l co-operating others).
    """

    mutual_cooperation_beats_defection: bool  # Rc(N) > Rd(0)
    cooperation_beats_exploitation: bool      # Rc(N) > Rc(1)
    fear: bool                                # Rd(0) > Rc(1)
    greed: bool                               # Rd(N-1) > Rc(N)
    rc: tuple
    rd: tuple


def verify_ssd(curve: SchellingCurve) -> SsdReport:
    n = curve.n_agents
    rc, rd = curve.rc, curve.rd
    return SsdReport(
        mutual_cooperation_beats_defection=bool(rc[n] > rd[0]),
        cooperation_beats_exploitation=bool(rc[n] > rc[1]),
        fear=bool(rd[0] > rc[1]),
        greed=bool(rd[n - 1] > rc[n]),
        rc=tuple(float(v) for v in rc),
        rd=tuple(float(v) for v in rd),
    )


def write_schelling_csv(curve: SchellingCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_cooperators", "cooperator_return", "defector_return"])
        for l in range(curve.n_agents + 1):
            rc = "" if np.isnan(curve.rc[l]) else repr(float(curve.rc[l]))
            rd = "" if np.isnan(curve.rd[l]) else repr(float(curve.rd[l]))
            writer.writerow([l, rc, rd])
