"""Episode orchestration: rollouts, gift matrices, redistribution, updates."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .agents import Agent, ExplorationSchedule, build_agent
from .envs import EnvConfig, make_env
from .errors import ConfigError, ContractViolation, GiftworldError
from .sri import SriBatch

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class HyperParams:
    """Training knobs; ``ssd()`` and ``ipd()`` are the built-in presets."""

    eps_start: float = 0.5
    eps_div: int = 2000
    eps_end: float = 0.05
    gamma: float = 0.98
    gamma_sc: float = 0.98
    delta: float = 0.1
    lr_policy: float = 1e-4
    lr_sr_policy: float = 3e-5
    lr_sr_value: float = 3e-5
    lr_conversion: float = 5e-5
    update_freq: int = 20
    batch_size: int = 1000
    hidden_sizes: tuple[int, ...] = (128, 64)
    buffer_capacity: int = 50_000

    @classmethod
    def ssd(cls, **overrides) -> "HyperParams":
        return replace(cls(), **overrides) if overrides else cls()

    @classmethod
    def ipd(cls, **overrides) -> "HyperParams":
        base = cls(eps_start=0.5, eps_div=1000, eps_end=0.01, gamma=0.95,
                   gamma_sc=0.98, delta=0.1, lr_policy=5e-3, lr_sr_policy=1e-3,
                   lr_sr_value=1e-3, lr_conversion=1e-3, update_freq=20,
                   batch_size=64, hidden_sizes=(32, 32))
        return replace(base, **overrides) if overrides else base


class TrajectoryBuffer:
    """FIFO ring of per-step records for one agent."""

    def __init__(self, capacity: int = 50_000):
        self.capacity = capacity
        self._records: list[tuple] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._records)

    def append(self, obs, joint, reward, next_obs, next_joint, terminal) -> None:
        rec = (obs, joint, reward, next_obs, next_joint, terminal)
        if len(self._records) < self.capacity:
            self._records.append(rec)
        else:
            self._records[self._next] = rec
            self._next = (self._next + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> SriBatch:
        """Without-replacement sample as stacked arrays."""
        k = min(batch_size, len(self._records))
        idx = rng.choice(len(self._records), size=k, replace=False)
        rows = [self._records[int(i)] for i in idx]
        return SriBatch(
            obs=np.stack([r[0] for r in rows]),
            joint=np.stack([r[1] for r in rows]).astype(int),
            rewards=np.array([r[2] for r in rows], dtype=np.float64),
            next_obs=np.stack([r[3] for r in rows]),
            next_joint=np.stack([r[4] for r in rows]).astype(int),
            terminal=np.array([r[5] for r in rows], dtype=bool),
        )


def redistribute(gift_matrix: np.ndarray, rewards: np.ndarray) -> np.ndarray:
    """Total rewards after zero-sum gifting: tot_i = sum_j w_ji * r_j."""
    w = np.asarray(gift_matrix, dtype=np.float64)
    r = np.asarray(rewards, dtype=np.float64)
    if w.shape != (len(r), len(r)):
        raise ContractViolation("gift matrix shape does not match the reward vector")
    if (w < -ROW_SUM_TOL).any() or np.abs(w.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
        raise ContractViolation("gift matrix must be row-stochastic")
    return w.T @ r


@dataclass
class EpisodeRecord:
    extrinsic: np.ndarray   # (T, N)
    totals: np.ndarray      # (T, N)
    gifts: np.ndarray       # (T, N, N)
    actions: np.ndarray     # (T, N)
    counters: dict
    losses: dict = field(default_factory=dict)

    @property
    def episode_extrinsic(self) -> np.ndarray:
        return self.extrinsic.sum(axis=0)

    @property
    def episode_totals(self) -> np.ndarray:
        return self.totals.sum(axis=0)

    @property
    def mean_gift_matrix(self) -> np.ndarray:
        return self.gifts.mean(axis=0)


def _accumulate_counters(acc: dict, info: dict) -> None:
    for key, val in info.items():
        if isinstance(val, (list, tuple)):
            arr = np.asarray(val, dtype=np.float64)
            acc[key] = acc.get(key, np.zeros_like(arr)) + arr
        elif isinstance(val, (int, float, np.integer, np.floating)):
            acc[key] = acc.get(key, 0.0) + float(val)


def run_episode(env, agents: list[Agent], epsilon: float,
                seed: int | None = None, train_agents: bool = True,
                use_true_co_obs: bool = False) -> EpisodeRecord:
    """One full rollout with end-of-episode gifting and trajectory storage.

    Gift rows are computed from the inference networks as they stood when the
    episode started (they are only updated between episodes), matching the
    rollout-then-weights ordering of the training loop. ``use_true_co_obs``
    pipes co-players' actual observations into the inference policy, an
    evaluation-only diagnostic.
    """
    n = env.n_agents
    if len(agents) != n:
        raise ContractViolation(f"{len(agents)} agents for an {n}-player environment")
    obs = env.reset(seed)
    flat = [np.asarray(o, dtype=np.float64).ravel() for o in obs]
    obs_steps, joint_steps, reward_steps, next_steps = [], [], [], []
    counters: dict = {}
    done = False
    while not done:
        joint = [agents[i].select_action(env, i, obs[i], epsilon) for i in range(n)]
        result = env.step(joint)
        next_flat = [np.asarray(o, dtype=np.float64).ravel() for o in result.observations]
        obs_steps.append(flat)
        joint_steps.append(joint)
        reward_steps.append(result.rewards)
        next_steps.append(next_flat)
        _accumulate_counters(counters, result.info)
        obs = result.observations
        flat = next_flat
        done = result.done

    t_len = len(joint_steps)
    obs_arr = np.asarray(obs_steps)          # (T, N, d)
    next_arr = np.asarray(next_steps)
    joint_arr = np.asarray(joint_steps, dtype=int)
    rewards = np.asarray(reward_steps, dtype=np.float64)

    gifts = np.tile(np.eye(n), (t_len, 1, 1))
    for i, agent in enumerate(agents):
        if agent.gifts and agent.sri is not None:
            co_obs = obs_arr if (use_true_co_obs and not agent.sri.uniform_inference) else None
            gifts[:, i, :] = agent.sri.gift_rows_batch(obs_arr[:, i, :], joint_arr,
                                                       co_player_obs=co_obs)
    totals = np.einsum("tij,ti->tj", gifts, rewards)

    joint_next = np.vstack([joint_arr[1:], joint_arr[-1:]])
    terminal = np.zeros(t_len, dtype=bool)
    terminal[-1] = True
    for i, agent in enumerate(agents):
        buffer = getattr(agent, "buffer", None)
        if buffer is not None:
            for t in range(t_len):
                buffer.append(obs_arr[t, i], joint_arr[t], float(rewards[t, i]),
                              next_arr[t, i], joint_next[t], bool(terminal[t]))

    losses: dict = {}
    group = rewards.sum(axis=1)
    for i, agent in enumerate(agents):
        if not (agent.trainable and train_agents):
            continue
        if agent.reward_stream == "total":
            stream = totals[:, i]
        elif agent.reward_stream == "group":
            stream = group
        else:
            stream = rewards[:, i]
        losses[f"agent{i}"] = agent.episode_update(
            obs_arr[:, i, :], joint_arr[:, i], stream, next_arr[:, i, :], terminal)

    return EpisodeRecord(rewards, totals, gifts, joint_arr, counters, losses)


@dataclass
class RunConfig:
    env_kind: str
    roster: list[str]
    hyper: HyperParams
    episodes: int
    seed: int = 0
    out_dir: str | None = None
    checkpoint_every: int = 0
    env_overrides: dict = field(default_factory=dict)
    preset_name: str | None = None

    def env_config(self) -> EnvConfig:
        return EnvConfig.preset(self.env_kind, **self.env_overrides)


@dataclass
class RunResult:
    config: RunConfig
    metrics: list[dict]
    agents: list[Agent]
    env: object

    def series(self, key: str) -> np.ndarray:
        return np.asarray([m[key] for m in self.metrics])

    def gift_series(self) -> np.ndarray:
        return np.asarray([m["gift_mean"] for m in self.metrics])


def _equality_or_none(returns: np.ndarray) -> float | None:
    from .metrics import equality
    try:
        return equality(returns)
    except GiftworldError:
        return None


def _check_finite(record: EpisodeRecord, episode: int, out_dir: str | None) -> None:
    bad = not np.isfinite(record.totals).all()
    for agent_losses in record.losses.values():
        for v in agent_losses.values():
            bad = bad or not np.isfinite(v)
    if bad:
        dump = {"episode": episode, "losses": record.losses,
                "totals": record.episode_totals.tolist()}
        if out_dir:
            with open(os.path.join(out_dir, "nan_dump.json"), "w") as fh:
                json.dump(dump, fh, indent=2, default=str)
        raise GiftworldError(f"non-finite losses at episode {episode}: {dump}")


def train(config: RunConfig, log_every: int = 0) -> RunResult:
    """Full training loop; writes a run directory when out_dir is set."""
    if config.episodes <= 0:
        raise ConfigError("episodes must be positive")
    seed_seq = np.random.SeedSequence(config.seed)
    env_ss, trainer_ss, *agent_ss = seed_seq.spawn(2 + len(config.roster))
    env_cfg = config.env_config()
    env = make_env(env_cfg, seed=int(env_ss.generate_state(1)[0]))
    if len(config.roster) != env.n_agents:
        raise ConfigError(
            f"roster has {len(config.roster)} agents, environment needs {env.n_agents}")
    agents = [build_agent(kind, env, i, config.hyper, np.random.default_rng(ss))
              for i, (kind, ss) in enumerate(zip(config.roster, agent_ss))]
    for agent in agents:
        if agent.gifts:
            agent.buffer = TrajectoryBuffer(config.hyper.buffer_capacity)
    sri_rng = np.random.default_rng(trainer_ss)
    schedule = ExplorationSchedule(config.hyper.eps_start, config.hyper.eps_end,
                                   config.hyper.eps_div)

    metrics_fh = None
    if config.out_dir:
        os.makedirs(config.out_dir, exist_ok=True)
        os.makedirs(os.path.join(config.out_dir, "checkpoints"), exist_ok=True)
        with open(os.path.join(config.out_dir, "config.json"), "w") as fh:
            json.dump(_config_dict(config), fh, indent=2)
        metrics_fh = open(os.path.join(config.out_dir, "metrics.jsonl"), "w")

    metrics: list[dict] = []
    try:
        for episode in range(config.episodes):
            epsilon = schedule.value(episode)
            record = run_episode(env, agents, epsilon)
            sri_losses = {}
            if (episode + 1) % config.hyper.update_freq == 0:
                for i, agent in enumerate(agents):
                    if agent.gifts and agent.sri is not None:
                        batch = agent.buffer.sample(config.hyper.batch_size, sri_rng)
                        sri_losses[f"agent{i}"] = agent.sri.update(batch)
            _check_finite(record, episode, config.out_dir)
            row = {
                "episode": episode,
                "epsilon": epsilon,
                "extrinsic": record.episode_extrinsic.tolist(),
                "total": record.episode_totals.tolist(),
                "collective": float(record.episode_extrinsic.sum()),
                "gift_mean": record.mean_gift_matrix.tolist(),
                "equality": _equality_or_none(record.episode_totals),
                "counters": {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                             for k, v in record.counters.items()},
                "losses": record.losses,
                "sri_losses": sri_losses,
            }
            metrics.append(row)
            if metrics_fh:
                metrics_fh.write(json.dumps(row, sort_keys=True) + "\n")
            if log_every and (episode + 1) % log_every == 0:
                recent = np.mean([m["collective"] for m in metrics[-log_every:]])
                print(f"episode {episode + 1}/{config.episodes} "
                      f"collective(mean over {log_every}) = {recent:.3f}", flush=True)
            if (config.out_dir and config.checkpoint_every
                    and (episode + 1) % config.checkpoint_every == 0):
                _save_checkpoints(agents, config.out_dir, episode + 1)
    finally:
        if metrics_fh:
            metrics_fh.close()
    if config.out_dir:
        _save_checkpoints(agents, config.out_dir, config.episodes)
        _write_summary(config, metrics)
    return RunResult(config, metrics, agents, env)


def _config_dict(config: RunConfig) -> dict:
    d = asdict(config)
    d["hyper"]["hidden_sizes"] = list(config.hyper.hidden_sizes)
    return d


def _save_checkpoints(agents: list[Agent], out_dir: str, episode: int) -> None:
    ckpt_dir = os.path.join(out_dir, "checkpoints", f"ep{episode:07d}")
    os.makedirs(ckpt_dir, exist_ok=True)
    for i, agent in enumerate(agents):
        if not agent.trainable:
            continue
        agent.policy_net.save(os.path.join(ckpt_dir, f"agent{i}_policy.npz"),
                              agent.opt_policy)
        agent.value_net.save(os.path.join(ckpt_dir, f"agent{i}_value.npz"),
                             agent.opt_value)
        if agent.sri is not None:
            agent.sri.sr_value.save(os.path.join(ckpt_dir, f"agent{i}_sr_value.npz"),
                                    agent.sri.opt_value)
            if agent.sri.sr_policy is not None:
                agent.sri.sr_policy.save(
                    os.path.join(ckpt_dir, f"agent{i}_sr_policy.npz"), agent.sri.opt_policy)
                agent.sri.obs_conversion.save(
                    os.path.join(ckpt_dir, f"agent{i}_conversion.npz"),
                    agent.sri.opt_conversion)


def load_checkpoints(agents: list[Agent], ckpt_dir: str) -> None:
    """Restore trainable agents' parameters saved by _save_checkpoints."""
    from .nets import DenseNet
    for i, agent in enumerate(agents):
        if not agent.trainable:
            continue
        for name, net in (("policy", agent.policy_net), ("value", agent.value_net)):
            loaded, _ = DenseNet.load(os.path.join(ckpt_dir, f"agent{i}_{name}.npz"))
            net.set_params(loaded.params)
        if agent.sri is not None:
            loaded, _ = DenseNet.load(os.path.join(ckpt_dir, f"agent{i}_sr_value.npz"))
            agent.sri.sr_value.set_params(loaded.params)
            if agent.sri.sr_policy is not None:
                loaded, _ = DenseNet.load(os.path.join(ckpt_dir, f"agent{i}_sr_policy.npz"))
                agent.sri.sr_policy.set_params(loaded.params)
                loaded, _ = DenseNet.load(os.path.join(ckpt_dir, f"agent{i}_conversion.npz"))
                agent.sri.obs_conversion.set_params(loaded.params)


def evaluate(config: RunConfig, episodes: int, checkpoint_dir: str | None = None,
             epsilon: float = 0.0, use_true_co_obs: bool = False) -> RunResult:
    """Frozen-policy rollouts: no learning updates, optional checkpoint restore."""
    seed_seq = np.random.SeedSequence(config.seed)
    env_ss, _, *agent_ss = seed_seq.spawn(2 + len(config.roster))
    env = make_env(config.env_config(), seed=int(env_ss.generate_state(1)[0]))
    agents = [build_agent(kind, env, i, config.hyper, np.random.default_rng(ss))
              for i, (kind, ss) in enumerate(zip(config.roster, agent_ss))]
    if checkpoint_dir:
        load_checkpoints(agents, checkpoint_dir)
    metrics: list[dict] = []
    for episode in range(episodes):
        record = run_episode(env, agents, epsilon, train_agents=False,
                             use_true_co_obs=use_true_co_obs)
        metrics.append({
            "episode": episode,
            "epsilon": epsilon,
            "extrinsic": record.episode_extrinsic.tolist(),
            "total": record.episode_totals.tolist(),
            "collective": float(record.episode_extrinsic.sum()),
            "gift_mean": record.mean_gift_matrix.tolist(),
            "equality": _equality_or_none(record.episode_totals),
            "counters": {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                         for k, v in record.counters.items()},
        })
    return RunResult(config, metrics, agents, env)


def _write_summary(config: RunConfig, metrics: list[dict]) -> None:
    tail = metrics[-min(len(metrics), 1000):]
    summary = {
        "episodes": len(metrics),
        "final_collective_mean": float(np.mean([m["collective"] for m in tail])),
        "final_equality": next((m["equality"] for m in reversed(metrics)
                                if m["equality"] is not None), None),
    }
    with open(os.path.join(config.out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
