"""Agent kinds: empathic gifters, their ablation, A2C, group-optimal, scripted."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envs.base import LEFT, MOVE_DELTAS, RIGHT, STAY, UP, DOWN, GridEnv
from .envs.cleanup import CLEAN, PICK, CleanupEnv
from .envs.snowdrift import REMOVE, SnowdriftEnv
from .envs.staghunt import HUNT_HARE, HUNT_STAG, StagHuntEnv
from .errors import ContractViolation
from .nets import Adam, DenseNet, LogProbWeighted, SquaredError
from .sri import SRNetworks, weight_from_q

AGENT_KINDS = ("lase", "lase-wo", "a2c", "go",
               "scripted-cooperator", "scripted-defector", "scripted-random")


@dataclass(frozen=True)
class ExplorationSchedule:
    """Linear epsilon decay over the first eps_div episodes, flat afterwards."""

    eps_start: float
    eps_end: float
    eps_div: int

    def value(self, episode: int) -> float:
        if episode >= self.eps_div:
            return self.eps_end
        frac = max(0.0, episode / self.eps_div)
        return self.eps_start + (self.eps_end - self.eps_start) * frac


def mixture_probabilities(policy_net: DenseNet, obs: np.ndarray, epsilon: float) -> np.ndarray:
    """(1-eps) * softmax policy + eps * uniform."""
    if not (0.0 <= epsilon <= 1.0):
        raise ContractViolation("epsilon must lie in [0, 1]")
    probs = policy_net.forward(np.asarray(obs, dtype=np.float64).ravel())
    n = probs.shape[-1]
    return (1.0 - epsilon) * probs + epsilon / n


def sample_action(policy_net: DenseNet, obs: np.ndarray, epsilon: float,
                  rng: np.random.Generator) -> int:
    probs = mixture_probabilities(policy_net, obs, epsilon)
    return int(rng.choice(len(probs), p=probs))


def a2c_update(policy_net: DenseNet, value_net: DenseNet,
               opt_policy: Adam, opt_value: Adam, gamma: float,
               obs: np.ndarray, actions: np.ndarray, rewards: np.ndarray,
               next_obs: np.ndarray, terminal: np.ndarray) -> dict[str, float]:
    """One batched actor-critic step over an episode.

    Critic regresses toward r + gamma*V(o') with V forced to 0 at episode
    ends; the actor ascends td * grad log pi using the same td.
    """
    v_next = np.asarray(value_net.forward(next_obs))
    v_next = np.where(terminal, 0.0, v_next)
    targets = rewards + gamma * v_next
    v = np.asarray(value_net.forward(obs))
    td = targets - v
    critic_loss, critic_grads, _ = value_net.loss_and_grads(obs, SquaredError(targets))
    opt_value.apply(critic_grads)
    actor_loss, actor_grads, _ = policy_net.loss_and_grads(
        obs, LogProbWeighted(np.asarray(actions, dtype=int), td))
    opt_policy.apply(actor_grads)
    n = len(rewards)
    return {"critic_loss": critic_loss / n, "actor_loss": actor_loss / n,
            "mean_td": float(td.mean())}


# ---------------------------------------------------------------------------
# agent classes
# ---------------------------------------------------------------------------

class Agent:
    kind = "base"
    trainable = False
    gifts = False
    reward_stream = "extrinsic"  # one of extrinsic | total | group

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.sri: SRNetworks | None = None

    def select_action(self, env, agent_id: int, obs: np.ndarray, epsilon: float) -> int:
        raise NotImplementedError

    def episode_update(self, obs, actions, rewards, next_obs, terminal) -> dict[str, float]:
        return {}


class TrainableAgent(Agent):
    trainable = True

    def __init__(self, kind: str, obs_dim: int, n_actions: int, hidden, gamma: float,
                 lr_policy: float, rng: np.random.Generator):
        super().__init__(rng)
        self.kind = kind
        self.gamma = gamma
        self.policy_net = DenseNet([obs_dim, *hidden, n_actions], "softmax", rng)
        self.value_net = DenseNet([obs_dim, *hidden, 1], "scalar", rng)
        self.opt_policy = Adam(self.policy_net.params, lr_policy)
        self.opt_value = Adam(self.value_net.params, lr_policy)

    def select_action(self, env, agent_id: int, obs: np.ndarray, epsilon: float) -> int:
        return sample_action(self.policy_net, obs, epsilon, self.rng)

    def episode_update(self, obs, actions, rewards, next_obs, terminal) -> dict[str, float]:
        return a2c_update(self.policy_net, self.value_net, self.opt_policy,
                          self.opt_value, self.gamma, obs, actions, rewards,
                          next_obs, terminal)


class A2CAgent(TrainableAgent):
    reward_stream = "extrinsic"


class GoAgent(TrainableAgent):
    """Independent nets trained on the group's summed reward."""

    reward_stream = "group"


class LaseAgent(TrainableAgent):
    """Gifting agent: acts on total rewards, infers relationships for its gift row."""

    gifts = True
    reward_stream = "total"

    def __init__(self, obs_dim: int, n_agents: int, n_actions: int, agent_index: int,
                 hidden, hyper, rng: np.random.Generator, uniform_inference: bool = False):
        kind = "lase-wo" if uniform_inference else "lase"
        super().__init__(kind, obs_dim, n_actions, hidden, hyper.gamma,
                         hyper.lr_policy, rng)
        self.sri = SRNetworks(
            obs_dim, n_agents, n_actions, agent_index, hidden, rng,
            gamma_sc=hyper.gamma_sc, delta=hyper.delta,
            lr_policy=hyper.lr_sr_policy, lr_value=hyper.lr_sr_value,
            lr_conversion=hyper.lr_conversion, uniform_inference=uniform_inference)


def lase_wo_gift_weight(sr_nets: SRNetworks, own_obs: np.ndarray, joint: np.ndarray,
                        co_player: int) -> float:
    """Ablation weight: the inferred co-player policy is forced uniform."""
    uniform = np.full(sr_nets.n_actions, 1.0 / sr_nets.n_actions)
    q_row = sr_nets.counterfactual_q_row(own_obs, joint, co_player)
    return weight_from_q(q_row, int(np.asarray(joint)[co_player]), uniform,
                         sr_nets.n_agents)


# ---------------------------------------------------------------------------
# scripted behaviors
# ---------------------------------------------------------------------------

def manhattan(a: tuple[int, int], b: tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def nearest_cell(pos: tuple[int, int], cells) -> tuple[int, int] | None:
    """Closest target; Manhattan ties broken by row-major order."""
    best = None
    for cell in sorted(cells):
        d = manhattan(pos, cell)
        if best is None or d < best[0]:
            best = (d, cell)
    return None if best is None else best[1]


def step_toward(pos: tuple[int, int], target: tuple[int, int]) -> int:
    """Greedy Manhattan move (vertical first on ties/dominance)."""
    dr = target[0] - pos[0]
    dc = target[1] - pos[1]
    if dr != 0 and abs(dr) >= abs(dc):
        return DOWN if dr > 0 else UP
    if dc != 0:
        return RIGHT if dc > 0 else LEFT
    return STAY


def random_move(rng: np.random.Generator) -> int:
    return int(rng.integers(4))


class ScriptedPolicy:
    name = "scripted"

    def act(self, env, agent_id: int, rng: np.random.Generator) -> int:
        raise NotImplementedError


class RandomPolicy(ScriptedPolicy):
    name = "random"

    def act(self, env, agent_id, rng):
        return int(rng.integers(env.n_actions))


class AlwaysCleanPolicy(ScriptedPolicy):
    """Cleanup cooperator: clean in place, else head to the nearest waste."""

    name = "cooperator"

    def act(self, env: CleanupEnv, agent_id, rng):
        pos = env.positions[agent_id]
        if pos in env.waste:
            return CLEAN
        target = nearest_cell(pos, env.waste)
        if target is None:
            return random_move(rng)
        return step_toward(pos, target)


class ApplePickerPolicy(ScriptedPolicy):
    """Cleanup defector: pick in place, else head to the nearest apple."""

    name = "defector"

    def act(self, env: CleanupEnv, agent_id, rng):
        pos = env.positions[agent_id]
        if pos in env.apples:
            return PICK
        target = nearest_cell(pos, env.apples)
        if target is None:
            return random_move(rng)
        return step_toward(pos, target)


class BalancedCleanerPolicy(ScriptedPolicy):
    """Cleans while apple growth is suppressed, harvests otherwise."""

    name = "balanced-cleaner"

    def __init__(self):
        self._cleaner = AlwaysCleanPolicy()
        self._picker = ApplePickerPolicy()

    def act(self, env: CleanupEnv, agent_id, rng):
        if env.waste_density >= env.config.threshold_depletion:
            return self._cleaner.act(env, agent_id, rng)
        return self._picker.act(env, agent_id, rng)


class StagSeekerPolicy(ScriptedPolicy):
    """Pairs of seekers converge on stags in row-major order and hunt together."""

    name = "stag-seeker"

    def __init__(self, seeker_ids: list[int]):
        self.seeker_ids = sorted(seeker_ids)

    def act(self, env: StagHuntEnv, agent_id, rng):
        if not env.active[agent_id]:
            return STAY
        stags = sorted(env.stags)
        if not stags:
            return STAY
        live = [i for i in self.seeker_ids if env.active[i]]
        rank = live.index(agent_id)
        target = stags[min(rank // 2, len(stags) - 1)]
        pos = env.positions[agent_id]
        if pos == target:
            return HUNT_STAG
        return step_toward(pos, target)


class HareSeekerPolicy(ScriptedPolicy):
    name = "hare-seeker"

    def act(self, env: StagHuntEnv, agent_id, rng):
        if not env.active[agent_id]:
            return STAY
        pos = env.positions[agent_id]
        if pos in env.hares:
            return HUNT_HARE
        target = nearest_cell(pos, env.hares)
        if target is None:
            return STAY
        return step_toward(pos, target)


class DriftRemoverPolicy(ScriptedPolicy):
    """Removers claim distinct nearest drifts so the field clears in parallel."""

    name = "drift-remover"

    def __init__(self, remover_ids: list[int]):
        self.remover_ids = sorted(remover_ids)

    def act(self, env: SnowdriftEnv, agent_id, rng):
        pos = env.positions[agent_id]
        if pos in env.drifts:
            return REMOVE
        drifts = sorted(env.drifts)
        if not drifts:
            return STAY
        unclaimed = list(drifts)
        target = None
        for i in self.remover_ids:
            pool = unclaimed if unclaimed else drifts
            choice = nearest_cell(env.positions[i], pool)
            if i == agent_id:
                target = choice
                break
            if choice in unclaimed:
                unclaimed.remove(choice)
        return step_toward(pos, target)


class DriftWaiterPolicy(ScriptedPolicy):
    name = "drift-waiter"

    def act(self, env: SnowdriftEnv, agent_id, rng):
        return STAY


class OwnColorCollectorPolicy(ScriptedPolicy):
    """Chases only coins of its own color; retreats from the other color."""

    name = "own-color-collector"

    def act(self, env, agent_id, rng):
        pos = env.positions[agent_id]
        coin = env.coin_pos
        if env.coin_color == agent_id:
            return step_toward_or_move(pos, coin, rng)
        # forced to move: step that maximizes distance to the wrong coin
        best_action, best_dist = None, -1
        for action in (UP, DOWN, LEFT, RIGHT):
            dr, dc = MOVE_DELTAS[action]
            r, c = pos[0] + dr, pos[1] + dc
            if not (0 <= r < env.map_size and 0 <= c < env.map_size):
                continue
            d = manhattan((r, c), coin)
            if d > best_dist:
                best_action, best_dist = action, d
        return best_action if best_action is not None else random_move(rng)


class GreedyCollectorPolicy(ScriptedPolicy):
    name = "greedy-collector"

    def act(self, env, agent_id, rng):
        return step_toward_or_move(env.positions[agent_id], env.coin_pos, rng)


def step_toward_or_move(pos, target, rng):
    """As step_toward, but never emits STAY (coin game has no stay action)."""
    action = step_toward(pos, target)
    return random_move(rng) if action == STAY else action


class ScriptedAgent(Agent):
    def __init__(self, kind: str, policy: ScriptedPolicy, rng: np.random.Generator):
        super().__init__(rng)
        self.kind = kind
        self.policy = policy

    def select_action(self, env, agent_id: int, obs, epsilon: float) -> int:
        return self.policy.act(env, agent_id, self.rng)


def scripted_act(kind: str, env, agent_id: int, rng: np.random.Generator) -> int:
    """Rule-based co-player actions for the cleanup-style mixed experiments."""
    if kind == "random":
        return RandomPolicy().act(env, agent_id, rng)
    if not isinstance(env, CleanupEnv):
        raise ContractViolation(f"scripted {kind!r} is defined for cleanup-like environments")
    if kind == "cooperator":
        return AlwaysCleanPolicy().act(env, agent_id, rng)
    if kind == "defector":
        return ApplePickerPolicy().act(env, agent_id, rng)
    raise ContractViolation(f"unknown scripted kind {kind!r}")


def build_agent(kind: str, env, agent_index: int, hyper,
                rng: np.random.Generator) -> Agent:
    """Construct a roster entry for ``env``."""
    kind = kind.replace("_", "-")
    obs_dim = env.obs_dim
    n_actions = env.n_actions
    hidden = hyper.hidden_sizes
    if kind == "lase":
        return LaseAgent(obs_dim, env.n_agents, n_actions, agent_index, hidden, hyper, rng)
    if kind == "lase-wo":
        return LaseAgent(obs_dim, env.n_agents, n_actions, agent_index, hidden, hyper, rng,
                         uniform_inference=True)
    if kind == "a2c":
        return A2CAgent("a2c", obs_dim, n_actions, hidden, hyper.gamma, hyper.lr_policy, rng)
    if kind == "go":
        return GoAgent("go", obs_dim, n_actions, hidden, hyper.gamma, hyper.lr_policy, rng)
    if kind in ("scripted-cooperator", "cooperator"):
        if not isinstance(env, CleanupEnv):
            raise ContractViolation("scripted-cooperator requires a cleanup-like environment")
        return ScriptedAgent("scripted-cooperator", AlwaysCleanPolicy(), rng)
    if kind in ("scripted-defector", "defector"):
        if not isinstance(env, CleanupEnv):
            raise ContractViolation("scripted-defector requires a cleanup-like environment")
        return ScriptedAgent("scripted-defector", ApplePickerPolicy(), rng)
    if kind in ("scripted-random", "random"):
        return ScriptedAgent("scripted-random", RandomPolicy(), rng)
    raise ContractViolation(f"unknown agent kind {kind!r}; choose from {AGENT_KINDS}")
