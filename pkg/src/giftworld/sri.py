"""Social relationship inference: perspective taking and counterfactual gifting weights.

An agent carries three heads: a policy net predicting "an agent's action given
an observation" (trained on its own actions), a joint-action Q head over its
own extrinsic return, and an observation-conversion net that simulates a
co-player's observation from the agent's own view plus the co-player's id.
The gifting weight toward co-player j compares the Q of the taken joint
action against the baseline that marginalizes j's action under the inferred
policy, normalized by (N-1) times the counterfactual Q range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolation
from .nets import Adam, CrossEntropy, DenseNet, LogProbWeighted, SquaredError


def joint_one_hot(joint: np.ndarray, n_agents: int, n_actions: int) -> np.ndarray:
    """Concatenated per-agent action one-hots in fixed agent order.

    ``joint`` is (N,) or (B, N) of action indices; output is (N*A,) or (B, N*A).
    """
    joint = np.asarray(joint, dtype=int)
    squeeze = joint.ndim == 1
    if squeeze:
        joint = joint[None, :]
    b = joint.shape[0]
    out = np.zeros((b, n_agents * n_actions))
    rows = np.repeat(np.arange(b), n_agents)
    cols = (np.arange(n_agents) * n_actions)[None, :] + joint
    out[rows, cols.ravel()] = 1.0
    return out[0] if squeeze else out


def weight_from_q(q_row: np.ndarray, taken: int, inferred_policy: np.ndarray,
                  n_agents: int) -> float:
    """Gift weight from one counterfactual Q row.

    Degenerate rows (all Q equal) yield 0; otherwise the advantage of the
    taken action over the policy-weighted baseline, normalized into
    [0, 1/(N-1)].
    """
    q_row = np.asarray(q_row, dtype=np.float64)
    spread = float(q_row.max() - q_row.min())
    m = (n_agents - 1) * spread
    if m == 0.0:
        return 0.0
    baseline = float(inferred_policy @ q_row)
    w = (float(q_row[taken]) - baseline) / m
    return min(1.0 / (n_agents - 1), max(0.0, w))


def weights_from_q_batch(q_rows: np.ndarray, taken: np.ndarray,
                         policies: np.ndarray, n_agents: int) -> np.ndarray:
    """Vectorized weight_from_q over (B, A) rows."""
    spread = q_rows.max(axis=1) - q_rows.min(axis=1)
    m = (n_agents - 1) * spread
    num = q_rows[np.arange(len(q_rows)), taken] - (policies * q_rows).sum(axis=1)
    safe = np.where(m == 0.0, 1.0, m)
    w = np.where(m == 0.0, 0.0, num / safe)
    return np.clip(w, 0.0, 1.0 / (n_agents - 1))


@dataclass
class SriBatch:
    """Training slice from an agent's own trajectory buffer."""

    obs: np.ndarray        # (B, d)
    joint: np.ndarray      # (B, N) int
    rewards: np.ndarray    # (B,) extrinsic
    next_obs: np.ndarray   # (B, d)
    next_joint: np.ndarray  # (B, N) int
    terminal: np.ndarray   # (B,) bool

    def __len__(self) -> int:
        return len(self.rewards)


class SRNetworks:
    """Per-agent inference stack (policy mu, value phi, conversion eta)."""

    def __init__(self, obs_dim: int, n_agents: int, n_actions: int, agent_index: int,
                 hidden: Sequence[int], rng: np.random.Generator | None,
                 gamma_sc: float = 0.98, delta: float = 0.1,
                 lr_policy: float = 3e-5, lr_value: float = 3e-5,
                 lr_conversion: float = 5e-5, uniform_inference: bool = False):
        self.obs_dim = obs_dim
        self.n_agents = n_agents
        self.n_actions = n_actions
        self.agent_index = agent_index
        self.gamma_sc = gamma_sc
        self.delta = delta
        self.uniform_inference = uniform_inference
        hidden = list(hidden)
        self.sr_value = DenseNet([obs_dim + n_agents * n_actions, *hidden, 1], "scalar", rng)
        self.opt_value = Adam(self.sr_value.params, lr_value)
        if uniform_inference:
            self.sr_policy = None
            self.obs_conversion = None
            self.opt_policy = None
            self.opt_conversion = None
        else:
            self.sr_policy = DenseNet([obs_dim, *hidden, n_actions], "softmax", rng)
            self.obs_conversion = DenseNet([obs_dim + n_agents, *hidden, obs_dim],
                                           "sigmoid_map", rng)
            self.opt_policy = Adam(self.sr_policy.params, lr_policy)
            self.opt_conversion = Adam(self.obs_conversion.params, lr_conversion)

    # -- perspective taking --------------------------------------------------

    def _conversion_input(self, own_obs: np.ndarray, co_player: int) -> np.ndarray:
        own_obs = np.asarray(own_obs, dtype=np.float64)
        one_hot = np.zeros(self.n_agents)
        one_hot[co_player] = 1.0
        if own_obs.ndim == 1:
            return np.concatenate([own_obs, one_hot])
        return np.concatenate([own_obs, np.tile(one_hot, (own_obs.shape[0], 1))], axis=1)

    def imagine_observation(self, own_obs: np.ndarray, co_player: int) -> np.ndarray:
        """Simulated observation of the co-player, sigmoid-normalized."""
        if co_player == self.agent_index:
            raise ContractViolation("cannot take one's own perspective")
        if self.obs_conversion is None:
            raise ContractViolation("this agent has no observation conversion net")
        return self.obs_conversion.forward(self._conversion_input(own_obs, co_player))

    def infer_policy(self, simulated_obs: np.ndarray) -> np.ndarray:
        """Distribution over the co-player's actions given a simulated view."""
        if self.sr_policy is None:
            shape = np.asarray(simulated_obs).shape
            base = np.full(self.n_actions, 1.0 / self.n_actions)
            return base if len(shape) == 1 else np.tile(base, (shape[0], 1))
        return self.sr_policy.forward(simulated_obs)

    def inferred_co_policy(self, own_obs: np.ndarray, co_player: int) -> np.ndarray:
        """Uniform for the ablation, otherwise policy of the imagined view."""
        if self.uniform_inference:
            if np.asarray(own_obs).ndim == 1:
                return np.full(self.n_actions, 1.0 / self.n_actions)
            return np.full((np.asarray(own_obs).shape[0], self.n_actions),
                           1.0 / self.n_actions)
        return self.infer_policy(self.imagine_observation(own_obs, co_player))

    # -- Q and counterfactuals ----------------------------------------------

    def q_joint(self, own_obs: np.ndarray, joint: np.ndarray) -> float | np.ndarray:
        x = self._value_input(own_obs, joint)
        return self.sr_value.forward(x)

    def _value_input(self, own_obs: np.ndarray, joint: np.ndarray) -> np.ndarray:
        own_obs = np.asarray(own_obs, dtype=np.float64)
        enc = joint_one_hot(joint, self.n_agents, self.n_actions)
        if own_obs.ndim == 1:
            return np.concatenate([own_obs, enc])
        return np.concatenate([own_obs, enc], axis=1)

    def counterfactual_q_row(self, own_obs: np.ndarray, joint: np.ndarray,
                             co_player: int) -> np.ndarray:
        """Q over all of j's actions, other agents held at their taken actions."""
        joint = np.asarray(joint, dtype=int)
        variants = np.tile(joint, (self.n_actions, 1))
        variants[:, co_player] = np.arange(self.n_actions)
        obs_rep = np.tile(np.asarray(own_obs, dtype=np.float64), (self.n_actions, 1))
        return np.asarray(self.sr_value.forward(self._value_input(obs_rep, variants)))

    def counterfactual_q_batch(self, obs: np.ndarray, joint: np.ndarray,
                               co_player: int) -> np.ndarray:
        """(B, A) counterfactual Q rows for a batch of steps."""
        b = obs.shape[0]
        a = self.n_actions
        variants = np.repeat(joint, a, axis=0)
        variants[:, co_player] = np.tile(np.arange(a), b)
        obs_rep = np.repeat(obs, a, axis=0)
        q = self.sr_value.forward(self._value_input(obs_rep, variants))
        return np.asarray(q).reshape(b, a)

    def gift_weight(self, own_obs: np.ndarray, joint: np.ndarray, co_player: int,
                    inferred_policy: np.ndarray | None = None) -> float:
        """Weight of own reward gifted to ``co_player`` for one joint action."""
        if co_player == self.agent_index:
            raise ContractViolation("gift weights are defined for co-players only")
        q_row = self.counterfactual_q_row(own_obs, joint, co_player)
        if inferred_policy is None:
            inferred_policy = self.inferred_co_policy(own_obs, co_player)
        return weight_from_q(q_row, int(np.asarray(joint)[co_player]),
                             inferred_policy, self.n_agents)

    def gift_row(self, own_obs: np.ndarray, joint: np.ndarray) -> np.ndarray:
        """Full row of the gift matrix, diagonal entry as the complement."""
        row = np.zeros(self.n_agents)
        for j in range(self.n_agents):
            if j != self.agent_index:
                row[j] = self.gift_weight(own_obs, joint, j)
        row[self.agent_index] = min(1.0, max(0.0, 1.0 - row.sum()))
        return row

    def gift_rows_batch(self, obs: np.ndarray, joint: np.ndarray,
                        co_player_obs: np.ndarray | None = None) -> np.ndarray:
        """(B, N) gift rows for a whole rollout at once.

        ``co_player_obs`` (B, N, d), when given, feeds the co-players' true
        observations to the inference policy instead of imagined ones (an
        evaluation-only diagnostic).
        """
        b = obs.shape[0]
        rows = np.zeros((b, self.n_agents))
        for j in range(self.n_agents):
            if j == self.agent_index:
                continue
            q_rows = self.counterfactual_q_batch(obs, joint, j)
            if self.uniform_inference:
                pol = np.full((b, self.n_actions), 1.0 / self.n_actions)
            elif co_player_obs is not None:
                pol = self.infer_policy(co_player_obs[:, j, :])
            else:
                pol = self.infer_policy(self.obs_conversion.forward(
                    self._conversion_input(obs, j)))
            rows[:, j] = weights_from_q_batch(q_rows, joint[:, j], pol, self.n_agents)
        own = 1.0 - rows.sum(axis=1)
        rows[:, self.agent_index] = np.clip(own, 0.0, 1.0)
        return rows

    # -- training -------------------------------------------------------------

    def update(self, batch: SriBatch) -> dict[str, float]:
        """TD update of the value/policy heads plus the conversion loss.

        The conversion loss mixes action cross-entropy (through the policy
        net's input, parameters frozen) with L1 reconstruction of the agent's
        own observation; gradients flow only into the conversion parameters.
        """
        if len(batch) == 0:
            return {}
        b = len(batch)
        i = self.agent_index
        x = self._value_input(batch.obs, batch.joint)
        x_next = self._value_input(batch.next_obs, batch.next_joint)
        q = np.asarray(self.sr_value.forward(x))
        q_next = np.asarray(self.sr_value.forward(x_next))
        q_next = np.where(batch.terminal, 0.0, q_next)
        targets = batch.rewards + self.gamma_sc * q_next
        td = targets - q
        value_loss, value_grads, _ = self.sr_value.loss_and_grads(x, SquaredError(targets))
        self.opt_value.apply(value_grads)
        report = {"sr_value_loss": value_loss / b}
        if self.sr_policy is not None:
            own_actions = batch.joint[:, i]
            policy_loss, policy_grads, _ = self.sr_policy.loss_and_grads(
                batch.obs, LogProbWeighted(own_actions, td))
            self.opt_policy.apply(policy_grads)
            report["sr_policy_loss"] = policy_loss / b
        if self.obs_conversion is not None:
            conv_grads = [np.zeros_like(p) for p in self.obs_conversion.params]
            ce_total = 0.0
            l1_total = 0.0
            n_co = self.n_agents - 1
            for j in range(self.n_agents):
                if j == i:
                    continue
                conv_in = self._conversion_input(batch.obs, j)
                o_hat = self.obs_conversion.forward(conv_in)
                ce, _, d_ohat_ce = self.sr_policy.loss_and_grads(
                    o_hat, CrossEntropy(batch.joint[:, j]))
                diff = o_hat - batch.obs
                d_ohat = (1.0 - self.delta) * d_ohat_ce + self.delta * np.sign(diff)
                grads, _ = self.obs_conversion.grads_from_output_grad(conv_in, d_ohat)
                for acc, g in zip(conv_grads, grads):
                    acc += g
                ce_total += ce
                l1_total += float(np.abs(diff).sum())
            self.opt_conversion.apply(conv_grads)
            report["conversion_ce"] = ce_total / (b * n_co)
            report["conversion_l1"] = l1_total / (b * n_co)
        return report


# -- spec-shaped free functions ------------------------------------------------

def imagine_observation(nets: SRNetworks, own_obs: np.ndarray, co_player: int) -> np.ndarray:
    return nets.imagine_observation(own_obs, co_player)


def infer_policy(nets: SRNetworks, simulated_obs: np.ndarray) -> np.ndarray:
    return nets.infer_policy(simulated_obs)


def q_joint(nets: SRNetworks, own_obs: np.ndarray, joint: np.ndarray):
    return nets.q_joint(own_obs, joint)


def counterfactual_baseline(nets: SRNetworks, own_obs: np.ndarray, joint: np.ndarray,
                            co_player: int, inferred_policy: np.ndarray) -> float:
    """Policy-weighted Q with the co-player's action marginalized."""
    q_row = nets.counterfactual_q_row(own_obs, joint, co_player)
    return float(np.asarray(inferred_policy) @ q_row)


def gift_weight(nets: SRNetworks, own_obs: np.ndarray, joint: np.ndarray,
                co_player: int, inferred_policy: np.ndarray | None = None) -> float:
    return nets.gift_weight(own_obs, joint, co_player, inferred_policy)


def sri_update(nets: SRNetworks, batch: SriBatch) -> dict[str, float]:
    return nets.update(batch)


def full_gift_matrix(all_nets: Sequence[SRNetworks | None],
                     observations: Sequence[np.ndarray],
                     joint: np.ndarray) -> np.ndarray:
    """Row-stochastic N x N gift matrix; non-gifting agents get identity rows."""
    n = len(all_nets)
    w = np.eye(n)
    for i, nets in enumerate(all_nets):
        if nets is not None:
            w[i] = nets.gift_row(np.asarray(observations[i]).ravel(), joint)
    return w
