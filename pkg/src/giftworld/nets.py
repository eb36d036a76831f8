"""Small dense networks with manual backprop and an Adam optimizer.

Everything here is plain float64 numpy. Networks are ReLU MLPs with one of
three output heads:

* ``softmax``     -- probability distribution over a discrete action set,
* ``scalar``      -- a single real value (last layer has width 1),
* ``sigmoid_map`` -- elementwise sigmoid vector, used to emit values in (0,1)
  shaped like an observation.

Checkpoint format (``save``/``load``): a ``.npz`` archive with keys
``format_version`` (currently 1), ``head``, ``dims``, ``W0..Wk``/``b0..bk``
and, when an optimizer is attached, ``adam_lr``, ``adam_step``,
``adam_m0../adam_v0..`` moment arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation

HEADS = ("softmax", "scalar", "sigmoid_map")


# ---------------------------------------------------------------------------
# loss specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogProbWeighted:
    """loss = -sum_b coeff_b * log pi_b(action_b); softmax head only.

    Descending this loss ascends ``sum coeff * log pi``, which is how the
    actor-style update rules are expressed for the optimizer.
    """

    actions: np.ndarray  # (B,) int
    coeffs: np.ndarray   # (B,) float


@dataclass(frozen=True)
class SquaredError:
    """loss = 0.5 * sum_b (out_b - target_b)^2; scalar head only."""

    targets: np.ndarray  # (B,)


@dataclass(frozen=True)
class CrossEntropy:
    """loss = -sum_b log pi_b(target_b) against one-hot targets; softmax head."""

    targets: np.ndarray  # (B,) int


@dataclass(frozen=True)
class L1ToTarget:
    """loss = sum_b |out_b - target_b|_1; sigmoid_map head only."""

    targets: np.ndarray  # (B, d_out)


LossSpec = LogProbWeighted | SquaredError | CrossEntropy | L1ToTarget


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class DenseNet:
    """Fully connected ReLU network with an explicit output head."""

    def __init__(self, layer_dims: list[int], head: str, rng: np.random.Generator | None = None):
        if head not in HEADS:
            raise ContractViolation(f"unknown head {head!r}")
        if len(layer_dims) < 2:
            raise ContractViolation("need at least input and output dims")
        if head == "scalar" and layer_dims[-1] != 1:
            raise ContractViolation("scalar head requires output width 1")
        self.layer_dims = list(layer_dims)
        self.head = head
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            if rng is None:
                w = np.zeros((fan_in, fan_out))
            else:
                bound = np.sqrt(6.0 / (fan_in + fan_out))
                w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    # -- forward -----------------------------------------------------------

    @property
    def in_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def out_dim(self) -> int:
        return self.layer_dims[-1]

    def _check_input(self, x: np.ndarray) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ContractViolation(
                f"input width {x.shape[-1]} != expected {self.in_dim}")
        return x, squeeze

    def _forward_cached(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Returns (head output, per-layer activations incl. input)."""
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if k == last else np.maximum(z, 0.0)
            acts.append(h)
        if self.head == "softmax":
            out = _softmax(h)
        elif self.head == "sigmoid_map":
            out = _sigmoid(h)
        else:
            out = h[:, 0]
        return out, acts

    def forward(self, x: np.ndarray) -> np.ndarray:
        x, squeeze = self._check_input(x)
        out, _ = self._forward_cached(x)
        return out[0] if squeeze else out

    # -- backward ----------------------------------------------------------

    def _backprop(self, acts: list[np.ndarray], dz: np.ndarray):
        """Backprop from d(loss)/d(final pre-activation). Returns (grads, dx)."""
        grads_w = [np.zeros_like(w) for w in self.weights]
        grads_b = [np.zeros_like(b) for b in self.biases]
        for k in range(len(self.weights) - 1, -1, -1):
            grads_w[k] = acts[k].T @ dz
            grads_b[k] = dz.sum(axis=0)
            dh = dz @ self.weights[k].T
            if k > 0:
                dz = dh * (acts[k] > 0)
        return grads_w + grads_b, dh

    def _head_grad(self, out: np.ndarray, spec: LossSpec) -> tuple[float, np.ndarray]:
        """Loss value and d(loss)/d(final pre-activation) for a loss spec."""
        b = out.shape[0]
        if isinstance(spec, (LogProbWeighted, CrossEntropy)):
            if self.head != "softmax":
                raise ContractViolation("log-prob losses need a softmax head")
            actions = np.asarray(spec.targets if isinstance(spec, CrossEntropy) else spec.actions, dtype=int)
            coeffs = (np.ones(b) if isinstance(spec, CrossEntropy)
                      else np.asarray(spec.coeffs, dtype=np.float64))
            picked = out[np.arange(b), actions]
            loss = float(-(coeffs * np.log(np.maximum(picked, 1e-300))).sum())
            dz = out * coeffs[:, None]
            dz[np.arange(b), actions] -= coeffs
            return loss, dz
        if isinstance(spec, SquaredError):
            if self.head != "scalar":
                raise ContractViolation("squared-error loss needs a scalar head")
            diff = out - np.asarray(spec.targets, dtype=np.float64)
            return float(0.5 * (diff ** 2).sum()), diff[:, None]
        if isinstance(spec, L1ToTarget):
            if self.head != "sigmoid_map":
                raise ContractViolation("L1 loss needs a sigmoid_map head")
            diff = out - np.asarray(spec.targets, dtype=np.float64)
            loss = float(np.abs(diff).sum())
            return loss, np.sign(diff) * out * (1.0 - out)
        raise ContractViolation(f"unsupported loss spec {type(spec).__name__}")

    def loss_and_grads(self, x: np.ndarray, spec: LossSpec):
        """Returns (loss, parameter gradients, d loss / d input)."""
        x, _ = self._check_input(x)
        out, acts = self._forward_cached(x)
        loss, dz = self._head_grad(out, spec)
        grads, dx = self._backprop(acts, dz)
        return loss, grads, dx

    def grads_from_output_grad(self, x: np.ndarray, d_out: np.ndarray):
        """Backprop an externally supplied d loss / d output (VJP).

        Used when this net's output feeds another differentiable stage.
        Returns (parameter gradients, d loss / d input).
        """
        x, _ = self._check_input(x)
        out, acts = self._forward_cached(x)
        d_out = np.asarray(d_out, dtype=np.float64)
        if self.head == "softmax":
            inner = (d_out * out).sum(axis=-1, keepdims=True)
            dz = out * (d_out - inner)
        elif self.head == "sigmoid_map":
            dz = d_out * out * (1.0 - out)
        else:
            dz = d_out.reshape(-1, 1)
        return self._backprop(acts, dz)

    # -- parameters --------------------------------------------------------

    @property
    def params(self) -> list[np.ndarray]:
        return self.weights + self.biases

    def set_params(self, values: list[np.ndarray]) -> None:
        n = len(self.weights)
        for w, v in zip(self.weights, values[:n]):
            w[...] = v
        for b, v in zip(self.biases, values[n:]):
            b[...] = v

    def copy(self) -> "DenseNet":
        clone = DenseNet(self.layer_dims, self.head)
        clone.set_params([p.copy() for p in self.params])
        return clone

    # -- checkpointing -----------------------------------------------------

    def save(self, path, optimizer: "Adam | None" = None) -> None:
        payload = {"format_version": np.int64(1),
                   "head": np.str_(self.head),
                   "dims": np.asarray(self.layer_dims, dtype=np.int64)}
        for k, w in enumerate(self.weights):
            payload[f"W{k}"] = w
        for k, b in enumerate(self.biases):
            payload[f"b{k}"] = b
        if optimizer is not None:
            payload["adam_lr"] = np.float64(optimizer.lr)
            payload["adam_step"] = np.int64(optimizer.step_count)
            for k, m in enumerate(optimizer.m):
                payload[f"adam_m{k}"] = m
            for k, v in enumerate(optimizer.v):
                payload[f"adam_v{k}"] = v
        np.savez(path, **payload)

    @classmethod
    def load(cls, path) -> tuple["DenseNet", "Adam | None"]:
        data = np.load(path, allow_pickle=False)
        if int(data["format_version"]) != 1:
            raise ContractViolation("unknown checkpoint format version")
        dims = [int(d) for d in data["dims"]]
        net = cls(dims, str(data["head"]))
        n = len(net.weights)
        net.set_params([data[f"W{k}"] for k in range(n)] + [data[f"b{k}"] for k in range(n)])
        opt = None
        if "adam_lr" in data:
            opt = Adam(net.params, lr=float(data["adam_lr"]))
            opt.step_count = int(data["adam_step"])
            opt.m = [data[f"adam_m{k}"].copy() for k in range(len(net.params))]
            opt.v = [data[f"adam_v{k}"].copy() for k in range(len(net.params))]
        return net, opt


@dataclass
class Adam:
    """Adaptive-moment gradient descent on a fixed parameter list."""

    params: list[np.ndarray]
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not self.m:
            self.m = [np.zeros_like(p) for p in self.params]
            self.v = [np.zeros_like(p) for p in self.params]

    def apply(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ContractViolation("gradient list does not match parameters")
        self.step_count += 1
        c1 = 1.0 - self.beta1 ** self.step_count
        c2 = 1.0 - self.beta2 ** self.step_count
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            if g.shape != p.shape:
                raise ContractViolation("gradient shape mismatch")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def finite_difference_grads(net: DenseNet, x: np.ndarray, spec: LossSpec,
                            step: float = 1e-5) -> list[np.ndarray]:
    """Central-difference gradients of the loss, for checking backprop."""
    grads = []
    for p in net.params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + step
            lo_plus, _, _ = net.loss_and_grads(x, spec)
            p[idx] = orig - step
            lo_minus, _, _ = net.loss_and_grads(x, spec)
            p[idx] = orig
            g[idx] = (lo_plus - lo_minus) / (2.0 * step)
            it.iternext()
        grads.append(g)
    return grads
