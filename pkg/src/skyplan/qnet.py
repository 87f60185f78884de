"""Feed-forward action-value network with explicit gradients.

Small fully-connected net (default 3 -> 128 -> 128 -> 16, rectified-linear
hidden activations, linear output) implemented directly on numpy float64 so
training is deterministic and gradients can be validated against finite
differences.
"""

from __future__ import annotations

import json

import numpy as np

CHECKPOINT_FORMAT_VERSION = 1


class QApproximator:
    """MLP mapping a normalized state triple to one value per action."""

    def __init__(
        self,
        input_dim: int = 3,
        hidden: tuple[int, ...] = (128, 128),
        output_dim: int = 16,
        rng: np.random.Generator | None = None,
    ):
        self.input_dim = input_dim
        self.hidden = tuple(hidden)
        self.output_dim = output_dim
        widths = (input_dim, *hidden, output_dim)
        rng = rng or np.random.default_rng()
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(rng.uniform(-bound, bound, size=fan_out))

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list[np.ndarray]:
        """Flat list alternating weight and bias arrays, layer by layer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def set_parameters(self, params: list[np.ndarray]) -> None:
        expected = [p.shape for p in self.parameters()]
        got = [np.asarray(p).shape for p in params]
        if expected != got:
            raise ValueError(f"parameter shape mismatch: expected {expected}, got {got}")
        for i in range(self.num_layers):
            self.weights[i] = np.array(params[2 * i], dtype=float)
            self.biases[i] = np.array(params[2 * i + 1], dtype=float)

    def clone(self) -> "QApproximator":
        other = QApproximator.__new__(QApproximator)
        other.input_dim = self.input_dim
        other.hidden = self.hidden
        other.output_dim = self.output_dim
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Action values for a batch of states, shape (batch, output_dim)."""
        q, _ = self.forward_cached(x)
        return q

    def forward_cached(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite network input")
        activations = [x]
        h = x
        for i in range(self.num_layers - 1):
            h = np.maximum(h @ self.weights[i] + self.biases[i], 0.0)
            activations.append(h)
        q = h @ self.weights[-1] + self.biases[-1]
        return q, activations

    def q_values(self, state_features: np.ndarray) -> np.ndarray:
        """Action values for a single state, shape (output_dim,)."""
        return self.forward(state_features)[0]

    def backward_from_output(
        self, activations: list[np.ndarray], grad_q: np.ndarray
    ) -> list[np.ndarray]:
        """Parameter gradients given d(loss)/d(output), same layout as parameters()."""
        grads_w: list[np.ndarray] = [None] * self.num_layers
        grads_b: list[np.ndarray] = [None] * self.num_layers
        g = grad_q
        for i in range(self.num_layers - 1, -1, -1):
            grads_w[i] = activations[i].T @ g
            grads_b[i] = g.sum(axis=0)
            if i > 0:
                g = (g @ self.weights[i].T) * (activations[i] > 0.0)
        out = []
        for gw, gb in zip(grads_w, grads_b):
            out.extend((gw, gb))
        return out

    def soft_update_from(self, online: "QApproximator", tau: float) -> None:
        """Track another net: params <- tau*online + (1-tau)*params."""
        if not 0.0 <= tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        mine = self.parameters()
        theirs = online.parameters()
        if [p.shape for p in mine] != [p.shape for p in theirs]:
            raise ValueError("shape mismatch between networks")
        for i in range(self.num_layers):
            self.weights[i] = tau * online.weights[i] + (1.0 - tau) * self.weights[i]
            self.biases[i] = tau * online.biases[i] + (1.0 - tau) * self.biases[i]


def soft_update(target: QApproximator, online: QApproximator, tau: float) -> QApproximator:
    target.soft_update_from(online, tau)
    return target


class AdamOptimizer:
    """Adaptive-moment first-order optimizer over a parameter list."""

    def __init__(
        self,
        shapes: list[tuple[int, ...]],
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
        self.t += 1
        lr_t = self.learning_rate * np.sqrt(1.0 - self.beta2**self.t) / (
            1.0 - self.beta1**self.t
        )
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            out.append(p - lr_t * self.m[i] / (np.sqrt(self.v[i]) + self.eps))
        return out


def td_loss_and_grads(
    net: QApproximator,
    target_net: QApproximator,
    states: np.ndarray,
    actions: np.ndarray,
    rewards: np.ndarray,
    next_states: np.ndarray,
    dones: np.ndarray,
    gamma: float,
    next_valid_mask: np.ndarray | None = None,
) -> tuple[float, list[np.ndarray]]:
    """Mean-squared TD error against the target net, with its gradients.

    Terminal transitions use the bare reward as target. When a validity mask
    for the next state's actions is given, the bootstrap max only ranges
    over valid actions.
    """
    batch = states.shape[0]
    if batch == 0:
        raise ValueError("empty batch")
    q, activations = net.forward_cached(states)
    q_next = target_net.forward(next_states)
    if next_valid_mask is not None:
        q_next = np.where(next_valid_mask, q_next, -np.inf)
    max_next = q_next.max(axis=1)
    targets = rewards + gamma * max_next * (1.0 - dones.astype(float))
    idx = np.arange(batch)
    q_sa = q[idx, actions]
    diff = q_sa - targets
    loss = float(np.mean(diff**2))
    if not np.isfinite(loss):
        raise FloatingPointError(f"non-finite TD loss: {loss}")
    grad_q = np.zeros_like(q)
    grad_q[idx, actions] = 2.0 * diff / batch
    return loss, net.backward_from_output(activations, grad_q)


def save_checkpoint(
    path,
    net: QApproximator,
    optimizer: AdamOptimizer | None = None,
    config: dict | None = None,
    seed: int | None = None,
) -> None:
    """Persist shapes, parameters, optimizer state, and the config snapshot."""
    payload: dict[str, np.ndarray] = {
        "format_version": np.array(CHECKPOINT_FORMAT_VERSION),
        "seed": np.array(-1 if seed is None else seed),
        "layer_widths": np.array([net.input_dim, *net.hidden, net.output_dim]),
        "config_json": np.array(json.dumps(config or {})),
    }
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        payload[f"w{i}"] = w
        payload[f"b{i}"] = b
    if optimizer is not None:
        payload["adam_t"] = np.array(optimizer.t)
        payload["adam_lr"] = np.array(optimizer.learning_rate)
        for i, (m, v) in enumerate(zip(optimizer.m, optimizer.v)):
            payload[f"adam_m{i}"] = m
            payload[f"adam_v{i}"] = v
    np.savez(path, **payload)


def load_checkpoint(path) -> tuple[QApproximator, AdamOptimizer | None, dict]:
    """Load a checkpoint; rejects parameter arrays whose shapes disagree."""
    data = np.load(path, allow_pickle=False)
    version = int(data["format_version"])
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format version {version}")
    widths = [int(w) for w in data["layer_widths"]]
    net = QApproximator(widths[0], tuple(widths[1:-1]), widths[-1])
    params = []
    for i in range(net.num_layers):
        w, b = data[f"w{i}"], data[f"b{i}"]
        expected = (net.weights[i].shape, net.biases[i].shape)
        if (w.shape, b.shape) != expected:
            raise ValueError(
                f"checkpoint layer {i} shape {(w.shape, b.shape)} does not match "
                f"declared widths {expected}"
            )
        params.extend((w, b))
    net.set_parameters(params)
    optimizer = None
    if "adam_t" in data:
        optimizer = AdamOptimizer(
            [p.shape for p in net.parameters()], learning_rate=float(data["adam_lr"])
        )
        optimizer.t = int(data["adam_t"])
        optimizer.m = [data[f"adam_m{i}"] for i in range(2 * net.num_layers)]
        optimizer.v = [data[f"adam_v{i}"] for i in range(2 * net.num_layers)]
    config = json.loads(str(data["config_json"]))
    return net, optimizer, config
