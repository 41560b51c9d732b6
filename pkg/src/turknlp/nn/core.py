"""GRU cells, dense layers, losses, Adam, and a finite-difference checker."""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConfigError, InputError, NumericError, ShapeError
from . import autograd as ag
from .autograd import Tensor


@dataclass
class GruParams:
    """Gate and candidate weights of one GRU cell."""

    W_z: Tensor
    U_z: Tensor
    b_z: Tensor
    W_r: Tensor
    U_r: Tensor
    b_r: Tensor
    W_h: Tensor
    U_h: Tensor
    b_h: Tensor

    def __post_init__(self):
        h, i = self.W_z.shape
        for name in ("W_z", "W_r", "W_h"):
            if getattr(self, name).shape != (h, i):
                raise ShapeError(f"{name} must be {h}x{i}")
        for name in ("U_z", "U_r", "U_h"):
            if getattr(self, name).shape != (h, h):
                raise ShapeError(f"{name} must be {h}x{h}")
        for name in ("b_z", "b_r", "b_h"):
            if getattr(self, name).shape != (h,):
                raise ShapeError(f"{name} must have length {h}")

    @property
    def hidden_size(self) -> int:
        return self.W_z.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_z.shape[1]

    def named_tensors(self, prefix: str = "") -> List[Tuple[str, Tensor]]:
        names = ("W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h")
        return [(prefix + n, getattr(self, n)) for n in names]


def glorot(rng: np.random.Generator, rows: int, cols: int) -> Tensor:
    bound = math.sqrt(6.0 / (rows + cols))
    return Tensor(rng.uniform(-bound, bound, size=(rows, cols)), requires_grad=True)


def zeros(shape) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


def init_gru(rng: np.random.Generator, hidden: int, inputs: int) -> GruParams:
    return GruParams(
        W_z=glorot(rng, hidden, inputs), U_z=glorot(rng, hidden, hidden), b_z=zeros(hidden),
        W_r=glorot(rng, hidden, inputs), U_r=glorot(rng, hidden, hidden), b_r=zeros(hidden),
        W_h=glorot(rng, hidden, inputs), U_h=glorot(rng, hidden, hidden), b_h=zeros(hidden))


def gru_step(params: GruParams, h: Tensor, x: Tensor) -> Tensor:
    """z = s(W_z x + U_z h + b_z); r likewise; candidate uses U_h (r*h);
    new state = (1-z)*h + z*candidate."""
    h = ag.as_tensor(h)
    x = ag.as_tensor(x)
    if h.shape != (params.hidden_size,):
        raise ShapeError(f"hidden state must have length {params.hidden_size}")
    if x.shape != (params.input_size,):
        raise ShapeError(f"input must have length {params.input_size}")
    z = ag.sigmoid(ag.matvec(params.W_z, x) + ag.matvec(params.U_z, h) + params.b_z)
    r = ag.sigmoid(ag.matvec(params.W_r, x) + ag.matvec(params.U_r, h) + params.b_r)
    cand = ag.tanh(ag.matvec(params.W_h, x) + ag.matvec(params.U_h, ag.mul(r, h)) + params.b_h)
    return ag.add(ag.mul(ag.sub(1.0, z), h), ag.mul(z, cand))


def gru_forward(params: GruParams, h0: Tensor, xs: Sequence[Tensor],
                reverse: bool = False) -> Tuple[List[Tensor], Tensor]:
    """Fold gru_step over xs; reverse folds right-to-left. States come back
    in iteration order, so states[k] is the state after k+1 consumed inputs."""
    h = ag.as_tensor(h0)
    order = reversed(xs) if reverse else xs
    states: List[Tensor] = []
    for x in order:
        h = gru_step(params, h, x)
        states.append(h)
    return states, h


def bigru_forward(fwd_params: GruParams, bwd_params: GruParams,
                  xs: Sequence[Tensor]) -> List[Tensor]:
    """Per-position concat of the forward state and the backward state."""
    if not xs:
        raise InputError("bidirectional GRU needs a non-empty sequence")
    h0f = Tensor(np.zeros(fwd_params.hidden_size))
    h0b = Tensor(np.zeros(bwd_params.hidden_size))
    fwd_states, _ = gru_forward(fwd_params, h0f, xs)
    bwd_states, _ = gru_forward(bwd_params, h0b, xs, reverse=True)
    n = len(xs)
    return [ag.concat([fwd_states[t], bwd_states[n - 1 - t]]) for t in range(n)]


ACTIVATIONS = ("none", "relu", "tanh", "sigmoid", "softmax")


def dense(w: Tensor, b: Tensor, x: Tensor, activation: str = "none") -> Tensor:
    if activation not in ACTIVATIONS:
        raise ConfigError(f"unknown activation {activation!r}")
    y = ag.add(ag.matvec(w, x), b)
    if activation == "relu":
        return ag.relu(y)
    if activation == "tanh":
        return ag.tanh(y)
    if activation == "sigmoid":
        return ag.sigmoid(y)
    if activation == "softmax":
        return ag.softmax(y)
    return y


def softmax_cross_entropy(logits, target: int) -> Tuple[Tensor, np.ndarray]:
    """Loss tensor plus the analytic logit gradient softmax(logits)-onehot."""
    t = ag.as_tensor(logits)
    k = t.data.shape[0]
    if t.ndim != 1:
        raise ShapeError("logits must be a vector")
    if not 0 <= target < k:
        raise InputError(f"target {target} out of range for {k} classes")
    shifted = t.data - t.data.max()
    e = np.exp(shifted)
    probs = e / e.sum()
    loss_val = -(shifted[target] - math.log(e.sum()))
    grad = probs.copy()
    grad[target] -= 1.0

    def backward(g):
        if t._needs:
            t.grad += g * grad

    loss = ag._node(np.asarray(loss_val), (t,), backward)
    return loss, grad


def binary_cross_entropy(probs, targets) -> Tuple[Tensor, np.ndarray]:
    """Mean BCE over the vector; probabilities clamped to [1e-7, 1-1e-7]."""
    p = ag.as_tensor(probs)
    t = np.asarray(targets, dtype=np.float64)
    if p.ndim != 1 or p.data.shape != t.shape:
        raise ShapeError(f"probs {p.data.shape} vs targets {t.shape}")
    k = p.data.shape[0]
    clamped = np.clip(p.data, 1e-7, 1.0 - 1e-7)
    loss_val = -np.mean(t * np.log(clamped) + (1.0 - t) * np.log(1.0 - clamped))
    grad = (clamped - t) / (clamped * (1.0 - clamped) * k)
    # where the clamp is active the loss is locally constant in p
    grad[(p.data < 1e-7) | (p.data > 1.0 - 1e-7)] = 0.0

    def backward(g):
        if p._needs:
            p.grad += g * grad

    loss = ag._node(np.asarray(loss_val), (p,), backward)
    return loss, grad


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    adam_epsilon: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    epoch_decay: float = 0.95
    epochs: int = 1

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not 0 < self.epoch_decay <= 1:
            raise ConfigError("epoch_decay must lie in (0, 1]")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ConfigError("betas must lie in [0, 1)")
        if self.epochs < 0:
            raise ConfigError("epochs must be non-negative")


@dataclass
class AdamState:
    step: int
    m: List[np.ndarray]
    v: List[np.ndarray]

    @staticmethod
    def for_params(params: Sequence[Tensor]) -> "AdamState":
        return AdamState(step=0,
                         m=[np.zeros_like(p.data) for p in params],
                         v=[np.zeros_like(p.data) for p in params])


def adam_update(state: AdamState, params: Sequence[Tensor],
                grads: Sequence[np.ndarray], lr: float, config: TrainConfig) -> AdamState:
    """One Adam step with bias correction; parameter data updated in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeError("params, grads and state sizes differ")
    b1, b2, eps = config.adam_beta1, config.adam_beta2, config.adam_epsilon
    state.step += 1
    t = state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.data.shape != g.shape:
            raise ShapeError("gradient shape mismatch")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return state


def epoch_lr(base_lr: float, epoch: int, decay: float) -> float:
    if epoch < 0:
        raise InputError("epoch must be non-negative")
    return base_lr * decay ** epoch


def zero_grads(params: Iterable[Tensor]) -> None:
    for p in params:
        p.zero_grad()


def gradient_check(loss_fn: Callable[[Sequence[Tensor]], Tensor],
                   params: Sequence[Tensor], epsilon_fd: float = 1e-5) -> float:
    """Max relative error between reverse-mode and central finite differences."""
    zero_grads(params)
    loss = loss_fn(params)
    if not np.isfinite(loss.data):
        raise NumericError("loss is not finite")
    ag.backward(loss)
    analytic = [p.grad.copy() for p in params]
    worst = 0.0
    with ag.no_grad():
        for p, a in zip(params, analytic):
            flat = p.data.reshape(-1)
            aflat = a.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + epsilon_fd
                up = float(loss_fn(params).data)
                flat[i] = orig - epsilon_fd
                down = float(loss_fn(params).data)
                flat[i] = orig
                if not (math.isfinite(up) and math.isfinite(down)):
                    raise NumericError("finite-difference probe left the finite domain")
                numeric = (up - down) / (2.0 * epsilon_fd)
                err = abs(aflat[i] - numeric) / max(abs(aflat[i]), abs(numeric), 1e-8)
                worst = max(worst, err)
    return worst
