"""From-scratch MLP that regresses system time onto flattened problem data.

Architecture 1 -> 256 -> 256 -> 20, ReLU hidden layers, identity output.
Training is full-batch squared-error gradient descent with Adam updates;
snapshots are taken at a fixed checkpoint schedule so partially trained
predictors can drive the online controller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .noise import PredictedData
from .seeding import substream
from .system import (
    GroundTruth,
    SystemSpec,
    flatten_stage,
    unflatten_stage,
)

DEFAULT_SIZES = (1, 256, 256, 20)
DEFAULT_CHECKPOINTS = (10, 20, 50, 100, 200, 500, 1000, 2000, 5000,
                       10000, 20000, 30000, 40000, 50000)


class NonFiniteLoss(Exception):
    """Training loss became NaN/inf at the given step."""

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite training loss at step {step}")


@dataclass(frozen=True)
class Mlp:
    """Weights (fan_in, fan_out) and biases per layer."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple([self.weights[0].shape[0]] +
                     [W.shape[1] for W in self.weights])

    def copy(self) -> "Mlp":
        return Mlp(weights=tuple(W.copy() for W in self.weights),
                   biases=tuple(b.copy() for b in self.biases))


@dataclass(frozen=True)
class TrainConfig:
    total_steps: int = 50000
    checkpoint_steps: tuple[int, ...] = DEFAULT_CHECKPOINTS
    learning_rate: float = 1e-3
    init_seed: int = 0

    def __post_init__(self):
        steps = tuple(self.checkpoint_steps)
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError("checkpoint_steps must be strictly increasing")
        if not steps or steps[-1] != self.total_steps:
            raise ValueError("last checkpoint must equal total_steps")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        object.__setattr__(self, "checkpoint_steps", steps)


@dataclass(frozen=True)
class Checkpoint:
    step: int
    model: Mlp
    mean_error: float


def init_mlp(init_seed: int, sizes=DEFAULT_SIZES) -> Mlp:
    """Uniform fan-in-scaled init, U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    rng = substream(init_seed, "nn-init")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        bound = 1.0 / math.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return Mlp(weights=tuple(weights), biases=tuple(biases))


def forward_batch(m: Mlp, X: np.ndarray) -> np.ndarray:
    """Forward pass on an (N, in_dim) batch."""
    h = np.asarray(X, dtype=float)
    last = len(m.weights) - 1
    for i, (W, b) in enumerate(zip(m.weights, m.biases)):
        h = h @ W + b
        if i < last:
            h = np.maximum(h, 0.0)
    return h


def forward(m: Mlp, t_tilde: float) -> np.ndarray:
    """Predicted flattened problem data for one system time."""
    return forward_batch(m, np.array([[float(t_tilde)]]))[0]


def mse_loss(m: Mlp, X: np.ndarray, Y: np.ndarray) -> float:
    out = forward_batch(m, X)
    return float(np.mean((out - Y) ** 2))


def loss_and_grads(m: Mlp, X: np.ndarray, Y: np.ndarray):
    """Squared-error loss (mean over all entries) and its exact gradients."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n_layers = len(m.weights)

    # Forward, keeping layer activations for backprop.  A hidden output is
    # positive exactly where its pre-activation was, so it doubles as the
    # ReLU mask.
    acts = [X]
    h = X
    for i in range(n_layers):
        z = h @ m.weights[i]
        z += m.biases[i]
        if i < n_layers - 1:
            np.maximum(z, 0.0, out=z)
        h = z
        acts.append(h)

    resid = acts[-1]
    resid -= Y
    loss = float(np.vdot(resid, resid)) / resid.size

    resid *= 2.0 / resid.size
    delta = resid
    grads_W = [None] * n_layers
    grads_b = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        grads_W[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            back = delta @ m.weights[i].T
            np.multiply(back, acts[i] > 0.0, out=back)
            delta = back
    return loss, grads_W, grads_b


def mean_prediction_error(m: Mlp, truth: GroundTruth) -> float:
    """Mean over stages of the Euclidean norm of the prediction residual."""
    X, Y = training_data(truth)
    out = forward_batch(m, X)
    return float(np.mean(np.linalg.norm(out - Y, axis=1)))


def training_data(truth: GroundTruth) -> tuple[np.ndarray, np.ndarray]:
    """Inputs t*dt (raw, unnormalized) and flattened stage targets."""
    X = (np.arange(truth.T, dtype=float) * truth.dt)[:, None]
    Y = np.stack([flatten_stage(s) for s in truth.stages])
    return X, Y


def train(truth: GroundTruth, cfg: TrainConfig) -> list[Checkpoint]:
    """Full-batch Adam on the episode's (time -> problem data) dataset.

    Returns one snapshot per checkpoint step (deep copies, safe to keep).
    """
    X, Y = training_data(truth)
    init = init_mlp(cfg.init_seed)

    # Working parameters live in one flat vector; the model's layer arrays
    # are views into it, so Adam runs as a handful of in-place vector ops.
    pieces = list(init.weights) + list(init.biases)
    theta = np.concatenate([p.ravel() for p in pieces])
    views, offset = [], 0
    for p in pieces:
        views.append(theta[offset:offset + p.size].reshape(p.shape))
        offset += p.size
    n_layers = len(init.weights)
    m = Mlp(weights=tuple(views[:n_layers]), biases=tuple(views[n_layers:]))

    beta1, beta2, eps = 0.9, 0.999, 1e-8
    mom = np.zeros_like(theta)
    vel = np.zeros_like(theta)
    gflat = np.zeros_like(theta)
    scratch = np.zeros_like(theta)

    checkpoints = []
    pending = list(cfg.checkpoint_steps)
    for step in range(1, cfg.total_steps + 1):
        loss, gW, gb = loss_and_grads(m, X, Y)
        if not math.isfinite(loss):
            raise NonFiniteLoss(step)
        offset = 0
        for g in gW + gb:
            gflat[offset:offset + g.size] = g.ravel()
            offset += g.size

        # Bias correction folded into the step size:
        #   lr * m_hat / (sqrt(v_hat) + eps)
        #     == (lr * sqrt(bc2) / bc1) * mom / (sqrt(vel) + eps * sqrt(bc2))
        bc1 = 1.0 - beta1 ** step
        bc2_sqrt = math.sqrt(1.0 - beta2 ** step)
        mom *= beta1
        np.multiply(gflat, 1.0 - beta1, out=scratch)
        mom += scratch
        vel *= beta2
        np.multiply(gflat, gflat, out=scratch)
        scratch *= 1.0 - beta2
        vel += scratch
        np.sqrt(vel, out=scratch)
        scratch += eps * bc2_sqrt
        np.divide(mom, scratch, out=scratch)
        scratch *= cfg.learning_rate * bc2_sqrt / bc1
        theta -= scratch

        if pending and step == pending[0]:
            pending.pop(0)
            snap = m.copy()
            checkpoints.append(Checkpoint(
                step=step, model=snap,
                mean_error=mean_prediction_error(snap, truth)))
    return checkpoints


def predict_problem_data(m: Mlp, spec: SystemSpec) -> PredictedData:
    """Predicted dataset for a whole episode, terminal pair included.

    The terminal weight reuses the Q block of the prediction at T*dt (the
    terminal cost has the same closed form as the stage weight) and the
    terminal reference its xbar block.
    """
    times = np.arange(spec.T + 1, dtype=float) * spec.dt
    out = forward_batch(m, times[:, None])
    stages = tuple(unflatten_stage(out[t]) for t in range(spec.T))
    tail = unflatten_stage(out[spec.T])
    return PredictedData(
        stages=stages,
        P_terminal=tail.Q,
        xbar_terminal=tail.xbar,
        dt=spec.dt,
        x0=spec.x0.copy(),
        epsilon=float("nan"),
        setting="nn",
        noise_seed=0,
    )


def save_checkpoints(path, checkpoints: list[Checkpoint]) -> None:
    """All snapshots in one .npz; keys are step_{n}_{W|b}{layer}."""
    arrays = {}
    steps = []
    for ck in checkpoints:
        steps.append(ck.step)
        arrays[f"step_{ck.step}_mean_error"] = np.array(ck.mean_error)
        for i, (W, b) in enumerate(zip(ck.model.weights, ck.model.biases)):
            arrays[f"step_{ck.step}_W{i}"] = W
            arrays[f"step_{ck.step}_b{i}"] = b
    arrays["steps"] = np.array(steps, dtype=np.int64)
    arrays["n_layers"] = np.array(len(checkpoints[0].model.weights))
    np.savez(path, **arrays)


def load_checkpoints(path) -> list[Checkpoint]:
    with np.load(path) as data:
        n_layers = int(data["n_layers"])
        checkpoints = []
        for step in data["steps"].tolist():
            weights = tuple(data[f"step_{step}_W{i}"] for i in range(n_layers))
            biases = tuple(data[f"step_{step}_b{i}"] for i in range(n_layers))
            checkpoints.append(Checkpoint(
                step=int(step),
                model=Mlp(weights=weights, biases=biases),
                mean_error=float(data[f"step_{step}_mean_error"]),
            ))
    return checkpoints
