"""Preference-based training of style costs.

The choice model: the probability a labeler picks a trajectory decreases
exponentially with its style cost, giving a logistic preference probability
and a cross-entropy loss per labeled pair. Training is full-batch over all
labels collected so far: plain gradient descent for the linear featurized
cost (on separable preference data it converges toward the max-margin
direction, whereas Adam's per-coordinate normalization equalizes weight
magnitudes and distorts the learned trade-offs), and Adam for the network
cost. Network training additionally replays each labeled pair under random
base rotations; the hand-designed features are rotation-invariant, so this
augmentation is a no-op for featurized training, but it stops the network
from memorizing particular start/goal placements.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from ._kernels import feature_batch, mlp_inputs_batch
from .costs import FeaturizedCost, MlpCost, StyleCost, style_cost_value
from .kinematics import ArmModel
from .trajectory import Trajectory, rotate_trajectory

DEFAULT_EPOCHS_FEATURIZED = 200
DEFAULT_EPOCHS_MLP = 500
DEFAULT_LR_FEATURIZED = 0.5
DEFAULT_LR_MLP = 1e-3


@dataclass(frozen=True)
class PreferencePair:
    """Two same-shape trajectories plus (eventually) a choice of A or B."""

    x_a: Trajectory
    x_b: Trajectory
    pair_id: str
    label: str | None = None
    origin: str = "query"

    def __post_init__(self):
        if self.x_a.waypoints.shape != self.x_b.waypoints.shape:
            raise ValueError("paired trajectories must have the same D and T")
        if self.label not in (None, "A", "B"):
            raise ValueError(f"label must be A, B or None, got {self.label!r}")
        if self.origin not in ("query", "augmented"):
            raise ValueError(f"unknown origin {self.origin!r}")

    def with_label(self, choice: str) -> "PreferencePair":
        if self.label is not None:
            raise ValueError(f"pair {self.pair_id} is already labeled")
        if choice not in ("A", "B"):
            raise ValueError(f"label must be A or B, got {choice!r}")
        return replace(self, label=choice)

    def chosen(self) -> Trajectory:
        if self.label is None:
            raise ValueError(f"pair {self.pair_id} is unlabeled")
        return self.x_a if self.label == "A" else self.x_b

    def other(self) -> Trajectory:
        if self.label is None:
            raise ValueError(f"pair {self.pair_id} is unlabeled")
        return self.x_b if self.label == "A" else self.x_a

    def to_json(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "label": self.label,
            "origin": self.origin,
            "a": self.x_a.to_json(),
            "b": self.x_b.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PreferencePair":
        return cls(
            x_a=Trajectory.from_json(data["a"]),
            x_b=Trajectory.from_json(data["b"]),
            pair_id=data["pair_id"],
            label=data.get("label"),
            origin=data.get("origin", "query"),
        )


@dataclass(frozen=True)
class TrainerSettings:
    learning_rate: float | None = None  # None -> 0.5 featurized / 1e-3 mlp
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    epochs_per_round: int | None = None  # None -> 200 featurized / 500 mlp
    augmentation_factor: int = 8  # rotations per labeled pair, network training only
    rng_seed: int = 0

    def __post_init__(self):
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.adam_eps > 0):
            raise ValueError("invalid Adam parameters")
        if self.epochs_per_round is not None and self.epochs_per_round < 1:
            raise ValueError("epochs_per_round must be >= 1")
        if self.augmentation_factor < 0:
            raise ValueError("augmentation_factor must be >= 0")

    def epochs_for(self, cost: StyleCost) -> int:
        if self.epochs_per_round is not None:
            return self.epochs_per_round
        return DEFAULT_EPOCHS_MLP if isinstance(cost, MlpCost) else DEFAULT_EPOCHS_FEATURIZED

    def lr_for(self, cost: StyleCost) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return DEFAULT_LR_MLP if isinstance(cost, MlpCost) else DEFAULT_LR_FEATURIZED

    def to_json(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "adam_eps": self.adam_eps,
            "epochs_per_round": self.epochs_per_round,
            "augmentation_factor": self.augmentation_factor,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TrainerSettings":
        return cls(**data)


@dataclass(frozen=True)
class TrainingReport:
    epochs: int
    initial_loss: float
    final_loss: float
    pairs_used: int
    augmented_pairs: int

    def to_json(self) -> dict:
        return {
            "epochs": self.epochs,
            "initial_loss": self.initial_loss,
            "final_loss": self.final_loss,
            "pairs_used": self.pairs_used,
            "augmented_pairs": self.augmented_pairs,
        }


def preference_probability(cost: StyleCost, arm: ArmModel, x_a: Trajectory, x_b: Trajectory) -> float:
    """Probability the labeler prefers x_a, logistic in the cost difference."""
    c_a = style_cost_value(cost, arm, x_a)
    c_b = style_cost_value(cost, arm, x_b)
    if not (np.isfinite(c_a) and np.isfinite(c_b)):
        raise ValueError(f"non-finite style costs ({c_a}, {c_b})")
    return float(expit(c_b - c_a))


def pair_loss(cost: StyleCost, arm: ArmModel, pair: PreferencePair) -> float:
    """Cross-entropy of the observed choice: -log P(chosen side)."""
    c_chosen = style_cost_value(cost, arm, pair.chosen())
    c_other = style_cost_value(cost, arm, pair.other())
    if not (np.isfinite(c_chosen) and np.isfinite(c_other)):
        raise ValueError("non-finite style costs")
    return float(np.logaddexp(0.0, c_chosen - c_other))


def augment_rotations(pair: PreferencePair, k: int, rng: np.random.Generator) -> list[PreferencePair]:
    """k copies of a labeled pair with both sides rotated by a shared random angle."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if pair.label is None:
        raise ValueError("can only augment labeled pairs")
    out = []
    for i in range(k):
        theta = float(-rng.uniform(-np.pi, np.pi))  # (-pi, pi]
        out.append(
            replace(
                pair,
                x_a=rotate_trajectory(pair.x_a, theta),
                x_b=rotate_trajectory(pair.x_b, theta),
                pair_id=f"{pair.pair_id}+rot{i}",
                origin="augmented",
            )
        )
    return out


class _Adam:
    """Plain Adam over a list of parameter arrays."""

    def __init__(self, params, lr: float, settings: TrainerSettings):
        self.lr = lr
        self.b1 = settings.beta1
        self.b2 = settings.beta2
        self.eps = settings.adam_eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.b1 * self.m[i] + (1.0 - self.b1) * g
            self.v[i] = self.b2 * self.v[i] + (1.0 - self.b2) * g * g
            mhat = self.m[i] / (1.0 - self.b1 ** self.t)
            vhat = self.v[i] / (1.0 - self.b2 ** self.t)
            out.append(p - self.lr * mhat / (np.sqrt(vhat) + self.eps))
        return out


def pair_feature_deltas(cost: FeaturizedCost, arm: ArmModel, pairs) -> np.ndarray:
    """Per-pair feature difference phi(chosen) - phi(other), shape (P, len(w))."""
    stack = np.stack([t.waypoints for p in pairs for t in (p.chosen(), p.other())])
    cost.check_trajectory_length(stack.shape[1])
    ee, fv = feature_batch(arm.lengths, arm.base_height, stack)
    phi = np.concatenate([ee, fv], axis=1) if cost.uses_velocity else ee
    return phi[0::2] - phi[1::2]


def featurized_loss_and_grad(w: np.ndarray, deltas: np.ndarray):
    """Mean cross-entropy loss over pairs and its exact gradient in w.

    With s = deltas @ w (cost margin of the chosen side), the loss is
    mean(softplus(s)) and the gradient mean(sigmoid(s) * delta).
    """
    s = deltas @ w
    loss = float(np.mean(np.logaddexp(0.0, s)))
    grad = deltas.T @ expit(s) / deltas.shape[0]
    return loss, grad


def _check_pairs(pairs):
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one labeled pair")
    for p in pairs:
        if p.label is None:
            raise ValueError(f"pair {p.pair_id} is unlabeled")
    shapes = {p.x_a.waypoints.shape for p in pairs}
    if len(shapes) != 1:
        raise ValueError(f"pairs mix trajectory shapes: {sorted(shapes)}")
    return pairs


def _update_featurized(cost, arm, pairs, settings):
    deltas = pair_feature_deltas(cost, arm, pairs)
    epochs = settings.epochs_for(cost)
    lr = settings.lr_for(cost)
    w = cost.w.copy()
    initial_loss, _ = featurized_loss_and_grad(w, deltas)
    for _ in range(epochs):
        loss, grad = featurized_loss_and_grad(w, deltas)
        if not np.isfinite(loss):
            raise RuntimeError(f"training diverged: loss={loss}, |w|={np.linalg.norm(w)}")
        w = w - lr * grad
    final_loss, _ = featurized_loss_and_grad(w, deltas)
    new_cost = FeaturizedCost(style_name=cost.style_name, w=w, uses_velocity=cost.uses_velocity)
    report = TrainingReport(
        epochs=epochs,
        initial_loss=initial_loss,
        final_loss=final_loss,
        pairs_used=len(pairs),
        augmented_pairs=0,
    )
    return new_cost, report


def mlp_pair_batch(cost: MlpCost, arm: ArmModel, pairs):
    """Stacked per-step inputs plus chosen/other trajectory indices.

    Returns (U (N*S, m), steps_per_traj, chosen_idx, other_idx) where
    trajectory 2p is side A of pair p and 2p+1 side B.
    """
    stack = np.stack([t.waypoints for p in pairs for t in (p.x_a, p.x_b)])
    u = mlp_inputs_batch(arm.lengths, arm.base_height, stack)
    n_traj, steps, m = u.shape
    if m != cost.input_dim:
        raise ValueError("trajectory encoding width does not match network input")
    chosen = np.array([2 * i + (0 if p.label == "A" else 1) for i, p in enumerate(pairs)])
    other = np.array([2 * i + (1 if p.label == "A" else 0) for i, p in enumerate(pairs)])
    return u.reshape(n_traj * steps, m), steps, chosen, other


def mlp_loss_and_param_grads(params, u, steps, chosen, other, masks=None):
    """Mean pair loss and its gradient w.r.t. all six parameter arrays.

    masks, when given, are the two dropout masks (already scaled by 1/keep)
    applied after the hidden layers.
    """
    w1, b1, w2, b2, w3, b3 = params
    n_pairs = chosen.shape[0]
    z1 = u @ w1 + b1
    t1 = np.tanh(z1)
    h1 = t1 * masks[0] if masks is not None else t1
    z2 = h1 @ w2 + b2
    t2 = np.tanh(z2)
    h2 = t2 * masks[1] if masks is not None else t2
    y = h2 @ w3 + b3
    c_traj = np.einsum("nk,nk->n", y, y).reshape(-1, steps).sum(axis=1)
    s = c_traj[chosen] - c_traj[other]
    loss = float(np.mean(np.logaddexp(0.0, s)))
    sig = expit(s) / n_pairs
    g_traj = np.zeros_like(c_traj)
    g_traj[chosen] = sig
    g_traj[other] = -sig
    dy = (2.0 * y) * np.repeat(g_traj, steps)[:, None]
    gw3 = h2.T @ dy
    gb3 = dy.sum(axis=0)
    dh2 = dy @ w3.T
    if masks is not None:
        dh2 = dh2 * masks[1]
    dz2 = dh2 * (1.0 - t2 * t2)
    gw2 = h1.T @ dz2
    gb2 = dz2.sum(axis=0)
    dh1 = dz2 @ w2.T
    if masks is not None:
        dh1 = dh1 * masks[0]
    dz1 = dh1 * (1.0 - t1 * t1)
    gw1 = u.T @ dz1
    gb1 = dz1.sum(axis=0)
    return loss, [gw1, gb1, gw2, gb2, gw3, gb3]


def mlp_cost_param_grads(cost: MlpCost, arm: ArmModel, x: Trajectory):
    """Network cost of one trajectory and its gradient w.r.t. all parameters."""
    w1, b1, w2, b2, w3, b3 = cost.weights
    u = mlp_inputs_batch(arm.lengths, arm.base_height, x.waypoints[None, :, :])
    u = u.reshape(-1, u.shape[2])
    t1 = np.tanh(u @ w1 + b1)
    t2 = np.tanh(t1 @ w2 + b2)
    y = t2 @ w3 + b3
    value = float(np.sum(y * y))
    dy = 2.0 * y
    gw3 = t2.T @ dy
    gb3 = dy.sum(axis=0)
    dz2 = (dy @ w3.T) * (1.0 - t2 * t2)
    gw2 = t1.T @ dz2
    gb2 = dz2.sum(axis=0)
    dz1 = (dz2 @ w2.T) * (1.0 - t1 * t1)
    gw1 = u.T @ dz1
    gb1 = dz1.sum(axis=0)
    return value, [gw1, gb1, gw2, gb2, gw3, gb3]


def _update_mlp(cost, arm, pairs, settings):
    rng = np.random.default_rng(settings.rng_seed)
    train_pairs = list(pairs)
    augmented = 0
    if settings.augmentation_factor > 0:
        for p in pairs:
            extra = augment_rotations(p, settings.augmentation_factor, rng)
            train_pairs.extend(extra)
            augmented += len(extra)
    u, steps, chosen, other = mlp_pair_batch(cost, arm, train_pairs)
    epochs = settings.epochs_for(cost)
    params = [a.copy() for a in cost.weights]
    initial_loss, _ = mlp_loss_and_param_grads(params, u, steps, chosen, other)
    # epochs run in single precision: the dominant cost is memory traffic
    # through layer activations, and parameter snapshots stay float64
    u32 = u.astype(np.float32)
    params32 = [p.astype(np.float32) for p in params]
    adam = _Adam(params32, settings.lr_for(cost), settings)
    keep = 1.0 - cost.dropout_rate
    n_rows, n_h1 = u.shape[0], params[0].shape[1]
    n_h2 = params[2].shape[1]
    inv_keep = np.float32(1.0 / keep)
    for _ in range(epochs):
        masks = None
        if cost.dropout_rate > 0.0:
            draw = rng.random((n_rows, n_h1 + n_h2), dtype=np.float32)
            m = (draw < keep).astype(np.float32)
            m *= inv_keep
            masks = (m[:, :n_h1], m[:, n_h1:])
        loss, grads = mlp_loss_and_param_grads(params32, u32, steps, chosen, other, masks)
        if not np.isfinite(loss):
            raise RuntimeError(f"training diverged: loss={loss}")
        params32 = adam.step(params32, grads)
    params = [p.astype(np.float64) for p in params32]
    final_loss, _ = mlp_loss_and_param_grads(params, u, steps, chosen, other)
    report = TrainingReport(
        epochs=epochs,
        initial_loss=initial_loss,
        final_loss=final_loss,
        pairs_used=len(pairs),
        augmented_pairs=augmented,
    )
    return cost.with_weights(params), report


def update_weights(cost: StyleCost, arm: ArmModel, labeled_pairs, settings: TrainerSettings):
    """Full-batch Adam on the mean pair loss; returns a new parameter snapshot.

    Deterministic given settings.rng_seed (augmentation angles and dropout
    masks come from one generator seeded with it).
    """
    pairs = _check_pairs(labeled_pairs)
    if isinstance(cost, FeaturizedCost):
        return _update_featurized(cost, arm, pairs, settings)
    if isinstance(cost, MlpCost):
        return _update_mlp(cost, arm, pairs, settings)
    raise TypeError(f"unknown cost type {type(cost).__name__}")
