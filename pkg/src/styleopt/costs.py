"""Style cost functions over trajectories.

Two families: a linear cost over hand-designed end-effector/velocity
features, and a small multilayer perceptron scoring each trajectory step
from the raw waypoint plus forward-kinematics information. Both plug into
the composite planning objective style + lambda * smoothness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ._kernels import feature_batch, mlp_cost_batch, mlp_inputs_batch, ssd_batch, wrap_angle
from .kinematics import ArmModel, _readonly
from .trajectory import Trajectory

HIDDEN1 = 42
HIDDEN2 = 21
OUTPUT = 21

EE_FEATURE_NAMES = ("radius", "height", "orientation")


@dataclass(frozen=True)
class FeatureVector:
    """Mean EE radius/height/angle-to-vertical plus per-segment distances."""

    f_r: float
    f_h: float
    f_o: float
    f_v: np.ndarray

    def __post_init__(self):
        if self.f_r < 0 or not (0.0 <= self.f_o <= np.pi + 1e-12):
            raise ValueError("invalid feature ranges")
        fv = np.asarray(self.f_v, dtype=np.float64)
        if np.any(fv < 0):
            raise ValueError("segment distances must be >= 0")
        object.__setattr__(self, "f_v", _readonly(fv))

    def as_array(self, uses_velocity: bool) -> np.ndarray:
        ee = np.array([self.f_r, self.f_h, self.f_o])
        return np.concatenate([ee, self.f_v]) if uses_velocity else ee


def extract_features(arm: ArmModel, x: Trajectory) -> FeatureVector:
    """Style features of one trajectory."""
    if x.dof != arm.dof:
        raise ValueError(f"trajectory dof {x.dof} does not match arm dof {arm.dof}")
    ee, fv = feature_batch(arm.lengths, arm.base_height, x.waypoints[None, :, :])
    return FeatureVector(f_r=float(ee[0, 0]), f_h=float(ee[0, 1]), f_o=float(ee[0, 2]), f_v=fv[0])


@dataclass(frozen=True, eq=False)
class FeaturizedCost:
    """Weighted linear combination of the hand-designed features.

    w has 3 entries (radius, height, orientation) or, with uses_velocity,
    3 + (T-1) entries where the tail weighs the per-segment distances of
    T-waypoint trajectories.
    """

    style_name: str
    w: np.ndarray
    uses_velocity: bool = False

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1 or not np.all(np.isfinite(w)):
            raise ValueError("w must be a finite vector")
        if not self.uses_velocity and w.shape[0] != 3:
            raise ValueError("w must have exactly 3 entries without velocity features")
        if self.uses_velocity and w.shape[0] < 4:
            raise ValueError("velocity form needs 3 + (T-1) >= 4 weights")
        object.__setattr__(self, "w", _readonly(w))

    def num_segments(self) -> int:
        return self.w.shape[0] - 3

    def check_trajectory_length(self, num_waypoints: int):
        if self.uses_velocity and self.num_segments() != num_waypoints - 1:
            raise ValueError(
                f"velocity weights expect {self.num_segments() + 1} waypoints, "
                f"got {num_waypoints}"
            )

    def batch_cost(self, arm: ArmModel, x: np.ndarray) -> np.ndarray:
        self.check_trajectory_length(x.shape[1])
        ee, fv = feature_batch(arm.lengths, arm.base_height, x)
        c = ee @ self.w[:3]
        if self.uses_velocity:
            c = c + fv @ self.w[3:]
        return c

    def to_json(self) -> dict:
        return {
            "type": "featurized",
            "style": self.style_name,
            "uses_velocity": self.uses_velocity,
            "w": self.w.tolist(),
        }


@dataclass(frozen=True, eq=False)
class MlpCost:
    """Per-step network cost: two tanh hidden layers (42 and 21 units) and a
    21-unit linear output; the trajectory cost is the sum of squared outputs.

    Inputs per step are the waypoint, its predecessor, the end-effector
    position and pointing direction, and the normalized step number.
    Dropout applies after both hidden layers, in training mode only.
    """

    style_name: str
    weights: tuple  # (W1, b1, W2, b2, W3, b3)
    dropout_rate: float = 0.1

    def __post_init__(self):
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ValueError("dropout_rate must be in [0, 1)")
        w1, b1, w2, b2, w3, b3 = (np.asarray(a, dtype=np.float64) for a in self.weights)
        if w1.ndim != 2 or w1.shape[1] != HIDDEN1:
            raise ValueError(f"first hidden layer must have {HIDDEN1} units")
        if w2.shape != (HIDDEN1, HIDDEN2) or w3.shape != (HIDDEN2, OUTPUT):
            raise ValueError(f"hidden/output widths must be {HIDDEN1}/{HIDDEN2}/{OUTPUT}")
        if b1.shape != (HIDDEN1,) or b2.shape != (HIDDEN2,) or b3.shape != (OUTPUT,):
            raise ValueError("bias shape mismatch")
        for a in (w1, b1, w2, b2, w3, b3):
            if not np.all(np.isfinite(a)):
                raise ValueError("network parameters must be finite")
        object.__setattr__(self, "weights", tuple(_readonly(a) for a in (w1, b1, w2, b2, w3, b3)))

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    def num_parameters(self) -> int:
        return sum(a.size for a in self.weights)

    def with_weights(self, weights) -> "MlpCost":
        return MlpCost(style_name=self.style_name, weights=tuple(weights), dropout_rate=self.dropout_rate)

    def batch_cost(self, arm: ArmModel, x: np.ndarray) -> np.ndarray:
        if input_width(x.shape[2]) != self.input_dim:
            raise ValueError(
                f"network expects input width {self.input_dim}, "
                f"trajectories encode to {input_width(x.shape[2])}"
            )
        return mlp_cost_batch(arm.lengths, arm.base_height, x, *self.weights)

    def to_json(self) -> dict:
        w1, b1, w2, b2, w3, b3 = self.weights
        return {
            "type": "mlp",
            "style": self.style_name,
            "dropout": self.dropout_rate,
            "encoding": "raw+fk+t",
            "layers": [
                {"W": w1.tolist(), "b": b1.tolist()},
                {"W": w2.tolist(), "b": b2.tolist()},
                {"W": w3.tolist(), "b": b3.tolist()},
            ],
        }

    @classmethod
    def initialize(cls, style_name: str, dof: int, rng_seed: int, dropout_rate: float = 0.1) -> "MlpCost":
        """Glorot-uniform weights, zero biases; deterministic given rng_seed."""
        rng = np.random.default_rng(rng_seed)
        sizes = [input_width(dof), HIDDEN1, HIDDEN2, OUTPUT]
        weights = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            a = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-a, a, size=(fan_in, fan_out)))
            weights.append(np.zeros(fan_out))
        return cls(style_name=style_name, weights=tuple(weights), dropout_rate=dropout_rate)


StyleCost = Union[FeaturizedCost, MlpCost]


def input_width(dof: int) -> int:
    """Network input width for a D-joint arm: 2D + 7."""
    return 2 * dof + 7


def featurized_cost(cost: FeaturizedCost, phi: FeatureVector) -> float:
    """Linear style cost w . phi."""
    v = phi.as_array(cost.uses_velocity)
    if v.shape != cost.w.shape:
        raise ValueError(f"weight/feature length mismatch: {cost.w.shape[0]} vs {v.shape[0]}")
    return float(cost.w @ v)


def mlp_forward(cost: MlpCost, arm: ArmModel, x: Trajectory, training: bool = False, rng=None):
    """Network cost of one trajectory plus the per-step output vectors.

    With training=True, dropout masks (drawn from rng) are applied after
    both hidden layers; evaluation mode is deterministic.
    """
    if input_width(arm.dof) != cost.input_dim:
        raise ValueError("trajectory encoding width does not match network input")
    w1, b1, w2, b2, w3, b3 = cost.weights
    u = mlp_inputs_batch(arm.lengths, arm.base_height, x.waypoints[None, :, :])[0]
    h1 = np.tanh(u @ w1 + b1)
    if training:
        if rng is None:
            raise ValueError("training mode needs an rng for dropout")
        keep = 1.0 - cost.dropout_rate
        h1 = h1 * (rng.random(h1.shape) < keep) / keep
    h2 = np.tanh(h1 @ w2 + b2)
    if training:
        keep = 1.0 - cost.dropout_rate
        h2 = h2 * (rng.random(h2.shape) < keep) / keep
    y = h2 @ w3 + b3
    return float(np.sum(y * y)), y


def style_cost_value(cost: StyleCost | None, arm: ArmModel, x: Trajectory) -> float:
    """Value of a style cost on one trajectory (0 when cost is None)."""
    if cost is None:
        return 0.0
    return float(style_cost_batch(cost, arm, x.waypoints[None, :, :])[0])


def style_cost_batch(cost: StyleCost | None, arm: ArmModel, x: np.ndarray) -> np.ndarray:
    """Vector of style-cost values over a (B, T, D) stack of trajectories."""
    if cost is None:
        return np.zeros(x.shape[0])
    return cost.batch_cost(arm, x)


@dataclass(frozen=True)
class ObjectiveConfig:
    """Planning objective: style term plus lam * smoothness term."""

    style_cost: StyleCost | None = None
    lam: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError("lambda must be finite and >= 0")


def total_objective(cfg: ObjectiveConfig, arm: ArmModel, x: Trajectory) -> float:
    """Composite planning objective on one trajectory."""
    return float(total_objective_batch(cfg, arm, x.waypoints[None, :, :])[0])


def total_objective_batch(cfg: ObjectiveConfig, arm: ArmModel, x: np.ndarray) -> np.ndarray:
    total = style_cost_batch(cfg.style_cost, arm, x)
    if cfg.lam != 0.0:
        total = total + cfg.lam * ssd_batch(x)
    return total


def featurized_trajectory_gradient(cost: FeaturizedCost, arm: ArmModel, x: Trajectory) -> np.ndarray:
    """Exact gradient of the featurized cost w.r.t. every waypoint entry.

    Uses closed-form chain rules through the arm kinematics. The radius and
    orientation terms carry sign factors with kinks (radial distance 0,
    pointing exactly vertical); a zero subgradient is used on the kink.
    Returns (T, D) including the endpoint rows.
    """
    cost.check_trajectory_length(x.num_waypoints)
    w = cost.w
    q = x.waypoints
    t, d = q.shape
    lengths = arm.lengths
    psi = np.cumsum(q[:, 1:], axis=1)
    s = np.sin(psi)
    c = np.cos(psi)
    lc = c * lengths
    ls = s * lengths
    # suffix sums over links i >= j for pitch joint j (0-based among pitch joints)
    suffix_c = np.cumsum(lc[:, ::-1], axis=1)[:, ::-1]
    suffix_s = np.cumsum(ls[:, ::-1], axis=1)[:, ::-1]
    radial = s @ lengths
    g = np.zeros((t, d))
    g[:, 1:] += (w[0] / t) * np.sign(radial)[:, None] * suffix_c
    g[:, 1:] -= (w[1] / t) * suffix_s
    g[:, 1:] += (w[2] / t) * np.sign(s[:, -1])[:, None]
    if cost.uses_velocity:
        seg = wrap_angle(q[1:] - q[:-1])
        norms = np.linalg.norm(seg, axis=1)
        unit = np.divide(seg, norms[:, None], out=np.zeros_like(seg), where=norms[:, None] > 0)
        weighted = w[3:, None] * unit
        g[1:] += weighted
        g[:-1] -= weighted
    return g


def cost_to_json(cost: StyleCost) -> dict:
    return cost.to_json()


def cost_from_json(data: dict) -> StyleCost:
    kind = data.get("type")
    if kind == "featurized":
        return FeaturizedCost(
            style_name=data["style"],
            w=np.asarray(data["w"], dtype=np.float64),
            uses_velocity=bool(data["uses_velocity"]),
        )
    if kind == "mlp":
        layers = data["layers"]
        if len(layers) != 3:
            raise ValueError("mlp cost must have exactly 3 layers")
        weights = []
        for layer in layers:
            weights.append(np.asarray(layer["W"], dtype=np.float64))
            weights.append(np.asarray(layer["b"], dtype=np.float64))
        return MlpCost(
            style_name=data["style"],
            weights=tuple(weights),
            dropout_rate=float(data.get("dropout", 0.1)),
        )
    raise ValueError(f"unknown cost type {kind!r}")
