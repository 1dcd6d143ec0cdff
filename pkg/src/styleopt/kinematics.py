"""Serial-arm model and closed-form forward kinematics.

The arm convention is fixed: joint 0 rotates about the world z axis and
joints 1..D-1 pitch about the local y axis of the preceding frame, each
carrying one link, so the linkage lives in a vertical plane that the base
joint spins. The zero configuration stacks the links straight up. Keeping
the base joint on the world z axis makes a rotation of the whole motion
about z expressible as a shift of joint 0 alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._kernels import fk_batch, wrap_angle


def _readonly(a) -> np.ndarray:
    """Defensive copy marked immutable; value types never alias caller arrays."""
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EePose:
    """End-effector position and the unit direction of the last link."""

    position: np.ndarray
    pointing: np.ndarray


@dataclass(frozen=True)
class ArmModel:
    """Kinematic description of a base-yaw plus pitch-chain serial arm.

    dof counts joints: one yaw joint plus dof-1 pitch joints, so
    link_lengths has dof-1 entries (one link per pitch joint).
    joint_limits, when given, holds one (lo, hi) pair per joint.
    """

    dof: int
    link_lengths: tuple[float, ...]
    joint_limits: tuple[tuple[float, float], ...] | None = None
    base_height: float = 0.0

    def __post_init__(self):
        if not isinstance(self.dof, int) or self.dof < 2:
            raise ValueError(f"dof must be an integer >= 2, got {self.dof}")
        lengths = tuple(float(v) for v in self.link_lengths)
        object.__setattr__(self, "link_lengths", lengths)
        if len(lengths) != self.dof - 1:
            raise ValueError(
                f"expected {self.dof - 1} link lengths for dof={self.dof}, "
                f"got {len(lengths)}"
            )
        if not all(np.isfinite(v) and v >= 0.0 for v in lengths):
            raise ValueError("link lengths must be finite and >= 0")
        if sum(lengths) <= 0.0:
            raise ValueError("at least one link length must be positive")
        if not np.isfinite(self.base_height) or self.base_height < 0.0:
            raise ValueError("base_height must be finite and >= 0")
        if self.joint_limits is not None:
            limits = tuple((float(lo), float(hi)) for lo, hi in self.joint_limits)
            object.__setattr__(self, "joint_limits", limits)
            if len(limits) != self.dof:
                raise ValueError("joint_limits must have one (lo, hi) pair per joint")
            for lo, hi in limits:
                if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                    raise ValueError(f"invalid joint limit [{lo}, {hi}]")

    @cached_property
    def lengths(self) -> np.ndarray:
        return _readonly(np.asarray(self.link_lengths, dtype=np.float64))

    @cached_property
    def limits_array(self) -> np.ndarray | None:
        if self.joint_limits is None:
            return None
        return _readonly(np.asarray(self.joint_limits, dtype=np.float64))

    def to_json(self) -> dict:
        return {
            "dof": self.dof,
            "link_lengths": list(self.link_lengths),
            "joint_limits": None
            if self.joint_limits is None
            else [list(p) for p in self.joint_limits],
            "base_height": self.base_height,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ArmModel":
        limits = data.get("joint_limits")
        return cls(
            dof=int(data["dof"]),
            link_lengths=tuple(data["link_lengths"]),
            joint_limits=None if limits is None else tuple((lo, hi) for lo, hi in limits),
            base_height=float(data.get("base_height", 0.0)),
        )


def default_arm() -> ArmModel:
    """Three-joint test arm: base yaw plus two unit-link pitch joints."""
    return ArmModel(dof=3, link_lengths=(1.0, 1.0))


def check_config(arm: ArmModel, q) -> np.ndarray:
    """Validate a joint configuration against the arm; returns it as float64."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (arm.dof,):
        raise ValueError(f"configuration must have shape ({arm.dof},), got {q.shape}")
    if not np.all(np.isfinite(q)):
        raise ValueError("configuration entries must be finite")
    return q


def forward_kinematics(arm: ArmModel, q) -> EePose:
    """End-effector pose for one joint configuration."""
    q = check_config(arm, q)
    pos, point = fk_batch(arm.lengths, arm.base_height, q[None, :])
    return EePose(position=_readonly(pos[0]), pointing=_readonly(point[0]))


def ee_path(arm, trajectory) -> list[EePose]:
    """Forward kinematics of every waypoint, in order."""
    w = trajectory.waypoints
    if w.shape[1] != arm.dof:
        raise ValueError(f"trajectory dof {w.shape[1]} does not match arm dof {arm.dof}")
    pos, point = fk_batch(arm.lengths, arm.base_height, w)
    return [
        EePose(position=_readonly(pos[t].copy()), pointing=_readonly(point[t].copy()))
        for t in range(w.shape[0])
    ]


def rotate_base(q, theta: float) -> np.ndarray:
    """Shift joint 0 by theta (wrapped to (-pi, pi]); other joints unchanged."""
    if not np.isfinite(theta):
        raise ValueError("rotation angle must be finite")
    q = np.asarray(q, dtype=np.float64)
    if not np.all(np.isfinite(q)):
        raise ValueError("configuration entries must be finite")
    out = q.copy()
    out[0] = wrap_angle(q[0] + theta)
    return out
