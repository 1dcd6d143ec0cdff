"""Trajectory values and the operations the query loop builds on.

A trajectory is a (T, D) matrix of joint angles, one waypoint per row.
Besides the smoothness cost and linear initialization this module provides
the smooth random perturbations used to diversify preference queries:
a single-waypoint bump spread over the interior by the inverse of the
discrete-Laplacian smoothing matrix, rescaled so the bump keeps its size.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from ._kernels import ssd_batch, wrap_angle
from .kinematics import _readonly


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Joint-space trajectory, waypoints (T, D) with T >= 2."""

    waypoints: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.waypoints, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError(f"waypoints must be 2-d (T, D), got shape {w.shape}")
        if w.shape[0] < 2:
            raise ValueError("a trajectory needs at least 2 waypoints")
        if not np.all(np.isfinite(w)):
            raise ValueError("waypoint entries must be finite")
        object.__setattr__(self, "waypoints", _readonly(w))

    @property
    def num_waypoints(self) -> int:
        return self.waypoints.shape[0]

    @property
    def dof(self) -> int:
        return self.waypoints.shape[1]

    def to_json(self) -> dict:
        return {
            "dof": self.dof,
            "T": self.num_waypoints,
            "waypoints": self.waypoints.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Trajectory":
        t = cls(waypoints=np.asarray(data["waypoints"], dtype=np.float64))
        if t.dof != int(data["dof"]) or t.num_waypoints != int(data["T"]):
            raise ValueError("trajectory header does not match waypoint matrix")
        return t


@dataclass(frozen=True)
class Task:
    """Start/goal configurations plus the execution duration used for timing."""

    start: np.ndarray
    goal: np.ndarray
    duration: float = 5.0

    def __post_init__(self):
        start = np.asarray(self.start, dtype=np.float64)
        goal = np.asarray(self.goal, dtype=np.float64)
        if start.ndim != 1 or start.shape != goal.shape:
            raise ValueError("start and goal must be 1-d and the same length")
        if not (np.all(np.isfinite(start)) and np.all(np.isfinite(goal))):
            raise ValueError("start and goal must be finite")
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise ValueError("duration must be positive")
        if np.array_equal(start, goal):
            warnings.warn("task start equals goal; motion is degenerate", stacklevel=2)
        object.__setattr__(self, "start", _readonly(start))
        object.__setattr__(self, "goal", _readonly(goal))

    @property
    def dof(self) -> int:
        return self.start.shape[0]

    def to_json(self) -> dict:
        return {
            "start": self.start.tolist(),
            "goal": self.goal.tolist(),
            "duration": self.duration,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Task":
        return cls(
            start=np.asarray(data["start"], dtype=np.float64),
            goal=np.asarray(data["goal"], dtype=np.float64),
            duration=float(data.get("duration", 5.0)),
        )


@dataclass(frozen=True)
class PerturbationSpec:
    """How many smooth variants to draw and how large the waypoint bump is."""

    delta_magnitude: float = 0.35
    count: int = 7
    rng_seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.delta_magnitude) and self.delta_magnitude > 0):
            raise ValueError("delta_magnitude must be finite and positive")
        if self.count < 1:
            raise ValueError("count must be >= 1")


@dataclass(frozen=True, eq=False)
class TimedTrajectory:
    """Trajectory plus equally spaced timestamps starting at zero."""

    trajectory: Trajectory
    timestamps: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.float64)
        if ts.shape != (self.trajectory.num_waypoints,):
            raise ValueError("need one timestamp per waypoint")
        if ts[0] != 0.0 or np.any(np.diff(ts) <= 0):
            raise ValueError("timestamps must start at 0 and increase")
        object.__setattr__(self, "timestamps", _readonly(ts))

    def to_json(self) -> dict:
        data = self.trajectory.to_json()
        data["timestamps"] = self.timestamps.tolist()
        return data

    @classmethod
    def from_json(cls, data: dict) -> "TimedTrajectory":
        return cls(
            trajectory=Trajectory.from_json(data),
            timestamps=np.asarray(data["timestamps"], dtype=np.float64),
        )


def ssd_cost(x: Trajectory) -> float:
    """Sum of squared consecutive-waypoint differences (the task smoothness term)."""
    return float(ssd_batch(x.waypoints[None, :, :])[0])


def linear_interpolation(task: Task, num_waypoints: int) -> Trajectory:
    """Straight joint-space line from start to goal; the exact smoothness optimum."""
    if num_waypoints < 2:
        raise ValueError("num_waypoints must be >= 2")
    alpha = np.linspace(0.0, 1.0, num_waypoints)[:, None]
    return Trajectory(waypoints=(1.0 - alpha) * task.start + alpha * task.goal)


def smoothing_profile(num_waypoints: int, interior_index: int) -> np.ndarray:
    """Shape of a smoothed single-waypoint bump over the whole trajectory.

    Solves the interior tridiagonal system (2 on the diagonal, -1 off) for a
    unit load at ``interior_index`` (0-based, counting interior waypoints
    only), rescales so the peak value is 1, and pads zeros at both endpoints.
    """
    n = num_waypoints - 2
    if n < 2:
        raise ValueError("need at least two interior waypoints (T >= 4)")
    if not 0 <= interior_index < n:
        raise ValueError(f"interior index out of range [0, {n})")
    bands = np.zeros((3, n))
    bands[0, 1:] = -1.0
    bands[1, :] = 2.0
    bands[2, :-1] = -1.0
    rhs = np.zeros(n)
    rhs[interior_index] = 1.0
    s = solve_banded((1, 1), bands, rhs)
    profile = np.zeros(num_waypoints)
    profile[1:-1] = s / s[interior_index]  # peak of the Green's function sits at the load
    return profile


def smooth_perturbation(x0: Trajectory, spec: PerturbationSpec) -> list[Trajectory]:
    """Random smooth variants of x0 with endpoints untouched.

    Each variant bumps one random interior waypoint by a random direction of
    norm delta_magnitude and spreads the bump smoothly over the interior;
    the bump keeps exactly that norm at the selected waypoint. Deterministic
    given spec.rng_seed.
    """
    t, d = x0.waypoints.shape
    if t < 4:
        raise ValueError("perturbation needs at least two interior waypoints (T >= 4)")
    rng = np.random.default_rng(spec.rng_seed)
    variants = []
    for _ in range(spec.count):
        k = int(rng.integers(0, t - 2))
        delta = rng.normal(size=d)
        delta *= spec.delta_magnitude / np.linalg.norm(delta)
        profile = smoothing_profile(t, k)
        w = x0.waypoints + profile[:, None] * delta
        w[0] = x0.waypoints[0]
        w[-1] = x0.waypoints[-1]
        variants.append(Trajectory(waypoints=w))
    return variants


def rotate_trajectory(x: Trajectory, theta: float) -> Trajectory:
    """Rotate the whole motion about the world z axis (shift joint 0, wrapped)."""
    if not np.isfinite(theta):
        raise ValueError("rotation angle must be finite")
    w = x.waypoints.copy()
    w[:, 0] = wrap_angle(w[:, 0] + theta)
    return Trajectory(waypoints=w)


def time_trajectory(x: Trajectory, duration: float) -> TimedTrajectory:
    """Space waypoints equally in time over the given duration."""
    if not (np.isfinite(duration) and duration > 0):
        raise ValueError("duration must be positive")
    return TimedTrajectory(
        trajectory=x,
        timestamps=np.linspace(0.0, duration, x.num_waypoints),
    )
