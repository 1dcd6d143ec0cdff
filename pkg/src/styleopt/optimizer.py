"""Local trajectory optimization with fixed endpoints.

Projected gradient descent with backtracking line search: endpoint
waypoints are never updated (the projection onto the start/goal equality
constraints), every accepted step decreases the objective, and joint
limits, when the arm has them, are enforced by clamping after each step.
Problem sizes here are tiny (D*T <= ~70 variables), so first-order steps
with finite-difference style gradients are fast enough.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import (
    FeaturizedCost,
    ObjectiveConfig,
    featurized_trajectory_gradient,
    style_cost_batch,
    total_objective_batch,
)
from .kinematics import ArmModel
from .trajectory import Task, Trajectory, linear_interpolation

FD_MODE = "finite-difference"
ANALYTIC_MODE = "analytic-where-available"

_MIN_STEP = 1e-14


@dataclass(frozen=True)
class OptimizerSettings:
    max_iterations: int = 300
    convergence_tol: float = 1e-6
    initial_step: float = 0.1
    shrink_factor: float = 0.5
    gradient_mode: str = FD_MODE
    fd_epsilon: float = 1e-5

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in ("convergence_tol", "initial_step", "fd_epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.shrink_factor < 1.0:
            raise ValueError("shrink_factor must be in (0, 1)")
        if self.gradient_mode not in (FD_MODE, ANALYTIC_MODE):
            raise ValueError(f"unknown gradient_mode {self.gradient_mode!r}")

    def to_json(self) -> dict:
        return {
            "max_iterations": self.max_iterations,
            "convergence_tol": self.convergence_tol,
            "initial_step": self.initial_step,
            "shrink_factor": self.shrink_factor,
            "gradient_mode": self.gradient_mode,
            "fd_epsilon": self.fd_epsilon,
        }

    @classmethod
    def from_json(cls, data: dict) -> "OptimizerSettings":
        return cls(**data)


@dataclass(frozen=True)
class OptimizeResult:
    trajectory: Trajectory
    objective_history: tuple
    iterations: int
    converged: bool

    def to_json(self) -> dict:
        data = self.trajectory.to_json()
        data.update(
            objective_history=list(self.objective_history),
            iterations=self.iterations,
            converged=self.converged,
        )
        return data


def ssd_gradient(w: np.ndarray) -> np.ndarray:
    """Exact gradient of the smoothness cost w.r.t. every waypoint entry."""
    g = np.zeros_like(w)
    g[0] = 2.0 * (w[0] - w[1])
    g[-1] = 2.0 * (w[-1] - w[-2])
    g[1:-1] = 2.0 * (2.0 * w[1:-1] - w[:-2] - w[2:])
    return g


def numeric_gradient(f, x: Trajectory, fd_epsilon: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a trajectory functional, all T*D entries.

    The optimizer itself ignores the endpoint rows; they are reported here
    for diagnostics and tests.
    """
    base = x.waypoints
    g = np.empty_like(base)
    for t in range(base.shape[0]):
        for j in range(base.shape[1]):
            wp = base.copy()
            wp[t, j] += fd_epsilon
            fp = f(Trajectory(waypoints=wp))
            wp[t, j] -= 2.0 * fd_epsilon
            fm = f(Trajectory(waypoints=wp))
            if not (np.isfinite(fp) and np.isfinite(fm)):
                raise ValueError(f"objective not finite near waypoint ({t}, {j})")
            g[t, j] = (fp - fm) / (2.0 * fd_epsilon)
    return g


def _fd_style_gradient_interior(cfg: ObjectiveConfig, arm: ArmModel, w: np.ndarray, eps: float) -> np.ndarray:
    """Central differences of the style term over interior waypoints, batched."""
    t, d = w.shape
    n = (t - 2) * d
    batch = np.broadcast_to(w, (2 * n, t, d)).copy()
    flat = batch.reshape(2 * n, t * d)
    idx = np.arange(d, (t - 1) * d)  # interior entries in row-major order
    flat[np.arange(n), idx] += eps
    flat[n + np.arange(n), idx] -= eps
    vals = style_cost_batch(cfg.style_cost, arm, batch)
    g = np.zeros((t, d))
    g.reshape(-1)[idx] = (vals[:n] - vals[n:]) / (2.0 * eps)
    return g


def _objective_gradient(cfg: ObjectiveConfig, arm: ArmModel, w: np.ndarray, settings: OptimizerSettings) -> np.ndarray:
    """Gradient of the full objective with endpoint rows zeroed."""
    g = np.zeros_like(w)
    if cfg.style_cost is not None:
        if settings.gradient_mode == ANALYTIC_MODE and isinstance(cfg.style_cost, FeaturizedCost):
            g += featurized_trajectory_gradient(cfg.style_cost, arm, Trajectory(waypoints=w.copy()))
        else:
            g += _fd_style_gradient_interior(cfg, arm, w, settings.fd_epsilon)
    if cfg.lam != 0.0:
        g += cfg.lam * ssd_gradient(w)
    g[0] = 0.0
    g[-1] = 0.0
    return g


def optimize(
    cfg: ObjectiveConfig,
    arm: ArmModel,
    task: Task,
    num_waypoints: int,
    settings: OptimizerSettings | None = None,
    init: Trajectory | None = None,
) -> OptimizeResult:
    """Minimize style + lam * smoothness with start and goal held fixed."""
    settings = settings or OptimizerSettings()
    if task.dof != arm.dof:
        raise ValueError(f"task dof {task.dof} does not match arm dof {arm.dof}")
    if init is None:
        init = linear_interpolation(task, num_waypoints)
    else:
        if init.dof != arm.dof or init.num_waypoints != num_waypoints:
            raise ValueError("init trajectory shape does not match task")
        if not (
            np.allclose(init.waypoints[0], task.start, rtol=0.0, atol=1e-9)
            and np.allclose(init.waypoints[-1], task.goal, rtol=0.0, atol=1e-9)
        ):
            raise ValueError("init endpoints must equal task start/goal")
    w = init.waypoints.copy()
    w[0] = task.start  # endpoints pinned exactly, never updated below
    w[-1] = task.goal

    limits = arm.limits_array

    def objective(wp: np.ndarray) -> float:
        return float(total_objective_batch(cfg, arm, wp[None, :, :])[0])

    f_cur = objective(w)
    if not np.isfinite(f_cur):
        raise ValueError("objective is not finite at the initial trajectory")
    history = [f_cur]
    step = settings.initial_step
    converged = False
    iterations = 0

    for _ in range(settings.max_iterations):
        g = _objective_gradient(cfg, arm, w, settings)
        gnorm2 = float(np.sum(g * g))
        if np.sqrt(gnorm2) < 1e-12:
            converged = True
            break
        alpha = step
        accepted = False
        while alpha >= _MIN_STEP:
            cand = w - alpha * g
            if limits is not None:
                np.clip(cand[1:-1], limits[:, 0], limits[:, 1], out=cand[1:-1])
            f_new = objective(cand)
            if f_new <= f_cur - 1e-4 * alpha * gnorm2:
                accepted = True
                break
            alpha *= settings.shrink_factor
        if not accepted:
            converged = True  # no descent possible at machine precision
            break
        w = cand
        iterations += 1
        history.append(f_new)
        decrease = f_cur - f_new
        f_cur = f_new
        step = alpha * 2.0
        if decrease <= settings.convergence_tol * max(abs(f_cur), 1e-30):
            converged = True
            break

    return OptimizeResult(
        trajectory=Trajectory(waypoints=w),
        objective_history=tuple(history),
        iterations=iterations,
        converged=converged,
    )
