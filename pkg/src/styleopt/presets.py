"""Desk-scale defaults: the test arm and a small set of reaching tasks.

The three training tasks and the held-out evaluation task are free-space
start/goal pairs chosen so the end effector sweeps a useful range of
radius, height and tilt on the default unit-link arm.
"""

from .kinematics import ArmModel, default_arm
from .trajectory import Task

DEFAULT_T = 10
DEFAULT_LAMBDA = 0.5
DEFAULT_DURATION = 5.0
DEFAULT_PAIRS_PER_BATCH = 4


def default_tasks() -> list[Task]:
    """Three training tasks for the default 3-joint arm (carry/place/handover analogs)."""
    return [
        Task(start=(-0.8, 0.6, 0.5), goal=(0.9, 0.7, 0.4), duration=DEFAULT_DURATION),
        Task(start=(0.2, 0.9, 0.8), goal=(1.1, 1.3, 0.3), duration=DEFAULT_DURATION),
        Task(start=(-1.2, 1.1, 0.2), goal=(0.3, 0.5, 0.9), duration=DEFAULT_DURATION),
    ]


def default_eval_task() -> Task:
    """Held-out task used for pairwise-agreement evaluation, never for queries."""
    return Task(start=(0.5, 1.2, -0.4), goal=(-0.7, 0.8, 0.6), duration=DEFAULT_DURATION)


__all__ = [
    "ArmModel",
    "default_arm",
    "default_tasks",
    "default_eval_task",
    "DEFAULT_T",
    "DEFAULT_LAMBDA",
    "DEFAULT_DURATION",
    "DEFAULT_PAIRS_PER_BATCH",
]
