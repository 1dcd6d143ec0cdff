"""NumPy implementation of the hot evaluation kernels.

These functions sit on the inner loop of trajectory optimization (one call
per finite-difference probe) and of preference evaluation, so they take raw
float64 arrays rather than the wrapper types used elsewhere. The compiled
backend in ``_ckernels.pyx`` mirrors this module function for function;
``styleopt._kernels`` picks one of the two at import time.

Arm convention: joint 0 yaws about the world z axis, joints 1..D-1 pitch
inside the rotating vertical plane, each followed by one link. The zero
configuration stacks all links straight up.
"""

import numpy as np

NAME = "py"

_TWO_PI = 2.0 * np.pi


def wrap_angle(a):
    """Wrap angles (scalar or array) to the interval (-pi, pi].

    Values already inside the interval are returned bit-unchanged (the
    correction term is then exactly zero).
    """
    a = np.asarray(a, dtype=np.float64)
    return a + _TWO_PI * np.floor((np.pi - a) / _TWO_PI)


def fk_batch(lengths, base_height, q):
    """End-effector poses for a batch of joint configurations.

    q: (N, D) configurations, one per row. lengths: (D-1,) link lengths.
    Returns (positions (N, 3), pointings (N, 3)); pointing is the unit
    direction of the last link.
    """
    q = np.asarray(q, dtype=np.float64)
    lengths = np.asarray(lengths, dtype=np.float64)
    yaw = q[:, 0]
    psi = np.cumsum(q[:, 1:], axis=1)  # cumulative pitch per link
    s = np.sin(psi)
    c = np.cos(psi)
    radial = s @ lengths
    cy = np.cos(yaw)
    sy = np.sin(yaw)
    pos = np.empty((q.shape[0], 3))
    pos[:, 0] = radial * cy
    pos[:, 1] = radial * sy
    pos[:, 2] = base_height + c @ lengths
    point = np.empty_like(pos)
    point[:, 0] = s[:, -1] * cy
    point[:, 1] = s[:, -1] * sy
    point[:, 2] = c[:, -1]
    return pos, point


def ssd_batch(x):
    """Sum of squared consecutive-waypoint differences, per trajectory.

    x: (B, T, D). Differences are taken on raw values (no angle wrap);
    steps produced by the optimizer stay far below pi.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x[:, 1:, :] - x[:, :-1, :]
    return np.einsum("btd,btd->b", d, d)


def feature_batch(lengths, base_height, x):
    """Style features for a batch of trajectories.

    x: (B, T, D). Returns (ee (B, 3), fv (B, T-1)) where ee holds the mean
    end-effector radius, height and angle-to-vertical, and fv the per-segment
    joint-space distances. Segment differences are wrapped to (-pi, pi] so
    the features are invariant under base rotation.
    """
    x = np.asarray(x, dtype=np.float64)
    b, t, d = x.shape
    pos, point = fk_batch(lengths, base_height, x.reshape(b * t, d))
    pos = pos.reshape(b, t, 3)
    point = point.reshape(b, t, 3)
    ee = np.empty((b, 3))
    ee[:, 0] = np.hypot(pos[:, :, 0], pos[:, :, 1]).mean(axis=1)
    ee[:, 1] = pos[:, :, 2].mean(axis=1)
    ee[:, 2] = np.arccos(np.clip(point[:, :, 2], -1.0, 1.0)).mean(axis=1)
    seg = wrap_angle(x[:, 1:, :] - x[:, :-1, :])
    fv = np.sqrt(np.einsum("btd,btd->bt", seg, seg))
    return ee, fv


def mlp_inputs_batch(lengths, base_height, x):
    """Per-step network inputs for a batch of trajectories.

    Row j (j = 1..T-1) encodes [x[j], x[j-1], ee position(x[j]),
    ee pointing(x[j]), (j+1)/T], giving width 2D+7.
    Returns (B, T-1, 2D+7).
    """
    x = np.asarray(x, dtype=np.float64)
    b, t, d = x.shape
    pos, point = fk_batch(lengths, base_height, x[:, 1:, :].reshape(b * (t - 1), d))
    u = np.empty((b, t - 1, 2 * d + 7))
    u[:, :, :d] = x[:, 1:, :]
    u[:, :, d:2 * d] = x[:, :-1, :]
    u[:, :, 2 * d:2 * d + 3] = pos.reshape(b, t - 1, 3)
    u[:, :, 2 * d + 3:2 * d + 6] = point.reshape(b, t - 1, 3)
    u[:, :, 2 * d + 6] = np.arange(2, t + 1, dtype=np.float64) / t
    return u


def mlp_cost_batch(lengths, base_height, x, w1, b1, w2, b2, w3, b3):
    """Network style cost (sum of squared per-step outputs), per trajectory.

    x: (B, T, D); weights are the two tanh hidden layers and the linear
    output layer. Dropout is never applied here (evaluation mode only).
    """
    x = np.asarray(x, dtype=np.float64)
    b, t, _ = x.shape
    u = mlp_inputs_batch(lengths, base_height, x).reshape(b * (t - 1), -1)
    h = np.tanh(u @ w1 + b1)
    h = np.tanh(h @ w2 + b2)
    y = h @ w3 + b3
    return np.einsum("nk,nk->n", y, y).reshape(b, t - 1).sum(axis=1)
