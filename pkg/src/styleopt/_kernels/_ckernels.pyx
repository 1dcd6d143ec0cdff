# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot evaluation kernels.

Mirrors ``_pykernels`` function for function; see that module for the
contracts. Scalar loops avoid NumPy dispatch overhead on the small batches
generated by finite-difference gradient probes inside the optimizer.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, acos, cos, floor, hypot, sin, sqrt

cnp.import_array()

NAME = "c"

cdef double TWO_PI = 2.0 * M_PI


def wrap_angle(a):
    """Wrap angles (scalar or array) to the interval (-pi, pi].

    Values already inside the interval are returned bit-unchanged (the
    correction term is then exactly zero).
    """
    a = np.asarray(a, dtype=np.float64)
    return a + TWO_PI * np.floor((np.pi - a) / TWO_PI)


cdef inline double _wrap(double a) nogil:
    return a + TWO_PI * floor((M_PI - a) / TWO_PI)


cdef inline void _fk_one(const double* q, Py_ssize_t d, const double* lengths,
                         double base_height, double* pose) nogil:
    # pose: [px, py, pz, ux, uy, uz]
    cdef double yaw = q[0]
    cdef double cy = cos(yaw)
    cdef double sy = sin(yaw)
    cdef double psi = 0.0
    cdef double radial = 0.0
    cdef double height = base_height
    cdef double sl = 0.0
    cdef double cl = 1.0
    cdef Py_ssize_t j
    for j in range(d - 1):
        psi += q[j + 1]
        sl = sin(psi)
        cl = cos(psi)
        radial += lengths[j] * sl
        height += lengths[j] * cl
    pose[0] = radial * cy
    pose[1] = radial * sy
    pose[2] = height
    pose[3] = sl * cy
    pose[4] = sl * sy
    pose[5] = cl


def fk_batch(lengths, double base_height, q):
    """End-effector poses for a batch of joint configurations; see _pykernels."""
    cdef const double[::1] lv = np.ascontiguousarray(lengths, dtype=np.float64)
    cdef const double[:, ::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t n = qv.shape[0]
    cdef Py_ssize_t d = qv.shape[1]
    if lv.shape[0] != d - 1:
        raise ValueError("lengths must have dof-1 entries")
    pos_arr = np.empty((n, 3))
    point_arr = np.empty((n, 3))
    cdef double[:, ::1] pos = pos_arr
    cdef double[:, ::1] point = point_arr
    cdef double pose[6]
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _fk_one(&qv[i, 0], d, &lv[0], base_height, pose)
            pos[i, 0] = pose[0]
            pos[i, 1] = pose[1]
            pos[i, 2] = pose[2]
            point[i, 0] = pose[3]
            point[i, 1] = pose[4]
            point[i, 2] = pose[5]
    return pos_arr, point_arr


def ssd_batch(x):
    """Sum of squared consecutive-waypoint differences, per trajectory."""
    cdef const double[:, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t b = xv.shape[0]
    cdef Py_ssize_t t = xv.shape[1]
    cdef Py_ssize_t d = xv.shape[2]
    out_arr = np.empty(b)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    with nogil:
        for i in range(b):
            acc = 0.0
            for j in range(t - 1):
                for k in range(d):
                    diff = xv[i, j + 1, k] - xv[i, j, k]
                    acc += diff * diff
            out[i] = acc
    return out_arr


def feature_batch(lengths, double base_height, x):
    """Style features (mean radius/height/angle, segment distances) per trajectory."""
    cdef const double[::1] lv = np.ascontiguousarray(lengths, dtype=np.float64)
    cdef const double[:, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t b = xv.shape[0]
    cdef Py_ssize_t t = xv.shape[1]
    cdef Py_ssize_t d = xv.shape[2]
    if lv.shape[0] != d - 1:
        raise ValueError("lengths must have dof-1 entries")
    ee_arr = np.empty((b, 3))
    fv_arr = np.empty((b, t - 1))
    cdef double[:, ::1] ee = ee_arr
    cdef double[:, ::1] fv = fv_arr
    cdef double pose[6]
    cdef Py_ssize_t i, j, k
    cdef double fr, fh, fo, pz, acc, diff
    with nogil:
        for i in range(b):
            fr = 0.0
            fh = 0.0
            fo = 0.0
            for j in range(t):
                _fk_one(&xv[i, j, 0], d, &lv[0], base_height, pose)
                fr += hypot(pose[0], pose[1])
                fh += pose[2]
                pz = pose[5]
                if pz > 1.0:
                    pz = 1.0
                elif pz < -1.0:
                    pz = -1.0
                fo += acos(pz)
            ee[i, 0] = fr / t
            ee[i, 1] = fh / t
            ee[i, 2] = fo / t
            for j in range(t - 1):
                acc = 0.0
                for k in range(d):
                    diff = _wrap(xv[i, j + 1, k] - xv[i, j, k])
                    acc += diff * diff
                fv[i, j] = sqrt(acc)
    return ee_arr, fv_arr


cdef inline void _encode_row(const double[:, :, ::1] xv, Py_ssize_t i, Py_ssize_t j,
                             Py_ssize_t d, Py_ssize_t t, const double* lengths,
                             double base_height, double* u) nogil:
    # u: [x[j], x[j-1], ee position, ee pointing, (j+1)/T], width 2d+7
    cdef double pose[6]
    cdef Py_ssize_t k
    for k in range(d):
        u[k] = xv[i, j, k]
        u[d + k] = xv[i, j - 1, k]
    _fk_one(&xv[i, j, 0], d, lengths, base_height, pose)
    for k in range(6):
        u[2 * d + k] = pose[k]
    u[2 * d + 6] = (j + 1.0) / t


def mlp_inputs_batch(lengths, double base_height, x):
    """Per-step network inputs, shape (B, T-1, 2D+7); see _pykernels."""
    cdef const double[::1] lv = np.ascontiguousarray(lengths, dtype=np.float64)
    cdef const double[:, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t b = xv.shape[0]
    cdef Py_ssize_t t = xv.shape[1]
    cdef Py_ssize_t d = xv.shape[2]
    u_arr = np.empty((b, t - 1, 2 * d + 7))
    cdef double[:, :, ::1] u = u_arr
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(b):
            for j in range(1, t):
                _encode_row(xv, i, j, d, t, &lv[0], base_height, &u[i, j - 1, 0])
    return u_arr


def mlp_cost_batch(lengths, double base_height, x, w1, b1, w2, b2, w3, b3):
    """Network style cost (sum of squared per-step outputs), per trajectory.

    Input encoding runs through the compiled path; the layer stack itself
    uses NumPy, whose BLAS matmuls and SIMD tanh beat scalar loops at every
    batch size the optimizer produces.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    b = x.shape[0]
    t = x.shape[1]
    u = mlp_inputs_batch(lengths, base_height, x).reshape(b * (t - 1), -1)
    if u.shape[1] != w1.shape[0]:
        raise ValueError("input layer width mismatch")
    h = np.tanh(u @ w1 + b1)
    h = np.tanh(h @ w2 + b2)
    y = h @ w3 + b3
    return np.einsum("nk,nk->n", y, y).reshape(b, t - 1).sum(axis=1)
