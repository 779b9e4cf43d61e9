# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the numpy reference kernels in ``ref.py``.

Keep the arithmetic aligned with the reference implementation: the tests
compare the two backends sample by sample.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

BACKEND = "compiled"

cdef double _ACTIVATION_FLOOR = 1e-300

cdef int _CLASSICAL = 0
cdef int _SCALE = 1
cdef int _PASTOR = 2


cdef inline void _forcing(double[::1] centers, double[::1] widths,
                          double[:, ::1] weights, double x,
                          double* psi, double[::1] out) nogil:
    cdef Py_ssize_t n = centers.shape[0]
    cdef Py_ssize_t ndim = weights.shape[1]
    cdef Py_ssize_t i, j
    cdef double total = 0.0
    cdef double d, scale
    for i in range(n):
        d = x - centers[i]
        psi[i] = exp(-widths[i] * d * d)
        total += psi[i]
    for j in range(ndim):
        out[j] = 0.0
    if total < _ACTIVATION_FLOOR:
        return
    scale = x / total
    for i in range(n):
        d = psi[i] * scale
        for j in range(ndim):
            out[j] += d * weights[i, j]


def forcing_value(centers, widths, weights, double x):
    """Phase-gated normalized radial forcing, one value per weight column."""
    cdef double[::1] c = np.ascontiguousarray(centers, dtype=np.float64)
    cdef double[::1] h = np.ascontiguousarray(widths, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    out = np.zeros(w.shape[1])
    cdef double[::1] o = out
    buf = np.empty(c.shape[0])
    cdef double[::1] b = buf
    _forcing(c, h, w, x, &b[0], o)
    return out


def discrete_rollout(y0, g, centers, widths, weights, double alpha_z,
                     double beta_z, double alpha_x, double tau, double dt,
                     Py_ssize_t n_steps, int variant):
    """Integrate the point-to-point system on an exponential phase."""
    cdef double[::1] c = np.ascontiguousarray(centers, dtype=np.float64)
    cdef double[::1] h = np.ascontiguousarray(widths, dtype=np.float64)
    cdef double[:, ::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[::1] start = np.ascontiguousarray(y0, dtype=np.float64)
    cdef double[::1] goal = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t ndim = start.shape[0]

    if variant not in (_CLASSICAL, _SCALE, _PASTOR):
        raise ValueError(f"unknown variant code {variant}")

    ys = np.empty((n_steps + 1, ndim))
    vs = np.empty((n_steps + 1, ndim))
    xs = np.empty(n_steps + 1)
    cdef double[:, ::1] ys_v = ys
    cdef double[:, ::1] vs_v = vs
    cdef double[::1] xs_v = xs

    y_buf = np.array(start, dtype=np.float64)
    z_buf = np.zeros(ndim)
    f_buf = np.zeros(ndim)
    psi_buf = np.empty(c.shape[0])
    cdef double[::1] y = y_buf
    cdef double[::1] z = z_buf
    cdef double[::1] f = f_buf
    cdef double[::1] psi = psi_buf

    cdef double x = 1.0
    cdef double decay = exp(-alpha_x * dt / tau)
    cdef double zdot
    cdef Py_ssize_t k, j

    with nogil:
        for j in range(ndim):
            ys_v[0, j] = y[j]
            vs_v[0, j] = z[j] / tau
        xs_v[0] = x
        for k in range(1, n_steps + 1):
            _forcing(c, h, w, x, &psi[0], f)
            for j in range(ndim):
                if variant == _CLASSICAL:
                    zdot = alpha_z * (beta_z * (goal[j] - y[j]) - z[j]) + f[j]
                elif variant == _SCALE:
                    zdot = alpha_z * (beta_z * (goal[j] - y[j]) - z[j]) + (goal[j] - start[j]) * f[j]
                else:
                    zdot = alpha_z * (beta_z * (goal[j] - y[j] - (goal[j] - start[j]) * x + f[j]) - z[j])
                z[j] = z[j] + dt / tau * zdot
                y[j] = y[j] + dt / tau * z[j]
                ys_v[k, j] = y[j]
                vs_v[k, j] = z[j] / tau
            x = x * decay
            xs_v[k] = x
    return ys, vs, xs
