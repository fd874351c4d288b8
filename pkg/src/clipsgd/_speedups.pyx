# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch trial runner: per-trial streaming-SGD inner loops in C.

Mirrors clipsgd._numpy_kernel.run_trials; selected at import by
clipsgd.backends when built.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()


cdef inline double _sigmoid(double z) nogil:
    cdef double ez
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    ez = exp(z)
    return ez / (1.0 + ez)


def run_trials(int kind, cnp.ndarray[cnp.float64_t, ndim=3] X_arr, y_arr,
               theta0_arr, double tau_l, double gamma,
               clip_level, int reg_kind, double reg_param,
               ball_center, double ball_radius, theta_star_arr, bint record):
    cdef double[:, :, ::1] X = np.ascontiguousarray(X_arr, dtype=np.float64)
    cdef Py_ssize_t trials = X.shape[0]
    cdef Py_ssize_t n_steps = X.shape[1]
    cdef Py_ssize_t dim = X.shape[2]

    cdef bint has_y = y_arr is not None
    cdef double[:, ::1] y
    if has_y:
        y = np.ascontiguousarray(y_arr, dtype=np.float64)
    else:
        y = np.zeros((1, 1))

    cdef double[::1] theta0 = np.ascontiguousarray(theta0_arr, dtype=np.float64)
    cdef double[::1] theta_star = np.ascontiguousarray(theta_star_arr, dtype=np.float64)

    cdef bint do_clip = clip_level is not None
    cdef double level = clip_level if do_clip else -1.0

    cdef bint do_project = ball_center is not None
    cdef double[::1] center
    if do_project:
        center = np.ascontiguousarray(ball_center, dtype=np.float64)
    else:
        center = np.zeros(1)

    final_arr = np.empty((trials, dim), dtype=np.float64)
    cdef double[:, ::1] final = final_arr
    errors_arr = np.empty((trials, n_steps + 1), dtype=np.float64) if record else None
    cdef double[:, ::1] errors
    if record:
        errors = errors_arr
    else:
        errors = np.zeros((1, 1))

    theta_buf = np.empty(dim, dtype=np.float64)
    grad_buf = np.empty(dim, dtype=np.float64)
    cdef double[::1] th = theta_buf
    cdef double[::1] g = grad_buf

    cdef Py_ssize_t i, t, j
    cdef double dot, r, s, nrm2, scale, eta, acc

    with nogil:
        for i in range(trials):
            for j in range(dim):
                th[j] = theta0[j]
            if do_project:
                _project(th, center, ball_radius, dim)
            if record:
                acc = 0.0
                for j in range(dim):
                    acc += (th[j] - theta_star[j]) * (th[j] - theta_star[j])
                errors[i, 0] = sqrt(acc)

            for t in range(1, n_steps + 1):
                if kind == 0:
                    for j in range(dim):
                        g[j] = th[j] - X[i, t - 1, j]
                elif kind == 1:
                    dot = 0.0
                    for j in range(dim):
                        dot += X[i, t - 1, j] * th[j]
                    r = y[i, t - 1] - dot
                    if reg_kind == 3:
                        if r > reg_param:
                            r = reg_param
                        elif r < -reg_param:
                            r = -reg_param
                    for j in range(dim):
                        g[j] = -r * X[i, t - 1, j]
                else:
                    dot = 0.0
                    for j in range(dim):
                        dot += X[i, t - 1, j] * th[j]
                    s = _sigmoid(dot) - y[i, t - 1]
                    for j in range(dim):
                        g[j] = s * X[i, t - 1, j]

                if reg_kind == 1:
                    for j in range(dim):
                        g[j] += reg_param * th[j]
                elif reg_kind == 2:
                    for j in range(dim):
                        if th[j] > 0.0:
                            g[j] += reg_param
                        elif th[j] < 0.0:
                            g[j] -= reg_param

                if do_clip:
                    nrm2 = 0.0
                    for j in range(dim):
                        nrm2 += g[j] * g[j]
                    if nrm2 > level * level:
                        scale = level / sqrt(nrm2)
                        for j in range(dim):
                            g[j] *= scale

                eta = 1.0 / (tau_l * (t + gamma))
                for j in range(dim):
                    th[j] -= eta * g[j]
                if do_project:
                    _project(th, center, ball_radius, dim)
                if record:
                    acc = 0.0
                    for j in range(dim):
                        acc += (th[j] - theta_star[j]) * (th[j] - theta_star[j])
                    errors[i, t] = sqrt(acc)

            for j in range(dim):
                final[i, j] = th[j]

    return final_arr, errors_arr


cdef inline void _project(double[::1] th, double[::1] center, double radius,
                          Py_ssize_t dim) nogil:
    cdef Py_ssize_t j
    cdef double dist2 = 0.0
    cdef double scale
    for j in range(dim):
        dist2 += (th[j] - center[j]) * (th[j] - center[j])
    if dist2 > radius * radius:
        scale = radius / sqrt(dist2)
        for j in range(dim):
            th[j] = center[j] + (th[j] - center[j]) * scale
