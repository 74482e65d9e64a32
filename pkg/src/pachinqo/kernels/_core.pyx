# cython: language_level=3
"""Compiled placement hot kernels.

Semantics mirror kernels.py_fallback exactly; keep both in sync.
"""

IMPLEMENTATION = "cython"


def clear_from(double[::1] obs_x, double[::1] obs_y, Py_ssize_t n,
               double px, double py, double r2):
    """True iff (px, py) is at squared distance >= r2 from obs[:n]."""
    cdef Py_ssize_t i
    cdef double dx, dy
    for i in range(n):
        dx = obs_x[i] - px
        dy = obs_y[i] - py
        if dx * dx + dy * dy < r2:
            return False
    return True


def clear_from_except(double[::1] obs_x, double[::1] obs_y, Py_ssize_t n,
                      double px, double py, double r2, Py_ssize_t skip):
    """Like clear_from but obstacle index `skip` is exempt."""
    cdef Py_ssize_t i
    cdef double dx, dy
    for i in range(n):
        if i == skip:
            continue
        dx = obs_x[i] - px
        dy = obs_y[i] - py
        if dx * dx + dy * dy < r2:
            return False
    return True
