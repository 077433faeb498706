# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Native kernel for the split-statistic series.

Same row/column-difference bookkeeping as the NumPy fallback in _qhat_py;
see that module for the derivation. Runs without the GIL so series can be
processed on worker threads in parallel.
"""

import numpy as np

from libc.math cimport fabs, pow

# Pools accumulate sums of up to T^2 distances; extended-precision
# accumulators keep the incremental path well inside the 1e-9 band the
# naive oracle defines.
ctypedef long double acc_t


cdef inline acc_t _dist(double a, double b, double alpha, bint unit_alpha) noexcept nogil:
    cdef double v = fabs(a - b)
    if unit_alpha:
        return <acc_t> v
    return <acc_t> pow(v, alpha)


def qhat_values(double[::1] z, double alpha, Py_ssize_t min_side, bint size_weight=True):
    """qhat at every admissible split; mirrors _qhat_py.qhat_values."""
    cdef Py_ssize_t t = z.shape[0]
    cdef Py_ssize_t lo = min_side
    cdef Py_ssize_t hi = t - min_side
    if hi < lo:
        return np.empty(0, dtype=np.float64)

    out_arr = np.empty(hi - lo + 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef bint unit_alpha = alpha == 1.0
    cdef acc_t cross = 0.0, wl = 0.0, wr = 0.0
    cdef acc_t row, col
    cdef double e, n, m
    cdef Py_ssize_t i, j, tau, k

    with nogil:
        for i in range(lo):
            for j in range(i + 1, lo):
                wl += _dist(z[i], z[j], alpha, unit_alpha)
            for j in range(lo, t):
                cross += _dist(z[i], z[j], alpha, unit_alpha)
        for i in range(lo, t):
            for j in range(i + 1, t):
                wr += _dist(z[i], z[j], alpha, unit_alpha)

        k = 0
        for tau in range(lo, hi + 1):
            n = <double> tau
            m = <double> (t - tau)
            e = (2.0 * (<double> cross) / (n * m)
                 - 2.0 * (<double> wl) / (n * (n - 1.0))
                 - 2.0 * (<double> wr) / (m * (m - 1.0)))
            if size_weight:
                out[k] = (n * m / (n + m)) * e
            else:
                out[k] = e
            k += 1
            if tau < hi:
                row = 0.0
                col = 0.0
                for i in range(tau):
                    row += _dist(z[i], z[tau], alpha, unit_alpha)
                for j in range(tau + 1, t):
                    col += _dist(z[tau], z[j], alpha, unit_alpha)
                wl += row
                wr -= col
                cross += col - row
    return out_arr
