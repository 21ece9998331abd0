# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled log-domain product-mixing kernel (see _product_py for semantics)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def product_mix(cnp.float64_t[::1] log_a, cnp.float64_t[::1] p_a,
                cnp.float64_t[::1] log_b, cnp.float64_t[::1] p_b,
                double shift, double log_lo, double dlog, int n_bins):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.zeros(n_bins)
    cdef cnp.float64_t[::1] out = out_arr
    cdef Py_ssize_t i, j, na = log_a.shape[0], nb = log_b.shape[0]
    cdef Py_ssize_t lower
    cdef double pos, frac, w, base

    for i in range(na):
        if p_a[i] == 0.0:
            continue
        base = log_a[i] + shift - log_lo
        for j in range(nb):
            if p_b[j] == 0.0:
                continue
            pos = (base + log_b[j]) / dlog
            if pos <= 0.0:
                out[0] += p_a[i] * p_b[j]
                continue
            if pos >= n_bins - 1:
                out[n_bins - 1] += p_a[i] * p_b[j]
                continue
            lower = <Py_ssize_t>pos
            frac = pos - lower
            w = p_a[i] * p_b[j]
            out[lower] += w * (1.0 - frac)
            out[lower + 1] += w * frac
    return out_arr
