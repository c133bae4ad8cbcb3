# cython: language_level=3
"""Compiled versions of the hot kernels (see ``_pykernels`` for the contract)."""
import numpy as np


def correlation_gains(const double[:, ::1] alpha, const double[:, ::1] beta, long N, long N_c):
    cdef Py_ssize_t K = alpha.shape[0], L = alpha.shape[1]
    cdef Py_ssize_t k, j, m, r
    cdef double acc, c, energy
    h_sp_arr = np.zeros(K)
    h_si_arr = np.zeros(K)
    h_mai_arr = np.zeros((K, K))
    cdef double[::1] h_sp = h_sp_arr
    cdef double[::1] h_si = h_si_arr
    cdef double[:, ::1] h_mai = h_mai_arr
    cdef double phi2

    for k in range(K):
        acc = 0.0
        for r in range(L):
            acc += beta[k, r] * alpha[k, r]
        h_sp[k] = acc

    for k in range(K):
        acc = 0.0
        for m in range(1, L):
            c = 0.0
            for r in range(L - m):
                c += beta[k, r] * alpha[k, r + m] + alpha[k, r] * beta[k, r + m]
            phi2 = (m if m < N_c else N_c) / <double>N_c
            acc += phi2 * c * c
        h_si[k] = acc / (N * h_sp[k])

    for k in range(K):
        for j in range(K):
            if j == k:
                continue
            energy = 0.0
            # beta_k leads alpha_j by m >= 0
            for m in range(L):
                c = 0.0
                for r in range(L - m):
                    c += alpha[j, r] * beta[k, r + m]
                energy += c * c
            # alpha_j leads beta_k by m > 0
            for m in range(1, L):
                c = 0.0
                for r in range(L - m):
                    c += beta[k, r] * alpha[j, r + m]
                energy += c * c
            h_mai[k, j] = energy / (N * h_sp[k])
    return h_sp_arr, h_si_arr, h_mai_arr


cdef void _fill_sinrs(const double[::1] h_sp, const double[::1] h_si, const double[:, ::1] h_mai,
                      double noise, const double[::1] p, double[::1] out):
    cdef Py_ssize_t K = h_sp.shape[0], k, j
    cdef double acc
    for k in range(K):
        acc = noise
        for j in range(K):
            acc += h_mai[k, j] * p[j]
        out[k] = h_sp[k] * p[k] / (h_si[k] * p[k] + acc)


def brpc_iterate(const double[::1] h_sp, const double[::1] h_si, const double[:, ::1] h_mai,
                 const double[::1] target, double noise, double p_max, double[::1] p,
                 long max_sweeps, double tol, double p_floor, int form,
                 trace_p=None, trace_s=None):
    cdef Py_ssize_t K = h_sp.shape[0], k, j
    cdef long sweep
    cdef double pk, interference, sinr, new, rel, change, g_inv, keep, rebuilt
    cdef double[:, ::1] tp
    cdef double[:, ::1] ts
    cdef bint tracing = trace_p is not None
    if tracing:
        tp = trace_p
        ts = trace_s
        tp[0, :] = p
        _fill_sinrs(h_sp, h_si, h_mai, noise, p, ts[0])
    for sweep in range(1, max_sweeps + 1):
        change = 0.0
        for k in range(K):
            pk = p[k]
            interference = noise
            for j in range(K):
                interference += h_mai[k, j] * p[j]
            sinr = h_sp[k] * pk / (h_si[k] * pk + interference)
            g_inv = h_si[k] / h_sp[k]
            keep = 1.0 - target[k] * g_inv
            if form == 0:
                new = pk * (target[k] / sinr) * (1.0 - sinr * g_inv) / keep
            else:
                rebuilt = h_sp[k] * pk * (1.0 - sinr * g_inv) / sinr
                new = target[k] * rebuilt / (h_sp[k] * keep)
            if new > p_max:
                new = p_max
            rel = (new - pk) if new >= pk else (pk - new)
            rel = rel / (new if new > p_floor else p_floor)
            if rel > change:
                change = rel
            p[k] = new
        if tracing:
            tp[sweep, :] = p
            _fill_sinrs(h_sp, h_si, h_mai, noise, p, ts[sweep])
        if change < tol:
            return sweep, True
    return max_sweeps, False
