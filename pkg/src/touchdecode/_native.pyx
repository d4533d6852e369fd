# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: batched Gaussian fusion, CTC passes, Levenshtein.

Mirrors the numpy fallbacks in touchdecode.kernels; the wrappers there
pick whichever backend imported.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, isnan, INFINITY

cnp.import_array()

cdef double LOG_2PI = log(2.0 * 3.14159265358979323846)
cdef double DET_GUARD = 1e-12
cdef double NEG_INF = -INFINITY


cdef inline double logaddexp(double a, double b) nogil:
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a > b:
        return a + log(1.0 + exp(b - a))
    return b + log(1.0 + exp(a - b))


def fuse_log_rho_batch(double[::1] obs_mean, double[:, ::1] obs_cov,
                       double[:, ::1] key_means, double[:, :, ::1] key_covs):
    cdef Py_ssize_t k, n = key_means.shape[0]
    cdef double s00, s01, s11, det, d0, d1, q
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for k in range(n):
        s00 = obs_cov[0, 0] + key_covs[k, 0, 0]
        s01 = obs_cov[0, 1] + key_covs[k, 0, 1]
        s11 = obs_cov[1, 1] + key_covs[k, 1, 1]
        det = s00 * s11 - s01 * s01
        if det < DET_GUARD:
            out[k] = <double> float("nan")
            continue
        d0 = obs_mean[0] - key_means[k, 0]
        d1 = obs_mean[1] - key_means[k, 1]
        q = (d0 * d0 * s11 - 2.0 * d0 * d1 * s01 + d1 * d1 * s00) / det
        out[k] = -LOG_2PI - 0.5 * log(det) - 0.5 * q
    return out_arr


cdef object _padded(long long[::1] labels, long long blank):
    cdef Py_ssize_t L = labels.shape[0]
    padded_arr = np.full(2 * L + 1, blank, dtype=np.int64)
    cdef long long[::1] padded = padded_arr
    cdef Py_ssize_t i
    for i in range(L):
        padded[2 * i + 1] = labels[i]
    return padded_arr


def ctc_forward(double[:, ::1] probs, long long[::1] labels, long long blank):
    cdef Py_ssize_t T = probs.shape[0]
    cdef Py_ssize_t C = probs.shape[1]
    padded_arr = _padded(labels, blank)
    cdef long long[::1] padded = padded_arr
    cdef Py_ssize_t S = padded.shape[0]
    cdef Py_ssize_t t, s
    cdef double a, p

    logp_arr = np.empty((T, C), dtype=np.float64)
    cdef double[:, ::1] logp = logp_arr
    for t in range(T):
        for s in range(C):
            p = probs[t, s]
            logp[t, s] = log(p) if p > 0.0 else NEG_INF

    alpha_arr = np.full(S, NEG_INF, dtype=np.float64)
    prev_arr = np.full(S, NEG_INF, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] prev = prev_arr

    alpha[0] = logp[0, padded[0]]
    if S > 1:
        alpha[1] = logp[0, padded[1]]
    for t in range(1, T):
        prev_arr, alpha_arr = alpha_arr, prev_arr
        prev = prev_arr
        alpha = alpha_arr
        for s in range(S):
            a = prev[s]
            if s >= 1:
                a = logaddexp(a, prev[s - 1])
            if s >= 2 and padded[s] != blank and padded[s] != padded[s - 2]:
                a = logaddexp(a, prev[s - 2])
            alpha[s] = a + logp[t, padded[s]]
    cdef double total = alpha[S - 1]
    if S > 1:
        total = logaddexp(total, alpha[S - 2])
    return -total


def ctc_forward_backward(double[:, ::1] probs, long long[::1] labels, long long blank):
    cdef Py_ssize_t T = probs.shape[0]
    cdef Py_ssize_t C = probs.shape[1]
    padded_arr = _padded(labels, blank)
    cdef long long[::1] padded = padded_arr
    cdef Py_ssize_t S = padded.shape[0]
    cdef Py_ssize_t t, s, k
    cdef double a, b, v, p

    logp_arr = np.empty((T, C), dtype=np.float64)
    cdef double[:, ::1] logp = logp_arr
    for t in range(T):
        for k in range(C):
            p = probs[t, k]
            logp[t, k] = log(p) if p > 0.0 else NEG_INF

    alpha_arr = np.full((T, S), NEG_INF, dtype=np.float64)
    cdef double[:, ::1] alpha = alpha_arr
    alpha[0, 0] = logp[0, padded[0]]
    if S > 1:
        alpha[0, 1] = logp[0, padded[1]]
    for t in range(1, T):
        for s in range(S):
            a = alpha[t - 1, s]
            if s >= 1:
                a = logaddexp(a, alpha[t - 1, s - 1])
            if s >= 2 and padded[s] != blank and padded[s] != padded[s - 2]:
                a = logaddexp(a, alpha[t - 1, s - 2])
            alpha[t, s] = a + logp[t, padded[s]]

    cdef double log_total = alpha[T - 1, S - 1]
    if S > 1:
        log_total = logaddexp(log_total, alpha[T - 1, S - 2])
    grad_arr = np.zeros((T, C), dtype=np.float64)
    cdef double[:, ::1] grad = grad_arr
    if log_total == NEG_INF or isnan(log_total):
        return -log_total, grad_arr

    beta_arr = np.full((T, S), NEG_INF, dtype=np.float64)
    cdef double[:, ::1] beta = beta_arr
    beta[T - 1, S - 1] = 0.0
    if S > 1:
        beta[T - 1, S - 2] = 0.0
    for t in range(T - 2, -1, -1):
        for s in range(S):
            b = beta[t + 1, s] + logp[t + 1, padded[s]]
            if s + 1 < S:
                b = logaddexp(b, beta[t + 1, s + 1] + logp[t + 1, padded[s + 1]])
            if s + 2 < S and padded[s + 2] != blank and padded[s + 2] != padded[s]:
                b = logaddexp(b, beta[t + 1, s + 2] + logp[t + 1, padded[s + 2]])
            beta[t, s] = b

    acc_arr = np.empty(C, dtype=np.float64)
    cdef double[::1] acc = acc_arr
    for t in range(T):
        for k in range(C):
            acc[k] = NEG_INF
        for s in range(S):
            v = alpha[t, s] + beta[t, s]
            if v > NEG_INF:
                acc[padded[s]] = logaddexp(acc[padded[s]], v)
        for k in range(C):
            if acc[k] > NEG_INF:
                grad[t, k] = -exp(acc[k] - log_total - logp[t, k])
    return -log_total, grad_arr


def levenshtein(long long[::1] a, long long[::1] b):
    cdef Py_ssize_t la = a.shape[0]
    cdef Py_ssize_t lb = b.shape[0]
    if la == 0:
        return lb
    if lb == 0:
        return la
    cdef Py_ssize_t i, j
    cdef long long cost, best
    prev_arr = np.arange(lb + 1, dtype=np.int64)
    cur_arr = np.empty(lb + 1, dtype=np.int64)
    cdef long long[::1] prev = prev_arr
    cdef long long[::1] cur = cur_arr
    for i in range(1, la + 1):
        cur[0] = i
        for j in range(1, lb + 1):
            cost = prev[j - 1] + (0 if a[i - 1] == b[j - 1] else 1)
            best = cur[j - 1] + 1
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cost < best:
                best = cost
            cur[j] = best
        prev_arr, cur_arr = cur_arr, prev_arr
        prev = prev_arr
        cur = cur_arr
    return int(prev[lb])
