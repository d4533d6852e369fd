"""Hot numeric kernels with a compiled core and a numpy fallback.

Three inner loops dominate the numeric work: batched per-key Gaussian
fusion (one observation against every key model), the CTC forward and
forward-backward passes, and Levenshtein distance for the error-rate
sweeps. Each has a Cython implementation in touchdecode._native and a
numpy implementation here; the backend is picked at import time.

Set TOUCHDECODE_PURE=1 to force the numpy path (used by the benchmark and
the equivalence tests).
"""

from __future__ import annotations

import os

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))
DET_GUARD = 1e-12
NEG_INF = float("-inf")

_FORCE_PURE = os.environ.get("TOUCHDECODE_PURE", "") not in ("", "0")
try:
    from . import _native  # type: ignore[attr-defined]
except ImportError:
    _native = None

ACTIVE_BACKEND = "python" if (_FORCE_PURE or _native is None) else "native"


def backend() -> str:
    """Name of the kernel backend in use: 'native' or 'python'."""
    return ACTIVE_BACKEND


# ---------------------------------------------------------------------------
# Batched Gaussian fusion
# ---------------------------------------------------------------------------

def fuse_log_rho_batch(obs_mean, obs_cov, key_means, key_covs) -> np.ndarray:
    """log N(obs_mean | key_mean_k, obs_cov + key_cov_k) for every key k.

    obs_mean: (2,), obs_cov: (2,2), key_means: (K,2), key_covs: (K,2,2).
    Raises ValueError if any summed covariance is singular.
    """
    obs_mean = np.ascontiguousarray(obs_mean, dtype=np.float64).reshape(2)
    obs_cov = np.ascontiguousarray(obs_cov, dtype=np.float64).reshape(2, 2)
    key_means = np.ascontiguousarray(key_means, dtype=np.float64).reshape(-1, 2)
    key_covs = np.ascontiguousarray(key_covs, dtype=np.float64).reshape(-1, 2, 2)
    if ACTIVE_BACKEND == "native":
        out = _native.fuse_log_rho_batch(obs_mean, obs_cov, key_means, key_covs)
        if np.isnan(out).any():
            raise ValueError("degenerate fusion")
        return out
    return _py_fuse_log_rho_batch(obs_mean, obs_cov, key_means, key_covs)


def _py_fuse_log_rho_batch(obs_mean, obs_cov, key_means, key_covs) -> np.ndarray:
    s = obs_cov[None, :, :] + key_covs
    det = s[:, 0, 0] * s[:, 1, 1] - s[:, 0, 1] * s[:, 1, 0]
    if np.any(det < DET_GUARD):
        raise ValueError("degenerate fusion")
    d = obs_mean[None, :] - key_means
    q = (d[:, 0] ** 2 * s[:, 1, 1] - 2.0 * d[:, 0] * d[:, 1] * s[:, 0, 1]
         + d[:, 1] ** 2 * s[:, 0, 0]) / det
    return -LOG_2PI - 0.5 * np.log(det) - 0.5 * q


# ---------------------------------------------------------------------------
# CTC forward / forward-backward
# ---------------------------------------------------------------------------

def _padded_labels(labels: np.ndarray, blank: int) -> np.ndarray:
    padded = np.full(2 * len(labels) + 1, blank, dtype=np.int64)
    padded[1::2] = labels
    return padded


def ctc_forward(probs, labels, blank: int) -> float:
    """-log sum over alignments, via the standard forward DP (log domain).

    probs: (T, C) per-frame class probabilities; labels: label id sequence.
    Returns +inf when no feasible alignment exists.
    """
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64).reshape(-1)
    if ACTIVE_BACKEND == "native":
        return float(_native.ctc_forward(probs, labels, blank))
    return _py_ctc_forward(probs, labels, blank)


def _log_probs(probs: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(probs)


def _py_ctc_forward(probs: np.ndarray, labels: np.ndarray, blank: int) -> float:
    T = probs.shape[0]
    padded = _padded_labels(labels, blank)
    S = len(padded)
    logp = _log_probs(probs)
    alpha = np.full(S, NEG_INF)
    alpha[0] = logp[0, padded[0]]
    if S > 1:
        alpha[1] = logp[0, padded[1]]
    for t in range(1, T):
        prev = alpha
        alpha = np.full(S, NEG_INF)
        for s in range(S):
            a = prev[s]
            if s >= 1:
                a = np.logaddexp(a, prev[s - 1])
            if s >= 2 and padded[s] != blank and padded[s] != padded[s - 2]:
                a = np.logaddexp(a, prev[s - 2])
            alpha[s] = a + logp[t, padded[s]]
    total = alpha[S - 1]
    if S > 1:
        total = np.logaddexp(total, alpha[S - 2])
    return float(-total)


def ctc_forward_backward(probs, labels, blank: int) -> tuple[float, np.ndarray]:
    """CTC loss plus its gradient w.r.t. the raw probability entries."""
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64).reshape(-1)
    if ACTIVE_BACKEND == "native":
        loss, grad = _native.ctc_forward_backward(probs, labels, blank)
        return float(loss), grad
    return _py_ctc_forward_backward(probs, labels, blank)


def _py_ctc_forward_backward(probs, labels, blank) -> tuple[float, np.ndarray]:
    T, C = probs.shape
    padded = _padded_labels(labels, blank)
    S = len(padded)
    logp = _log_probs(probs)

    alpha = np.full((T, S), NEG_INF)
    alpha[0, 0] = logp[0, padded[0]]
    if S > 1:
        alpha[0, 1] = logp[0, padded[1]]
    for t in range(1, T):
        for s in range(S):
            a = alpha[t - 1, s]
            if s >= 1:
                a = np.logaddexp(a, alpha[t - 1, s - 1])
            if s >= 2 and padded[s] != blank and padded[s] != padded[s - 2]:
                a = np.logaddexp(a, alpha[t - 1, s - 2])
            alpha[t, s] = a + logp[t, padded[s]]

    log_total = alpha[T - 1, S - 1]
    if S > 1:
        log_total = np.logaddexp(log_total, alpha[T - 1, S - 2])
    loss = float(-log_total)
    grad = np.zeros((T, C))
    if not np.isfinite(log_total):
        return loss, grad

    # beta excludes frame t's emission so alpha+beta counts each factor once.
    beta = np.full((T, S), NEG_INF)
    beta[T - 1, S - 1] = 0.0
    if S > 1:
        beta[T - 1, S - 2] = 0.0
    for t in range(T - 2, -1, -1):
        for s in range(S):
            b = beta[t + 1, s] + logp[t + 1, padded[s]]
            if s + 1 < S:
                b = np.logaddexp(b, beta[t + 1, s + 1] + logp[t + 1, padded[s + 1]])
            if s + 2 < S and padded[s + 2] != blank and padded[s + 2] != padded[s]:
                b = np.logaddexp(b, beta[t + 1, s + 2] + logp[t + 1, padded[s + 2]])
            beta[t, s] = b

    for t in range(T):
        acc = np.full(C, NEG_INF)
        for s in range(S):
            k = padded[s]
            v = alpha[t, s] + beta[t, s]
            if v > NEG_INF:
                acc[k] = np.logaddexp(acc[k], v)
        for k in range(C):
            if acc[k] > NEG_INF:
                grad[t, k] = -np.exp(acc[k] - log_total - logp[t, k])
    return loss, grad


# ---------------------------------------------------------------------------
# Levenshtein
# ---------------------------------------------------------------------------

def levenshtein(a, b) -> int:
    """Edit distance between two sequences (strings or int sequences)."""
    ia = _to_ids(a)
    ib = _to_ids(b)
    if ACTIVE_BACKEND == "native":
        return int(_native.levenshtein(ia, ib))
    return _py_levenshtein(ia, ib)


def _to_ids(seq) -> np.ndarray:
    if isinstance(seq, str):
        return np.fromiter((ord(c) for c in seq), dtype=np.int64, count=len(seq))
    return np.ascontiguousarray(seq, dtype=np.int64).reshape(-1)


def _py_levenshtein(a: np.ndarray, b: np.ndarray) -> int:
    if len(a) == 0:
        return len(b)
    if len(b) == 0:
        return len(a)
    prev = np.arange(len(b) + 1, dtype=np.int64)
    cur = np.empty_like(prev)
    for i in range(1, len(a) + 1):
        cur[0] = i
        sub = prev[:-1] + (b != a[i - 1])
        for j in range(1, len(b) + 1):
            cur[j] = min(cur[j - 1] + 1, prev[j] + 1, sub[j - 1])
        prev, cur = cur, prev
    return int(prev[-1])
