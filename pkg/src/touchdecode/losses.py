"""Training objectives for touch-event sequence models, with gradients.

Covers the combined objective used to supervise a touch estimator: a CTC
term over finger-class frames, a delayed cross-entropy term pinning event
timing, and a variance-weighted Gaussian NLL for location with
stop-gradient beta weighting. Gradients are hand-derived (no autodiff
dependency) and checked against finite differences in the test suite.

Losses are sums, not means, over events and samples; batch averaging is
the caller's concern.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels

# Class layout of a frame distribution: ten fingers then the blank class.
N_FINGERS = 10
BLANK = 10
N_CLASSES = 11


@dataclass(frozen=True)
class LossConfig:
    """Weights and timing for the combined objective.

    Defaults: unit weight on the CTC term, 0.01 on the offset
    cross-entropy, 0.001 on the location NLL, beta 0.9, and a 2-frame
    event offset.
    """

    alpha_c: float = 1.0
    alpha_e: float = 0.01
    alpha_x: float = 0.001
    beta: float = 0.9
    d: int = 2

    def __post_init__(self):
        if self.alpha_c < 0 or self.alpha_e < 0 or self.alpha_x < 0:
            raise ValueError("loss weights must be nonnegative")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.d < 0:
            raise ValueError("frame offset d must be nonnegative")


@dataclass(frozen=True)
class FrameDistribution:
    """Per-frame probability distribution over the 11 classes."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(N_CLASSES)
        object.__setattr__(self, "probs", p)
        if np.any(p < 0):
            raise ValueError("frame probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("frame probabilities must sum to 1")

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.probs))


@dataclass(frozen=True)
class LocationPrediction:
    """Predicted touch location: mean (mm) and per-axis variance (mm^2)."""

    mean: np.ndarray
    var: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float).reshape(2))
        v = np.asarray(self.var, dtype=float).reshape(2)
        object.__setattr__(self, "var", v)
        if np.any(v <= 0):
            raise ValueError("variances must be positive")


@dataclass(frozen=True)
class CtcLoss:
    """CTC loss value; infeasible label/length pairs give value=inf."""

    value: float
    feasible: bool


@dataclass(frozen=True)
class OffsetXentLoss:
    """Offset cross-entropy value plus the count of out-of-bounds events."""

    value: float
    skipped: int


def _frames_array(frames) -> np.ndarray:
    if len(frames) and isinstance(frames[0], FrameDistribution):
        arr = np.stack([f.probs for f in frames])
    else:
        arr = np.asarray(frames, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != N_CLASSES:
        raise ValueError(f"frames must be (T, {N_CLASSES})")
    return arr


def ctc_feasible(num_frames: int, labels: Sequence[int]) -> bool:
    """True when at least one valid alignment exists: the frame count must
    cover every label plus a separating blank between each repeated pair."""
    required = len(labels) + sum(
        1 for a, b in zip(labels, labels[1:]) if a == b
    )
    return num_frames >= required


def ctc_loss(frames, labels: Sequence[int]) -> CtcLoss:
    """Negative log total alignment probability (nats), log-domain forward DP.

    labels are finger class ids (blank is implicit). Infeasible instances
    return +inf with feasible=False rather than raising.
    """
    probs = _frames_array(frames)
    labels = list(labels)
    if not labels:
        raise ValueError("labels must be non-empty")
    if any(not 0 <= l < N_FINGERS for l in labels):
        raise ValueError("labels must be finger class ids (0..9)")
    if not ctc_feasible(probs.shape[0], labels):
        return CtcLoss(value=float("inf"), feasible=False)
    value = kernels.ctc_forward(probs, np.asarray(labels), BLANK)
    return CtcLoss(value=value, feasible=True)


def ctc_grad(frames, labels: Sequence[int]) -> np.ndarray:
    """Gradient of ctc_loss w.r.t. the raw probability entries, shape (T, 11)."""
    probs = _frames_array(frames)
    labels = list(labels)
    if not labels:
        raise ValueError("labels must be non-empty")
    if not ctc_feasible(probs.shape[0], labels):
        return np.zeros_like(probs)
    _, grad = kernels.ctc_forward_backward(probs, np.asarray(labels), BLANK)
    return grad


def offset_xent_loss(frames, ground_truth_events: Sequence[tuple[int, int]],
                     d: int) -> OffsetXentLoss:
    """-sum log p(finger at frame event+d) over in-bounds events.

    Events whose shifted frame falls outside the sequence are skipped and
    counted, never an error.
    """
    probs = _frames_array(frames)
    T = probs.shape[0]
    total = 0.0
    skipped = 0
    for frame, finger in ground_truth_events:
        t = frame + d
        if not 0 <= t < T:
            skipped += 1
            continue
        p = probs[t, finger]
        with np.errstate(divide="ignore"):
            total -= float(np.log(p))
    return OffsetXentLoss(value=total, skipped=skipped)


def _pred_arrays(preds: Sequence[LocationPrediction]) -> tuple[np.ndarray, np.ndarray]:
    means = np.stack([p.mean for p in preds]) if preds else np.zeros((0, 2))
    variances = np.stack([p.var for p in preds]) if preds else np.zeros((0, 2))
    return means, variances


def beta_nll_loss(preds: Sequence[LocationPrediction], targets, beta: float) -> float:
    """Variance-weighted diagonal Gaussian NLL.

    Each per-axis term (0.5 log var + sq_err / (2 var)) is weighted by
    var**beta; the weight acts as a constant under differentiation
    (stop-gradient), which is what beta_nll_grad implements. beta=0 is the
    plain NLL up to the constant.
    """
    means, variances = _pred_arrays(preds)
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    if means.shape != targets.shape:
        raise ValueError("preds and targets must have matching lengths")
    if np.any(variances <= 0):
        raise ValueError("variances must be positive")
    w = variances ** beta
    terms = w * (0.5 * np.log(variances) + (targets - means) ** 2 / (2.0 * variances))
    return float(terms.sum())


def beta_nll_grad(preds: Sequence[LocationPrediction], targets,
                  beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of beta_nll_loss w.r.t. means and variances, weight frozen."""
    means, variances = _pred_arrays(preds)
    targets = np.asarray(targets, dtype=float).reshape(-1, 2)
    if means.shape != targets.shape:
        raise ValueError("preds and targets must have matching lengths")
    if np.any(variances <= 0):
        raise ValueError("variances must be positive")
    w = variances ** beta
    d_mean = w * (means - targets) / variances
    d_var = w * (0.5 / variances - (targets - means) ** 2 / (2.0 * variances ** 2))
    return d_mean, d_var


def combined_loss(cfg: LossConfig, frames, labels,
                  ground_truth_events, preds, targets) -> float:
    """Weighted sum of the three objectives under one config."""
    total = 0.0
    if cfg.alpha_c:
        total += cfg.alpha_c * ctc_loss(frames, labels).value
    if cfg.alpha_e:
        total += cfg.alpha_e * offset_xent_loss(frames, ground_truth_events, cfg.d).value
    if cfg.alpha_x:
        total += cfg.alpha_x * beta_nll_loss(preds, targets, cfg.beta)
    return total
