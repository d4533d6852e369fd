"""Bivariate Gaussian values and closed-form operations.

Everything downstream (key likelihoods, fusion with observation
uncertainty, per-key touch models) is built on the three operations here:
log-density evaluation, the product-integral fusion of two Gaussians, and
maximum-likelihood fitting with a ridge term.

All likelihood arithmetic is in log domain (nats). Covariance inverses use
the closed-form 2x2 adjugate with a determinant guard; dimension is fixed
so there is no reason to pay for a general decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))

# Determinants below this are treated as singular.
DET_GUARD = 1e-12

# Default ridge (mm^2) added by fit_gaussian so small sample clouds stay
# positive definite; far below key-scale variance.
DEFAULT_RIDGE = 0.25


def _as_vec2(x) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(2)
    return v


def _as_cov2(m) -> np.ndarray:
    c = np.asarray(m, dtype=float).reshape(2, 2)
    return c


@dataclass(frozen=True)
class Gaussian2:
    """A bivariate Gaussian on the surface plane: mean in mm, cov in mm^2.

    cov must be symmetric (1e-12 abs) and positive semi-definite. The
    all-zero covariance is allowed and flagged deterministic: it stands for
    an exactly known location and is the zero-uncertainty limit used when
    decoding with uncertainty disabled.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _as_vec2(self.mean))
        object.__setattr__(self, "cov", _as_cov2(self.cov))
        c = self.cov
        if abs(c[0, 1] - c[1, 0]) > 1e-12:
            raise ValueError("covariance not symmetric")
        # PSD check for a symmetric 2x2: nonnegative trace terms and determinant.
        det = c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0]
        if c[0, 0] < -1e-12 or c[1, 1] < -1e-12 or det < -1e-12:
            raise ValueError("covariance not positive semi-definite")

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all(self.cov == 0.0))

    def to_json(self) -> dict:
        return {"mean": self.mean.tolist(), "cov": self.cov.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "Gaussian2":
        return cls(mean=obj["mean"], cov=obj["cov"])


@dataclass(frozen=True)
class FusionResult:
    """Output of fuse(): the log product-integral plus the product Gaussian.

    log_rho is the log of the closed-form integral of the two input
    densities; fused_mean/fused_cov describe the (renormalized) product.
    """

    log_rho: float
    fused_mean: np.ndarray = field(repr=False)
    fused_cov: np.ndarray = field(repr=False)


def _inv2(c: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    """Adjugate inverse of a 2x2 with determinant guard. Returns (inv, det)."""
    det = c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0]
    if det < DET_GUARD:
        raise ValueError(f"degenerate {what}")
    inv = np.array([[c[1, 1], -c[0, 1]], [-c[1, 0], c[0, 0]]]) / det
    return inv, float(det)


def log_pdf(g: Gaussian2, x) -> float:
    """log N(x | g.mean, g.cov) in nats; requires strictly PD covariance."""
    inv, det = _inv2(g.cov, "density")
    d = _as_vec2(x) - g.mean
    q = d @ inv @ d
    return float(-LOG_2PI - 0.5 * np.log(det) - 0.5 * q)


def fuse(obs: Gaussian2, key: Gaussian2) -> FusionResult:
    """Closed-form product integral of two bivariate Gaussians.

    log_rho = log N(obs.mean | key.mean, obs.cov + key.cov). The fused
    moments use the sum-inverse forms

        fused_cov  = A (A+B)^-1 B
        fused_mean = B (A+B)^-1 mu_A + A (A+B)^-1 mu_B

    which equal (A^-1 + B^-1)^-1 etc. when both inputs are invertible but
    stay valid when obs.cov is the zero matrix: the deterministic limit
    pins the fused result to the observation and log_rho becomes
    log_pdf(key, obs.mean) exactly.
    """
    s = obs.cov + key.cov
    inv_s, det_s = _inv2(s, "fusion")
    d = obs.mean - key.mean
    log_rho = float(-LOG_2PI - 0.5 * np.log(det_s) - 0.5 * (d @ inv_s @ d))
    fused_cov = obs.cov @ inv_s @ key.cov
    fused_cov = 0.5 * (fused_cov + fused_cov.T)  # kill round-off asymmetry
    fused_mean = key.cov @ inv_s @ obs.mean + obs.cov @ inv_s @ key.mean
    return FusionResult(log_rho=log_rho, fused_mean=fused_mean, fused_cov=fused_cov)


def fit_gaussian(samples, reg_epsilon: float = DEFAULT_RIDGE) -> Gaussian2:
    """Maximum-likelihood mean and full covariance, plus reg_epsilon * I.

    The ridge keeps degenerate clouds (e.g. repeated points) positive
    definite. Population covariance (divide by N), matching the ML
    estimator.
    """
    pts = np.asarray(samples, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 2:
        raise ValueError("insufficient samples")
    mean = pts.mean(axis=0)
    d = pts - mean
    cov = (d.T @ d) / pts.shape[0] + reg_epsilon * np.eye(2)
    return Gaussian2(mean=mean, cov=cov)
