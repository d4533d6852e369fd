"""Synthetic touch streams under the two-error model.

Each typed character produces a ground-truth contact sampled from the
per-key user Gaussian, and (unless dropped) an observation whose mean is
the contact plus per-finger sensing noise, with the generating variances
reported as the observation covariance ("well-calibrated" by default; the
calibration_scale knob mis-reports them to study decoder robustness).
Ghost observations appear at a configurable rate with uniform location
over the keyboard; finger confusion swaps the emitted finger class to an
adjacent finger. Observation frames trail ground truth by two frames (the
intended detection latency), plus optional integer jitter.

Everything is driven by one numpy Generator, so a (inputs, seed) pair is
fully reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .gaussians import Gaussian2
from .keyboard import KeyboardLayout, KeyTouchModel
from .losses import BLANK, N_CLASSES, FrameDistribution
from .decoder import TouchObservation

# Finger class ids, left hand then right, thumb to pinky order as columns:
LT, LI, LM, LR, LP, RT, RI, RM, RR, RP = range(10)
FINGER_NAMES = ("LT", "LI", "LM", "LR", "LP", "RT", "RI", "RM", "RR", "RP")

# Default per-finger mean position-error calibration targets (mm);
# index fingers track best, pinkies worst.
FINGER_ERROR_TARGETS_MM = {
    LT: 6.07, LI: 4.87, LM: 5.98, LR: 9.06, LP: 11.35,
    RT: 6.40, RI: 5.41, RM: 6.22, RR: 6.70, RP: 7.77,
}
OVERALL_ERROR_TARGET_MM = 6.30

# Per-axis sigma ratio used for pinky fingers (x noise dominates y);
# applied to both pinkies when calibrating anisotropic noise.
PINKY_SIGMA_RATIO = (11.6, 5.6)

# Standard touch-typing column assignment.
_FINGER_MAP = {
    LP: "qaz1", LR: "wsx2", LM: "edc3", LI: "rfvtgb45",
    RI: "yhnujm67", RM: "ik8,", RR: "ol9.", RP: "p0",
}
KEY_FINGER = {ch: fid for fid, chars in _FINGER_MAP.items() for ch in chars}

_RADIAL_MEAN_ISO = math.sqrt(math.pi / 2.0)  # E|N(0, s^2 I)| = s * sqrt(pi/2)


def finger_for_key(char: str, prev_finger: int | None = None) -> int:
    """Deterministic touch-typing finger for a key.

    Space goes to a thumb, alternating against the hand of the preceding
    character (right thumb when there is none).
    """
    if char == " ":
        if prev_finger is not None and prev_finger >= RT:
            return LT
        return RT
    try:
        return KEY_FINGER[char]
    except KeyError:
        raise ValueError(f"no finger assignment for key {char!r}")


def _hand(finger: int) -> int:
    return 0 if finger < RT else 1


def _adjacent_finger(finger: int, rng) -> int:
    """Neighboring finger on the same hand (thumb..pinky chain)."""
    lo = 0 if finger < RT else RT
    options = [f for f in (finger - 1, finger + 1) if lo <= f < lo + 5]
    return int(options[rng.integers(len(options))]) if len(options) > 1 else options[0]


def _finger_distribution(finger: int, peak: float = 0.9) -> FrameDistribution:
    probs = np.full(N_CLASSES, (1.0 - peak) / (N_CLASSES - 1))
    probs[finger] = peak
    return FrameDistribution(probs=probs)


def default_sensing_std() -> dict[int, tuple[float, float]]:
    """Isotropic per-finger sigmas hitting the error targets analytically;
    pinkies use the anisotropic x:y ratio."""
    out = {}
    for fid, target in FINGER_ERROR_TARGETS_MM.items():
        if fid in (LP, RP):
            rx, ry = PINKY_SIGMA_RATIO
            scale = target / expected_radial_error(rx, ry)
            out[fid] = (scale * rx, scale * ry)
        else:
            s = target / _RADIAL_MEAN_ISO
            out[fid] = (s, s)
    return out


def expected_radial_error(sx: float, sy: float, n: int = 200) -> float:
    """E ||(sx X, sy Y)||, X,Y iid standard normal, by Gauss-Legendre."""
    xs, w = np.polynomial.legendre.leggauss(n)
    lim = 8.0
    g = lim * xs
    gw = lim * w
    px = np.exp(-0.5 * g ** 2) / math.sqrt(2 * math.pi)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    r = np.hypot(sx * xx, sy * yy)
    return float(np.einsum("i,j,ij->", gw * px, gw * px, r))


@dataclass(frozen=True)
class NoiseProfile:
    """Noise sources for simulation.

    user_model overrides the key models passed to simulate() as the
    contact-point source; None uses them as-is. sensing_std maps finger id
    to per-axis sigma (mm). calibration_scale multiplies the *reported*
    variances only (1.0 = well calibrated).
    """

    sensing_std: dict[int, tuple[float, float]] = field(default_factory=default_sensing_std)
    user_model: KeyTouchModel | None = None
    miss_rate: float = 0.01
    ghost_rate: float = 0.005
    confusion_rate: float = 0.04
    frame_jitter: float = 0.0
    calibration_scale: float = 1.0

    def __post_init__(self):
        for r in (self.miss_rate, self.ghost_rate, self.confusion_rate):
            if not 0.0 <= r < 1.0:
                raise ValueError("rates must lie in [0, 1)")
        for fid, (sx, sy) in self.sensing_std.items():
            if sx < 0 or sy < 0:
                raise ValueError(f"finger {fid}: sigmas must be nonnegative")
        if self.frame_jitter < 0 or self.calibration_scale <= 0:
            raise ValueError("bad jitter or calibration scale")

    @classmethod
    def zero(cls) -> "NoiseProfile":
        """No sensing noise, no drops/ghosts/confusion, no jitter."""
        return cls(sensing_std={f: (0.0, 0.0) for f in range(10)},
                   miss_rate=0.0, ghost_rate=0.0, confusion_rate=0.0,
                   frame_jitter=0.0)

    def scaled(self, factor: float) -> "NoiseProfile":
        return replace(self, sensing_std={
            f: (sx * factor, sy * factor) for f, (sx, sy) in self.sensing_std.items()})

    def to_json(self) -> dict:
        return {
            "sensing_std": {str(f): [sx, sy] for f, (sx, sy) in self.sensing_std.items()},
            "miss_rate": self.miss_rate,
            "ghost_rate": self.ghost_rate,
            "confusion_rate": self.confusion_rate,
            "frame_jitter": self.frame_jitter,
            "calibration_scale": self.calibration_scale,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NoiseProfile":
        kwargs = {}
        if "sensing_std" in obj:
            kwargs["sensing_std"] = {int(f): (float(v[0]), float(v[1]))
                                     for f, v in obj["sensing_std"].items()}
        for field_name in ("miss_rate", "ghost_rate", "confusion_rate",
                           "frame_jitter", "calibration_scale"):
            if field_name in obj:
                kwargs[field_name] = float(obj[field_name])
        return cls(**kwargs)


@dataclass(frozen=True)
class GroundTruthEvent:
    frame: int
    char: str
    contact: np.ndarray
    finger: int

    def __post_init__(self):
        object.__setattr__(self, "contact",
                           np.asarray(self.contact, dtype=float).reshape(2))


def _sample_contact(rng, g: Gaussian2, chol_cache: dict) -> np.ndarray:
    if g.is_deterministic:
        return g.mean.copy()
    key = id(g)
    chol = chol_cache.get(key)
    if chol is None:
        chol = np.linalg.cholesky(g.cov)
        chol_cache[key] = chol
    return g.mean + chol @ rng.standard_normal(2)


def simulate(phrase: str, layout: KeyboardLayout, keys: KeyTouchModel,
             profile: NoiseProfile, seed: int,
             frame_spacing: int = 5, start_frame: int = 0,
             detection_latency: int = 2,
             ) -> tuple[list[GroundTruthEvent], list[TouchObservation]]:
    """Ground-truth events and noisy observations for one phrase."""
    for ch in phrase:
        if ch not in {k.id for k in layout.keys}:
            raise ValueError(f"phrase character {ch!r} not on the keyboard")
    rng = np.random.default_rng(seed)
    source = profile.user_model if profile.user_model is not None else keys
    chol_cache: dict = {}
    lo, hi = layout.bounding_box()

    truth: list[GroundTruthEvent] = []
    observations: list[TouchObservation] = []
    prev_finger: int | None = None
    frame = start_frame
    for i, ch in enumerate(phrase):
        finger = finger_for_key(ch, prev_finger)
        prev_finger = finger
        contact = _sample_contact(rng, source.gaussians[ch], chol_cache)
        truth.append(GroundTruthEvent(frame=frame, char=ch, contact=contact,
                                      finger=finger))
        if rng.random() >= profile.miss_rate:
            sx, sy = profile.sensing_std[finger]
            mean = contact + rng.normal(0.0, 1.0, 2) * (sx, sy)
            emitted = finger
            if profile.confusion_rate and rng.random() < profile.confusion_rate:
                emitted = _adjacent_finger(finger, rng)
            obs_frame = frame + detection_latency
            if profile.frame_jitter:
                obs_frame += int(round(rng.normal(0.0, profile.frame_jitter)))
            var = (profile.calibration_scale * sx ** 2,
                   profile.calibration_scale * sy ** 2)
            observations.append(TouchObservation(
                frame=obs_frame,
                finger_dist=_finger_distribution(emitted),
                location=Gaussian2(mean=mean, cov=np.diag(var)),
                source_ref=f"char:{i}"))
        if profile.ghost_rate and rng.random() < profile.ghost_rate:
            gfinger = int(rng.integers(0, 10))
            gmean = rng.uniform(lo, hi)
            sx, sy = profile.sensing_std[gfinger]
            var = (profile.calibration_scale * max(sx, 1e-3) ** 2,
                   profile.calibration_scale * max(sy, 1e-3) ** 2)
            observations.append(TouchObservation(
                frame=frame + detection_latency + frame_spacing // 2,
                finger_dist=_finger_distribution(gfinger),
                location=Gaussian2(mean=gmean, cov=np.diag(var)),
                source_ref=f"ghost:{i}"))
        frame += frame_spacing
    observations.sort(key=lambda o: o.frame)
    return truth, observations


def calibrate_sensing(targets: dict[int, float], seed: int = 0,
                      tolerance: float = 0.02, n_samples: int = 100_000,
                      max_iter: int = 200) -> dict[int, tuple[float, float]]:
    """Per-finger sigmas whose mean radial error hits the targets.

    Isotropic by default; pinkies keep the fixed x:y ratio. Solved by
    bisection on a scale factor against a fixed-seed Monte-Carlo estimate
    of the mean radial error (the draws are shared across bisection steps,
    so the objective is exactly monotone).
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_samples, 2))
    out: dict[int, tuple[float, float]] = {}
    for fid, target in sorted(targets.items()):
        if target <= 0:
            raise ValueError(f"finger {fid}: target must be positive")
        ratio = PINKY_SIGMA_RATIO if fid in (LP, RP) else (1.0, 1.0)
        base = float(np.mean(np.hypot(ratio[0] * z[:, 0], ratio[1] * z[:, 1])))
        lo, hi = target / base / 10.0, target / base * 10.0
        err = None
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            err = mid * base - target
            if abs(err) <= 0.25 * tolerance * target:
                break
            if err > 0:
                hi = mid
            else:
                lo = mid
        else:
            raise RuntimeError(
                f"calibration for finger {fid} did not converge: "
                f"target={target}, last error={err}")
        out[fid] = (mid * ratio[0], mid * ratio[1])
    return out
