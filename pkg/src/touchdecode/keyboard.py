"""Key geometry, the surface coordinate system, and per-key touch models.

Coordinates are millimetres on the surface plane, origin at the midpoint
between the F and G key centers, x to the typist's right, y away from the
typist. The default layout is a 19 mm pitch QWERTY with standard row
stagger: relative to the home row, the q-row sits 0.25 pitch left, the
digit row 0.75 pitch left, and the z-row 0.5 pitch right.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .gaussians import DEFAULT_RIDGE, Gaussian2, fit_gaussian

LAYOUT_SCHEMA = "touchdecode-layout/1"
KEYMODEL_SCHEMA = "touchdecode-keymodel/1"

DEFAULT_PITCH = 19.0
DEFAULT_KEY_SIZE = 17.0

ROW_TOP = "qwertyuiop"
ROW_HOME = "asdfghjkl"
ROW_BOTTOM = "zxcvbnm,."
ROW_DIGITS = "1234567890"

# Character vocabulary: everything typeable, space included.
CHAR_VOCAB = sorted(set(ROW_TOP + ROW_HOME + ROW_BOTTOM + ROW_DIGITS + " "))


@dataclass(frozen=True)
class Key:
    id: str
    center: np.ndarray
    width: float
    height: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(2))
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"key {self.id!r}: width/height must be positive")

    def contains(self, point) -> bool:
        """Boundary-inclusive on min edges, exclusive on max edges."""
        x, y = float(point[0]), float(point[1])
        return (self.center[0] - self.width / 2 <= x < self.center[0] + self.width / 2
                and self.center[1] - self.height / 2 <= y < self.center[1] + self.height / 2)


@dataclass(frozen=True)
class KeyboardLayout:
    keys: tuple[Key, ...]
    pitch: float = DEFAULT_PITCH

    def __post_init__(self):
        ids = [k.id for k in self.keys]
        if len(set(ids)) != len(ids):
            raise ValueError("key ids must be unique")
        self._check_no_overlap()
        object.__setattr__(self, "_by_id", {k.id: k for k in self.keys})
        object.__setattr__(self, "_centers", np.stack([k.center for k in self.keys]))
        object.__setattr__(self, "_sorted_ids", sorted(ids))

    def _check_no_overlap(self):
        ks = self.keys
        for i in range(len(ks)):
            for j in range(i + 1, len(ks)):
                a, b = ks[i], ks[j]
                if (abs(a.center[0] - b.center[0]) < (a.width + b.width) / 2
                        and abs(a.center[1] - b.center[1]) < (a.height + b.height) / 2):
                    raise ValueError(f"keys {a.id!r} and {b.id!r} overlap")

    def key(self, key_id: str) -> Key:
        return self._by_id[key_id]

    @property
    def ids(self) -> list[str]:
        return [k.id for k in self.keys]

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        los = np.stack([k.center - (k.width / 2, k.height / 2) for k in self.keys])
        his = np.stack([k.center + (k.width / 2, k.height / 2) for k in self.keys])
        return los.min(axis=0), his.max(axis=0)

    def to_json(self) -> dict:
        return {
            "schema": LAYOUT_SCHEMA,
            "pitch": self.pitch,
            "keys": [
                {"id": k.id, "cx": float(k.center[0]), "cy": float(k.center[1]),
                 "w": k.width, "h": k.height}
                for k in self.keys
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "KeyboardLayout":
        if obj.get("schema") != LAYOUT_SCHEMA:
            raise ValueError(f"unexpected layout schema: {obj.get('schema')!r}")
        keys = tuple(
            Key(id=k["id"], center=(k["cx"], k["cy"]), width=k["w"], height=k["h"])
            for k in obj["keys"]
        )
        return cls(keys=keys, pitch=float(obj.get("pitch", DEFAULT_PITCH)))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, indent=1)

    @classmethod
    def load(cls, path) -> "KeyboardLayout":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


def default_layout(pitch: float = DEFAULT_PITCH,
                   key_size: float = DEFAULT_KEY_SIZE,
                   top_stagger: float = -0.25,
                   bottom_stagger: float = 0.5,
                   digit_stagger: float = -0.75) -> KeyboardLayout:
    """QWERTY layout with the origin at the F/G midpoint.

    Home-row key i sits at x=(i-3.5)*pitch so that f=-pitch/2 and
    g=+pitch/2. Stagger values are offsets (in pitches) of the other rows
    relative to the home row; y grows away from the typist, one pitch per
    row. The space bar is an ordinary key, 6 pitches wide, centered below
    the bottom row.
    """
    rows = [
        (ROW_DIGITS, digit_stagger, 2.0),
        (ROW_TOP, top_stagger, 1.0),
        (ROW_HOME, 0.0, 0.0),
        (ROW_BOTTOM, bottom_stagger, -1.0),
    ]
    keys = []
    for chars, stagger, row in rows:
        for i, ch in enumerate(chars):
            cx = (i - 3.5 + stagger) * pitch
            keys.append(Key(id=ch, center=(cx, row * pitch),
                            width=key_size, height=key_size))
    keys.append(Key(id=" ", center=(0.0, -2.0 * pitch),
                    width=6.0 * pitch, height=key_size))
    return KeyboardLayout(keys=tuple(keys), pitch=pitch)


def nearest_key(layout: KeyboardLayout, point) -> str:
    """Key whose center is closest (Euclidean); ties go to the smaller id."""
    p = np.asarray(point, dtype=float).reshape(2)
    d2 = np.sum((layout._centers - p) ** 2, axis=1)
    best = np.min(d2)
    candidates = [layout.keys[i].id for i in np.flatnonzero(d2 <= best + 1e-12)]
    return min(candidates)


def contact_key(layout: KeyboardLayout, point) -> str | None:
    """Key whose rectangle contains the point, or None in a gap/outside."""
    for k in layout.keys:
        if k.contains(point):
            return k.id
    return None


@dataclass(frozen=True)
class KeyTouchModel:
    """Per-key touch distributions p(location | intended key).

    Fitted models (fit_key_models, from_json) are positive definite per
    key. A zero-covariance model from deterministic_key_models is a valid
    *simulation source* but cannot be decoded against; the decoder calls
    require_positive_definite up front.
    """

    gaussians: dict[str, Gaussian2]
    counts: dict[str, int]
    fallback_keys: tuple[str, ...] = field(default=())

    def require_positive_definite(self):
        for kid, g in self.gaussians.items():
            det = g.cov[0, 0] * g.cov[1, 1] - g.cov[0, 1] * g.cov[1, 0]
            if det <= 0 or g.cov[0, 0] <= 0:
                raise ValueError(f"key {kid!r}: covariance not positive definite")
        return self

    def arrays(self, key_ids) -> tuple[np.ndarray, np.ndarray]:
        """Stacked means (K,2) and covariances (K,2,2) for the given keys."""
        means = np.stack([self.gaussians[k].mean for k in key_ids])
        covs = np.stack([self.gaussians[k].cov for k in key_ids])
        return means, covs

    def to_json(self) -> dict:
        return {
            "schema": KEYMODEL_SCHEMA,
            "keys": {
                kid: {**g.to_json(), "count": self.counts.get(kid, 0)}
                for kid, g in self.gaussians.items()
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "KeyTouchModel":
        if obj.get("schema") != KEYMODEL_SCHEMA:
            raise ValueError(f"unexpected key-model schema: {obj.get('schema')!r}")
        gaussians = {kid: Gaussian2.from_json(v) for kid, v in obj["keys"].items()}
        counts = {kid: int(v.get("count", 0)) for kid, v in obj["keys"].items()}
        return cls(gaussians=gaussians, counts=counts)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, indent=1)

    @classmethod
    def load(cls, path) -> "KeyTouchModel":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


def default_prior(layout: KeyboardLayout, key_id: str,
                  sigma_fraction: float = 0.25) -> Gaussian2:
    """Fallback per-key Gaussian: key center, sigma = 0.25 * pitch per axis.

    Keeps roughly 95% of touches within one key of the target.
    """
    sigma = sigma_fraction * layout.pitch
    return Gaussian2(mean=layout.key(key_id).center, cov=sigma ** 2 * np.eye(2))


def fit_key_models(layout: KeyboardLayout, labeled_touches,
                   min_samples: int = 5,
                   reg_epsilon: float = DEFAULT_RIDGE) -> KeyTouchModel:
    """Fit a Gaussian per key; under-sampled keys fall back to the prior."""
    by_key: dict[str, list] = {k.id: [] for k in layout.keys}
    for kid, pt in labeled_touches:
        if kid not in by_key:
            raise ValueError(f"touch labeled with unknown key {kid!r}")
        by_key[kid].append(pt)
    gaussians = {}
    counts = {}
    fallbacks = []
    for kid in layout.ids:
        pts = by_key[kid]
        counts[kid] = len(pts)
        if len(pts) >= min_samples:
            gaussians[kid] = fit_gaussian(pts, reg_epsilon=reg_epsilon)
        else:
            gaussians[kid] = default_prior(layout, kid)
            fallbacks.append(kid)
    return KeyTouchModel(gaussians=gaussians, counts=counts,
                         fallback_keys=tuple(fallbacks))


def deterministic_key_models(layout: KeyboardLayout) -> KeyTouchModel:
    """Zero-covariance model: every touch lands exactly on the key center."""
    gaussians = {k.id: Gaussian2(mean=k.center, cov=np.zeros((2, 2)))
                 for k in layout.keys}
    return KeyTouchModel(gaussians=gaussians, counts={k: 0 for k in gaussians})
