"""Synthetic datasets: the 8-point tabular world, circles, moons.

Generators are pure functions of (parameters, seed).  The on-disk dataset
format is CSV with header ``x0,...,x{d-1},label``; features are written
with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .noise import ClassPrior, TransitionMatrix, draw_noisy_labels
from .rng import stream


@dataclass(frozen=True)
class LabeledDataset:
    """A finite sample of (feature vector, class label) pairs."""

    features: np.ndarray  # (m, d) float64
    labels: np.ndarray    # (m,) int64
    k: int

    def __init__(self, features, labels, k: int):
        features = np.asarray(features, dtype=np.float64).copy()
        labels = np.asarray(labels, dtype=np.int64).copy()
        if features.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {features.shape}")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise ValueError(
                f"labels length {labels.shape} does not match {features.shape[0]} feature rows"
            )
        if k < 2:
            raise ValueError("need at least 2 classes")
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise ValueError(f"labels must lie in [0, {k})")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "k", int(k))

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def with_labels(self, labels) -> "LabeledDataset":
        return LabeledDataset(self.features, labels, self.k)


@dataclass(frozen=True)
class DiscreteDistribution:
    """An exactly representable distribution on a finite feature support.

    Each support point carries a probability mass and a deterministic true
    label, so accuracies of classifiers on this world can be computed in
    closed form.  Noisy versions are modeled jointly with a
    :class:`TransitionMatrix`.
    """

    points: np.ndarray       # (s, d) float64
    point_probs: np.ndarray  # (s,) float64
    true_labels: np.ndarray  # (s,) int64
    k: int

    def __init__(self, points, point_probs, true_labels, k: int):
        points = np.asarray(points, dtype=np.float64).copy()
        point_probs = np.asarray(point_probs, dtype=np.float64).copy()
        true_labels = np.asarray(true_labels, dtype=np.int64).copy()
        if points.ndim != 2 or points.shape[0] == 0:
            raise ValueError("points must be a nonempty (s, d) array")
        s = points.shape[0]
        if point_probs.shape != (s,) or true_labels.shape != (s,):
            raise ValueError("point_probs and true_labels must each have one entry per point")
        if np.any(point_probs < 0.0):
            raise ValueError("point probabilities must be nonnegative")
        if abs(float(point_probs.sum()) - 1.0) > 1e-12:
            raise ValueError(f"point probabilities sum to {float(point_probs.sum())!r}, not 1")
        if len({row.tobytes() for row in points}) != s:
            raise ValueError("support points must be pairwise distinct")
        if k < 2 or true_labels.min() < 0 or true_labels.max() >= k:
            raise ValueError(f"true labels must lie in [0, {k})")
        for arr in (points, point_probs, true_labels):
            arr.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "point_probs", point_probs)
        object.__setattr__(self, "true_labels", true_labels)
        object.__setattr__(self, "k", int(k))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def class_prior(self) -> ClassPrior:
        probs = np.zeros(self.k)
        np.add.at(probs, self.true_labels, self.point_probs)
        return ClassPrior(probs)

    def point_index(self, features: np.ndarray) -> np.ndarray:
        """Map feature rows to support-point indices (exact float match)."""
        table = {row.tobytes(): i for i, row in enumerate(self.points)}
        features = np.asarray(features, dtype=np.float64)
        out = np.empty(features.shape[0], dtype=np.int64)
        for i, row in enumerate(features):
            idx = table.get(row.tobytes())
            if idx is None:
                raise ValueError(f"feature row {row.tolist()} is not a support point")
            out[i] = idx
        return out

    def to_json(self) -> str:
        doc = {
            "k": self.k,
            "points": self.points.tolist(),
            "point_probs": self.point_probs.tolist(),
            "true_labels": self.true_labels.tolist(),
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DiscreteDistribution":
        doc = json.loads(text)
        return cls(doc["points"], doc["point_probs"], doc["true_labels"], int(doc["k"]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "DiscreteDistribution":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def tabular_world() -> DiscreteDistribution:
    """The 8-point binary world: X = {(1, +-2), (2, +-2), (1, +-1), (2, +-1)}
    with uniform mass 1/8; points with positive second coordinate are
    class 0, the rest class 1."""
    points = [(1, 2), (2, 2), (1, 1), (2, 1), (1, -1), (2, -1), (1, -2), (2, -2)]
    labels = [0, 0, 0, 0, 1, 1, 1, 1]
    return DiscreteDistribution(points, np.full(8, 0.125), labels, 2)


def _split_counts(m: int) -> tuple[int, int]:
    # exact class balance: ceil(m/2) for class 0, floor(m/2) for class 1
    return m - m // 2, m // 2


def make_circles(m: int, noise_sigma: float, seed: int) -> LabeledDataset:
    """Two concentric circles: class 0 on radius 1.0, class 1 on radius 0.5,
    plus isotropic Gaussian jitter of std ``noise_sigma``."""
    if m < 2:
        raise ValueError("need at least 2 samples")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    rng = stream(seed, "circles")
    n0, n1 = _split_counts(m)
    theta = rng.uniform(0.0, 2.0 * np.pi, m)
    radius = np.concatenate([np.full(n0, 1.0), np.full(n1, 0.5)])
    features = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)
    if noise_sigma > 0:
        features = features + rng.normal(0.0, noise_sigma, features.shape)
    labels = np.concatenate([np.zeros(n0, np.int64), np.ones(n1, np.int64)])
    return LabeledDataset(features, labels, 2)


def make_moons(m: int, noise_sigma: float, seed: int) -> LabeledDataset:
    """Two interleaving half-circles: class 0 at (cos t, sin t), class 1 at
    (1 - cos t, 0.5 - sin t) for t uniform on [0, pi], plus Gaussian jitter."""
    if m < 2:
        raise ValueError("need at least 2 samples")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    rng = stream(seed, "moons")
    n0, n1 = _split_counts(m)
    t0 = rng.uniform(0.0, np.pi, n0)
    t1 = rng.uniform(0.0, np.pi, n1)
    features = np.concatenate(
        [
            np.stack([np.cos(t0), np.sin(t0)], axis=1),
            np.stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)], axis=1),
        ]
    )
    if noise_sigma > 0:
        features = features + rng.normal(0.0, noise_sigma, features.shape)
    labels = np.concatenate([np.zeros(n0, np.int64), np.ones(n1, np.int64)])
    return LabeledDataset(features, labels, 2)


def sample_iid(d: DiscreteDistribution, m: int, t: TransitionMatrix, seed: int) -> LabeledDataset:
    """Draw m i.i.d. samples: a support point from the point masses, paired
    with a noisy label drawn from the point's true-class transition row."""
    if d.k != t.k:
        raise ValueError(f"class count mismatch: world k={d.k}, matrix k={t.k}")
    if m < 0:
        raise ValueError("sample count must be nonnegative")
    rng = stream(seed, "sample-iid")
    idx = rng.choice(d.size, size=m, p=d.point_probs)
    noisy = draw_noisy_labels(d.true_labels[idx], t, rng)
    return LabeledDataset(d.points[idx], noisy, d.k)


def split(ds: LabeledDataset, val_fraction: float, seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Disjoint train/validation partition: round(m * (1 - f)) training rows,
    the rest validation, over a seed-determined permutation."""
    if not 0.0 < val_fraction < 1.0:
        raise ValueError(f"val_fraction must lie in (0, 1), got {val_fraction}")
    m = len(ds)
    n_train = int(round(m * (1.0 - val_fraction)))
    perm = stream(seed, "split").permutation(m)
    tr, va = perm[:n_train], perm[n_train:]
    return (
        LabeledDataset(ds.features[tr], ds.labels[tr], ds.k),
        LabeledDataset(ds.features[va], ds.labels[va], ds.k),
    )


DATASET_KINDS = ("tabular", "circles", "moons")


def make_dataset(kind: str, m: int, noise_sigma: float, seed: int) -> LabeledDataset:
    """Uniform front door for the generators; ``tabular`` draws clean samples
    from the 8-point world (sigma is ignored)."""
    if kind == "circles":
        return make_circles(m, noise_sigma, seed)
    if kind == "moons":
        return make_moons(m, noise_sigma, seed)
    if kind == "tabular":
        world = tabular_world()
        rng = stream(seed, "sample-iid")
        idx = rng.choice(world.size, size=m, p=world.point_probs)
        return LabeledDataset(world.points[idx], world.true_labels[idx], world.k)
    raise ValueError(f"unknown dataset kind {kind!r}; expected one of {DATASET_KINDS}")


def write_dataset(ds: LabeledDataset, path) -> None:
    """Write CSV with header ``x0,...,x{d-1},label``; features via repr so
    they parse back bit-identically."""
    cols = [f"x{j}" for j in range(ds.dim)] + ["label"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for row, label in zip(ds.features, ds.labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{int(label)}\n")


def read_dataset(path, k: int | None = None) -> LabeledDataset:
    """Read a dataset CSV; k defaults to max(label) + 1 (at least 2)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[-1] != "label" or any(c != f"x{j}" for j, c in enumerate(header[:-1])):
            raise ValueError(f"unexpected dataset header {header!r}")
        d = len(header) - 1
        feats, labels = [], []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            feats.append([float(v) for v in parts[:d]])
            labels.append(int(parts[d]))
    features = np.asarray(feats, dtype=np.float64).reshape(len(labels), d)
    if k is None:
        k = max(2, (max(labels) + 1) if labels else 2)
    return LabeledDataset(features, labels, k)
