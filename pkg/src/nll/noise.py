"""Class-conditional label noise: transition matrices, noise rates, corruption.

The noise model is a row-stochastic K x K matrix T with
``T[i][j] = Pr[noisy label = j | true label = i]``; noisy labels depend on
the true class only, never on the features.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolation
from .rng import stream

ROW_SUM_TOL = 1e-9


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype).copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic matrix of label-flip probabilities.

    rows[i][j] = probability that a class-i sample receives noisy label j.
    Construction validates entries in [0, 1] and row sums within 1e-9 of 1;
    it never renormalizes silently (use :meth:`renormalized`).
    """

    rows: np.ndarray

    def __init__(self, rows):
        rows = _frozen_array(rows)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1] or rows.shape[0] < 2:
            raise ValueError(f"expected a square K x K matrix with K >= 2, got shape {rows.shape}")
        if np.any(rows < 0.0) or np.any(rows > 1.0):
            raise ValueError("transition probabilities must lie in [0, 1]")
        sums = rows.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
            bad = int(np.argmax(np.abs(sums - 1.0)))
            raise ValueError(f"row {bad} sums to {sums[bad]!r}, not 1 within {ROW_SUM_TOL}")
        object.__setattr__(self, "rows", rows)

    @property
    def k(self) -> int:
        return self.rows.shape[0]

    def renormalized(self) -> "TransitionMatrix":
        """Explicitly rescale each row to sum to exactly 1."""
        raw = np.asarray(self.rows, dtype=np.float64)
        return TransitionMatrix(raw / raw.sum(axis=1, keepdims=True))

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "rows": self.rows.tolist()}, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TransitionMatrix":
        doc = json.loads(text)
        t = cls(doc["rows"])
        if t.k != int(doc["k"]):
            raise ValueError(f"declared k={doc['k']} does not match {t.k} rows")
        return t

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "TransitionMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


@dataclass(frozen=True)
class ClassPrior:
    """Marginal distribution of the true class."""

    probs: np.ndarray

    def __init__(self, probs):
        probs = _frozen_array(probs)
        if probs.ndim != 1 or probs.shape[0] < 2:
            raise ValueError(f"expected a length-K vector with K >= 2, got shape {probs.shape}")
        if np.any(probs < 0.0):
            raise ValueError("class prior entries must be nonnegative")
        if abs(float(probs.sum()) - 1.0) > ROW_SUM_TOL:
            raise ValueError(f"class prior sums to {float(probs.sum())!r}, not 1 within {ROW_SUM_TOL}")
        object.__setattr__(self, "probs", probs)

    @property
    def k(self) -> int:
        return self.probs.shape[0]

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.probs > 0.0))

    @classmethod
    def uniform(cls, k: int) -> "ClassPrior":
        return cls(np.full(k, 1.0 / k))


def noise_rate(t: TransitionMatrix, prior: ClassPrior) -> float:
    """Total probability of observing a wrong label:
    ``1 - sum_i Pr[Y=i] * T[i][i]``."""
    if t.k != prior.k:
        raise ValueError(f"class count mismatch: matrix k={t.k}, prior k={prior.k}")
    return 1.0 - float(np.dot(prior.probs, np.diagonal(t.rows)))


def is_diagonally_dominant(t: TransitionMatrix) -> bool:
    """True iff each row's diagonal strictly exceeds every off-diagonal
    entry of that row.  Ties fail: strictness is what makes the clean
    labeling the unique noisy-accuracy maximizer."""
    rows = t.rows
    off = rows.copy()
    np.fill_diagonal(off, -np.inf)
    return bool(np.all(np.diagonal(rows) > off.max(axis=1)))


def dominance_margin(t: TransitionMatrix) -> float:
    """Smallest gap ``min_{i, j != i} (T[i][i] - T[i][j])`` between a
    diagonal entry and the off-diagonal entries of its row."""
    rows = t.rows
    off = rows.copy()
    np.fill_diagonal(off, -np.inf)
    return float(np.min(np.diagonal(rows) - off.max(axis=1)))


def require_dominant(t: TransitionMatrix) -> None:
    if not is_diagonally_dominant(t):
        raise AssumptionViolation("transition matrix is not strictly diagonally dominant")


def corrupt_labels(labels, t: TransitionMatrix, seed: int) -> np.ndarray:
    """Flip each label independently: label y is replaced by a draw from
    the categorical distribution ``t.rows[y]``.

    The draw depends only on the true class, never on features, and is
    deterministic given the seed.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= t.k):
        raise ValueError(f"labels must lie in [0, {t.k}), got range [{labels.min()}, {labels.max()}]")
    rng = stream(seed, "corrupt-labels")
    return draw_noisy_labels(labels, t, rng)


def draw_noisy_labels(labels: np.ndarray, t: TransitionMatrix, rng: np.random.Generator) -> np.ndarray:
    """Vectorized categorical draw of noisy labels from an existing stream."""
    if labels.size == 0:
        return labels.copy()
    cum = np.cumsum(t.rows, axis=1)
    u = rng.random(labels.shape[0])
    # inverse CDF: label j iff cum[j-1] <= u < cum[j]
    out = (u[:, None] >= cum[labels]).sum(axis=1)
    return np.minimum(out, t.k - 1).astype(np.int64)


def uniform_noise(k: int, rate: float) -> TransitionMatrix:
    """Symmetric noise: keep the label with probability 1 - rate, otherwise
    flip uniformly to one of the K - 1 other classes.

    Requires ``0 <= rate < (K-1)/K`` so the result stays strictly
    diagonally dominant.
    """
    if k < 2:
        raise ValueError("need at least 2 classes")
    if not 0.0 <= rate < (k - 1) / k:
        raise ValueError(f"uniform noise rate must lie in [0, {(k - 1) / k}), got {rate}")
    rows = np.full((k, k), rate / (k - 1))
    np.fill_diagonal(rows, 1.0 - rate)
    return TransitionMatrix(rows)


def pair_noise(k: int, rate: float) -> TransitionMatrix:
    """Asymmetric noise: flip each class into the next one circularly with
    the given probability; all other off-diagonal entries are zero.

    Requires ``0 <= rate < 0.5`` to preserve strict diagonal dominance.
    """
    if k < 2:
        raise ValueError("need at least 2 classes")
    if not 0.0 <= rate < 0.5:
        raise ValueError(f"pair noise rate must lie in [0, 0.5), got {rate}")
    rows = np.zeros((k, k))
    np.fill_diagonal(rows, 1.0 - rate)
    for i in range(k):
        rows[i][(i + 1) % k] = rate
    return TransitionMatrix(rows)
