"""Exact ground truth on discrete worlds by exhaustive enumeration.

On a finite support every deterministic classifier is an assignment of one
class per point, so distribution accuracies are exact sums and the best
classifier can be found by scanning all K^s assignments.  This module is
the independent verification engine for the robustness and bound claims.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import Classifier, ConfusionMatrix
from .data import DiscreteDistribution, LabeledDataset
from .errors import CapacityError
from .noise import TransitionMatrix

ENUMERATION_CAP = 10**7
_CHUNK = 1 << 16


@dataclass(frozen=True)
class DiscreteClassifier(Classifier):
    """One class index per support point of a discrete world."""

    assignment: np.ndarray
    world: DiscreteDistribution

    def __init__(self, assignment, world: DiscreteDistribution):
        assignment = np.asarray(assignment, dtype=np.int64).copy()
        if assignment.shape != (world.size,):
            raise ValueError(
                f"assignment length {assignment.shape} does not match {world.size} support points"
            )
        if assignment.min() < 0 or assignment.max() >= world.k:
            raise ValueError(f"assignment entries must lie in [0, {world.k})")
        assignment.flags.writeable = False
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "world", world)
        object.__setattr__(self, "k", world.k)

    def predict_scores(self, features) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        single = features.ndim == 1
        rows = features[None, :] if single else features
        labels = self.assignment[self.world.point_index(rows)]
        scores = np.zeros((rows.shape[0], self.k))
        scores[np.arange(rows.shape[0]), labels] = 1.0
        return scores[0] if single else scores


def true_labeling(d: DiscreteDistribution) -> DiscreteClassifier:
    """The globally optimal classifier: predicts every point's true class."""
    return DiscreteClassifier(d.true_labels, d)


def exact_clean_accuracy(h: DiscreteClassifier, d: DiscreteDistribution) -> float:
    """Probability of agreeing with the true label:
    ``sum_x p(x) * 1(h(x) = y(x))``."""
    _check_world(h, d)
    agree = h.assignment == d.true_labels
    return math.fsum(p for p, a in zip(d.point_probs, agree) if a)


def exact_noisy_accuracy(h: DiscreteClassifier, d: DiscreteDistribution, t: TransitionMatrix) -> float:
    """Probability of agreeing with the noisy label:
    ``sum_x p(x) * T[y(x)][h(x)]``."""
    _check_world(h, d)
    if t.k != d.k:
        raise ValueError(f"class count mismatch: world k={d.k}, matrix k={t.k}")
    return math.fsum(t.rows[y][a] * p for y, a, p in zip(d.true_labels, h.assignment, d.point_probs))


def exact_confusion(h: DiscreteClassifier, d: DiscreteDistribution) -> ConfusionMatrix:
    """Exact per-true-class prediction distribution from the point masses."""
    _check_world(h, d)
    prior = np.zeros(d.k)
    np.add.at(prior, d.true_labels, d.point_probs)
    if np.any(prior == 0.0):
        raise ValueError("every class must have positive prior mass")
    counts = np.zeros((d.k, d.k))
    np.add.at(counts, (d.true_labels, h.assignment), d.point_probs)
    return ConfusionMatrix(counts / prior[:, None], np.ones(d.k, dtype=bool))


def _check_world(h: DiscreteClassifier, d: DiscreteDistribution) -> None:
    if h.assignment.shape[0] != d.size or h.k != d.k:
        raise ValueError("classifier and world shapes do not match")


def _per_point_values(d: DiscreteDistribution, objective: str, t, sample) -> np.ndarray:
    """values[x][c] = contribution to the objective of assigning class c at
    point x; every assignment's objective is the sum of its picks."""
    if objective == "clean":
        values = np.zeros((d.size, d.k))
        values[np.arange(d.size), d.true_labels] = d.point_probs
        return values
    if objective == "noisy":
        if t is None:
            raise ValueError("noisy objective requires a transition matrix")
        if t.k != d.k:
            raise ValueError(f"class count mismatch: world k={d.k}, matrix k={t.k}")
        return d.point_probs[:, None] * t.rows[d.true_labels]
    if objective == "empirical":
        if sample is None:
            raise ValueError("empirical objective requires a sample")
        if len(sample) == 0:
            raise ValueError("empirical objective requires a nonempty sample")
        idx = d.point_index(sample.features)
        counts = np.zeros((d.size, d.k))
        np.add.at(counts, (idx, sample.labels), 1.0)
        return counts / len(sample)
    raise ValueError(f"unknown objective {objective!r}; expected clean, noisy, or empirical")


def enumerate_best(
    d: DiscreteDistribution,
    objective: str = "clean",
    t: TransitionMatrix | None = None,
    sample: LabeledDataset | None = None,
    tie_tol: float = 1e-12,
) -> tuple[DiscreteClassifier, float, bool]:
    """Exhaustively scan all K^s assignments for the objective maximizer.

    Returns (maximizer, value, is_unique); ties within ``tie_tol`` count
    against uniqueness and resolve to the lexicographically smallest
    assignment.  Worlds beyond 10^7 assignments raise :class:`CapacityError`
    rather than silently truncating.
    """
    values = _per_point_values(d, objective, t, sample)
    s, k = values.shape
    total = k**s
    if total > ENUMERATION_CAP:
        raise CapacityError(f"{k}^{s} = {total} assignments exceeds the cap of {ENUMERATION_CAP}")

    # digit x of an id is the class at point x; point 0 is the most
    # significant digit so id order is lexicographic order
    place = k ** np.arange(s - 1, -1, -1, dtype=np.int64)
    best_value = -np.inf
    best_id = -1
    n_ties = 0
    point_idx = np.arange(s)
    for start in range(0, total, _CHUNK):
        ids = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (ids[:, None] // place[None, :]) % k
        totals = values[point_idx[None, :], digits].sum(axis=1)
        chunk_best = float(totals.max())
        if chunk_best > best_value + tie_tol:
            best_value = chunk_best
            best_id = int(ids[int(np.argmax(totals))])
            n_ties = int(np.sum(totals >= best_value - tie_tol))
        elif chunk_best >= best_value - tie_tol:
            n_ties += int(np.sum(totals >= best_value - tie_tol))

    assignment = (best_id // place) % k
    return DiscreteClassifier(assignment, d), best_value, n_ties == 1
