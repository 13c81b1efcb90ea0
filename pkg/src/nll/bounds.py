"""Closed-form evaluators for the accuracy-robustness guarantees.

Everything here is an exact formula: the noisy-accuracy decomposition and
its 1 - eps ceiling, the gap identity and the convergence-rate bound it
implies, the VC-dimension generalization bound, and the Hoeffding
validation bound (with a Monte-Carlo auditor for the latter).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import Classifier, ConfusionMatrix
from .data import DiscreteDistribution
from .errors import AssumptionViolation
from .noise import ClassPrior, TransitionMatrix, dominance_margin, draw_noisy_labels, noise_rate, require_dominant
from .rng import stream


@dataclass(frozen=True)
class BoundParams:
    """Inputs to the sample-complexity bounds.

    ``d_vc`` is always supplied by the caller; nothing in this toolkit
    computes a VC dimension.  For the lookup family on an s-point support
    with binary labels, ``d_vc = s`` is exact.
    """

    d_vc: float
    delta: float
    m: int
    n: int = 1

    def __post_init__(self):
        if self.d_vc <= 0:
            raise ValueError("d_vc must be positive")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")
        if self.m < 1 or self.n < 1:
            raise ValueError("sample counts must be >= 1")


def _check_dims(c: ConfusionMatrix, t: TransitionMatrix, prior: ClassPrior) -> None:
    if not (c.k == t.k == prior.k):
        raise ValueError(f"class count mismatch: confusion k={c.k}, matrix k={t.k}, prior k={prior.k}")
    if not np.all(c.present):
        raise ValueError("confusion matrix has undefined rows (classes absent from evaluation)")


def noisy_accuracy(c: ConfusionMatrix, t: TransitionMatrix, prior: ClassPrior) -> float:
    """Accuracy on the noisy distribution of a classifier with confusion c:
    ``sum_i Pr[Y=i] * sum_j T[i][j] * C[i][j]``."""
    _check_dims(c, t, prior)
    return float(np.dot(prior.probs, (t.rows * c.rows).sum(axis=1)))


def max_noisy_accuracy(t: TransitionMatrix, prior: ClassPrior) -> float:
    """Ceiling of noisy-distribution accuracy over all classifiers: 1 - eps,
    attained exactly when the confusion matrix is the identity.  Requires a
    strictly diagonally dominant matrix and a strictly positive prior."""
    if t.k != prior.k:
        raise ValueError(f"class count mismatch: matrix k={t.k}, prior k={prior.k}")
    require_dominant(t)
    if not prior.strictly_positive:
        raise AssumptionViolation("class prior must be strictly positive")
    return 1.0 - noise_rate(t, prior)


def noisy_gap_identity(c: ConfusionMatrix, t: TransitionMatrix, prior: ClassPrior) -> float:
    """Off-diagonal form of the distance to the noisy-accuracy ceiling:
    ``sum_{i, j != i} Pr[Y=i] * (T[i][i] - T[i][j]) * C[i][j]``.

    Equals ``max_noisy_accuracy - noisy_accuracy`` identically.
    """
    _check_dims(c, t, prior)
    diff = np.diagonal(t.rows)[:, None] - t.rows
    np.fill_diagonal(diff, 0.0)
    off = c.rows.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.dot(prior.probs, (diff * off).sum(axis=1)))


def clean_accuracy_lower_bound(noisy_gap: float, t: TransitionMatrix) -> float:
    """Convergence rate of the robustness guarantee: clean accuracy is at
    least ``1 - noisy_gap / min_{i, j != i}(T[i][i] - T[i][j])``, clamped
    to 0."""
    if noisy_gap < 0:
        raise ValueError("noisy_gap must be nonnegative")
    require_dominant(t)
    return max(0.0, 1.0 - noisy_gap / dominance_margin(t))


def generalization_gap_bound(p: BoundParams) -> float:
    """One-sided uniform deviation between training accuracy and noisy-
    distribution accuracy for a hypothesis class of VC dimension d_vc:
    ``sqrt(8 * (d_vc * (ln(2m / d_vc) + 1) + ln(4 / delta)) / m)``,
    holding with probability at least 1 - delta over the m-sample."""
    if 2.0 * p.m <= p.d_vc:
        raise ValueError(f"need 2m > d_vc for a positive logarithm (m={p.m}, d_vc={p.d_vc})")
    inner = p.d_vc * (math.log(2.0 * p.m / p.d_vc) + 1.0) + math.log(4.0 / p.delta)
    return math.sqrt(8.0 * inner / p.m)


def validation_gap_bound(n: int, delta: float) -> float:
    """One-sided Hoeffding deviation of the validation accuracy of a fixed
    classifier on n held-out noisy samples: ``sqrt(ln(1 / delta) / (2n))``,
    holding with probability at least 1 - delta."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    return math.sqrt(math.log(1.0 / delta) / (2.0 * n))


def selection_validation_gap_bound(n: int, delta: float, num_candidates: int) -> float:
    """Bonferroni extension of the validation bound to selecting among
    ``num_candidates`` checkpoints: the fixed-classifier guarantee does not
    cover post-selection use, so this applies it at delta / num_candidates
    simultaneously to every candidate."""
    if num_candidates < 1:
        raise ValueError("num_candidates must be >= 1")
    return validation_gap_bound(n, delta / num_candidates)


def audit_validation_bound(
    h: Classifier,
    d: DiscreteDistribution,
    t: TransitionMatrix,
    n: int,
    delta: float,
    trials: int,
    seed: int,
) -> float:
    """Monte-Carlo audit of the validation bound for a FIXED classifier.

    Draws ``trials`` independent noisy validation sets of size n from the
    (world, noise) pair, compares each empirical accuracy to the exact
    noisy-distribution accuracy, and returns how often the one-sided bound
    failed.  The result must not exceed delta, up to binomial fluctuation.
    """
    from .oracle import DiscreteClassifier, exact_noisy_accuracy

    if trials < 1:
        raise ValueError("trials must be >= 1")
    bound = validation_gap_bound(n, delta)
    if isinstance(h, DiscreteClassifier):
        assignment = h.assignment
    else:
        assignment = np.asarray(h.predict(d.points), dtype=np.int64)
    exact = exact_noisy_accuracy(DiscreteClassifier(assignment, d), d, t)

    violations = 0
    for trial in range(trials):
        rng = stream(seed, "audit-trial", trial)
        idx = rng.choice(d.size, size=n, p=d.point_probs)
        noisy = draw_noisy_labels(d.true_labels[idx], t, rng)
        val_acc = float(np.mean(assignment[idx] == noisy))
        if exact - val_acc < -bound:
            violations += 1
    return violations / trials
