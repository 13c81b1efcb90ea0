"""Classifier abstraction plus accuracy and confusion-matrix evaluation."""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset


class Classifier(abc.ABC):
    """A deterministic classifier over feature vectors.

    ``predict_scores`` maps a (d,) vector to a (k,) score vector, or an
    (m, d) batch to (m, k).  ``predict`` takes the argmax with ties broken
    toward the lowest class index.
    """

    k: int

    @abc.abstractmethod
    def predict_scores(self, features) -> np.ndarray: ...

    def predict(self, features) -> np.ndarray:
        scores = self.predict_scores(features)
        return np.argmax(scores, axis=-1)


class ConstantClassifier(Classifier):
    """Predicts one fixed class everywhere."""

    def __init__(self, label: int, k: int):
        if not 0 <= label < k:
            raise ValueError(f"label {label} outside [0, {k})")
        self.label = int(label)
        self.k = int(k)

    def predict_scores(self, features) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        shape = (self.k,) if features.ndim == 1 else (features.shape[0], self.k)
        scores = np.zeros(shape)
        scores[..., self.label] = 1.0
        return scores


class LookupClassifier(Classifier):
    """Memorizing classifier: at any feature vector exactly equal to a
    training point it predicts the modal training label seen there (ties to
    the lowest class index); everywhere else it predicts ``default``."""

    def __init__(self, counts: dict[bytes, np.ndarray], k: int, default: int):
        self.k = int(k)
        self.default = int(default)
        self._labels = {key: int(np.argmax(c)) for key, c in counts.items()}

    def predict_scores(self, features) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        single = features.ndim == 1
        rows = features[None, :] if single else features
        scores = np.zeros((rows.shape[0], self.k))
        for i, row in enumerate(rows):
            scores[i, self._labels.get(row.tobytes(), self.default)] = 1.0
        return scores[0] if single else scores


def lookup_classifier(train: LabeledDataset, tie_break: str = "lowest", default: int = 0) -> LookupClassifier:
    """Build a memorizing lookup table from a training set.

    Only the ``lowest`` class-index tie rule is defined; it keeps the map
    total and deterministic.
    """
    if tie_break != "lowest":
        raise ValueError(f"unsupported tie_break rule {tie_break!r}")
    if not 0 <= default < train.k:
        raise ValueError(f"default class {default} outside [0, {train.k})")
    counts: dict[bytes, np.ndarray] = {}
    for row, label in zip(train.features, train.labels):
        key = row.tobytes()
        if key not in counts:
            counts[key] = np.zeros(train.k, dtype=np.int64)
        counts[key][label] += 1
    return LookupClassifier(counts, train.k, default)


def accuracy(h: Classifier, ds: LabeledDataset) -> float:
    """Fraction of samples with h(x) == y."""
    if len(ds) == 0:
        raise ValueError("cannot evaluate accuracy on an empty dataset")
    return float(np.mean(h.predict(ds.features) == ds.labels))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Per-true-class prediction frequencies.

    rows[i][j] = fraction of class-i samples predicted as j.  Rows of
    classes absent from the evaluation set are NaN and flagged in
    ``present``.
    """

    rows: np.ndarray
    present: np.ndarray
    k: int

    def __init__(self, rows, present):
        rows = np.asarray(rows, dtype=np.float64).copy()
        present = np.asarray(present, dtype=bool).copy()
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1] or present.shape != (rows.shape[0],):
            raise ValueError("confusion rows must be K x K with a K-length presence mask")
        rows.flags.writeable = False
        present.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "present", present)
        object.__setattr__(self, "k", rows.shape[0])

    @classmethod
    def identity(cls, k: int) -> "ConfusionMatrix":
        return cls(np.eye(k), np.ones(k, dtype=bool))


def label_confusion(predicted, true, k: int) -> ConfusionMatrix:
    """Confusion of one labeling against another: rows indexed by the true
    label, columns by the prediction."""
    predicted = np.asarray(predicted, dtype=np.int64)
    true = np.asarray(true, dtype=np.int64)
    if predicted.shape != true.shape:
        raise ValueError("prediction and truth lengths differ")
    counts = np.zeros((k, k))
    np.add.at(counts, (true, predicted), 1.0)
    totals = counts.sum(axis=1)
    present = totals > 0
    rows = np.full((k, k), np.nan)
    rows[present] = counts[present] / totals[present, None]
    return ConfusionMatrix(rows, present)


def confusion(h: Classifier, ds: LabeledDataset) -> ConfusionMatrix:
    """Empirical confusion of a classifier on a dataset carrying true labels."""
    if len(ds) == 0:
        raise ValueError("cannot evaluate confusion on an empty dataset")
    return label_confusion(h.predict(ds.features), ds.labels, ds.k)
