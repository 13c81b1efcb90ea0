"""Noisy-label learning toolkit.

Models class-conditional label noise exactly, verifies by brute-force
enumeration that maximizing accuracy on the noisy distribution recovers
the clean-optimal classifier (with ceiling 1 - noise rate), evaluates and
stress-tests the matching VC and Hoeffding sample bounds, reproduces the
three training regimes on synthetic data, and implements noisy-validation
model selection (noisy-best teacher/student).
"""

from .classify import Classifier, ConfusionMatrix, ConstantClassifier, accuracy, confusion, label_confusion, lookup_classifier
from .data import DiscreteDistribution, LabeledDataset, make_circles, make_moons, sample_iid, split, tabular_world
from .errors import AssumptionViolation, CapacityError, TrainingDiverged
from .mlp import CheckpointRecord, MlpClassifier, MlpParams, TrainConfig, train_mlp
from .noise import ClassPrior, TransitionMatrix, corrupt_labels, is_diagonally_dominant, noise_rate, pair_noise, uniform_noise
from .nts import NtsReport, relabel, run_nts, select_best
from .oracle import DiscreteClassifier, enumerate_best, exact_clean_accuracy, exact_confusion, exact_noisy_accuracy

__all__ = [
    "AssumptionViolation",
    "CapacityError",
    "CheckpointRecord",
    "Classifier",
    "ClassPrior",
    "ConfusionMatrix",
    "ConstantClassifier",
    "DiscreteClassifier",
    "DiscreteDistribution",
    "LabeledDataset",
    "MlpClassifier",
    "MlpParams",
    "NtsReport",
    "TrainConfig",
    "TrainingDiverged",
    "TransitionMatrix",
    "accuracy",
    "confusion",
    "corrupt_labels",
    "enumerate_best",
    "exact_clean_accuracy",
    "exact_confusion",
    "exact_noisy_accuracy",
    "is_diagonally_dominant",
    "label_confusion",
    "lookup_classifier",
    "make_circles",
    "make_moons",
    "noise_rate",
    "pair_noise",
    "relabel",
    "run_nts",
    "sample_iid",
    "select_best",
    "split",
    "tabular_world",
    "train_mlp",
    "uniform_noise",
]
