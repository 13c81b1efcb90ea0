"""From-scratch MLP trained by (full-batch) SGD on softmax cross-entropy.

Rectifier hidden layers, raw output scores, He-style seeded initialization.
Plain constant-rate gradient descent: the point of this model family is
that unregularized accuracy maximization is enough, so there is no weight
decay, no momentum, no adaptive optimizer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .classify import Classifier
from .data import LabeledDataset
from .errors import TrainingDiverged
from .rng import stream


@dataclass(frozen=True)
class MlpParams:
    """Weights and biases of a fully connected rectifier network."""

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __init__(self, layer_sizes, weights, biases):
        layer_sizes = tuple(int(s) for s in layer_sizes)
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output layers")
        weights = tuple(np.asarray(w, dtype=np.float64) for w in weights)
        biases = tuple(np.asarray(b, dtype=np.float64) for b in biases)
        expected = list(zip(layer_sizes, layer_sizes[1:]))
        if [w.shape for w in weights] != expected:
            raise ValueError(f"weight shapes {[w.shape for w in weights]} do not match sizes {layer_sizes}")
        if [b.shape for b in biases] != [(n,) for _, n in expected]:
            raise ValueError("bias shapes do not match layer sizes")
        for arr in (*weights, *biases):
            if not np.all(np.isfinite(arr)):
                raise ValueError("parameters must be finite")
        object.__setattr__(self, "layer_sizes", layer_sizes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def k(self) -> int:
        return self.layer_sizes[-1]

    def copy(self) -> "MlpParams":
        return MlpParams(self.layer_sizes, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def to_json(self) -> str:
        doc = {
            "kind": "mlp",
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.ravel().tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MlpParams":
        doc = json.loads(text)
        sizes = [int(s) for s in doc["layer_sizes"]]
        weights = [
            np.asarray(flat, dtype=np.float64).reshape(a, b)
            for flat, (a, b) in zip(doc["weights"], zip(sizes, sizes[1:]))
        ]
        return cls(sizes, weights, doc["biases"])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "MlpParams":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters.

    ``batch_size=None`` means full-batch gradient descent (the default
    protocol for the synthetic experiments).  ``stop_when_train_perfect``
    ends training at the first checkpoint whose training accuracy is
    exactly 1.0, since the 0-1 objective cannot improve further.
    """

    max_steps: int = 20000
    learning_rate: float = 0.1
    batch_size: int | None = None
    seed: int = 0
    checkpoint_every: int = 50
    hidden_sizes: tuple[int, ...] = (32, 32)
    stop_when_train_perfect: bool = False

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1 or None")
        if self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be >= 1")
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))

    def to_json_dict(self) -> dict:
        return {
            "max_steps": self.max_steps,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "checkpoint_every": self.checkpoint_every,
            "hidden_sizes": list(self.hidden_sizes),
            "stop_when_train_perfect": self.stop_when_train_perfect,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "TrainConfig":
        cfg = cls()
        known = cfg.to_json_dict().keys()
        unknown = set(doc) - set(known)
        if unknown:
            raise ValueError(f"unknown training config keys: {sorted(unknown)}")
        merged = {**cfg.to_json_dict(), **doc}
        merged["hidden_sizes"] = tuple(merged["hidden_sizes"])
        return cls(**merged)

    @classmethod
    def load(cls, path) -> "TrainConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=seed)


@dataclass
class CheckpointRecord:
    """Snapshot of a training run at one step.

    Model selection reads only ``step`` and ``noisy_val_acc``;
    ``clean_test_acc`` is diagnostic and never consulted for selection.
    """

    step: int
    params: MlpParams
    train_acc: float
    loss: float
    noisy_val_acc: float | None = None
    clean_test_acc: float | None = None


def init_params(layer_sizes, seed: int) -> MlpParams:
    """He-style fan-in-scaled Gaussian weights, zero biases."""
    rng = stream(seed, "mlp-init")
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(layer_sizes, weights, biases)


def forward_scores(weights, biases, features: np.ndarray) -> np.ndarray:
    h = features
    for w, b in zip(weights[:-1], biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
    return h @ weights[-1] + biases[-1]


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    ez = np.exp(z)
    return ez / ez.sum(axis=1, keepdims=True)


def cross_entropy(weights, biases, features, labels) -> float:
    scores = forward_scores(weights, biases, features)
    z = scores - scores.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    return float(np.mean(lse - z[np.arange(len(labels)), labels]))


def loss_and_grads(weights, biases, features, labels):
    """Mean softmax cross-entropy and its gradients by backpropagation."""
    m = features.shape[0]
    activations = [features]
    h = features
    for w, b in zip(weights[:-1], biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
        activations.append(h)
    scores = h @ weights[-1] + biases[-1]

    z = scores - scores.max(axis=1, keepdims=True)
    ez = np.exp(z)
    sum_ez = ez.sum(axis=1, keepdims=True)
    loss = float(np.mean(np.log(sum_ez[:, 0]) - z[np.arange(m), labels]))

    delta = ez / sum_ez
    delta[np.arange(m), labels] -= 1.0
    delta /= m

    grads_w = [None] * len(weights)
    grads_b = [None] * len(biases)
    for layer in range(len(weights) - 1, -1, -1):
        grads_w[layer] = activations[layer].T @ delta
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ weights[layer].T
            delta[activations[layer] <= 0.0] = 0.0
    return loss, grads_w, grads_b


class MlpClassifier(Classifier):
    """Frozen trained parameters exposed through the classifier interface."""

    def __init__(self, params: MlpParams):
        self.params = params
        self.k = params.k

    def predict_scores(self, features) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        single = features.ndim == 1
        rows = features[None, :] if single else features
        scores = forward_scores(self.params.weights, self.params.biases, rows)
        return scores[0] if single else scores


def train_mlp(
    train: LabeledDataset,
    cfg: TrainConfig,
    monitor: LabeledDataset | None = None,
) -> tuple[MlpParams, list[CheckpointRecord]]:
    """Train an MLP of shape [d, *hidden, k] and record periodic checkpoints.

    Checkpoints are taken after every ``checkpoint_every``-th update and at
    the final step; each holds a parameter snapshot, training accuracy, the
    training loss, and (if ``monitor`` is given) accuracy on the monitor
    set.  Deterministic given (data, config).  A non-finite loss raises
    :class:`TrainingDiverged` carrying the last finite checkpoint.
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    if monitor is not None and monitor.dim != train.dim:
        raise ValueError("monitor feature dimension does not match training data")
    layer_sizes = (train.dim, *cfg.hidden_sizes, train.k)
    params = init_params(layer_sizes, cfg.seed)
    weights = [w.copy() for w in params.weights]
    biases = [b.copy() for b in params.biases]

    features, labels = train.features, train.labels
    m = len(train)
    batch_rng = stream(cfg.seed, "mlp-batches") if cfg.batch_size is not None else None
    perm = None
    pos = 0

    checkpoints: list[CheckpointRecord] = []

    def record(step: int) -> CheckpointRecord:
        snap = MlpParams(layer_sizes, [w.copy() for w in weights], [b.copy() for b in biases])
        clf = MlpClassifier(snap)
        train_acc = float(np.mean(clf.predict(features) == labels))
        loss_now = cross_entropy(weights, biases, features, labels)
        val_acc = None
        if monitor is not None:
            val_acc = float(np.mean(clf.predict(monitor.features) == monitor.labels))
        rec = CheckpointRecord(step=step, params=snap, train_acc=train_acc, loss=loss_now, noisy_val_acc=val_acc)
        checkpoints.append(rec)
        return rec

    step = 0
    for step in range(1, cfg.max_steps + 1):
        if cfg.batch_size is None or cfg.batch_size >= m:
            xb, yb = features, labels
        else:
            if perm is None or pos + cfg.batch_size > m:
                perm = batch_rng.permutation(m)
                pos = 0
            idx = perm[pos : pos + cfg.batch_size]
            pos += cfg.batch_size
            xb, yb = features[idx], labels[idx]

        loss, grads_w, grads_b = loss_and_grads(weights, biases, xb, yb)
        if not np.isfinite(loss):
            raise TrainingDiverged(step, checkpoints[-1] if checkpoints else None)
        if cfg.learning_rate != 0.0:
            for w, gw in zip(weights, grads_w):
                w -= cfg.learning_rate * gw
            for b, gb in zip(biases, grads_b):
                b -= cfg.learning_rate * gb

        if step % cfg.checkpoint_every == 0 or step == cfg.max_steps:
            rec = record(step)
            if not np.isfinite(rec.loss):
                checkpoints.pop()
                raise TrainingDiverged(step, checkpoints[-1] if checkpoints else None)
            if cfg.stop_when_train_perfect and rec.train_acc == 1.0:
                break

    final = checkpoints[-1].params
    return final, checkpoints
