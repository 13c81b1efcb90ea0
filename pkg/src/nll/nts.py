"""Noisy-best teacher and student: model selection on a noisy validation set.

Two steps: train on the given noisy labels and keep the checkpoint with the
highest noisy-validation accuracy (the teacher, NT); relabel the training
inputs with the teacher's hard predictions, retrain with the identical
configuration, and select the student (NS) the same way.  Clean-test
numbers are diagnostics only; selection never sees them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .classify import Classifier
from .data import LabeledDataset
from .mlp import CheckpointRecord, MlpClassifier, TrainConfig, train_mlp


class _SelectionView(NamedTuple):
    # deliberately excludes clean_test_acc: selection cannot read it
    step: int
    noisy_val_acc: float


def select_best(checkpoints: Sequence[CheckpointRecord]) -> CheckpointRecord:
    """Checkpoint with maximal noisy-validation accuracy; ties go to the
    earliest step (simple, correct patterns are learned first, so the
    earlier of two equally validated checkpoints is preferred)."""
    if len(checkpoints) == 0:
        raise ValueError("no checkpoints to select from")
    views = []
    for rec in checkpoints:
        if rec.noisy_val_acc is None:
            raise ValueError(f"checkpoint at step {rec.step} has no validation accuracy")
        views.append(_SelectionView(rec.step, rec.noisy_val_acc))
    best = 0
    for i in range(1, len(views)):
        if views[i].noisy_val_acc > views[best].noisy_val_acc or (
            views[i].noisy_val_acc == views[best].noisy_val_acc and views[i].step < views[best].step
        ):
            best = i
    return checkpoints[best]


def relabel(teacher: Classifier, train_inputs: LabeledDataset) -> LabeledDataset:
    """Replace every label with the teacher's hard prediction; the original
    labels are discarded."""
    predictions = teacher.predict(train_inputs.features)
    return train_inputs.with_labels(predictions)


@dataclass
class NtsReport:
    """Both checkpoint trails, the selected steps, and (when a clean test
    set was supplied) diagnostic clean-test accuracies of the teacher's
    last checkpoint, NT, and NS."""

    teacher_checkpoints: list[CheckpointRecord]
    student_checkpoints: list[CheckpointRecord]
    nt_step: int
    ns_step: int
    last_epoch_acc: float | None = None
    nt_acc: float | None = None
    ns_acc: float | None = None

    @property
    def nt(self) -> CheckpointRecord:
        return next(c for c in self.teacher_checkpoints if c.step == self.nt_step)

    @property
    def ns(self) -> CheckpointRecord:
        return next(c for c in self.student_checkpoints if c.step == self.ns_step)

    def to_json_dict(self) -> dict:
        def trail(records):
            cols = ["step", "train_acc", "loss", "noisy_val_acc", "clean_test_acc"]
            rows = [
                [r.step, r.train_acc, r.loss, r.noisy_val_acc, r.clean_test_acc]
                for r in records
            ]
            return {"columns": cols, "rows": rows}

        return {
            "nt_step": self.nt_step,
            "ns_step": self.ns_step,
            "last_epoch_acc": self.last_epoch_acc,
            "nt_acc": self.nt_acc,
            "ns_acc": self.ns_acc,
            "teacher_checkpoints": trail(self.teacher_checkpoints),
            "student_checkpoints": trail(self.student_checkpoints),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


def _fill_clean_test(checkpoints: list[CheckpointRecord], clean_test: LabeledDataset) -> None:
    for rec in checkpoints:
        clf = MlpClassifier(rec.params)
        rec.clean_test_acc = float(np.mean(clf.predict(clean_test.features) == clean_test.labels))


def run_nts(
    train: LabeledDataset,
    val: LabeledDataset,
    cfg: TrainConfig,
    clean_test: LabeledDataset | None = None,
) -> NtsReport:
    """Run the two-step pipeline.

    The student trains on the teacher-relabeled training inputs only; the
    validation set keeps its original noisy labels for both selections.
    Teacher and student share the identical configuration, seed included.
    """
    if len(train) == 0 or len(val) == 0:
        raise ValueError("train and validation sets must be nonempty")
    if train.dim != val.dim or train.k != val.k:
        raise ValueError("train and validation sets must share feature dimension and class count")

    _, teacher_ckpts = train_mlp(train, cfg, monitor=val)
    if not teacher_ckpts:
        raise RuntimeError("teacher training produced no checkpoints")
    nt = select_best(teacher_ckpts)
    teacher = MlpClassifier(nt.params)

    student_train = relabel(teacher, train)
    _, student_ckpts = train_mlp(student_train, cfg, monitor=val)
    if not student_ckpts:
        raise RuntimeError("student training produced no checkpoints")
    ns = select_best(student_ckpts)

    report = NtsReport(
        teacher_checkpoints=teacher_ckpts,
        student_checkpoints=student_ckpts,
        nt_step=nt.step,
        ns_step=ns.step,
    )
    if clean_test is not None:
        _fill_clean_test(teacher_ckpts, clean_test)
        _fill_clean_test(student_ckpts, clean_test)
        report.last_epoch_acc = teacher_ckpts[-1].clean_test_acc
        report.nt_acc = nt.clean_test_acc
        report.ns_acc = ns.clean_test_acc
    return report
