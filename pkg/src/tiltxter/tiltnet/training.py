"""Training loop, evaluation, and learning-curve bookkeeping.

Training is single-threaded and fully deterministic for a given seed:
mini-batch order comes from one seeded generator and every floating-point
reduction happens in a fixed order, so repeated runs yield bit-identical
parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..simulate import DatasetRecord
from .layers import PlateauScheduler, SgdMomentum, cross_entropy
from .model import TiltNet


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 64
    lr: float = 0.01
    momentum: float = 0.9
    plateau_factor: float = 0.1
    plateau_patience: int = 5
    min_lr: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if not 0.0 < self.plateau_factor < 1.0:
            raise ValueError("plateau_factor must lie in (0, 1)")


@dataclass
class TrainReport:
    """Per-epoch learning curves plus final test-time results."""

    train_loss: list[float] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    learning_rate: list[float] = field(default_factory=list)
    best_epoch: int = -1
    test_accuracy: float = float("nan")
    confusion: np.ndarray | None = None

    def curves_rows(self) -> list[tuple]:
        """(epoch, train_loss, train_acc, val_loss, val_acc, lr) rows for CSV."""
        return [
            (i + 1, self.train_loss[i], self.train_accuracy[i],
             self.val_loss[i], self.val_accuracy[i], self.learning_rate[i])
            for i in range(len(self.train_loss))
        ]


def records_to_arrays(records: Sequence[DatasetRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Stack records into (N, 2, 10, 10) forces and (N,) label indices."""
    x = np.stack([rec.biframe.stacked() for rec in records])
    y = np.array([rec.label.index for rec in records], dtype=np.int64)
    return x, y


def _epoch_pass(model: TiltNet, x, y, batch_size, optimizer=None):
    """One pass over the data; trains when an optimizer is given."""
    training = optimizer is not None
    total_loss = 0.0
    correct = 0
    for start in range(0, len(x), batch_size):
        xb = x[start:start + batch_size]
        yb = y[start:start + batch_size]
        if training and len(xb) < 2:
            continue  # batchnorm cannot train on a singleton remainder
        logits, caches = model.forward(xb, training=training)
        loss, dlogits = cross_entropy(logits, yb)
        total_loss += loss * len(xb)
        correct += int((logits.argmax(axis=1) == yb).sum())
        if training:
            grads = model.backward(dlogits, caches)
            optimizer.step(model.params, {k: grads[k] for k in model.params})
    return total_loss / len(x), correct / len(x)


def train(model: TiltNet, train_set: Sequence[DatasetRecord], val_set: Sequence[DatasetRecord],
          cfg: TrainConfig = TrainConfig()) -> tuple[TiltNet, TrainReport]:
    """Fit the model; returns it restored to its best-validation epoch.

    Batch statistics drive the batchnorm layers during updates; validation
    always runs in eval mode on the running statistics.  "Best" means
    highest validation accuracy, earliest epoch on ties.
    """
    if not train_set or not val_set:
        raise ValueError("train and validation sets must be non-empty")
    x_train, y_train = records_to_arrays(train_set)
    x_val, y_val = records_to_arrays(val_set)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    optimizer = SgdMomentum(lr=cfg.lr, momentum=cfg.momentum)
    scheduler = PlateauScheduler(lr=cfg.lr, factor=cfg.plateau_factor,
                                 patience=cfg.plateau_patience, min_lr=cfg.min_lr)
    report = TrainReport()
    best_val_acc = -1.0
    best_params = model.copy_params()
    best_bn = {k: (s.running_mean.copy(), s.running_var.copy()) for k, s in model.bn_states.items()}
    for _ in range(cfg.epochs):
        order = rng.permutation(len(x_train))
        tr_loss, tr_acc = _epoch_pass(model, x_train[order], y_train[order], cfg.batch_size, optimizer)
        val_loss, val_acc = _epoch_pass(model, x_val, y_val, cfg.batch_size)
        optimizer.lr = scheduler.step(val_loss)
        report.train_loss.append(tr_loss)
        report.train_accuracy.append(tr_acc)
        report.val_loss.append(val_loss)
        report.val_accuracy.append(val_acc)
        report.learning_rate.append(optimizer.lr)
        if val_acc > best_val_acc:
            best_val_acc = val_acc
            report.best_epoch = len(report.val_loss)
            best_params = model.copy_params()
            best_bn = {k: (s.running_mean.copy(), s.running_var.copy()) for k, s in model.bn_states.items()}
    model.load_params(best_params)
    for k, (m, v) in best_bn.items():
        model.bn_states[k].running_mean = m
        model.bn_states[k].running_var = v
    return model, report


def evaluate(model: TiltNet, records: Sequence[DatasetRecord],
             batch_size: int = 256) -> tuple[float, np.ndarray]:
    """Eval-mode accuracy and the 9x9 confusion matrix (rows = true class)."""
    x, y = records_to_arrays(records)
    classes = model.spec.classes
    confusion = np.zeros((classes, classes), dtype=np.int64)
    for start in range(0, len(x), batch_size):
        pred = model.predict(x[start:start + batch_size])
        for t, p in zip(y[start:start + batch_size], pred):
            confusion[t, p] += 1
    accuracy = float(np.trace(confusion)) / len(x)
    return accuracy, confusion
